import csv
from pathlib import Path

import numpy as np
import pytest

from dyadgc.au_features import (
    AU_IDS,
    AURecording,
    EXPRESSIONS,
    EXPRESSIONS_BY_NAME,
    ExpressionDef,
    au_activation,
    au_column,
    baseline_stats,
    confidence_sync,
    count_activations,
    expression_activation,
    expression_signal,
    parse_au_csv,
    parse_au_text,
    write_au_csv,
)
from dyadgc.errors import ConfigError, DegenerateSeries, EmptyOverlap, FormatError
from dyadgc.timeseries import BinaryMask

DATA = Path(__file__).parent / "data"


def make_recording(n=20, pid="p1", condition="respectful", role="sender",
                   confidence=None, au_values=None, start=1):
    frames = np.arange(start, start + n)
    conf = np.ones(n) if confidence is None else np.asarray(confidence, dtype=float)
    intens = {a: np.full(n, 0.5) for a in AU_IDS}
    if au_values:
        for a, vals in au_values.items():
            intens[a] = np.asarray(vals, dtype=float)
    return AURecording(pid, condition, role, frames, conf, intens)


def csv_text(rows, header=None):
    if header is None:
        header = ["frame", "confidence"] + [au_column(a) for a in AU_IDS]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


class TestParse:
    def test_intensities_echoed(self):
        rows = []
        for i, v in enumerate([0.0, 1.0, 2.0]):
            vals = {a: 0.1 for a in AU_IDS}
            vals[6] = v
            rows.append([i + 1, 0.99] + [vals[a] for a in AU_IDS])
        rec = parse_au_text(csv_text(rows))
        np.testing.assert_allclose(rec.intensities[6], [0.0, 1.0, 2.0])
        assert rec.n_frames == 3

    def test_missing_confidence_column(self):
        header = ["frame"] + [au_column(a) for a in AU_IDS]
        text = csv_text([[1] + [0.0] * len(AU_IDS)], header=header)
        with pytest.raises(FormatError, match="confidence"):
            parse_au_text(text)

    def test_non_numeric_cell_reports_row(self):
        rows = [[1, 0.99] + [0.0] * len(AU_IDS), [2, "oops"] + [0.0] * len(AU_IDS)]
        with pytest.raises(FormatError, match="row 3"):
            parse_au_text(csv_text(rows))

    def test_header_whitespace_tolerated(self):
        header = [" frame", " confidence"] + [f" {au_column(a)}" for a in AU_IDS]
        text = csv_text([[1, 0.5] + [1.0] * len(AU_IDS)], header=header)
        rec = parse_au_text(text)
        assert rec.n_frames == 1

    def test_extra_columns_ignored(self):
        header = ["frame", "confidence", "pose_Rx"] + [au_column(a) for a in AU_IDS]
        text = csv_text([[1, 0.9, 123.4] + [0.3] * len(AU_IDS)], header=header)
        rec = parse_au_text(text)
        assert rec.intensities[45][0] == pytest.approx(0.3)

    def test_round_trip_large_file(self, tmp_path):
        rng = np.random.default_rng(0)
        n = 10_000
        rec = AURecording(
            "p9", "contempt", "receiver",
            np.arange(1, n + 1),
            rng.random(n),
            {a: rng.random(n) * 5 for a in AU_IDS},
        )
        path = tmp_path / "rec.csv"
        write_au_csv(path, rec)
        again = parse_au_csv(path, "p9", "contempt", "receiver")
        np.testing.assert_array_equal(again.frame_indices, rec.frame_indices)
        np.testing.assert_array_equal(again.confidence, rec.confidence)
        for a in AU_IDS:
            np.testing.assert_array_equal(again.intensities[a], rec.intensities[a])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            parse_au_csv(tmp_path / "nope.csv")

    def test_decreasing_frames_rejected(self):
        rows = [[2, 0.9] + [0.0] * len(AU_IDS), [1, 0.9] + [0.0] * len(AU_IDS)]
        with pytest.raises(FormatError):
            parse_au_text(csv_text(rows))


class TestRegistry:
    def test_matches_machine_readable_table(self):
        with (DATA / "expression_aus.csv").open() as fh:
            table = {
                row["expression"]: frozenset(int(a) for a in row["au_ids"].split())
                for row in csv.DictReader(fh)
            }
        assert {e.name: e.au_ids for e in EXPRESSIONS} == table

    def test_eleven_expressions(self):
        assert len(EXPRESSIONS) == 11

    def test_anger_lower_not_computable_from_regression_aus(self):
        assert not EXPRESSIONS_BY_NAME["anger_lower"].available_in(AU_IDS)
        assert all(
            e.available_in(AU_IDS) for e in EXPRESSIONS if e.name != "anger_lower"
        )

    def test_empty_expression_rejected(self):
        with pytest.raises(ConfigError):
            ExpressionDef("nothing", frozenset())


class TestConfidenceSync:
    def test_nothing_dropped_at_full_confidence(self):
        s = make_recording(30)
        r = make_recording(30, pid="p1r", role="receiver")
        pair = confidence_sync(s, r, 0.89)
        assert pair.sender.n_frames == 30
        assert [(iv.start, iv.end) for iv in pair.kept_frames] == [(1, 30)]

    def test_either_side_drops_both(self):
        conf_s = np.ones(10)
        conf_s[4] = 0.5
        s = make_recording(10, confidence=conf_s)
        r = make_recording(10, pid="p1r", role="receiver")
        pair = confidence_sync(s, r, 0.89)
        assert 5 not in pair.sender.frame_indices  # frame index 5 = row 4
        assert 5 not in pair.receiver.frame_indices
        assert pair.sender.n_frames == 9

    @pytest.mark.parametrize("seed", range(8))
    def test_kept_set_matches_per_frame_and(self, seed):
        rng = np.random.default_rng(seed)
        n = 50
        cs, cr = rng.random(n), rng.random(n)
        s = make_recording(n, confidence=cs)
        r = make_recording(n, pid="p1r", role="receiver", confidence=cr)
        want = np.flatnonzero((cs >= 0.89) & (cr >= 0.89)) + 1
        if want.size == 0:
            with pytest.raises(EmptyOverlap):
                confidence_sync(s, r, 0.89)
            return
        pair = confidence_sync(s, r, 0.89)
        np.testing.assert_array_equal(pair.sender.frame_indices, want)
        np.testing.assert_array_equal(pair.receiver.frame_indices, want)

    def test_empty_intersection(self):
        s = make_recording(10, confidence=np.full(10, 0.2))
        r = make_recording(10, pid="p1r", role="receiver")
        with pytest.raises(EmptyOverlap):
            confidence_sync(s, r, 0.89)

    def test_gap_runs_recorded(self):
        conf = np.ones(10)
        conf[3] = conf[4] = 0.1
        s = make_recording(10, confidence=conf)
        r = make_recording(10, pid="p1r", role="receiver")
        pair = confidence_sync(s, r)
        assert [(iv.start, iv.end) for iv in pair.kept_frames] == [(1, 3), (6, 10)]


class TestBaseline:
    def test_constant_intensity(self):
        recs = [
            make_recording(10, condition=c, au_values={6: np.full(10, 2.0)})
            for c in ("respectful", "contempt", "objective")
        ]
        base = baseline_stats(recs)
        assert base.mean[6] == 2.0
        assert base.std[6] == 0.0
        assert base.complete

    def test_pooled_sample_std(self):
        rec = make_recording(4, au_values={6: [0.0, 0.0, 4.0, 4.0]})
        base = baseline_stats([rec])
        assert base.mean[6] == 2.0
        assert base.std[6] == pytest.approx(np.std([0, 0, 4, 4], ddof=1))

    def test_single_condition_flagged(self):
        base = baseline_stats([make_recording(10)])
        assert base.n_conditions == 1
        assert not base.complete

    def test_zero_frames(self):
        with pytest.raises(DegenerateSeries):
            baseline_stats([make_recording(0)])

    def test_mixed_participants_rejected(self):
        with pytest.raises(ConfigError):
            baseline_stats([make_recording(5), make_recording(5, pid="other")])


class TestActivation:
    def test_boundary_inclusive_at_zero_std(self):
        rec = make_recording(5, au_values={6: np.full(5, 2.0)})
        base = baseline_stats([rec])
        masks = au_activation(rec, base)
        assert masks[6].bits.all()  # intensity == mean and std == 0: >= holds

    def test_threshold_arithmetic(self):
        rec = make_recording(2, au_values={6: [1.9, 2.0]})
        base_rec = make_recording(40, au_values={6: list(np.tile([-1, 3], 20))})
        base = baseline_stats([base_rec])
        # mean 1, std ~2.0254: threshold slightly above 2.0 at factor 0.5
        thr = base.mean[6] + 0.5 * base.std[6]
        masks = au_activation(rec, base)
        np.testing.assert_array_equal(masks[6].bits, np.array([1.9, 2.0]) >= thr)

    def test_single_run_for_single_crossing(self):
        vals = np.concatenate([np.zeros(10), np.full(5, 5.0), np.zeros(10)])
        rec = make_recording(25, au_values={6: vals})
        base = baseline_stats([rec])
        masks = au_activation(rec, base)
        assert masks[6].runs() == [(11, 15)]

    def test_raising_factor_is_monotone(self):
        rng = np.random.default_rng(1)
        rec = make_recording(200, au_values={a: rng.random(200) * 5 for a in AU_IDS})
        base = baseline_stats([rec])
        low = au_activation(rec, base, factor=0.25)
        high = au_activation(rec, base, factor=1.0)
        for a in AU_IDS:
            assert not (high[a].bits & ~low[a].bits).any()

    def test_and_semantics(self):
        rng = np.random.default_rng(2)
        rec = make_recording(100, au_values={a: rng.random(100) * 5 for a in AU_IDS})
        base = baseline_stats([rec])
        masks = au_activation(rec, base)
        expr = EXPRESSIONS_BY_NAME["sadness_lower"]
        combined = expression_activation(masks, expr)
        np.testing.assert_array_equal(combined.bits, masks[15].bits & masks[17].bits)

    def test_absorbing_inactive_au(self):
        masks = {
            15: BinaryMask(np.ones(10, dtype=bool), 1),
            17: BinaryMask(np.zeros(10, dtype=bool), 1),
        }
        out = expression_activation(masks, EXPRESSIONS_BY_NAME["sadness_lower"])
        assert not out.bits.any()

    def test_single_au_expression_identity(self):
        rng = np.random.default_rng(3)
        rec = make_recording(50, au_values={6: rng.random(50) * 5})
        base = baseline_stats([rec])
        masks = au_activation(rec, base)
        out = expression_activation(masks, EXPRESSIONS_BY_NAME["happiness_upper"])
        np.testing.assert_array_equal(out.bits, masks[6].bits)

    def test_missing_mask_rejected(self):
        with pytest.raises(ConfigError):
            expression_activation({15: BinaryMask(np.ones(3, dtype=bool))},
                                  EXPRESSIONS_BY_NAME["sadness_lower"])


class TestExpressionSignal:
    def test_single_au_is_identity(self):
        rng = np.random.default_rng(4)
        vals = rng.random(30) * 5
        rec = make_recording(30, au_values={6: vals})
        sig = expression_signal(rec, EXPRESSIONS_BY_NAME["happiness_upper"])
        np.testing.assert_allclose(sig.values, vals)
        assert sig.start_frame == 1

    def test_two_au_mean(self):
        rec = make_recording(1, au_values={15: [1.0], 17: [3.0]})
        sig = expression_signal(rec, EXPRESSIONS_BY_NAME["sadness_lower"])
        assert sig.values[0] == 2.0

    def test_matches_per_frame_mean(self):
        rng = np.random.default_rng(5)
        rec = make_recording(60, au_values={a: rng.random(60) * 5 for a in AU_IDS})
        expr = EXPRESSIONS_BY_NAME["disgust_lower"]
        sig = expression_signal(rec, expr)
        want = np.mean([rec.intensities[a] for a in sorted(expr.au_ids)], axis=0)
        np.testing.assert_allclose(sig.values, want)

    def test_missing_au(self):
        rec = make_recording(10)
        with pytest.raises(ConfigError):
            expression_signal(rec, EXPRESSIONS_BY_NAME["anger_lower"])


class TestCounting:
    def test_empty_mask(self):
        assert count_activations(BinaryMask(np.zeros(100, dtype=bool)), 100) == 0.0

    def test_published_order_of_magnitude(self):
        bits = np.zeros(1000, dtype=bool)
        bits[:129] = True
        assert count_activations(BinaryMask(bits), 1000) == pytest.approx(0.129)

    def test_full_mask(self):
        assert count_activations(BinaryMask(np.ones(50, dtype=bool)), 50) == 1.0

    def test_bad_video_len(self):
        with pytest.raises(ConfigError):
            count_activations(BinaryMask(np.ones(5, dtype=bool)), 0)
