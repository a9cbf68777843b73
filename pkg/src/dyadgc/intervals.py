"""Mining of correlated, maximal, non-overlapping intervals between two signals.

An interval is *correlated* at threshold ``beta`` when it and every one of its
subintervals of length at least ``l_min`` have Pearson correlation at least
``beta``. A correlated interval is *maximal* when growing it by one frame on
either side breaks that property. From all maximal intervals (which may
overlap each other) the *longest set* is the non-overlapping subset with the
largest total coverage.

The miner builds correlated intervals bottom-up: an interval of length
``l + 1`` is correlated iff both of its length-``l`` subintervals are
correlated and its own correlation clears the threshold. By induction this is
exactly the all-subintervals definition, while costing O(n) vectorized work
per length level instead of enumerating subintervals.

All interval coordinates are absolute frame indices (closed intervals), so
results from different shifts, runs, and action units can be pooled directly.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptyInput, ShapeError
from .timeseries import BinaryMask, TimeSeries, median_filter

#: relative variance floor below which a window is treated as constant (r = 0).
_FLAT_REL = 1e-10


@dataclass(frozen=True)
class IntervalParams:
    """Tuning knobs for relevant-interval selection.

    Defaults follow the standard recipe for 25 fps facial recordings: 3 s
    minimum window, correlation threshold 0.8, reaction shifts up to ~0.5 s in
    steps of 4 frames, 2 s median filter, and 12-frame dilation.
    """

    beta: float = 0.8
    l_min: int = 75
    shifts: tuple[int, ...] = (-12, -8, -4, 0, 4, 8, 12)
    median_kernel: int = 51
    extension: int = 12

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"beta must be in (0, 1], got {self.beta}")
        if self.l_min < 2:
            raise ConfigError(f"l_min must be >= 2, got {self.l_min}")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ConfigError(f"median_kernel must be odd, got {self.median_kernel}")
        if self.extension < 0:
            raise ConfigError(f"extension must be >= 0, got {self.extension}")
        object.__setattr__(self, "shifts", tuple(int(s) for s in self.shifts))


@dataclass(frozen=True, order=True)
class Interval:
    """Closed frame interval ``[start, end]``, optionally tagged with the shift it was mined at."""

    start: int
    end: int
    shift: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.start > self.end:
            raise ShapeError(f"interval start {self.start} > end {self.end}")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Interval") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise-disjoint intervals."""

    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        ivs = tuple(self.intervals)
        for prev, cur in zip(ivs, ivs[1:]):
            if cur.start <= prev.end:
                raise ShapeError(f"intervals overlap or are unsorted: {prev} vs {cur}")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def total_length(self) -> int:
        return sum(iv.length for iv in self.intervals)

    def coverage_mask(self, length: int, start_frame: int = 0) -> BinaryMask:
        """Coverage as a mask over ``[start_frame, start_frame + length - 1]``."""
        bits = np.zeros(length, dtype=bool)
        last = start_frame + length - 1
        for iv in self.intervals:
            if iv.start < start_frame or iv.end > last:
                raise ShapeError(f"{iv} outside span [{start_frame}, {last}]")
            bits[iv.start - start_frame : iv.end - start_frame + 1] = True
        return BinaryMask(bits, start_frame)

    @classmethod
    def from_mask(cls, mask: BinaryMask) -> "IntervalSet":
        return cls(tuple(Interval(a, b) for a, b in mask.runs()))

    def to_tsv(self) -> str:
        """One ``start<TAB>end<TAB>shift`` line per interval (shift may be empty)."""
        lines = [
            f"{iv.start}\t{iv.end}\t{'' if iv.shift is None else iv.shift}"
            for iv in self.intervals
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_tsv(cls, text: str) -> "IntervalSet":
        out = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            parts = raw.split("\t")
            if len(parts) != 3:
                raise ShapeError(f"line {ln}: expected 3 tab-separated fields")
            try:
                shift = int(parts[2]) if parts[2].strip() else None
                out.append(Interval(int(parts[0]), int(parts[1]), shift))
            except ValueError as exc:
                raise ShapeError(f"line {ln}: {exc}") from exc
        return cls(tuple(out))


def _sliding_r(csum, length: int):
    """Pearson r of every window of ``length`` from prefix sums of centered data.

    ``csum`` is the tuple (cx, cy, cxx, cyy, cxy, flat_tol) with prefix arrays
    of size n + 1. Windows whose variance falls under the flatness tolerance
    are reported as r = 0.
    """
    cx, cy, cxx, cyy, cxy, tol = csum
    l = length
    sx = cx[l:] - cx[:-l]
    sy = cy[l:] - cy[:-l]
    sxx = cxx[l:] - cxx[:-l]
    syy = cyy[l:] - cyy[:-l]
    sxy = cxy[l:] - cxy[:-l]
    vx = sxx - sx * sx / l
    vy = syy - sy * sy / l
    cov = sxy - sx * sy / l
    ok = (vx > tol * l) & (vy > tol * l)
    denom = np.sqrt(np.where(ok, vx * vy, 1.0))
    return np.where(ok, np.clip(cov / denom, -1.0, 1.0), 0.0)


def _prefix_sums(xv: np.ndarray, yv: np.ndarray):
    # Center on the global means first: keeps the cancellation in
    # sum(x^2) - sum(x)^2/l benign for offset-heavy signals.
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    scale = max(float(np.mean(xc * xc)), float(np.mean(yc * yc)), 1e-300)
    pad = lambda a: np.concatenate(([0.0], np.cumsum(a)))
    return (pad(xc), pad(yc), pad(xc * xc), pad(yc * yc), pad(xc * yc), scale * _FLAT_REL)


def correlated_intervals(x: TimeSeries, y: TimeSeries, p: IntervalParams) -> list[Interval]:
    """All maximal correlated intervals between two aligned series.

    The result is sorted by start frame; intervals may overlap each other.
    Coordinates are absolute frames (offset by ``x.start_frame``).
    """
    n = len(x)
    if len(y) != n:
        raise ShapeError(f"length mismatch: {n} vs {len(y)}")
    if n < p.l_min:
        raise ShapeError(f"series length {n} below minimum interval length {p.l_min}")
    csum = _prefix_sums(x.values, y.values)
    off = x.start_frame

    out: list[Interval] = []
    l = p.l_min
    valid = _sliding_r(csum, l) >= p.beta
    while True:
        if not valid.any():
            break
        if l == n:
            if valid[0]:
                out.append(Interval(off, off + n - 1))
            break
        # Level l+1 validity: both length-l children valid and own r >= beta.
        nxt = valid[:-1] & valid[1:] & (_sliding_r(csum, l + 1) >= p.beta)
        ext_left = np.concatenate(([False], nxt))
        ext_right = np.concatenate((nxt, [False]))
        for a in np.flatnonzero(valid & ~ext_left & ~ext_right):
            out.append(Interval(off + int(a), off + int(a) + l - 1))
        valid = nxt
        l += 1
    out.sort()
    return out


_Solution = tuple[int, int, tuple[int, ...], tuple[Interval, ...]]


def _better(a: _Solution, b: _Solution) -> bool:
    """Larger total length, then fewer intervals, then earliest starts."""
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


def _shift_order(iv: Interval) -> tuple:
    s = iv.shift
    return (s is None, abs(s) if s is not None else 0, s if s is not None else 0)


def longest_set(candidates) -> IntervalSet:
    """Non-overlapping subset of candidate intervals maximizing total length.

    Weighted-interval-scheduling dynamic program with deterministic
    tie-breaking: among equal coverage, prefer fewer intervals, then the
    lexicographically earliest start frames. Duplicate (start, end) candidates
    are collapsed, keeping the smallest-magnitude shift tag.
    """
    items: list[Interval] = []
    seen: set[tuple[int, int]] = set()
    for iv in sorted(candidates, key=lambda iv: (iv.start, iv.end, _shift_order(iv))):
        key = (iv.start, iv.end)
        if key not in seen:
            seen.add(key)
            items.append(iv)
    n = len(items)
    if n == 0:
        return IntervalSet()
    starts = [iv.start for iv in items]
    empty: _Solution = (0, 0, (), ())
    sol: list[_Solution] = [empty] * (n + 1)
    for i in range(n - 1, -1, -1):
        skip = sol[i + 1]
        j = bisect.bisect_right(starts, items[i].end, lo=i + 1)
        rest = sol[j]
        take: _Solution = (
            rest[0] + items[i].length,
            rest[1] + 1,
            (items[i].start,) + rest[2],
            (items[i],) + rest[3],
        )
        sol[i] = take if _better(take, skip) else skip
    return IntervalSet(sol[0][3])


def mine_shifted(x: TimeSeries, y: TimeSeries, p: IntervalParams) -> IntervalSet:
    """Longest set of maximal correlated intervals pooled over the shift grid.

    Shift ``s`` pairs ``x[t]`` with ``y[t + s]``, i.e. positive shifts test
    the second signal reacting *after* the first. Intervals are always
    reported in unshifted ``x`` frame coordinates; shifts whose overlap with
    the partner is shorter than ``l_min`` contribute nothing.
    """
    n = len(x)
    if len(y) != n:
        raise ShapeError(f"length mismatch: {n} vs {len(y)}")
    if n < p.l_min:
        raise ShapeError(f"series length {n} below minimum interval length {p.l_min}")
    candidates: list[Interval] = []
    for s in dict.fromkeys(p.shifts):
        if n - abs(s) < p.l_min:
            continue
        if s >= 0:
            xa, ya, off = x.values[: n - s], y.values[s:], 0
        else:
            xa, ya, off = x.values[-s:], y.values[: n + s], -s
        xs = TimeSeries(xa, x.start_frame + off, x.frame_rate_hz)
        ys = TimeSeries(ya, x.start_frame + off, y.frame_rate_hz)
        for iv in correlated_intervals(xs, ys, p):
            candidates.append(Interval(iv.start, iv.end, shift=s))
    return longest_set(candidates)


def intersect_sets(sets) -> IntervalSet:
    """Frame-wise intersection of interval sets, re-segmented into intervals."""
    sets = list(sets)
    if not sets:
        raise EmptyInput("intersect_sets needs at least one interval set")
    result = list(sets[0])
    for other in sets[1:]:
        merged = []
        i = j = 0
        a, b = result, list(other)
        while i < len(a) and j < len(b):
            lo = max(a[i].start, b[j].start)
            hi = min(a[i].end, b[j].end)
            if lo <= hi:
                merged.append(Interval(lo, hi))
            if a[i].end < b[j].end:
                i += 1
            else:
                j += 1
        result = merged
    return IntervalSet(tuple(result))


def postprocess(s: IntervalSet, p: IntervalParams, series_len: int, start_frame: int = 0) -> IntervalSet:
    """Median-filter the coverage mask, then dilate surviving intervals.

    Short blips are removed by a majority filter of ``p.median_kernel``
    frames; each surviving interval then grows by ``p.extension`` frames per
    side, clipped to the series span. Overlaps created by the dilation are
    merged.
    """
    if series_len <= 0:
        return IntervalSet()
    mask = s.coverage_mask(series_len, start_frame)
    filtered = median_filter(mask, p.median_kernel)
    last = start_frame + series_len - 1
    merged: list[list[int]] = []
    for a, b in filtered.runs():
        a = max(a - p.extension, start_frame)
        b = min(b + p.extension, last)
        if merged and a <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return IntervalSet(tuple(Interval(a, b) for a, b in merged))


def segment_series(x: TimeSeries, y: TimeSeries, s: IntervalSet) -> list[tuple[TimeSeries, TimeSeries]]:
    """Cut the aligned sub-series pair for every interval.

    Interval boundaries stay explicit (one pair per interval, anchored at its
    own start frame) so downstream regressions can refuse to straddle them.
    """
    if len(x) != len(y) or x.start_frame != y.start_frame:
        raise ShapeError("segment_series needs frame-aligned series of equal length")
    out = []
    for iv in s:
        out.append((x.slice_frames(iv.start, iv.end), y.slice_frames(iv.start, iv.end)))
    return out
