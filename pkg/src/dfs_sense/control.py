"""Protected spin configurations, flip-time schedules, and effective spectra.

Flipping a site's population at an intermediate time realizes fractional
time-averaged spins, which lets a protected configuration set span a chosen
ladder of generator eigenvalues. All level arithmetic stays in exact
rationals whenever the inputs are rational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import Degenerate, NoSignalComponent, TooLarge, Unreachable
from .fields import (NoiseModel, SensorArray, SpatialField, _as_vector,
                     dfs_condition, effective_signal_gap)

Number = float | int | Fraction


def _exactable(*values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _exact(v: Number) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class SpinConfig:
    """Effective time-averaged spin per site."""

    s: tuple[Number, ...]

    def __array__(self, dtype=None, copy=None):
        return np.asarray([float(v) for v in self.s], dtype=dtype or float)

    @property
    def J(self) -> int:
        return len(self.s)

    def minus(self, other: "SpinConfig") -> tuple[Number, ...]:
        return tuple(a - b for a, b in zip(self.s, other.s))


@dataclass(frozen=True)
class FlipSchedule:
    """Piecewise-constant spin trajectory for one site.

    The site holds start_sign * local_max, inverting at each flip fraction
    (ascending, in (0, 1)). No flips means the site is held the whole time.
    """

    flip_fractions: tuple[Number, ...]
    start_sign: int
    local_max: Number

    def __post_init__(self):
        if self.start_sign not in (-1, 1):
            raise ValueError("start_sign must be +-1")
        fr = [float(f) for f in self.flip_fractions]
        if any(not (0.0 < f < 1.0) for f in fr):
            raise ValueError("flip fractions must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValueError("flip fractions must be strictly ascending")

    def segments(self) -> list[tuple[Number, Number, int]]:
        """(start, end, sign) pieces covering [0, 1]."""
        bounds = [0, *self.flip_fractions, 1]
        out = []
        sign = self.start_sign
        for a, b in zip(bounds, bounds[1:]):
            out.append((a, b, sign))
            sign = -sign
        return out

    def realized_average(self) -> Number:
        """Time average of the trajectory over [0, 1]."""
        total = 0
        for a, b, sign in self.segments():
            total += sign * self.local_max * (b - a)
        return total

    def accumulated_phase(self, field_amplitude: Number, total_time: Number) -> Number:
        """Phase gathered under a static field: integral of f * s(t) dt.

        Piecewise-constant integration; equals
        field_amplitude * realized_average() * total_time by linearity.
        """
        total = 0
        for a, b, sign in self.segments():
            total += field_amplitude * sign * self.local_max * (b - a) * total_time
        return total


def flip_schedule_for(target: Number, local_max: Number) -> FlipSchedule:
    """Single-site schedule whose time average equals ``target``.

    Holds +local_max for a fraction alpha = (target + local_max)/(2 local_max)
    and -local_max for the rest.
    """
    if float(local_max) <= 0.0:
        raise Unreachable("local_max must be positive")
    if abs(float(target)) > float(local_max):
        raise Unreachable(
            f"target {float(target)} exceeds the physical spin {float(local_max)}")
    if _exactable(target, local_max):
        alpha = (_exact(target) + _exact(local_max)) / (2 * _exact(local_max))
    else:
        alpha = (float(target) + float(local_max)) / (2.0 * float(local_max))
    if float(alpha) >= 1.0:
        return FlipSchedule((), +1, local_max)
    if float(alpha) <= 0.0:
        return FlipSchedule((), -1, local_max)
    return FlipSchedule((alpha,), +1, local_max)


@dataclass(frozen=True)
class EffectiveSpectrum:
    """Distinct generator eigenvalues reachable by a protected configuration set."""

    levels: tuple[Number, ...]
    configs: tuple[SpinConfig, ...] | None = None

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("a spectrum needs at least one level")
        fl = [float(v) for v in self.levels]
        if any(b <= a for a, b in zip(fl, fl[1:])):
            raise ValueError("levels must be strictly ascending")
        if self.configs is not None and len(self.configs) != len(self.levels):
            raise ValueError("one configuration per level expected")

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def Delta(self) -> Number:
        return self.levels[-1] - self.levels[0]

    @property
    def delta(self) -> Number:
        """Minimal gap between consecutive levels (0 for a single level)."""
        if self.L < 2:
            return 0
        return min(b - a for a, b in zip(self.levels, self.levels[1:]))

    @property
    def levels_float(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.levels], dtype=float)

    def is_linear(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """True when consecutive gaps are uniform to relative tolerance."""
        if self.L < 3:
            return True
        gaps = np.diff(self.levels_float)
        return bool(np.all(np.abs(gaps - gaps[0]) <= tolerances.linear_gap_rtol * abs(gaps[0])))

    @property
    def gap(self) -> float:
        """Uniform gap Delta/(L-1); callers must have checked is_linear."""
        return float(self.Delta) / (self.L - 1)

    @classmethod
    def from_levels(cls, values: Sequence[Number],
                    configs: Sequence[SpinConfig] | None = None,
                    tolerances: Tolerances = DEFAULT_TOLERANCES) -> "EffectiveSpectrum":
        """Sort and deduplicate raw level values.

        Exact inputs deduplicate exactly; float inputs merge levels closer
        than level_merge_rtol * range.
        """
        pairs = list(zip(values, configs)) if configs is not None else [(v, None) for v in values]
        pairs.sort(key=lambda p: float(p[0]))
        if _exactable(*[p[0] for p in pairs]):
            merged: list[tuple[Number, SpinConfig | None]] = []
            for v, c in pairs:
                if merged and merged[-1][0] == v:
                    continue
                merged.append((v, c))
        else:
            span = float(pairs[-1][0]) - float(pairs[0][0])
            tol = tolerances.level_merge_rtol * span if span > 0 else 0.0
            merged = []
            for v, c in pairs:
                if merged and float(v) - float(merged[-1][0]) <= tol:
                    continue
                merged.append((v, c))
        lv = tuple(v for v, _ in merged)
        cf = tuple(c for _, c in merged) if configs is not None else None
        return cls(lv, cf)


@dataclass(frozen=True)
class LadderPlan:
    """Equally spaced configuration ladder aligned with the protected signal."""

    configs: tuple[SpinConfig, ...]
    spectrum: EffectiveSpectrum
    site_schedules: tuple[FlipSchedule, ...]
    economy_dims: tuple[int, ...]


def ladder_probe(f_perp: SpatialField, n: int) -> LadderPlan:
    """Configuration ladder s_m = m * f_perp / f_perp_max, m in {-n/2..n/2}.

    Produces n+1 protected configurations whose generator eigenvalues are
    equally spaced with range n * |f_perp|^2 / f_perp_max. site_schedules
    realize the top rung (one flip per site at (1 + f_j/f_max)/2); lower
    rungs reuse the same flip time on proportionally fewer quanta.
    economy_dims reports the per-site dimension ceil(n |f_j| / f_max) that a
    trimmed local system would need.
    """
    if n < 0 or n % 2 != 0:
        raise ValueError("n must be a nonnegative even integer")
    vec = f_perp.vector
    if not np.any(vec != 0.0):
        raise NoSignalComponent("f_perp is zero")
    fvals = list(f_perp.values)
    if _exactable(*fvals):
        fvals = [_exact(v) for v in fvals]
        fmax = max(abs(v) for v in fvals)
        norm2 = sum(v * v for v in fvals)
    else:
        fvals = [float(v) for v in fvals]
        fmax = max(abs(v) for v in fvals)
        norm2 = float(vec @ vec)

    configs = []
    levels = []
    for m in range(-(n // 2), n // 2 + 1):
        s = tuple(m * v / fmax for v in fvals)
        configs.append(SpinConfig(s))
        levels.append(m * norm2 / fmax)
    spectrum = EffectiveSpectrum.from_levels(levels, configs)

    schedules = []
    dims = []
    half_n = Fraction(n, 2) if _exactable(*fvals) else n / 2
    for v in fvals:
        if n == 0:
            schedules.append(FlipSchedule((), +1, Fraction(1, 2)))
            dims.append(1)
            continue
        target = half_n * v / fmax
        schedules.append(flip_schedule_for(target, half_n))
        dims.append(int(np.ceil(n * abs(float(v)) / float(fmax) - 1e-12)) or 1)
    return LadderPlan(tuple(configs), spectrum, tuple(schedules), tuple(dims))


def sign_matched_anchor(array: SensorArray, f_perp: SpatialField) -> SpinConfig:
    """Extremal configuration maximizing f_perp . s (ties broken toward +)."""
    tops = array.max_spins()
    vals = []
    for v, top in zip(f_perp.values, tops):
        sign = -1 if float(v) < 0 else 1
        vals.append(sign * top)
    return SpinConfig(tuple(vals))


def enumerate_dfs_configs(array: SensorArray, noise: NoiseModel,
                          anchor: SpinConfig | None = None,
                          f_perp: SpatialField | None = None,
                          tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[SpinConfig]:
    """All physical spin configurations coherent with the anchor.

    Enumerates the full product ladder (guarded) and keeps configurations c
    with every f_k . (c - anchor) = 0. With no anchor given, the extremal
    sign-matched configuration along f_perp is used. Output sorted by
    effective_signal_gap to the anchor when f_perp is available, else
    lexicographically.
    """
    if array.total_configurations > tolerances.enumeration_guard:
        raise TooLarge(
            f"{array.total_configurations} configurations exceed the guard "
            f"{tolerances.enumeration_guard}")
    if anchor is None:
        if f_perp is None:
            raise ValueError("an anchor or f_perp is required")
        anchor = sign_matched_anchor(array, f_perp)

    ladders = [array.site_spin_values(j) for j in range(array.J)]
    out = []
    for combo in itertools.product(*ladders):
        c = SpinConfig(combo)
        if dfs_condition(c, anchor, noise, tolerances):
            out.append(c)
    if f_perp is not None:
        out.sort(key=lambda c: (effective_signal_gap(c, anchor, f_perp),
                                tuple(float(v) for v in c.s)))
    else:
        out.sort(key=lambda c: tuple(float(v) for v in c.s))
    return out


def equalize_multidim(f_perp: SpatialField | Sequence[Number],
                      tolerances: Tolerances = DEFAULT_TOLERANCES
                      ) -> tuple[Number, EffectiveSpectrum]:
    """Equalized 4-level ladder on two protected coordinates.

    With configurations (+-s_eff, +-1/2) projected onto a two-component
    f_perp, choosing s_eff = f2 / (4 f1) makes the top projection three
    times the second one, which spaces all four projections uniformly
    (gap f2/2). Both components must be nonzero.
    """
    vals = list(getattr(f_perp, "values", f_perp))
    if len(vals) != 2:
        raise ValueError("exactly two effective coordinates expected")
    f1, f2 = vals
    if float(f1) == 0.0:
        raise Degenerate("first effective component vanishes; ratio condition unsolvable")
    if float(f2) == 0.0:
        raise Degenerate("second effective component vanishes; levels collapse to two")
    if _exactable(f1, f2):
        f1, f2 = _exact(f1), _exact(f2)
        half = Fraction(1, 2)
    else:
        f1, f2 = float(f1), float(f2)
        half = 0.5
    s_eff = f2 / (4 * f1)
    configs = [SpinConfig((a * s_eff, b * half)) for a in (+1, -1) for b in (+1, -1)]
    levels = [c.s[0] * f1 + c.s[1] * f2 for c in configs]
    spectrum = EffectiveSpectrum.from_levels(levels, configs, tolerances)
    if spectrum.L != 4:
        raise Degenerate("projections collapsed; fewer than 4 distinct levels")
    return s_eff, spectrum


@dataclass(frozen=True)
class ShapedSpectrum:
    """Arbitrary spectrum carved from degenerate two-level copies.

    switch_fractions[i] is the fraction of the evolution each copy spends in
    the upper extremal state to realize spectrum.levels[i]; half_range_mixing
    marks the asymmetric variant (targets not closed under negation), which
    mixes against a zero-eigenvalue reference instead of the lower extreme.
    """

    spectrum: EffectiveSpectrum
    switch_fractions: tuple[Number, ...]
    half_range_mixing: bool
    copies_used: int


def shape_spectrum(base: EffectiveSpectrum, degeneracy: int,
                   targets: Sequence[Number],
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> ShapedSpectrum:
    """Realize arbitrary eigenvalues inside a two-level range by timed switching.

    Each target lam in [-Delta/2, Delta/2] is produced by holding the upper
    extremal state for a fraction alpha = (lam + Delta/2)/Delta of the time.
    Symmetric target sets pair (+lam, -lam) on one degenerate copy each;
    asymmetric sets use one copy per target and are flagged.
    """
    if base.L != 2:
        raise ValueError("base must be a two-level spectrum")
    if degeneracy < 1:
        raise ValueError("degeneracy must be >= 1")
    if len(targets) == 0:
        raise ValueError("at least one target level required")
    delta = base.Delta
    half = delta / 2
    for lam in targets:
        if abs(float(lam)) > float(half) * (1 + 1e-15):
            raise Unreachable(f"target {float(lam)} outside [-Delta/2, Delta/2]")

    exact = _exactable(delta, *targets)
    if exact:
        delta = _exact(delta)
        half = delta / 2
        tlist = sorted({_exact(t) for t in targets})
    else:
        tlist = sorted({float(t) for t in targets})
    symmetric = all(any(abs(float(t) + float(u)) <= 1e-12 * max(1.0, abs(float(t)))
                        for u in tlist) for t in tlist)
    if symmetric:
        copies = sum(1 for t in tlist if float(t) > 0) + (1 if any(float(t) == 0 for t in tlist) else 0)
    else:
        copies = len(tlist)
    if copies > degeneracy:
        raise Unreachable(
            f"{copies} degenerate copies needed, only {degeneracy} available")

    fractions = tuple((lam + half) / delta for lam in tlist)
    spectrum = EffectiveSpectrum.from_levels(tlist, None, tolerances)
    return ShapedSpectrum(spectrum, fractions, not symmetric, copies)
