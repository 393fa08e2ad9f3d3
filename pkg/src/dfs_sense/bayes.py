"""Probe states, prior-averaged evolution, precision measures, phase sampling.

Everything here works in the eigenbasis of the effective generator: a probe
is a complex amplitude vector over the L spectrum levels, time evolution
multiplies level phases, and averaging over a Gaussian prior damps
coherences by the prior's characteristic function. The canonical covariant
phase measurement supplies the single-shot readout; its outcome density
depends on the true phase only through a rigid shift, which the Monte-Carlo
layer exploits.

Sign conventions: evolution applies exp(-i omega t Gamma_mu); the
measurement kernel is exp(+i mu theta), so outcomes estimate the
accumulated phase per unit level index directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .control import EffectiveSpectrum
from .errors import Degenerate, InvalidState, NotLinear, NumericFailure


@dataclass(frozen=True)
class FlatPrior:
    """Uniform prior on [lower, lower + width)."""

    width: float
    lower: float = 0.0

    def __post_init__(self):
        if not (self.width > 0):
            raise ValueError("prior width must be positive")


@dataclass(frozen=True)
class GaussianPrior:
    """Normal prior; width is the standard deviation."""

    width: float
    mean: float = 0.0

    def __post_init__(self):
        if not (self.width > 0):
            raise ValueError("prior width must be positive")


Prior = FlatPrior | GaussianPrior


@dataclass(frozen=True)
class ProbeState:
    """Complex amplitudes over the levels of an effective spectrum."""

    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        v = self.vector
        if len(v) == 0:
            raise ValueError("empty probe")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.norm_atol * 10:
            raise ValueError(f"probe not normalized (|norm - 1| = {abs(norm - 1.0):.2e})")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)

    @property
    def L(self) -> int:
        return len(self.amplitudes)

    @classmethod
    def from_vector(cls, v) -> "ProbeState":
        v = np.asarray(v, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero amplitude vector")
        return cls(tuple((v / n).tolist()))


def _level_count(spectrum_or_L) -> int:
    if isinstance(spectrum_or_L, EffectiveSpectrum):
        return spectrum_or_L.L
    return int(spectrum_or_L)


def ghz_probe(spectrum_or_L) -> ProbeState:
    """Equal superposition of the two extremal levels."""
    L = _level_count(spectrum_or_L)
    if L < 2:
        raise Degenerate("an extremal superposition needs at least 2 levels")
    amps = np.zeros(L, dtype=complex)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return ProbeState(tuple(amps.tolist()))


def berry_wiseman_probe(spectrum_or_L) -> ProbeState:
    """Sine-weighted probe c_mu = sqrt(2/(L+1)) sin(pi mu/(L+1)), mu = 1..L.

    Optimal single-shot phase probe over a uniformly spaced ladder; its
    adjacent-level sharpness is cos(pi/(L+1)) exactly, giving Holevo
    variance tan^2(pi/(L+1)).
    """
    L = _level_count(spectrum_or_L)
    if L < 2:
        raise Degenerate("need at least 2 levels")
    mu = np.arange(1, L + 1)
    c = np.sqrt(2.0 / (L + 1)) * np.sin(np.pi * mu / (L + 1))
    return ProbeState(tuple(c.astype(complex).tolist()))


def uniform_probe(spectrum_or_L) -> ProbeState:
    """Flat superposition over all levels."""
    L = _level_count(spectrum_or_L)
    if L < 1:
        raise Degenerate("need at least 1 level")
    return ProbeState(tuple((np.ones(L, dtype=complex) / math.sqrt(L)).tolist()))


def evolve(probe: ProbeState, spectrum: EffectiveSpectrum, omega: float,
           t: float) -> ProbeState:
    """Phase evolution c_mu -> c_mu exp(-i omega t Gamma_mu)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if spectrum.L != probe.L:
        raise ValueError("probe and spectrum level counts differ")
    phases = np.exp(-1j * omega * t * spectrum.levels_float)
    return ProbeState(tuple((probe.vector * phases).tolist()))


@dataclass(frozen=True)
class AveragedState:
    """Prior-averaged density matrix in the generator eigenbasis."""

    rho: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise InvalidState("rho must be square")
        if np.max(np.abs(r - r.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(r)))):
            raise InvalidState("rho not Hermitian")
        if abs(np.trace(r).real - 1.0) > 1e-12 * 10:
            raise InvalidState("trace(rho) != 1")
        lam = np.linalg.eigvalsh(r)
        if lam.min() < DEFAULT_TOLERANCES.psd_floor:
            raise InvalidState(f"negative eigenvalue {lam.min():.2e}")
        object.__setattr__(self, "rho", r)

    @property
    def L(self) -> int:
        return self.rho.shape[0]


def averaged_state(probe: ProbeState, prior: GaussianPrior,
                   spectrum: EffectiveSpectrum, t: float,
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> AveragedState:
    """Average exp(-i w t G) rho exp(+i w t G) over the Gaussian prior.

    Valid only for uniformly spaced spectra: with gap g the (n, m) coherence
    picks up the prior characteristic function at t g (n - m):
    exp(-i mean t g (n-m)) * exp(-(t W0 g)^2 (n-m)^2 / 2).
    """
    if not isinstance(prior, GaussianPrior):
        raise TypeError("averaged_state requires a Gaussian prior")
    if not spectrum.is_linear(tolerances):
        raise NotLinear("averaging formula requires uniform level spacing")
    if spectrum.L != probe.L:
        raise ValueError("probe and spectrum level counts differ")
    c = probe.vector
    rho = np.outer(c, c.conj())
    if spectrum.L > 1:
        g = spectrum.gap
        n = np.arange(spectrum.L)
        dn = n[:, None] - n[None, :]
        damp = np.exp(-0.5 * (t * prior.width * g) ** 2 * dn.astype(float) ** 2)
        phase = np.exp(-1j * prior.mean * t * g * dn.astype(float))
        rho = rho * damp * phase
    return AveragedState(rho)


def qfi_pure(probe: ProbeState, spectrum: EffectiveSpectrum, t: float) -> float:
    """Information about omega in a pure probe: 4 t^2 Var(Gamma)."""
    if spectrum.L != probe.L:
        raise ValueError("probe and spectrum level counts differ")
    p = np.abs(probe.vector) ** 2
    g = spectrum.levels_float
    mean = float(p @ g)
    var = float(p @ (g - mean) ** 2)
    return 4.0 * t * t * var


def qfi_mixed(state: AveragedState, spectrum: EffectiveSpectrum, t: float,
              tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Information about omega in a mixed state (symmetric-derivative form).

    F = 2 t^2 sum_{k != l} (lam_k - lam_l)^2 / (lam_k + lam_l)
        |<k| G |l>|^2  over eigenpairs with lam_k + lam_l above the floor.
    Reduces to qfi_pure on pure inputs and to t^2 Delta^2 exp(-t^2 W0^2
    Delta^2) for the extremal two-level probe averaged over a Gaussian
    prior.
    """
    if state.L != spectrum.L:
        raise ValueError("state and spectrum level counts differ")
    lam, vecs = np.linalg.eigh(state.rho)
    lam = np.clip(lam, 0.0, None)
    gmat = vecs.conj().T @ (spectrum.levels_float[:, None] * vecs)
    num = (lam[:, None] - lam[None, :]) ** 2
    den = lam[:, None] + lam[None, :]
    keep = den > tolerances.sld_floor
    terms = np.where(keep, num / np.where(keep, den, 1.0), 0.0) * np.abs(gmat) ** 2
    return float(2.0 * t * t * np.sum(terms))


def variance_reduction(probe: ProbeState, prior: GaussianPrior,
                       spectrum: EffectiveSpectrum, t: float,
                       tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Posterior-to-prior variance ratio W1^2/W0^2 = 1 - W0^2 F(rho_bar).

    Equals 1 at t = 0 (no information) and 1 - x^2 exp(-x^2), x = t W0
    Delta, for the extremal two-level probe.
    """
    rho = averaged_state(probe, prior, spectrum, t, tolerances)
    return 1.0 - prior.width ** 2 * qfi_mixed(rho, spectrum, t, tolerances)


# ---------------------------------------------------------------------------
# canonical covariant phase measurement
# ---------------------------------------------------------------------------

def wrap_pi(x):
    """Wrap angles to [-pi, pi)."""
    return np.mod(np.asarray(x) + np.pi, 2.0 * np.pi) - np.pi


def canonical_phase_density(amplitudes_or_rho, thetas: np.ndarray) -> np.ndarray:
    """Outcome density of the canonical phase measurement on a level ladder.

    Pure input c: p(theta) = |sum_mu c_mu e^{i mu theta}|^2 / 2pi.
    Density input rho: p(theta) = (1/2pi) sum_d tr_d(rho) e^{i d theta}
    summed over diagonals d (equivalent form of the same matrix element).
    """
    x = np.asarray(amplitudes_or_rho, dtype=complex)
    thetas = np.asarray(thetas, dtype=float)
    if x.ndim == 1:
        amp = np.exp(1j * np.outer(thetas, np.arange(len(x)))) @ x
        return (np.abs(amp) ** 2) / (2.0 * np.pi)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("expected an amplitude vector or a square density matrix")
    L = x.shape[0]
    p = np.full(thetas.shape, np.trace(x).real, dtype=float)
    for d in range(1, L):
        rd = np.trace(x, offset=-d)  # sum_n rho[n+d, n]
        p += 2.0 * (rd * np.exp(1j * d * thetas)).real
    return p / (2.0 * np.pi)


class CanonicalSampler:
    """Inverse-CDF sampler for the canonical phase density.

    The grid has 2**grid_bits points on [0, 2pi); the CDF is inverted by
    linear interpolation. Because the density under a phase shift phi is the
    base density rigidly shifted, one sampler serves every true phase: draw
    from the base density and add phi modulo 2pi.
    """

    def __init__(self, amplitudes_or_rho, grid_bits: int | None = None,
                 tolerances: Tolerances = DEFAULT_TOLERANCES):
        bits = tolerances.phase_grid_bits if grid_bits is None else grid_bits
        n = 1 << bits
        self.thetas = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        p = canonical_phase_density(amplitudes_or_rho, self.thetas)
        p = np.clip(p, 0.0, None)
        h = 2.0 * np.pi / n
        # trapezoid masses per cell [theta_i, theta_{i+1}), wrapping at 2pi
        p_next = np.roll(p, -1)
        masses = 0.5 * (p + p_next) * h
        total = float(masses.sum())
        if not np.isfinite(total) or abs(total - 1.0) > 1e-6:
            raise NumericFailure(f"density normalization off by {abs(total - 1.0):.2e}")
        self.norm_error = abs(total - 1.0)
        cdf = np.concatenate(([0.0], np.cumsum(masses)))
        cdf /= cdf[-1]
        self._cdf = cdf
        self._knots = np.concatenate((self.thetas, [2.0 * np.pi]))

    def sample(self, rng: np.random.Generator, size: int,
               shift: float | np.ndarray = 0.0) -> np.ndarray:
        """Draw outcomes in [0, 2pi), optionally shifted by the true phase."""
        u = rng.random(size)
        base = np.interp(u, self._cdf, self._knots)
        return np.mod(base + shift, 2.0 * np.pi)


def canonical_phase_sample(probe: ProbeState, rng: np.random.Generator,
                           size: int = 1,
                           tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Single-shot outcomes of the canonical measurement on a (evolved) probe."""
    sampler = CanonicalSampler(probe.vector, tolerances=tolerances)
    return sampler.sample(rng, size)


def analytic_sharpness(amplitudes_or_rho) -> float:
    """|sum_mu <mu+1| . |mu>| adjacent-coherence magnitude on a unit-index ladder."""
    x = np.asarray(amplitudes_or_rho, dtype=complex)
    if x.ndim == 1:
        return float(abs(np.sum(x.conj()[:-1] * x[1:])))
    return float(abs(np.trace(x, offset=-1)))


def holevo_variance(amplitudes_or_rho=None, samples: np.ndarray | None = None,
                    true_phase: float | np.ndarray = 0.0) -> float:
    """Circular spread measure S^-2 - 1.

    Analytic path (amplitudes or density given): S is the adjacent-level
    sharpness, exact for the canonical measurement on a unit-gap ladder.
    Empirical path (samples given): S = |mean exp(i (theta - true_phase))|.
    Zero sharpness returns inf (flagged, not raised).
    """
    if samples is not None:
        s = abs(np.mean(np.exp(1j * (np.asarray(samples) - true_phase))))
    elif amplitudes_or_rho is not None:
        s = analytic_sharpness(amplitudes_or_rho)
    else:
        raise ValueError("give amplitudes/density or samples")
    if s == 0.0:
        return math.inf
    return 1.0 / (s * s) - 1.0


def empirical_holevo(samples: np.ndarray, true_phase: float | np.ndarray = 0.0
                     ) -> tuple[float, float]:
    """Holevo variance of circular residuals plus a delta-method stderr."""
    z = np.exp(1j * (np.asarray(samples) - true_phase))
    n = z.size
    mz = z.mean()
    s2 = abs(mz) ** 2
    if s2 == 0.0:
        return math.inf, math.inf
    # gradient of 1/(a^2+b^2) - 1 at (a, b) = (Re mz, Im mz)
    ga = -2.0 * mz.real / (s2 * s2)
    gb = -2.0 * mz.imag / (s2 * s2)
    w = ga * z.real + gb * z.imag
    se = float(np.std(w, ddof=1)) / math.sqrt(n)
    return 1.0 / s2 - 1.0, se
