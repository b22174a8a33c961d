"""Lattice alloy model: disorder field, interaction, Hamiltonian assembly.

The single-particle potential is an alloy sum over scatterer sites a in Z^d
with cell-indicator bumps, so the bumps tile the lattice exactly (the sum of
all bumps is identically 1) and the potential at a lattice point equals the
amplitude of its own cell.  Amplitudes are IID Uniform[0, c_V], drawn from a
counter-style generator keyed per site: the draw at a site depends only on
(seed, site), never on which region was sampled or in what order.

The N-particle Hamiltonian on a cube is the Dirichlet second-difference
kinetic term (diagonal N*d, off-diagonal -1/2 per nearest-neighbor edge of
(Z^d)^N) plus two nonnegative diagonals: the pair interaction
C_U * exp(-r^zeta) summed over particle pairs, and g times the summed cell
amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache, reduce

import numpy as np

from .geometry import Configuration, Cube, boundary_indices, cube_points, point_index

__all__ = [
    "ModelSpec",
    "DisorderSample",
    "HamiltonianMatrix",
    "sample_disorder",
    "potential_value",
    "interaction_value",
    "assemble_hamiltonian",
    "sample_mean_decompose",
    "shift_amplitudes",
    "modulus_experiment",
    "derive_seed",
]

_SITE_SALT = 0x5EED517E
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ModelSpec:
    """Model parameters.

    interaction_exponent is clamped into (0, 1]: steeper-than-exponential
    decay only strengthens every bound, so values above 1 are truncated.
    """

    n_particles: int
    dim: int
    interaction_amplitude: float = 1.0
    interaction_exponent: float = 1.0
    disorder_coupling: float = 1.0
    amplitude_max: float = 1.0
    energy_max: float = 1.0

    def __post_init__(self):
        if self.n_particles < 1 or self.dim < 1:
            raise ValueError("need n_particles >= 1 and dim >= 1")
        if self.interaction_amplitude < 0:
            raise ValueError("interaction amplitude must be >= 0")
        if self.interaction_exponent <= 0:
            raise ValueError("interaction exponent must be > 0")
        if self.amplitude_max <= 0 or self.energy_max <= 0:
            raise ValueError("amplitude_max and energy_max must be > 0")
        if self.interaction_exponent > 1.0:
            object.__setattr__(self, "interaction_exponent", 1.0)

    @property
    def window(self) -> tuple[float, float]:
        """Energy window I* = [0, energy_max]."""
        return (0.0, self.energy_max)

    def with_particles(self, n: int) -> "ModelSpec":
        return replace(self, n_particles=n)


def _zigzag(c: int) -> int:
    return 2 * c if c >= 0 else -2 * c - 1


def _tag_int(tag: str) -> int:
    import hashlib

    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "little")


def derive_seed(master: int, tag: str, index: int) -> int:
    """Stable per-trial seed stream: (master, experiment tag, trial index)."""
    ss = np.random.SeedSequence((int(master) & _MASK64, _tag_int(tag), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _site_uniform(seed: int, site: tuple[int, ...]) -> float:
    key = (int(seed) & _MASK64, _SITE_SALT, *(_zigzag(int(c)) for c in site))
    word = np.random.SeedSequence(key).generate_state(1, np.uint64)[0]
    return float(word) * 2.0**-64


@dataclass(frozen=True)
class DisorderSample:
    """Amplitude field over a finite region of scatterer sites.

    planted=True marks fields not drawn from the keyed sampler (hand-built
    or shifted); such samples are flagged in experiment output.
    """

    amplitudes: dict[tuple[int, ...], float]
    seed: int | None
    amplitude_max: float
    planted: bool = False

    @property
    def region(self) -> frozenset:
        return frozenset(self.amplitudes)

    def amplitude(self, site: tuple[int, ...]) -> float:
        try:
            return self.amplitudes[tuple(int(c) for c in site)]
        except KeyError:
            raise ValueError(f"site {tuple(site)} not in sampled region") from None

    def grid(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Dense array of amplitudes over the box [lo, hi]; NaN off-region."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        shape = tuple((hi - lo + 1).tolist())
        out = np.full(shape, np.nan)
        for site, v in self.amplitudes.items():
            off = np.asarray(site, dtype=np.int64) - lo
            if np.all(off >= 0) and np.all(off < shape):
                out[tuple(off.tolist())] = v
        return out


def sample_disorder(region, seed: int, spec: ModelSpec) -> DisorderSample:
    """IID Uniform[0, c_V] amplitudes on the region, keyed per site."""
    sites = sorted(tuple(int(c) for c in s) for s in region)
    if not sites:
        raise ValueError("cannot sample an empty region")
    if any(len(s) != spec.dim for s in sites):
        raise ValueError("region sites must have the model dimension")
    amps = {s: spec.amplitude_max * _site_uniform(seed, s) for s in sites}
    return DisorderSample(amps, int(seed), spec.amplitude_max)


def potential_value(x: Configuration, sample: DisorderSample, spec: ModelSpec) -> float:
    """g * sum over particles of the amplitude of the particle's cell."""
    return spec.disorder_coupling * sum(sample.amplitude(p) for p in x.coords)


def interaction_value(x: Configuration, spec: ModelSpec) -> float:
    """Sum over particle pairs of C_U * exp(-r^zeta), r the sup-norm gap."""
    total = 0.0
    zeta = spec.interaction_exponent
    arr = x.as_array()
    for i in range(x.n_particles):
        for j in range(i + 1, x.n_particles):
            r = float(np.abs(arr[i] - arr[j]).max())
            total += spec.interaction_amplitude * math.exp(-(r**zeta))
    return total


@lru_cache(maxsize=32)
def _second_difference(size: int) -> np.ndarray:
    t = np.eye(size)
    off = -0.5 * np.eye(size, k=1)
    t = t + off + off.T
    t.setflags(write=False)
    return t


@lru_cache(maxsize=32)
def _kinetic(nd: int, size: int) -> np.ndarray:
    """Dirichlet kinetic matrix on a product grid of nd axes of equal size."""
    eye = np.eye(size)
    total = None
    for axis in range(nd):
        factors = [_second_difference(size) if k == axis else eye for k in range(nd)]
        term = reduce(np.kron, factors)
        total = term if total is None else total + term
    total.setflags(write=False)
    return total


@dataclass
class HamiltonianMatrix:
    """Assembled finite-volume operator with its parts kept separate."""

    cube: Cube
    coords: np.ndarray  # (M, N, d) basis configurations
    kinetic: np.ndarray  # (M, M)
    interaction_diag: np.ndarray  # (M,)
    potential_diag: np.ndarray  # (M,)
    _matrix: np.ndarray | None = field(default=None, repr=False)
    _spectral = None  # lazy cache, set by spectral.eigensolve

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = self.kinetic.copy()
            np.fill_diagonal(m, m.diagonal() + self.interaction_diag + self.potential_diag)
            self._matrix = m
        return self._matrix

    def index_of(self, x: Configuration) -> int:
        return point_index(self.cube, x)

    @property
    def center_idx(self) -> int:
        return (self.n_points - 1) // 2

    @property
    def boundary_idx(self) -> np.ndarray:
        return boundary_indices(self.cube)


def _interaction_diag(coords: np.ndarray, spec: ModelSpec) -> np.ndarray:
    m, n, _ = coords.shape
    out = np.zeros(m)
    zeta = spec.interaction_exponent
    for i in range(n):
        for j in range(i + 1, n):
            r = np.abs(coords[:, i, :] - coords[:, j, :]).max(axis=-1).astype(float)
            out += spec.interaction_amplitude * np.exp(-(r**zeta))
    return out


def assemble_hamiltonian(cube: Cube, sample: DisorderSample, spec: ModelSpec) -> HamiltonianMatrix:
    if cube.n_particles != spec.n_particles or cube.dim != spec.dim:
        raise ValueError("cube and model spec disagree on N or d")
    coords = cube_points(cube)
    m, n, d = coords.shape

    flat_sites = coords.reshape(-1, d)
    lo = flat_sites.min(axis=0)
    hi = flat_sites.max(axis=0)
    grid = sample.grid(lo, hi)
    idx = tuple((flat_sites - lo).T)
    site_amps = grid[idx]
    if np.isnan(site_amps).any():
        raise ValueError("sampled region does not cover the cube support")
    potential = spec.disorder_coupling * site_amps.reshape(m, n).sum(axis=1)

    kin = _kinetic(n * d, 2 * cube.radius + 1)
    return HamiltonianMatrix(
        cube=cube,
        coords=coords,
        kinetic=kin,
        interaction_diag=_interaction_diag(coords, spec),
        potential_diag=potential,
    )


def sample_mean_decompose(sample: DisorderSample, q_sites) -> tuple[float, dict]:
    """Split the field on Q into its sample mean and centered fluctuations."""
    sites = [tuple(int(c) for c in s) for s in q_sites]
    if not sites:
        raise ValueError("Q must be nonempty")
    vals = np.array([sample.amplitude(s) for s in sites])
    xi = float(vals.mean())
    eta = {s: float(v - xi) for s, v in zip(sites, vals)}
    return xi, eta


def shift_amplitudes(sample: DisorderSample, q_sites, c: float) -> DisorderSample:
    """Uniformly shift the amplitudes on Q by c; clamping is disabled.

    The shifted field can leave [0, c_V]; this is a diagnostic op (see
    evc.eigenvalue_shift_test for the spectral consequence), so the result is
    marked planted.
    """
    q = {tuple(int(v) for v in s) for s in q_sites}
    missing = q - set(sample.amplitudes)
    if missing:
        raise ValueError(f"shift region leaves the sampled region: {sorted(missing)[:3]}")
    amps = dict(sample.amplitudes)
    for s in q:
        amps[s] = amps[s] + c
    return DisorderSample(amps, sample.seed, sample.amplitude_max, planted=True)


def modulus_experiment(q_size: int, s_grid, trials: int, seed: int) -> list[tuple[float, float]]:
    """Empirical continuity modulus of the law of the Q sample mean.

    Draws `trials` means of q_size IID Uniform[0,1] amplitudes and returns,
    for each s, the largest empirical probability mass any length-s window
    can capture.  This is a plain, unconditional Monte Carlo check.
    """
    if trials < 1000:
        raise ValueError("modulus experiment needs trials >= 1000")
    if q_size < 1:
        raise ValueError("q_size must be >= 1")
    s_vals = [float(s) for s in s_grid]
    if not s_vals or any(s <= 0 for s in s_vals):
        raise ValueError("s grid must be positive")
    rng = np.random.default_rng(derive_seed(seed, "modulus", 0))
    means = np.sort(rng.random((trials, q_size)).mean(axis=1))
    out = []
    for s in sorted(s_vals):
        # best window starts just below a sample point
        counts = np.searchsorted(means, means + s, side="right") - np.arange(trials)
        out.append((s, float(counts.max()) / trials))
    return out
