"""Spectra, resolvents, and the derived cube classifications.

Conventions used throughout:

- G(E) = (H - E)^(-1); H is real symmetric so G is real off spectrum.
- The decay norm of a cube is max over its internal boundary layer
  {z : |z - u| = L} of |G(z, u; E)| at unit mesh.
- A cube is nonsingular (NS) at E when c_gri * (3L)^(N d) * decay <= exp(-m L^delta);
  energies resonant with the cube count as singular.
- Nonresonant (NR) means dist(spectrum, E) >= exp(-L^beta); the chained
  version (CNR) requires NR at every intermediate radius, all against the
  large-scale threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Configuration, Cube, boundary_indices, max_norm
from .model import DisorderSample, ModelSpec, assemble_hamiltonian

__all__ = [
    "ResonantEnergyError",
    "SpectralData",
    "DecayProfile",
    "GriEstimate",
    "eigensolve",
    "green_block",
    "green_column",
    "dnorm",
    "boundary_green_curve",
    "classify_ns",
    "classify_nr",
    "classify_cnr",
    "efc_kernel",
    "time_amplitude",
    "gri_verify",
]

RESONANCE_GAP = 1e-12
DEFAULT_C_GRI = 2.0


class ResonantEnergyError(ValueError):
    """Raised when an energy sits within the resonance gap of a spectrum."""


@dataclass
class SpectralData:
    """Eigendecomposition of a finite-volume Hamiltonian.

    eigenvalues ascend; eigenvectors are the matching orthonormal columns;
    window is the energy interval experiments restrict to.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    window: tuple[float, float]

    def in_window(self, window: tuple[float, float] | None = None) -> np.ndarray:
        lo, hi = window if window is not None else self.window
        return (self.eigenvalues >= lo) & (self.eigenvalues <= hi)

    def dist_to(self, energy: float, restrict: bool = False) -> float:
        vals = self.eigenvalues[self.in_window()] if restrict else self.eigenvalues
        if vals.size == 0:
            return math.inf
        return float(np.abs(vals - energy).min())


@dataclass
class DecayProfile:
    """Mean correlator values along a family of increasingly distant pairs."""

    label: str
    separations: list[int]
    sym_distances: list[int]
    hausdorff_distances: list[int]
    means: list[float]
    stderrs: list[float]
    nu_hat: float | None = None
    kappa_hat: float | None = None


def eigensolve(h, window: tuple[float, float] | None = None) -> SpectralData:
    """Dense symmetric eigensolve; results are cached on the Hamiltonian."""
    if h.n_points > 10_000:
        raise ValueError("dense eigensolve capped at 10^4 basis points")
    if h._spectral is None:
        vals, vecs = np.linalg.eigh(h.matrix)
        h._spectral = SpectralData(vals, vecs, window if window is not None else (-math.inf, math.inf))
    elif window is not None:
        h._spectral.window = window
    return h._spectral


def _check_resonance(spectral: SpectralData, energy: float):
    gap = spectral.dist_to(energy)
    if gap <= RESONANCE_GAP:
        raise ResonantEnergyError(f"energy {energy} within {gap:.2e} of an eigenvalue")


def green_column(h, energy: float, src_idx: int, on_resonant: str = "raise") -> np.ndarray:
    """Column G(., src; E) by direct solve.  on_resonant: 'raise' or 'inf'."""
    sp = eigensolve(h)
    if sp.dist_to(energy) <= RESONANCE_GAP:
        if on_resonant == "inf":
            return np.full(h.n_points, math.inf)
        _check_resonance(sp, energy)
    rhs = np.zeros(h.n_points)
    rhs[src_idx] = 1.0
    a = h.matrix - energy * np.eye(h.n_points)
    return np.linalg.solve(a, rhs)


def green_block(h, energy: float, src: Configuration, dst: Configuration, method: str = "solve") -> float:
    """Green function entry G(dst, src; E) of the finite-volume operator.

    method 'solve' uses an LU solve, 'eig' sums over the eigenpairs; the two
    routes agree to 1e-8 relative and tests hold them to that.
    """
    sp = eigensolve(h)
    _check_resonance(sp, energy)
    i, j = h.index_of(src), h.index_of(dst)
    if method == "solve":
        return float(green_column(h, energy, i)[j])
    if method == "eig":
        w = sp.eigenvectors[i, :] * sp.eigenvectors[j, :]
        return float((w / (sp.eigenvalues - energy)).sum())
    raise ValueError(f"unknown method {method!r}")


def dnorm(h, energy: float, on_resonant: str = "raise") -> float:
    """Decay norm: max over the boundary layer of |G(z, center; E)|."""
    col = green_column(h, energy, h.center_idx, on_resonant=on_resonant)
    return float(np.abs(col[h.boundary_idx]).max())


def boundary_green_curve(h, energies: np.ndarray, window: tuple[float, float] | None = None) -> np.ndarray:
    """dnorm as a function of energy, via one eigendecomposition.

    Resonant grid energies give +inf.  Used by energy sweeps where a solve
    per grid point would be wasteful.
    """
    sp = eigensolve(h, window)
    energies = np.asarray(energies, dtype=float)
    w = sp.eigenvectors[h.boundary_idx, :] * sp.eigenvectors[h.center_idx, :]
    denom = sp.eigenvalues[:, None] - energies[None, :]
    bad = np.abs(denom).min(axis=0) <= RESONANCE_GAP
    denom[:, bad] = np.nan
    curve = np.abs(w @ (1.0 / denom)).max(axis=0)
    curve[bad] = math.inf
    return curve


def classify_ns(h, energy: float, delta: float, m: float, c_gri: float = DEFAULT_C_GRI) -> str:
    """"NS" when c_gri (3L)^(Nd) dnorm <= exp(-m L^delta); resonant => "S"."""
    cube = h.cube
    decay = dnorm(h, energy, on_resonant="inf")
    nd = cube.n_particles * cube.dim
    lhs = c_gri * float(3 * cube.radius) ** nd * decay
    return "NS" if lhs <= math.exp(-m * cube.radius**delta) else "S"


def classify_nr(h, energy: float, beta: float) -> str:
    """"NR" when the full spectrum stays exp(-L^beta) away from E."""
    sp = eigensolve(h)
    thr = math.exp(-float(h.cube.radius) ** beta)
    return "NR" if sp.dist_to(energy) >= thr else "R"


def classify_cnr(
    sample: DisorderSample,
    spec: ModelSpec,
    center: Configuration,
    l_small: int,
    l_big: int,
    beta: float,
    energy: float,
) -> str:
    """Chained nonresonance at radii l_small, 2 l_small, ... <= l_big - l_small.

    All radii are tested against the large-scale threshold exp(-l_big^beta).
    """
    if not (0 < l_small < l_big):
        raise ValueError("need 0 < l_small < l_big")
    thr = math.exp(-float(l_big) ** beta)
    for radius in range(l_small, l_big - l_small + 1, l_small):
        h = assemble_hamiltonian(Cube(center, radius), sample, spec)
        if eigensolve(h).dist_to(energy) < thr:
            return "R"
    return "CNR"


def efc_kernel(h, src: Configuration, dst: Configuration, window: tuple[float, float]) -> float:
    """Eigenfunction-correlator kernel between two cells over a window.

    Sum over windowed eigenstates of |psi(dst)| |psi(src)|; bounded by 1 for
    unit cells and dominating every time-evolved amplitude between the cells.
    """
    sp = eigensolve(h)
    keep = sp.in_window(window)
    i, j = h.index_of(src), h.index_of(dst)
    return float(np.abs(sp.eigenvectors[i, keep] * sp.eigenvectors[j, keep]).sum())


def time_amplitude(h, src: Configuration, dst: Configuration, window: tuple[float, float], times) -> np.ndarray:
    """|<dst| P_window exp(-i t H) |src>| at the given times."""
    sp = eigensolve(h)
    keep = sp.in_window(window)
    i, j = h.index_of(src), h.index_of(dst)
    w = sp.eigenvectors[i, keep] * sp.eigenvectors[j, keep]
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), sp.eigenvalues[keep]))
    return np.abs(phases @ w)


@dataclass
class GriEstimate:
    """Measured geometric-resolvent constant for one nested-cube instance."""

    c_hat: float
    pairs: int
    argmax: tuple | None


def gri_verify(h_inner, h_outer, energy: float, a_cells=None, b_cells=None) -> GriEstimate:
    """Smallest constant C with |G'(b,a)| <= C * max_out|G'(b,.)| * max_out|G(.,a)|.

    G is the inner-cube resolvent, G' the outer one, and max_out runs over the
    inner cube's boundary layer.  a ranges over the inner third of the inner
    cube and b over the outer cube minus the inner cube unless cells are given
    explicitly; explicit cell sets must be disjoint.
    """
    inner, outer = h_inner.cube, h_outer.cube
    if inner.n_particles != outer.n_particles or inner.dim != outer.dim:
        raise ValueError("nested cubes must share N and d")
    shift = max_norm(inner.center, outer.center)
    if shift + inner.radius + 1 > outer.radius:
        raise ValueError("inner cube (plus its neighbor layer) must sit inside the outer cube")

    inner_pts = h_inner.coords.reshape(h_inner.n_points, -1)
    outer_pts = h_outer.coords.reshape(h_outer.n_points, -1)
    inner_center = inner.center.as_array().ravel()

    def rel_inner(pts):
        return np.abs(pts - inner_center[None, :]).max(axis=1)

    if a_cells is None:
        a_idx = np.nonzero(rel_inner(inner_pts) <= max(inner.radius // 3, 0))[0]
    else:
        a_idx = np.array([h_inner.index_of(c) for c in a_cells], dtype=int)
    if b_cells is None:
        b_idx = np.nonzero(rel_inner(outer_pts) > inner.radius)[0]
    else:
        b_idx = np.array([h_outer.index_of(c) for c in b_cells], dtype=int)
    if a_cells is not None and b_cells is not None:
        a_set = {tuple(inner_pts[i]) for i in a_idx}
        b_set = {tuple(outer_pts[i]) for i in b_idx}
        if a_set & b_set:
            raise ValueError("A and B must be disjoint cell sets")
    if len(a_idx) == 0 or len(b_idx) == 0:
        raise ValueError("empty cell family")

    for h in (h_inner, h_outer):
        _check_resonance(eigensolve(h), energy)

    # boundary layer of the inner cube, and its image inside the outer basis
    bnd_inner_idx = boundary_indices(inner)
    bnd_pts = inner_pts[bnd_inner_idx]
    outer_lookup = {tuple(p): k for k, p in enumerate(outer_pts)}
    bnd_outer_idx = np.array([outer_lookup[tuple(p)] for p in bnd_pts], dtype=int)

    eye_in = np.eye(h_inner.n_points)
    g_in = np.linalg.solve(h_inner.matrix - energy * eye_in, eye_in[:, a_idx])
    inner_factor = np.abs(g_in[bnd_inner_idx, :]).max(axis=0)  # per a

    eye_out = np.eye(h_outer.n_points)
    a_outer_idx = np.array([outer_lookup[tuple(inner_pts[i])] for i in a_idx], dtype=int)
    cols = np.concatenate([a_outer_idx, bnd_outer_idx])
    g_out = np.linalg.solve(h_outer.matrix - energy * eye_out, eye_out[:, cols])
    g_ba = g_out[b_idx, : len(a_idx)]  # |B| x |A|
    outer_factor = np.abs(g_out[b_idx, len(a_idx):]).max(axis=1)  # per b

    denom = np.outer(outer_factor, inner_factor)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(g_ba) / denom
    ratios[~np.isfinite(ratios)] = 0.0
    flat = int(np.argmax(ratios))
    bi, ai = np.unravel_index(flat, ratios.shape)
    arg = (tuple(outer_pts[b_idx[bi]]), tuple(inner_pts[a_idx[ai]]))
    return GriEstimate(float(ratios[bi, ai]), int(ratios.size), arg)
