"""Configuration-space geometry for multi-particle lattice systems.

Points live on (Z^d)^N: a configuration is an ordered tuple of N particle
positions in Z^d.  All distances are sup-norm distances; the symmetrized
distance minimizes over particle relabelings, which is what makes transport
between geometrically overlapping clouds visible (the Hausdorff distance
between position sets cannot see it).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "Configuration",
    "Cube",
    "WeakSeparation",
    "config",
    "max_norm",
    "sym_distance",
    "bottleneck_assignment",
    "hausdorff_distance",
    "diam_projection",
    "classify_wi_si",
    "wi_decompose",
    "weakly_separated",
    "check_weak_separation",
    "scatterer_supports_disjoint",
]

# Exhaustive permutation search is kept below this particle count; above it
# the bottleneck-matching route is used.  Both must agree where they overlap.
ENUMERATION_LIMIT = 6


@dataclass(frozen=True)
class Configuration:
    """Ordered tuple of N particle positions, each a d-vector of ints."""

    coords: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.coords:
            raise ValueError("configuration needs at least one particle")
        dims = {len(p) for p in self.coords}
        if dims != {len(self.coords[0])} or len(self.coords[0]) == 0:
            raise ValueError("all particle positions must share one dimension d >= 1")
        for p in self.coords:
            for c in p:
                if not isinstance(c, (int, np.integer)):
                    raise ValueError("lattice coordinates must be integers")

    @property
    def n_particles(self) -> int:
        return len(self.coords)

    @property
    def dim(self) -> int:
        return len(self.coords[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.int64)

    def permuted(self, order) -> "Configuration":
        return Configuration(tuple(self.coords[i] for i in order))

    def subset(self, indices) -> "Configuration":
        return Configuration(tuple(self.coords[i] for i in indices))


def config(*points) -> Configuration:
    """Build a Configuration; bare ints are read as d=1 positions.

    config(0, 0, 5) is three particles on Z; config((0, 1), (4, 9)) is two
    particles on Z^2.
    """
    pts = []
    for p in points:
        if isinstance(p, (int, np.integer)):
            pts.append((int(p),))
        else:
            pts.append(tuple(int(c) for c in p))
    return Configuration(tuple(pts))


@dataclass(frozen=True)
class Cube:
    """Lattice cube B_L(u): all configurations within sup-norm L of the center."""

    center: Configuration
    radius: int

    def __post_init__(self):
        if not isinstance(self.radius, (int, np.integer)) or self.radius < 1:
            raise ValueError("cube radius must be an integer >= 1")

    @property
    def n_particles(self) -> int:
        return self.center.n_particles

    @property
    def dim(self) -> int:
        return self.center.dim

    @property
    def n_points(self) -> int:
        nd = self.n_particles * self.dim
        return (2 * self.radius + 1) ** nd

    def support_sites(self, r0: int = 0) -> frozenset:
        """1-particle lattice sites whose scatterer can touch the cube.

        Union over particles of the d-dim box of radius (L + r0) around each
        center position; r0 is the bump support radius (0 for cell indicators).
        """
        reach = self.radius + r0
        sites = set()
        for p in self.center.coords:
            ranges = [range(c - reach, c + reach + 1) for c in p]
            sites.update(itertools.product(*ranges))
        return frozenset(sites)


@lru_cache(maxsize=64)
def _offsets(nd: int, radius: int) -> np.ndarray:
    """All sup-norm-ball offsets in Z^nd, C-ordered (last coord fastest)."""
    rng = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([rng] * nd), indexing="ij")
    out = np.stack([g.ravel() for g in grids], axis=-1)
    out.setflags(write=False)
    return out


def cube_points(cube: Cube) -> np.ndarray:
    """Basis configurations of the cube as an (M, N, d) int array, C-ordered."""
    nd = cube.n_particles * cube.dim
    off = _offsets(nd, cube.radius).reshape(-1, cube.n_particles, cube.dim)
    return cube.center.as_array()[None, :, :] + off


@lru_cache(maxsize=64)
def _boundary_mask(nd: int, radius: int) -> np.ndarray:
    off = _offsets(nd, radius)
    mask = np.abs(off).max(axis=1) == radius
    mask.setflags(write=False)
    return mask


def boundary_indices(cube: Cube) -> np.ndarray:
    """Indices of the width-1 internal boundary layer {x : |x - u| = L}."""
    nd = cube.n_particles * cube.dim
    return np.nonzero(_boundary_mask(nd, cube.radius))[0]


def center_index(cube: Cube) -> int:
    return (cube.n_points - 1) // 2


def point_index(cube: Cube, x: Configuration) -> int:
    """Basis index of configuration x inside the cube (C-order)."""
    off = x.as_array() - cube.center.as_array()
    if np.abs(off).max() > cube.radius:
        raise ValueError("configuration lies outside the cube")
    digits = (off + cube.radius).ravel()
    base = 2 * cube.radius + 1
    idx = 0
    for dgt in digits:
        idx = idx * base + int(dgt)
    return idx


def max_norm(x: Configuration, y: Configuration) -> int:
    """Sup-norm distance on (Z^d)^N, no relabeling."""
    xa, ya = x.as_array(), y.as_array()
    if xa.shape != ya.shape:
        raise ValueError("configurations must have matching N and d")
    return int(np.abs(xa - ya).max())


@lru_cache(maxsize=8)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def _pair_distances(x: Configuration, y: Configuration) -> np.ndarray:
    xa, ya = x.as_array(), y.as_array()
    if xa.shape[1] != ya.shape[1]:
        raise ValueError("configurations must share the dimension d")
    return np.abs(xa[:, None, :] - ya[None, :, :]).max(axis=-1)


def bottleneck_assignment(dist: np.ndarray) -> tuple[int, tuple[int, ...]]:
    """Assignment minimizing the largest matched entry of a square matrix.

    Returns (value, permutation); ties are broken toward the lexicographically
    smallest permutation so results are reproducible.
    """
    dist = np.asarray(dist)
    n = dist.shape[0]
    if dist.shape != (n, n):
        raise ValueError("distance matrix must be square")

    # perfect matching among entries <= t exists iff a zero-cost assignment does
    values = np.unique(dist)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(dist <= values[mid]):
            hi = mid
        else:
            lo = mid + 1
    value = values[lo]

    allowed = dist <= value
    perm = []
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if used[j] or not allowed[i, j]:
                continue
            rest_cols = [c for c in range(n) if not used[c] and c != j]
            if not rest_cols or _feasible(allowed[np.ix_(list(range(i + 1, n)), rest_cols)]):
                perm.append(j)
                used[j] = True
                break
        else:
            raise RuntimeError("bottleneck search lost feasibility")
    return int(value), tuple(perm)


def _feasible(mask: np.ndarray) -> bool:
    """Perfect-matching existence for a square boolean matrix."""
    if mask.size == 0:
        return True
    rows, cols = linear_sum_assignment(~mask)
    return not (~mask)[rows, cols].any()


def sym_distance(x: Configuration, y: Configuration, method: str = "auto") -> int:
    """Symmetrized sup-norm distance: min over relabelings pi of |pi(x) - y|.

    method: "auto" (enumeration up to 6 particles, matching above),
    "enumerate", or "matching".  The two routes must agree; tests hold them
    to that.
    """
    if x.n_particles != y.n_particles:
        raise ValueError("symmetrized distance needs equal particle counts")
    dist = _pair_distances(x, y)
    n = x.n_particles
    if method not in ("auto", "enumerate", "matching"):
        raise ValueError(f"unknown method {method!r}")
    use_enum = method == "enumerate" or (method == "auto" and n <= ENUMERATION_LIMIT)
    if use_enum:
        if n > 8:
            raise ValueError("enumeration beyond 8 particles is not sensible")
        perms = _perm_table(n)
        return int(dist[perms, np.arange(n)].max(axis=1).min())
    value, _ = bottleneck_assignment(dist)
    return value


def hausdorff_distance(x: Configuration, y: Configuration) -> int:
    """Hausdorff distance between the projected position sets Pi(x), Pi(y)."""
    dist = _pair_distances(x, y)
    return int(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def diam_projection(x: Configuration) -> int:
    """Diameter of the particle cloud: max pairwise sup-norm gap (0 for N=1)."""
    if x.n_particles == 1:
        return 0
    return int(_pair_distances(x, x).max())


def classify_wi_si(cube: Cube) -> str:
    """"WI" when the center cloud has diameter >= 3NL, else "SI".

    Single-particle cubes are SI by convention.
    """
    if cube.n_particles == 1:
        return "SI"
    thresh = 3 * cube.n_particles * cube.radius
    return "WI" if diam_projection(cube.center) >= thresh else "SI"


def _proximity_components(x: Configuration, gap: int) -> list[list[int]]:
    """Connected components of positions under pairwise distance <= gap."""
    n = x.n_particles
    dist = _pair_distances(x, x)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if not seen[j] and dist[i, j] <= gap:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def wi_decompose(cube: Cube) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a WI cube's particles into two blocks with position gap > 3L.

    Components of the proximity graph (edges at pairwise distance <= 3L)
    necessarily split a WI cloud; the block containing particle 0 is returned
    first.  Raises on SI input.
    """
    if classify_wi_si(cube) != "WI":
        raise ValueError("not weakly interactive")
    comps = _proximity_components(cube.center, 3 * cube.radius)
    j = comps[0]
    jc = sorted(i for c in comps[1:] for i in c)
    return tuple(j), tuple(jc)


@dataclass(frozen=True)
class WeakSeparation:
    """Certificate that one cube holds strictly more particles inside a box.

    box: per-axis inclusive (lo, hi) bounds of an axis-aligned region Q of Z^d
    that fully contains the single-particle balls of the listed particles and
    is disjoint from every other ball of either cube.
    """

    box: tuple[tuple[int, int], ...]
    j_x: tuple[int, ...]
    j_y: tuple[int, ...]

    @property
    def n_x(self) -> int:
        return len(self.j_x)

    @property
    def n_y(self) -> int:
        return len(self.j_y)

    @property
    def diameter(self) -> int:
        return max(hi - lo for lo, hi in self.box)

    def sites(self):
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.box))


def _ball_vs_box(pos, radius: int, box) -> str:
    """Relation of the sup-norm ball around pos to the box: in / out / cut."""
    inside = all(lo <= c - radius and c + radius <= hi for (lo, hi), c in zip(box, pos))
    if inside:
        return "in"
    outside = any(c + radius < lo or hi < c - radius for (lo, hi), c in zip(box, pos))
    return "out" if outside else "cut"


def _classify_box(box, cx: Cube, cy: Cube):
    j_x, j_y = [], []
    for j, p in enumerate(cx.center.coords):
        rel = _ball_vs_box(p, cx.radius, box)
        if rel == "cut":
            return None
        if rel == "in":
            j_x.append(j)
    for j, p in enumerate(cy.center.coords):
        rel = _ball_vs_box(p, cy.radius, box)
        if rel == "cut":
            return None
        if rel == "in":
            j_y.append(j)
    if len(j_x) == len(j_y):
        return None
    return WeakSeparation(tuple(box), tuple(j_x), tuple(j_y))


def _candidate_boxes(cx: Cube, cy: Cube):
    l = cx.radius
    seen = set()
    groups = []
    # subsets of each cube's own positions
    for cube in (cx, cy):
        pts = cube.center.coords
        for r in range(1, len(pts) + 1):
            for sub in itertools.combinations(range(len(pts)), r):
                groups.append([pts[i] for i in sub])
    # clusters of the union cloud: components under gap <= 2L never cut a ball
    union = list(cx.center.coords) + list(cy.center.coords)
    merged = Configuration(tuple(union))
    for comp in _proximity_components(merged, 2 * l):
        groups.append([union[i] for i in comp])
    for grp in groups:
        arr = np.asarray(grp)
        box = tuple(
            (int(arr[:, k].min()) - l, int(arr[:, k].max()) + l) for k in range(arr.shape[1])
        )
        if box not in seen:
            seen.add(box)
            yield box


def weakly_separated(cx: Cube, cy: Cube) -> WeakSeparation | None:
    """Search for a weak-separation certificate for a pair of equal cubes.

    Candidate boxes are bounding boxes (inflated by L) of position subsets of
    either cube and of clusters of the combined cloud.  A candidate is valid
    when no single-particle ball is cut by the box and the two cubes place
    different particle counts inside.  Among valid boxes the smallest-diameter
    one (ties: lexicographic) is returned; None when no candidate works.
    Always succeeds when sym_distance(centers) > 4NL.
    """
    if cx.radius != cy.radius:
        raise ValueError("cubes must share one radius")
    if cx.n_particles != cy.n_particles or cx.dim != cy.dim:
        raise ValueError("cubes must share N and d")
    best = None
    best_key = None
    for box in _candidate_boxes(cx, cy):
        cert = _classify_box(box, cx, cy)
        if cert is None:
            continue
        key = (cert.diameter, cert.box)
        if best_key is None or key < best_key:
            best, best_key = cert, key
    return best


def check_weak_separation(cx: Cube, cy: Cube, cert: WeakSeparation) -> bool:
    """Exact recheck of a certificate: containments, disjointness, majority."""
    for j, p in enumerate(cx.center.coords):
        rel = _ball_vs_box(p, cx.radius, cert.box)
        if (j in cert.j_x) != (rel == "in") or rel == "cut":
            return False
    for j, p in enumerate(cy.center.coords):
        rel = _ball_vs_box(p, cy.radius, cert.box)
        if (j in cert.j_y) != (rel == "in") or rel == "cut":
            return False
    return cert.n_x != cert.n_y


def scatterer_supports_disjoint(cx: Cube, cy: Cube, r0: int = 0) -> bool:
    """True when the two cubes' potentials read disjoint scatterer sets.

    Both cubes must be SI.  The support of each cube's potential is the union
    of per-particle balls of radius L + r0; disjointness is equivalent to all
    cross-pair center distances exceeding 2(L + r0).  Holds in particular for
    SI pairs with sym_distance > 9NL and L > 2 r0.
    """
    for c in (cx, cy):
        if classify_wi_si(c) != "SI":
            raise ValueError("scatterer support test expects SI cubes")
    if cx.radius != cy.radius:
        raise ValueError("cubes must share one radius")
    dist = _pair_distances(cx.center, cy.center)
    return bool(dist.min() > 2 * (cx.radius + r0))
