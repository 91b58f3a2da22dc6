"""Base-station deployments, pilot-group assignment and user drops.

Three deployment models are supported: a homogeneous PPP with i.i.d. pilot
groups, a hexagonal lattice with a reuse-delta cluster colouring, and a PPP
whose co-pilot BSs are kept outside a guard disk of radius D around the
typical BS.  The typical BS always sits at the origin and uses pilot group 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import QhullError, Voronoi, cKDTree

from .config import SystemConfig

SQRT3 = math.sqrt(3.0)


class DeploymentModel(str, Enum):
    RANDOM_PPP = "random_ppp"
    HEXAGONAL = "hexagonal"
    GUARD_REGION = "guard_region"

    @classmethod
    def parse(cls, name: str) -> "DeploymentModel":
        aliases = {"random": cls.RANDOM_PPP, "hex": cls.HEXAGONAL, "guard": cls.GUARD_REGION}
        if name in aliases:
            return aliases[name]
        return cls(name)


@dataclass
class Deployment:
    model: DeploymentModel
    bs_positions: np.ndarray          # (n, 2)
    typical_index: int
    pilot_group: np.ndarray           # (n,) ints in [1, delta]
    window_radius: float
    window_center: np.ndarray         # (2,)
    # uniform point that selected the typical cell (PPP models); becomes user 0
    anchor: np.ndarray | None = None
    inradius: float | None = None     # hexagonal model only

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def collided(self) -> np.ndarray:
        """zeta_i: True for non-typical BSs that share the typical pilot group."""
        flags = self.pilot_group == 1
        flags[self.typical_index] = False
        return flags


@dataclass
class UserDrop:
    positions: np.ndarray   # (n_bs, K, 2)
    serving: np.ndarray     # (n_bs, K) serving BS index
    pilot: np.ndarray       # (n_bs, K) pilot index in [1, K]


def sample_ppp(lam: float, window_radius: float, rng: np.random.Generator,
               center=(0.0, 0.0)) -> np.ndarray:
    """Homogeneous PPP of intensity ``lam`` on a disk."""
    if lam < 0 or not window_radius > 0:
        raise ValueError("need lam >= 0 and window_radius > 0")
    n = rng.poisson(lam * math.pi * window_radius ** 2)
    return _uniform_disk(n, window_radius, rng) + np.asarray(center, dtype=float)


def _uniform_disk(n, radius, rng):
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def exclusion_ball_interferers(lambda_b: float, d: float, window_radius: float,
                               rng: np.random.Generator) -> np.ndarray:
    """PPP of intensity ``lambda_b`` on the annulus d <= |x| <= window_radius."""
    if not 0 <= d <= window_radius:
        raise ValueError(f"need 0 <= D <= window_radius, got D={d}, W={window_radius}")
    n = rng.poisson(lambda_b * math.pi * (window_radius ** 2 - d ** 2))
    r = np.sqrt(d ** 2 + (window_radius ** 2 - d ** 2) * rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


# -- hexagonal lattice -------------------------------------------------------

def valid_hex_cluster_sizes(limit: int = 50) -> list[int]:
    """Cluster sizes i^2 + i*j + j^2 up to ``limit``."""
    sizes = {i * i + i * j + j * j for i in range(limit + 1) for j in range(limit + 1)}
    return sorted(s for s in sizes if 1 <= s <= limit)


def hex_cluster_shift(delta: int) -> tuple[int, int]:
    for i in range(1, delta + 1):
        for j in range(0, i + 1):
            if i * i + i * j + j * j == delta:
                return i, j
    valid = valid_hex_cluster_sizes(max(2 * delta, 20))
    below = [v for v in valid if v < delta]
    above = [v for v in valid if v > delta]
    raise ValueError(
        f"delta={delta} is not a hexagonal cluster size (i^2+ij+j^2); nearest valid "
        f"sizes are {below[-1] if below else None} and {above[0] if above else None}")


def hex_lattice(rings: int) -> np.ndarray:
    """Axial coordinates (q, r) of every cell within ``rings`` of the origin."""
    coords = [(q, r) for q in range(-rings, rings + 1) for r in range(-rings, rings + 1)
              if max(abs(q), abs(r), abs(q + r)) <= rings]
    coords.sort(key=lambda c: (max(abs(c[0]), abs(c[1]), abs(c[0] + c[1])), c))
    return np.array(coords, dtype=int)


def hex_colouring(axial: np.ndarray, delta: int) -> np.ndarray:
    """Reuse-delta colouring; co-coloured cells differ by a cluster lattice vector."""
    i, j = hex_cluster_shift(delta)
    q, r = axial[:, 0], axial[:, 1]
    key_a = ((i + j) * q + j * r) % delta
    key_b = (-j * q + i * r) % delta
    keys = list(zip(key_a.tolist(), key_b.tolist()))
    order = {(0, 0): 1}
    for k in sorted(set(keys) - {(0, 0)}):
        order[k] = len(order) + 1
    return np.array([order[k] for k in keys], dtype=int)


def build_hexagonal(config: SystemConfig, rings: int | None = None) -> Deployment:
    """Hexagonal lattice with inter-site distance 2R and its reuse colouring."""
    delta = config.int_delta
    hex_cluster_shift(delta)
    big_r = config.inradius
    if rings is None:
        rings = max(5, math.ceil(config.window / (2.0 * big_r)))
    if rings < 3:
        raise ValueError(f"hexagonal extent must be >= 3 rings, got {rings}")
    axial = hex_lattice(rings)
    isd = 2.0 * big_r
    pos = np.column_stack([isd * (axial[:, 0] + 0.5 * axial[:, 1]),
                           isd * (SQRT3 / 2.0) * axial[:, 1]])
    groups = hex_colouring(axial, delta)
    return Deployment(DeploymentModel.HEXAGONAL, pos, 0, groups,
                      window_radius=rings * isd, window_center=np.zeros(2),
                      inradius=big_r)


def min_cogroup_distance(deployment: Deployment) -> float:
    """Smallest distance between two distinct BSs of the same pilot group."""
    best = math.inf
    pos = deployment.bs_positions
    for g in np.unique(deployment.pilot_group):
        p = pos[deployment.pilot_group == g]
        if len(p) < 2:
            continue
        d, _ = cKDTree(p).query(p, k=2)
        best = min(best, float(d[:, 1].min()))
    return best


# -- pilot assignment --------------------------------------------------------

def assign_random_pilots(n: int, typical_index: int, delta: int,
                         rng: np.random.Generator) -> np.ndarray:
    groups = rng.integers(1, delta + 1, size=n)
    if n:
        groups[typical_index] = 1
    return groups


def assign_guard_region_pilots(points: np.ndarray, typical_index: int, d: float,
                               delta: int, rng: np.random.Generator) -> np.ndarray:
    """Pilot groups under the guard-region rule.

    BSs farther than ``d`` from the typical BS draw uniformly from [1, delta];
    BSs inside draw uniformly from [2, delta].  With delta = 1 the exclusion is
    unsatisfiable and every BS ends up in group 1.
    """
    if delta < 1 or int(delta) != delta:
        raise ValueError(f"delta must be a positive integer, got {delta}")
    if d < 0:
        raise ValueError(f"guard radius must be non-negative, got {d}")
    points = np.asarray(points, dtype=float)
    n = len(points)
    dist = np.linalg.norm(points - points[typical_index], axis=1) if n else np.zeros(0)
    inside = dist < d
    groups = rng.integers(1, delta + 1, size=n)
    if delta == 1:
        if d > 0 and inside.sum() > 1:
            warnings.warn("delta = 1 cannot keep co-pilot BSs out of the guard region; "
                          "assigning group 1 everywhere", RuntimeWarning, stacklevel=2)
        groups[:] = 1
    else:
        n_in = int(inside.sum())
        groups[inside] = rng.integers(2, delta + 1, size=n_in)
    if n:
        groups[typical_index] = 1
    return groups


def build_ppp_deployment(config: SystemConfig, model: DeploymentModel,
                         rng: np.random.Generator) -> Deployment:
    """PPP deployment seen from a uniformly placed typical user.

    The PPP is drawn around a user at the origin; its nearest BS becomes the
    typical BS and the picture is shifted so that BS sits at the origin.  The
    typical cell is therefore area-biased and the typical user's link distance
    is exactly Rayleigh, as the nearest-distance analysis assumes.
    """
    model = DeploymentModel(model)
    if model is DeploymentModel.HEXAGONAL:
        raise ValueError("use build_hexagonal for the lattice model")
    delta = config.int_delta
    w = config.window
    while True:
        pts = sample_ppp(config.lambda_b, w, rng)
        if len(pts):
            break
    typical = int(np.argmin(np.einsum("ij,ij->i", pts, pts)))
    shift = pts[typical].copy()
    pts = pts - shift
    pts[typical] = 0.0
    if model is DeploymentModel.RANDOM_PPP:
        groups = assign_random_pilots(len(pts), typical, delta, rng)
    else:
        groups = assign_guard_region_pilots(pts, typical, config.guard, delta, rng)
    return Deployment(model, pts, typical, groups, window_radius=w,
                      window_center=-shift, anchor=-shift)


# -- users -------------------------------------------------------------------

def drop_users(deployment: Deployment, k_users: int, rng: np.random.Generator) -> UserDrop:
    """K users per cell, uniform over each cell (clipped to the window)."""
    if deployment.n_bs == 0:
        raise ValueError("deployment has no base stations")
    if k_users < 1:
        raise ValueError("k_users must be positive")
    if deployment.model is DeploymentModel.HEXAGONAL:
        pos = _hexagon_users(deployment, k_users, rng)
    else:
        pos = _voronoi_users(deployment, k_users, rng)
    n = deployment.n_bs
    serving = np.repeat(np.arange(n)[:, None], k_users, axis=1)
    pilot = np.tile(np.arange(1, k_users + 1), (n, 1))
    return UserDrop(pos, serving, pilot)


def _hexagon_users(dep: Deployment, k: int, rng) -> np.ndarray:
    big_r = dep.inradius
    circ = 2.0 * big_r / SQRT3
    n = dep.n_bs
    out = np.empty((n, k, 2))
    filled = np.zeros(n, dtype=int)
    normals = np.array([[1.0, 0.0], [0.5, SQRT3 / 2], [-0.5, SQRT3 / 2]])
    while (need := k - filled).any():
        cells = np.repeat(np.arange(n), 2 * need)
        cand = np.column_stack([rng.uniform(-big_r, big_r, cells.size),
                                rng.uniform(-circ, circ, cells.size)])
        inside = (np.abs(cand @ normals.T) <= big_r).all(axis=1)
        _fill(out, filled, cells[inside], cand[inside] + dep.bs_positions[cells[inside]], k)
    return out


def _voronoi_users(dep: Deployment, k: int, rng) -> np.ndarray:
    """Uniform users in each Voronoi cell intersected with the window.

    Every cell-window polygon is fan-triangulated and sampled exactly; only
    the slivers between the circumscribed window polygon and the true disk
    are rejected.
    """
    pts = dep.bs_positions
    n = len(pts)
    center = dep.window_center
    w = dep.window_radius
    polys = cell_polygons(pts, center, w)
    tri, tri_cell, tri_area = [], [], []
    for c, poly in enumerate(polys):
        a, b = poly[1:-1] - poly[0], poly[2:] - poly[0]
        area = 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        a, b = a + poly[0], b + poly[0]
        tri.append(np.stack([np.broadcast_to(poly[0], a.shape), a, b], axis=1))
        tri_cell.append(np.full(len(a), c))
        tri_area.append(area)
    tri = np.concatenate(tri)
    tri_cell = np.concatenate(tri_cell)
    cum = np.cumsum(np.concatenate(tri_area))
    first = np.searchsorted(tri_cell, np.arange(n))
    lo = np.where(first > 0, cum[np.maximum(first - 1, 0)], 0.0)
    hi = cum[np.searchsorted(tri_cell, np.arange(n), side="right") - 1]

    out = np.empty((n, k, 2))
    filled = np.zeros(n, dtype=int)
    if dep.anchor is not None:
        out[dep.typical_index, 0] = dep.anchor
        filled[dep.typical_index] = 1
    while (need := k - filled).any():
        cells = np.repeat(np.arange(n), need)
        u = lo[cells] + rng.random(cells.size) * (hi[cells] - lo[cells])
        t = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
        r1, r2 = rng.random(cells.size), rng.random(cells.size)
        flip = r1 + r2 > 1.0
        r1[flip], r2[flip] = 1.0 - r1[flip], 1.0 - r2[flip]
        v0, v1, v2 = tri[t, 0], tri[t, 1], tri[t, 2]
        cand = v0 + r1[:, None] * (v1 - v0) + r2[:, None] * (v2 - v0)
        ok = np.linalg.norm(cand - center, axis=1) <= w
        _fill(out, filled, cells[ok], cand[ok], k)
    return out


def _fill(out, filled, cells, cand, k):
    # keep the first accepted candidates of each cell, in draw order
    for c in np.unique(cells):
        take = cand[cells == c][: k - filled[c]]
        out[c, filled[c]: filled[c] + len(take)] = take
        filled[c] += len(take)


def _clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    # Sutherland-Hodgman step: keep {x : normal . x <= offset}
    v = poly @ normal - offset
    inside = v <= 0
    if inside.all():
        return poly
    nxt = np.concatenate([poly[1:], poly[:1]])
    vn = np.concatenate([v[1:], v[:1]])
    cross = inside != (vn <= 0)
    t = v[cross] / (v[cross] - vn[cross])
    out = np.empty((2 * len(poly), 2))
    out[0::2] = poly
    out[1::2][cross] = poly[cross] + t[:, None] * (nxt[cross] - poly[cross])
    keep = np.empty(2 * len(poly), dtype=bool)
    keep[0::2] = inside
    keep[1::2] = cross
    return out[keep]


def cell_polygons(pts: np.ndarray, center, w: float, sides: int = 256) -> list[np.ndarray]:
    """Voronoi cell of every point clipped to a polygon circumscribing the window disk.

    Cells lying wholly inside the disk are taken from the tessellation as is;
    only cells that cross the window edge are clipped.
    """
    pts = np.asarray(pts, dtype=float)
    center = np.asarray(center, dtype=float)
    n = len(pts)
    ang = 2.0 * np.pi * np.arange(sides) / sides
    window = (w / math.cos(math.pi / sides)) * np.column_stack([np.cos(ang), np.sin(ang)])
    window = window + center
    polys: list[np.ndarray | None] = [None] * n
    neighbours = None
    vor = _voronoi(pts)
    if vor is not None:
        for i, reg in enumerate(vor.point_region):
            region = vor.regions[reg]
            if region and -1 not in region:
                verts = vor.vertices[region]
                if (np.einsum("ij,ij->i", verts - center, verts - center) <= w * w).all():
                    polys[i] = verts
        indptr, idx = vor_neighbours(vor, n)
        neighbours = [idx[indptr[i]:indptr[i + 1]] for i in range(n)]
    else:
        neighbours = [np.delete(np.arange(n), i) for i in range(n)]
    norms = np.einsum("ij,ij->i", pts, pts)
    for i in range(n):
        if polys[i] is not None:
            continue
        poly = window
        for j in neighbours[i]:
            poly = _clip_halfplane(poly, pts[j] - pts[i], 0.5 * (norms[j] - norms[i]))
        polys[i] = poly
    return polys


def _voronoi(pts: np.ndarray):
    if len(pts) < 4:
        return None
    try:
        return Voronoi(pts)
    except QhullError:
        return None


def vor_neighbours(vor, n: int):
    """CSR adjacency (indptr, indices) of points sharing a Voronoi edge."""
    pairs = np.asarray(vor.ridge_points)
    both = np.concatenate([pairs, pairs[:, ::-1]])
    both = both[np.lexsort((both[:, 1], both[:, 0]))]
    indptr = np.searchsorted(both[:, 0], np.arange(n + 1))
    return indptr, both[:, 1]
