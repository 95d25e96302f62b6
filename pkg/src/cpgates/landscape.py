"""Infidelity landscapes over the (eps, delta) plane and their contours."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .su2 import CompositeSequence, InvalidArgument, as_matrix, ck_infidelity, sequence_ck

FIGURE_LEVELS = (1e-4, 1e-3, 1e-2, 1e-1)
DEFAULT_BOX = ((-0.5, 0.5), (-0.5, 0.5))
DEFAULT_RESOLUTION = (201, 201)


@dataclass(frozen=True)
class LandscapeGrid:
    """Infidelity sampled on a grid; ``values[i, j]`` is at ``(eps[i], delta[j])``."""

    eps: np.ndarray
    delta: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.eps.size, self.delta.size):
            raise InvalidArgument("grid values do not match the axes")
        if np.any(np.diff(self.eps) <= 0) or np.any(np.diff(self.delta) <= 0):
            raise InvalidArgument("grid axes must be strictly increasing")

    def value_at(self, eps, delta):
        """Nearest-node lookup."""
        i = int(np.argmin(np.abs(self.eps - eps)))
        j = int(np.argmin(np.abs(self.delta - delta)))
        return float(self.values[i, j])

    def iter_nodes(self):
        for i, e in enumerate(self.eps):
            for j, d in enumerate(self.delta):
                yield e, d, self.values[i, j]


def _box_axes(box, resolution):
    (e_lo, e_hi), (d_lo, d_hi) = box
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    n_e, n_d = resolution
    if n_e < 2 or n_d < 2:
        raise InvalidArgument("landscape resolution must be at least 2 x 2")
    if not (e_hi > e_lo and d_hi > d_lo):
        raise InvalidArgument(f"invalid box {box}")
    return np.linspace(e_lo, e_hi, n_e), np.linspace(d_lo, d_hi, n_d)


def eval_grid(s: CompositeSequence, G, box=DEFAULT_BOX, resolution=DEFAULT_RESOLUTION, workers=None) -> LandscapeGrid:
    """Infidelity ``1 - F`` of ``s`` against ``G`` at every node, endpoints included.

    ``workers`` splits the eps rows across threads; the values do not depend
    on it.
    """
    eps, delta = _box_axes(box, resolution)
    G = as_matrix(G)
    values = np.empty((eps.size, delta.size))

    def rows(sl):
        E, D = np.meshgrid(eps[sl], delta, indexing="ij")
        a, b = sequence_ck(s.omegas, s.taus, s.phases, E, D)
        values[sl] = ck_infidelity(a, b, G)

    if workers and workers > 1:
        chunks = [slice(c[0], c[-1] + 1) for c in np.array_split(np.arange(eps.size), workers) if c.size]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(rows, chunks))
    else:
        rows(slice(None))
    return LandscapeGrid(eps, delta, np.clip(values, 0.0, 2.0 / 3.0))


def robust_fraction(g: LandscapeGrid, level: float) -> float:
    """Fraction of nodes with infidelity strictly below ``level``."""
    return float(np.mean(g.values < level))


# ---------------------------------------------------------------------------
# marching squares
# ---------------------------------------------------------------------------

@dataclass
class Polyline:
    points: np.ndarray  # (n, 2) columns eps, delta
    closed: bool


@dataclass
class ContourSet:
    levels: list
    lines: dict = field(default_factory=dict)  # level -> list[Polyline]

    def polylines(self, level):
        return self.lines.get(level, [])


# corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edges: 0:c0-c1 1:c1-c2 2:c2-c3 3:c3-c0
_SEGMENTS = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}
# saddles, keyed by (case, center above level): a center on the same side as
# a diagonal pair joins them, so the segments cut off the other two corners
_SADDLE = {
    (5, True): [(0, 1), (2, 3)], (5, False): [(3, 0), (1, 2)],
    (10, True): [(3, 0), (1, 2)], (10, False): [(0, 1), (2, 3)],
}


def _edge_key(i, j, edge):
    # horizontal edges run along eps at fixed delta index; vertical along delta
    if edge == 0:
        return ("e", i, j)
    if edge == 1:
        return ("d", i + 1, j)
    if edge == 2:
        return ("e", i, j + 1)
    return ("d", i, j)


def _edge_point(key, g: LandscapeGrid, level):
    kind, i, j = key
    V = g.values
    if kind == "e":
        v0, v1 = V[i, j], V[i + 1, j]
        t = (level - v0) / (v1 - v0)
        return g.eps[i] + t * (g.eps[i + 1] - g.eps[i]), g.delta[j]
    v0, v1 = V[i, j], V[i, j + 1]
    t = (level - v0) / (v1 - v0)
    return g.eps[i], g.delta[j] + t * (g.delta[j + 1] - g.delta[j])


def _segments(g: LandscapeGrid, level):
    V = g.values
    above = V > level
    case = (above[:-1, :-1].astype(int) | (above[1:, :-1] << 1) | (above[1:, 1:] << 2) | (above[:-1, 1:] << 3))
    segs = []
    for i, j in zip(*np.nonzero((case != 0) & (case != 15))):
        c = int(case[i, j])
        if c in (5, 10):
            center = 0.25 * (V[i, j] + V[i + 1, j] + V[i + 1, j + 1] + V[i, j + 1])
            pairs = _SADDLE[(c, bool(center > level))]
        else:
            pairs = _SEGMENTS[c]
        for e0, e1 in pairs:
            segs.append((_edge_key(i, j, e0), _edge_key(i, j, e1)))
    return segs


def _chain(segs):
    """Join segments sharing edge crossings into open and closed chains of keys."""
    adj = {}
    for n, (p, q) in enumerate(segs):
        adj.setdefault(p, []).append(n)
        adj.setdefault(q, []).append(n)
    used = np.zeros(len(segs), dtype=bool)

    def walk(start_seg, start_key):
        keys = [start_key]
        n, key = start_seg, start_key
        while True:
            used[n] = True
            p, q = segs[n]
            key = q if p == key else p
            keys.append(key)
            nxt = [m for m in adj[key] if not used[m]]
            if not nxt:
                return keys
            n = nxt[0]

    chains = []
    # open chains start at crossings touched by a single segment (box boundary)
    for key, ns in adj.items():
        if len(ns) == 1 and not used[ns[0]]:
            chains.append((walk(ns[0], key), False))
    for n in range(len(segs)):
        if not used[n]:
            keys = walk(n, segs[n][0])
            chains.append((keys, keys[0] == keys[-1]))
    return chains


def contours(g: LandscapeGrid, levels=FIGURE_LEVELS) -> ContourSet:
    """Iso-infidelity polylines by marching squares with linear edge interpolation.

    Saddle cells are resolved with the average of the four corner values.
    """
    levels = [float(v) for v in levels]
    if any(v <= 0 for v in levels):
        raise InvalidArgument("contour levels must be positive")
    out = ContourSet(levels)
    for level in levels:
        lines = []
        for keys, closed in _chain(_segments(g, level)):
            pts = np.array([_edge_point(k, g, level) for k in keys])
            lines.append(Polyline(pts, closed))
        out.lines[level] = lines
    return out


def mirror_delta(g: LandscapeGrid) -> LandscapeGrid:
    """The grid reflected through delta = 0 (axis must be symmetric)."""
    return LandscapeGrid(g.eps, -g.delta[::-1], g.values[:, ::-1])


def epsilon_asymmetry(g: LandscapeGrid) -> float:
    """Largest difference between the grid and its eps-reflection (axis must be symmetric)."""
    return float(np.max(np.abs(g.values - g.values[::-1, :])))
