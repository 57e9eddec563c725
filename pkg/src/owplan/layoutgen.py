"""Random simple polygons by inward denting of a Delaunay triangulation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .errors import ValidationError
from .geometry import Layout

log = logging.getLogger(__name__)

MAX_RESTARTS = 50


@dataclass(frozen=True)
class LayoutGenConfig:
    n: int
    size: float = 30.0
    n_seed_points: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 4:
            raise ValidationError("n must be >= 4")
        if not self.size > 0:
            raise ValidationError("size must be positive")
        if self.n_seed_points is not None and self.n_seed_points < self.n:
            raise ValidationError("n_seed_points must be at least n")

    @property
    def seeds(self) -> int:
        return self.n_seed_points if self.n_seed_points is not None else 10 * self.n


def _edges(t):
    a, b, c = t
    return ((a, b), (b, c), (c, a))


def _dent(pts: np.ndarray, n: int, rng: np.random.Generator) -> list[int] | None:
    tri = Delaunay(pts)
    simp = tri.simplices.copy()
    # make every simplex CCW
    p = pts[simp]
    cw = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]) < 0
    simp[cw] = simp[cw][:, [0, 2, 1]]
    tris = [tuple(int(v) for v in t) for t in simp]
    alive = set(range(len(tris)))
    owners: dict[frozenset, set[int]] = {}
    for i, t in enumerate(tris):
        for e in _edges(t):
            owners.setdefault(frozenset(e), set()).add(i)

    def is_boundary(e):
        return len(owners[frozenset(e)]) == 1

    boundary_vertices: dict[int, int] = {}
    nb = 0
    for i in alive:
        for e in _edges(tris[i]):
            if is_boundary(e):
                nb += 1
                for v in e:
                    boundary_vertices[v] = boundary_vertices.get(v, 0) + 1

    while nb != n:
        grow = nb < n
        plus, minus = [], []
        for i in sorted(alive):
            t = tris[i]
            bedges = [e for e in _edges(t) if is_boundary(e)]
            if len(bedges) == 1:
                apex = next(v for v in t if v not in bedges[0])
                if apex not in boundary_vertices:
                    plus.append(i)
            elif len(bedges) == 2 and len(alive) > 1:
                minus.append(i)
        # with too many edges and no ear left, erode inward until ears appear
        cands = plus if grow else (minus or plus)
        if not cands:
            return None
        i = cands[int(rng.integers(len(cands)))]
        t = tris[i]
        for e in _edges(t):
            was_b = is_boundary(e)
            owners[frozenset(e)].discard(i)
            if was_b:
                nb -= 1
                for v in e:
                    boundary_vertices[v] -= 1
                    if boundary_vertices[v] == 0:
                        del boundary_vertices[v]
            elif owners[frozenset(e)]:
                nb += 1
                for v in e:
                    boundary_vertices[v] = boundary_vertices.get(v, 0) + 1
        alive.discard(i)

    # walk the boundary using CCW-oriented edges of the surviving triangles
    nxt: dict[int, int] = {}
    for i in alive:
        for a, b in _edges(tris[i]):
            if owners[frozenset((a, b))] == {i}:
                nxt[a] = b
    start = min(nxt)
    ring = [start]
    while True:
        v = nxt[ring[-1]]
        if v == start:
            break
        ring.append(v)
        if len(ring) > n:
            return None
    return ring if len(ring) == n else None


def gen_layout(cfg: LayoutGenConfig) -> Layout:
    """Dent the Delaunay triangulation of random points until the boundary has n edges."""
    ss = np.random.SeedSequence([cfg.seed, cfg.n, cfg.seeds])
    for attempt in range(MAX_RESTARTS):
        rng = np.random.default_rng(ss.spawn(1)[0] if attempt else ss)
        pts = rng.uniform(0.0, cfg.size, size=(cfg.seeds, 2))
        ring = _dent(pts, cfg.n, rng)
        if ring is not None:
            try:
                return Layout.from_coords(pts[ring].tolist(), f"gen-n{cfg.n}-s{cfg.seed}")
            except ValidationError as exc:
                log.info("seed %d attempt %d: invalid polygon (%s); regenerating", cfg.seed, attempt, exc)
                continue
        log.info("seed %d attempt %d: no removable triangle; regenerating", cfg.seed, attempt)
    raise ValidationError(f"could not generate a layout for {cfg}")
