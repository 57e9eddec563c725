"""Lower bounds on the AP count: hidden sets and connectivity certificates."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import shapely

from .errors import DomainError
from .geometry import (DEFAULT_CFG, GeomConfig, Layout, Point, Region, connection_region,
                       default_sample_pitch, in_layout, visibility_area_point)
from .partition import Partition, default_R, hyper_triangulate
from .pvgraph import PVGraph, build_pv_graph

log = logging.getLogger(__name__)

MIS_BUDGET = 120
SEARCH_BUDGET = 20_000


@dataclass(frozen=True)
class IndependentSet:
    ids: tuple[int, ...]
    exact: bool

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class HiddenSetCertificate:
    points: tuple[Point, ...]
    node_ids: tuple[int, ...] = ()

    @property
    def s(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"points": [list(p) for p in self.points], "node_ids": list(self.node_ids), "s": self.s}


@dataclass(frozen=True)
class ConnectivityCertificate:
    points: tuple[Point, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        if len(self.points) != len(self.b) or not self.points:
            raise DomainError("need one non-negative b per point")
        if any(int(x) < 0 for x in self.b):
            raise DomainError("b must be non-negative")

    @property
    def bound(self) -> int:
        return len(self.points) + sum(self.b)

    def to_json(self) -> dict:
        return {"points": [list(p) for p in self.points], "b": list(self.b), "bound": self.bound}


@dataclass(frozen=True)
class CertificateCheck:
    accepted: bool
    bound: int
    overlap: tuple[int, int] | None = None
    witness: Point | None = None
    reason: str = ""


# --------------------------------------------------------------------------
# independent sets
# --------------------------------------------------------------------------


def _max_clique_bits(nbrs: list[int], n: int) -> list[int]:
    """Maximum clique by branch and bound with a greedy colouring bound."""
    best: list[int] = []

    def colour_order(P: int):
        order, bounds = [], []
        colour = 0
        U = P
        while U:
            colour += 1
            Q = U
            while Q:
                v = (Q & -Q).bit_length() - 1
                Q &= ~(1 << v)
                Q &= ~nbrs[v]
                U &= ~(1 << v)
                order.append(v)
                bounds.append(colour)
        return order, bounds

    def expand(R: list[int], P: int):
        nonlocal best
        order, bounds = colour_order(P)
        for v, c in zip(reversed(order), reversed(bounds)):
            if len(R) + c <= len(best):
                return
            R.append(v)
            NP = P & nbrs[v]
            if NP:
                expand(R, NP)
            elif len(R) > len(best):
                best = list(R)
            R.pop()
            P &= ~(1 << v)

    expand([], (1 << n) - 1)
    return best


def max_independent_set(g: PVGraph | np.ndarray, budget: int = MIS_BUDGET) -> IndependentSet:
    """Exact for at most ``budget`` nodes, greedy min-degree heuristic above."""
    adj = g.adj if isinstance(g, PVGraph) else np.asarray(g, dtype=bool)
    n = len(adj)
    if n == 0:
        return IndependentSet((), True)
    if n <= budget:
        comp = ~adj
        np.fill_diagonal(comp, False)
        nbrs = [int(sum(1 << int(j) for j in np.nonzero(comp[i])[0])) for i in range(n)]
        return IndependentSet(tuple(sorted(_max_clique_bits(nbrs, n))), True)
    alive = np.ones(n, dtype=bool)
    chosen = []
    while alive.any():
        idx = np.nonzero(alive)[0]
        deg = adj[np.ix_(idx, idx)].sum(axis=1)
        v = int(idx[np.lexsort((idx, deg))[0]])
        chosen.append(v)
        alive[v] = False
        alive[adj[v]] = False
    return IndependentSet(tuple(sorted(chosen)), False)


# --------------------------------------------------------------------------
# hidden sets
# --------------------------------------------------------------------------


def _outer_vis(p, L: Layout, r: float, cfg: GeomConfig) -> Region:
    return visibility_area_point(p, L, r, cfg, outer=True)


def _disjoint(a: Region, b: Region, eps_area: float) -> bool:
    return not a.overlaps(b, eps_area)


def verify_hidden_set(points, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG) -> bool:
    """True iff the visibility areas of the points are pairwise disjoint.

    Areas are built with the circumscribed disk polygon so that a
    disjointness verdict also holds for the true disks.
    """
    pts = [Point(float(p[0]), float(p[1])) for p in points]
    for p in pts:
        if not in_layout(p, L, tol=cfg.eps_geom):
            raise DomainError(f"hidden point {p} lies outside the layout")
    vis = [_outer_vis(p, L, r, cfg) for p in pts]
    return all(_disjoint(vis[i], vis[j], cfg.eps_area) for i, j in itertools.combinations(range(len(pts)), 2))


def _candidates(part: Partition, tid: int) -> list[Point]:
    t = part.triangle(tid)
    out = [t.centroid]
    grid = (0.1, 0.3, 0.5, 0.7, 0.9)
    for u in grid:
        for v in grid:
            if u + v < 1.0:
                out.append(t.barycentric(u, v))
    return out


def find_hidden_points(ids, part: Partition, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG,
                       budget: int = SEARCH_BUDGET) -> HiddenSetCertificate | None:
    """One point per triangle with pairwise-disjoint visibility areas, or None.

    Candidates per triangle are its centroid followed by a barycentric grid;
    the assignment is found by depth-first search with a step budget.
    """
    ids = [int(i) for i in ids]
    if not ids:
        return None
    cands = {i: _candidates(part, i) for i in ids}
    cache: dict[tuple[int, int], Region] = {}

    def vis(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = _outer_vis(cands[i][k], L, r, cfg)
        return cache[key]

    chosen: list[int] = []
    steps = 0

    def dfs(pos: int) -> bool:
        nonlocal steps
        if pos == len(ids):
            return True
        i = ids[pos]
        for k in range(len(cands[i])):
            steps += 1
            if steps > budget:
                return False
            v = vis(i, k)
            if all(_disjoint(v, vis(ids[q], chosen[q]), cfg.eps_area) for q in range(pos)):
                chosen.append(k)
                if dfs(pos + 1):
                    return True
                chosen.pop()
        return False

    if not dfs(0):
        return None
    return HiddenSetCertificate(tuple(cands[i][k] for i, k in zip(ids, chosen)), tuple(ids))


def greedy_hidden_points(ids, part: Partition, L: Layout, r: float,
                         cfg: GeomConfig = DEFAULT_CFG) -> HiddenSetCertificate:
    """Largest prefix-greedy hidden set drawn from the given triangles (always succeeds)."""
    pts, used, regs = [], [], []
    for i in ids:
        for c in _candidates(part, int(i)):
            v = _outer_vis(c, L, r, cfg)
            if all(_disjoint(v, w, cfg.eps_area) for w in regs):
                pts.append(c)
                used.append(int(i))
                regs.append(v)
                break
    return HiddenSetCertificate(tuple(pts), tuple(used))


@dataclass
class BoundResult:
    t_max: int
    exact: bool
    certificate: HiddenSetCertificate | None
    lower_bound: int
    tight: bool
    R: float
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"t_max": self.t_max, "exact": self.exact, "tight": self.tight, "R": self.R,
                "certified_lower_bound": self.lower_bound,
                "certificate": self.certificate.to_json() if self.certificate else None}


def lower_bound(L: Layout, r: float, R: float | None = None, cfg: GeomConfig = DEFAULT_CFG,
                budget: int = MIS_BUDGET) -> BoundResult:
    """Independent set on the PV graph of HT(R) plus a hidden-set certificate.

    ``R`` defaults to ``r``, which satisfies the ``R <= 2r`` requirement while
    keeping every triangle's visibility area non-empty.

    When no point assignment for the whole independent set is found, the
    largest greedy subset that verifies is reported instead, so the returned
    ``lower_bound`` is always certified.
    """
    R = default_R(r, "connectivity") if R is None else R
    part = hyper_triangulate(L, R)
    g = build_pv_graph(part, L, r, cfg, margin=False)
    mis = max_independent_set(g, budget)
    cert = find_hidden_points(mis.ids, part, L, r, cfg)
    tight = cert is not None
    if cert is None:
        log.info("hidden set for all %d independent triangles not found; falling back to greedy", len(mis))
        cert = greedy_hidden_points(mis.ids, part, L, r, cfg)
    if not verify_hidden_set(cert.points, L, r, cfg):
        raise DomainError("hidden set failed re-verification")
    return BoundResult(len(mis), mis.exact, cert, cert.s, tight and mis.exact, R)


# --------------------------------------------------------------------------
# connectivity certificates
# --------------------------------------------------------------------------


def iterated_connection_region(R0: Region, L: Layout, b: int, cfg: GeomConfig, pitch: float) -> Region:
    out = R0
    for _ in range(b):
        out = connection_region(out, L, cfg, pitch=pitch)
    return out


def _layout_probes(L: Layout, pitch: float) -> np.ndarray:
    x0, y0, x1, y1 = L.poly.bounds
    xs = np.arange(x0 + pitch / 2, x1, pitch)
    ys = np.arange(y0 + pitch / 2, y1, pitch)
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    keep = shapely.contains_xy(L.poly, X, Y)
    return np.column_stack([X[keep], Y[keep]])


def _check_once(cert: ConnectivityCertificate, L: Layout, r: float, cfg: GeomConfig,
                pitch: float) -> CertificateCheck:
    regs = [iterated_connection_region(_outer_vis(p, L, r, cfg), L, int(b), cfg, pitch)
            for p, b in zip(cert.points, cert.b)]
    for i, j in itertools.combinations(range(len(regs)), 2):
        if regs[i].overlaps(regs[j], cfg.eps_area):
            return CertificateCheck(False, cert.bound, overlap=(i, j), reason=f"regions {i} and {j} overlap")
    if len(regs) == 1 and cert.b[0] > 0:
        # some point must need an AP outside the expanded region, otherwise
        # one AP could already serve everything
        probe_pitch = max(pitch, r / 4)
        for q in _layout_probes(L, probe_pitch):
            if regs[0].contains(q, tol=0.0):
                continue
            v = _outer_vis(q, L, r, cfg)
            if not v.overlaps(regs[0], 0.0) and not v.geom.intersects(regs[0].geom):
                return CertificateCheck(True, cert.bound, witness=Point(float(q[0]), float(q[1])))
        return CertificateCheck(False, cert.bound, reason="expanded region reaches every point's visibility area")
    return CertificateCheck(True, cert.bound)


def verify_connectivity_certificate(cert: ConnectivityCertificate, L: Layout, r: float,
                                    cfg: GeomConfig = DEFAULT_CFG, pitch: float | None = None) -> CertificateCheck:
    """Check that the b_i-fold connection regions of the V(U_i) are pairwise disjoint.

    With all b_i = 0 this is the hidden-set check.  Connection regions are
    sampled, so the check runs at two sample pitches and accepts only if
    both runs accept.
    """
    for p in cert.points:
        if not in_layout(p, L, tol=cfg.eps_geom):
            raise DomainError(f"certificate point {p} lies outside the layout")
    if all(b == 0 for b in cert.b):
        ok = verify_hidden_set(cert.points, L, r, cfg)
        return CertificateCheck(ok, cert.bound, reason="" if ok else "visibility areas overlap")
    pitch = pitch or cfg.sample_pitch or default_sample_pitch(L, r)
    fine_cfg = GeomConfig(cfg.eps_geom, cfg.eps_area, cfg.circle_segments, None, 4 * cfg.max_samples)
    first = _check_once(cert, L, r, cfg, pitch)
    if not first.accepted:
        return first
    second = _check_once(cert, L, r, fine_cfg, pitch / 2)
    if not second.accepted:
        return CertificateCheck(False, cert.bound, second.overlap, reason="rejected at refined pitch: " + second.reason)
    return first
