"""VLC downlink channel, SINR data rate, illuminance and Monte Carlo metrics.

The LED points straight down from height ``h_led_pd`` above the receiver
plane and the photodiode points straight up, so the irradiance and
incidence angles coincide.  Spectral integrals are folded into an effective
responsivity ``R_eff`` and luminous efficacy ``mu_led``.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import shapely

from .errors import ValidationError
from .geometry import Layout, segment_inside, segments_clear
from .planner_mcc import Deployment

log = logging.getLogger(__name__)

CHUNK = 1024


@dataclass(frozen=True)
class ChannelParams:
    B: float = 10e6
    theta_max: float = math.pi / 3
    A_pd: float = 75.44e-6
    h_led_pd: float = 2.5
    NEP: float = 3.17e-10
    R_eff: float = 0.5
    G_tia: float = 1.0
    mu_led: float = 300.0
    r: float = 3.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"channel parameter {k} must be positive, got {v!r}")
        if not 0 < self.theta_max < math.pi / 2:
            raise ValidationError("theta_max must lie in (0, pi/2)")

    @property
    def m(self) -> float:
        return -1.0 / math.log2(math.cos(self.theta_max))

    @property
    def fov(self) -> float:
        return math.atan(self.r / self.h_led_pd)

    @property
    def sigma2(self) -> float:
        return (self.R_eff * self.NEP * math.sqrt(self.B) * self.G_tia) ** 2

    def with_range(self, r: float) -> "ChannelParams":
        return ChannelParams(**{**asdict(self), "r": float(r)})


@dataclass(frozen=True)
class PowerScheme:
    kind: str = "per_led"
    watts: float = 40.0

    def __post_init__(self):
        if self.kind not in ("per_led", "total"):
            raise ValidationError(f"unknown power scheme {self.kind!r}")
        if not self.watts > 0:
            raise ValidationError("power must be positive")

    def per_ap(self, n_aps: int) -> float:
        if self.kind == "per_led":
            return self.watts
        return self.watts / max(n_aps, 1)

    @classmethod
    def parse(cls, text: str) -> "PowerScheme":
        """``per-led:40`` or ``total:1000``."""
        try:
            kind, w = text.split(":")
            return cls(kind.replace("-", "_"), float(w))
        except ValueError as exc:
            raise ValidationError(f"bad power spec {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.kind.replace('_', '-')}:{self.watts:g}"


@dataclass
class Metrics:
    R_min: float
    R_mean: float
    E_avg: float
    U_E: float
    outage_fraction: float
    rate_cdf: np.ndarray = field(repr=False)
    illum_cdf: np.ndarray = field(repr=False)
    interfered_fraction: float = 0.0

    def to_json(self) -> dict:
        return {"R_min_Mbps": self.R_min, "R_mean_Mbps": self.R_mean, "E_avg_lux": self.E_avg,
                "U_E": self.U_E, "outage_fraction": self.outage_fraction,
                "interfered_fraction": self.interfered_fraction, "n_users": int(len(self.rate_cdf))}


def gain_matrix(leds: np.ndarray, pds: np.ndarray, p: ChannelParams) -> np.ndarray:
    """DC gain for every (pd, led) pair, zero beyond the cell range."""
    leds = np.asarray(leds, float).reshape(-1, 2)
    pds = np.asarray(pds, float).reshape(-1, 2)
    dx = pds[:, None, 0] - leds[None, :, 0]
    dy = pds[:, None, 1] - leds[None, :, 1]
    horiz2 = dx * dx + dy * dy
    d2 = horiz2 + p.h_led_pd**2
    cos = p.h_led_pd / np.sqrt(d2)
    m = p.m
    H = (m + 1) * p.A_pd / (2 * np.pi * d2) * cos**m * cos
    return np.where(horiz2 > p.r * p.r, 0.0, H)


def channel_gain(led, pd, p: ChannelParams) -> float:
    return float(gain_matrix(led, pd, p)[0, 0])


def received_strength(led, P_led: float, pd, L: Layout, p: ChannelParams) -> float:
    """Squared received signal (V^2); zero when a wall blocks the LoS path."""
    if not segment_inside(led, pd, L):
        return 0.0
    return (P_led * channel_gain(led, pd, p) * p.R_eff * p.G_tia) ** 2


def _visible_gain(pds: np.ndarray, aps: np.ndarray, L: Layout, p: ChannelParams,
                  exact: bool = False) -> np.ndarray:
    """Gain matrix with blocked (pd, led) pairs zeroed."""
    H = gain_matrix(aps, pds, p)
    cand = np.nonzero(H > 0)
    if len(cand[0]):
        if exact:
            vis = np.array([segment_inside(aps[j], pds[i], L) for i, j in zip(*cand)], dtype=bool)
        else:
            vis = segments_clear(aps[cand[1]], pds[cand[0]], L)
        H[cand[0][~vis], cand[1][~vis]] = 0.0
    return H


def _lambda(H: np.ndarray, P: float, p: ChannelParams) -> np.ndarray:
    return (P * H * p.R_eff * p.G_tia) ** 2


def _rate_from_lambda(lam: np.ndarray, p: ChannelParams) -> np.ndarray:
    serve_idx = np.argmax(lam, axis=1)
    serve = lam[np.arange(len(lam)), serve_idx]
    interf = lam.sum(axis=1) - serve
    rate = p.B * np.log2(1.0 + serve / (interf + p.sigma2))
    return np.where(serve > 0, rate, 0.0)


def data_rate(pd, d: Deployment, L: Layout, p: ChannelParams, scheme: PowerScheme) -> float:
    """Shannon-style rate at one receiver: strongest AP serves, other visible APs interfere."""
    if not len(d.aps):
        return 0.0
    H = _visible_gain(np.asarray(pd, float).reshape(1, 2), d.xy, L, p, exact=True)
    return float(_rate_from_lambda(_lambda(H, scheme.per_ap(len(d)), p), p)[0])


def illumination(pd, d: Deployment, L: Layout, p: ChannelParams, scheme: PowerScheme) -> float:
    """Horizontal illuminance (lux) summed over visible APs."""
    if not len(d.aps):
        return 0.0
    P = scheme.per_ap(len(d))
    H = _visible_gain(np.asarray(pd, float).reshape(1, 2), d.xy, L, p, exact=True)
    return float(p.mu_led * P * H.sum() / p.A_pd)


def sample_users(L: Layout, n: int, seed: int) -> np.ndarray:
    """Uniform points in L; chunk c is drawn from its own Philox stream keyed by (seed, c)."""
    n_chunks = -(-n // CHUNK)
    x0, y0, x1, y1 = L.poly.bounds
    frac = max(L.area / ((x1 - x0) * (y1 - y0)), 1e-3)
    out = []
    for c in range(n_chunks):
        want = min(CHUNK, n - c * CHUNK)
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, c], dtype=np.uint64)))
        got = []
        have = 0
        while have < want:
            k = int(want / frac * 1.2) + 16
            pts = np.column_stack([rng.uniform(x0, x1, k), rng.uniform(y0, y1, k)])
            pts = pts[shapely.contains_xy(L.poly, pts[:, 0], pts[:, 1])]
            got.append(pts)
            have += len(pts)
        out.append(np.concatenate(got)[:want])
    return np.concatenate(out) if out else np.zeros((0, 2))


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("OWP_THREADS", default)))
    except ValueError:
        return default


def _quantile(sorted_vals: np.ndarray, q: float) -> float:
    return float(np.quantile(sorted_vals, q, method="inverted_cdf")) if len(sorted_vals) else 0.0


def simulate(L: Layout, d: Deployment, p: ChannelParams, scheme: PowerScheme, n_users: int = 2000,
             seed: int = 0, threads: int | None = None) -> Metrics:
    """Per-user rate and illuminance at uniformly random positions."""
    if n_users < 1:
        raise ValidationError("n_users must be positive")
    users = sample_users(L, n_users, seed)
    aps = d.xy
    P = scheme.per_ap(len(d))
    threads = threads or worker_count()

    def run(lo: int):
        pds = users[lo:lo + CHUNK]
        if not len(aps):
            z = np.zeros(len(pds))
            return z, z, np.ones(len(pds), dtype=bool), z.astype(bool)
        H = _visible_gain(pds, aps, L, p)
        rate = _rate_from_lambda(_lambda(H, P, p), p)
        lux = p.mu_led * P * H.sum(axis=1) / p.A_pd
        nvis = (H > 0).sum(axis=1)
        return rate, lux, nvis == 0, nvis > 1

    starts = list(range(0, len(users), CHUNK))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    rate = np.concatenate([x[0] for x in parts])
    lux = np.concatenate([x[1] for x in parts])
    dark = np.concatenate([x[2] for x in parts])
    multi = np.concatenate([x[3] for x in parts])
    rs, ls = np.sort(rate) / 1e6, np.sort(lux)
    E_avg = float(ls.mean()) if len(ls) else 0.0
    U = _quantile(ls, 0.1) / E_avg if E_avg > 0 else 0.0
    return Metrics(_quantile(rs, 0.05), float(rs.mean()), E_avg, U, float(dark.mean()), rs, ls,
                   float(multi.mean()))


def empirical_cdf(sorted_vals: np.ndarray) -> np.ndarray:
    """(value, cumulative probability) rows."""
    n = len(sorted_vals)
    return np.column_stack([sorted_vals, np.arange(1, n + 1) / n]) if n else np.zeros((0, 2))
