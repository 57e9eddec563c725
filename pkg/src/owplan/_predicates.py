"""Sign-exact 2D predicates.

Everything here is a cross product of two coordinate differences,
``sign((b - a) x (d - c))``.  The float result is trusted when it clears a
forward error bound; otherwise the sign is recomputed with rationals, which
is exact because every double is a rational number.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# Loose but safe bound for two products of rounded differences.
_ERR = 1e-15


def _exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    # doubles are dyadic rationals: scale to a common power of two and use ints
    ratios = [float(v).as_integer_ratio() for v in (ax, ay, bx, by, cx, cy, dx, dy)]
    k = max(d.bit_length() for _, d in ratios) - 1
    n = [num << (k - (den.bit_length() - 1)) for num, den in ratios]
    det = (n[2] - n[0]) * (n[7] - n[5]) - (n[3] - n[1]) * (n[6] - n[4])
    return (det > 0) - (det < 0)


def cross_sign(ax, ay, bx, by, cx, cy, dx, dy) -> np.ndarray:
    """Vectorised exact sign of ``(b - a) x (d - c)`` (broadcasting inputs)."""
    arrs = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (ax, ay, bx, by, cx, cy, dx, dy)))
    ax, ay, bx, by, cx, cy, dx, dy = arrs
    t1 = (bx - ax) * (dy - cy)
    t2 = (by - ay) * (dx - cx)
    det = t1 - t2
    out = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= _ERR * (np.abs(t1) + np.abs(t2))
    if unsure.any():
        for idx in zip(*np.nonzero(unsure)):
            out[idx] = _exact(
                ax[idx], ay[idx], bx[idx], by[idx], cx[idx], cy[idx], dx[idx], dy[idx]
            )
    return out


def orient(ax, ay, bx, by, cx, cy) -> np.ndarray:
    """+1 if (a, b, c) turn counter-clockwise, -1 clockwise, 0 collinear."""
    return cross_sign(ax, ay, bx, by, ax, ay, cx, cy)


def orient1(a, b, c) -> int:
    """Scalar :func:`orient` on coordinate pairs; accepts Fractions."""
    if any(isinstance(v, Fraction) for p in (a, b, c) for v in p):
        det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (det > 0) - (det < 0)
    return int(orient(a[0], a[1], b[0], b[1], c[0], c[1])[0])
