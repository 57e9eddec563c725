"""Scalar brute-force channel formulas, kept independent of the package.

Plain ``math`` only; one point, one LED at a time.  Frozen before the
vectorised implementation existed.
"""

import math

TABLE = dict(B=10e6, theta_max=math.pi / 3, A_pd=75.44e-6, h=2.5, NEP=3.17e-10,
             R_eff=0.5, G=1.0, mu=300.0)


def lambert_order(theta_max):
    return -1.0 / math.log2(math.cos(theta_max))


def gain(led, pd, r, prm=TABLE):
    dx = pd[0] - led[0]
    dy = pd[1] - led[1]
    horiz = math.sqrt(dx * dx + dy * dy)
    if horiz > r:
        return 0.0
    h = prm["h"]
    d = math.sqrt(horiz * horiz + h * h)
    cos_phi = h / d
    m = lambert_order(prm["theta_max"])
    return (m + 1) * prm["A_pd"] / (2 * math.pi * d * d) * cos_phi ** m * cos_phi


def strength(led, power, pd, r, visible, prm=TABLE):
    if not visible:
        return 0.0
    i = power * gain(led, pd, r, prm) * prm["R_eff"]
    v = i * prm["G"]
    return v * v


def noise(prm=TABLE):
    s = prm["R_eff"] * prm["NEP"] * math.sqrt(prm["B"]) * prm["G"]
    return s * s


def rate(leds, powers, pd, r, visible, prm=TABLE):
    lams = [strength(l, p, pd, r, v, prm) for l, p, v in zip(leds, powers, visible)]
    if not any(x > 0 for x in lams):
        return 0.0
    best = 0
    for k in range(len(lams)):
        if lams[k] > lams[best]:
            best = k
    interf = sum(lams) - lams[best]
    return prm["B"] * math.log2(1 + lams[best] / (interf + noise(prm)))


def lux(leds, powers, pd, r, visible, prm=TABLE):
    tot = 0.0
    for l, p, v in zip(leds, powers, visible):
        if v:
            tot += p * gain(l, pd, r, prm)
    return prm["mu"] * tot / prm["A_pd"]


if __name__ == "__main__":
    print("H nadir", gain((0, 0), (0, 0), 10))
    print("H offset 2.5", gain((0, 0), (2.5, 0), 10))
    print("Lambda", strength((0, 0), 40, (0, 0), 10, True))
    print("sigma2", noise())
    print("rate", rate([(0, 0)], [40], (0, 0), 10, [True]))
    print("lux", lux([(0, 0)], [40], (0, 0), 10, [True]))
