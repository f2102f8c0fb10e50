"""Reference values y(100), w(100) for the chemotherapy model, parameter set 2.

The gamma kernel k(t) = κ^{1-α} t^{-α} e^{-κt} / Γ(1-α), α = -0.46, is written
as t · t^{-0.54} e^{-κt}; t^{-0.54} is replaced by a trapezoidal sum with a
fixed fine step and a wide index range (no parameter selection involved),
and the resulting linear chains are integrated with scipy's Radau at tight
tolerances. Two discretizations are run to gauge the reference error.

Usage: python3 scripts/chemo_reference.py
"""

import numpy as np
from mpmath import mp, gamma as mgamma
from scipy.integrate import solve_ivp
from scipy.sparse import lil_matrix

mp.dps = 30

NU, SCALE, GAM, KS, VMAX, KM, V = 1.46, 55.6, 0.507, 0.0213, 100.0, 22.0, 1.03
KAPPA = NU / SCALE
W0, A0, TF = 14.4, 127.0, 100.0
ALPHA = 1.0 - NU
A_POW = ALPHA + 1.0  # exponent approximated by the sum


def kernel_terms(h, s_lo, s_hi):
    norm = float(mp.mpf(KAPPA) ** (1 - ALPHA) / mgamma(1 - ALPHA))
    inv_g = float(1 / mgamma(A_POW))
    groups = {}
    for n in range(int(np.floor(s_lo / h)), int(np.ceil(s_hi / h)) + 1):
        s = n * h
        ex = KAPPA + np.exp(s)
        w = norm * h * inv_g * np.exp(A_POW * s)
        groups[ex] = groups.get(ex, 0.0) + w
    ex = np.array(sorted(groups))
    return ex, np.array([groups[e] for e in ex])


def kernel_error(ex, w):
    t = np.logspace(-9, 2, 4000)
    exact = float(mp.mpf(KAPPA) ** (1 - ALPHA) / mgamma(1 - ALPHA)) * t ** (-ALPHA) * np.exp(-KAPPA * t)
    approx = np.array([np.sum(w * ti * np.exp(-ex * ti)) for ti in t])
    return np.max(np.abs(approx - exact) / exact)


def solve(h, s_lo, s_hi, rtol):
    ex, w = kernel_terms(h, s_lo, s_hi)
    n = len(ex)
    dim = 3 + 2 * n

    def rhs(t, x):
        y, wv, a = x[0], x[1], x[2]
        z0 = x[3 : 3 + n]
        z1 = x[3 + n :]
        out = np.empty_like(x)
        out[0] = (KAPPA * (W0 / wv) ** GAM - KS * a / V - KAPPA) * y
        out[1] = KAPPA * (np.dot(w, z1) - wv)
        out[2] = -VMAX * a / (KM + a / V)
        out[3 : 3 + n] = -ex * z0 + y
        out[3 + n :] = -ex * z1 + z0
        return out

    def jac(t, x):
        y, wv, a = x[0], x[1], x[2]
        j = lil_matrix((dim, dim))
        r = (W0 / wv) ** GAM
        j[0, 0] = KAPPA * r - KS * a / V - KAPPA
        j[0, 1] = -KAPPA * GAM * r / wv * y
        j[0, 2] = -KS * y / V
        j[1, 1] = -KAPPA
        j[1, 3 + n :] = KAPPA * w
        j[2, 2] = -VMAX * KM / (KM + a / V) ** 2
        for i in range(n):
            j[3 + i, 0] = 1.0
            j[3 + i, 3 + i] = -ex[i]
            j[3 + n + i, 3 + i] = 1.0
            j[3 + n + i, 3 + n + i] = -ex[i]
        return j.tocsc()

    x0 = np.zeros(dim)
    x0[:3] = [W0, W0, A0]
    atol = np.full(dim, rtol * 1e-3)
    sol = solve_ivp(rhs, (0.0, TF), x0, method="Radau", rtol=rtol, atol=atol, jac=jac, first_step=1e-10)
    assert sol.success, sol.message
    return sol.y[0, -1], sol.y[1, -1], kernel_error(ex, w), n, sol.nfev


if __name__ == "__main__":
    for h, lo, hi, rtol in [(0.25, -75.0, 32.0, 1e-12), (0.2, -85.0, 34.0, 1e-13)]:
        y, wv, kerr, n, nfev = solve(h, lo, hi, rtol)
        print(f"h={h} terms={n} kernel_err={kerr:.2e} rtol={rtol:.0e} nfev={nfev}: y={y!r} w={wv!r}")
