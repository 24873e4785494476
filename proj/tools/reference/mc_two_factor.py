#!/usr/bin/env python3
"""Independent Monte Carlo oracle for the two-factor compositions.

Simulates Y_t = X^c_{T^c_t} + X^j_{T^j_t} with
    X^c_s = a_c1 s + a_c2 B^c_s + a_c3 B^j_s + a_c4 W^c_s,
    X^j_s = a_j1 J_s + a_j2 W^j_{J_s},
where the continuous clock integrates a square-root rate driven by
sqrt(1-rho^2) B^c + rho B^j (plus an optional elasticity floor), the jump
clock integrates a square-root rate driven by B^j alone (never floored),
J is a unit-mean gamma subordinator with variance rate nu, and B^c, B^j are
read at T^c_t through a Brownian bridge inside [0, t] (independent Gaussian
extension beyond). Deterministic clocks (v = 1) are handled exactly.

This NumPy implementation is kept deliberately separate from the C++ engine;
running it regenerates the two-factor Laplace anchors frozen in the tests
(the shared-clock reference values among them) with standard errors.

Usage: python3 mc_two_factor.py [n_paths] [dt] [variant ...]
"""
import sys
import numpy as np

NU = 0.2
T = 1.0

# The four shipped reference configurations.
#   clock tuples: ("cir", kappa, sigma, v0) or ("det",)
VARIANTS = {
    "sv1": dict(a_c=(0.05, 0.3, -0.3, 0.4), a_j=(-0.1, 0.5),
                cc=("cir", 1.0, 0.5, 1.0), cj=("det",), rho=0.0),
    "sv2": dict(a_c=(0.05, 0.0, -0.3, 0.4), a_j=(-0.1, 0.5),
                cc=("det",), cj=("cir", 1.0, 0.5, 1.0), rho=0.0),
    "sv3": dict(a_c=(0.05, 0.0, -0.3, 0.4), a_j=(-0.1, 0.5),
                cc=("cir", 1.0, 0.5, 1.0), cj=("cir", 1.0, 0.5, 1.0), rho=1.0),
    "sv4": dict(a_c=(0.05, 0.3, 0.0, 0.4), a_j=(-0.1, 0.5),
                cc=("cir", 1.0, 0.5, 1.0), cj=("cir", 1.5, 0.4, 1.0), rho=0.0),
}


def bridge_read(Bpath, s, t, dt, rng):
    """B at time s >= 0 given the stored path on the grid (bridge inside,
    Gaussian extension beyond the horizon t)."""
    n_steps = Bpath.shape[0] - 1
    m = s.shape[0]
    out = np.empty(m)
    inside = s <= t
    kk = np.minimum((s[inside] / dt).astype(int), n_steps - 1)
    thf = s[inside] / dt - kk
    cols = np.arange(m)[inside]
    Bk = Bpath[kk, cols]
    Bk1 = Bpath[kk + 1, cols]
    out[inside] = Bk + (Bk1 - Bk) * thf + \
        rng.standard_normal(inside.sum()) * \
        np.sqrt(dt * np.maximum(thf * (1 - thf), 0.0))
    out[~inside] = Bpath[n_steps, np.arange(m)[~inside]] + \
        rng.standard_normal((~inside).sum()) * \
        np.sqrt(np.maximum(s[~inside] - t, 0.0))
    return out


def simulate(cfg, n, t, dt, seed, eps_c=0.0):
    rng = np.random.default_rng(seed)
    n_steps = int(round(t / dt))
    sq = np.sqrt(dt)
    rho = cfg["rho"]
    srho = np.sqrt(max(0.0, 1.0 - rho * rho))
    chunks = max(1, n // 25000)
    Ys = []
    for _ in range(chunks):
        m = n // chunks
        Bc = np.zeros(m)
        Bj = np.zeros(m)
        Bc_path = np.empty((n_steps + 1, m), np.float64)
        Bj_path = np.empty((n_steps + 1, m), np.float64)
        Bc_path[0] = Bj_path[0] = 0.0
        cc, cj = cfg["cc"], cfg["cj"]
        vc = np.full(m, cc[3] if cc[0] == "cir" else 1.0)
        vj = np.full(m, cj[3] if cj[0] == "cir" else 1.0)
        Tc = np.zeros(m)
        Tj = np.zeros(m)
        for _k in range(n_steps):
            dBc = rng.standard_normal(m) * sq
            dBj = rng.standard_normal(m) * sq
            vcp = np.maximum(vc, 0.0)
            vjp = np.maximum(vj, 0.0)
            Tc += (vcp + eps_c) * dt
            Tj += vjp * dt
            if cc[0] == "cir":
                vc = vc + cc[1] * (1.0 - vcp) * dt + \
                    cc[2] * np.sqrt(vcp) * (srho * dBc + rho * dBj)
            if cj[0] == "cir":
                vj = vj + cj[1] * (1.0 - vjp) * dt + cj[2] * np.sqrt(vjp) * dBj
            Bc += dBc
            Bj += dBj
            Bc_path[_k + 1] = Bc
            Bj_path[_k + 1] = Bj
        J = rng.gamma(Tj / NU) * NU
        a1, a2, a3, a4 = cfg["a_c"]
        Xc = a1 * Tc + a2 * bridge_read(Bc_path, Tc, t, dt, rng) + \
            a3 * bridge_read(Bj_path, Tc, t, dt, rng) + \
            a4 * rng.standard_normal(m) * np.sqrt(Tc)
        b1, b2 = cfg["a_j"]
        Xj = b1 * J + b2 * rng.standard_normal(m) * np.sqrt(J)
        Ys.append(Xc + Xj)
    return np.concatenate(Ys)


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000000
    dt = float(sys.argv[2]) if len(sys.argv) > 2 else 1e-3
    names = sys.argv[3:] or list(VARIANTS)
    for name in names:
        y = simulate(VARIANTS[name], n, T, dt, seed=20260816)
        line = [f"{name}:"]
        for r in (0.5, 1.0):
            v = np.exp(-r * y)
            line.append(f"laplace({r}) = {v.mean():.5f}"
                        f" +- {v.std(ddof=1)/np.sqrt(n):.1e}")
        print("  ".join(line), flush=True)


if __name__ == "__main__":
    main()
