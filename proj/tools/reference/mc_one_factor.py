#!/usr/bin/env python3
"""Independent Monte Carlo oracle for the one-factor composition.

Simulates Y_t = alpha * J_{T_t} + beta * Z_{J_{T_t}} with
Z = rho * B + sqrt(1 - rho^2) * W, where the SAME Brownian path B drives
the square-root activity rate v (full-truncation Euler), the clock is
T_t = int_0^t (v_s + eps) ds, J is a gamma subordinator with unit mean and
variance rate nu, and B is read at the subordinated time J_{T_t} by a
Brownian bridge inside [0, t] (independent Gaussian extension beyond t).

This is a from-scratch NumPy implementation kept deliberately separate from
the C++ engine; it regenerates the sample-statistic anchors frozen in the
unit tests (skewness of Z, transform agreement targets) with standard
errors. Run time for the default driver is a few minutes.

Usage: python3 mc_one_factor.py [n_paths] [dt]
"""
import sys
import numpy as np

KAP, SIG, V0, EPS = 1.0, 0.5, 1.0, 0.0
NU = 0.2


def mc_sample(n, t, dt, seed, rho, alpha=0.0, beta=1.0):
    """Returns dict with Y, Z, T, J terminal samples (length n arrays)."""
    rng = np.random.default_rng(seed)
    n_steps = int(round(t / dt))
    sq = np.sqrt(dt)
    chunks = max(1, n // 25000)
    Ys, Zs, Ts, Js = [], [], [], []
    for _ in range(chunks):
        m = n // chunks
        v = np.full(m, V0)
        B = np.zeros(m)
        Tt = np.zeros(m)
        Bpath = np.empty((n_steps + 1, m), np.float64)
        Bpath[0] = 0.0
        for k in range(n_steps):
            vp = np.maximum(v, 0.0)
            Tt += (vp + EPS) * dt
            dB = rng.standard_normal(m) * sq
            v = v + KAP * (1.0 - vp) * dt + SIG * np.sqrt(vp) * dB
            B += dB
            Bpath[k + 1] = B
        J = rng.gamma(Tt / NU) * NU
        # B at time s = J: bridge within the simulated path, extend beyond t
        s = J
        inside = s <= t
        Bs = np.empty(m)
        kk = np.minimum((s[inside] / dt).astype(int), n_steps - 1)
        thf = s[inside] / dt - kk
        cols = np.arange(m)[inside]
        Bk = Bpath[kk, cols]
        Bk1 = Bpath[kk + 1, cols]
        Bs[inside] = Bk + (Bk1 - Bk) * thf + \
            rng.standard_normal(inside.sum()) * \
            np.sqrt(dt * np.maximum(thf * (1 - thf), 0.0))
        Bs[~inside] = Bpath[n_steps, np.arange(m)[~inside]] + \
            rng.standard_normal((~inside).sum()) * \
            np.sqrt(np.maximum(s[~inside] - t, 0.0))
        W = rng.standard_normal(m) * np.sqrt(J)
        Z = rho * Bs + np.sqrt(1.0 - rho * rho) * W
        Ys.append(alpha * J + beta * Z)
        Zs.append(Z)
        Ts.append(Tt)
        Js.append(J)
    return dict(Y=np.concatenate(Ys), Z=np.concatenate(Zs),
                T=np.concatenate(Ts), J=np.concatenate(Js))


def skew(x):
    c = x - x.mean()
    m2 = np.mean(c * c)
    m3 = np.mean(c ** 3)
    g = m3 / m2 ** 1.5
    se = np.sqrt(6.0 * (len(x) - 2) / ((len(x) + 1) * (len(x) + 3)))
    return g, se


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000000
    dt = float(sys.argv[2]) if len(sys.argv) > 2 else 1e-3
    t = 1.0

    print(f"== clock normalization (n={n}, dt={dt}) ==")
    out = mc_sample(n, t, dt, seed=1, rho=0.0)
    for name in ("T", "J"):
        x = out[name]
        print(f"E[{name}_1] = {x.mean():.6f} +- {x.std(ddof=1)/np.sqrt(n):.2e}"
              f"   Var = {x.var(ddof=1):.6f}")

    print("== skewness of Z at rho=-0.5 ==")
    out = mc_sample(n, t, dt, seed=2, rho=-0.5)
    g, se = skew(out["Z"])
    print(f"skew = {g:.4f} +- {se:.4f}")

    print("== transform anchors at rho in {-0.7,-0.3,0.3} ==")
    for rho in (-0.7, -0.3, 0.3):
        out = mc_sample(n, t, dt, seed=3, rho=rho)
        z = out["Z"]
        for r in (0.5, 1.0):
            val = np.exp(-r * z)
            print(f"rho={rho:+.1f} laplace({r}) = {val.mean():.5f}"
                  f" +- {val.std(ddof=1)/np.sqrt(n):.1e}")
        for theta in (0.5, 1.0, 2.0):
            val = np.exp(1j * theta * z)
            print(f"rho={rho:+.1f} cf({theta}) = {val.mean().real:+.5f}"
                  f" {val.mean().imag:+.5f}i"
                  f" +- {np.abs(val - val.mean()).std()/np.sqrt(n):.1e}")


if __name__ == "__main__":
    main()
