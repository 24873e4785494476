#!/usr/bin/env python3
"""Closed-form reference values, computed independently of the C++ code.

Everything here uses only textbook definitions (densities, Laplace
transforms, the Riccati ODE for the square-root-rate integrated-clock
characteristic function), so the printed numbers can be frozen into the
unit tests as oracle anchors.

Requires: numpy, scipy, mpmath, sympy.
"""
import numpy as np
import mpmath as mp
from scipy.integrate import solve_ivp
from scipy.stats import ncx2

mp.mp.dps = 30

NU = mp.mpf("0.2")      # gamma subordinator variance-rate, unit mean
LAM = mp.mpf("2")       # inverse-Gaussian subordinator shape, unit mean


def gamma_density(y, j, nu=NU):
    # J_y ~ Gamma(shape y/nu, scale nu)
    sh = y / nu
    return j ** (sh - 1) * mp.e ** (-j / nu) / (mp.gamma(sh) * nu ** sh)


def ig_density(y, j, lam=LAM):
    # J_y ~ IG(mean y, shape lam*y^2)
    return mp.sqrt(lam / (2 * mp.pi)) * y * j ** mp.mpf("-1.5") * mp.e ** (
        -lam * (j - y) ** 2 / (2 * j))


print("== IG density closed form at y=1, j=1 ==")
v_closed = ig_density(1, 1)
print("closed:", mp.nstr(v_closed, 17))

# Fourier inversion check: f(j) = (1/2pi) int e^{iuj} E e^{-iu J_1} du,
# E e^{-r J_y} = exp(lam*y*(1-sqrt(1+2r/lam)))
def ig_cf(u, y=1, lam=LAM):       # E e^{iu J_y} = L(-iu)
    return mp.e ** (lam * y * (1 - mp.sqrt(1 - 2j * u / lam)))

f_inv = mp.quad(lambda u: (mp.e ** (-1j * u * 1) * ig_cf(u)).real,
                [-200, 0, 200]) / (2 * mp.pi)
print("inverted:", mp.nstr(f_inv, 17), " diff:", mp.nstr(abs(f_inv - v_closed), 3))

print("== gamma subordinator: Fourier-in-y of the density, nu=0.2 ==")
def gamma_fy(xi, j):
    fn = lambda y: mp.e ** (1j * xi * y) * gamma_density(y, j)
    return mp.quad(fn, [mp.mpf("1e-12"), j/2, j, 2*j, 4*j, 8*j, 16*j])

for xi, j in [(2, 1), (0, mp.mpf("0.5")), (0, 1), (0, 2), (5, mp.mpf("0.8")), (1, 3)]:
    v = gamma_fy(xi, j)
    print(f"F({xi},{j}) = {mp.nstr(v.real,17)} {mp.nstr(v.imag,17)}i")

print("== IG subordinator: Fourier-in-y, lam=2 ==")
def ig_fy(xi, j):
    fn = lambda y: mp.e ** (1j * xi * y) * ig_density(y, j)
    return mp.quad(fn, [mp.mpf("1e-12"), j/2, j, 2*j, 4*j, 8*j])
v = ig_fy(1, 1)
print(f"F_ig(1,1) = {mp.nstr(v.real,17)} {mp.nstr(v.imag,17)}i")

print("== CIR(k=1,s=0.5,v0=1) CF of T_t: E e^{i xi T_t} ==")
KAP, SIG = 1.0, 0.5
def cir_cf(xi, t, kap=KAP, sig=SIG, v0=1.0):
    # C' = i xi - kap C + sig^2/2 C^2 ; A' = kap C ; value exp(A + C v0)
    def rhs(s, u):
        C = u[0] + 1j * u[1]
        dC = 1j * xi - kap * C + 0.5 * sig * sig * C * C
        dA = kap * C
        return [dC.real, dC.imag, dA.real, dA.imag]
    r = solve_ivp(rhs, [0, t], [0.0, 0.0, 0.0, 0.0], rtol=1e-13, atol=1e-14,
                  method="DOP853")
    C = r.y[0, -1] + 1j * r.y[1, -1]
    A = r.y[2, -1] + 1j * r.y[3, -1]
    return np.exp(A + C * v0)

for t in (0.5, 1.0, 2.0):
    for xi in (0.5, 1.0, 2.0, 4.0):
        v = cir_cf(xi, t)
        print(f"cf(xi={xi}, t={t}) = {v.real:.16g} {v.imag:+.16g}i")

print("== CIR Var(T_t) closed form (sensitivity ODE, exact) ==")
# c = i(1-e^{-k tau})/k ; d' = -k d + s^2/2 c^2, b' = k d ; Var = -2(b + d v0)
import sympy as sp
tau, k, s = sp.symbols("tau k s", positive=True)
c = (1 - sp.exp(-k * tau)) / k          # times i; c^2 -> -this^2
d = sp.Function("d")
dsol = sp.dsolve(sp.Eq(d(tau).diff(tau), -k * d(tau) - s**2 / 2 * c**2),
                 d(tau), ics={d(0): 0}).rhs
b = sp.integrate(k * dsol, (tau, 0, tau))
var_expr = sp.simplify(-2 * (b + dsol))
for tv in (0.5, 1.0, 2.0):
    vv = float(var_expr.subs({k: 1, s: sp.Rational(1, 2), tau: tv}))
    print(f"Var(T_{tv}) = {vv:.16g}")
print("var expr:", sp.simplify(var_expr))

print("== exponential moments: laplace_Z at rho=0 = E L_J(-r^2/2, T_t) ==")
# gamma clock: L_J(-r^2/2, y) = (1 - nu r^2/2)^{-y/nu} = e^{theta y},
# theta = -ln(1-nu r^2/2)/nu; value = E e^{theta T_t} via real Riccati.
def cir_expmoment(theta, t, kap=KAP, sig=SIG, v0=1.0):
    def rhs(s_, u):
        C = u[0]
        return [theta - kap * C + 0.5 * sig * sig * C * C, kap * C]
    r = solve_ivp(rhs, [0, t], [0.0, 0.0], rtol=1e-13, atol=1e-14, method="DOP853")
    return np.exp(r.y[1, -1] + r.y[0, -1] * v0)

for rr in (0.5, 1.0, 2.0):
    th = -np.log(1 - 0.2 * rr * rr / 2) / 0.2
    v = cir_expmoment(th, 1.0)
    print(f"r={rr}: theta={th:.16g}  laplace_Z_rho0={v:.16g}")

print("== CIR transition density at t=1 (noncentral chi-square form) ==")
cfac = SIG**2 * (1 - np.exp(-KAP)) / (4 * KAP)
df = 4 * KAP / SIG**2
nc = np.exp(-KAP) * 1.0 / cfac
for x in (0.5, 1.0, 1.5):
    p = ncx2.pdf(x / cfac, df, nc) / cfac
    print(f"p(1, x={x}) = {p:.16g}")
print(f"cfac={cfac:.16g} df={df} nc={nc:.16g}")

print("== drifted gamma clock: inverse-subordinator CF chi(xi, F_j) ==")
# J_y = d y + G_y, G_y ~ Gamma(shape (1-d)y/nu, scale nu); d=0.1, nu=0.2
# chi(xi,F_j) = 1 + i xi int_0^inf e^{i xi y} P(J_y <= j) dy
dft = mp.mpf("0.1")
def drifted_cdf(y, j, nu=NU, d=dft):
    if j <= d * y:
        return mp.mpf(0)
    return mp.gammainc((1 - d) * y / nu, 0, (j - d * y) / nu, regularized=True)
xi0, j0 = mp.mpf("1.2"), mp.mpf("0.8")
ymax = j0 / dft
v = 1 + 1j * xi0 * mp.quad(lambda y: mp.e ** (1j * xi0 * y) * drifted_cdf(y, j0),
                           [0, j0, 2 * j0, 4 * j0, ymax])
print(f"chi(1.2, F_0.8) = {mp.nstr(v.real,17)} {mp.nstr(v.imag,17)}i")

print("== handy constants ==")
print("N(0,1) pdf(0) =", mp.nstr(1 / mp.sqrt(2 * mp.pi), 17))
print("e^{0.5} =", mp.nstr(mp.e ** mp.mpf("0.5"), 17))
print("1.2^{-5} =", mp.nstr(mp.mpf("1.2") ** -5, 17))
