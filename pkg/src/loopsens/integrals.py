"""Poisson-Jensen and Bode sensitivity integrals with analytic right-hand sides.

All logarithms are natural.  The Poisson integral is computed with the
substitution w = eta + sigma*tan(theta), which turns the Poisson kernel into a
uniform weight on (-pi/2, pi/2).  Far tails, where delay oscillation periods
collapse in theta, are finished analytically by integration by parts on
ln|g| ~ -Re G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp

from .errors import NonconvergentIntegral, SingularCoincidence
from .lti import TransferFunction, bode_gain_a
from .quadrature import integrate_adaptive
from .shaping import (MODIFIED, PLAIN, STRATEGY_OPEN_LOOP_NMP_ZERO,
                      SensitivityModel, SingularPoint)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and cutoffs for the integral engine."""

    abs_tol: float = 1e-6
    max_panels: int = 40000
    bode_omega_max: float | None = None
    pade_order: int = 6

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class IntegralResult:
    """Numeric LHS vs analytic RHS of a sensitivity integral identity."""

    lhs_numeric: float
    rhs_analytic: float
    residual: float
    tail_bound: float
    panels_used: int


class _RationalDerivs:
    """num/den of the rational part with first and second s-derivatives."""

    def __init__(self, G: TransferFunction):
        n = G.num._arr
        d = G.den._arr
        self.n, self.d = n, d
        self.n1 = npp.polyder(n) if len(n) > 1 else np.zeros(1)
        self.d1 = npp.polyder(d) if len(d) > 1 else np.zeros(1)
        self.n2 = npp.polyder(self.n1) if len(self.n1) > 1 else np.zeros(1)
        self.d2 = npp.polyder(self.d1) if len(self.d1) > 1 else np.zeros(1)

    def value(self, s):
        return npp.polyval(s, self.n) / npp.polyval(s, self.d)

    def d1_value(self, s):
        n, d = npp.polyval(s, self.n), npp.polyval(s, self.d)
        n1, d1 = npp.polyval(s, self.n1), npp.polyval(s, self.d1)
        return (n1 * d - n * d1) / d ** 2

    def d2_value(self, s):
        n, d = npp.polyval(s, self.n), npp.polyval(s, self.d)
        n1, d1 = npp.polyval(s, self.n1), npp.polyval(s, self.d1)
        n2, d2 = npp.polyval(s, self.n2), npp.polyval(s, self.d2)
        return ((n2 * d - n * d2) * d - 2 * d1 * (n1 * d - n * d1)) / d ** 3


def _kernel_funcs(sigma: float, shift: float):
    """Poisson kernel k(x) = sigma/(sigma^2 + (x - shift)^2) and derivatives."""

    def k(x):
        return sigma / (sigma ** 2 + (x - shift) ** 2)

    def k1(x):
        return -2.0 * sigma * (x - shift) / (sigma ** 2 + (x - shift) ** 2) ** 2

    def k2(x):
        u = x - shift
        return sigma * (6.0 * u ** 2 - 2.0 * sigma ** 2) / (sigma ** 2 + u ** 2) ** 3

    return k, k1, k2


def _const_kernel():
    one = lambda x: 1.0
    zero = lambda x: 0.0
    return one, zero, zero


def _osc_tail(G: TransferFunction, kern, W: float, tol: float):
    """(value, bound) of int_W^inf ln|g(jw)| k(w) dw for a delayed loop.

    Uses ln|g| = -Re[G] + Re[G^2]/2 - ... and two integration-by-parts terms on
    each oscillatory piece; every term carries exp(-j k w td) and therefore
    decays like 1/td per integration by parts.
    """
    k, k1, k2 = kern
    td = G.dead_time
    R = _RationalDerivs(G)
    s = 1j * W
    e1 = np.exp(-1j * W * td)
    r0, r1v, r2v = R.value(s), R.d1_value(s), R.d2_value(s)
    u0 = r0 * k(W)
    u1 = 1j * r1v * k(W) + r0 * k1(W)
    u2 = -r2v * k(W) + 2j * r1v * k1(W) + r0 * k2(W)
    jtd = 1j * td
    int_G = e1 * (u0 / jtd + u1 / jtd ** 2)
    # G^2 piece oscillates at 2*td; one by-parts term suffices
    v0 = r0 ** 2 * k(W)
    int_G2 = e1 ** 2 * v0 / (2j * td)
    value = -float(np.real(int_G)) + 0.5 * float(np.real(int_G2))
    q = abs(r0)
    bound = (3.0 * abs(u2) / td ** 3
             + abs(2 * r0 * (1j * r1v) * k(W) + r0 ** 2 * k1(W)) / (2 * (2 * td) ** 2)
             + (q ** 3 / max(1e-12, 1.0 - q)) * k(W) / (3 * td))
    return value, bound


def _tail_start(model: SensitivityModel, kern, tol: float, base: float):
    """Pick W where the asymptotic tail is accurate to ~tol (grow geometrically)."""
    G = model.open_loop
    k = kern[0]
    W = base
    for _ in range(200):
        q = float(G.magnitude_envelope(W))
        if G.dead_time > 0:
            if q < 0.3:
                _, bound = _osc_tail(G, kern, W, tol)
                if bound < tol:
                    return W
        else:
            if q < 0.4:
                return W
        W *= 1.5
    raise NonconvergentIntegral(
        f"could not find a usable tail cutoff (last W = {W:.3g})")


def _rational_tail(model: SensitivityModel, kern, W: float, abs_tol: float,
                   max_panels: int):
    """int_W^inf ln|g| k dw via u = 1/w for delay-free loops (covers to infinity)."""
    k = kern[0]

    def f(u):
        u = np.asarray(u, dtype=float)
        w = 1.0 / u
        return model.log_mag(w) * k(w) / u ** 2

    value, err, _ = integrate_adaptive(f, 0.0, 1.0 / W, abs_tol=abs_tol,
                                       max_panels=max_panels)
    return value, err


def _loop_scale(G: TransferFunction) -> float:
    roots = []
    for p in (G.num, G.den):
        if p.degree >= 1:
            roots.extend(abs(r) for r in np.roots(p._arr[::-1]) if abs(r) > 0)
    return max(roots, default=1.0)


def _delay_edges(lo: float, hi: float, dead_time: float, panels_per_period: int = 8):
    """Forced omega edges resolving delay oscillations (>= 8 panels/period)."""
    if dead_time <= 0:
        return []
    step = (2 * np.pi / dead_time) / panels_per_period
    n = int(np.floor((hi - lo) / step))
    if n > 400000:
        raise NonconvergentIntegral(
            f"delay oscillation grid would need {n} panels on [{lo:.3g}, {hi:.3g}]")
    return list(lo + step * np.arange(1, n + 1))


def poisson_integral(model: SensitivityModel, sp: SingularPoint,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE, *,
                     half_line: bool = False) -> float:
    """Full-line integral of ln|g(jw)| against the Poisson kernel at sp.

    With half_line=True (eta must be 0) the integral runs over [0, inf) with a
    doubled kernel, which equals the full-line value for real singular points.
    """
    sigma, eta = sp.sigma, sp.eta
    if half_line and eta != 0.0:
        raise ValueError("half-line reduction requires a real singular point")
    G = model.open_loop
    tol = cfg.abs_tol

    def h(theta):
        theta = np.asarray(theta, dtype=float)
        return model.log_mag(eta + sigma * np.tan(theta))

    scale = _loop_scale(G)
    base = max(10.0 * sigma + abs(eta), 10.0 * scale)

    full_range = (G.dead_time == 0.0 and G.relative_degree == 0)
    if full_range:
        # |G| tends to a constant: integrand is bounded; no tail split needed
        lo, hi = -np.pi / 2, np.pi / 2
        edges = [lo + (hi - lo) * i / 32 for i in range(1, 32)]
        edges.append(float(np.arctan((0.0 - eta) / sigma)))
        value, err, _ = integrate_adaptive(
            h, (lo if not half_line else 0.0), hi, abs_tol=tol,
            max_panels=cfg.max_panels,
            initial_edges=[e for e in edges if e > 0.0] if half_line else edges)
        return 2.0 * value if half_line else value

    kern_pos = _kernel_funcs(sigma, eta)
    kern_neg = _kernel_funcs(sigma, -eta)
    tail_tol = tol / 4.0
    W_pos = _tail_start(model, kern_pos, tail_tol, base)
    W_neg = W_pos if eta == 0.0 else _tail_start(model, kern_neg, tail_tol, base)

    def omega_to_theta(w):
        return float(np.arctan((w - eta) / sigma))

    def side_edges(w_hi):
        edges_w = _delay_edges(0.0, w_hi, G.dead_time)
        edges_w += list(np.linspace(0.0, w_hi, 17)[1:-1])
        return edges_w

    theta_hi = omega_to_theta(W_pos)
    theta_lo = float(np.arctan((-W_neg - eta) / sigma))
    edges = [omega_to_theta(w) for w in side_edges(W_pos)]
    if not half_line:
        edges += [omega_to_theta(-w) for w in side_edges(W_neg)]
    edges.append(omega_to_theta(0.0))
    edges += list(np.linspace(theta_lo, theta_hi, 17)[1:-1])

    lo = omega_to_theta(0.0) if half_line else theta_lo
    main, err, _ = integrate_adaptive(
        h, lo, theta_hi, abs_tol=tol, max_panels=cfg.max_panels,
        initial_edges=[e for e in edges if lo < e < theta_hi])

    tails = 0.0
    if G.dead_time > 0:
        t_pos, _ = _osc_tail(G, kern_pos, W_pos, tail_tol)
        tails += t_pos
        if not half_line:
            t_neg, _ = _osc_tail(G, kern_neg, W_neg, tail_tol)
            tails += t_neg
    else:
        t_pos, _ = _rational_tail(model, kern_pos, W_pos, tail_tol, cfg.max_panels)
        tails += t_pos
        if not half_line:
            t_neg, _ = _rational_tail(model, kern_neg, W_neg, tail_tol, cfg.max_panels)
            tails += t_neg

    if half_line:
        return 2.0 * (main + tails)
    return main + tails


def _blaschke_log_terms(s0: complex, alpha_roots, beta_roots) -> float:
    total = 0.0
    for a in alpha_roots:
        total += float(np.log(abs((s0 - a) / (s0 + np.conjugate(a)))))
    for b in beta_roots:
        total += float(np.log(abs((s0 + np.conjugate(b)) / (s0 - b))))
    return total


def poisson_rhs(model: SensitivityModel, sp: SingularPoint) -> float:
    """Analytic right-hand side of the Poisson-Jensen identity at sp.

    Plain models use the full non-analytic form; when the singular point is an
    open-loop NMP zero the -ln|g(s0)| term is dropped (it vanishes there since
    G(s0) = 0).  Modified models return pi*ln|g~(s0)|.
    """
    s0 = sp.s0
    roots = model.alpha.rhp_roots + model.beta.rhp_roots
    if model.kind == MODIFIED:
        roots = roots + model.kappa_alpha + model.kappa_beta
    for r in roots:
        if abs(s0 - r) <= 1e-9 * max(1.0, abs(r)):
            raise SingularCoincidence(
                f"singular point {s0} coincides with a classified root {r}")
    if model.kind == MODIFIED:
        val = abs(complex(model.at(s0)))
        if val == 0.0 or not np.isfinite(val):
            raise SingularCoincidence(f"|g~({s0})| is degenerate: {val}")
        return float(np.pi * np.log(val))
    terms = _blaschke_log_terms(s0, model.alpha.rhp_roots, model.beta.rhp_roots)
    if sp.strategy != STRATEGY_OPEN_LOOP_NMP_ZERO:
        gval = abs(complex(model.at(s0)))
        if gval == 0.0 or not np.isfinite(gval):
            raise SingularCoincidence(f"|g({s0})| is degenerate: {gval}")
        terms += -float(np.log(gval))
    return float(-np.pi * terms)


def bode_integral(model: SensitivityModel,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> IntegralResult:
    """int_0^inf ln|g(jw)| dw with the analytic value from the gain term and roots.

    rhs = -a*pi/2 + pi*sum(alpha) - pi*sum(beta), the sums running over the RHP
    root values themselves (conjugate pairs add to twice their real part).
    """
    G = model.open_loop
    a = bode_gain_a(G)
    if G.relative_degree == 0:
        raise NonconvergentIntegral(
            "relative degree 0: ln|g(jw)| does not decay, the Bode integral diverges")

    alpha_sum = sum(model.alpha.rhp_roots, start=0j)
    beta_sum = sum(model.beta.rhp_roots, start=0j)
    scale = max(1.0, abs(alpha_sum), abs(beta_sum))
    if abs(alpha_sum.imag) > 1e-12 * scale or abs(beta_sum.imag) > 1e-12 * scale:
        raise ValueError("root sums are not real; conjugate symmetry is broken")
    rhs = float(-a * np.pi / 2 + np.pi * alpha_sum.real - np.pi * beta_sum.real)

    w_ref = _loop_scale(G)
    W = cfg.bode_omega_max
    if W is None:
        W = 100.0 * w_ref
        if G.dead_time > 0:
            W = max(W, 200.0 * np.pi / G.dead_time)
    tail_tol = cfg.abs_tol / 4.0
    kern = _const_kernel()
    if G.dead_time > 0:
        base = W
        W = _tail_start(model, kern, tail_tol, base)
    else:
        while float(G.magnitude_envelope(W)) >= 0.4:
            W *= 1.5

    def f(w):
        return model.log_mag(np.asarray(w, dtype=float))

    edges = _delay_edges(0.0, W, G.dead_time)
    edges += list(np.geomspace(max(1e-4 * w_ref, 1e-12), W, 33)[:-1])
    main, err_main, panels = integrate_adaptive(
        f, 0.0, W, abs_tol=cfg.abs_tol, max_panels=cfg.max_panels,
        initial_edges=[e for e in edges if 0.0 < e < W])

    if G.dead_time > 0:
        tail, tail_bound = _osc_tail(G, kern, W, tail_tol)
    else:
        tail, tail_err = _rational_tail(model, kern, W, tail_tol, cfg.max_panels)
        tail_bound = tail_err
        # the substitution covers [W, inf) exactly; only quadrature error remains
    lhs = main + tail
    return IntegralResult(lhs_numeric=float(lhs), rhs_analytic=rhs,
                          residual=float(lhs - rhs),
                          tail_bound=float(abs(tail_bound) + err_main),
                          panels_used=panels)
