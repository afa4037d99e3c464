"""Sensitivity function construction, all-pass compensation, RHP bookkeeping.

The sensitivity function g = 1/(1+G) is always evaluated through the
characteristic form den/(den + num*exp(-td*s)): this stays finite at open-loop
poles on the axis (g has zeros there, not poles) and localizes marginal
closed-loop behaviour to |den + num*e| ~ 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import (DegenerateCompensation, InvalidBlaschkeFactor,
                     MarginallyStableLoop, UnresolvedClosedLoopPoles)
from .lti import TransferFunction
from .poly import (DEFAULT_RHP_TOL, Polynomial, RootSet, poly_from_roots,
                   poly_roots)

_MARGINAL_RTOL = 1e-13

PLAIN = "plain"
MODIFIED = "modified"

STRATEGY_EXPLICIT = "explicit"
STRATEGY_OPEN_LOOP_NMP_ZERO = "open_loop_nmp_zero"
STRATEGY_DELAY_HEURISTIC = "delay_heuristic"


@dataclass(frozen=True)
class SingularPoint:
    """RHP evaluation point sigma + j*eta for the weighted sensitivity integral."""

    sigma: float
    eta: float = 0.0
    strategy: str = STRATEGY_EXPLICIT

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"singular point must lie in the open RHP, sigma={self.sigma}")
        if self.strategy not in (STRATEGY_EXPLICIT, STRATEGY_OPEN_LOOP_NMP_ZERO,
                                 STRATEGY_DELAY_HEURISTIC):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    @property
    def s0(self) -> complex:
        return complex(self.sigma, self.eta)

    @classmethod
    def explicit(cls, sigma: float, eta: float = 0.0) -> "SingularPoint":
        return cls(sigma, eta, STRATEGY_EXPLICIT)

    @classmethod
    def at_open_loop_zero(cls, zeta: complex) -> "SingularPoint":
        z = complex(zeta)
        return cls(z.real, z.imag, STRATEGY_OPEN_LOOP_NMP_ZERO)

    @classmethod
    def from_dead_time(cls, dead_time: float) -> "SingularPoint":
        if not dead_time > 0:
            raise ValueError("delay heuristic needs dead_time > 0")
        return cls(2.0 / dead_time, 0.0, STRATEGY_DELAY_HEURISTIC)


def default_singular_point(model: "SensitivityModel") -> SingularPoint:
    """Preferred singular point: rightmost open-loop NMP zero, else 2/t_d."""
    zetas = model.zeta.rhp_roots
    if zetas:
        z = max(zetas, key=lambda r: (r.real, -abs(r.imag)))
        return SingularPoint.at_open_loop_zero(z)
    if model.open_loop.dead_time > 0:
        return SingularPoint.from_dead_time(model.open_loop.dead_time)
    raise ValueError("loop has neither NMP zeros nor dead time; "
                     "an explicit singular point is required")


@dataclass(frozen=True)
class AllPassFactor:
    """Blaschke-type product, unit modulus on the imaginary axis.

    num = prod(s + conj(a_i)) * prod(s - b_i), den = prod(s - a_i) * prod(s + conj(b_i)),
    assembled from conjugate pairs so both polynomials stay real.
    """

    num: Polynomial
    den: Polynomial
    alpha_roots: tuple[complex, ...]
    beta_roots: tuple[complex, ...]

    def at(self, s):
        s = np.asarray(s, dtype=complex)
        return self.num(s) / self.den(s)

    def at_omega(self, omega):
        return self.at(1j * np.asarray(omega, dtype=float))

    @property
    def is_identity(self) -> bool:
        return not self.alpha_roots and not self.beta_roots


def _conjugate_closed(roots, what: str) -> list[complex]:
    """Validate RHP location and conjugate closure; returns a canonical list."""
    rs = [complex(r) for r in roots]
    for r in rs:
        if not r.real > 0:
            raise InvalidBlaschkeFactor(f"{what} root {r} is not in the open RHP")
    pending = list(rs)
    out = []
    while pending:
        r = pending.pop(0)
        if abs(r.imag) <= 1e-12 * max(1.0, abs(r)):
            out.append(complex(r.real, 0.0))
            continue
        match = None
        for j, q in enumerate(pending):
            if abs(q - r.conjugate()) <= 1e-6 * max(1.0, abs(r)):
                match = j
                break
        if match is None:
            raise InvalidBlaschkeFactor(
                f"complex {what} root {r} lacks a conjugate partner; real "
                "coefficients require conjugate pairs")
        pending.pop(match)
        out.extend([r, r.conjugate()])
    return out


def all_pass_kappa(alpha, beta=()) -> AllPassFactor:
    """All-pass factor reflecting NMP zeros (alpha) and RHP poles (beta) of g.

    Accepts RootSets (their RHP subsets are used) or explicit root sequences.
    """
    a_roots = alpha.rhp_roots if isinstance(alpha, RootSet) else tuple(alpha)
    b_roots = beta.rhp_roots if isinstance(beta, RootSet) else tuple(beta)
    a_list = _conjugate_closed(a_roots, "alpha")
    b_list = _conjugate_closed(b_roots, "beta")
    num = poly_from_roots([-r.conjugate() for r in a_list] + list(b_list))
    den = poly_from_roots(list(a_list) + [-r.conjugate() for r in b_list])
    return AllPassFactor(num, den, tuple(a_list), tuple(b_list))


@dataclass(frozen=True)
class SensitivityModel:
    """Evaluable sensitivity g (or modified g~ = kappa*g) with classified roots.

    alpha: NMP zeros of g (= RHP poles of G, exact from the rational part).
    beta:  RHP poles of g (= RHP closed-loop poles).
    zeta:  NMP zeros of G itself.
    """

    open_loop: TransferFunction
    kind: str
    alpha: RootSet
    beta: RootSet
    zeta: RootSet
    kappa: AllPassFactor | None = None
    kappa_alpha: tuple[complex, ...] = ()
    kappa_beta: tuple[complex, ...] = ()

    def at(self, s):
        """g(s) (or g~(s)) at arbitrary complex points."""
        s = np.asarray(s, dtype=complex)
        G = self.open_loop
        d = G.den(s)
        chi = d + G.num(s) * np.exp(-G.dead_time * s)
        val = d / chi
        if self.kappa is not None:
            val = val * self.kappa.at(s)
        return val

    def at_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        G = self.open_loop
        s = 1j * w
        d = G.den(s)
        chi = d + G.num(s) * np.exp(-1j * G.dead_time * w)
        scale = G.den.abs_eval(w) + G.num.abs_eval(w)
        bad = np.abs(chi) <= _MARGINAL_RTOL * np.maximum(scale, 1e-300)
        if np.any(bad):
            w_bad = float(np.atleast_1d(w)[np.atleast_1d(bad)][0])
            raise MarginallyStableLoop(f"1 + G(jw) vanishes at omega = {w_bad}", omega=w_bad)
        val = d / chi
        if self.kappa is not None:
            val = val * self.kappa.at(s)
        return val

    def mag(self, omega):
        return np.abs(self.at_omega(omega))

    def log_mag(self, omega):
        """ln|g(jw)|; -inf at zeros of g (open-loop poles on the axis) is allowed."""
        with np.errstate(divide="ignore"):
            return np.log(self.mag(omega))


def pade_delay(order: int, dead_time: float) -> tuple[Polynomial, Polynomial]:
    """[order/order] Pade approximant of exp(-dead_time * s)."""
    n = order
    num = np.zeros(n + 1)
    den = np.zeros(n + 1)
    for k in range(n + 1):
        c = factorial(2 * n - k) * factorial(n) / (
            factorial(2 * n) * factorial(k) * factorial(n - k))
        num[k] = c * (-dead_time) ** k
        den[k] = c * dead_time ** k
    return Polynomial(num), Polynomial(den)


def _winding_rhp_zero_count(G: TransferFunction, n_rhp_poles: int,
                            integrator_mult: int) -> int:
    """RHP zeros of 1+G by the argument principle along the Nyquist contour.

    Phase is marched adaptively along the positive axis; conjugate symmetry
    doubles it and each axis pole of G at the origin contributes -pi from the
    RHP indentation.  The tail is snapped to the nearest full turn, valid as
    long as sup |G| < 1 past the march end.
    """
    roots = []
    for p in (G.num, G.den):
        if p.degree >= 1:
            roots.extend(abs(r) for r in np.roots(p._arr[::-1]) if abs(r) > 0)
    w_ref = max(roots, default=1.0) or 1.0

    rel = G.relative_degree
    if rel == 0:
        q_inf = abs(G.num.leading / G.den.leading)
        if q_inf >= 0.99:
            raise UnresolvedClosedLoopPoles(
                f"|G(j inf)| = {q_inf:.3g} >= 1; winding count cannot terminate")
    w_hi = 1e3 * w_ref
    if rel > 0:
        for _ in range(60):
            if G.magnitude_envelope(w_hi) < 0.3:
                break
            w_hi *= 4.0

    # march start: below every dynamic feature, where |G| dwarfs 1 (integrators)
    w_lo = 1e-5 * min((abs(r) for r in np.roots(G.den._arr[::-1]) if abs(r) > 0),
                      default=w_ref)
    if integrator_mult == 0:
        w_lo = min(w_lo, 1e-7 * w_ref)

    def phase(w):
        s = 1j * w
        chi = G.den(s) + G.num(s) * np.exp(-1j * G.dead_time * w)
        d = G.den(s)
        if chi == 0:
            raise MarginallyStableLoop(f"1 + G vanishes at omega = {w}", omega=w)
        return np.angle(chi / d) if d != 0 else np.angle(chi)

    # F = 1+G = chi/den; arg F = arg chi - arg den, safe while den(jw) != 0.
    # Integrator loops have den(j*0)=0 but w_lo > 0 avoids it.
    total = 0.0
    w = w_lo
    ph = phase(w)
    while w < w_hi:
        step = w * 0.08
        while True:
            w_next = min(w + step, w_hi)
            ph_next = phase(w_next)
            d = ph_next - ph
            d = (d + np.pi) % (2 * np.pi) - np.pi
            if abs(d) <= 0.4 or w_next - w < 1e-12 * w:
                break
            step *= 0.5
        total += d
        w, ph = w_next, ph_next
    # settle to F(j inf) = 1 + G(j inf): snap accumulated phase to a full turn
    start = phase(w_lo)
    unsnapped = start + total
    snapped = 2 * np.pi * round(unsnapped / (2 * np.pi))
    delta_axis = snapped - start
    winding = (2.0 * delta_axis - np.pi * integrator_mult) / (2 * np.pi)
    z = n_rhp_poles - winding
    z_int = int(round(z))
    if abs(z - z_int) > 0.4 or z_int < 0:
        raise UnresolvedClosedLoopPoles(
            f"winding count did not settle near an integer (z = {z:.3f})",
            winding_count=z)
    return z_int


def closed_loop_rhp_poles(G: TransferFunction, *, pade_order: int = 6,
                          rhp_tol: float = DEFAULT_RHP_TOL) -> RootSet:
    """RHP roots of 1 + G = 0 (the beta set of the sensitivity function).

    Without dead time this is exact via the characteristic polynomial.  With
    dead time, candidate locations come from a Pade surrogate and the count is
    certified by the winding number; disagreement raises
    :class:`UnresolvedClosedLoopPoles`.
    """
    if G.dead_time == 0.0:
        chi = G.den + G.num
        if chi.degree < 1:
            return RootSet.empty()
        rs = poly_roots(chi, rhp_tol=rhp_tol)
        return RootSet.classify(rs.rhp_roots, rhp_tol=rhp_tol)
    pn, pd = pade_delay(pade_order, G.dead_time)
    chi = G.den * pd + G.num * pn
    candidates = []
    if chi.degree >= 1:
        rs = poly_roots(chi, rhp_tol=rhp_tol)
        candidates = list(rs.rhp_roots)
    n_rhp_poles = len(poly_roots(G.den, rhp_tol=rhp_tol).rhp) if G.den.degree >= 1 else 0
    m_int = G.den.origin_multiplicity()
    z = _winding_rhp_zero_count(G, n_rhp_poles, m_int)
    if z != len(candidates):
        raise UnresolvedClosedLoopPoles(
            f"Pade surrogate found {len(candidates)} RHP closed-loop pole(s) "
            f"but the winding number certifies {z}",
            pade_count=len(candidates), winding_count=z)
    return RootSet.classify(candidates, rhp_tol=rhp_tol)


def make_sensitivity(G: TransferFunction, *, rhp_tol: float = DEFAULT_RHP_TOL,
                     pade_order: int = 6, compute_beta: bool = True) -> SensitivityModel:
    """Build g = 1/(1+G) with exact alpha/zeta sets and a certified beta set."""
    if not G.is_proper:
        raise ValueError("sensitivity analysis requires a proper open loop")
    alpha_all = poly_roots(G.den, rhp_tol=rhp_tol) if G.den.degree >= 1 else RootSet.empty()
    zeta_all = poly_roots(G.num, rhp_tol=rhp_tol) if G.num.degree >= 1 else RootSet.empty()
    alpha = RootSet.classify(alpha_all.rhp_roots, rhp_tol=rhp_tol)
    zeta = RootSet.classify(zeta_all.rhp_roots, rhp_tol=rhp_tol)
    if compute_beta:
        beta = closed_loop_rhp_poles(G, pade_order=pade_order, rhp_tol=rhp_tol)
    else:
        beta = RootSet.empty()
    return SensitivityModel(G, PLAIN, alpha, beta, zeta)


def modified_sensitivity(m: SensitivityModel) -> SensitivityModel:
    """Analytic (modified) sensitivity kappa*g; its own alpha/beta are empty."""
    if m.kind != PLAIN:
        raise ValueError("modified_sensitivity expects a plain model")
    kappa = all_pass_kappa(m.alpha, m.beta)
    return SensitivityModel(
        m.open_loop, MODIFIED, RootSet.empty(), RootSet.empty(), m.zeta,
        kappa=kappa, kappa_alpha=kappa.alpha_roots, kappa_beta=kappa.beta_roots)


class DelayedForwardPath:
    """Compensated forward path (1 - kappa + G)/kappa when G carries dead time.

    Not a pure rational: numerator is a sum of delayed polynomials over a
    rational denominator.  Contract: 1/(1 + self.at(s)) == kappa(s) * g(s).
    """

    def __init__(self, terms, den: Polynomial):
        self.terms = tuple(terms)  # (Polynomial, delay) pairs
        self.den = den

    @property
    def rational_den(self) -> Polynomial:
        return self.den

    def at(self, s):
        s = np.asarray(s, dtype=complex)
        acc = np.zeros(np.shape(s), dtype=complex) if np.ndim(s) else 0j
        for p, delay in self.terms:
            acc = acc + p(s) * np.exp(-delay * s)
        return acc / self.den(s)

    def at_omega(self, omega):
        return self.at(1j * np.asarray(omega, dtype=float))


def _deflate(p: Polynomial, roots) -> Polynomial:
    """Divide p by prod(s - r); the roots must actually divide p."""
    if not roots:
        return p
    divisor = poly_from_roots(list(roots))
    q, rnorm = p.divide(divisor)
    if rnorm > 1e-7:
        raise DegenerateCompensation(
            f"compensated roots do not divide the loop denominator "
            f"(relative remainder {rnorm:.2e})")
    return q


def modified_forward_path(G: TransferFunction, kappa: AllPassFactor):
    """Forward path G~ = (1 - kappa + G)/kappa realizing sensitivity kappa*g.

    The alpha factors shared between kappa's denominator and G's denominator
    cancel exactly, which reflects each RHP denominator root across the axis.
    Returns a TransferFunction when G has no dead time, otherwise a
    :class:`DelayedForwardPath`.
    """
    overlap = [a for a in kappa.alpha_roots for b in kappa.beta_roots
               if abs(a - b) <= 1e-9 * max(1.0, abs(a))]
    if overlap:
        raise DegenerateCompensation(
            f"kappa pole(s) {overlap} coincide with closed-loop pole(s)")
    d_hat = _deflate(G.den, kappa.alpha_roots)
    q_beta = poly_from_roots([-b.conjugate() for b in kappa.beta_roots])
    q_minus_p = kappa.den - kappa.num
    rational_part = q_minus_p * d_hat
    delayed_part = G.num * q_beta
    den = d_hat * kappa.num
    if G.dead_time == 0.0:
        return TransferFunction(rational_part + delayed_part, den, 0.0)
    return DelayedForwardPath([(rational_part, 0.0), (delayed_part, G.dead_time)], den)


def reflect_rhp_poles(G: TransferFunction, rhp_tol: float = DEFAULT_RHP_TOL) -> TransferFunction:
    """Mirror every RHP root of the denominator across the imaginary axis.

    |den(jw)| is unchanged, so this is the loop whose sensitivity keeps the
    magnitude structure of g while removing the NMP zeros of g; with dead time
    it is the compensated-loop reading in which the delay multiplies the whole
    closed-loop denominator.
    """
    if G.den.degree < 1:
        return G
    rs = poly_roots(G.den, rhp_tol=rhp_tol)
    if not rs.rhp:
        return G
    new_roots = [(-r.conjugate() if i in rs.rhp else r) for i, r in enumerate(rs.roots)]
    den = poly_from_roots(new_roots, leading=G.den.leading)
    return TransferFunction(G.num, den, G.dead_time)
