"""Lower bounds on ln(s_max) from the sensitivity inequalities, with verdicts.

Poisson-Jensen variants share one closed form,

    bound = ( -(pi/2) * K - atan(omega_c/sigma) * ln(rho) ) / (pi/2 - atan(omega_c/sigma)),

differing only in the constant K (which must be non-positive for the bound to
apply).  Bode variants divide the integral budget by the truncation band
(omega_l - omega_c).  All values are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ConditionNotMet, InvalidTruncation
from .poly import RootSet
from .shaping import SingularPoint
from .sweep import SensitivityIndices

_SIGN_TOL = 1e-12


class BoundVariant(str, Enum):
    PJ_ARBITRARY = "PJ_arbitrary"
    PJ_AT_NMP_ZERO = "PJ_at_nmp_zero"
    PJ_STABLE = "PJ_stable"
    PJ_MODIFIED = "PJ_modified"
    BODE = "Bode"
    BODE_MODIFIED = "Bode_modified"


@dataclass(frozen=True)
class BoundInputs:
    """Everything a bound formula can consume.

    g_at_sp is |g(sigma)| for the arbitrary-point variant and |g~(sigma)| for
    the modified one; it is ignored by the zero-anchored variants.
    """

    indices: SensitivityIndices
    sp: SingularPoint
    alpha: RootSet = RootSet.empty()
    beta: RootSet = RootSet.empty()
    g_at_sp: float | None = None
    a: float = 0.0
    omega_l: float | None = None


@dataclass(frozen=True)
class BoundReport:
    variant: BoundVariant
    bound_nats: float
    measured_ln_smax: float
    satisfied: bool | None
    condition_checked: tuple[str, bool]
    margin_nats: float | None = None
    note: str | None = None

    @property
    def bound_log10(self) -> float:
        return self.bound_nats / float(np.log(10.0))


def _sum_alpha_terms(sigma: float, roots) -> float:
    return sum(float(np.log(abs((sigma - a) / (sigma + np.conjugate(a)))))
               for a in roots)


def _sum_beta_terms(sigma: float, roots) -> float:
    return sum(float(np.log(abs((sigma + np.conjugate(b)) / (sigma - b))))
               for b in roots)


def pj_bound(inputs: BoundInputs, variant: BoundVariant) -> BoundReport:
    """Poisson-Jensen lower bound on ln(s_max) at a real singular point."""
    sp = inputs.sp
    if sp.eta != 0.0:
        raise ValueError("Poisson-Jensen bounds require a real singular point (eta = 0)")
    idx = inputs.indices
    if not (0.0 < idx.rho < 1.0):
        raise ValueError(f"rho must be in (0, 1), got {idx.rho}")
    sigma = sp.sigma
    alpha = inputs.alpha.rhp_roots
    beta = inputs.beta.rhp_roots

    if variant == BoundVariant.PJ_ARBITRARY:
        if inputs.g_at_sp is None or not inputs.g_at_sp > 0:
            raise ValueError("PJ_arbitrary needs |g(sigma)| in g_at_sp")
        K = -float(np.log(inputs.g_at_sp)) + _sum_alpha_terms(sigma, alpha) \
            + _sum_beta_terms(sigma, beta)
        cond_desc = "-ln|g(sigma)| + sum_alpha + sum_beta <= 0"
    elif variant == BoundVariant.PJ_AT_NMP_ZERO:
        K = _sum_alpha_terms(sigma, alpha) + _sum_beta_terms(sigma, beta)
        cond_desc = "sum_alpha + sum_beta <= 0"
    elif variant == BoundVariant.PJ_STABLE:
        if beta:
            raise ConditionNotMet(
                "the stable-loop bound requires an empty beta set", value=len(beta))
        K = _sum_alpha_terms(sigma, alpha)
        cond_desc = "sum_alpha <= 0 (beta empty)"
    elif variant == BoundVariant.PJ_MODIFIED:
        if inputs.g_at_sp is None or not inputs.g_at_sp > 0:
            raise ValueError("PJ_modified needs |g~(sigma)| in g_at_sp")
        K = float(np.log(inputs.g_at_sp))
        cond_desc = "ln|g~(sigma)| <= 0"
    else:
        raise ValueError(f"{variant} is not a Poisson-Jensen variant")

    ok = K <= _SIGN_TOL
    if not ok:
        raise ConditionNotMet(
            f"sign condition violated for {variant.value}: K = {K:.6g} > 0", value=K)
    at = float(np.arctan(idx.omega_c / sigma))
    bound = (-(np.pi / 2) * K - at * float(np.log(idx.rho))) / (np.pi / 2 - at)
    return BoundReport(variant=variant, bound_nats=float(bound),
                       measured_ln_smax=idx.ln_s_max, satisfied=None,
                       condition_checked=(cond_desc, True))


def bode_bound(inputs: BoundInputs, variant: BoundVariant = BoundVariant.BODE) -> BoundReport:
    """Bode-setting lower bound; needs a finite truncation frequency omega_l.

    The printed limit omega_l -> inf collapses to zero, so omega_l is data.
    """
    idx = inputs.indices
    if inputs.omega_l is None or not np.isfinite(inputs.omega_l):
        raise InvalidTruncation("a finite omega_l is required")
    if not inputs.omega_l > idx.omega_c:
        raise InvalidTruncation(
            f"omega_l = {inputs.omega_l} must exceed omega_c = {idx.omega_c}")
    if variant == BoundVariant.BODE:
        alpha_sum = sum(inputs.alpha.rhp_roots, start=0j)
        beta_sum = sum(inputs.beta.rhp_roots, start=0j)
        root_part = float(np.pi) * (alpha_sum.real - beta_sum.real)
        cond_desc = "-a*pi/2 + pi*sum(alpha) - pi*sum(beta) - omega_c*ln(rho) > 0"
    elif variant == BoundVariant.BODE_MODIFIED:
        root_part = 0.0
        cond_desc = "-a*pi/2 - omega_c*ln(rho) > 0"
    else:
        raise ValueError(f"{variant} is not a Bode variant")
    numerator = -inputs.a * np.pi / 2 + root_part \
        - idx.omega_c * float(np.log(idx.rho))
    if not numerator > 0.0:
        raise ConditionNotMet(
            f"sign condition violated for {variant.value}: numerator = "
            f"{numerator:.6g} <= 0", value=numerator)
    bound = numerator / (inputs.omega_l - idx.omega_c)
    return BoundReport(variant=variant, bound_nats=float(bound),
                       measured_ln_smax=idx.ln_s_max, satisfied=None,
                       condition_checked=(cond_desc, True))


def verdict(report: BoundReport) -> BoundReport:
    """Attach the satisfied flag and the margin in nats."""
    m = report.measured_ln_smax - report.bound_nats
    return replace(report, satisfied=bool(m >= 0.0), margin_nats=float(m))
