"""Built-in chemical-control case studies and one-shot analysis runs.

Three loops ship with the package:

* ``foipdt`` -- boiler-drum level: integrating plant with inverse response and
  a 0.1 s delay, under a filtered series PID (Luyben 2003 tuning) and an ideal
  parallel PID (Pai et al. 2010 tuning).
* ``cstr``  -- autocatalytic reactor: two unstable complex poles, inverse
  response, 10 s delay, series PID with a lead-lag term (the integral time is
  negative as published; kept verbatim).
* ``sopdt`` -- open-loop unstable second-order plant with delay under three
  PID tunings, plus the all-pass-compensated loop study with dead-time
  mismatch.

Each case stores, as data, the published reading frequencies for the crossover
row of its tables (``read_crossovers``) and the truncation frequency omega_l
that the published Bode bounds imply.  Both play the same role: they are inputs
the published numbers depend on but that no computation can recover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .bounds import BoundInputs, BoundReport, BoundVariant, bode_bound, pj_bound, verdict
from .errors import ConditionNotMet, NonconvergentIntegral, UnknownCase
from .integrals import (DEFAULT_QUADRATURE, IntegralResult, QuadratureConfig,
                        bode_integral, poisson_integral, poisson_rhs)
from .lti import (ParametricModel, PerturbationSpec, TransferFunction,
                  bode_gain_a, tf_series)
from .poly import Polynomial
from .shaping import (SensitivityModel, SingularPoint, make_sensitivity,
                      reflect_rhp_poles)
from .sweep import SensitivityIndices, extract_indices, sweep


# ---------------------------------------------------------------------------
# parametric plants and controllers


@dataclass(frozen=True)
class FoipdtPlant(ParametricModel):
    """k (1 - tau_zero s) e^{-td s} / (s (tau_lag s + 1))"""

    gain: float
    tau_zero: float
    tau_lag: float
    dead_time: float

    GAIN_FIELDS: ClassVar = ("gain",)
    TIME_FIELDS: ClassVar = ("tau_zero", "tau_lag")
    DEAD_TIME_FIELD: ClassVar = "dead_time"

    def tf(self) -> TransferFunction:
        num = Polynomial((self.gain, -self.gain * self.tau_zero))
        den = Polynomial((0.0, 1.0, self.tau_lag))
        return TransferFunction(num, den, self.dead_time)


@dataclass(frozen=True)
class CstrPlant(ParametricModel):
    """k (1 - tau_zero s) e^{-td s} / (a2 s^2 + a1 s + 1)"""

    gain: float
    tau_zero: float
    a1: float
    a2: float
    dead_time: float

    GAIN_FIELDS: ClassVar = ("gain",)
    TIME_FIELDS: ClassVar = ("tau_zero", "a1", "a2")
    DEAD_TIME_FIELD: ClassVar = "dead_time"

    def tf(self) -> TransferFunction:
        num = Polynomial((self.gain, -self.gain * self.tau_zero))
        den = Polynomial((1.0, self.a1, self.a2))
        return TransferFunction(num, den, self.dead_time)


@dataclass(frozen=True)
class SopdtPlant(ParametricModel):
    """k e^{-td s} / ((tau_unstable s - 1)(tau_lag s + 1))"""

    gain: float
    tau_unstable: float
    tau_lag: float
    dead_time: float

    GAIN_FIELDS: ClassVar = ("gain",)
    TIME_FIELDS: ClassVar = ("tau_unstable", "tau_lag")
    DEAD_TIME_FIELD: ClassVar = "dead_time"

    def tf(self) -> TransferFunction:
        den = Polynomial((-1.0, self.tau_unstable)) * Polynomial((1.0, self.tau_lag))
        return TransferFunction(Polynomial((self.gain,)), den, 0.0 + self.dead_time)


@dataclass(frozen=True)
class ParallelPid(ParametricModel):
    """k_c (1 + 1/(tau_i s) + tau_d s)"""

    k_c: float
    tau_i: float
    tau_d: float

    GAIN_FIELDS: ClassVar = ("k_c",)
    TIME_FIELDS: ClassVar = ("tau_i", "tau_d")

    def tf(self) -> TransferFunction:
        num = Polynomial((self.k_c, self.k_c * self.tau_i,
                          self.k_c * self.tau_i * self.tau_d))
        return TransferFunction(num, Polynomial((0.0, self.tau_i)), 0.0)


@dataclass(frozen=True)
class FilteredSeriesPid(ParametricModel):
    """k_c (1 + tau_i s)(1 + tau_d s) / (tau_i s (filter_ratio tau_d s + 1))

    The derivative-filter ratio is not published; 0.1 is the conventional
    value and can be overridden per run.
    """

    k_c: float
    tau_i: float
    tau_d: float
    filter_ratio: float = 0.1

    GAIN_FIELDS: ClassVar = ("k_c",)
    TIME_FIELDS: ClassVar = ("tau_i", "tau_d")

    def tf(self) -> TransferFunction:
        num = self.k_c * (Polynomial((1.0, self.tau_i)) * Polynomial((1.0, self.tau_d)))
        den = Polynomial((0.0, self.tau_i)) * Polynomial((1.0, self.filter_ratio * self.tau_d))
        return TransferFunction(num, den, 0.0)


@dataclass(frozen=True)
class LeadLagPid(ParametricModel):
    """k_c (1 + 1/(tau_i s) + tau_d s) (lead s + 1)/(lag s + 1)"""

    k_c: float
    tau_i: float
    tau_d: float
    lead: float
    lag: float

    GAIN_FIELDS: ClassVar = ("k_c",)
    TIME_FIELDS: ClassVar = ("tau_i", "tau_d", "lead", "lag")

    def tf(self) -> TransferFunction:
        pid = Polynomial((self.k_c, self.k_c * self.tau_i,
                          self.k_c * self.tau_i * self.tau_d))
        num = pid * Polynomial((1.0, self.lead))
        den = Polynomial((0.0, self.tau_i)) * Polynomial((1.0, self.lag))
        return TransferFunction(num, den, 0.0)


# ---------------------------------------------------------------------------
# case definitions


@dataclass(frozen=True)
class MismatchSpec:
    label: str
    perturbation: PerturbationSpec
    read_crossover: float | None = None


@dataclass(frozen=True)
class CaseDefinition:
    name: str
    title: str
    plant: ParametricModel
    controllers: dict[str, ParametricModel]
    singular_point_of: str  # "nmp_zero" or "dead_time"
    pj_variant: BoundVariant
    omega_l: float
    read_crossovers: dict[str, float] = field(default_factory=dict)
    mismatch: tuple[MismatchSpec, ...] = ()
    compensate: str | None = None  # controller name for the compensated study
    explicit_sp: SingularPoint | None = None

    def loop(self, controller: str, plant: ParametricModel | None = None) -> TransferFunction:
        p = self.plant if plant is None else plant
        return tf_series(p.tf(), self.controllers[controller].tf())

    def singular_point(self, model: SensitivityModel) -> SingularPoint:
        if self.explicit_sp is not None:
            return self.explicit_sp
        if self.singular_point_of == "nmp_zero" and model.zeta.rhp_roots:
            zetas = model.zeta.rhp_roots
            z = max(zetas, key=lambda r: (r.real, -abs(r.imag)))
            return SingularPoint.at_open_loop_zero(z)
        return SingularPoint.from_dead_time(self.plant.tf().dead_time)


def _foipdt() -> CaseDefinition:
    return CaseDefinition(
        name="foipdt",
        title="Boiler-drum level (FOIPDT, integrating + inverse response)",
        plant=FoipdtPlant(gain=0.547, tau_zero=0.418, tau_lag=1.06, dead_time=0.1),
        controllers={
            "luyben": FilteredSeriesPid(k_c=1.69, tau_i=11.5, tau_d=1.15),
            "pai": ParallelPid(k_c=4.06, tau_i=2.68, tau_d=0.65),
        },
        singular_point_of="nmp_zero",
        pj_variant=BoundVariant.PJ_AT_NMP_ZERO,
        omega_l=1000.0,
        # both published rho values sit on the curves at the same reading
        # frequency 0.8685 (the luyben row's crossover read)
        read_crossovers={"luyben": 0.8685, "pai": 0.8685},
    )


def _cstr() -> CaseDefinition:
    return CaseDefinition(
        name="cstr",
        title="Autocatalytic CSTR (two unstable complex poles + delay)",
        plant=CstrPlant(gain=-0.2679, tau_zero=41.6667, a1=-2.9781, a2=279.03,
                        dead_time=10.0),
        controllers={
            "rc2006pid": LeadLagPid(k_c=1.3254, tau_i=-86.251, tau_d=3.5807,
                                    lead=5.0, lag=4.112),
        },
        singular_point_of="nmp_zero",
        pj_variant=BoundVariant.PJ_AT_NMP_ZERO,
        omega_l=10.0,
        read_crossovers={"rc2006pid": 0.003972},
        mismatch=(
            MismatchSpec("10% model mismatch",
                         PerturbationSpec(0.10, 0.10, 0.10),
                         read_crossover=0.004154),
        ),
    )


def _sopdt() -> CaseDefinition:
    return CaseDefinition(
        name="sopdt",
        title="Unstable SOPDT reactor (three PID tunings + compensator study)",
        plant=SopdtPlant(gain=1.0, tau_unstable=5.0, tau_lag=2.07, dead_time=0.939),
        controllers={
            "sl2008": ParallelPid(k_c=6.7051, tau_i=5.4738, tau_d=1.333),
            "rc2006": ParallelPid(k_c=6.4285, tau_i=6.4409, tau_d=1.413),
            "sl2007": ParallelPid(k_c=4.009, tau_i=8.0327, tau_d=1.6808),
        },
        singular_point_of="dead_time",
        pj_variant=BoundVariant.PJ_AT_NMP_ZERO,
        omega_l=10.0,
        read_crossovers={"sl2008": 0.4498, "rc2006": 0.4479, "sl2007": 0.2805},
        # the published mismatch rows reproduce (to four digits) under a
        # dead-time-only perturbation; gain/time-constant scaling does not
        mismatch=(
            MismatchSpec("10% model mismatch", PerturbationSpec(0.0, 0.0, 0.10)),
            MismatchSpec("20% model mismatch", PerturbationSpec(0.0, 0.0, 0.20)),
        ),
        compensate="sl2008",
    )


_CASES = {"foipdt": _foipdt, "cstr": _cstr, "sopdt": _sopdt}


def case_names() -> tuple[str, ...]:
    return tuple(sorted(_CASES))


def load_case(name: str) -> CaseDefinition:
    try:
        builder = _CASES[name]
    except KeyError:
        raise UnknownCase(
            f"unknown case {name!r}; built-ins: {', '.join(case_names())}") from None
    return builder()


# ---------------------------------------------------------------------------
# analysis runs


@dataclass(frozen=True)
class ControllerReport:
    name: str
    indices: SensitivityIndices
    indices_read: SensitivityIndices | None
    singular_point: SingularPoint
    poisson_lhs: float
    poisson_rhs: float
    poisson_residual: float
    bode: IntegralResult | None
    bode_note: str | None
    pj: BoundReport
    bode_bnd: BoundReport
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class MismatchReport:
    label: str
    indices: SensitivityIndices
    indices_read: SensitivityIndices | None
    compensated: SensitivityIndices | None


@dataclass(frozen=True)
class CaseReport:
    case: str
    title: str
    controllers: tuple[ControllerReport, ...]
    mismatch: tuple[MismatchReport, ...]
    notes: tuple[str, ...] = ()


def _bound_inputs(case: CaseDefinition, model: SensitivityModel,
                  idx: SensitivityIndices, sp: SingularPoint) -> BoundInputs:
    return BoundInputs(indices=idx, sp=sp, alpha=model.alpha, beta=model.beta,
                       g_at_sp=float(abs(model.at(sp.s0))),
                       a=bode_gain_a(model.open_loop), omega_l=case.omega_l)


def analyze_loop(case: CaseDefinition, name: str,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 read_crossover: float | None = None) -> ControllerReport:
    """Indices, integral identity check and both bounds for one controller."""
    G = case.loop(name)
    model = make_sensitivity(G, pade_order=cfg.pade_order)
    samples = sweep(model)
    idx = extract_indices(samples)
    idx_read = None
    rc = read_crossover if read_crossover is not None else case.read_crossovers.get(name)
    if rc is not None:
        idx_read = extract_indices(samples, read_omega_c=rc)
    sp = case.singular_point(model)
    lhs = poisson_integral(model, sp, cfg)
    rhs = poisson_rhs(model, sp)
    notes = []
    try:
        bode_res = bode_integral(model, cfg)
        bode_note = None
    except NonconvergentIntegral as exc:
        bode_res = None
        bode_note = str(exc)
    reported = idx_read if idx_read is not None else idx
    inputs = _bound_inputs(case, model, reported, sp)
    pj = verdict(pj_bound(inputs, case.pj_variant))
    bb = verdict(bode_bound(inputs, BoundVariant.BODE))
    if case.name == "cstr":
        one_pole = BoundInputs(indices=reported, sp=sp,
                               alpha=type(model.alpha).classify(model.alpha.rhp_roots[:1]),
                               beta=model.beta, g_at_sp=inputs.g_at_sp,
                               a=inputs.a, omega_l=case.omega_l)
        single = pj_bound(one_pole, case.pj_variant)
        notes.append(
            "published Poisson-Jensen bound 0.0766 reproduces only if a single "
            f"pole of the conjugate pair enters the sum ({single.bound_nats:.4f} "
            f"nats); the both-pole value is {pj.bound_nats:.4f} nats")
    return ControllerReport(
        name=name, indices=idx, indices_read=idx_read, singular_point=sp,
        poisson_lhs=lhs, poisson_rhs=rhs, poisson_residual=lhs - rhs,
        bode=bode_res, bode_note=bode_note, pj=pj, bode_bnd=bb,
        notes=tuple(notes))


def _mismatch_row(case: CaseDefinition, spec: MismatchSpec,
                  cfg: QuadratureConfig) -> MismatchReport:
    plant = case.plant.perturbed(spec.perturbation)
    name = case.compensate or next(iter(case.controllers))
    G = case.loop(name, plant=plant)
    model = make_sensitivity(G, pade_order=cfg.pade_order)
    samples = sweep(model)
    idx = extract_indices(samples)
    idx_read = None
    if spec.read_crossover is not None:
        idx_read = extract_indices(samples, read_omega_c=spec.read_crossover)
    comp = None
    if case.compensate is not None:
        G_comp = tf_series(reflect_rhp_poles(plant.tf()),
                           case.controllers[name].tf())
        comp_model = make_sensitivity(G_comp, pade_order=cfg.pade_order)
        comp = extract_indices(sweep(comp_model))
    return MismatchReport(label=spec.label, indices=idx, indices_read=idx_read,
                          compensated=comp)


def run_case(case: CaseDefinition | str,
             cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> CaseReport:
    """Full per-controller analysis plus the case's mismatch study."""
    if isinstance(case, str):
        case = load_case(case)
    controllers = tuple(analyze_loop(case, name, cfg) for name in case.controllers)
    rows = []
    if case.mismatch:
        nominal = MismatchSpec("nominal", PerturbationSpec(),
                               read_crossover=case.read_crossovers.get(
                                   case.compensate or next(iter(case.controllers))))
        for spec in (nominal, *case.mismatch):
            rows.append(_mismatch_row(case, spec, cfg))
    notes = []
    if case.name == "foipdt":
        notes.append("published rho values for both controllers sit on the "
                     "curves at the shared reading frequency 0.8685")
    return CaseReport(case=case.name, title=case.title, controllers=controllers,
                      mismatch=tuple(rows), notes=tuple(notes))
