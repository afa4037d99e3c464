"""Transfer functions with dead time, composition and parameter perturbation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import DegeneratePlant, ImproperSystem, PoleOnAxis
from .poly import Polynomial

_AXIS_POLE_RTOL = 1e-12


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function num/den times a pure delay exp(-dead_time*s)."""

    num: Polynomial
    den: Polynomial
    dead_time: float = 0.0

    def __post_init__(self):
        if not isinstance(self.num, Polynomial):
            object.__setattr__(self, "num", Polynomial(self.num))
        if not isinstance(self.den, Polynomial):
            object.__setattr__(self, "den", Polynomial(self.den))
        if not (self.dead_time >= 0.0):
            raise ValueError(f"dead_time must be >= 0, got {self.dead_time}")

    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    @property
    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    def at(self, s):
        """Evaluate at an arbitrary complex point (or array of points)."""
        s = np.asarray(s, dtype=complex)
        d = self.den(s)
        return self.num(s) / d * np.exp(-self.dead_time * s)

    def at_omega(self, omega):
        """Frequency response at real omega (scalar or array); guards axis poles."""
        w = np.asarray(omega, dtype=float)
        s = 1j * w
        d = self.den(s)
        cond = self.den.abs_eval(w)
        bad = np.abs(d) <= _AXIS_POLE_RTOL * np.maximum(cond, 1e-300)
        if np.any(bad):
            w_bad = float(np.atleast_1d(w)[np.atleast_1d(bad)][0])
            raise PoleOnAxis(f"denominator vanishes at omega = {w_bad}", omega=w_bad)
        return self.num(s) / d * np.exp(-1j * self.dead_time * w)

    def magnitude_envelope(self, omega):
        """Coefficient-based upper bound on |G(j omega)| (inf where not certified).

        Valid pointwise: sum|num| / (|den_lead| w^m - sum of lower |den| terms)
        whenever that denominator is positive.
        """
        w = np.abs(np.asarray(omega, dtype=float))
        up = self.num.abs_eval(w)
        dc = np.abs(self.den._arr)
        m = self.den.degree
        lead = dc[-1] * w ** m
        rest = np.polynomial.polynomial.polyval(w, np.concatenate([dc[:-1], [0.0]]))
        lo = lead - rest
        with np.errstate(divide="ignore", invalid="ignore"):
            env = np.where(lo > 0, up / np.where(lo > 0, lo, 1.0), np.inf)
        return env

    def scaled_gain(self, factor: float) -> "TransferFunction":
        return TransferFunction(self.num * factor, self.den, self.dead_time)


def tf_series(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    """Series interconnection; no pole-zero cancellation is performed.

    Exact right-half-plane bookkeeping relies on keeping every factor, so any
    common roots of the product are preserved verbatim.
    """
    return TransferFunction(a.num * b.num, a.den * b.den, a.dead_time + b.dead_time)


def tf_constant(k: float) -> TransferFunction:
    return TransferFunction(Polynomial((float(k),)), Polynomial((1.0,)), 0.0)


def bode_gain_a(G: TransferFunction) -> float:
    """Gain term for the Bode integral: lim s*G(s) for relative degree one.

    Zero whenever the relative degree exceeds one or a delay is present; the
    limit does not exist for improper systems.
    """
    if not G.is_proper:
        raise ImproperSystem(
            f"relative degree {G.relative_degree} < 0; Bode gain term undefined")
    if G.relative_degree == 1 and G.dead_time == 0.0:
        return G.num.leading / G.den.leading
    return 0.0


@dataclass(frozen=True)
class PerturbationSpec:
    """Signed fractional perturbations applied to a parametric plant."""

    gain_pct: float = 0.0
    time_const_pct: float = 0.0
    dead_time_pct: float = 0.0

    def __post_init__(self):
        for name in ("gain_pct", "time_const_pct", "dead_time_pct"):
            v = getattr(self, name)
            if not v > -1.0:
                raise ValueError(f"{name} must be > -1, got {v}")

    @property
    def is_identity(self) -> bool:
        return self.gain_pct == 0.0 and self.time_const_pct == 0.0 and self.dead_time_pct == 0.0


class ParametricModel:
    """Mixin for dataclass models whose fields carry gain/time-constant roles.

    Subclasses declare which fields scale with (1+gain_pct) and which with
    (1+time_const_pct); the dead-time field scales with (1+dead_time_pct).
    Time constants are perturbed on these declared parameters, never inferred
    from expanded polynomial coefficients.
    """

    GAIN_FIELDS: ClassVar[tuple[str, ...]] = ()
    TIME_FIELDS: ClassVar[tuple[str, ...]] = ()
    DEAD_TIME_FIELD: ClassVar[str | None] = None

    def tf(self) -> TransferFunction:
        raise NotImplementedError

    def perturbed(self, spec: PerturbationSpec):
        changes = {}
        for name in self.GAIN_FIELDS:
            changes[name] = getattr(self, name) * (1.0 + spec.gain_pct)
        for name in self.TIME_FIELDS:
            changes[name] = getattr(self, name) * (1.0 + spec.time_const_pct)
        if self.DEAD_TIME_FIELD is not None:
            td = getattr(self, self.DEAD_TIME_FIELD) * (1.0 + spec.dead_time_pct)
            if td < 0:
                raise DegeneratePlant(f"perturbed dead time is negative: {td}")
            changes[self.DEAD_TIME_FIELD] = td
        out = dataclasses.replace(self, **changes)
        try:
            out.tf()
        except ValueError as exc:
            raise DegeneratePlant(f"perturbation degenerates the plant: {exc}") from exc
        return out


def perturb(model, spec: PerturbationSpec):
    """Apply a perturbation to a parametric model or (gain/delay only) a raw TF."""
    if isinstance(model, ParametricModel):
        return model.perturbed(spec)
    if isinstance(model, TransferFunction):
        if spec.time_const_pct != 0.0:
            raise ValueError(
                "time-constant perturbation needs a parametric model; raw "
                "coefficients do not identify time constants")
        td = model.dead_time * (1.0 + spec.dead_time_pct)
        if td < 0:
            raise DegeneratePlant(f"perturbed dead time is negative: {td}")
        return TransferFunction(model.num * (1.0 + spec.gain_pct), model.den, td)
    raise TypeError(f"cannot perturb {type(model).__name__}")
