"""Frequency sweeps of |g(jw)| and extraction of the sensitivity indices.

omega_c is the first upward unit-magnitude crossing of |g|.  Because |g| rises
monotonically into that crossing for every loop studied here, the supremum of
|g| below omega_c is a grid artifact approaching 1; published tables instead
read the curve a little below the crossing.  extract_indices therefore accepts
an optional explicit reading frequency (``read_omega_c``) used by the casebook
to reproduce published rows; everything derived from it is still computed from
the actual curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (LowFrequencyAmplification, MarginallyStableLoop,
                     NoCrossover, PoleOnAxis)
from .shaping import SensitivityModel

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepSamples:
    """Sampled |g(jw)| curve on a strictly increasing grid."""

    omegas: np.ndarray
    mags: np.ndarray
    logs: np.ndarray
    loop_mags: np.ndarray | None = None
    evaluator: Callable[[float], float] | None = field(
        default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SensitivityIndices:
    """Crossover, attenuation floor, sensitivity peak and stability margin."""

    omega_c: float
    rho: float
    s_max: float
    omega_ms: float
    stability_margin: float

    def __post_init__(self):
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must be in [0, 1), got {self.rho}")
        if not self.s_max > 1.0:
            raise ValueError(f"s_max must exceed 1, got {self.s_max}")
        if not self.omega_ms > self.omega_c:
            raise ValueError("omega_ms must exceed omega_c")
        if abs(self.stability_margin * self.s_max - 1.0) > 1e-12:
            raise ValueError("stability_margin must equal 1/s_max")

    @property
    def ln_s_max(self) -> float:
        return float(np.log(self.s_max))


def default_window(model: SensitivityModel) -> tuple[float, float]:
    """[1e-4, 1e3] times the fastest loop feature (largest root or 1/t_d)."""
    G = model.open_loop
    mags = []
    for p in (G.num, G.den):
        if p.degree >= 1:
            mags.extend(abs(r) for r in np.roots(p._arr[::-1]) if abs(r) > 0)
    w_ref = max(mags, default=1.0)
    if G.dead_time > 0:
        w_ref = max(w_ref, 1.0 / G.dead_time)
    return 1e-4 * w_ref, 1e3 * w_ref


def sweep(model: SensitivityModel, omega_min: float | None = None,
          omega_max: float | None = None, points: int = 2000,
          densify_threshold: float = 0.05, max_rounds: int = 14,
          max_points: int = 400000) -> SweepSamples:
    """Log-spaced sweep of |g|, densified where ln|g| jumps between neighbors."""
    lo, hi = default_window(model)
    if omega_min is not None:
        lo = omega_min
    if omega_max is not None:
        hi = omega_max
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < omega_min < omega_max, got [{lo}, {hi}]")
    if points < 2:
        raise ValueError("points must be >= 2")
    w = np.geomspace(lo, hi, points)
    try:
        mags = np.abs(model.at_omega(w))
    except MarginallyStableLoop as exc:
        raise PoleOnAxis(f"sensitivity pole on the axis: {exc}", omega=exc.omega) from exc
    for _ in range(max_rounds):
        with np.errstate(divide="ignore"):
            dlog = np.abs(np.diff(np.log(mags)))
        rough = np.nonzero(np.isfinite(dlog) & (dlog > densify_threshold))[0]
        if rough.size == 0 or w.size >= max_points:
            break
        mids = np.sqrt(w[rough] * w[rough + 1])
        try:
            mid_mags = np.abs(model.at_omega(mids))
        except MarginallyStableLoop as exc:
            raise PoleOnAxis(f"sensitivity pole on the axis: {exc}", omega=exc.omega) from exc
        w = np.concatenate([w, mids])
        mags = np.concatenate([mags, mid_mags])
        order = np.argsort(w)
        w, mags = w[order], mags[order]
    with np.errstate(divide="ignore"):
        logs = np.log(mags)
    loop_mags = np.abs(model.open_loop.at_omega(w)) if model.open_loop.den.degree >= 0 else None

    def evaluator(x: float) -> float:
        return float(np.abs(model.at_omega(float(x))))

    return SweepSamples(w, mags, logs, loop_mags, evaluator)


def _bisect_crossing(f, lo: float, hi: float, rel_tol: float = 1e-6) -> float:
    """Root of f on [lo, hi] (f(lo) < 0 < f(hi)) by bisection in log-omega."""
    for _ in range(200):
        if (hi - lo) <= rel_tol * lo:
            break
        mid = np.sqrt(lo * hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return float(np.sqrt(lo * hi))


def _golden_max(f, lo: float, hi: float, rel_tol: float = 1e-9) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(120):
        if (b - a) <= rel_tol * a:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def extract_indices(s: SweepSamples, read_omega_c: float | None = None) -> SensitivityIndices:
    """Graphical indices {omega_c, rho, s_max, omega_ms} from a sweep.

    ``read_omega_c`` pins the crossover to an externally read value (must lie
    below the computed unit crossing); rho is then the curve maximum up to that
    frequency.  Without it, omega_c is the bisection-refined first upward
    crossing of |g| = 1.
    """
    w, mags = s.omegas, s.mags
    if mags[0] >= 1.0:
        raise LowFrequencyAmplification(
            f"|g| = {mags[0]:.6g} >= 1 at the low end of the sweep (omega = {w[0]:.6g})")
    above = mags > 1.0
    if not above.any():
        raise NoCrossover("|g| never exceeds 1 on the sweep")
    i = int(np.argmax(above))
    f_eval = s.evaluator
    if f_eval is not None:
        crossing = _bisect_crossing(lambda x: f_eval(x) - 1.0, float(w[i - 1]), float(w[i]))
    else:
        crossing = float(np.sqrt(w[i - 1] * w[i]))

    if read_omega_c is not None:
        if not (w[0] < read_omega_c):
            raise ValueError("read_omega_c below the sweep window")
        if read_omega_c > crossing:
            raise ValueError(
                f"read_omega_c = {read_omega_c} lies above the computed unit "
                f"crossing {crossing:.6g}; rho would not be an attenuation level")
        omega_c = float(read_omega_c)
        below = w <= omega_c
        rho = float(np.max(mags[below])) if below.any() else 0.0
        if f_eval is not None:
            rho = max(rho, f_eval(omega_c))
    else:
        omega_c = crossing
        rho = float(np.max(mags[: max(i, 1)]))
        if f_eval is not None:
            rho = max(rho, f_eval(omega_c * (1.0 - 1e-9)))
        rho = min(rho, 1.0 - 1e-15)

    # peak search above the crossing, capped where the open loop has died away
    hi_idx = len(w)
    if s.loop_mags is not None:
        alive = np.nonzero(s.loop_mags >= 1e-3)[0]
        if alive.size and alive[-1] + 1 < len(w):
            hi_idx = int(alive[-1] + 1)
    region = np.arange(i, hi_idx)
    if region.size == 0:
        region = np.arange(i, len(w))
    j = int(region[np.argmax(mags[region])])
    if f_eval is not None:
        lo_b = float(w[max(j - 1, 0)])
        hi_b = float(w[min(j + 1, len(w) - 1)])
        omega_ms, s_max = _golden_max(f_eval, lo_b, hi_b)
        if mags[j] > s_max:
            omega_ms, s_max = float(w[j]), float(mags[j])
    else:
        omega_ms, s_max = float(w[j]), float(mags[j])
    return SensitivityIndices(omega_c=omega_c, rho=rho, s_max=float(s_max),
                              omega_ms=float(omega_ms),
                              stability_margin=1.0 / float(s_max))
