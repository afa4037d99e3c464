"""Real-coefficient polynomials (ascending powers of s) and root classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.polynomial as npp

from .errors import NoRoots, RootFindingFailed

#: roots with real part above this are "right half plane", below -rhp_tol "left",
#: in between "on axis".  The source material never treats marginal roots, so
#: on-axis roots are reported separately rather than folded into either side.
DEFAULT_RHP_TOL = 1e-9

DEFAULT_ROOT_TOL = 1e-9


def _trimmed(coeffs) -> tuple[float, ...]:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a nonempty 1-d real sequence")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    n = c.size
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    out = tuple(float(x) for x in c[:n])
    if all(x == 0.0 for x in out):
        raise ValueError("identically zero polynomial is not representable")
    return out


@dataclass(frozen=True)
class Polynomial:
    """Polynomial sum_k coeffs[k] * s**k with real coefficients.

    Trailing (highest-order) zero coefficients are trimmed at construction, so
    the leading coefficient is always nonzero.
    """

    coeffs: tuple[float, ...]
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trimmed(self.coeffs))
        object.__setattr__(self, "_arr", np.asarray(self.coeffs, dtype=float))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def origin_multiplicity(self) -> int:
        """Multiplicity of the root at s = 0 (number of leading zero coefficients)."""
        m = 0
        while m < self.degree and self.coeffs[m] == 0.0:
            m += 1
        return m

    def __call__(self, s):
        return npp.polyval(s, self._arr)

    def derivative_coeffs(self) -> np.ndarray:
        """Ascending coefficients of dp/ds (plain array; [0.] for constants)."""
        if self.degree == 0:
            return np.zeros(1)
        return npp.polyder(self._arr)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(npp.polymul(self._arr, other._arr))
        return Polynomial(self._arr * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npp.polyadd(self._arr, other._arr))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npp.polysub(self._arr, other._arr))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self._arr)

    def coeff_scale(self) -> float:
        return float(np.max(np.abs(self._arr)))

    def abs_eval(self, omega):
        """Upper bound sum_k |c_k| |omega|^k, used for relative conditioning."""
        return npp.polyval(np.abs(omega), np.abs(self._arr))

    def divide(self, other: "Polynomial") -> tuple["Polynomial", float]:
        """Polynomial division; returns (quotient, relative remainder norm)."""
        q, r = npp.polydiv(self._arr, other._arr)
        rnorm = float(np.max(np.abs(r))) / max(self.coeff_scale(), 1e-300)
        return Polynomial(q), rnorm


def poly_from_roots(roots, leading: float = 1.0) -> Polynomial:
    """Real-coefficient polynomial with the given roots (conjugates paired)."""
    arr = np.array([1.0 + 0.0j])
    for r in roots:
        arr = npp.polymul(arr, np.array([-complex(r), 1.0]))
    arr = arr * leading
    if np.max(np.abs(arr.imag)) > 1e-9 * max(np.max(np.abs(arr.real)), 1e-300):
        raise ValueError("roots are not closed under conjugation")
    return Polynomial(arr.real)


@dataclass(frozen=True)
class RootSet:
    """Roots of a real polynomial with RHP / on-axis classification.

    ``rhp`` and ``on_axis`` are index subsets into ``roots``; a root is RHP when
    Re > rhp_tol and on-axis when |Re| <= rhp_tol.
    """

    roots: tuple[complex, ...]
    rhp: tuple[int, ...]
    on_axis: tuple[int, ...]
    tol: float = DEFAULT_ROOT_TOL
    rhp_tol: float = DEFAULT_RHP_TOL

    @classmethod
    def classify(cls, roots, tol=DEFAULT_ROOT_TOL, rhp_tol=DEFAULT_RHP_TOL) -> "RootSet":
        roots = tuple(complex(r) for r in roots)
        rhp = tuple(i for i, r in enumerate(roots) if r.real > rhp_tol)
        axis = tuple(i for i, r in enumerate(roots) if abs(r.real) <= rhp_tol)
        return cls(roots, rhp, axis, tol, rhp_tol)

    @classmethod
    def empty(cls) -> "RootSet":
        return cls((), (), ())

    @property
    def rhp_roots(self) -> tuple[complex, ...]:
        return tuple(self.roots[i] for i in self.rhp)

    @property
    def on_axis_roots(self) -> tuple[complex, ...]:
        return tuple(self.roots[i] for i in self.on_axis)

    def __len__(self) -> int:
        return len(self.roots)


def _conjugate_symmetrize(roots: np.ndarray, scale: float) -> np.ndarray:
    """Snap near-conjugate pairs to exact conjugates (keeps kappa real)."""
    out = roots.copy()
    tol = 1e-6 * max(scale, 1.0)
    used = np.zeros(len(out), bool)
    for i in range(len(out)):
        if used[i] or abs(out[i].imag) <= tol * 1e-3:
            if abs(out[i].imag) <= tol * 1e-3:
                out[i] = complex(out[i].real, 0.0)
                used[i] = True
            continue
        best, bestdist = -1, np.inf
        for j in range(i + 1, len(out)):
            if used[j]:
                continue
            d = abs(out[j] - out[i].conjugate())
            if d < bestdist:
                best, bestdist = j, d
        if best >= 0 and bestdist <= tol:
            a = 0.5 * (out[i].real + out[best].real)
            b = 0.5 * (abs(out[i].imag) + abs(out[best].imag))
            sgn = 1.0 if out[i].imag >= 0 else -1.0
            out[i] = complex(a, sgn * b)
            out[best] = complex(a, -sgn * b)
            used[i] = used[best] = True
    return out


def poly_roots(p: Polynomial, tol: float = DEFAULT_ROOT_TOL,
               rhp_tol: float = DEFAULT_RHP_TOL) -> RootSet:
    """All complex roots of ``p`` via the companion-matrix eigenproblem.

    Each root gets one Newton polish step.  Residuals are checked against
    ``tol * max|coeff| * max(1, |r|)**degree``; failure raises
    :class:`RootFindingFailed`.
    """
    if p.degree < 1:
        raise NoRoots("degree-0 polynomial has no roots")
    raw = np.roots(p._arr[::-1])
    dp = npp.polyder(p._arr)
    polished = []
    for r in raw:
        d = npp.polyval(r, dp)
        if d != 0 and np.isfinite(d):
            step = npp.polyval(r, p._arr) / d
            if np.isfinite(step) and abs(step) < 0.5 * max(1.0, abs(r)):
                r = r - step
        polished.append(r)
    roots = _conjugate_symmetrize(np.asarray(polished), float(np.max(np.abs(raw), initial=0.0)))
    scale = p.coeff_scale()
    residuals = [abs(npp.polyval(r, p._arr)) for r in roots]
    limits = [tol * scale * max(1.0, abs(r)) ** p.degree for r in roots]
    bad = [i for i, (res, lim) in enumerate(zip(residuals, limits)) if not res <= lim]
    if bad:
        raise RootFindingFailed(
            f"{len(bad)} root(s) failed the residual check after Newton polish",
            roots=[roots[i] for i in bad], residuals=[residuals[i] for i in bad])
    return RootSet.classify(roots, tol=tol, rhp_tol=rhp_tol)
