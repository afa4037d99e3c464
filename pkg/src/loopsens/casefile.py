"""Flat key-value case files for user-supplied loops.

Grammar (one statement per line; ``#`` starts a comment; blank lines ignored)::

    case = NAME                     # optional header, before any section
    [plant]                         # exactly one
    num = c0 c1 c2 ...              # ascending powers of s
    den = c0 c1 c2 ...
    dead_time = SECONDS             # optional, default 0
    [controller NAME]               # one or more
    num = ...
    den = ...
    dead_time = ...                 # optional
    [analysis]                      # optional
    omega_l = X                     # Bode truncation frequency (default 10)
    sigma = X                       # explicit singular point (optional)
    eta = X                         # its imaginary part (default 0)

All frequencies are rad/s, dead time in seconds, coefficients are plain
floats.  Files written by :func:`write_case_file` parse back to an identical
case (floats are emitted with repr precision).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

from .bounds import BoundVariant
from .casebook import CaseDefinition
from .errors import CaseFileError
from .lti import ParametricModel, TransferFunction
from .poly import Polynomial


@dataclass(frozen=True)
class RawLoopElement(ParametricModel):
    """Plant or controller given directly by coefficients.

    Only gain and dead-time perturbations apply; a coefficient list does not
    identify time constants.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    dead_time: float = 0.0
    gain: float = 1.0

    GAIN_FIELDS: ClassVar = ("gain",)
    TIME_FIELDS: ClassVar = ()
    DEAD_TIME_FIELD: ClassVar = "dead_time"

    def tf(self) -> TransferFunction:
        return TransferFunction(Polynomial(self.num) * self.gain,
                                Polynomial(self.den), self.dead_time)


@dataclass(frozen=True)
class UserCase:
    name: str
    plant: RawLoopElement
    controllers: dict[str, RawLoopElement]
    omega_l: float = 10.0
    sigma: float | None = None
    eta: float = 0.0

    def to_definition(self) -> CaseDefinition:
        from .shaping import SingularPoint

        variant = (BoundVariant.PJ_ARBITRARY if self.sigma is not None
                   else BoundVariant.PJ_AT_NMP_ZERO)
        sp = None
        if self.sigma is not None:
            sp = SingularPoint.explicit(self.sigma, self.eta)
        return CaseDefinition(
            name=self.name, title=f"user case {self.name!r}", plant=self.plant,
            controllers=dict(self.controllers), singular_point_of="nmp_zero",
            pj_variant=variant, omega_l=self.omega_l, explicit_sp=sp)


def _parse_floats(text: str, lineno: int, key: str) -> tuple[float, ...]:
    out = []
    for tok in text.split():
        try:
            out.append(float(tok))
        except ValueError:
            raise CaseFileError(f"cannot parse {tok!r} as a number",
                                line=lineno, field=key) from None
    if not out:
        raise CaseFileError("empty value", line=lineno, field=key)
    return tuple(out)


def parse_case_file(path) -> UserCase:
    name = "user"
    plant_kv: dict[str, tuple] | None = None
    controllers: dict[str, dict] = {}
    analysis: dict[str, float] = {}
    section: dict | None = None
    section_kind = None

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise CaseFileError("unterminated section header", line=lineno)
                header = line[1:-1].strip()
                if header == "plant":
                    if plant_kv is not None:
                        raise CaseFileError("duplicate [plant] section", line=lineno)
                    plant_kv = {}
                    section, section_kind = plant_kv, "plant"
                elif header.startswith("controller"):
                    cname = header[len("controller"):].strip()
                    if not cname:
                        raise CaseFileError("controller section needs a name", line=lineno)
                    if cname in controllers:
                        raise CaseFileError(f"duplicate controller {cname!r}", line=lineno)
                    controllers[cname] = {}
                    section, section_kind = controllers[cname], "controller"
                elif header == "analysis":
                    section, section_kind = analysis, "analysis"
                else:
                    raise CaseFileError(f"unknown section {header!r}", line=lineno)
                continue
            if "=" not in line:
                raise CaseFileError("expected 'key = value'", line=lineno)
            key, _, value = (part.strip() for part in line.partition("="))
            if section is None:
                if key == "case":
                    name = value
                    continue
                raise CaseFileError(f"key {key!r} outside any section", line=lineno)
            if section_kind in ("plant", "controller"):
                if key in ("num", "den"):
                    section[key] = _parse_floats(value, lineno, key)
                elif key == "dead_time":
                    section[key] = _parse_floats(value, lineno, key)[0]
                else:
                    raise CaseFileError(f"unknown key {key!r}", line=lineno, field=key)
            else:
                if key not in ("omega_l", "sigma", "eta"):
                    raise CaseFileError(f"unknown analysis key {key!r}",
                                        line=lineno, field=key)
                section[key] = _parse_floats(value, lineno, key)[0]

    if plant_kv is None:
        raise CaseFileError("missing [plant] section")
    if not controllers:
        raise CaseFileError("at least one [controller NAME] section is required")

    def element(kv: dict, what: str) -> RawLoopElement:
        for req in ("num", "den"):
            if req not in kv:
                raise CaseFileError(f"{what} is missing {req!r}", field=req)
        try:
            return RawLoopElement(num=kv["num"], den=kv["den"],
                                  dead_time=kv.get("dead_time", 0.0))
        except ValueError as exc:
            raise CaseFileError(f"invalid {what}: {exc}") from exc

    plant = element(plant_kv, "plant")
    ctrls = {cname: element(kv, f"controller {cname!r}")
             for cname, kv in controllers.items()}
    return UserCase(name=name, plant=plant, controllers=ctrls,
                    omega_l=analysis.get("omega_l", 10.0),
                    sigma=analysis.get("sigma"), eta=analysis.get("eta", 0.0))


def write_case_file(case: UserCase, path) -> None:
    lines = [f"case = {case.name}", "", "[plant]"]

    def emit(el: RawLoopElement):
        lines.append("num = " + " ".join(repr(c) for c in el.num))
        lines.append("den = " + " ".join(repr(c) for c in el.den))
        lines.append(f"dead_time = {el.dead_time!r}")

    emit(case.plant)
    for name, ctrl in case.controllers.items():
        lines.append("")
        lines.append(f"[controller {name}]")
        emit(ctrl)
    lines.append("")
    lines.append("[analysis]")
    lines.append(f"omega_l = {case.omega_l!r}")
    if case.sigma is not None:
        lines.append(f"sigma = {case.sigma!r}")
        lines.append(f"eta = {case.eta!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
