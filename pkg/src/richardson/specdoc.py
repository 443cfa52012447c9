"""JSON experiment documents and the named presets."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .families import (BridgeRule, CountableSpec, FamilyError, FamilySpec, LadderSpec, MultiSpineSpec,
                       SequenceSpec, interval_rule)


class SpecError(ValueError):
    pass


class SequenceDoc(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    base: Optional[int] = None
    ratio: Optional[int] = None
    count: Optional[int] = None
    values: Optional[list[int]] = Field(None, alias="list")

    @model_validator(mode="after")
    def _one_form(self):
        if self.values is not None:
            if self.base is not None or self.ratio is not None:
                raise ValueError("give either list or base/ratio/count")
            if self.count is not None and self.count != len(self.values):
                raise ValueError("count does not match list length")
        elif None in (self.base, self.ratio, self.count):
            raise ValueError("geometric sequence needs base, ratio and count")
        return self

    def to_spec(self) -> SequenceSpec:
        if self.values is not None:
            return SequenceSpec.explicit(self.values)
        return SequenceSpec.geometric(self.base, self.ratio, self.count)


class SpecDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["ladder", "multispine", "countable"]
    a: Optional[SequenceDoc] = None
    b: Optional[SequenceDoc] = None
    gamma: float = 2.0
    beta: float = 0.0
    correction: Literal["plus78", "minus78", "none"] = "plus78"
    end_shift: Literal["none", "plus78", "minus78"] = "none"
    k: Optional[int] = None
    alphas: Optional[list[float]] = None
    delta: Optional[list[float]] = None
    eps: Optional[list[float]] = None
    tail: int = 8
    lambdas: list[float] = [1.0, 1.5, 2.0, 2.5, 3.0]
    reps: int = 2000
    levels: Optional[list[int]] = None
    seed: int = 1
    threads: Optional[int] = None

    @model_validator(mode="after")
    def _family_keys(self):
        if self.family == "ladder":
            if self.a is None:
                raise ValueError("ladder needs sequence 'a'")
        else:
            if self.b is None:
                raise ValueError(f"{self.family} needs sequence 'b'")
            if self.k is not None and self.k < 1:
                raise ValueError("k >= 1 required")
            if not self.alphas:
                raise ValueError("k >= 1 required (alphas is empty)")
            if self.k is not None and self.k != len(self.alphas):
                raise ValueError("k must equal the number of alphas")
        if self.tail < 0:
            raise ValueError("tail must be >= 0")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if any(not x > 0 for x in self.lambdas):
            raise ValueError("lambda must be positive")
        return self

    def family_spec(self, strict: bool = True) -> FamilySpec:
        """Convert to a family spec; ``strict=False`` skips the multi-spine eps/delta checks."""
        try:
            if self.family == "ladder":
                rule = BridgeRule(self.gamma, self.beta, self.correction, self.end_shift)
                spec = LadderSpec(self.a.to_spec(), rule, self.tail)
                spec.geometry()
                return spec
            if self.family == "multispine":
                spec = MultiSpineSpec(tuple(self.alphas), self.b.to_spec(),
                                      tuple(self.delta) if self.delta else None,
                                      tuple(self.eps) if self.eps else None, self.tail)
                if strict:
                    spec.validate()
                else:
                    spec.b.terms()
                return spec
            spec = CountableSpec(tuple(self.alphas), self.b.to_spec(), self.tail)
            spec.validate()
            return spec
        except FamilyError as exc:
            raise SpecError(str(exc)) from None


def _ladder_doc(gamma, beta, lambdas, **kw) -> dict:
    return {"family": "ladder", "a": {"base": 256, "ratio": 4, "count": 3}, "gamma": gamma, "beta": beta,
            "correction": "plus78", "lambdas": lambdas, "reps": 2000, "seed": 1, **kw}


def preset(name: str) -> dict:
    """Expand ``prop21``, ``prop22``, ``interval:lo,hi``, ``points:a1,...`` or ``countable:a1,...``."""
    if name == "prop21":
        return _ladder_doc(2.0, 0.0, [1.0, 1.5, 2.0, 2.5, 3.0])
    if name == "prop22":
        return _ladder_doc(4.0, 1.0, [1.2, 2.0, 3.5, 5.0, 6.0])
    kind, _, args = name.partition(":")
    try:
        vals = [float(x) for x in args.split(",") if x.strip()]
    except ValueError:
        raise SpecError(f"bad preset arguments in {name!r}") from None
    if kind == "interval":
        if len(vals) != 2:
            raise SpecError("interval preset needs two endpoints")
        try:
            rule = interval_rule(*vals)
        except FamilyError as exc:
            raise SpecError(str(exc)) from None
        lo, hi = vals
        lams = sorted({round(x, 6) for x in (max(1.0, lo / 2), lo, (lo + hi) / 2, hi, hi * 1.2)})
        return _ladder_doc(rule.gamma, rule.beta, lams)
    if kind == "points":
        if not vals:
            raise SpecError("k >= 1 required")
        pts = sorted(set(vals))
        mids = [(x + y) / 2 for x, y in zip([1.0] + pts, pts)]
        lams = sorted({round(x, 6) for x in [*pts, *mids, pts[-1] * 1.25]})
        return {"family": "multispine", "b": {"base": 512, "ratio": 4, "count": 3}, "alphas": vals,
                "lambdas": lams, "reps": 2000, "seed": 1}
    if kind == "countable":
        if len(vals) < 2:
            raise SpecError("countable preset needs at least two alphas")
        return {"family": "countable", "b": {"base": 64, "ratio": 4, "count": len(vals)}, "alphas": vals,
                "lambdas": sorted(set(vals)), "reps": 500, "seed": 1}
    raise SpecError(f"unknown preset {name!r}")


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def parse_document(data: Union[dict, str]) -> SpecDocument:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed document: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("document must be a JSON object")
    try:
        return SpecDocument.model_validate(data)
    except ValidationError as exc:
        raise SpecError(_format_validation(exc)) from None


def load_document(ref: str) -> SpecDocument:
    """``ref`` is a preset name or a path to a JSON document."""
    path = Path(ref)
    if path.is_file():
        try:
            text = path.read_text()
        except OSError as exc:
            raise SpecError(str(exc)) from None
        return parse_document(text)
    if ":" in ref or ref in ("prop21", "prop22"):
        return parse_document(preset(ref))
    raise SpecError(f"no such spec file or preset: {ref}")
