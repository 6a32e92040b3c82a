"""Figure descriptions: what to read, which panels to draw, where to save."""

import json
import math
import os
from dataclasses import dataclass

PANELS = ("suboptimality", "grad_norm", "stepsize")
AGGREGATES = ("single", "mean_std")

SPEC_KEYS = {"inputs", "panels", "aggregate", "log_x", "log_y", "f_star", "output"}


class FigureSpecError(ValueError):
    """A figure description failed validation."""


@dataclass(frozen=True)
class TraceInput:
    path: str
    label: str


@dataclass(frozen=True)
class FigureSpec:
    """Validated description of one figure.

    ``inputs`` lists the trace CSVs with their legend labels. ``panels``
    selects what to draw, in order. ``aggregate`` is "single" (one curve
    per input) or "mean_std" (mean line with a one-standard-deviation
    band across inputs, aligned by iteration index and truncated to the
    shortest run). ``f_star`` anchors the suboptimality panel; when
    omitted it is estimated as the best objective value seen across the
    inputs, minus a small relative margin.
    """

    inputs: tuple = ()
    panels: tuple = ()
    output: str = ""
    aggregate: str = "single"
    log_x: bool = False
    log_y: bool = False
    f_star: float | None = None

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise FigureSpecError("figure description must be a JSON object")
        unknown = sorted(set(doc) - SPEC_KEYS)
        if unknown:
            raise FigureSpecError(f"unknown figure key {unknown[0]!r}")

        raw_inputs = doc.get("inputs") or []
        if not isinstance(raw_inputs, list) or not raw_inputs:
            raise FigureSpecError("figure needs at least one input trace")
        inputs = []
        for i, entry in enumerate(raw_inputs):
            if not isinstance(entry, dict) or "path" not in entry:
                raise FigureSpecError(f"input {i} must be an object with a 'path'")
            path = str(entry["path"])
            label = str(entry.get("label", "")) or os.path.splitext(os.path.basename(path))[0]
            inputs.append(TraceInput(path=path, label=label))

        raw_panels = doc.get("panels") or []
        if not isinstance(raw_panels, list) or not raw_panels:
            raise FigureSpecError("figure needs a nonempty panel list")
        for panel in raw_panels:
            if panel not in PANELS:
                raise FigureSpecError(
                    f"unknown panel {panel!r}; expected one of {PANELS}")

        aggregate = doc.get("aggregate", "single")
        if aggregate not in AGGREGATES:
            raise FigureSpecError(
                f"unknown aggregate {aggregate!r}; expected one of {AGGREGATES}")

        output = str(doc.get("output", ""))
        if not output:
            raise FigureSpecError("figure needs an 'output' image path")
        if not output.lower().endswith(".png"):
            raise FigureSpecError(f"output must be a .png path, got {output!r}")

        f_star = doc.get("f_star")
        if f_star is not None:
            f_star = float(f_star)
            if not math.isfinite(f_star):
                raise FigureSpecError("f_star must be finite")

        return cls(inputs=tuple(inputs), panels=tuple(raw_panels), output=output,
                   aggregate=aggregate, log_x=bool(doc.get("log_x", False)),
                   log_y=bool(doc.get("log_y", False)), f_star=f_star)

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FigureSpecError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(doc)
