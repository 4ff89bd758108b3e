"""Render-ready geometry for normal Q-Q panels.

Three panel designs share one pipeline: control (points and a reference
line), standard (adds a pointwise confidence envelope around the line),
and detrended (ordinates become residuals from the line, band around
zero).  Geometry is pure data; rendering lives elsewhere.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from .numeric import (
    DegenerateSampleError,
    SampleVector,
    iqr,
    normal_pdf,
    normal_quantile,
    plotting_positions,
    sample_quantile,
)

GEOMETRY_SCHEMA_VERSION = 1

# Theoretical normal IQR: Phi^-1(.75) - Phi^-1(.25).
_Z75 = normal_quantile(0.75)
THEORETICAL_IQR = 2.0 * _Z75


class QQDesign(str, enum.Enum):
    CONTROL = "control"
    STANDARD = "standard"
    DETRENDED = "detrended"


@dataclass(frozen=True)
class ReferenceLine:
    """Line y = slope * x + intercept drawn through a Q-Q panel."""

    slope: float
    intercept: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValueError("line coefficients must be finite")

    def at(self, x: float) -> float:
        return self.slope * x + self.intercept


IDENTITY_LINE = ReferenceLine(1.0, 0.0)
ZERO_LINE = ReferenceLine(0.0, 0.0)


@dataclass(frozen=True)
class QQPanelGeometry:
    """One panel's plotted coordinates, reference line, and optional band.

    `envelope_lower`/`envelope_upper` are present for standard and
    detrended designs and absent (None) for control.  `x_range` and
    `y_range` are the tight data extents; callers that want shared axes
    across panels take unions of these.
    """

    design: QQDesign
    theoretical: np.ndarray
    ordinates: np.ndarray
    line: ReferenceLine
    envelope_lower: np.ndarray | None
    envelope_upper: np.ndarray | None
    x_range: tuple[float, float]
    y_range: tuple[float, float]

    def __post_init__(self) -> None:
        n = self.theoretical.size
        if self.ordinates.size != n:
            raise ValueError("coordinate lists must have equal length")
        if np.any(np.diff(self.theoretical) <= 0):
            raise ValueError("theoretical coordinates must be strictly increasing")
        has_band = self.envelope_lower is not None and self.envelope_upper is not None
        if self.design is QQDesign.CONTROL:
            if has_band:
                raise ValueError("control design carries no envelope")
        else:
            if not has_band:
                raise ValueError("standard and detrended designs require an envelope")
            if self.envelope_lower.size != n or self.envelope_upper.size != n:
                raise ValueError("envelope lists must match the point count")

    @property
    def n(self) -> int:
        return int(self.theoretical.size)

    def to_dict(self) -> dict:
        doc = {
            "schema_version": GEOMETRY_SCHEMA_VERSION,
            "design": self.design.value,
            "theoretical": [float(v) for v in self.theoretical],
            "ordinates": [float(v) for v in self.ordinates],
            "line": {"slope": self.line.slope, "intercept": self.line.intercept},
            "x_range": list(self.x_range),
            "y_range": list(self.y_range),
        }
        if self.envelope_lower is not None:
            doc["envelope_lower"] = [float(v) for v in self.envelope_lower]
            doc["envelope_upper"] = [float(v) for v in self.envelope_upper]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "QQPanelGeometry":
        if doc.get("schema_version") != GEOMETRY_SCHEMA_VERSION:
            raise ValueError("unsupported geometry schema version")
        lower = doc.get("envelope_lower")
        upper = doc.get("envelope_upper")
        return cls(
            design=QQDesign(doc["design"]),
            theoretical=_frozen(doc["theoretical"]),
            ordinates=_frozen(doc["ordinates"]),
            line=ReferenceLine(doc["line"]["slope"], doc["line"]["intercept"]),
            envelope_lower=None if lower is None else _frozen(lower),
            envelope_upper=None if upper is None else _frozen(upper),
            x_range=(float(doc["x_range"][0]), float(doc["x_range"][1])),
            y_range=(float(doc["y_range"][0]), float(doc["y_range"][1])),
        )


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def qq_points(x: SampleVector) -> tuple[np.ndarray, np.ndarray]:
    """Normal Q-Q coordinates: theoretical quantiles paired with sorted data.

    The theoretical side depends only on n, so all panels of equal sample
    size share one x axis.
    """
    p = plotting_positions(x.n)
    theoretical = _frozen([normal_quantile(v) for v in p])
    return theoretical, x.ordered()


def robust_reference_line(x: SampleVector) -> ReferenceLine:
    """Quartile-matching line: slope is the sample-to-theoretical IQR ratio.

    Passes through both quartile pairs, so it estimates scale by the IQR
    ratio and location by the quartile intercept; insensitive to tail
    outliers by construction.
    """
    if x.n < 3:
        raise ValueError("reference line requires at least 3 observations")
    spread = iqr(x)
    if not spread > 0.0:
        raise DegenerateSampleError("sample IQR is zero")
    slope = spread / THEORETICAL_IQR
    intercept = sample_quantile(x, 0.25) - slope * (-_Z75)
    return ReferenceLine(slope, intercept)


def envelope_half_widths(n: int, slope: float, level: float = 0.95) -> np.ndarray:
    """Half-widths of the pointwise order-statistic band at each position.

    h_i = z* (b / phi(z_i)) sqrt(p_i (1 - p_i) / n): the delta-method
    standard error of the i-th order statistic of a size-n sample from
    the line's implied normal, scaled to the requested level.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if n < 3:
        raise ValueError("envelope requires at least 3 observations")
    z_star = normal_quantile(0.5 * (1.0 + level))
    p = plotting_positions(n)
    h = np.empty(n)
    for i, pi in enumerate(p):
        z = normal_quantile(pi)
        h[i] = z_star * (slope / normal_pdf(z)) * math.sqrt(pi * (1.0 - pi) / n)
    h.setflags(write=False)
    return h


def pointwise_envelope(
    x: SampleVector, line: ReferenceLine, level: float = 0.95
) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper band edges around the reference line at the Q-Q abscissas."""
    h = envelope_half_widths(x.n, line.slope, level)
    p = plotting_positions(x.n)
    center = np.array([line.at(normal_quantile(v)) for v in p])
    return _frozen(center - h), _frozen(center + h)


def resolve_line(x: SampleVector, line_source) -> ReferenceLine:
    """Map a line request to a concrete line.

    "identity" is the fixed unit line (standard-normal null), "robust"
    fits the quartile line to x, and a ReferenceLine passes through
    unchanged (externally fixed slope and intercept).
    """
    if isinstance(line_source, ReferenceLine):
        return line_source
    if line_source == "identity":
        return IDENTITY_LINE
    if line_source == "robust":
        return robust_reference_line(x)
    raise ValueError("line_source must be 'identity', 'robust', or a ReferenceLine")


def build_panel(
    x: SampleVector,
    design: QQDesign,
    line_source="robust",
    level: float = 0.95,
) -> QQPanelGeometry:
    """Assemble one panel's geometry for the requested design.

    Detrended panels subtract the resolved line from the ordinates and
    re-center the band on zero; their drawn line is y = 0.
    """
    design = QQDesign(design)
    theoretical, ordered = qq_points(x)
    line = resolve_line(x, line_source)
    x_range = (float(theoretical[0]), float(theoretical[-1]))

    if design is QQDesign.CONTROL:
        return QQPanelGeometry(
            design=design,
            theoretical=theoretical,
            ordinates=ordered,
            line=line,
            envelope_lower=None,
            envelope_upper=None,
            x_range=x_range,
            y_range=(float(ordered[0]), float(ordered[-1])),
        )

    h = envelope_half_widths(x.n, line.slope, level)
    if design is QQDesign.STANDARD:
        center = np.array([line.at(float(t)) for t in theoretical])
        lower, upper = _frozen(center - h), _frozen(center + h)
        y_lo = min(float(ordered[0]), float(np.min(lower)))
        y_hi = max(float(ordered[-1]), float(np.max(upper)))
        return QQPanelGeometry(
            design=design,
            theoretical=theoretical,
            ordinates=ordered,
            line=line,
            envelope_lower=lower,
            envelope_upper=upper,
            x_range=x_range,
            y_range=(y_lo, y_hi),
        )

    residuals = _frozen(
        np.array([float(v) - line.at(float(t)) for t, v in zip(theoretical, ordered)])
    )
    lower, upper = _frozen(-h), h
    y_lo = min(float(np.min(residuals)), float(np.min(lower)))
    y_hi = max(float(np.max(residuals)), float(np.max(upper)))
    return QQPanelGeometry(
        design=design,
        theoretical=theoretical,
        ordinates=residuals,
        line=ZERO_LINE,
        envelope_lower=lower,
        envelope_upper=upper,
        x_range=x_range,
        y_range=(y_lo, y_hi),
    )
