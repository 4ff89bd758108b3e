"""Lineup assembly: one data panel hidden among null panels.

Null samples, the hidden position, and the answer-key salt all derive
from the spec seed through labeled sub-streams, so a spec regenerates
the identical lineup anywhere.  The position is sealed behind a salted
digest and never appears in public serializations.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .geometry import (
    QQDesign,
    QQPanelGeometry,
    ReferenceLine,
    THEORETICAL_IQR,
    build_panel,
)
from .numeric import DegenerateSampleError, SampleVector, iqr, sample_normal
from .rng import RngStream

LINEUP_SCHEMA_VERSION = 1

_NULL_RETRIES = 5


class NullHypothesis(str, enum.Enum):
    """Which normal family the null panels are drawn from.

    STANDARD_NORMAL: N(0,1) nulls, identity reference line.
    SCALED_NORMAL: N(0, S^2) with S the robust IQR-ratio scale of the
    data; line slope S, intercept 0.
    SAMPLE_VARIANCE_NORMAL: same but S is the ordinary sample standard
    deviation, the non-robust variant.
    """

    STANDARD_NORMAL = "standard_normal"
    SCALED_NORMAL = "scaled_normal"
    SAMPLE_VARIANCE_NORMAL = "sample_variance_normal"


@dataclass(frozen=True)
class LineupSpec:
    data: SampleVector
    design: QQDesign = QQDesign.STANDARD
    hypothesis: NullHypothesis = NullHypothesis.SCALED_NORMAL
    m: int = 20
    seed: int = 0
    allow_multiple_select: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "design", QQDesign(self.design))
        object.__setattr__(self, "hypothesis", NullHypothesis(self.hypothesis))
        if self.m < 2:
            raise ValueError("a lineup needs at least 2 panels")
        if self.data.n < 3:
            raise ValueError("data sample must have at least 3 observations")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def fingerprint(self) -> str:
        """Stable hex id over every field that affects the assembled lineup."""
        doc = {
            "design": self.design.value,
            "hypothesis": self.hypothesis.value,
            "m": self.m,
            "seed": self.seed,
            "allow_multiple_select": self.allow_multiple_select,
            "data": [float(v) for v in self.data.values],
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Lineup:
    id: str
    spec: LineupSpec
    panels: tuple[QQPanelGeometry, ...]
    data_position: int
    key_digest: str
    salt: str
    shared_x_range: tuple[float, float]
    shared_y_range: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.panels) != self.spec.m:
            raise ValueError("panel count must equal spec.m")
        if not 1 <= self.data_position <= self.spec.m:
            raise ValueError("data_position must lie in 1..m")

    def data_digest(self) -> str:
        return hashlib.sha256(self.spec.data.ordered().tobytes()).hexdigest()

    def public_dict(self, include_data: bool = False) -> dict:
        """Serialization safe to hand to observers.

        Omits the hidden position, the answer salt, the seed (nulls and
        placement could be regenerated from it), and by default the data
        values themselves.
        """
        doc = {
            "schema_version": LINEUP_SCHEMA_VERSION,
            "id": self.id,
            "m": self.spec.m,
            "n": self.spec.data.n,
            "design": self.spec.design.value,
            "hypothesis": self.spec.hypothesis.value,
            "allow_multiple_select": self.spec.allow_multiple_select,
            "key_digest": self.key_digest,
            "shared_x_range": list(self.shared_x_range),
            "shared_y_range": list(self.shared_y_range),
            "panels": [p.to_dict() for p in self.panels],
        }
        if include_data:
            doc["data"] = [float(v) for v in self.spec.data.values]
        return doc

    def private_dict(self) -> dict:
        """Full record including the answer key material; server-side only."""
        doc = self.public_dict(include_data=True)
        doc["data_position"] = self.data_position
        doc["salt"] = self.salt
        doc["seed"] = self.spec.seed
        doc["data_digest"] = self.data_digest()
        return doc


def estimate_scale_S(x: SampleVector) -> float:
    """Robust scale: sample IQR over theoretical normal IQR."""
    spread = iqr(x)
    if not spread > 0.0:
        raise DegenerateSampleError("sample IQR is zero")
    return spread / THEORETICAL_IQR


def _null_scale(spec: LineupSpec) -> float:
    if spec.hypothesis is NullHypothesis.STANDARD_NORMAL:
        return 1.0
    if spec.hypothesis is NullHypothesis.SCALED_NORMAL:
        return estimate_scale_S(spec.data)
    sd = float(np.std(spec.data.values, ddof=1))
    if not sd > 0.0:
        raise DegenerateSampleError("sample standard deviation is zero")
    return sd


def generate_nulls(spec: LineupSpec) -> list[SampleVector]:
    """Draw the m-1 decoy samples from the hypothesis distribution.

    Each decoy has its own labeled stream; a degenerate draw (zero IQR,
    astronomically unlikely for continuous data) is retried from derived
    sub-streams a bounded number of times.
    """
    scale = _null_scale(spec)
    root = RngStream(spec.seed)
    nulls = []
    for i in range(1, spec.m):
        stream = root.child(f"null/{i}")
        sample = sample_normal(stream, spec.data.n, 0.0, scale)
        attempt = 0
        while iqr(sample) <= 0.0:
            attempt += 1
            if attempt > _NULL_RETRIES:
                raise DegenerateSampleError("null sample degenerate after retries")
            sample = sample_normal(stream.child(f"retry{attempt}"), spec.data.n, 0.0, scale)
        nulls.append(sample)
    return nulls


def _reference_line(spec: LineupSpec) -> ReferenceLine:
    if spec.hypothesis is NullHypothesis.STANDARD_NORMAL:
        return ReferenceLine(1.0, 0.0)
    return ReferenceLine(_null_scale(spec), 0.0)


def key_digest(lineup_id: str, data_position: int, salt: str) -> str:
    blob = f"{lineup_id}:{data_position}:{salt}".encode()
    return hashlib.sha256(blob).hexdigest()


def verify_key_digest(lineup_id: str, claimed_position: int, salt: str, digest: str) -> bool:
    """Check a claimed answer against a sealed key without a stored position."""
    return key_digest(lineup_id, claimed_position, salt) == digest


def assemble_lineup(
    spec: LineupSpec,
    lineup_id: str | None = None,
    level: float = 0.95,
    detrended_fixed_aspect: bool = False,
) -> Lineup:
    """Build all m panels, hide the data panel, and seal the answer key.

    The reference line and envelope come from the hypothesis, identically
    for every panel; panel axes are the union of per-panel extents so all
    panels share one scale.  Control and standard panels get equal x and
    y spans (unit aspect); detrended panels scale y independently unless
    `detrended_fixed_aspect` is set.
    """
    root = RngStream(spec.seed)
    position = int(root.child("placement").generator().integers(1, spec.m + 1))
    salt = root.child("key-salt").generator().bytes(16).hex()

    line = _reference_line(spec)
    nulls = generate_nulls(spec)
    samples = nulls[: position - 1] + [spec.data] + nulls[position - 1 :]
    panels = [build_panel(s, spec.design, line, level) for s in samples]

    x_lo = min(p.x_range[0] for p in panels)
    x_hi = max(p.x_range[1] for p in panels)
    y_lo = min(p.y_range[0] for p in panels)
    y_hi = max(p.y_range[1] for p in panels)
    equalize = spec.design is not QQDesign.DETRENDED or detrended_fixed_aspect
    if equalize:
        span = max(x_hi - x_lo, y_hi - y_lo)
        pad_x = 0.5 * (span - (x_hi - x_lo))
        pad_y = 0.5 * (span - (y_hi - y_lo))
        x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
        y_lo, y_hi = y_lo - pad_y, y_hi + pad_y
    shared_x = (x_lo, x_hi)
    shared_y = (y_lo, y_hi)
    panels = tuple(
        dataclasses.replace(p, x_range=shared_x, y_range=shared_y) for p in panels
    )

    if lineup_id is None:
        lineup_id = spec.fingerprint()
    return Lineup(
        id=lineup_id,
        spec=spec,
        panels=panels,
        data_position=position,
        key_digest=key_digest(lineup_id, position, salt),
        salt=salt,
        shared_x_range=shared_x,
        shared_y_range=shared_y,
    )
