"""Factorial study generation and Monte Carlo power comparison.

The default factorial crosses degrees of freedom {2, 5, 10} with sample
sizes {20, 30, 50, 75}, two data replicates, two null-sample sets, and
the three panel designs: 48 datasets rendered into 144 lineups.  Every
artifact derives from the experiment seed through labeled streams, so a
rerun reproduces identical bytes.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import QQDesign
from .lineup import Lineup, LineupSpec, NullHypothesis, assemble_lineup
from .normality import (
    TestResult,
    ad_test,
    cvm_test,
    ks_test,
    ks_test_estimated,
    lilliefors_test,
    sw_test,
    _default_lf_table,
)
from .numeric import SampleVector, sample_normal, sample_t
from .rng import RngStream
from .svg import default_grid, render_svg
from .visual import Evaluation, fold_evaluations, visual_p_value

MANIFEST_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

_MANIFEST_WARNING = (
    "PRIVATE: contains hidden data positions and raw data. "
    "Never serve this file to observers."
)

ALL_DESIGNS = (QQDesign.CONTROL, QQDesign.STANDARD, QQDesign.DETRENDED)


@dataclass(frozen=True)
class ExperimentConfig:
    dfs: tuple[float, ...] = (2.0, 5.0, 10.0)
    ns: tuple[int, ...] = (20, 30, 50, 75)
    designs: tuple[QQDesign, ...] = ALL_DESIGNS
    data_reps: int = 2
    null_sets: int = 2
    hypothesis: NullHypothesis = NullHypothesis.SCALED_NORMAL
    seed: int = 0
    alpha: float = 0.05
    mc_reps: int = 1000

    def __post_init__(self) -> None:
        object.__setattr__(self, "dfs", tuple(float(d) for d in self.dfs))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "designs", tuple(QQDesign(d) for d in self.designs))
        object.__setattr__(self, "hypothesis", NullHypothesis(self.hypothesis))
        if not self.dfs or not self.ns or not self.designs:
            raise ValueError("dfs, ns, and designs must be non-empty")
        if any(d <= 0 for d in self.dfs):
            raise ValueError("degrees of freedom must be positive")
        if any(n < 3 for n in self.ns):
            raise ValueError("sample sizes must be at least 3")
        if self.data_reps < 1 or self.null_sets < 1:
            raise ValueError("data_reps and null_sets must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.mc_reps < 100:
            raise ValueError("mc_reps must be at least 100 for power estimates")

    @property
    def lineup_count(self) -> int:
        return len(self.dfs) * len(self.ns) * self.data_reps * self.null_sets * len(self.designs)

    @property
    def dataset_count(self) -> int:
        return len(self.dfs) * len(self.ns) * self.data_reps * self.null_sets

    def to_dict(self) -> dict:
        return {
            "dfs": ["inf" if math.isinf(d) else d for d in self.dfs],
            "ns": list(self.ns),
            "designs": [d.value for d in self.designs],
            "data_reps": self.data_reps,
            "null_sets": self.null_sets,
            "hypothesis": self.hypothesis.value,
            "seed": self.seed,
            "alpha": self.alpha,
            "mc_reps": self.mc_reps,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        kwargs = dict(doc)
        if "dfs" in kwargs:
            kwargs["dfs"] = tuple(float(d) for d in kwargs["dfs"])
        known = cls.__dataclass_fields__.keys()
        unknown = set(kwargs) - set(known)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass(frozen=True)
class LineupPlan:
    """One row of the factorial: everything needed to rebuild one lineup."""

    dataset_id: str
    df: float
    n: int
    rep: int
    null_set: int
    design: QQDesign
    lineup_seed: int
    allow_multiple_select: bool


def _fmt_df(df: float) -> str:
    return "inf" if math.isinf(df) else f"{df:g}"


def study_plan(config: ExperimentConfig) -> list[LineupPlan]:
    """Lay out the factorial deterministically.

    The data vector is keyed by (df, n, rep) only, so the two null-set
    variants of a dataset show the same data; the lineup seed is keyed by
    the full dataset id, so all designs of one dataset share nulls and
    the hidden position.  Multiple-select alternates, covering half the
    lineups.
    """
    plans = []
    counter = 0
    for df in config.dfs:
        for n in config.ns:
            for rep in range(1, config.data_reps + 1):
                for null_set in range(1, config.null_sets + 1):
                    dataset_id = f"df{_fmt_df(df)}-n{n}-r{rep}-s{null_set}"
                    seed_stream = RngStream(config.seed, f"study/dataset/{dataset_id}")
                    lineup_seed = int(
                        seed_stream.generator().integers(2**64, dtype=np.uint64)
                    )
                    for design in config.designs:
                        plans.append(
                            LineupPlan(
                                dataset_id=dataset_id,
                                df=df,
                                n=n,
                                rep=rep,
                                null_set=null_set,
                                design=design,
                                lineup_seed=lineup_seed,
                                allow_multiple_select=counter % 2 == 1,
                            )
                        )
                        counter += 1
    return plans


def generate_data(config: ExperimentConfig, df: float, n: int, rep: int) -> SampleVector:
    """The observed sample for one (df, n, rep) cell: t draws, heavy-tailed
    alternatives to the normal null."""
    stream = RngStream(config.seed, f"study/data/df{_fmt_df(df)}-n{n}-r{rep}")
    if math.isinf(df):
        return sample_normal(stream, n)
    return sample_t(stream, n, df)


def build_lineup(config: ExperimentConfig, plan: LineupPlan) -> Lineup:
    data = generate_data(config, plan.df, plan.n, plan.rep)
    spec = LineupSpec(
        data=data,
        design=plan.design,
        hypothesis=config.hypothesis,
        m=20,
        seed=plan.lineup_seed,
        allow_multiple_select=plan.allow_multiple_select,
    )
    return assemble_lineup(spec)


def generate_study(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Render the full factorial to disk; returns the private manifest.

    Writes one SVG and one public JSON per lineup, plus manifest.json
    holding the answer keys (file mode 0600).
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc

    records = []
    for plan in study_plan(config):
        lineup = build_lineup(config, plan)
        rows, cols = default_grid(lineup.spec.m)
        svg_name = f"{lineup.id}.svg"
        public_name = f"{lineup.id}.public.json"
        (out / svg_name).write_text(render_svg(lineup, rows, cols))
        (out / public_name).write_text(json.dumps(lineup.public_dict(), indent=1))
        records.append(
            {
                "lineup_id": lineup.id,
                "dataset_id": plan.dataset_id,
                "df": _fmt_df(plan.df),
                "n": plan.n,
                "rep": plan.rep,
                "null_set": plan.null_set,
                "design": plan.design.value,
                "hypothesis": config.hypothesis.value,
                "m": lineup.spec.m,
                "allow_multiple_select": plan.allow_multiple_select,
                "seed": plan.lineup_seed,
                "data": [float(v) for v in lineup.spec.data.values],
                "data_digest": lineup.data_digest(),
                "data_position": lineup.data_position,
                "salt": lineup.salt,
                "key_digest": lineup.key_digest,
                "svg_file": svg_name,
                "public_file": public_name,
            }
        )
    manifest = {
        "_warning": _MANIFEST_WARNING,
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "config": config.to_dict(),
        "lineups": records,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1))
    os.chmod(manifest_path, 0o600)
    return manifest


@dataclass(frozen=True)
class PowerCell:
    df: float
    n: int
    method: str
    power: float
    se: float
    reps: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.power <= 1.0:
            raise ValueError("power must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "df": _fmt_df(self.df),
            "n": self.n,
            "method": self.method,
            "power": self.power,
            "se": self.se,
            "reps": self.reps,
        }


@dataclass(frozen=True)
class PowerReport:
    cells: tuple[PowerCell, ...]
    alpha: float
    seed: int
    extras: dict = field(default_factory=dict)

    def cell(self, df: float, n: int, method: str) -> PowerCell:
        for c in self.cells:
            if c.df == df and c.n == n and c.method == method:
                return c
        raise KeyError(f"no cell (df={df}, n={n}, {method})")

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"schema_version": REPORT_SCHEMA_VERSION, "alpha": self.alpha, "seed": self.seed}
            )
        ]
        lines.extend(json.dumps(c.to_dict()) for c in self.cells)
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header = f"{'df':>6} {'n':>5} {'method':>9} {'power':>8} {'se':>8} {'reps':>7}"
        rows = [header, "-" * len(header)]
        for c in self.cells:
            rows.append(
                f"{_fmt_df(c.df):>6} {c.n:>5} {c.method:>9} "
                f"{c.power:>8.4f} {c.se:>8.4f} {c.reps:>7}"
            )
        return "\n".join(rows) + "\n"


def _mc_se(p: float, reps: int) -> float:
    return math.sqrt(p * (1.0 - p) / reps)


def classical_power(config: ExperimentConfig, fixed_null: bool = False) -> PowerReport:
    """Rejection rate of each classical test on t_df samples, per (df, n) cell.

    All tests estimate location and scale from the sample, the usage the
    power comparison is about.  `fixed_null` adds a KS variant against a
    fixed N(0,1) for contrast.  A df of inf draws normal samples, which
    turns the power run into a size calibration.
    """
    methods: dict[str, callable] = {
        "sw": sw_test,
        "ad": ad_test,
        "lf": None,  # bound per cell once the table for n exists
        "cvm": cvm_test,
        "ks": ks_test_estimated,
    }
    if fixed_null:
        methods["ks_fixed"] = lambda x: ks_test(x, 0.0, 1.0)

    cells = []
    for df in config.dfs:
        for n in config.ns:
            table = _default_lf_table(n)
            methods["lf"] = lambda x, t=table: lilliefors_test(x, t)
            gen = RngStream(config.seed, f"power/df={_fmt_df(df)}/n={n}").generator()
            rejections = {name: 0 for name in methods}
            for _ in range(config.mc_reps):
                draw = gen.standard_normal(n) if math.isinf(df) else gen.standard_t(df, n)
                x = SampleVector(draw)
                for name, fn in methods.items():
                    if fn(x).reject(config.alpha):
                        rejections[name] += 1
            for name in methods:
                p = rejections[name] / config.mc_reps
                cells.append(
                    PowerCell(
                        df=df,
                        n=n,
                        method=name,
                        power=p,
                        se=_mc_se(p, config.mc_reps),
                        reps=config.mc_reps,
                    )
                )
    return PowerReport(cells=tuple(cells), alpha=config.alpha, seed=config.seed)


def visual_power(
    manifest: dict,
    evaluations: list[Evaluation],
    alpha: float = 0.05,
) -> dict:
    """Score stored evaluations against a study manifest.

    Returns per-lineup visual test results, a visual-versus-Shapiro-Wilk
    p-value pairing per lineup (the scatter-comparison table), per
    (df, n, design) rejection fractions, and a skipped-records section
    for evaluations that reference unknown lineups or are malformed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    records = {rec["lineup_id"]: rec for rec in manifest.get("lineups", [])}

    by_lineup: dict[str, list[Evaluation]] = {rec_id: [] for rec_id in records}
    skipped = []
    for e in evaluations:
        rec = records.get(e.lineup_id)
        if rec is None:
            skipped.append({"evaluation": e.to_dict(), "reason": "unknown lineup id"})
            continue
        if max(e.selected_panels) > rec["m"]:
            skipped.append({"evaluation": e.to_dict(), "reason": "panel index exceeds m"})
            continue
        if not rec["allow_multiple_select"] and len(e.selected_panels) > 1:
            skipped.append(
                {"evaluation": e.to_dict(), "reason": "multiple picks on single-select lineup"}
            )
            continue
        by_lineup[e.lineup_id].append(e)

    results = []
    pairs = []
    cell_counts: dict[tuple[str, int, str], list[int]] = {}
    for rec_id, rec in records.items():
        n_obs, y = fold_evaluations(
            by_lineup[rec_id], rec_id, rec["m"], rec["data_position"], rec["allow_multiple_select"]
        )
        p = visual_p_value(y, n_obs, rec["m"])
        data = SampleVector(rec["data"])
        sw: TestResult = sw_test(data)
        results.append(
            {
                "lineup_id": rec_id,
                "dataset_id": rec["dataset_id"],
                "df": rec["df"],
                "n": rec["n"],
                "design": rec["design"],
                "N": n_obs,
                "y_weighted": y,
                "m": rec["m"],
                "p_value": p,
                "reject": p <= alpha,
            }
        )
        pairs.append(
            {
                "lineup_id": rec_id,
                "dataset_id": rec["dataset_id"],
                "design": rec["design"],
                "visual_p": p,
                "sw_p": sw.p_value,
                "N": n_obs,
            }
        )
        key = (rec["df"], rec["n"], rec["design"])
        cell_counts.setdefault(key, []).append(1 if (n_obs > 0 and p <= alpha) else 0)

    cells = []
    for (df, n, design), flags in sorted(cell_counts.items()):
        p = sum(flags) / len(flags)
        cells.append(
            {
                "df": df,
                "n": n,
                "design": design,
                "power": p,
                "se": _mc_se(p, len(flags)),
                "reps": len(flags),
            }
        )
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "alpha": alpha,
        "results": results,
        "pairs": pairs,
        "cells": cells,
        "skipped": skipped,
    }
