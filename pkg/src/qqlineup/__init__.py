"""Visual inference for normality: Q-Q lineups, classical tests, and power."""

from .geometry import (
    QQDesign,
    QQPanelGeometry,
    ReferenceLine,
    build_panel,
    pointwise_envelope,
    qq_points,
    robust_reference_line,
)
from .lineup import (
    Lineup,
    LineupSpec,
    NullHypothesis,
    assemble_lineup,
    estimate_scale_S,
    generate_nulls,
    verify_key_digest,
)
from .normality import (
    NullTable,
    TestResult,
    ad_test,
    build_null_table,
    cvm_test,
    ks_statistic,
    ks_test,
    lilliefors_test,
    sw_test,
)
from .numeric import (
    DegenerateSampleError,
    SampleVector,
    iqr,
    normal_cdf,
    normal_quantile,
    plotting_positions,
    sample_normal,
    sample_quantile,
    sample_t,
)
from .rng import RngStream
from .svg import render_svg
from .visual import (
    Evaluation,
    VisualTestResult,
    aggregate,
    critical_count,
    evaluation_weight,
    lineup_power,
    visual_p_value,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateSampleError",
    "Evaluation",
    "Lineup",
    "LineupSpec",
    "NullHypothesis",
    "NullTable",
    "QQDesign",
    "QQPanelGeometry",
    "ReferenceLine",
    "RngStream",
    "SampleVector",
    "TestResult",
    "VisualTestResult",
    "ad_test",
    "aggregate",
    "assemble_lineup",
    "build_null_table",
    "build_panel",
    "critical_count",
    "cvm_test",
    "estimate_scale_S",
    "evaluation_weight",
    "generate_nulls",
    "iqr",
    "ks_statistic",
    "ks_test",
    "lilliefors_test",
    "lineup_power",
    "normal_cdf",
    "normal_quantile",
    "plotting_positions",
    "pointwise_envelope",
    "qq_points",
    "render_svg",
    "robust_reference_line",
    "sample_normal",
    "sample_quantile",
    "sample_t",
    "sw_test",
    "verify_key_digest",
    "visual_p_value",
]
