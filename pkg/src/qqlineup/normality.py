"""Classical tests of univariate normality.

Five tests share a common result type: Kolmogorov-Smirnov against a
fully specified normal, its estimated-parameter variant (Lilliefors),
Anderson-Darling, Cramer-von Mises, and Shapiro-Wilk.  The analytic
p-value approximations are the standard published forms for the
estimated-parameter case; Lilliefors uses a seeded Monte Carlo null
table instead, since no good closed form exists at small n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .numeric import (
    DegenerateSampleError,
    SampleVector,
    normal_cdf,
    normal_quantile,
)
from .rng import RngStream

TABLE_SCHEMA_VERSION = 1

METHODS = ("ks", "lf", "ad", "cvm", "sw")

# Default Monte Carlo table parameters for the Lilliefors p-value.
DEFAULT_TABLE_REPS = 10_000
DEFAULT_TABLE_SEED = 727_744_712

# Clamp for CDF values inside log terms; extreme outliers otherwise
# push F to exactly 0 or 1.
_F_CLAMP = 1e-15


@dataclass(frozen=True)
class TestResult:
    """Outcome of one normality test on one sample."""

    method: str
    statistic: float
    p_value: float
    n: int
    params_estimated: bool

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value must lie in [0, 1]")
        if self.method == "sw":
            if not 0.0 < self.statistic <= 1.0:
                raise ValueError("SW statistic must lie in (0, 1]")
        elif self.statistic < 0.0:
            raise ValueError("statistic must be non-negative")

    def reject(self, alpha: float) -> bool:
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        return self.p_value <= alpha


def _mean_sd(x: SampleVector) -> tuple[float, float]:
    v = x.values
    mean = float(np.mean(v))
    sd = float(np.std(v, ddof=1))
    if not sd > 0.0:
        raise DegenerateSampleError("sample standard deviation is zero")
    return mean, sd


def _ks_distance(x: SampleVector, cdf: Callable[[float], float]) -> float:
    """Sup distance between the ECDF and `cdf`, checking both step sides:
    D = max_i of (i/n - F_i) and (F_i - (i-1)/n)."""
    v = x.ordered()
    n = x.n
    f = np.array([cdf(float(t)) for t in v])
    i = np.arange(1.0, n + 1.0)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1.0) / n))
    return max(d_plus, d_minus)


def ks_statistic(x: SampleVector, mean: float, sd: float) -> float:
    """KS distance from the fully specified N(mean, sd^2)."""
    if x.n < 3:
        raise ValueError("test requires at least 3 observations")
    if not sd > 0:
        raise ValueError("sd must be positive")
    return _ks_distance(x, lambda t: normal_cdf((t - mean) / sd))


def _kolmogorov_sf(t: float) -> float:
    """P(K > t) for the Kolmogorov limit distribution, by series."""
    if t <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * t * t)
        total += term
        if abs(term) < 1e-16:
            break
    return min(max(total, 0.0), 1.0)


def _ks_p_value(d: float, n: int) -> float:
    """Finite-n corrected asymptotic KS p-value: the Stephens scaling
    (sqrt(n) + 0.12 + 0.11/sqrt(n)) D fed to the Kolmogorov tail."""
    rt = math.sqrt(n)
    return _kolmogorov_sf((rt + 0.12 + 0.11 / rt) * d)


def ks_test(x: SampleVector, mean: float = 0.0, sd: float = 1.0) -> TestResult:
    """KS test against a fully specified normal null."""
    d = ks_statistic(x, mean, sd)
    return TestResult("ks", d, _ks_p_value(d, x.n), x.n, params_estimated=False)


def ks_test_estimated(x: SampleVector) -> TestResult:
    """KS distance with estimated parameters but the fixed-null p-value.

    This is the naive composite-null usage; it is conservative because
    estimation shrinks the distance.  Lilliefors is the corrected form.
    """
    d = lilliefors_statistic(x)
    return TestResult("ks", d, _ks_p_value(d, x.n), x.n, params_estimated=True)


@dataclass(frozen=True)
class NullTable:
    """Monte Carlo null distribution of a test statistic at a fixed n.

    Statistics are simulated on standard normal samples with parameters
    re-estimated per draw, matching how the live tests run.
    """

    method: str
    n: int
    sorted_statistics: np.ndarray
    seed: int

    @property
    def reps(self) -> int:
        return int(self.sorted_statistics.size)

    def p_value(self, observed: float, upper_tail: bool = True) -> float:
        """Add-one Monte Carlo p-value: (1 + #{at least as extreme}) / (reps + 1)."""
        if upper_tail:
            count = int(np.sum(self.sorted_statistics >= observed))
        else:
            count = int(np.sum(self.sorted_statistics <= observed))
        return (1 + count) / (self.reps + 1)

    def critical_value(self, alpha: float, upper_tail: bool = True) -> float:
        q = 1.0 - alpha if upper_tail else alpha
        return float(np.quantile(self.sorted_statistics, q))

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": TABLE_SCHEMA_VERSION,
                "method": self.method,
                "n": self.n,
                "reps": self.reps,
                "seed": self.seed,
                "sorted_statistics": [float(v) for v in self.sorted_statistics],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "NullTable":
        doc = json.loads(text)
        if doc.get("schema_version") != TABLE_SCHEMA_VERSION:
            raise ValueError("unsupported null-table schema version")
        stats = np.array(doc["sorted_statistics"], dtype=float)
        if np.any(np.diff(stats) < 0):
            raise ValueError("table statistics must be sorted")
        stats.setflags(write=False)
        return cls(method=doc["method"], n=int(doc["n"]), sorted_statistics=stats, seed=int(doc["seed"]))


def lilliefors_statistic(x: SampleVector) -> float:
    """KS distance against the normal with estimated mean and sd."""
    if x.n < 3:
        raise ValueError("test requires at least 3 observations")
    mean, sd = _mean_sd(x)
    return _ks_distance(x, lambda t: normal_cdf((t - mean) / sd))


def ad_statistic(x: SampleVector) -> float:
    if x.n < 4:
        raise ValueError("test requires at least 4 observations")
    mean, sd = _mean_sd(x)
    v = x.ordered()
    n = x.n
    z = (v - mean) / sd
    # 1 - Phi(z) computed as Phi(-z): no cancellation in the upper tail.
    f = np.clip([normal_cdf(float(t)) for t in z], _F_CLAMP, 1.0)
    g = np.clip([normal_cdf(-float(t)) for t in z], _F_CLAMP, 1.0)
    i = np.arange(1.0, n + 1.0)
    s = float(np.sum((2.0 * i - 1.0) * (np.log(f) + np.log(g[::-1]))))
    return -n - s / n


def cvm_statistic(x: SampleVector) -> float:
    if x.n < 4:
        raise ValueError("test requires at least 4 observations")
    mean, sd = _mean_sd(x)
    v = x.ordered()
    n = x.n
    f = np.array([normal_cdf((float(t) - mean) / sd) for t in v])
    i = np.arange(1.0, n + 1.0)
    return float(np.sum((f - (2.0 * i - 1.0) / (2.0 * n)) ** 2) + 1.0 / (12.0 * n))


# Statistic used when simulating each method's null table: parameters
# re-estimated per draw throughout, so KS and LF tables coincide by
# construction.
_TABLE_STATISTIC: dict[str, Callable[[SampleVector], float]] = {}


def build_null_table(method: str, n: int, reps: int, rng: RngStream) -> NullTable:
    """Simulate the null distribution of one statistic at sample size n."""
    if method not in _TABLE_STATISTIC:
        raise ValueError(f"unknown method {method!r}")
    if reps < 1000:
        raise ValueError("reps must be at least 1000")
    min_n = 3 if method in ("ks", "lf", "sw") else 4
    if n < min_n:
        raise ValueError(f"n must be at least {min_n} for {method}")
    fn = _TABLE_STATISTIC[method]
    gen = rng.child(f"null-table/{method}/n={n}").generator()
    out = np.empty(reps)
    for r in range(reps):
        out[r] = fn(SampleVector(gen.standard_normal(n)))
    out.sort()
    out.setflags(write=False)
    return NullTable(method=method, n=n, sorted_statistics=out, seed=rng.seed)


@lru_cache(maxsize=32)
def _default_lf_table(n: int, reps: int = DEFAULT_TABLE_REPS) -> NullTable:
    return build_null_table("lf", n, reps, RngStream(DEFAULT_TABLE_SEED))


def lilliefors_test(x: SampleVector, table: NullTable | None = None) -> TestResult:
    """Lilliefors test: KS statistic with estimated parameters, Monte Carlo p.

    Pass a prebuilt `table` to amortize simulation across many samples;
    its method and n must match.  Without one, a cached default table
    (10,000 reps, fixed seed) is built on first use per n.
    """
    if x.n < 4:
        raise ValueError("test requires at least 4 observations")
    d = lilliefors_statistic(x)
    if table is None:
        table = _default_lf_table(x.n)
    if table.method != "lf" or table.n != x.n:
        raise ValueError("null table does not match this test and sample size")
    return TestResult("lf", d, table.p_value(d, upper_tail=True), x.n, params_estimated=True)


def ad_test(x: SampleVector) -> TestResult:
    """Anderson-Darling test with estimated parameters.

    Small-sample modification A* = A^2 (1 + 0.75/n + 2.25/n^2), then the
    standard piecewise exponential p-value fit for the estimated-normal
    case.
    """
    a2 = ad_statistic(x)
    n = x.n
    a = a2 * (1.0 + 0.75 / n + 2.25 / (n * n))
    if a < 0.2:
        p = 1.0 - math.exp(-13.436 + 101.14 * a - 223.73 * a * a)
    elif a < 0.34:
        p = 1.0 - math.exp(-8.318 + 42.796 * a - 59.938 * a * a)
    elif a < 0.6:
        p = math.exp(0.9177 - 4.279 * a - 1.38 * a * a)
    else:
        p = math.exp(1.2937 - 5.709 * a + 0.0186 * a * a)
    return TestResult("ad", a2, min(max(p, 0.0), 1.0), n, params_estimated=True)


def cvm_test(x: SampleVector) -> TestResult:
    """Cramer-von Mises test with estimated parameters.

    Modification W* = W^2 (1 + 0.5/n), then the standard piecewise
    exponential p-value fit for the estimated-normal case.
    """
    w2 = cvm_statistic(x)
    n = x.n
    w = w2 * (1.0 + 0.5 / n)
    if w < 0.0275:
        p = 1.0 - math.exp(-13.953 + 775.5 * w - 12542.61 * w * w)
    elif w < 0.051:
        p = 1.0 - math.exp(-5.903 + 179.546 * w - 1515.29 * w * w)
    elif w < 0.092:
        p = math.exp(0.886 - 31.62 * w + 10.897 * w * w)
    elif w < 1.1:
        p = math.exp(1.111 - 34.242 * w + 12.832 * w * w)
    else:
        p = 7.37e-10
    return TestResult("cvm", w2, min(max(p, 0.0), 1.0), n, params_estimated=True)


# Polynomial coefficients (highest power first) of Royston's 1995
# algorithm AS R94, the standard Shapiro-Wilk computation for
# 3 <= n <= 5000.
_SW_C1 = np.array([-2.706056, 4.434685, -2.07119, -0.147981, 0.221157, 0.0])
_SW_C2 = np.array([-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0])
_SW_C3 = np.array([-0.0006714, 0.025054, -0.39978, 0.544])
_SW_C4 = np.array([-0.0020322, 0.062767, -0.77857, 1.3822])
_SW_C5 = np.array([0.0038915, -0.083751, -0.31082, -1.5861])
_SW_C6 = np.array([0.0030302, -0.082676, -0.4803])


@lru_cache(maxsize=256)
def _sw_weights(n: int) -> np.ndarray:
    """Approximate normal-scores weights a_1..a_n for sample size n."""
    if n == 3:
        a = np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
        a.setflags(write=False)
        return a
    m = np.array([normal_quantile((j - 0.375) / (n + 0.25)) for j in range(1, n + 1)])
    mm = float(np.sum(m * m))
    rsn = 1.0 / math.sqrt(n)
    a_n = float(np.polyval(_SW_C1, rsn)) + m[-1] / math.sqrt(mm)
    a = np.empty(n)
    if n > 5:
        a_n1 = float(np.polyval(_SW_C2, rsn)) + m[-2] / math.sqrt(mm)
        phi = (mm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
            1.0 - 2.0 * a_n**2 - 2.0 * a_n1**2
        )
        a[2 : n - 2] = m[2 : n - 2] / math.sqrt(phi)
        a[0], a[1] = -a_n, -a_n1
        a[-1], a[-2] = a_n, a_n1
    else:
        phi = (mm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n**2)
        a[1 : n - 1] = m[1 : n - 1] / math.sqrt(phi)
        a[0], a[-1] = -a_n, a_n
    a.setflags(write=False)
    return a


def sw_statistic(x: SampleVector) -> float:
    n = x.n
    if not 3 <= n <= 5000:
        raise ValueError("test supports 3 to 5000 observations")
    v = x.ordered()
    a = _sw_weights(n)
    xbar = float(np.mean(v))
    ssq = float(np.sum((v - xbar) ** 2))
    if not ssq > 0.0:
        raise DegenerateSampleError("sample variance is zero")
    b = float(np.dot(a, v))
    return min(b * b / ssq, 1.0)


def sw_test(x: SampleVector) -> TestResult:
    """Shapiro-Wilk test via Royston's approximation (3 <= n <= 5000).

    The p-value normalizes W with parameters polynomial in n (4 <= n <=
    11) or log n (n >= 12); n = 3 has the exact arcsine form.
    """
    w = sw_statistic(x)
    n = x.n
    if n == 3:
        pi6 = 1.90985931710274
        stqr = 1.04719755119660
        p = pi6 * (math.asin(math.sqrt(w)) - stqr)
        return TestResult("sw", w, min(max(p, 0.0), 1.0), n, params_estimated=True)
    if n <= 11:
        g = -2.273 + 0.459 * n
        mu = float(np.polyval(_SW_C3, n))
        sigma = math.exp(float(np.polyval(_SW_C4, n)))
        z = (-math.log(g - math.log1p(-w)) - mu) / sigma
    else:
        ln = math.log(n)
        mu = float(np.polyval(_SW_C5, ln))
        sigma = math.exp(float(np.polyval(_SW_C6, ln)))
        z = (math.log1p(-w) - mu) / sigma
    p = 1.0 - normal_cdf(z)
    return TestResult("sw", w, min(max(p, 0.0), 1.0), n, params_estimated=True)


_TABLE_STATISTIC.update(
    {
        "ks": lilliefors_statistic,
        "lf": lilliefors_statistic,
        "ad": ad_statistic,
        "cvm": cvm_statistic,
        "sw": sw_statistic,
    }
)

# SW rejects in the lower tail of its statistic; the distance-style
# statistics reject in the upper tail.
UPPER_TAIL = {"ks": True, "lf": True, "ad": True, "cvm": True, "sw": False}

# Ready-to-call test per method; "ks" is the fixed standard-normal null.
TESTS_BY_METHOD: dict[str, Callable[[SampleVector], TestResult]] = {
    "ks": lambda x: ks_test(x, 0.0, 1.0),
    "lf": lilliefors_test,
    "ad": ad_test,
    "cvm": cvm_test,
    "sw": sw_test,
}
