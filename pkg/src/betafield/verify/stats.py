"""Test reports and the small set of statistics the suites rely on."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "TestReport",
    "ks_test",
    "ks_two_sample",
    "mc_mean",
    "z_window",
    "residual_check",
    "independence_scan",
    "correlation_z",
    "bonferroni",
    "SE_WINDOW",
]

SE_WINDOW = 4.0
MIN_KS_SAMPLES = 100


@dataclass
class TestReport:
    """Outcome of one check.

    ``kind`` is ``"p-value"`` or ``"minimum"`` (passes when
    ``value > threshold``) or ``"residual"`` (passes when
    ``value < threshold``); z-scores are reported as residuals in
    standard-error units.
    """

    __test__ = False  # not a pytest class

    name: str
    kind: str
    value: float
    threshold: float
    statistic: float = float("nan")
    n: int = 0
    seed: str = ""
    detail: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.kind in ("p-value", "minimum"):
            self.passed = bool(self.value > self.threshold)
        elif self.kind == "residual":
            self.passed = bool(self.value < self.threshold)
        else:
            raise ValueError(f"unknown report kind {self.kind!r}")

    def line(self) -> str:
        rel = "<" if self.kind == "residual" else ">"
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name:<48s} {self.kind:<8s} {self.value:<12.4g} {rel} {self.threshold:<10.3g} {verdict}"

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("value", "threshold", "statistic"):
            v = out[k]
            out[k] = None if v is None or not math.isfinite(v) else float(v)
        return out


def bonferroni(alpha: float, m: int) -> float:
    return alpha / max(1, int(m))


def _check_ks_input(samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if len(x) < MIN_KS_SAMPLES:
        raise ValueError(f"KS test needs at least {MIN_KS_SAMPLES} samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("KS samples must be finite")
    if np.ptp(x) == 0:
        raise ValueError("degenerate sample: all values equal")
    return x


def ks_test(
    samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray], *, name: str = "ks", threshold: float = 0.01, seed: str = ""
) -> TestReport:
    """Two-sided one-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    x = _check_ks_input(samples)
    res = stats.kstest(x, cdf, method="asymp")
    return TestReport(name, "p-value", float(res.pvalue), threshold, float(res.statistic), len(x), seed)


def ks_two_sample(
    a: np.ndarray, b: np.ndarray, *, name: str = "ks2", threshold: float = 0.01, seed: str = ""
) -> TestReport:
    """Two-sided two-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    a, b = _check_ks_input(a), _check_ks_input(b)
    res = stats.ks_2samp(a, b, method="asymp")
    return TestReport(name, "p-value", float(res.pvalue), threshold, float(res.statistic), len(a) + len(b), seed)


def mc_mean(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if len(v) < 2:
        raise ValueError("need at least two draws")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def z_window(
    estimate: float, se: float, target: float, *, name: str, n: int = 0, seed: str = "", window: float = SE_WINDOW, **detail
) -> TestReport:
    """``|estimate - target| / se`` against a ``window``-SE band."""
    z = abs(estimate - target) / se if se > 0 else (0.0 if estimate == target else math.inf)
    detail.update(estimate=float(estimate), se=float(se), target=float(target))
    return TestReport(name, "residual", float(z), window, float(estimate), n, seed, detail)


def residual_check(residual: float, threshold: float, *, name: str, n: int = 0, seed: str = "", **detail) -> TestReport:
    return TestReport(name, "residual", float(residual), threshold, float(residual), n, seed, detail)


def correlation_z(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample correlation and its standard error under independence.

    The SE is ``std(zx * zy) / sqrt(N)`` for the standardised columns, which
    stays honest for heavy-tailed marginals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    zx = (x - x.mean()) / x.std()
    zy = (y - y.mean()) / y.std()
    prod = zx * zy
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(len(prod)))


def independence_scan(
    samples: np.ndarray, pairs: Iterable[Sequence[int]], *, name: str = "independence", seed: str = "", window: float = SE_WINDOW
) -> list[TestReport]:
    """One report per column pair: correlation within ``window`` SE of zero."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 10_000:
        raise ValueError("independence scan needs at least 10^4 draws")
    out = []
    for i, j in pairs:
        r, se = correlation_z(samples[:, i], samples[:, j])
        out.append(z_window(r, se, 0.0, name=f"{name}[{i},{j}]", n=samples.shape[0], seed=seed, window=window))
    return out
