"""Verification harness: statistics, quadrature oracles and acceptance suites."""

from .quadrature import QuadResult, magic_expectation, magic_mass, nu_mass, q_mass, quadrature_expectation, quadrature_mass
from .runner import SuiteResult, run_suite, run_suites, write_report
from .stats import (
    TestReport,
    bonferroni,
    correlation_z,
    independence_scan,
    ks_test,
    ks_two_sample,
    mc_mean,
    residual_check,
    z_window,
)
from .suites import CRITERIA, SUITES, SuiteContext, suite_seed

__all__ = [
    "QuadResult",
    "quadrature_mass",
    "quadrature_expectation",
    "nu_mass",
    "q_mass",
    "magic_mass",
    "magic_expectation",
    "SuiteResult",
    "run_suite",
    "run_suites",
    "write_report",
    "TestReport",
    "bonferroni",
    "correlation_z",
    "independence_scan",
    "ks_test",
    "ks_two_sample",
    "mc_mean",
    "residual_check",
    "z_window",
    "CRITERIA",
    "SUITES",
    "SuiteContext",
    "suite_seed",
]
