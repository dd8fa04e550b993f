"""Stylized-fact metrics and distribution comparisons."""

from qganfinance.metrics.distributions import aligned_mad, distribution_summary, emd_1d, pdf_histogram, qq_points
from qganfinance.metrics.report import REFERENCE_TARGETS, report_to_dict, write_report
from qganfinance.metrics.stylized_facts import (
    Transform,
    acf_curves,
    autocorrelation,
    ci_halfwidth,
    corr,
    stylized_fact_errors,
)

__all__ = [
    "REFERENCE_TARGETS",
    "Transform",
    "acf_curves",
    "aligned_mad",
    "autocorrelation",
    "ci_halfwidth",
    "corr",
    "distribution_summary",
    "emd_1d",
    "pdf_histogram",
    "qq_points",
    "report_to_dict",
    "stylized_fact_errors",
    "write_report",
]
