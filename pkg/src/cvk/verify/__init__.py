"""Verification suites, their configuration and the JSON report"""

from .config import SuiteConfig, build_config, load_config
from .report import CheckResult, VerificationReport
from .suites import SUITES, run_suite

__all__ = ["SuiteConfig", "build_config", "load_config", "CheckResult", "VerificationReport",
           "SUITES", "run_suite"]
