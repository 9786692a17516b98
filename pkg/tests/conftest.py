"""Shared test configuration: hypothesis profile and import fallback."""

import os
import sys

from hypothesis import HealthCheck, settings

try:
    import psl2rep  # noqa: F401
except ImportError:
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
