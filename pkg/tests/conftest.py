import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

# allow "import oracles" from any test module no matter how pytest was invoked
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,  # quadrature-backed calls have long cold-start outliers
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
