import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "junta-walk",
    deadline=None,
    max_examples=int(os.environ.get("JUNTA_WALK_HYPOTHESIS_EXAMPLES", "50")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("junta-walk")
