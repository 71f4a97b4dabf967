from hypothesis import HealthCheck, settings

# Numpy-heavy examples blow the default deadline on slow CI boxes; the
# suite relies on example counts, not wall-clock, for coverage.
settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
