from hypothesis import HealthCheck, settings

# derandomize pins the example sequence, so every run draws the same cases
settings.register_profile(
    "hamops",
    max_examples=200,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("hamops")
