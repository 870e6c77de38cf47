import random

from hypothesis import HealthCheck, settings, strategies as st

from eapr.syntax import parse

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_of(seed: int) -> random.Random:
    return random.Random(seed)


def P(text: str):
    return parse(text, "prob")


def M(text: str):
    return parse(text, "mod")


def E(text: str):
    return parse(text, "event")
