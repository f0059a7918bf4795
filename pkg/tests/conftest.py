import numpy as np
import pytest

from relaygame.game import GameParams, RelayProfile
from relaygame.scenario import load_scenario


@pytest.fixture(scope="session")
def military():
    return load_scenario("military")


@pytest.fixture(scope="session")
def commercial():
    return load_scenario("commercial")


@pytest.fixture(scope="session")
def military_params(military):
    return military.game


@pytest.fixture(scope="session")
def commercial_params(commercial):
    return commercial.game


def make_profiles(assets):
    """Relays whose combined asset equals the given value under 0.5/0.5 weights."""
    return [RelayProfile(id=i + 1, info_asset=a, sec_asset=a) for i, a in enumerate(assets)]


def random_instance(rng: np.random.Generator):
    """One random game in the model's usual validity region (may still be infeasible)."""
    k = int(rng.integers(1, 9))
    assets = rng.uniform(0.05, 8.0, k)
    params = GameParams(
        detect_rate=float(rng.uniform(0.3, 0.95)),
        false_alarm_rate=float(rng.uniform(0.0, 0.3)),
        attack_cost=float(rng.uniform(0.0, 0.3)),
        monitor_cost=float(rng.uniform(0.0, 0.2)),
        false_alarm_loss=float(rng.uniform(0.0, 0.3)),
    )
    return make_profiles(assets), params
