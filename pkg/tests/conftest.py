import pytest

from epitown import default_config, scenario_schedule
from epitown.engine import Simulation
from epitown.synth import build_town


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def small_cfg(cfg):
    return cfg.replace(population=4000)


@pytest.fixture(scope="session")
def small_town(small_cfg):
    return build_town(small_cfg, seed=7)


@pytest.fixture(scope="session")
def virus_free_cfg(cfg):
    return cfg.replace(population=4000, initial_infected_fraction=0.0)


@pytest.fixture(scope="session")
def no_policy():
    return scenario_schedule("none")


def run_small(cfg, scenario="none", fiscal="zero-deficit", seed=1, days=7):
    sim = Simulation(cfg, scenario_schedule(scenario), fiscal=fiscal,
                     seed=seed, days=days)
    return sim, sim.run()
