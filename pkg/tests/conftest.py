import pytest

from nussbaumsim import config


@pytest.fixture(scope="session")
def novel_cfg():
    return config.bundled_scenario("paper_novel")


@pytest.fixture(scope="session")
def trad_cfg():
    return config.bundled_scenario("paper_traditional")


@pytest.fixture(scope="session")
def novel_run(novel_cfg):
    return config.run_scenario(novel_cfg)


@pytest.fixture(scope="session")
def trad_run(trad_cfg):
    return config.run_scenario(trad_cfg)
