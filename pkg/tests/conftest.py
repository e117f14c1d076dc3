import warnings
from importlib.resources import files

import pytest

from nkinterdict.errors import DataWarning
from nkinterdict.network import Network, parse_matpower, parse_probabilities

warnings.simplefilter("ignore", DataWarning)

_CACHE = {}


def data_text(name: str) -> str:
    return files("nkinterdict.data").joinpath(name).read_text()


def load_case(case: str, prob: str | None) -> Network:
    key = (case, prob)
    if key not in _CACHE:
        net = parse_matpower(data_text(case))
        if prob:
            net = parse_probabilities(data_text(prob), net)
        _CACHE[key] = net
    return _CACHE[key]


@pytest.fixture(scope="session")
def case14() -> Network:
    return load_case("case14.m", "prob_case14.csv")


@pytest.fixture(scope="session")
def case24() -> Network:
    return load_case("case24_rts96.m", "prob_rts96_24.csv")


@pytest.fixture(scope="session")
def case73() -> Network:
    return load_case("case73_rts96.m", "prob_rts96_73.csv")


def two_bus(pd=1.0, qd=0.0, t=1.0, b=-10.0, g=0.0, pg=1.0, qg=1.0, pr=0.5) -> Network:
    """The canonical 2-bus instance: one generator bus feeding one load bus."""
    from nkinterdict.network import Bus, Line

    return Network(base_mva=100.0, buses=(
        Bus(id=1, v_lo=0.95, v_hi=1.05, pg_hi=pg, qg_lo=-qg, qg_hi=qg),
        Bus(id=2, v_lo=0.95, v_hi=1.05, pd=pd, qd=qd),
    ), lines=(Line(id=1, from_bus=1, to_bus=2, g=g, b=b, t=t, pr=pr),))


@pytest.fixture
def net2() -> Network:
    return two_bus()
