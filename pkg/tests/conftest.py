import json
import random

import pytest

from reserves import _kernels
from reserves.model import Instance, parse_instance


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jitted kernels once so timed tests see steady-state costs
    _kernels.warm_up()


def make_instance(doc: dict) -> Instance:
    return parse_instance(json.dumps(doc))


def names_of(inst: Instance, matching) -> dict[str, str]:
    return {inst.agent_names[a]: inst.categories[c].name for a, c in matching.pairs()}


# Three agents, two quota-1 categories. c1 ranks 2 > 3 > empty > 1,
# c2 ranks 2 > empty > 1 > 3; agent 1 is eligible nowhere.
RUNNING_DOC = {
    "agents": ["1", "2", "3"],
    "baseline": ["1", "2", "3"],
    "categories": [
        {"name": "c1", "quota": 1, "kind": "preferential",
         "tiers": [["2"], ["3"], ["1"]], "cutoff": 2},
        {"name": "c2", "quota": 1, "kind": "preferential",
         "tiers": [["2"], ["1"], ["3"]], "cutoff": 1},
    ],
}

# Four agents, two quota-1 categories. c1 ranks 1 > 4 > 2 > empty,
# c2 ranks 1 > 3 > empty. The scan under baseline 1>2>3>4 rejects 4 then 2.
SCAN_DOC = {
    "agents": ["1", "2", "3", "4"],
    "baseline": ["1", "2", "3", "4"],
    "categories": [
        {"name": "c1", "quota": 1, "kind": "preferential",
         "tiers": [["1"], ["4"], ["2"]], "cutoff": 3},
        {"name": "c2", "quota": 1, "kind": "preferential",
         "tiers": [["1"], ["3"]], "cutoff": 2},
    ],
}

# One preferential category reserved for {1, 4} plus one unreserved unit.
RESERVE_DOC = {
    "agents": ["1", "2", "3", "4"],
    "baseline": ["1", "2", "3", "4"],
    "categories": [
        {"name": "c", "quota": 1, "kind": "preferential",
         "tiers": [["1"], ["4"]], "cutoff": 2},
        {"name": "c_u", "quota": 1, "kind": "unreserved"},
    ],
}

# Three quota-1 categories: an early unreserved pool plus c1 reserved for
# {1, 3} and c2 reserved for {2, 4}.
EARLY_POOL_DOC = {
    "agents": ["1", "2", "3", "4"],
    "baseline": ["1", "2", "3", "4"],
    "categories": [
        {"name": "c_u", "quota": 1, "kind": "unreserved"},
        {"name": "c1", "quota": 1, "kind": "preferential",
         "tiers": [["1"], ["3"]], "cutoff": 2},
        {"name": "c2", "quota": 1, "kind": "preferential",
         "tiers": [["2"], ["4"]], "cutoff": 2},
    ],
    "unreserved_split": {"first": 1, "last": 0},
}


@pytest.fixture
def running():
    return make_instance(RUNNING_DOC)


@pytest.fixture
def scan():
    return make_instance(SCAN_DOC)


@pytest.fixture
def reserve():
    return make_instance(RESERVE_DOC)


@pytest.fixture
def early_pool():
    return make_instance(EARLY_POOL_DOC)


def mg_pattern_instance(seed: int, agents: int = 6, cats: int = 2,
                        unreserved: int = 2) -> Instance:
    """Instances in the classical reserve setting: at most one preferential
    category per agent, priorities read off the baseline."""
    rng = random.Random(seed)
    names = [f"a{i}" for i in range(agents)]
    baseline = names[:]
    rng.shuffle(baseline)
    owners = {nm: rng.randrange(cats + 1) for nm in names}  # == cats means none
    cat_docs = []
    for k in range(cats):
        eligible = [nm for nm in baseline if owners[nm] == k]
        cat_docs.append({"name": f"c{k}", "quota": rng.randint(1, 2),
                         "kind": "preferential",
                         "tiers": [[nm] for nm in eligible], "cutoff": len(eligible)})
    cat_docs.append({"name": "u", "quota": unreserved, "kind": "unreserved"})
    return make_instance({"agents": names, "baseline": baseline, "categories": cat_docs})
