"""The jitted kernels and the pure fallback must be observationally equal."""

import json
import os
import subprocess
import sys

from reserves import _kernels
from reserves.generator import random_instance_document

WORKLOAD = r"""
import json, sys
from reserves import _kernels
from reserves.graph import max_matching, max_matching_size, reservation_graph
from reserves.model import parse_instance
from reserves.rules import rr

docs = json.load(sys.stdin)
out = {"using_numba": _kernels.USING_NUMBA, "results": []}
for doc in docs:
    inst = parse_instance(json.dumps(doc))
    g = reservation_graph(inst)
    matching, trace = rr(inst)
    out["results"].append({
        "ms": max_matching_size(g),
        "matching": max_matching(g).pairs(),
        "rr": matching.pairs(),
        "rejected": sorted(trace.rejected),
        "decisions": [[d.agent, d.rejected, d.ms_tested] for d in trace.decisions],
    })
json.dump(out, sys.stdout)
"""


def _run(env_flag: str) -> dict:
    env = dict(os.environ)
    env.pop("RESERVES_NO_NUMBA", None)
    if env_flag:
        env["RESERVES_NO_NUMBA"] = env_flag
    docs = [random_instance_document(6, 3, seed=s, eligibility_density=0.6, tie_prob=0.3)
            for s in range(25)]
    proc = subprocess.run([sys.executable, "-c", WORKLOAD], input=json.dumps(docs),
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def test_numba_is_active_by_default():
    assert _kernels.USING_NUMBA or os.environ.get("RESERVES_NO_NUMBA")


def test_pure_fallback_matches_jitted_path():
    jitted = _run("")
    pure = _run("1")
    assert jitted["using_numba"] is True
    assert pure["using_numba"] is False
    assert jitted["results"] == pure["results"]
