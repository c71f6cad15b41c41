import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netsecopt import _kernels, exact_risk, risk_measures
from netsecopt.attack_graph import augment_with_targets

from helpers import random_graph

needs_cython = pytest.mark.skipif("cython" not in _kernels.BACKENDS,
                                  reason="compiled kernels not built")


def run_all(g, severed):
    return (exact_risk.arisk(g, severed).probability,
            risk_measures.reach(g, severed).reachable,
            risk_measures.path(g, severed))


@needs_cython
@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    g = augment_with_targets(random_graph(rng, max_nodes=16))
    severed = [e for e in g.edges if rng.random() < 0.2]
    with _kernels.use_backend("python"):
        py = run_all(g, severed)
    with _kernels.use_backend("cython"):
        cy = run_all(g, severed)
    assert py[1] == cy[1]
    assert py[2] == pytest.approx(cy[2], rel=1e-12)
    for k in py[0]:
        assert py[0][k] == pytest.approx(cy[0][k], abs=1e-12)


def test_backend_switch_restores_state():
    before = _kernels.BACKEND
    with _kernels.use_backend("python") as impl:
        assert _kernels.BACKEND == "python"
        assert _kernels.reach is impl.reach
    assert _kernels.BACKEND == before


def test_unknown_backend():
    with pytest.raises(ValueError):
        with _kernels.use_backend("fortran"):
            pass


def test_environment_forces_fallback():
    env = dict(os.environ, NETSECOPT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import netsecopt; print(netsecopt.KERNEL_BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_kernel_shortest_distance_unreachable():
    succ_ptr = np.array([0, 1, 1, 1], dtype=np.int64)
    succ_dst = np.array([1], dtype=np.int64)
    succ_edge = np.array([0], dtype=np.int64)
    w = np.array([0.5])
    for impl in _kernels.BACKENDS.values():
        assert impl.shortest_distance(succ_ptr, succ_dst, succ_edge, w, 0, 1) == 0.5
        assert impl.shortest_distance(succ_ptr, succ_dst, succ_edge, w, 0, 2) == np.inf
