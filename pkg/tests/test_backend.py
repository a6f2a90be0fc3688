import os
import subprocess
import sys

import numpy as np
import pytest

from heavytail_ld import _backend
from heavytail_ld.charfn import psi_values
from heavytail_ld.model import TailModel

BACKENDS = _backend.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")

T = np.concatenate([np.logspace(-9, 1.5, 400), [1.0, 2.0, 4.0]])


@needs_compiled
@pytest.mark.parametrize("name, args", [
    ("sici", (T,)),
    ("psi_nodes", (T, 0.4)),
    ("theta_nodes", (T, -0.3)),
    ("charfn_nodes", (T[T < 0.6], 0.4, 37)),
    ("canonical_quantile", (np.linspace(1e-9, 1 - 1e-9, 999), 0.7)),
    ("canonical_upper_tail", (np.linspace(-50, 50, 1001), 0.7)),
])
def test_kernel_parity(name, args):
    a = getattr(BACKENDS["python"], name)(*args)
    b = getattr(BACKENDS["compiled"], name)(*args)
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    for x, y in zip(a, b):
        np.testing.assert_allclose(y, x, rtol=1e-13, atol=1e-300)


@needs_compiled
def test_geometric_sums_parity():
    w, d1 = BACKENDS["python"].psi_nodes(np.logspace(-10, -0.3, 300), 0.4)
    for n in (1, 2, 40, 1000):
        a = BACKENDS["python"].geometric_sums(w, d1, n)
        b = BACKENDS["compiled"].geometric_sums(w, d1, n)
        for x, y in zip(a, b):
            np.testing.assert_allclose(y, x, rtol=1e-12, atol=1e-300)


def test_use_switches_and_restores():
    model = TailModel(0.7)
    t = np.array([0.01, 0.3])
    start = _backend.BACKEND
    ref = psi_values(model, t)[0]
    try:
        for name in BACKENDS:
            _backend.use(name)
            assert _backend.BACKEND == name
            np.testing.assert_allclose(psi_values(model, t)[0], ref, rtol=1e-13)
    finally:
        _backend.use(start)
    with pytest.raises(ValueError):
        _backend.use("fortran")


def test_pure_environment_variable():
    env = dict(os.environ, HEAVYTAIL_LD_PURE="1")
    out = subprocess.run([sys.executable, "-c",
                          "from heavytail_ld import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
