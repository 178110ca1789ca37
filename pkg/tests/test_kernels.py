import os
import random
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from nosqint import _kernels_py as py
from nosqint import kernels

c = pytest.importorskip("nosqint._ckernels", reason="compiled kernels not built")


def random_rows(rng, n_obj, n_attrs):
    return [rng.getrandbits(n_attrs) if n_attrs else 0 for _ in range(n_obj)]


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = {**os.environ, "NOSQINT_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import nosqint; print(nosqint.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(st.text(max_size=12), st.text(max_size=12))
def test_levenshtein_parity(a, b):
    assert c.levenshtein(a, b) == py.levenshtein(a, b)


def test_levenshtein_values():
    assert py.levenshtein("kitten", "sitting") == 3
    assert py.levenshtein("paper", "person") == 5
    assert py.levenshtein("", "abc") == 3


@pytest.mark.parametrize("seed", range(40))
def test_lattice_kernel_parity(seed):
    rng = random.Random(seed)
    n_attrs = rng.choice([0, 1, 3, 7, 20, 64])
    rows = random_rows(rng, rng.randint(0, 12), n_attrs)
    intents = py.next_closure_intents(rows, n_attrs)
    assert list(c.next_closure_intents(rows, n_attrs)) == intents
    assert sorted(c.cover_pairs(intents)) == sorted(py.cover_pairs(intents))
    mask = rng.getrandbits(n_attrs) if n_attrs else 0
    assert c.closure(rows, n_attrs, mask) == py.closure(rows, n_attrs, mask)
    assert c.extent(rows, mask) == py.extent(rows, mask)


def test_wide_contexts_use_python_path():
    rng = random.Random(1)
    rows = random_rows(rng, 5, 80)
    assert kernels.next_closure_intents(rows, 80) == py.next_closure_intents(rows, 80)
    assert kernels.closure(rows, 80, 1 << 70) == py.closure(rows, 80, 1 << 70)
