"""Kernel dispatch: compiled Cython kernels when importable, pure Python otherwise.

Set ``NOSQINT_PURE_PYTHON=1`` to force the fallback.  Compiled kernels pack
bitsets into 64-bit words, so contexts with more than 64 attributes always
run on the Python path.
"""

from __future__ import annotations

import os
from typing import Sequence

from . import _kernels_py as py

try:
    if os.environ.get("NOSQINT_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels as _c
except ImportError:
    _c = None

BACKEND = "cython" if _c is not None else "python"
MAX_COMPILED_ATTRS = 64


def _fits(n_attrs: int) -> bool:
    return _c is not None and n_attrs <= MAX_COMPILED_ATTRS


def levenshtein(a: str, b: str) -> int:
    if _c is not None:
        return _c.levenshtein(a, b)
    return py.levenshtein(a, b)


def closure(rows: Sequence[int], n_attrs: int, mask: int) -> int:
    if _fits(n_attrs):
        return _c.closure(rows, n_attrs, mask)
    return py.closure(rows, n_attrs, mask)


def extent(rows: Sequence[int], mask: int) -> int:
    return py.extent(rows, mask)


def next_closure_intents(rows: Sequence[int], n_attrs: int) -> list[int]:
    if _fits(n_attrs):
        return _c.next_closure_intents(rows, n_attrs)
    return py.next_closure_intents(rows, n_attrs)


def cover_pairs(intents: Sequence[int], n_attrs: int) -> list[tuple[int, int]]:
    if _fits(n_attrs):
        return _c.cover_pairs(intents)
    return py.cover_pairs(intents)
