"""Hot graph kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it was built and ``VAKG_PURE_PYTHON`` is not
set. Both backends share one signature and are tested against each other.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

if _ckernels is not None and not os.environ.get("VAKG_PURE_PYTHON"):
    DEFAULT_BACKEND = "compiled"
else:
    DEFAULT_BACKEND = "python"


def get_backend(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None


@dataclass(frozen=True)
class CSR:
    """Compressed sparse rows of a weighted digraph on nodes ``0..n-1``."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @classmethod
    def from_edges(cls, n: int, sources, targets, weights=None) -> "CSR":
        src = np.asarray(sources, dtype=np.int64).reshape(-1)
        dst = np.asarray(targets, dtype=np.int64).reshape(-1)
        w = np.ones(len(src)) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(indptr, np.ascontiguousarray(dst), np.ascontiguousarray(w, dtype=np.float64))

    def reverse(self) -> "CSR":
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        return CSR.from_edges(self.n, self.indices, src, self.weights)


def dijkstra(csr: CSR, source: int, blocked=None, backend: str | None = None) -> np.ndarray:
    """Distances from ``source``; ``inf`` where unreachable. Blocked nodes are skipped."""
    kern = get_backend(backend)
    if blocked is not None:
        blocked = np.ascontiguousarray(blocked, dtype=np.uint8)
    return np.asarray(kern.dijkstra(csr.indptr, csr.indices, csr.weights, int(source), blocked), dtype=np.float64)


def pagerank(csr: CSR, damping: float, tol: float, max_iter: int, backend: str | None = None):
    """Power iteration; returns ``(scores, iterations, converged, last_l1_delta)``."""
    kern = get_backend(backend)
    scores, iterations, converged, delta = kern.pagerank(
        csr.indptr, csr.indices, csr.weights, float(damping), float(tol), int(max_iter)
    )
    return np.asarray(scores, dtype=np.float64), int(iterations), bool(converged), float(delta)
