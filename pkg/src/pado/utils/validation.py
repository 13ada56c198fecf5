"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import math

import numpy as np
from sklearn.exceptions import NotFittedError

from pado.errors import InvalidParams, UnknownNode
from pado.graph.embedding import EmbeddedPlanarGraph


def check_positive(name: str, value) -> float:
    """Return ``value`` as a float, rejecting non-positive and non-finite input."""
    if isinstance(value, bool):
        raise InvalidParams(f"{name} must be a number, got {value!r}")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InvalidParams(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(x) or x <= 0:
        raise InvalidParams(f"{name} must be positive and finite, got {value!r}")
    return x


def check_graph(graph) -> EmbeddedPlanarGraph:
    if not isinstance(graph, EmbeddedPlanarGraph):
        raise InvalidParams(f"expected an EmbeddedPlanarGraph, got {type(graph).__name__}")
    return graph


def check_pairs(pairs, n: int) -> np.ndarray:
    """Coerce ``pairs`` to an ``(k, 2)`` int array of valid node ids.

    Raises
    ------
    InvalidParams
        Wrong shape or non-integer entries.
    UnknownNode
        An id outside ``0 .. n - 1``.
    """
    arr = np.asarray(pairs)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParams(f"pairs must have shape (k, 2), got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.floating) or not np.all(np.mod(arr, 1) == 0):
            raise InvalidParams("pairs must hold integer node ids")
    arr = arr.astype(np.int64)
    bad = (arr < 0) | (arr >= n)
    if bad.any():
        raise UnknownNode(f"no node {int(arr[bad][0])}")
    return arr


def check_is_fitted(estimator, attribute: str = "oracle_") -> None:
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(f"{type(estimator).__name__} is not fitted; call fit first")
