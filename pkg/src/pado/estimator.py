"""Estimator-style wrapper: ``fit`` on a graph, ``predict`` distances."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from pado.connections import AuditLog
from pado.oracle import DistanceOracle, preprocess
from pado.utils.validation import check_graph, check_is_fitted, check_pairs, check_positive


class PlanarDistanceOracle(BaseEstimator):
    """Approximate shortest-path distances on an embedded planar graph.

    Parameters
    ----------
    epsilon : float, default=0.5
        Every prediction lies in ``[d, (1 + epsilon) d]`` for the true
        distance ``d``.
    c_ell : float, default=1.0
        Scale of the region-size parameter; larger values mean fewer
        boundary nodes and slower queries.
    mode : {"cut", "direct"}, default="cut"
    engine : {"table", "stream"}, default="table"
    audit : bool, default=False
        Record connection-count and potential audits in ``audit_``.

    Attributes
    ----------
    oracle_ : DistanceOracle
    audit_ : AuditLog or None
    n_nodes_ : int

    Examples
    --------
    >>> from pado.graph import grid
    >>> est = PlanarDistanceOracle(epsilon=0.5).fit(grid(4))
    >>> est.predict([[0, 15]]).tolist()
    [6.0]
    """

    def __init__(self, epsilon=0.5, c_ell=1.0, mode="cut", engine="table", audit=False):
        self.epsilon = epsilon
        self.c_ell = c_ell
        self.mode = mode
        self.engine = engine
        self.audit = audit

    def fit(self, graph, y=None):
        graph = check_graph(graph)
        eps = check_positive("epsilon", self.epsilon)
        c_ell = check_positive("c_ell", self.c_ell)
        self.audit_ = AuditLog() if self.audit else None
        self.oracle_ = preprocess(graph, eps, c_ell, mode=self.mode, engine=self.engine, audit=self.audit_)
        self.n_nodes_ = graph.n
        return self

    @classmethod
    def from_oracle(cls, oracle: DistanceOracle) -> "PlanarDistanceOracle":
        est = cls(epsilon=oracle.params.epsilon, c_ell=oracle.params.c_ell)
        est.oracle_ = oracle
        est.audit_ = None
        est.n_nodes_ = oracle.n
        return est

    def predict(self, pairs) -> np.ndarray:
        """Estimated distance for each ``(s, t)`` row of ``pairs``."""
        check_is_fitted(self)
        arr = check_pairs(pairs, self.n_nodes_)
        return np.array([self.oracle_.query(int(s), int(t)).estimate for s, t in arr], dtype=float)
