"""Scikit-learn style front end: fit a walk, predict Green functions for index rows."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .asymptotics import constant_C, green_asymptotic
from .green_integral import RayContour, green_value
from .uniformization import uniformize
from .walk_model import JumpKernel, infer_cubic_family, parse_walk_spec, validate_kernel


class GreenFunctionModel(RegressorMixin, BaseEstimator):
    """Green functions of one killed walk, addressed by rows ``(i0, j0, i, j)``.

    Parameters
    ----------
    walk : JumpKernel or dict
        The jump kernel, or a walk-spec mapping with a ``"kernel"`` or
        ``"family"`` entry.
    method : {"contour", "asymptotic"}
        Exact contour integral or the leading-order asymptotic.
    theta : float, optional
        Ray direction for the contour integral; chosen per target when None.
    threads : int
        Worker threads used by ``predict``.

    Attributes
    ----------
    kernel_ : JumpKernel
    uniformization_ : UniformizationData
    alpha_, beta_ : float
        Coefficients of the harmonic cubic.
    asymptotic_model_ : AsymptoticModel
    """

    def __init__(self, walk=None, method="contour", theta=None, threads=1):
        self.walk = walk
        self.method = method
        self.theta = theta
        self.threads = threads

    def fit(self, X=None, y=None):
        """Uniformize the curve of the walk; ``X`` and ``y`` are ignored."""
        if self.method not in ("contour", "asymptotic"):
            raise ValueError(f"unknown method {self.method!r}")
        if isinstance(self.walk, JumpKernel):
            kernel = self.walk
        elif isinstance(self.walk, dict):
            kernel, _ = parse_walk_spec(self.walk)
        else:
            raise TypeError("walk must be a JumpKernel or a walk-spec dict")
        report = validate_kernel(kernel)
        if not report.ok:
            raise ValueError(f"invalid kernel: {report.violations}")
        self.kernel_ = kernel
        self.alpha_, self.beta_ = infer_cubic_family(kernel)
        self.uniformization_ = uniformize(kernel)
        self.asymptotic_model_ = constant_C(kernel, self.uniformization_, self.alpha_, self.beta_, validate=False)
        return self

    def _rows(self, X):
        X = check_array(X, dtype=None, ensure_min_features=4)
        if X.shape[1] != 4:
            raise ValueError(f"expected 4 columns (i0, j0, i, j), got {X.shape[1]}")
        Xi = np.asarray(X, dtype=np.int64)
        if not np.array_equal(Xi, X) or np.any(Xi < 1):
            raise ValueError("indices must be positive integers")
        return Xi

    def predict(self, X):
        """Green function for each row ``(i0, j0, i, j)`` of ``X``."""
        check_is_fitted(self, "uniformization_")
        rows = self._rows(X)
        if self.method == "asymptotic":
            return np.array([green_asymptotic(self.asymptotic_model_, *map(int, r)) for r in rows])
        contour = RayContour(theta=self.theta)

        def one(r):
            return green_value(self.kernel_, self.uniformization_, *map(int, r), contour=contour).value

        if self.threads <= 1:
            return np.array([one(r) for r in rows])
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return np.array(list(pool.map(one, rows)))
