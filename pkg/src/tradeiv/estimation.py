"""Linear estimation primitives: within transform, OLS, 2SLS and HAC covariance.

Everything operates on plain numpy arrays. Rows are expected to be sorted by
(group, time); autocovariances for the HAC estimator are only formed between
rows of the same group, in row order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import (
    BandwidthError,
    CollinearityError,
    DomainError,
    IdentificationError,
    NoVariationError,
)

RANK_TOL = 1e-10


@dataclass
class Design:
    """Response, regressors, instruments and the panel index of each row."""

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    groups: np.ndarray
    times: np.ndarray
    x_names: tuple = ()
    z_names: tuple = ()
    dropped_singletons: int = 0
    constant_columns: tuple = ()

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.X = _as_matrix(self.X)
        self.Z = _as_matrix(self.Z)
        self.groups = np.asarray(self.groups)
        self.times = np.asarray(self.times)
        n = self.y.shape[0]
        if not (self.X.shape[0] == self.Z.shape[0] == self.groups.shape[0] == self.times.shape[0] == n):
            raise DomainError("y, X, Z, groups and times must have the same number of rows")
        if self.Z.shape[1] < self.X.shape[1]:
            raise IdentificationError(
                f"{self.Z.shape[1]} instrument columns for {self.X.shape[1]} regressors"
            )
        if not self.x_names:
            self.x_names = tuple(f"x{i}" for i in range(self.X.shape[1]))
        if not self.z_names:
            self.z_names = tuple(f"z{i}" for i in range(self.Z.shape[1]))

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def n_groups(self):
        return len(pd.unique(self.groups))


@dataclass
class CoefficientEstimates:
    beta_hat: np.ndarray
    vcov: np.ndarray
    residuals: np.ndarray
    n: int
    g: int | None
    method: str
    names: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    def coef(self, name):
        return float(self.beta_hat[self.names.index(name)])

    def stderr(self, name):
        return float(self.se[self.names.index(name)])


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {a.shape}")
    return a


def check_sorted(groups, times):
    """Raise unless rows are sorted by group, then strictly by time within group."""
    if len(groups) < 2:
        return
    gcodes, _ = pd.factorize(np.asarray(groups), sort=True)
    tkey = _time_key(times)
    dg = np.diff(gcodes)
    if (dg < 0).any() or ((dg == 0) & (np.diff(tkey) <= 0)).any():
        raise DomainError("rows must be sorted by (group, time) without duplicates")


def _time_key(times):
    times = np.asarray(times)
    if times.dtype.kind in "iuf":
        return times.astype(float)
    if times.dtype.kind == "M":
        return times.astype("datetime64[ns]").astype(np.int64).astype(float)
    if len(times) and isinstance(times[0], pd.Period):
        return np.fromiter((t.ordinal for t in times), dtype=float, count=len(times))
    codes, _ = pd.factorize(times, sort=True)
    return codes.astype(float)


def _group_codes(groups):
    codes, uniques = pd.factorize(np.asarray(groups), sort=False)
    return codes, len(uniques)


def demean_by_group(a, codes, n_groups):
    a = np.asarray(a, dtype=float)
    flat = a.ndim == 1
    m = a[:, None] if flat else a
    counts = np.bincount(codes, minlength=n_groups).astype(float)
    sums = np.zeros((n_groups, m.shape[1]))
    np.add.at(sums, codes, m)
    out = m - (sums / counts[:, None])[codes]
    return out[:, 0] if flat else out


def within_transform(design: Design) -> Design:
    """Remove group means from y, X and Z.

    Rows of groups with a single observation carry no within variation and
    are dropped; the count is stored in ``dropped_singletons``. Columns that
    vanish after demeaning are listed in ``constant_columns``.
    """
    check_sorted(design.groups, design.times)
    codes, n_groups = _group_codes(design.groups)
    counts = np.bincount(codes, minlength=n_groups)
    keep = counts[codes] >= 2
    if design.n and not keep.any():
        raise NoVariationError("every group is a singleton; no within variation")
    dropped = int((~keep).sum())
    y, X, Z = design.y[keep], design.X[keep], design.Z[keep]
    groups, times = design.groups[keep], design.times[keep]
    codes, n_groups = _group_codes(groups)

    Xd = demean_by_group(X, codes, n_groups)
    Zd = demean_by_group(Z, codes, n_groups)
    yd = demean_by_group(y, codes, n_groups)

    constant = []
    for name, before, after in zip(
        design.x_names + design.z_names, np.hstack([X, Z]).T, np.hstack([Xd, Zd]).T
    ):
        if np.linalg.norm(after) <= 1e-12 * (1.0 + np.linalg.norm(before)):
            constant.append(name)

    return replace(
        design,
        y=yd,
        X=Xd,
        Z=Zd,
        groups=groups,
        times=times,
        dropped_singletons=design.dropped_singletons + dropped,
        constant_columns=tuple(dict.fromkeys(constant)),
    )


def _check_rank(M, names, what):
    if M.shape[0] < M.shape[1]:
        raise CollinearityError(
            f"{what}: {M.shape[0]} rows for {M.shape[1]} columns", columns=list(names)
        )
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0:
        return
    if s[0] == 0:
        raise CollinearityError(f"{what}: all columns are zero", columns=list(names))
    small = s <= RANK_TOL * s[0]
    if small.any():
        loadings = np.abs(vt[small]).max(axis=0)
        bad = [nm for nm, w in zip(names, loadings) if w > 1e-6]
        raise CollinearityError(f"{what} is rank deficient; involved columns: {bad}", columns=bad)


def ols(y, X, names=None) -> CoefficientEstimates:
    """Least squares with a residual-variance covariance (no df correction)."""
    y = np.asarray(y, dtype=float).reshape(-1)
    X = _as_matrix(X)
    names = tuple(names) if names else tuple(f"x{i}" for i in range(X.shape[1]))
    _check_rank(X, names, "regressor matrix")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    n = y.shape[0]
    sigma2 = resid @ resid / n
    vcov = sigma2 * np.linalg.inv(X.T @ X)
    return CoefficientEstimates(beta, (vcov + vcov.T) / 2, resid, n, None, "ols", names)


def first_stage_projection(X, Z):
    """Coefficients ``Pi`` of X on Z, so that ``Z @ Pi`` is the projection of X."""
    Pi, *_ = np.linalg.lstsq(Z, X, rcond=None)
    return Pi


def tsls(y, X, Z, x_names=None, z_names=None) -> CoefficientEstimates:
    """Two-stage least squares.

    ``beta = (X' P_Z X)^{-1} X' P_Z y``; residuals use the original ``X``.
    The attached covariance assumes homoskedastic errors; callers wanting
    robust inference replace it with :func:`hac_vcov`.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    X, Z = _as_matrix(X), _as_matrix(Z)
    x_names = tuple(x_names) if x_names else tuple(f"x{i}" for i in range(X.shape[1]))
    z_names = tuple(z_names) if z_names else tuple(f"z{i}" for i in range(Z.shape[1]))
    if Z.shape[1] < X.shape[1]:
        raise IdentificationError(
            f"under-identified: {Z.shape[1]} instruments for {X.shape[1]} regressors"
        )
    _check_rank(X, x_names, "regressor matrix")
    _check_rank(Z, z_names, "instrument matrix")
    Pi = first_stage_projection(X, Z)
    Xhat = Z @ Pi
    A = Xhat.T @ X
    s = np.linalg.svd(Xhat, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise IdentificationError("projected regressors are rank deficient; instruments irrelevant")
    beta = np.linalg.solve(A, Xhat.T @ y)
    resid = y - X @ beta
    n = y.shape[0]
    vcov = (resid @ resid / n) * np.linalg.inv(A)
    return CoefficientEstimates(
        beta, (vcov + vcov.T) / 2, resid, n, None, "2sls", x_names, extra={"Pi": Pi}
    )


def bartlett_weights(bandwidth):
    """Kernel weights ``1 - l/(L+1)`` for lags ``l = 0..L``."""
    if bandwidth < 0:
        raise DomainError("bandwidth must be nonnegative")
    lags = np.arange(bandwidth + 1)
    return 1.0 - lags / (bandwidth + 1.0)


def long_run_variance(moments, groups, times, bandwidth):
    """Bartlett-weighted sum of within-group autocovariances of ``moments``.

    ``moments`` is n x m (one row per observation, e.g. ``z_t * u_t``).
    Returns the m x m matrix ``sum_l w_l (G_l + G_l')`` with ``G_0`` counted
    once. No division by n.
    """
    M = _as_matrix(moments)
    groups = np.asarray(groups)
    check_sorted(groups, times)
    codes, n_groups = _group_codes(groups)
    lengths = np.bincount(codes, minlength=n_groups)
    if M.shape[0] and bandwidth >= lengths.max():
        raise BandwidthError(
            f"bandwidth {bandwidth} must be below the longest group series ({lengths.max()})"
        )
    w = bartlett_weights(bandwidth)
    S = M.T @ M
    for lag in range(1, bandwidth + 1):
        same = codes[lag:] == codes[:-lag]
        if not same.any():
            continue
        G = M[lag:][same].T @ M[:-lag][same]
        S += w[lag] * (G + G.T)
    return (S + S.T) / 2


def hac_vcov(X, Z, residuals, groups, times, bandwidth):
    """HAC sandwich covariance of the 2SLS (or OLS when Z is X) coefficients.

    With bandwidth 0 this is the heteroskedasticity-robust HC0 sandwich.
    """
    X, Z = _as_matrix(X), _as_matrix(Z)
    u = np.asarray(residuals, dtype=float).reshape(-1)
    S = long_run_variance(Z * u[:, None], groups, times, bandwidth)
    Pi = first_stage_projection(X, Z)
    A_inv = np.linalg.inv(Pi.T @ (Z.T @ X))
    V = A_inv @ (Pi.T @ S @ Pi) @ A_inv.T
    return (V + V.T) / 2
