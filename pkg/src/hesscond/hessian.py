"""Assembly and spectral analysis of the 3D-Var Hessians.

The preconditioned Hessian is ``I + B^(1/2) H.T R^(-1) H B^(1/2)``; because
there are fewer observations than state variables it is a rank-p update of
the identity, its minimum eigenvalue is one, and its condition number equals
``1 + lambda_1(R^(-1) H B H.T)``. That rank-p shortcut only ever touches
p-by-p matrices, and is evaluated through the similar symmetric form
``R^(-1/2) (H B H.T) R^(-1/2)`` so the eigensolver stays symmetric.

Variances enter as scalar factors on the correlation matrices
(``B = sigma_B^2 * B_corr``), so the rank-p update scales exactly linearly
with the variance ratio; the shortcut exploits that by factoring the ratio
out analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import obs_operators as obs
from .covariance import (
    CorrelationMatrix,
    inverse_symmetric_sqrt,
    spd_inverse,
    symmetric_sqrt,
)
from .obs_operators import ObservationOperator
from .solvers import symmetric_eigendecomposition

DEFAULT_CLUSTER_GAP = 0.05


@dataclass(frozen=True)
class HessianModel:
    """The triple (B, R, H) defining one assimilation configuration.

    ``background`` and ``observation`` are unit-diagonal correlation
    matrices; the covariances are obtained by scaling with the respective
    variances. Requires matching dimensions and p < n.
    """

    background: CorrelationMatrix
    observation: CorrelationMatrix
    operator: ObservationOperator
    background_variance: float = 1.0
    observation_variance: float = 1.0

    def __post_init__(self):
        if self.background.dim != self.operator.n:
            raise ValueError(
                f"background dimension {self.background.dim} does not match "
                f"operator state dimension {self.operator.n}"
            )
        if self.observation.dim != self.operator.p:
            raise ValueError(
                f"observation dimension {self.observation.dim} does not match "
                f"operator observation count {self.operator.p}"
            )
        if self.background_variance <= 0 or self.observation_variance <= 0:
            raise ValueError("variances must be positive")

    @property
    def n(self) -> int:
        return self.operator.n

    @property
    def p(self) -> int:
        return self.operator.p

    @property
    def background_cov(self) -> np.ndarray:
        """Scaled covariance ``sigma_B^2 * B_corr``."""
        return self.background_variance * self.background.entries

    @property
    def observation_cov(self) -> np.ndarray:
        """Scaled covariance ``sigma_R^2 * R_corr``."""
        return self.observation_variance * self.observation.entries

    def descriptor(self) -> dict:
        """Identifying fields for reports and CSV rows."""
        return {
            "operator": self.operator.kind,
            "n": self.n,
            "p": self.p,
            "lengthscale_b": self.background.lengthscale,
            "lengthscale_r": self.observation.lengthscale,
            "sigma_b": math.sqrt(self.background_variance),
            "sigma_r": math.sqrt(self.observation_variance),
            "seed": self.operator.seed,
        }


def assemble_preconditioned(model: HessianModel) -> np.ndarray:
    """Dense preconditioned Hessian ``I + B^(1/2) H.T R^(-1) H B^(1/2)``.

    Symmetrized as ``(A + A.T)/2`` after assembly to remove roundoff
    asymmetry accumulated by the matrix products.
    """
    b_sqrt = symmetric_sqrt(model.background_cov)
    r_inv = spd_inverse(model.observation_cov)
    h = model.operator.to_dense()
    hb = h @ b_sqrt
    a = np.eye(model.n) + hb.T @ r_inv @ hb
    return 0.5 * (a + a.T)


def assemble_unpreconditioned(model: HessianModel) -> np.ndarray:
    """Dense unpreconditioned Hessian ``B^(-1) + H.T R^(-1) H``."""
    b_inv = spd_inverse(model.background_cov)
    r_inv = spd_inverse(model.observation_cov)
    h = model.operator.to_dense()
    a = b_inv + h.T @ r_inv @ h
    return 0.5 * (a + a.T)


def update_eigenvalues(model: HessianModel) -> np.ndarray:
    """Descending eigenvalues of the rank-p update ``B^(1/2)H.T R^(-1)H B^(1/2)``.

    Computed from the p-by-p similar form ``R^(-1/2) (H B H.T) R^(-1/2)``,
    which carries exactly the nonzero spectrum of the n-by-n update. The
    variance ratio scales the correlation-only product analytically.
    """
    h = model.operator.to_dense()
    g = h @ model.background.entries @ h.T
    r_inv_sqrt = inverse_symmetric_sqrt(model.observation)
    t = r_inv_sqrt @ g @ r_inv_sqrt
    t = 0.5 * (t + t.T)
    ratio = model.background_variance / model.observation_variance
    evals, _ = symmetric_eigendecomposition(t)
    return ratio * evals


def kappa_via_rank_p(model: HessianModel) -> float:
    """Condition number of the preconditioned Hessian from p-by-p products.

    Equals ``1 + lambda_1(R^(-1) H B H.T)``; the full n-by-n Hessian is never
    formed.
    """
    return 1.0 + float(update_eigenvalues(model)[0])


def preconditioned_operator(model: HessianModel):
    """Matrix-free matvec callback for the preconditioned Hessian.

    Returns a closure suitable for :func:`hesscond.solvers.conjugate_gradient`.
    ``B^(1/2)`` is prefactored spectrally and ``R^(-1)`` is applied through a
    cached Cholesky factorization; the observation operator stays sparse.
    """
    b_sqrt = symmetric_sqrt(model.background_cov)
    r_factor = cho_factor(model.observation_cov, lower=True)
    h = model.operator

    def apply_hessian(v: np.ndarray) -> np.ndarray:
        w = b_sqrt @ v
        y = cho_solve(r_factor, obs.apply(h, w))
        return v + b_sqrt @ obs.apply_transpose(h, y)

    return apply_hessian


@dataclass(frozen=True)
class SpectrumReport:
    """Spectral summary of one symmetric matrix.

    ``distinct_cluster_count`` counts maximal runs of adjacent sorted
    eigenvalues whose relative gap stays below ``cluster_gap``. For
    preconditioned Hessians, ``update_eigenvalues`` carries the p nonzero
    eigenvalues of the rank-p update (the spectrum with the identity
    subtracted), which is what log-scale spectrum plots show.
    """

    eigenvalues: np.ndarray
    kappa: float
    distinct_cluster_count: int
    cluster_gap: float
    update_eigenvalues: np.ndarray | None = None

    def to_json_dict(self, descriptor: dict | None = None) -> dict:
        d = {
            "eigenvalues": self.eigenvalues.tolist(),
            "kappa": self.kappa,
            "distinct_cluster_count": self.distinct_cluster_count,
            "cluster_gap": self.cluster_gap,
        }
        if self.update_eigenvalues is not None:
            d["update_eigenvalues"] = self.update_eigenvalues.tolist()
        if descriptor is not None:
            d["model"] = descriptor
        return d


def count_clusters(eigenvalues_descending: np.ndarray, gap: float) -> int:
    """Number of eigenvalue clusters at the given relative gap threshold."""
    ev = np.asarray(eigenvalues_descending, dtype=float)
    if ev.size == 0:
        return 0
    count = 1
    for a, b in zip(ev[:-1], ev[1:]):
        if a - b > gap * max(abs(a), abs(b)):
            count += 1
    return count


def spectrum(
    matrix: np.ndarray,
    cluster_gap: float = DEFAULT_CLUSTER_GAP,
    update_rank: int | None = None,
) -> SpectrumReport:
    """Full descending spectrum with condition number and cluster count.

    Parameters
    ----------
    matrix:
        Symmetric input; asymmetry beyond 1e-10 entrywise is rejected.
    cluster_gap:
        Relative gap above which adjacent eigenvalues split clusters.
    update_rank:
        When given (the p of a preconditioned Hessian), the top
        ``update_rank`` eigenvalues minus one are reported separately as the
        nonzero update spectrum.
    """
    evals, _ = symmetric_eigendecomposition(matrix)
    kappa = float(evals[0] / evals[-1]) if evals[-1] > 0 else math.inf
    update = evals[:update_rank] - 1.0 if update_rank is not None else None
    return SpectrumReport(
        eigenvalues=evals,
        kappa=kappa,
        distinct_cluster_count=count_clusters(evals, cluster_gap),
        cluster_gap=cluster_gap,
        update_eigenvalues=update,
    )
