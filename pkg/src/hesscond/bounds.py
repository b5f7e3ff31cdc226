"""Condition-number bounds for the preconditioned Hessian.

Three bound families are computed for a model (B, R, H) with p < n:

* general bounds separating B from the whitened observation term
  (three lower candidates, two upper candidates),
* factored bounds additionally separating R from H (two lower candidates,
  one upper bound),
* the row-sum bounds built from the similarity product
  ``T = R^(-1/2) (H B H.T) R^(-1/2)``: the mean row sum of T below, the
  maximum absolute row sum above.

When ``H B H.T`` and ``R`` are both circulant and every entry of T is
nonnegative, the row-sum bounds coincide and equal the condition number
exactly; :func:`check_circulant_exactness` tests those hypotheses and
reports the defects. All candidate terms are exposed individually so
term-by-term comparisons can be reproduced from the report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import inverse_symmetric_sqrt
from .hessian import HessianModel
from .solvers import symmetric_eigendecomposition

# Entrywise shift-invariance defect below which a matrix counts as circulant.
CIRCULANT_TOL = 1e-10
# Entries of the similarity product above this (negative) floor count as
# nonnegative; distinguishes sign violations from roundoff.
NEGATIVE_ENTRY_TOL = -1e-12


@dataclass(frozen=True)
class ExactnessDiagnostics:
    """Outcome of the circulant-exactness check with its measured defects."""

    exact: bool
    most_negative_entry: float
    shift_defect_hbht: float
    shift_defect_r: float


@dataclass(frozen=True)
class BoundsReport:
    """Every bound value computed for one model, plus the exact kappa."""

    kappa_exact: float
    general_lower_terms: tuple[float, float, float]
    general_upper_terms: tuple[float, float]
    factored_lower_terms: tuple[float, float]
    factored_upper: float
    haben_lower: float
    haben_upper: float
    exactness: ExactnessDiagnostics
    descriptor: dict

    @property
    def exactness_flag(self) -> bool:
        return self.exactness.exact

    def to_csv_dict(self) -> dict:
        d = dict(self.descriptor)
        d.update(
            kappa_exact=self.kappa_exact,
            general_lower_1=self.general_lower_terms[0],
            general_lower_2=self.general_lower_terms[1],
            general_lower_3=self.general_lower_terms[2],
            general_upper_1=self.general_upper_terms[0],
            general_upper_2=self.general_upper_terms[1],
            factored_lower_1=self.factored_lower_terms[0],
            factored_lower_2=self.factored_lower_terms[1],
            factored_upper=self.factored_upper,
            haben_lower=self.haben_lower,
            haben_upper=self.haben_upper,
            exactness_flag=self.exactness.exact,
            most_negative_entry=self.exactness.most_negative_entry,
            shift_defect_hbht=self.exactness.shift_defect_hbht,
        )
        return d


class _Pieces:
    """Shared spectral quantities; computed once per model and reused."""

    def __init__(self, model: HessianModel):
        b = model.background_cov
        r = model.observation_cov
        h = model.operator.to_dense()
        self.p = model.p
        eig_b, _ = symmetric_eigendecomposition(b)
        eig_r, _ = symmetric_eigendecomposition(r)
        self.lam1_b, self.lamn_b = float(eig_b[0]), float(eig_b[-1])
        self.lam1_r, self.lamp_r = float(eig_r[0]), float(eig_r[-1])
        self.hbht = h @ b @ h.T
        eig_g, _ = symmetric_eigendecomposition(0.5 * (self.hbht + self.hbht.T))
        self.lam1_hbht, self.lamp_hbht = float(eig_g[0]), float(eig_g[-1])
        hht = h @ h.T
        eig_hht, _ = symmetric_eigendecomposition(hht)
        self.lam1_hht, self.lamp_hht = float(eig_hht[0]), float(eig_hht[-1])
        # R^(-1/2), shared by the whitened-term bounds and the row-sum bounds.
        self.r_inv_sqrt = inverse_symmetric_sqrt(r)
        self.r_mat = r
        # lambda_1(H.T R^(-1) H) from the p-by-p form with the same nonzero
        # spectrum, keeping the eigensolver symmetric.
        m = self.r_inv_sqrt @ hht @ self.r_inv_sqrt
        eig_m, _ = symmetric_eigendecomposition(0.5 * (m + m.T))
        self.lam1_ht_rinv_h = float(eig_m[0])
        t = self.r_inv_sqrt @ self.hbht @ self.r_inv_sqrt
        self.similarity_product = 0.5 * (t + t.T)

    def kappa_exact(self) -> float:
        eig_t, _ = symmetric_eigendecomposition(self.similarity_product)
        return 1.0 + float(eig_t[0])


def _general_bounds(z: _Pieces) -> tuple[tuple[float, float, float], tuple[float, float]]:
    lower = (
        1.0 + z.lam1_ht_rinv_h * z.lamn_b,
        1.0 + z.lam1_hbht / z.lam1_r,
        1.0 + z.lamp_hbht / z.lamp_r,
    )
    upper = (
        1.0 + z.lam1_b * z.lam1_ht_rinv_h,
        1.0 + z.lam1_hbht / z.lamp_r,
    )
    return lower, upper


def _factored_bounds(z: _Pieces) -> tuple[tuple[float, float], float]:
    lower = (
        1.0 + z.lamp_hht * z.lamn_b / z.lamp_r,
        1.0 + z.lam1_hht * z.lamn_b / z.lam1_r,
    )
    upper = 1.0 + z.lam1_b * z.lam1_hht / z.lamp_r
    return lower, upper


def _haben_bounds(z: _Pieces) -> tuple[float, float]:
    t = z.similarity_product
    lower = 1.0 + float(t.sum()) / z.p
    upper = 1.0 + float(np.abs(t).sum(axis=1).max())
    return lower, upper


def circulant_defect(a: np.ndarray) -> float:
    """Largest entrywise deviation from the cyclic shifts of the first row."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    shift = (np.arange(d)[None, :] - np.arange(d)[:, None]) % d
    return float(np.abs(a - a[0][shift]).max())


def _exactness(z: _Pieces) -> ExactnessDiagnostics:
    defect_g = circulant_defect(z.hbht)
    defect_r = circulant_defect(z.r_mat)
    most_negative = float(z.similarity_product.min())
    exact = (
        defect_g <= CIRCULANT_TOL
        and defect_r <= CIRCULANT_TOL
        and most_negative >= NEGATIVE_ENTRY_TOL
    )
    return ExactnessDiagnostics(
        exact=exact,
        most_negative_entry=most_negative,
        shift_defect_hbht=defect_g,
        shift_defect_r=defect_r,
    )


def general_bounds(model: HessianModel) -> tuple[tuple[float, float, float], tuple[float, float]]:
    """Lower (3 candidates) and upper (2 candidates) general bounds.

    Lower candidates: ``1 + lambda_1(H.T R^-1 H) lambda_n(B)``,
    ``1 + lambda_1(HBH.T)/lambda_1(R)``, ``1 + lambda_p(HBH.T)/lambda_p(R)``.
    Upper candidates: ``1 + lambda_1(B) lambda_1(H.T R^-1 H)``,
    ``1 + lambda_1(HBH.T)/lambda_p(R)``. The bound is the max (resp. min)
    over candidates; all are returned for term-by-term comparison.
    """
    return _general_bounds(_Pieces(model))


def factored_bounds(model: HessianModel) -> tuple[tuple[float, float], float]:
    """Bounds that further separate the observation operator from R.

    Lower candidates: ``1 + lambda_p(HH.T) lambda_n(B)/lambda_p(R)`` and
    ``1 + lambda_1(HH.T) lambda_n(B)/lambda_1(R)``; upper bound
    ``1 + lambda_1(B) lambda_1(HH.T)/lambda_p(R)``.
    """
    return _factored_bounds(_Pieces(model))


def haben_bounds(model: HessianModel) -> tuple[float, float]:
    """Row-sum bounds from the similarity product T = R^(-1/2) HBH.T R^(-1/2).

    Lower: one plus the mean row sum of T (the sum of all p^2 entries divided
    by p). Upper: one plus the maximum absolute row sum (the infinity norm).
    """
    return _haben_bounds(_Pieces(model))


def check_circulant_exactness(model: HessianModel) -> ExactnessDiagnostics:
    """Test the hypotheses under which the row-sum bounds are exact.

    The flag is true when ``H B H.T`` and ``R`` are circulant to within an
    entrywise shift-invariance defect of 1e-10 and no entry of the similarity
    product lies below -1e-12. Diagnostics always report the most negative
    entry and the measured shift defects.
    """
    return _exactness(_Pieces(model))


def compute_bounds_report(model: HessianModel) -> BoundsReport:
    """All bound families plus the exact condition number, in one pass.

    The shared spectral pieces (extreme eigenvalues, ``R^(-1/2)``, the
    similarity product) are computed once and reused across the families.
    """
    z = _Pieces(model)
    gl, gu = _general_bounds(z)
    fl, fu = _factored_bounds(z)
    hl, hu = _haben_bounds(z)
    return BoundsReport(
        kappa_exact=z.kappa_exact(),
        general_lower_terms=gl,
        general_upper_terms=gu,
        factored_lower_terms=fl,
        factored_upper=fu,
        haben_lower=hl,
        haben_upper=hu,
        exactness=_exactness(z),
        descriptor=model.descriptor(),
    )
