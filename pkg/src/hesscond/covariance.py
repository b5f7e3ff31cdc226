"""Correlation matrices on the periodic unit-circle grid.

Builds SOAR (second-order autoregressive) correlation matrices from the
chordal distance between evenly spaced gridpoints, exposes the spectrum of
circulant matrices through the discrete Fourier transform, and provides the
symmetric square root and SPD inverse used to assemble Hessians.

Distances are evaluated from the wrap-minimal integer separation
``min(|i-j| mod n, |j-i| mod n)`` so that kernel matrices come out exactly
symmetric and exactly circulant in floating point, entry by entry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NotPositiveDefiniteError

# Eigenvalues in [-EIG_CLAMP_TOL, 0] are treated as roundoff zeros by the
# square root; anything below -EIG_CLAMP_TOL is a genuine definiteness failure.
EIG_CLAMP_TOL = 1e-12

# Absolute ceiling on imaginary parts of DFT eigenvalues of a symmetric row.
DFT_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class CircleGrid:
    """Evenly spaced gridpoints on the unit circle.

    Parameters
    ----------
    n_points:
        Number of gridpoints; must be at least 2. Point ``k`` sits at angle
        ``2*pi*k/n_points``.
    """

    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n_points}")

    @property
    def angular_spacing(self) -> float:
        """Angle between adjacent gridpoints, ``2*pi/n_points``."""
        return 2.0 * np.pi / self.n_points

    def chordal_distance(self, i: int, j: int) -> float:
        """Straight-line distance ``2*sin(theta_ij/2)`` between points i and j."""
        sep = min((i - j) % self.n_points, (j - i) % self.n_points)
        return float(2.0 * np.sin(np.pi * sep / self.n_points))

    def separations(self) -> np.ndarray:
        """Integer separation matrix ``min(|i-j|, n-|i-j|)``, shape (n, n)."""
        idx = np.arange(self.n_points)
        k = np.abs(idx[:, None] - idx[None, :])
        return np.minimum(k, self.n_points - k)

    def chordal_distances(self) -> np.ndarray:
        """Pairwise chordal distance matrix, shape (n, n)."""
        return 2.0 * np.sin(np.pi * self.separations() / self.n_points)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Dense symmetric positive-definite correlation matrix.

    Invariants enforced at construction: entries are exactly symmetric
    (bit for bit, not symmetrized after the fact), the diagonal is exactly
    one, and a Cholesky factorization succeeds, certifying strict positive
    definiteness.

    Parameters
    ----------
    entries:
        Square array of correlations.
    lengthscale:
        Kernel lengthscale when the matrix was generated from one, else None.
    """

    entries: np.ndarray
    lengthscale: float | None = None

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"correlation matrix must be square, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("correlation matrix entries are not exactly symmetric")
        if not np.all(np.diag(a) == 1.0):
            raise ValueError("correlation matrix diagonal must be exactly 1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        try:
            cho_factor(a, lower=True)
        except np.linalg.LinAlgError:
            lam_min = float(np.linalg.eigvalsh(a)[0])
            raise NotPositiveDefiniteError(
                "correlation matrix is not strictly positive definite",
                min_eigenvalue=lam_min,
            ) from None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CirculantSpec:
    """First row of a circulant matrix together with its DFT eigenvalues.

    Row ``i`` of the matrix is the first row cyclically shifted right ``i``
    places, i.e. ``C[i, j] = first_row[(j - i) mod d]``. The eigenvalues are
    ``gamma_m = sum_k c_k * omega**(m*k)`` with ``omega = exp(-2j*pi/d)``,
    which is precisely the unnormalized forward DFT of the first row.
    """

    first_row: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        row = np.asarray(self.first_row, dtype=float)
        if row.ndim != 1 or row.size == 0:
            raise ValueError("circulant first row must be a nonempty 1-D vector")
        row = row.copy()
        row.setflags(write=False)
        object.__setattr__(self, "first_row", row)
        eig = np.fft.fft(row)
        eig.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def dim(self) -> int:
        return self.first_row.size

    def materialize(self) -> np.ndarray:
        """Full dense matrix of cyclic shifts of the first row."""
        d = self.dim
        shift = (np.arange(d)[None, :] - np.arange(d)[:, None]) % d
        return self.first_row[shift]

    def is_symmetric_row(self, rel_tol: float = 1e-12) -> bool:
        """True when ``c_k == c_{d-k}``, so the matrix is symmetric."""
        row = self.first_row
        defect = np.abs(row[1:] - row[1:][::-1]).max(initial=0.0)
        scale = np.abs(row).max(initial=0.0)
        return defect <= rel_tol * max(scale, 1.0)


def build_soar(grid: CircleGrid, lengthscale: float) -> CorrelationMatrix:
    """SOAR correlation matrix on the unit circle.

    Entry (i, j) evaluates ``(1 + d/L) * exp(-d/L)`` at the chordal distance
    ``d = 2*sin(theta_ij/2)`` between gridpoints i and j, with lengthscale
    ``L`` in the same units as the chordal distance. Because the gridpoints
    are evenly spaced, the result is circulant; the constructor nevertheless
    evaluates the kernel entrywise so it stays valid for other point layouts.

    Parameters
    ----------
    grid:
        Gridpoint layout on the unit circle.
    lengthscale:
        Correlation lengthscale, strictly positive.

    Raises
    ------
    ValueError
        If ``lengthscale <= 0``.
    NotPositiveDefiniteError
        If the generated matrix fails the definiteness check; the error
        reports the minimum eigenvalue.
    """
    if lengthscale <= 0:
        raise ValueError(f"lengthscale must be positive, got {lengthscale}")
    d = grid.chordal_distances()
    entries = (1.0 + d / lengthscale) * np.exp(-d / lengthscale)
    return CorrelationMatrix(entries, lengthscale=float(lengthscale))


def circulant_from_first_row(row: np.ndarray) -> CirculantSpec:
    """Wrap a first row as a circulant specification.

    Raises ``ValueError`` for an empty row.
    """
    return CirculantSpec(np.asarray(row, dtype=float))


def circulant_eigenvalues(spec: CirculantSpec) -> np.ndarray:
    """Real eigenvalues of a symmetric circulant matrix, sorted descending.

    Requires the first row to be symmetric under index reflection
    (``c_k == c_{d-k}``); an asymmetric row has a genuinely complex spectrum
    and is rejected. The imaginary parts of the DFT are checked against an
    absolute tolerance of 1e-12 before being discarded.
    """
    if not spec.is_symmetric_row():
        raise ValueError(
            "first row is not symmetric under index reflection; "
            "the spectrum is complex and unsupported here"
        )
    eig = spec.eigenvalues
    max_imag = np.abs(eig.imag).max(initial=0.0)
    if max_imag > DFT_IMAG_TOL * max(np.abs(eig.real).max(initial=0.0), 1.0):
        raise ValueError(f"DFT eigenvalues have imaginary parts up to {max_imag:.3e}")
    return np.sort(eig.real)[::-1]


def _as_matrix(m: CorrelationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(m, CorrelationMatrix):
        return m.entries
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def symmetric_sqrt(m: CorrelationMatrix | np.ndarray) -> np.ndarray:
    """Unique symmetric positive semidefinite square root.

    Computed spectrally: eigenvalues are square-rooted and the basis reused.
    Eigenvalues in ``[-1e-12, 0]`` are clamped to zero with a warning (they
    arise from roundoff on nearly singular kernels); eigenvalues below
    ``-1e-12`` raise ``NotPositiveDefiniteError``.
    """
    a = _as_matrix(m)
    w, v = np.linalg.eigh(a)
    if w[0] < -EIG_CLAMP_TOL:
        raise NotPositiveDefiniteError(
            "matrix is not positive semidefinite", min_eigenvalue=float(w[0])
        )
    if w[0] < 0.0:
        warnings.warn(
            f"clamping eigenvalues in [{w[0]:.3e}, 0) to zero for the square root",
            stacklevel=2,
        )
        w = np.clip(w, 0.0, None)
    x = (v * np.sqrt(w)) @ v.T
    return 0.5 * (x + x.T)


def inverse_symmetric_sqrt(m: CorrelationMatrix | np.ndarray) -> np.ndarray:
    """Inverse of the symmetric square root, ``m**(-1/2)``.

    Unlike :func:`symmetric_sqrt`, semidefiniteness is not tolerated: any
    eigenvalue at or below zero is a hard error, since the inverse is
    undefined there.
    """
    a = _as_matrix(m)
    w, v = np.linalg.eigh(a)
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(
            "matrix must be strictly positive definite for an inverse square root",
            min_eigenvalue=float(w[0]),
        )
    x = (v / np.sqrt(w)) @ v.T
    return 0.5 * (x + x.T)


def spd_inverse(m: CorrelationMatrix | np.ndarray) -> np.ndarray:
    """Inverse of an SPD matrix via Cholesky factorization.

    Never inverts an unfactored matrix: the factorization is applied to the
    identity column by column. Factorization failure raises
    ``NotPositiveDefiniteError`` with the offending minimum eigenvalue.
    """
    a = _as_matrix(m)
    try:
        cf = cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        lam_min = float(np.linalg.eigvalsh(a)[0])
        raise NotPositiveDefiniteError(
            "Cholesky factorization failed; matrix is not SPD",
            min_eigenvalue=lam_min,
        ) from None
    inv = cho_solve(cf, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)
