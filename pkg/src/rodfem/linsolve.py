"""Direct solution of banded linear systems.

The step systems produced by the assemblers have O(1) bandwidth when unknowns
are interleaved along the rod, so an LU factorization with partial pivoting in
LAPACK band storage solves them in O(n) time.  Every solve gets one round of
iterative refinement (restoring row-wise backward stability), plus a second
round when the relative residual still exceeds REFINE_TOL.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import AssemblyError, SingularMatrixError, SolverError

#: refinement trigger for the raw back-substitution residual
REFINE_TOL = 1e-12


class BandedMatrix:
    """Square banded matrix in LAPACK band storage.

    Entry (i, j) with -ku <= i - j <= kl lives at data[kl + ku + i - j, j];
    the top kl rows are workspace for factorization fill-in and stay zero
    here.  data is C-ordered so flat scatter indices are (band_row * n + j).
    """

    def __init__(self, n: int, kl: int, ku: int):
        if n < 1 or kl < 0 or ku < 0:
            raise ValueError(f"bad banded shape n={n}, kl={kl}, ku={ku}")
        self.n = n
        self.kl = kl
        self.ku = ku
        self.data = np.zeros((2 * kl + ku + 1, n))

    @classmethod
    def from_dense(cls, a) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"need a square matrix, got shape {a.shape}")
        i, j = np.nonzero(a)
        kl = int(max(np.max(i - j, initial=0), 0))
        ku = int(max(np.max(j - i, initial=0), 0))
        m = cls(a.shape[0], kl, ku)
        m.data[kl + ku + i - j, j] = a[i, j]
        return m

    def flat_indices(self, rows, cols) -> np.ndarray:
        """Scatter positions into data.reshape(-1) for entry (row, col)."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        d = rows - cols
        if d.size and (d.max(initial=0) > self.kl or -d.min(initial=0) > self.ku):
            raise ValueError("entry outside the declared band")
        return (self.kl + self.ku + d) * self.n + cols

    def add_entries(self, rows, cols, vals) -> None:
        np.add.at(self.data.reshape(-1), self.flat_indices(rows, cols), vals)

    def zero(self) -> None:
        self.data[...] = 0.0

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y = A @ x without expanding to a dense matrix.

        The accumulation runs in the dtype of ``x``, so passing an
        extended-precision vector yields an extended-precision product.
        """
        x = np.asarray(x)
        if not np.issubdtype(x.dtype, np.floating):
            x = x.astype(float)
        y = np.zeros(self.n, dtype=x.dtype)
        for r in range(self.kl, self.data.shape[0]):
            d = r - self.kl - self.ku  # i - j on this storage row
            j0 = max(0, -d)
            j1 = min(self.n, self.n - d)
            if j1 > j0:
                y[j0 + d : j1 + d] += self.data[r, j0:j1] * x[j0:j1]
        return y

    def toarray(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for r in range(self.kl, self.data.shape[0]):
            d = r - self.kl - self.ku
            j0 = max(0, -d)
            j1 = min(self.n, self.n - d)
            for j in range(j0, j1):
                a[j + d, j] = self.data[r, j]
        return a

    def row_nonzero_counts(self) -> np.ndarray:
        counts = np.zeros(self.n, dtype=int)
        for r in range(self.kl, self.data.shape[0]):
            d = r - self.kl - self.ku
            j0 = max(0, -d)
            j1 = min(self.n, self.n - d)
            counts[j0 + d : j1 + d] += self.data[r, j0:j1] != 0.0
        return counts


@dataclass
class BandedLU:
    """Factorization handle; keeps the unfactored matrix for residuals."""

    matrix: BandedMatrix
    lu: np.ndarray = field(repr=False)
    ipiv: np.ndarray = field(repr=False)

    def backsolve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.matrix.n,):
            raise SolverError(
                f"right-hand side has shape {b.shape}, expected ({self.matrix.n},)"
            )
        x, info = lapack.dgbtrs(
            self.lu, self.matrix.kl, self.matrix.ku, b.reshape(-1, 1), self.ipiv
        )
        if info != 0:
            raise SolverError(f"banded back-substitution failed (info={info})")
        return x[:, 0]


def factorize(a) -> BandedLU:
    """LU-factorize a banded (or convertible dense) square matrix.

    Partial pivoting is always on; an exact zero pivot surviving the pivot
    search means the matrix is singular.
    """
    m = a if isinstance(a, BandedMatrix) else BandedMatrix.from_dense(a)
    if not np.all(np.isfinite(m.data)):
        raise AssemblyError("matrix contains non-finite entries")
    lu, ipiv, info = lapack.dgbtrf(m.data, m.kl, m.ku)
    if info < 0:
        raise ValueError(f"illegal argument {-info} to banded factorization")
    if info > 0:
        raise SingularMatrixError(
            f"matrix is singular: zero pivot at column {info - 1}"
        )
    return BandedLU(matrix=m, lu=lu, ipiv=ipiv)


def solve(lu: BandedLU, b) -> np.ndarray:
    """Back-solve with iterative refinement.

    One round always runs: partial pivoting bounds the norm-wise residual
    but not the residual of an individual row, and refinement restores
    row-wise backward stability at the cost of one product and one extra
    back-solve.  A second round covers the rare ill-scaled system whose
    refined residual is still above the trigger.
    """
    b = np.asarray(b, dtype=float)
    x = lu.backsolve(b)
    bnorm = np.linalg.norm(b)
    x = x + lu.backsolve(b - lu.matrix.matvec(x))
    r = b - lu.matrix.matvec(x)
    if np.linalg.norm(r) > REFINE_TOL * (bnorm if bnorm > 0.0 else 1.0):
        x = x + lu.backsolve(r)
    return x


def relative_residual(m: BandedMatrix, x: np.ndarray, b: np.ndarray) -> float:
    bnorm = np.linalg.norm(b)
    r = np.linalg.norm(b - m.matvec(x))
    return float(r / bnorm) if bnorm > 0.0 else float(r)
