"""Dense density-matrix primitives for small Hilbert spaces.

Matrices are plain complex ``numpy`` arrays. The ``as_*`` validators check
the invariants once at the boundary and return read-only copies, so the rest
of the package can treat them as immutable values.

Two-qubit conventions used throughout:

* computational basis order ``(uu, ud, du, dd)``
* Bell basis order ``(phi+, psi-, phi-, psi+)``
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, InvariantError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_TOL = 1e-12

BELL_LABELS = ("phi_plus", "psi_minus", "phi_minus", "psi_plus")


class Spectrum(NamedTuple):
    """Eigenvalues in ascending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_error(m) -> float:
    a = as_square(m)
    return float(np.max(np.abs(a - a.conj().T)))


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` as a Hermitian observable and return a read-only copy."""
    a = as_square(m)
    if not np.all(np.isfinite(a)):
        raise InvariantError("observable has non-finite entries")
    err = hermiticity_error(a)
    if err > tol:
        raise InvariantError(f"matrix is not Hermitian (max |A - A^H| = {err:.3e})")
    return _frozen(a)


def as_density_matrix(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``m`` as a density matrix: Hermitian, unit trace, PSD."""
    a = as_hermitian(m, tol)
    tr = np.trace(a)
    if abs(tr.real - 1.0) > TRACE_TOL or abs(tr.imag) > TRACE_TOL:
        raise InvariantError(f"trace is {tr:.15g}, expected 1")
    lo = np.linalg.eigvalsh(a)[0]
    if lo < -PSD_TOL:
        raise InvariantError(f"matrix is not positive semidefinite (min eigenvalue {lo:.3e})")
    return a


def hermitian_eigendecompose(h) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = as_hermitian(h)
    w, v = np.linalg.eigh(a)
    return Spectrum(w, v)


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def expectation(rho, observable) -> float:
    """Return Re Tr(rho A)."""
    r = as_square(rho)
    a = as_square(observable)
    _check_same_dim(r, a)
    val = np.einsum("ij,ji->", r, a)
    if abs(val.imag) > 1e-10:
        raise InvariantError(f"Tr(rho A) has imaginary part {val.imag:.3e}")
    return float(val.real)


def _clamped_eigenvalues(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(as_hermitian(rho))
    if w[0] < -PSD_TOL:
        raise InvariantError(f"negative eigenvalue {w[0]:.3e} in density matrix")
    return np.clip(w, 0.0, 1.0)


def shannon_entropy(p) -> float:
    """-sum p ln p with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def von_neumann_entropy(rho) -> float:
    """Entropy -Tr rho ln rho in nats."""
    s = shannon_entropy(_clamped_eigenvalues(rho))
    return max(s, 0.0)


def relative_entropy(rho1, rho2) -> float:
    """Kullback-Leibler divergence ``Tr rho2 (ln rho2 - ln rho1)``.

    Note the argument order: the second state is the one being averaged over.
    Returns ``inf`` when rho2 has weight outside the support of rho1.
    """
    r1 = as_square(rho1)
    r2 = as_square(rho2)
    _check_same_dim(r1, r2)
    p, u = np.linalg.eigh(as_hermitian(r1))
    q, v = np.linalg.eigh(as_hermitian(r2))
    p = np.clip(p, 0.0, 1.0)
    q = np.clip(q, 0.0, 1.0)
    # weight of rho2 on each eigenvector of rho1
    overlap = np.abs(u.conj().T @ v) ** 2
    weight = overlap @ q
    null = p < SUPPORT_TOL
    if np.any(weight[null] > SUPPORT_TOL):
        return float("inf")
    cross = float(np.sum(weight[~null] * np.log(p[~null])))
    return -shannon_entropy(q) - cross


def bell_basis_vectors() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return (phi+, psi-, phi-, psi+) in the computational basis."""
    s = 1.0 / np.sqrt(2.0)
    phi_plus = np.array([s, 0, 0, s], dtype=complex)
    psi_minus = np.array([0, s, -s, 0], dtype=complex)
    phi_minus = np.array([s, 0, 0, -s], dtype=complex)
    psi_plus = np.array([0, s, s, 0], dtype=complex)
    return phi_plus, psi_minus, phi_minus, psi_plus


def bell_basis_matrix() -> np.ndarray:
    """Unitary whose columns are the Bell vectors in fixed order."""
    return np.column_stack(bell_basis_vectors())


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def to_bell_basis(m) -> np.ndarray:
    """Matrix elements <bell_i| M |bell_j>."""
    a = as_square(m)
    if a.shape != (4, 4):
        raise DimensionError("Bell-basis transform needs a 4x4 matrix")
    u = bell_basis_matrix()
    return u.conj().T @ a @ u


def pure_state_fidelity(rho, psi) -> float:
    """<psi| rho |psi> for a normalized ket psi."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ as_square(rho) @ psi))


def partial_transpose(rho, subsystem: str = "second") -> np.ndarray:
    """Partial transpose of a 4x4 operator viewed as acting on 2 (x) 2."""
    a = as_square(rho)
    if a.shape != (4, 4):
        raise DimensionError(f"partial transpose supports 2x2 qubit pairs only, got dim {a.shape[0]}")
    t = a.reshape(2, 2, 2, 2)  # rho[(i j), (k l)] -> t[i, j, k, l]
    if subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', not {subsystem!r}")
    return t.reshape(4, 4).copy()


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)
