"""Independent reference computations for the test suite.

Nothing here imports the package under test.
"""

import math

import numpy as np


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each rotation first removes the phase of a[p, q], then applies a real
    Givens rotation. Stops when the off-diagonal Frobenius norm drops below
    tol times max(1, ||a||_F).
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    v = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                phase = np.eye(n, dtype=complex)
                phase[q, q] = np.exp(-1j * np.angle(apq))
                theta = 0.5 * math.atan2(2 * abs(apq), (a[q, q] - a[p, p]).real)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n, dtype=complex)
                rot[p, p], rot[p, q], rot[q, p], rot[q, q] = c, s, -s, c
                u = phase @ rot
                a = u.conj().T @ a @ u
                v = v @ u
    else:
        raise RuntimeError("Jacobi did not converge")
    w = np.diag(a).real
    order = np.argsort(w)
    return w[order], v[:, order]


def partial_transpose_by_index(rho, subsystem="second"):
    """Explicit element-by-element partial transpose on 2 x 2 qubits."""
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    if subsystem == "second":
                        out[2 * i + j, 2 * k + l] = rho[2 * i + l, 2 * k + j]
                    else:
                        out[2 * i + j, 2 * k + l] = rho[2 * k + j, 2 * i + l]
    return out


def ket(*amplitudes):
    return np.array(amplitudes, dtype=complex)


S = 1 / math.sqrt(2)
PHI_PLUS = ket(S, 0, 0, S)
PSI_MINUS = ket(0, S, -S, 0)
PHI_MINUS = ket(S, 0, 0, -S)
PSI_PLUS = ket(0, S, S, 0)


def outer(v):
    return np.outer(v, v.conj())


def bell_operator_from_outer_products():
    """2 sqrt 2 (|phi+><phi+| - |psi-><psi-|) built from hand-written kets."""
    return 2 * math.sqrt(2) * (outer(PHI_PLUS) - outer(PSI_MINUS))


def bell_diagonal_matrix(p):
    return sum(pi * outer(v) for pi, v in zip(p, (PHI_PLUS, PSI_MINUS, PHI_MINUS, PSI_PLUS)))


def entropy_of(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def central_difference(f, x, i, h=1e-6):
    e = np.zeros_like(x)
    e[i] = h
    return (f(x + e) - f(x - e)) / (2 * h)
