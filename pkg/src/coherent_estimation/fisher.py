"""Quantum Fisher information for parameters linearly encoded in coherent states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import EncodingMatrix
from .errors import SingularQFIM
from .phase_space import coherent_overlap

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class QFIM:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"QFIM must be square, got shape {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def params(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class SLDCoefficients:
    """Coefficient vector of each parameter's SLD; column ``j`` of the encoding."""

    coefficients: np.ndarray

    @classmethod
    def from_encoding(cls, E: EncodingMatrix) -> "SLDCoefficients":
        return cls(E.entries.copy())

    def for_parameter(self, j: int) -> np.ndarray:
        return self.coefficients[:, j]


def single_mode_qfim(mode_row) -> np.ndarray:
    """2x2 QFIM contributed by one mode, from its two encoding entries.

    For entries ``(eps_x + i eps_p)/sqrt(2)`` and ``(eta_x + i eta_p)/sqrt(2)``
    this is ``2 [[|eps|^2, eps.eta], [eps.eta, |eta|^2]]``. Its determinant
    ``4 (eps_p eta_x - eps_x eta_p)^2`` vanishes whenever the single-mode
    attainability condition holds.
    """
    e = np.asarray(mode_row, dtype=complex).reshape(-1)
    if e.size != 2:
        raise ValueError("a mode row holds exactly two parameter entries")
    return 4 * np.real(np.outer(e.conj(), e))


def qfim(E: EncodingMatrix) -> QFIM:
    """Closed form ``F_jk = 4 Re sum_i conj(E_ij) E_ik``."""
    return QFIM(4 * np.real(E.entries.conj().T @ E.entries))


def qfim_by_modes(E: EncodingMatrix) -> QFIM:
    """Same matrix assembled mode by mode (additivity over a product state)."""
    n = E.modes
    F = np.zeros((n, n))
    for row in E.entries:
        F += 4 * np.real(np.outer(row.conj(), row))
    return QFIM(F)


def two_mode_abc(E: EncodingMatrix) -> tuple[float, float, float]:
    """The ``A, B, C`` entries with ``F = 2 [[A, C], [C, B]]``."""
    eps, eta = E.two_mode_constants()
    return float(eps @ eps), float(eta @ eta), float(eps @ eta)


def two_mode_eigenvalues(A: float, B: float, C: float) -> tuple[float, float]:
    """Eigenvalues of ``[[A, C], [C, B]]``; the two-mode QFIM has ``2 lambda``."""
    if A < 0 or B < 0:
        raise ValueError("A and B are sums of squares and cannot be negative")
    disc = (A + B) ** 2 + 4 * (C**2 - A * B)
    assert disc >= -1e-12 * max(1.0, (A + B) ** 2), "discriminant (A-B)^2 + 4C^2 went negative"
    root = np.sqrt(max(disc, 0.0))
    return (A + B + root) / 2, (A + B - root) / 2


def qcrb(F: QFIM | np.ndarray, N: int = 1) -> np.ndarray:
    """Lower bounds ``(F^-1)_ii / N`` on the estimator variances."""
    if N < 1:
        raise ValueError("number of repetitions must be at least 1")
    m = F.matrix if isinstance(F, QFIM) else np.asarray(F, dtype=float)
    n = m.shape[0]
    scale = np.linalg.norm(m, 2)
    if scale == 0 or abs(np.linalg.det(m)) < SINGULAR_RTOL * scale**n:
        raise SingularQFIM("QFIM is singular: the parameters cannot all be estimated")
    return np.diag(np.linalg.inv(m)) / N


def sld_commutator_trace(E: EncodingMatrix, j: int, k: int) -> float:
    """Expectation of the commutator of the SLDs of parameters ``j`` and ``k``.

    Equals ``2 Im sum_i conj(E_ij) E_ik``; for two modes this is
    ``eps_x1 eta_p1 - eps_p1 eta_x1 + eps_x2 eta_p2 - eps_p2 eta_x2``.
    The bound for ``j`` and ``k`` is jointly attainable iff it vanishes.
    """
    if j == k:
        raise ValueError("the commutator trace needs two different parameters")
    c = SLDCoefficients.from_encoding(E)
    return float(2 * np.imag(np.vdot(c.for_parameter(j), c.for_parameter(k))))


def _product_overlap(alpha, beta) -> complex:
    out = 1.0 + 0.0j
    for a, b in zip(alpha, beta):
        out *= coherent_overlap(a, b)
    return out


def numerical_qfim(E: EncodingMatrix, params, step: float = 1e-4, richardson: bool = False) -> QFIM:
    """Finite-difference QFIM of the pure product state, from overlaps only.

    Evaluates ``4 Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>]`` with
    central differences; each derivative inner product is a combination of
    overlaps between coherent states at shifted parameters.

    The truncation error grows like ``step**2 * |E|**4``. With ``richardson``
    the differences at ``step`` and ``step/2`` are combined to cancel it.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    params = np.asarray(params, dtype=float).reshape(-1)
    n = E.modes
    if params.size != n:
        raise ValueError(f"{params.size} parameters given for a {n}-mode encoding")
    coarse = _central_qfim(E.entries, params, step)
    if not richardson:
        return QFIM(coarse)
    fine = _central_qfim(E.entries, params, step / 2)
    return QFIM((4 * fine - coarse) / 3)


def _central_qfim(entries, params, step):
    n = params.size
    base = entries @ params
    plus = [entries @ (params + d) for d in step * np.eye(n)]
    minus = [entries @ (params - d) for d in step * np.eye(n)]

    # <psi|d_j psi>
    first = np.array(
        [(_product_overlap(base, plus[j]) - _product_overlap(base, minus[j])) / (2 * step) for j in range(n)]
    )
    F = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            dd = (
                _product_overlap(plus[i], plus[j])
                - _product_overlap(plus[i], minus[j])
                - _product_overlap(minus[i], plus[j])
                + _product_overlap(minus[i], minus[j])
            ) / (4 * step**2)
            F[i, j] = F[j, i] = 4 * np.real(dd - np.conj(first[i]) * first[j])
    return F
