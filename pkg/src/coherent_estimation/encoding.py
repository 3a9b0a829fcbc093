"""Linear encodings of real parameters into coherent amplitudes.

An encoding is a complex ``n x n`` matrix ``E`` with ``alpha_i = sum_j E[i, j] a_j``;
row ``i`` is a mode and column ``j`` a parameter. In terms of quadratures,
``E[i, j] = (eps_x + i eps_p) / sqrt(2)`` where ``eps_x`` and ``eps_p`` are the
real coefficients of ``a_j`` in ``x_i`` and ``p_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .phase_space import to_quadratures, total_energy

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EncodingMatrix:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] == 0:
            raise ValueError(f"encoding matrix must be square, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("encoding matrix has non-finite entries")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def modes(self) -> int:
        return self.entries.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    @classmethod
    def from_quadrature_matrix(cls, M) -> "EncodingMatrix":
        """Build from the real ``2n x n`` map from parameters to ``(x1, p1, ...)``."""
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != 2 * M.shape[1]:
            raise ValueError(f"quadrature matrix must have shape (2n, n), got {M.shape}")
        return cls((M[0::2] + 1j * M[1::2]) / np.sqrt(2))

    def quadrature_matrix(self) -> np.ndarray:
        M = np.empty((2 * self.modes, self.modes))
        M[0::2] = np.sqrt(2) * self.entries.real
        M[1::2] = np.sqrt(2) * self.entries.imag
        return M

    @classmethod
    def from_two_mode_constants(cls, eps, eta) -> "EncodingMatrix":
        """From ``eps = (eps_x1, eps_p1, eps_x2, eps_p2)`` and the same for ``eta``."""
        return cls.from_quadrature_matrix(np.column_stack([eps, eta]))

    def two_mode_constants(self) -> tuple[np.ndarray, np.ndarray]:
        if self.modes != 2:
            raise ValueError("real constant view only exists for two modes")
        M = self.quadrature_matrix()
        return M[:, 0], M[:, 1]

    def to_dict(self) -> dict:
        return {
            "modes": self.modes,
            "entries": [[{"re": z.real, "im": z.imag} for z in row] for row in self.entries.tolist()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingMatrix":
        e = np.array([[complex(z["re"], z["im"]) for z in row] for row in d["entries"]])
        if "modes" in d and int(d["modes"]) != e.shape[0]:
            raise ValueError(f"'modes' is {d['modes']} but entries have {e.shape[0]} rows")
        return cls(e)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "EncodingMatrix":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ConstraintReport:
    """Residuals of the energy, equal-precision and attainability conditions.

    ``precision_residuals`` and ``attainability_residuals`` are keyed by
    parameter pair ``(j, k)`` with ``j < k``.
    """

    energy_residuals: tuple[float, ...]
    precision_residuals: dict
    attainability_residuals: dict
    tol: float

    @property
    def max_residual(self) -> float:
        values = [
            *self.energy_residuals,
            *self.precision_residuals.values(),
            *self.attainability_residuals.values(),
        ]
        return max((abs(v) for v in values), default=0.0)

    @property
    def satisfied(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "energy_residuals": list(self.energy_residuals),
            "precision_residuals": [
                {"pair": list(k), "value": v} for k, v in self.precision_residuals.items()
            ],
            "attainability_residuals": [
                {"pair": list(k), "value": v} for k, v in self.attainability_residuals.items()
            ],
            "max_residual": self.max_residual,
            "tol": self.tol,
            "satisfied": self.satisfied,
        }


def encode(E: EncodingMatrix, params) -> np.ndarray:
    """Quadrature means of the product coherent state carrying ``params``."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != E.modes:
        raise ValueError(f"{params.size} parameters given for a {E.modes}-mode encoding")
    return to_quadratures(E.entries @ params)


def check_constraints(E: EncodingMatrix, tol: float = DEFAULT_TOL) -> ConstraintReport:
    """Evaluate the optimality conditions on ``E``.

    All of them hold exactly when ``E`` is unitary: unit-norm columns (energy)
    and vanishing real and imaginary parts of column overlaps (equal precision
    and attainability).
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    gram = E.entries.conj().T @ E.entries
    n = E.modes
    energy = tuple(float(gram[j, j].real - 1.0) for j in range(n))
    precision, attain = {}, {}
    for j in range(n):
        for k in range(j + 1, n):
            precision[(j, k)] = float(gram[j, k].real)
            attain[(j, k)] = float(gram[j, k].imag)
    return ConstraintReport(energy, precision, attain, tol)


def optimal_two_mode_encoding(T: float) -> EncodingMatrix:
    """The one-parameter optimal family decoded by a single beam splitter."""
    _check_T(T)
    st, sr = np.sqrt(2 * T), np.sqrt(2 * (1 - T))
    eps = (st, 0.0, sr, 0.0)
    eta = (0.0, sr, 0.0, -st)
    return EncodingMatrix.from_two_mode_constants(eps, eta)


def general_two_mode_encoding(
    T: float, theta: float, phi: float, psi: float, literal: bool = False
) -> EncodingMatrix:
    """Most general optimal two-mode encoding.

    Decoding: rotate mode 1 by ``-theta`` and mode 2 by ``-phi``, apply the
    beam splitter ``T``, rotate mode 2 by ``-psi``, then read ``x`` on mode 1
    and ``p`` on mode 2. With all angles zero this is
    :func:`optimal_two_mode_encoding`.

    ``literal=True`` instead returns the uncorrected tabulation, whose
    ``eta_p2`` entry repeats a term and whose ``psi`` is offset by ``pi/2``
    (it reads ``x`` on both outputs). It is not unitary for generic angles.
    """
    _check_T(T)
    if literal:
        st, sr = np.sqrt(2 * T), np.sqrt(2 * (1 - T))
        s, c = np.sin, np.cos
        eps = (st * c(theta), st * s(theta), sr * c(phi), sr * s(phi))
        eta = (
            sr * (s(theta) * s(psi) - c(theta) * c(psi)),
            -sr * (s(theta) * c(psi) + c(theta) * s(psi)),
            st * (c(phi) * c(psi) - s(phi) * s(psi)),
            st * (c(phi) * s(psi) + c(phi) * s(psi)),
        )
        return EncodingMatrix.from_two_mode_constants(eps, eta)
    base = optimal_two_mode_encoding(T).entries
    rot = np.array([np.exp(1j * theta), np.exp(1j * phi)])
    return EncodingMatrix(np.column_stack([rot * base[:, 0], np.exp(1j * psi) * rot * base[:, 1]]))


def identical_encoding_report(
    eps_x: float, eps_p: float, eta_x: float, eta_p: float, tol: float = DEFAULT_TOL
) -> ConstraintReport:
    """Constraint residuals when both modes carry the same amplitude.

    The two cross residuals are ``eps_p*eta_p + eps_x*eta_x`` and
    ``eps_p*eta_x - eps_x*eta_p``; their squares sum to
    ``|eps|^2 |eta|^2``, so they cannot both vanish for nonzero rows.
    """
    if eps_x == 0 and eps_p == 0:
        raise ValueError("the first parameter must be encoded (eps row is zero)")
    if eta_x == 0 and eta_p == 0:
        raise ValueError("the second parameter must be encoded (eta row is zero)")
    energy = (
        2 * (eps_x**2 + eps_p**2) - 2,
        2 * (eta_x**2 + eta_p**2) - 2,
    )
    precision = {(0, 1): eps_p * eta_p + eps_x * eta_x}
    attain = {(0, 1): eps_p * eta_x - eps_x * eta_p}
    return ConstraintReport(energy, precision, attain, tol)


def energy_check(r, params, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``sum(x_i^2 + p_i^2) == 2 sum(a_j^2)`` within ``tol``."""
    params = np.asarray(params, dtype=float)
    return abs(total_energy(r) - 2 * float(params @ params)) <= tol


def optimal_ellipse_points(a: float, b: float, T_grid: Sequence[float]) -> list:
    """Phase-space points ``((x1, p1), (x2, p2))`` of the optimal family per ``T``."""
    if a == 0 and b == 0:
        raise ValueError("(a, b) = (0, 0) does not define an encoding family")
    points = []
    for T in T_grid:
        r = encode(optimal_two_mode_encoding(T), (a, b))
        points.append(((r[0], r[1]), (r[2], r[3])))
    return points


def ellipse_residual(x: float, p: float, a: float, b: float) -> float:
    return x**2 / a**2 + p**2 / b**2 - 2


def _check_T(T: float) -> None:
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {T}")


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def unitarity_residual(U) -> float:
    U = np.asarray(U, dtype=complex)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))

