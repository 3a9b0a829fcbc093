"""Phase-space description of product coherent states.

A state of ``n`` modes is carried by its real quadrature means ordered
``(x1, p1, ..., xn, pn)`` in units where ``[x, p] = i``. Passive optics only
moves these means around; the covariance of every coherent state stays
``I/2`` and is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

#: Homodyne noise variance of a coherent state, per quadrature.
VACUUM_VARIANCE = 0.5


def as_quadratures(values) -> np.ndarray:
    """Validate and copy a quadrature vector into a read-only float array."""
    r = np.array(values, dtype=float).reshape(-1)
    if r.size == 0 or r.size % 2:
        raise ValueError(f"quadrature vector needs an even, nonzero length, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise ValueError("quadrature vector has non-finite entries")
    r.flags.writeable = False
    return r


def num_modes(r) -> int:
    return len(r) // 2


def to_amplitudes(r) -> np.ndarray:
    """Complex amplitudes ``alpha = (x + i p) / sqrt(2)`` of every mode."""
    r = np.asarray(r, dtype=float)
    return (r[0::2] + 1j * r[1::2]) / np.sqrt(2)


def to_quadratures(alpha) -> np.ndarray:
    """Inverse of :func:`to_amplitudes`."""
    alpha = np.asarray(alpha, dtype=complex).reshape(-1)
    r = np.empty(2 * alpha.size)
    r[0::2] = np.sqrt(2) * alpha.real
    r[1::2] = np.sqrt(2) * alpha.imag
    return as_quadratures(r)


def _check_mode(mode: int, n: int) -> None:
    if not 0 <= mode < n:
        raise ValueError(f"mode index {mode} out of range for {n} modes")


@dataclass(frozen=True)
class PhaseRotation:
    """Counterclockwise rotation of one mode by ``angle`` radians."""

    mode: int
    angle: float

    def validate(self, n: int) -> None:
        _check_mode(self.mode, n)

    def inverse(self) -> "PhaseRotation":
        return PhaseRotation(self.mode, -self.angle)

    def mode_matrix(self, n: int) -> np.ndarray:
        self.validate(n)
        u = np.eye(n, dtype=complex)
        u[self.mode, self.mode] = np.exp(1j * self.angle)
        return u

    def to_dict(self) -> dict:
        return {"type": "phase", "mode": self.mode, "angle": self.angle}


@dataclass(frozen=True)
class BeamSplitter:
    """Beam splitter of transmittance ``T`` between ``modes = (i, j)``.

    Acts on both quadratures with ``[[sqrt(T), sqrt(1-T)], [sqrt(1-T), -sqrt(T)]]``,
    which is its own inverse.
    """

    modes: tuple[int, int]
    T: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        if len(self.modes) != 2 or self.modes[0] == self.modes[1]:
            raise ValueError(f"beam splitter needs two distinct modes, got {self.modes}")
        if not 0.0 <= self.T <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {self.T}")

    def validate(self, n: int) -> None:
        for m in self.modes:
            _check_mode(m, n)

    def inverse(self) -> "BeamSplitter":
        return self

    def mode_matrix(self, n: int) -> np.ndarray:
        self.validate(n)
        i, j = self.modes
        t, s = np.sqrt(self.T), np.sqrt(1.0 - self.T)
        u = np.eye(n, dtype=complex)
        u[i, i], u[i, j] = t, s
        u[j, i], u[j, j] = s, -t
        return u

    def to_dict(self) -> dict:
        return {"type": "bs", "modes": list(self.modes), "T": self.T}


NetworkElement = Union[PhaseRotation, BeamSplitter]


def element_from_dict(d: dict) -> NetworkElement:
    kind = d.get("type")
    if kind == "phase":
        return PhaseRotation(int(d["mode"]), float(d["angle"]))
    if kind == "bs":
        return BeamSplitter(tuple(d["modes"]), float(d["T"]))
    raise ValueError(f"unknown network element type {kind!r}")


def apply_phase_rotation(r, mode: int, angle: float) -> np.ndarray:
    r = as_quadratures(r)
    _check_mode(mode, num_modes(r))
    out = r.copy()
    x, p = r[2 * mode], r[2 * mode + 1]
    c, s = np.cos(angle), np.sin(angle)
    out[2 * mode] = x * c - p * s
    out[2 * mode + 1] = x * s + p * c
    out.flags.writeable = False
    return out


def apply_beam_splitter(r, modes: tuple[int, int], T: float) -> np.ndarray:
    bs = BeamSplitter(modes, T)
    r = as_quadratures(r)
    bs.validate(num_modes(r))
    i, j = bs.modes
    t, s = np.sqrt(T), np.sqrt(1.0 - T)
    out = r.copy()
    for q in (0, 1):
        a, b = r[2 * i + q], r[2 * j + q]
        out[2 * i + q] = t * a + s * b
        out[2 * j + q] = s * a - t * b
    out.flags.writeable = False
    return out


def apply_element(r, element: NetworkElement) -> np.ndarray:
    if isinstance(element, PhaseRotation):
        return apply_phase_rotation(r, element.mode, element.angle)
    if isinstance(element, BeamSplitter):
        return apply_beam_splitter(r, element.modes, element.T)
    raise TypeError(f"not a network element: {element!r}")


def apply_network(r, network: Sequence[NetworkElement]) -> np.ndarray:
    """Apply ``network`` left to right."""
    r = as_quadratures(r)
    n = num_modes(r)
    for element in network:
        element.validate(n)
    for element in network:
        r = apply_element(r, element)
    return r


def invert_network(network: Sequence[NetworkElement]) -> list[NetworkElement]:
    return [element.inverse() for element in reversed(network)]


def network_matrix(network: Sequence[NetworkElement], n: int) -> np.ndarray:
    """The ``n x n`` unitary the network applies to mode amplitudes."""
    u = np.eye(n, dtype=complex)
    for element in network:
        u = element.mode_matrix(n) @ u
    return u


def apply_mode_unitary(r, U) -> np.ndarray:
    """Apply a passive transformation given as a unitary on amplitudes."""
    U = np.asarray(U, dtype=complex)
    alpha = to_amplitudes(as_quadratures(r))
    if U.shape != (alpha.size, alpha.size):
        raise ValueError(f"unitary of shape {U.shape} does not act on {alpha.size} modes")
    return to_quadratures(U @ alpha)


def selected_means(r, selections: str) -> np.ndarray:
    """Means of the quadrature chosen per mode (``"x"`` or ``"p"``)."""
    r = as_quadratures(r)
    if len(selections) != num_modes(r):
        raise ValueError(
            f"need one selection per mode: {len(selections)} given for {num_modes(r)} modes"
        )
    idx = []
    for mode, q in enumerate(selections):
        if q not in ("x", "p"):
            raise ValueError(f"quadrature selection must be 'x' or 'p', got {q!r}")
        idx.append(2 * mode + (q == "p"))
    return r[idx]


def homodyne_sample(r, selections: str, rng: np.random.Generator, shots: int | None = None):
    """Draw homodyne outcomes of the selected quadratures.

    Each outcome is Gaussian around the quadrature mean with variance 1/2.
    Returns one value per mode, or an array of shape ``(shots, modes)``.
    """
    means = selected_means(r, selections)
    size = means.shape if shots is None else (shots, means.size)
    return means + np.sqrt(VACUUM_VARIANCE) * rng.standard_normal(size)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Inner product ``exp(-|a|^2/2 - |b|^2/2 + conj(a) b)`` of two coherent states."""
    alpha, beta = complex(alpha), complex(beta)
    # same exponent regrouped so the modulus never exceeds 1 through rounding
    return np.exp(-0.5 * abs(alpha - beta) ** 2 + 1j * (alpha.conjugate() * beta).imag)


def total_energy(r) -> float:
    """Sum of ``x_i^2 + p_i^2`` over all modes."""
    r = np.asarray(r, dtype=float)
    return float(r @ r)


def mode_energies(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return r[0::2] ** 2 + r[1::2] ** 2
