"""Optimal encode/decode schemes and the individual-measurement baseline.

Every scheme here is built from its decoding network: if the network maps
mode amplitudes by the unitary ``W`` and the readout selects ``x`` or ``p``
on each output, the encoding is ``W^dagger diag(1 or i)``, so the noiseless
decoded quadratures are exactly ``sqrt(2) * params``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .encoding import (
    EncodingMatrix,
    encode,
    general_two_mode_encoding,
    optimal_two_mode_encoding,
    unitarity_residual,
)
from .phase_space import (
    BeamSplitter,
    NetworkElement,
    PhaseRotation,
    apply_mode_unitary,
    apply_network,
    element_from_dict,
    network_matrix,
    selected_means,
)

ESTIMATOR_SCALE = np.sqrt(2)
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DecodingNetwork:
    """Either an ordered list of optical elements or an explicit mode unitary."""

    elements: tuple[NetworkElement, ...] = ()
    unitary: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.unitary is not None:
            if self.elements:
                raise ValueError("give either network elements or a unitary, not both")
            u = np.array(self.unitary, dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ValueError(f"unitary must be square, got shape {u.shape}")
            if unitarity_residual(u) > UNITARY_TOL:
                raise ValueError("decoding matrix is not unitary")
            u.flags.writeable = False
            object.__setattr__(self, "unitary", u)

    def matrix(self, n: int) -> np.ndarray:
        if self.unitary is not None:
            if self.unitary.shape[0] != n:
                raise ValueError(f"unitary acts on {self.unitary.shape[0]} modes, not {n}")
            return self.unitary
        return network_matrix(self.elements, n)

    def apply(self, r) -> np.ndarray:
        if self.unitary is not None:
            return apply_mode_unitary(r, self.unitary)
        return apply_network(r, self.elements)

    def to_list(self) -> list[dict]:
        if self.unitary is not None:
            entries = [[{"re": z.real, "im": z.imag} for z in row] for row in self.unitary.tolist()]
            return [{"type": "unitary", "entries": entries}]
        return [el.to_dict() for el in self.elements]

    @classmethod
    def from_list(cls, items: list[dict]) -> "DecodingNetwork":
        if len(items) == 1 and items[0].get("type") == "unitary":
            u = [[complex(z["re"], z["im"]) for z in row] for row in items[0]["entries"]]
            return cls(unitary=np.array(u))
        return cls(tuple(element_from_dict(d) for d in items))


@dataclass(frozen=True, eq=False)
class Scheme:
    encoding: EncodingMatrix
    network: DecodingNetwork
    readout: str
    scale: tuple[float, ...]
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.encoding.modes
        if len(self.readout) != n or set(self.readout) - {"x", "p"}:
            raise ValueError(f"readout {self.readout!r} does not fit {n} modes")
        if len(self.scale) != n:
            raise ValueError("one estimator scale per parameter is required")

    @property
    def modes(self) -> int:
        return self.encoding.modes

    def encode(self, params) -> np.ndarray:
        return encode(self.encoding, params)

    def output_means(self, params) -> np.ndarray:
        """Means after the decoding network, before homodyne detection."""
        return self.network.apply(self.encode(params))

    def readout_means(self, params) -> np.ndarray:
        return selected_means(self.output_means(params), self.readout)

    def to_dict(self) -> dict:
        return {
            "encoding": self.encoding.to_dict(),
            "network": self.network.to_list(),
            "readout": self.readout,
            "scale": list(self.scale),
            "settings": dict(self.settings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scheme":
        encoding = EncodingMatrix.from_dict(d["encoding"])
        scale = tuple(d.get("scale", [ESTIMATOR_SCALE] * encoding.modes))
        return cls(
            encoding,
            DecodingNetwork.from_list(d["network"]),
            d["readout"],
            scale,
            dict(d.get("settings", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Scheme":
        return cls.from_dict(json.loads(text))


def _readout_phases(readout: str) -> np.ndarray:
    return np.array([1.0 if q == "x" else 1j for q in readout])


def scheme_from_network(network: DecodingNetwork, readout: str, settings=None) -> Scheme:
    """The unique encoding that the given network and readout decode optimally."""
    n = len(readout)
    W = network.matrix(n)
    E = EncodingMatrix(W.conj().T * _readout_phases(readout))
    return Scheme(E, network, readout, (ESTIMATOR_SCALE,) * n, dict(settings or {}))


def two_mode_scheme(T: float) -> Scheme:
    """Beam splitter of transmittance ``T`` then ``x`` on mode 1 and ``p`` on mode 2."""
    return Scheme(
        optimal_two_mode_encoding(T),
        DecodingNetwork((BeamSplitter((0, 1), T),)),
        "xp",
        (ESTIMATOR_SCALE,) * 2,
        {"kind": "two", "T": T},
    )


def general_two_mode_scheme(T: float, theta: float, phi: float, psi: float = 0.0) -> Scheme:
    """Two-mode scheme with local phases before and after the beam splitter."""
    network = DecodingNetwork(
        (
            PhaseRotation(0, -theta),
            PhaseRotation(1, -phi),
            BeamSplitter((0, 1), T),
            PhaseRotation(1, -psi),
        )
    )
    return Scheme(
        general_two_mode_encoding(T, theta, phi, psi),
        network,
        "xp",
        (ESTIMATOR_SCALE,) * 2,
        {"kind": "general-two", "T": T, "theta": theta, "phi": phi, "psi": psi},
    )


def three_mode_phase(T2: float, b: float, c: float) -> float:
    """Phase-shifter angle between the two beam splitters of the three-mode scheme.

    Satisfies ``tan(phi) = (b/c) sqrt(T2/(1-T2))`` with the quadrant fixed by
    the signs of ``b`` and ``c``. The shifter rotates mode 2 by ``-phi``.
    """
    if not 0.0 <= T2 <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {T2}")
    y, x = np.sqrt(T2) * b, np.sqrt(1 - T2) * c
    if x == 0 and y == 0:
        if T2 in (0.0, 1.0):
            return 0.0
        raise ValueError("phase is undefined for b = c = 0")
    return float(np.arctan2(y, x))


def three_mode_optimal_input(T1: float, T2: float, a: float, b: float, c: float) -> np.ndarray:
    """Input quadratures of the three-mode scheme written out directly."""
    d = np.sqrt(T2 * b**2 + (1 - T2) * c**2)
    return np.array(
        [
            np.sqrt(2 * T1) * a,
            np.sqrt(2 * (1 - T1)) * d,
            np.sqrt(2 * (1 - T1)) * a,
            -np.sqrt(2 * T1) * d,
            np.sqrt(2 * (1 - T2)) * b,
            -np.sqrt(2 * T2) * c,
        ]
    )


def three_mode_scheme(T1: float, T2: float, b: float, c: float) -> Scheme:
    """Two chained beam splitters with a phase shifter on the middle mode.

    ``b`` and ``c`` are the design values that fix the phase; the resulting
    encoding reproduces the closed-form optimal input exactly at them and
    stays optimal (unitary) for every other parameter value.
    """
    for T in (T1, T2):
        if not 0.0 <= T <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {T}")
    phi = three_mode_phase(T2, b, c)
    network = DecodingNetwork(
        (BeamSplitter((0, 1), T1), PhaseRotation(1, -phi), BeamSplitter((1, 2), T2))
    )
    d = float(np.sqrt(T2 * b**2 + (1 - T2) * c**2))
    return scheme_from_network(
        network, "xxp", {"kind": "three", "T1": T1, "T2": T2, "b": b, "c": c, "phi": phi, "d": d}
    )


def n_mode_scheme(U) -> Scheme:
    """Encode with the unitary ``U``; decode with ``U^-1`` and ``x`` homodyne everywhere."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"U must be square, got shape {U.shape}")
    if unitarity_residual(U) > UNITARY_TOL:
        raise ValueError("U is not unitary")
    n = U.shape[0]
    return Scheme(
        EncodingMatrix(U),
        DecodingNetwork(unitary=U.conj().T),
        "x" * n,
        (ESTIMATOR_SCALE,) * n,
        {"kind": "n"},
    )


def decode(scheme: Scheme, samples) -> np.ndarray:
    """Estimates ``sample / scale`` in parameter order; works on batches too."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != scheme.modes:
        raise ValueError(f"expected {scheme.modes} samples per shot, got {samples.shape[-1]}")
    return samples / np.asarray(scheme.scale)


def partition_modes(n: int) -> list[tuple[int, ...]]:
    """Split ``n`` modes into pairs, with one triple at the end when ``n`` is odd."""
    if n < 2:
        raise ValueError("at least two modes are needed to estimate parameters jointly")
    blocks = [(i, i + 1) for i in range(0, n - 3 if n % 2 else n, 2)]
    if n % 2:
        blocks.append((n - 3, n - 2, n - 1))
    return blocks


class IndividualVariances(NamedTuple):
    a: float
    b: float
    x_mode: int
    """Mode whose ``x`` is measured; ``p`` is read on the other one."""


def individual_variances(T: float) -> IndividualVariances:
    """Variances of estimating ``a`` and ``b`` without the beam splitter."""
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {T}")
    v = 1.0 / (2 + abs(2 - 4 * T))
    return IndividualVariances(v, v, 0 if T >= 0.5 else 1)


def enhancement_ratio(T: float | Sequence[float]):
    T_arr = np.asarray(T, dtype=float)
    if np.any((T_arr < 0) | (T_arr > 1)):
        raise ValueError("transmittance must lie in [0, 1]")
    ratio = 2.0 / (1.0 + np.abs(1.0 - 2.0 * T_arr))
    return float(ratio) if ratio.ndim == 0 else ratio
