"""Settings negotiation for two arbitrary given coherent states.

Alice holds two coherent states she did not choose. She picks ``(a, b)`` and a
transmittance ``T`` so that the optimal two-mode input for ``(a, b, T)`` has
the same per-mode energies as the given states; the two then differ only by
local phase rotations, which Bob undoes before his beam splitter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .encoding import encode, optimal_two_mode_encoding
from .errors import InfeasibleError, ProtocolError
from .fisher import qcrb, qfim
from .phase_space import apply_phase_rotation, as_quadratures, mode_energies
from .schemes import decode, enhancement_ratio, general_two_mode_scheme
from .simulate import EstimationResult, sample_trials, summarize

MAX_ENHANCEMENT = "max-enhancement"
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class MeasurementSettings:
    T: float
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.T <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {self.T}")

    def to_dict(self) -> dict:
        return {"T": self.T, "theta": self.theta, "phi": self.phi}


@dataclass(frozen=True)
class FeasibleRegion:
    """Allowed ``(a, b)``: ``a^2 + b^2 = radius2`` and ``|a^2 - b^2| >= min_abs_diff``."""

    energies: tuple[float, float]
    radius2: float
    min_abs_diff: float
    equal_energy: bool
    degenerate: bool

    def contains(self, a: float, b: float, tol: float = DEFAULT_TOL) -> bool:
        scale = max(1.0, self.radius2)
        on_circle = abs(a * a + b * b - self.radius2) <= tol * scale
        return on_circle and abs(a * a - b * b) >= self.min_abs_diff - tol * scale


def _two_mode(r) -> np.ndarray:
    r = as_quadratures(r)
    if r.size != 4:
        raise ValueError(f"the protocol works on two modes, got {r.size // 2}")
    return r


def feasible_parameter_region(r, tol: float = DEFAULT_TOL) -> FeasibleRegion:
    e1, e2 = (float(v) for v in mode_energies(_two_mode(r)))
    total = e1 + e2
    return FeasibleRegion(
        energies=(e1, e2),
        radius2=total / 2,
        min_abs_diff=abs(e1 - e2) / 2,
        equal_energy=abs(e1 - e2) <= tol * max(1.0, total),
        degenerate=total == 0.0,
    )


def transmittance_for(r, a: float, b: float, tol: float = DEFAULT_TOL) -> float:
    """Beam-splitter transmittance matching the given per-mode energies.

    Raises :class:`InfeasibleError` when ``(a, b)`` is off the energy circle
    or would need ``|2T - 1| > 1``.
    """
    region = feasible_parameter_region(r, tol)
    e1, e2 = region.energies
    scale = max(1.0, e1 + e2)
    if abs(a * a + b * b - region.radius2) > tol * scale:
        raise InfeasibleError(
            f"a^2 + b^2 = {a * a + b * b} but the given states fix it to {region.radius2}"
        )
    if region.equal_energy:
        return 0.5
    diff = a * a - b * b
    if abs(diff) <= tol * scale:
        raise InfeasibleError("a^2 = b^2 cannot match states of unequal energy")
    u = (e1 - e2) / (2 * diff)
    if abs(u) > 1 + tol:
        raise InfeasibleError(
            f"needs |2T - 1| = {abs(u)} > 1; require |a^2 - b^2| >= {region.min_abs_diff}"
        )
    return float(np.clip(0.5 * (u + 1), 0.0, 1.0))


def rotation_angles(given, optimal, tol: float = DEFAULT_TOL) -> tuple[float, ...]:
    """Per-mode angles rotating ``given`` onto ``optimal``.

    The sign comes from the 2D cross product of the two phase-space points.
    Modes with zero amplitude get angle 0.
    """
    given, optimal = as_quadratures(given), as_quadratures(optimal)
    if given.size != optimal.size:
        raise ValueError("given and optimal states have different mode counts")
    eg, eo = mode_energies(given), mode_energies(optimal)
    if np.any(np.abs(eg - eo) > tol * np.maximum(1.0, eg)):
        raise ValueError(f"per-mode energies differ: {eg.tolist()} vs {eo.tolist()}")
    angles = []
    for m in range(given.size // 2):
        x, p = given[2 * m], given[2 * m + 1]
        xo, po = optimal[2 * m], optimal[2 * m + 1]
        if eg[m] == 0:
            angles.append(0.0)
        else:
            angles.append(float(np.arctan2(x * po - p * xo, x * xo + p * po)))
    return tuple(angles)


@dataclass(frozen=True)
class MaxEnhancementChoice:
    a: float
    b: float
    T: float
    caveat: bool = True
    """``b`` is forced to zero, so only one parameter is actually transmitted."""


def max_enhancement_choice(r) -> MaxEnhancementChoice:
    region = feasible_parameter_region(r)
    if region.degenerate:
        raise ValueError("given states carry no energy")
    e1, e2 = region.energies
    return MaxEnhancementChoice(float(np.sqrt(region.radius2)), 0.0, e1 / (e1 + e2))


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    given_states: np.ndarray
    chosen_params: tuple[float, float]
    settings: MeasurementSettings
    optimal_input: np.ndarray
    estimates: tuple[float, float]
    message_log: tuple[dict, ...]
    caveat: bool
    reconstruction_residual: float
    result: EstimationResult = field(repr=False)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec) + "\n" for rec in self.message_log)

    def to_dict(self) -> dict:
        return {
            "given_states": self.given_states.tolist(),
            "chosen_params": list(self.chosen_params),
            "settings": self.settings.to_dict(),
            "optimal_input": self.optimal_input.tolist(),
            "estimates": list(self.estimates),
            "caveat": self.caveat,
            "reconstruction_residual": self.reconstruction_residual,
            "enhancement_ratio": float(enhancement_ratio(self.settings.T)),
            "result": self.result.to_dict(),
            "messages": list(self.message_log),
        }


def run_protocol(
    given, choice=None, shots: int = 1000, seed: int = 0, trials: int = 1
) -> ProtocolTranscript:
    """Run the four negotiation steps and simulate Bob's measurement.

    ``choice`` is an ``(a, b)`` pair, :data:`MAX_ENHANCEMENT`, or ``None``
    (allowed for equal-energy states, where ``a = b`` is used).
    """
    given = _two_mode(given)
    region = feasible_parameter_region(given)
    if region.degenerate:
        raise ProtocolError("given states carry no energy; nothing can be encoded")

    caveat = False
    if choice is None:
        if not region.equal_energy:
            raise ProtocolError("states of unequal energy need an explicit (a, b) choice")
        a = b = float(np.sqrt(region.radius2 / 2))
    elif isinstance(choice, str):
        if choice != MAX_ENHANCEMENT:
            raise ValueError(f"unknown choice {choice!r}")
        best = max_enhancement_choice(given)
        a, b, caveat = best.a, best.b, best.caveat
    else:
        a, b = (float(v) for v in choice)

    try:
        T = transmittance_for(given, a, b)
    except InfeasibleError as exc:
        raise ProtocolError(str(exc)) from exc

    log = [
        {
            "step": 1,
            "role": "alice",
            "payload": {"a": a, "b": b, "T": T, "equal_energy": region.equal_energy, "caveat": caveat},
        }
    ]
    optimal = encode(optimal_two_mode_encoding(T), (a, b))
    theta, phi = rotation_angles(given, optimal)
    log.append(
        {
            "step": 2,
            "role": "alice",
            "payload": {"optimal_input": optimal.tolist(), "theta": theta, "phi": phi},
        }
    )
    settings = MeasurementSettings(T, theta, phi)
    log.append({"step": 3, "role": "alice", "payload": {"settings": settings.to_dict()}})

    rotated = apply_phase_rotation(apply_phase_rotation(given, 0, theta), 1, phi)
    residual = float(np.max(np.abs(rotated - optimal)))

    # Bob's network: rotate by (theta, phi), beam splitter T, read x and p
    scheme = general_two_mode_scheme(T, -theta, -phi, 0.0)
    out = scheme.network.apply(given)
    samples = sample_trials(out, scheme.readout, shots, trials, seed, 0, 1)
    bound = qcrb(qfim(scheme.encoding), 1)
    result = summarize(decode(scheme, samples), (a, b), bound, bound, {"seed": seed})
    estimates = tuple(float(v) for v in result.mean_estimates)
    log.append(
        {
            "step": 4,
            "role": "bob",
            "payload": {
                "estimates": list(estimates),
                "empirical_variances": None
                if result.empirical_variances is None
                else result.empirical_variances.tolist(),
                "shots": shots,
            },
        }
    )
    return ProtocolTranscript(
        given_states=given,
        chosen_params=(a, b),
        settings=settings,
        optimal_input=optimal,
        estimates=estimates,
        message_log=tuple(log),
        caveat=caveat,
        reconstruction_residual=residual,
        result=result,
    )
