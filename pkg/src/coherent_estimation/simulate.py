"""Monte Carlo experiments with simulated homodyne noise.

Randomness comes from numpy's counter-based Philox generator. Every block of
at most ``BLOCK_SHOTS`` shots gets its own stream keyed by
``(stream, trial, block)``, so results do not depend on how blocks are
scheduled across workers.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .encoding import encode, optimal_ellipse_points, optimal_two_mode_encoding
from .fisher import qcrb, qfim
from .phase_space import homodyne_sample
from .schemes import Scheme, decode, enhancement_ratio, individual_variances, two_mode_scheme

BLOCK_SHOTS = 1 << 16
RNG_ALGORITHM = "numpy.random.Philox"
CONFIDENCE = 0.99


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: Scheme
    true_params: tuple[float, ...]
    shots: int
    trials: int = 1
    seed: int = 0
    stream: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "true_params", tuple(float(v) for v in self.true_params))
        if self.shots < 1 or self.trials < 1:
            raise ValueError("shots and trials must be at least 1")
        if len(self.true_params) != self.scheme.modes:
            raise ValueError(
                f"{len(self.true_params)} parameters given for a {self.scheme.modes}-mode scheme"
            )


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Summary of a run.

    ``empirical_variances`` are per-shot variances; ``mean_variances`` are the
    spread of the per-trial averages (needs ``trials >= 2``). Both are
    ``None`` when the data cannot define them.
    """

    true_params: np.ndarray
    mean_estimates: np.ndarray
    empirical_variances: np.ndarray | None
    variance_dof: int
    mean_variances: np.ndarray | None
    qcrb_values: np.ndarray
    reference_variances: np.ndarray
    shots: int
    trials: int
    mean_ci: np.ndarray
    variance_ci: np.ndarray | None
    metadata: dict = field(default_factory=dict)

    @property
    def variance_defined(self) -> bool:
        return self.empirical_variances is not None

    @property
    def saturation_ratios(self) -> np.ndarray | None:
        if self.empirical_variances is None:
            return None
        return self.empirical_variances / self.qcrb_values

    def to_dict(self) -> dict:
        def arr(v):
            return None if v is None else np.asarray(v).tolist()

        return {
            "true_params": arr(self.true_params),
            "mean_estimates": arr(self.mean_estimates),
            "empirical_variances": arr(self.empirical_variances),
            "variance_defined": self.variance_defined,
            "variance_dof": self.variance_dof,
            "mean_variances": arr(self.mean_variances),
            "qcrb_values": arr(self.qcrb_values),
            "reference_variances": arr(self.reference_variances),
            "saturation_ratios": arr(self.saturation_ratios),
            "mean_ci": arr(self.mean_ci),
            "variance_ci": arr(self.variance_ci),
            "shots": self.shots,
            "trials": self.trials,
            "metadata": dict(self.metadata),
        }


def variance_interval(sigma2: float, dof: int, level: float = CONFIDENCE) -> tuple[float, float]:
    """Range a sample variance with ``dof`` degrees of freedom falls in with probability ``level``."""
    lo, hi = stats.chi2.ppf([(1 - level) / 2, (1 + level) / 2], dof)
    return sigma2 * lo / dof, sigma2 * hi / dof


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def sample_trials(
    r, selections: str, shots: int, trials: int, seed: int, stream: int, workers: int
) -> np.ndarray:
    """Homodyne outcomes with shape ``(trials, shots, modes)``."""
    n_blocks = -(-shots // BLOCK_SHOTS)
    jobs = [(t, b) for t in range(trials) for b in range(n_blocks)]

    def run(job):
        t, b = job
        size = min(BLOCK_SHOTS, shots - b * BLOCK_SHOTS)
        return homodyne_sample(r, selections, make_rng(seed, stream, t, b), size)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            blocks = list(pool.map(run, jobs))
    else:
        blocks = [run(job) for job in jobs]
    per_trial = [np.concatenate(blocks[t * n_blocks : (t + 1) * n_blocks]) for t in range(trials)]
    return np.stack(per_trial)


def summarize(
    estimates: np.ndarray,
    true_params,
    qcrb_values,
    reference_variances,
    metadata: dict | None = None,
) -> EstimationResult:
    """Per-shot and per-trial statistics of estimates shaped ``(trials, shots, n)``."""
    trials, shots, n = estimates.shape
    mean = estimates.mean(axis=(0, 1))
    if shots >= 2:
        centered = estimates - estimates.mean(axis=1, keepdims=True)
        dof = trials * (shots - 1)
        var = (centered**2).sum(axis=(0, 1)) / dof
    elif trials >= 2:
        dof = trials - 1
        var = estimates[:, 0, :].var(axis=0, ddof=1)
    else:
        dof, var = 0, None
    mean_var = estimates.mean(axis=1).var(axis=0, ddof=1) if trials >= 2 else None

    z = stats.norm.ppf((1 + CONFIDENCE) / 2)
    if var is not None:
        half = z * np.sqrt(var / (trials * shots))
        mean_ci = np.column_stack([mean - half, mean + half])
        lo, hi = stats.chi2.ppf([(1 - CONFIDENCE) / 2, (1 + CONFIDENCE) / 2], dof)
        var_ci = np.column_stack([var * dof / hi, var * dof / lo])
    else:
        mean_ci = np.column_stack([mean, mean])
        var_ci = None
    return EstimationResult(
        true_params=np.asarray(true_params, dtype=float),
        mean_estimates=mean,
        empirical_variances=var,
        variance_dof=dof,
        mean_variances=mean_var,
        qcrb_values=np.asarray(qcrb_values, dtype=float),
        reference_variances=np.asarray(reference_variances, dtype=float),
        shots=shots,
        trials=trials,
        mean_ci=mean_ci,
        variance_ci=var_ci,
        metadata=dict(metadata or {}),
    )


def run_experiment(config: ExperimentConfig) -> EstimationResult:
    """Encode, decode through the network, sample homodyne outcomes, estimate."""
    scheme = config.scheme
    bound = qcrb(qfim(scheme.encoding), 1)
    out = scheme.output_means(config.true_params)
    samples = sample_trials(
        out, scheme.readout, config.shots, config.trials, config.seed, config.stream, config.workers
    )
    estimates = decode(scheme, samples)
    meta = {
        "rng": RNG_ALGORITHM,
        "seed": config.seed,
        "stream": config.stream,
        "block_shots": BLOCK_SHOTS,
        "readout": scheme.readout,
        "settings": dict(scheme.settings),
    }
    return summarize(estimates, config.true_params, bound, bound, meta)


def run_individual_baseline(
    T: float, params, shots: int, seed: int = 0, trials: int = 1, stream: int = 0
) -> EstimationResult:
    """Measure the optimal-family input directly, without the beam splitter.

    ``x`` is read on the mode where ``a`` has the larger weight and ``p`` on
    the other; each outcome is divided by its encoding coefficient.
    """
    if shots < 1 or trials < 1:
        raise ValueError("shots and trials must be at least 1")
    expected = individual_variances(T)
    E = optimal_two_mode_encoding(T)
    r = encode(E, params)
    i = expected.x_mode
    selections = "xp" if i == 0 else "px"
    samples = sample_trials(r, selections, shots, trials, seed, stream, 1)
    M = E.quadrature_matrix()
    coeff_a = M[2 * i, 0]
    coeff_b = M[2 * (1 - i) + 1, 1]
    # samples are ordered by mode; put them back into parameter order
    raw = samples[..., [i, 1 - i]]
    estimates = raw / np.array([coeff_a, coeff_b])
    bound = qcrb(qfim(E), 1)
    meta = {"rng": RNG_ALGORITHM, "seed": seed, "stream": stream, "x_mode": i, "T": T}
    return summarize(estimates, params, bound, [expected.a, expected.b], meta)


@dataclass(frozen=True)
class CurvePoint:
    T: float
    ratio_analytic: float
    ratio_empirical: float
    ci_low: float
    ci_high: float


def enhancement_curve(
    T_grid: Sequence[float], shots: int, seed: int = 0, params=(2.0, 1.0)
) -> list[CurvePoint]:
    """Analytic and simulated individual/joint variance ratios over ``T_grid``.

    The empirical ratio pools the variances of both parameters; its interval
    comes from the F distribution of a ratio of independent sample variances.
    """
    rows = []
    for k, T in enumerate(T_grid):
        joint = run_experiment(
            ExperimentConfig(two_mode_scheme(T), params, shots, seed=seed, stream=2 * k)
        )
        base = run_individual_baseline(T, params, shots, seed=seed, stream=2 * k + 1)
        if not (joint.variance_defined and base.variance_defined):
            raise ValueError("at least two shots are needed to estimate a variance")
        ratio = float(base.empirical_variances.mean() / joint.empirical_variances.mean())
        d_base, d_joint = 2 * base.variance_dof, 2 * joint.variance_dof
        f_hi = stats.f.ppf((1 + CONFIDENCE) / 2, d_base, d_joint)
        f_lo = stats.f.ppf((1 - CONFIDENCE) / 2, d_base, d_joint)
        ana = float(enhancement_ratio(T))
        rows.append(CurvePoint(float(T), ana, ratio, float(ratio / f_hi), float(ratio / f_lo)))
    return rows


def ellipse_trace(a: float, b: float, T_grid: Sequence[float]) -> list[tuple[float, ...]]:
    """Rows ``(T, x1, p1, x2, p2)`` of the optimal input family."""
    if a == 0 or b == 0:
        raise ValueError("a and b must both be nonzero for the ellipse to exist")
    points = optimal_ellipse_points(a, b, T_grid)
    return [(float(T), *map(float, m1), *map(float, m2)) for T, (m1, m2) in zip(T_grid, points)]


def format_number(v) -> str:
    return format(float(v), ".17g")


def to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


CURVE_COLUMNS = ("T", "ratio_analytic", "ratio_empirical", "ci_low", "ci_high")
ELLIPSE_COLUMNS = ("T", "x1", "p1", "x2", "p2")


def curve_csv(points: Sequence[CurvePoint]) -> str:
    return to_csv(
        CURVE_COLUMNS,
        [(p.T, p.ratio_analytic, p.ratio_empirical, p.ci_low, p.ci_high) for p in points],
    )


def ellipse_csv(rows) -> str:
    return to_csv(ELLIPSE_COLUMNS, rows)
