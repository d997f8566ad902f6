"""Monte Carlo replication harness with reproducible per-replication seeds.

Replication r at size n derives its seed as
`numpy.random.SeedSequence([base_seed, model_tag, n, r])`, so any subset of
replications can be rerun (or run concurrently) and produce bit-identical
estimates.  Raw estimates and summary statistics are emitted as UTF-8 CSV
with LF line endings, written atomically.
"""

from __future__ import annotations

import csv
import io
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats

from .buckley_osthus import DEFAULT_DOMAIN, bo_mle, sigma2_beta
from .errors import ConfigError, ParameterError
from .fileio import atomic_write_text
from .history import HpamParams, community_stats, degree_counts
from .hpam import gamma_mle
from .simulate import simulate_bo, simulate_hpam

__all__ = [
    "ExperimentConfig",
    "SummaryRow",
    "RawEstimate",
    "ExperimentResult",
    "NormalityReport",
    "replication_seed",
    "run_bo_experiment",
    "run_hpam_experiment",
    "normality_diagnostic",
    "resolve_workers",
]

MODEL_TAGS = {"lcd": 0, "bo": 1, "hpam": 2, "general_f": 3}


def replication_seed(base_seed: int, model: str, n: int, r: int) -> np.random.SeedSequence:
    """Stable, documented seed derivation for replication r at size n."""
    return np.random.SeedSequence([int(base_seed), MODEL_TAGS[model], int(n), int(r)])


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else PA_THREADS, else all cores."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("PA_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study: a model, its true parameters, sizes, and seeds."""

    model: str
    true_params: dict
    sample_sizes: tuple[int, ...]
    replications: int
    base_seed: int
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        if self.model not in ("bo", "hpam"):
            raise ConfigError(f"model: must be 'bo' or 'hpam', got {self.model!r}")
        if self.replications < 1:
            raise ConfigError("replications: must be >= 1")
        if not self.sample_sizes:
            raise ConfigError("sample_sizes: must be nonempty")
        if any(b <= a for a, b in zip(self.sample_sizes, self.sample_sizes[1:])):
            raise ConfigError("sample_sizes: must be strictly increasing")
        if any(n < 2 for n in self.sample_sizes):
            raise ConfigError("sample_sizes: every n must be >= 2")
        if self.base_seed < 0:
            raise ConfigError("base_seed: must be nonnegative")
        if self.model == "bo":
            if "a0" not in self.true_params:
                raise ConfigError("true_params.a0: required for the bo model")
            for a0 in self.a0_values():
                if a0 <= 0.0:
                    raise ConfigError("true_params.a0: entries must be positive")
        else:
            try:
                self.hpam_params()
            except (KeyError, ParameterError) as exc:
                raise ConfigError(f"true_params: {exc}") from None

    def a0_values(self) -> tuple[float, ...]:
        raw = self.true_params["a0"]
        if isinstance(raw, (int, float)):
            return (float(raw),)
        return tuple(float(x) for x in raw)

    def hpam_params(self) -> HpamParams:
        return HpamParams(
            pi=np.asarray(self.true_params["pi"], float),
            gamma=np.asarray(self.true_params["gamma"], float),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "true_params": self.true_params,
                "sample_sizes": list(self.sample_sizes),
                "replications": self.replications,
                "base_seed": self.base_seed,
                "output_path": self.output_path,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: not valid JSON ({exc})") from None
        for key in ("model", "true_params", "sample_sizes", "replications", "base_seed"):
            if key not in data:
                raise ConfigError(f"{key}: missing required field")
        return cls(
            model=data["model"],
            true_params=data["true_params"],
            sample_sizes=tuple(data["sample_sizes"]),
            replications=int(data["replications"]),
            base_seed=int(data["base_seed"]),
            output_path=data.get("output_path"),
        )


@dataclass(frozen=True)
class RawEstimate:
    n: int
    replication: int
    parameter: str
    value: float
    converged: bool


@dataclass(frozen=True)
class SummaryRow:
    n: int
    parameter: str
    mean: float
    median: float
    std: float
    count: int


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    raw: tuple[RawEstimate, ...]
    summary: tuple[SummaryRow, ...]
    failures: tuple[tuple[int, int], ...]  # (n, replication) of non-converged fits

    def raw_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "replication", "parameter", "value"])
        for row in self.raw:
            writer.writerow([row.n, row.replication, row.parameter, repr(row.value)])
        return buf.getvalue()

    def summary_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "parameter", "mean", "median", "std", "count"])
        for row in self.summary:
            writer.writerow(
                [row.n, row.parameter, repr(row.mean), repr(row.median), repr(row.std), row.count]
            )
        return buf.getvalue()

    def write(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        atomic_write_text(os.path.join(directory, "raw_estimates.csv"), self.raw_csv_text())
        atomic_write_text(os.path.join(directory, "summary.csv"), self.summary_csv_text())


def _bo_replication(args) -> tuple:
    base_seed, a0, n, r, domain = args
    history = simulate_bo(n, a0, replication_seed(base_seed, "bo", n, r))
    fit = bo_mle(degree_counts(history), domain=domain)
    return (n, r, f"a(a0={a0:g})", fit.a_hat, fit.converged)


def _hpam_replication(args) -> tuple:
    base_seed, pi, gamma, n, r = args
    params = HpamParams(pi=np.asarray(pi), gamma=np.asarray(gamma))
    history = simulate_hpam(n, params, replication_seed(base_seed, "hpam", n, r))
    stats = community_stats(history)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = gamma_mle(stats)
    values = []
    for j in range(params.K):
        values.append((f"pi_{j + 1}", float(fit.pi_hat[j])))
    for i in range(params.K):
        for j in range(i, params.K):
            if i == 0 and j == 0:
                continue  # pinned by normalization
            values.append((f"gamma_{i + 1}{j + 1}", float(fit.gamma_hat[i, j])))
    return (n, r, values, fit.converged)


def _map_tasks(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _summarize(raw: list[RawEstimate], replications: int) -> tuple[SummaryRow, ...]:
    groups: dict[tuple[int, str], list[float]] = {}
    for row in sorted(raw, key=lambda r: (r.n, r.parameter, r.replication)):
        if row.converged:
            groups.setdefault((row.n, row.parameter), []).append(row.value)
    rows = []
    for (n, parameter), values in sorted(groups.items()):
        arr = np.asarray(values)
        if arr.size == 1:
            warnings.warn(
                f"single converged replication for {parameter} at n={n}; std is 0",
                stacklevel=2,
            )
            std = 0.0
        else:
            std = float(arr.std(ddof=1))
        rows.append(
            SummaryRow(
                n=n,
                parameter=parameter,
                mean=float(arr.mean()),
                median=float(np.median(arr)),
                std=std,
                count=int(arr.size),
            )
        )
    return tuple(rows)


def run_bo_experiment(
    config: ExperimentConfig, workers: int | None = None
) -> ExperimentResult:
    """Simulate-and-fit replications per Table-1 layout; one row per (n, a0)."""
    if config.model != "bo":
        raise ParameterError("config.model must be 'bo'")
    workers = resolve_workers(workers if workers is not None else 1)
    tasks = [
        (config.base_seed, a0, n, r, DEFAULT_DOMAIN)
        for a0 in config.a0_values()
        for n in config.sample_sizes
        for r in range(config.replications)
    ]
    raw = []
    failures = []
    for n, r, label, value, converged in _map_tasks(_bo_replication, tasks, workers):
        raw.append(RawEstimate(n, r, label, value, converged))
        if not converged:
            failures.append((n, r))
    raw.sort(key=lambda row: (row.n, row.parameter, row.replication))
    result = ExperimentResult(
        config=config,
        raw=tuple(raw),
        summary=_summarize(raw, config.replications),
        failures=tuple(sorted(failures)),
    )
    if config.output_path:
        result.write(config.output_path)
    return result


def run_hpam_experiment(
    config: ExperimentConfig, workers: int | None = None
) -> ExperimentResult:
    """Simulate-and-fit replications per Table-2 layout: pi then free gammas."""
    if config.model != "hpam":
        raise ParameterError("config.model must be 'hpam'")
    workers = resolve_workers(workers if workers is not None else 1)
    params = config.hpam_params()
    tasks = [
        (config.base_seed, params.pi.tolist(), params.gamma.tolist(), n, r)
        for n in config.sample_sizes
        for r in range(config.replications)
    ]
    raw = []
    failures = []
    for n, r, values, converged in _map_tasks(_hpam_replication, tasks, workers):
        for parameter, value in values:
            raw.append(RawEstimate(n, r, parameter, value, converged))
        if not converged:
            failures.append((n, r))
    raw.sort(key=lambda row: (row.n, row.parameter, row.replication))
    result = ExperimentResult(
        config=config,
        raw=tuple(raw),
        summary=_summarize(raw, config.replications),
        failures=tuple(sorted(failures)),
    )
    if config.output_path:
        result.write(config.output_path)
    return result


@dataclass(frozen=True)
class NormalityReport:
    count: int
    z_mean: float
    z_std: float
    ks_distance: float
    degenerate: bool
    quantiles: tuple[tuple[float, float], ...]  # (normal quantile, sample quantile)

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "z_mean": self.z_mean,
            "z_std": self.z_std,
            "ks_distance": self.ks_distance,
            "degenerate": self.degenerate,
            "quantiles": [list(q) for q in self.quantiles],
        }


def normality_diagnostic(estimates, n: int, a0: float) -> NormalityReport:
    """Standardize sqrt(n) (a_hat - a0) by the asymptotic scale and compare
    the sample against a standard normal."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size < 50:
        raise ParameterError(f"need at least 50 estimates, got {estimates.size}")
    s = sigma2_beta(a0)
    z = np.sqrt(n) * (estimates - a0) * s.beta / np.sqrt(s.sigma2)
    z_std = float(z.std(ddof=1))
    degenerate = bool(np.all(z == z[0]))  # point mass: KS sits at its ceiling
    ks = float(scipy_stats.kstest(z, "norm").statistic)
    probs = np.arange(0.05, 0.951, 0.05)
    theory = scipy_stats.norm.ppf(probs)
    sample = np.quantile(z, probs)
    return NormalityReport(
        count=int(estimates.size),
        z_mean=float(z.mean()),
        z_std=z_std,
        ks_distance=ks,
        degenerate=degenerate,
        quantiles=tuple((float(t), float(q)) for t, q in zip(theory, sample)),
    )
