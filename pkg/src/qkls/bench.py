"""Experiment orchestration for the Krylov solver and the Fourier baseline.

Every sweep point becomes one :class:`ExperimentRecord`. Records are sorted
canonically before output, so a run is reproducible byte for byte (apart
from ``wall_time_ms``) regardless of worker scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .exceptions import ConfigError, InvalidParameterError, NullStateError, QKLSError
from .fourier import (
    FourierSchedule,
    ScheduleConstants,
    apply_fourier,
    calibrate_constants,
    make_schedule,
)
from .hamiltonian import DENSE_QUBIT_CAP, PauliSum, build_ising, calibrate_kappa
from .krylov import KrylovSystem, Source, assemble, solve
from .lcu import apply_lcu_circuit, apply_lcu_direct, error_metric, plan_lcu
from .overlap import ShotModel, f_element_exact, f_element_fd
from .statevector import EvolutionBackend, exact_solution, prepare_b

log = logging.getLogger(__name__)

DEFAULT_KAPPAS = (27.6, 47.6, 134.6, 176.6)
CSV_COLUMNS = (
    "method", "kappa", "tau", "terms", "error", "success_prob",
    "f_condition", "seed", "status", "wall_time_ms",
)
OVERLAP_COLUMNS = ("kappa", "t_fd", "max_element_error")


@dataclass
class ExperimentConfig:
    n: int = 10
    J: float = 0.1
    target_kappas: list[float] = field(default_factory=lambda: list(DEFAULT_KAPPAS))
    tau: float = 1e-3
    M_grid: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256])
    t_fd_grid: list[float] = field(default_factory=lambda: [round(0.01 * i, 2) for i in range(1, 11)])
    overlap_tau: float = 0.1
    overlap_k_max: int = 8
    source: str = "exact"
    t_fd: float = 0.01
    shots: Optional[int] = None
    seed: int = 0
    epsilon_targets: list[float] = field(default_factory=lambda: [0.1, 0.05, 0.02, 0.01])
    fourier_truncations: list[list[int]] = field(
        default_factory=lambda: [[1, 1], [2, 1], [2, 2], [4, 2], [4, 4], [8, 4], [8, 8]]
    )
    fourier_constants: Optional[dict] = None
    svd_threshold: Optional[float] = None
    reconstruction: str = "direct"
    evolution: str = "exact"
    trotter_steps: int = 100
    workers: int = 1
    output_path: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        for name in ("target_kappas", "M_grid", "t_fd_grid", "epsilon_targets"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
        if not 1 <= self.n <= DENSE_QUBIT_CAP:
            raise ConfigError(f"n must lie in [1, {DENSE_QUBIT_CAP}]")
        if any(k <= 1 for k in self.target_kappas):
            raise ConfigError("every target kappa must exceed 1")
        if any(int(m) < 1 for m in self.M_grid):
            raise ConfigError("M_grid entries must be >= 1")
        if not self.tau > 0 or not self.overlap_tau > 0:
            raise ConfigError("time steps must be positive")
        if any(t <= 0 for t in self.t_fd_grid) or not self.t_fd > 0:
            raise ConfigError("finite-difference times must be positive")
        if any(not 0 < e < 1 for e in self.epsilon_targets):
            raise ConfigError("epsilon targets must lie in (0, 1)")
        if self.source not in ("exact", "finite-difference"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.shots is not None and self.shots <= 0:
            raise ConfigError("shots must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentRecord:
    method: str
    kappa: float
    tau: float
    terms: int
    error: float
    success_prob: Optional[float] = None
    f_condition: Optional[float] = None
    seed: int = 0
    status: str = "ok"
    wall_time_ms: float = 0.0
    meta: dict = field(default_factory=dict)

    def sort_key(self):
        return (self.method, self.kappa, self.terms)

    def row(self) -> list[str]:
        fmt = lambda v: "n/a" if v is None else repr(float(v))  # noqa: E731
        return [
            self.method, repr(float(self.kappa)), repr(float(self.tau)), str(self.terms),
            fmt(self.error), fmt(self.success_prob), fmt(self.f_condition),
            str(self.seed), self.status, f"{self.wall_time_ms:.3f}",
        ]


@dataclass
class OverlapRecord:
    kappa: float
    t_fd: float
    max_element_error: float


@dataclass
class Instance:
    """Calibrated benchmark problem for one target condition number."""

    kappa: float
    eta: float
    zeta: float
    h: PauliSum
    b: np.ndarray
    x_ref: np.ndarray


def make_instance(n: int, J: float, kappa: float) -> Instance:
    eta, zeta = calibrate_kappa(n, J, kappa)
    h = build_ising(n, J, eta, zeta)
    b = prepare_b(n)
    return Instance(kappa, eta, zeta, h, b, exact_solution(h, b))


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _failed(method: str, kappa: float, tau: float, terms: int, seed: int, exc: Exception) -> ExperimentRecord:
    log.warning("%s point kappa=%s terms=%s failed: %s", method, kappa, terms, exc)
    return ExperimentRecord(method, kappa, tau, terms, math.nan, seed=seed, status=f"failed: {exc}")


def leading_system(system: KrylovSystem, M: int) -> KrylovSystem:
    """Projected system of the first ``M`` basis states (a leading block)."""
    return KrylovSystem(M, system.tau, system.F[:M, :M].copy(), system.s[:M].copy(),
                        system.source, system.element_std_error)


def qkls_point(inst: Instance, system: KrylovSystem, config: ExperimentConfig,
               backend: EvolutionBackend) -> ExperimentRecord:
    start = time.perf_counter()
    M = system.M
    try:
        result = solve(system, config.svd_threshold)
        if config.reconstruction == "circuit":
            outcome = apply_lcu_circuit(inst.h, inst.b, plan_lcu(result.c), config.tau, backend)
        else:
            outcome = apply_lcu_direct(inst.h, inst.b, result.c, config.tau, backend)
    except (QKLSError, np.linalg.LinAlgError) as exc:
        return _failed("QKLS", inst.kappa, config.tau, M, config.seed, exc)
    return ExperimentRecord(
        "QKLS", inst.kappa, config.tau, M, error_metric(outcome.state, inst.x_ref),
        outcome.success_prob, result.f_condition, config.seed,
        wall_time_ms=1e3 * (time.perf_counter() - start),
        meta={
            "c": [[float(z.real), float(z.imag)] for z in result.c],
            "truncated_rank": result.truncated_rank,
            "residual": result.residual,
        },
    )


def _qkls_for_kappa(config: ExperimentConfig, inst: Instance) -> list[ExperimentRecord]:
    backend = EvolutionBackend(config.evolution, config.trotter_steps)
    source = Source(config.source, config.t_fd, config.shots, config.seed)
    M_max = max(config.M_grid)
    try:
        full = assemble(inst.h, inst.b, M_max, config.tau, source, backend)
    except (QKLSError, np.linalg.LinAlgError) as exc:
        return [_failed("QKLS", inst.kappa, config.tau, M, config.seed, exc) for M in config.M_grid]
    return [qkls_point(inst, leading_system(full, M), config, backend) for M in sorted(set(config.M_grid))]


def fourier_schedules(config: ExperimentConfig, kappa: float,
                      constants: ScheduleConstants) -> list[FourierSchedule]:
    scheds = [make_schedule(kappa, eps, constants) for eps in config.epsilon_targets]
    base = scheds[0]
    scheds += [base.truncated(int(j), int(k)) for j, k in config.fourier_truncations]
    return scheds


def fourier_point(inst: Instance, sched: FourierSchedule, config: ExperimentConfig) -> ExperimentRecord:
    start = time.perf_counter()
    meta = {"schedule": sched.to_dict()}
    try:
        state, terms = apply_fourier(inst.h, inst.b, sched)
        err = error_metric(state, inst.x_ref)
    except NullStateError:
        # zero output has zero overlap with the reference
        terms, err = sched.term_count, 1.0
        meta["null_approximant"] = True
    except (QKLSError, np.linalg.LinAlgError) as exc:
        return _failed("Fourier", inst.kappa, config.tau, sched.term_count, config.seed, exc)
    return ExperimentRecord(
        "Fourier", inst.kappa, config.tau, terms, err, seed=config.seed,
        wall_time_ms=1e3 * (time.perf_counter() - start), meta=meta,
    )


def resolve_constants(config: ExperimentConfig) -> ScheduleConstants:
    if config.fourier_constants:
        return ScheduleConstants(**config.fourier_constants)
    return calibrate_constants()


def _canonical(records: Iterable[ExperimentRecord]) -> list[ExperimentRecord]:
    return sorted(records, key=lambda r: r.sort_key())


def run_qkls(config: ExperimentConfig, instances: Optional[dict] = None) -> list[ExperimentRecord]:
    config.validate()
    instances = instances or build_instances(config)
    groups = _map(lambda k: _qkls_for_kappa(config, instances[k]), list(config.target_kappas), config.workers)
    return _canonical(r for g in groups for r in g)


def run_fourier(config: ExperimentConfig, instances: Optional[dict] = None,
                constants: Optional[ScheduleConstants] = None) -> list[ExperimentRecord]:
    config.validate()
    instances = instances or build_instances(config)
    constants = constants or resolve_constants(config)
    jobs = [(k, s) for k in config.target_kappas for s in fourier_schedules(config, k, constants)]
    recs = _map(lambda job: fourier_point(instances[job[0]], job[1], config), jobs, config.workers)
    return _canonical(recs)


def build_instances(config: ExperimentConfig) -> dict[float, Instance]:
    return {k: make_instance(config.n, config.J, k) for k in config.target_kappas}


def run_compare(config: ExperimentConfig) -> tuple[list[ExperimentRecord], dict]:
    """Both methods on a shared kappa grid, plus run metadata."""
    config.validate()
    instances = build_instances(config)
    constants = resolve_constants(config)
    records = _canonical(run_qkls(config, instances) + run_fourier(config, instances, constants))
    return records, run_metadata(config, instances, constants, records)


def run_overlap_study(config: ExperimentConfig) -> list[OverlapRecord]:
    """Worst finite-difference element error over ``k = 0..k_max`` per ``(kappa, t_fd)``."""
    config.validate()
    shot_model = None if config.shots is None else ShotModel(config.shots, config.seed)
    backend = EvolutionBackend(config.evolution, config.trotter_steps)
    out = []
    for kappa in config.target_kappas:
        inst = make_instance(config.n, config.J, kappa)
        ks = range(config.overlap_k_max + 1)
        exact = [f_element_exact(inst.h, inst.b, 0, k, config.overlap_tau) for k in ks]
        for t_fd in config.t_fd_grid:
            errs = [
                abs(f_element_fd(inst.h, inst.b, 0, k, config.overlap_tau, t_fd, shot_model, backend).value - ex)
                for k, ex in zip(ks, exact)
            ]
            out.append(OverlapRecord(kappa, t_fd, max(errs)))
    return sorted(out, key=lambda r: (r.kappa, r.t_fd))


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line; returns ``(slope, intercept, r_squared)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def min_terms_reaching(records: Iterable[ExperimentRecord], method: str, kappa: float,
                       threshold: float) -> Optional[int]:
    hits = [r.terms for r in records
            if r.method == method and r.kappa == kappa and r.status == "ok" and r.error <= threshold]
    return min(hits) if hits else None


def compare_ordering(records: Sequence[ExperimentRecord], kappa: float) -> dict:
    """Check that QKLS is no worse than Fourier at shared evolution-operator counts.

    A Fourier point with ``T`` terms is comparable when QKLS has a grid point
    with ``M <= T``; it is compared against the QKLS point with the largest
    such ``M``. The crossover is the smallest comparable ``T`` where QKLS wins;
    every comparable point from there on must satisfy the ordering.
    """
    q = sorted((r.terms, r.error) for r in records
               if r.method == "QKLS" and r.kappa == kappa and r.status == "ok")
    f = sorted((r.terms, r.error) for r in records
               if r.method == "Fourier" and r.kappa == kappa and r.status == "ok")
    if not q or not f:
        return {"kappa": kappa, "comparable": [], "crossover": None, "holds": False}
    q_max = q[-1][0]
    pairs = []
    for terms, f_err in f:
        if terms > q_max:
            continue
        M, q_err = max((m, e) for m, e in q if m <= terms) if any(m <= terms for m, _ in q) else (None, None)
        if M is not None:
            pairs.append({"terms": terms, "M": M, "qkls_error": q_err, "fourier_error": f_err})
    wins = [p["terms"] for p in pairs if p["qkls_error"] <= p["fourier_error"]]
    crossover = min(wins) if wins else None
    violations = [p for p in pairs if crossover is not None and p["terms"] >= crossover
                  and p["qkls_error"] > p["fourier_error"]]
    return {
        "kappa": kappa,
        "comparable": pairs,
        "crossover": crossover,
        "violations": violations,
        "holds": crossover is not None and not violations,
    }


def complexity_report(d: float, kappa: float, epsilon: float, N: float) -> dict[str, Any]:
    """Asymptotic query and gate counts of both methods with unit constants.

    Logarithms are natural; the values only fix the shape of each expression.
    """
    if not (d > 0 and kappa > 0 and N > 0 and 0 < epsilon < 1):
        raise InvalidParameterError("require d, kappa, N > 0 and 0 < epsilon < 1")
    l_eps = math.log(1.0 / epsilon)
    l_ke = math.log(kappa / epsilon)
    l_n = math.log(N)
    values = {
        "qkls_query": d * kappa * l_eps * l_ke,
        "qkls_gate": d * kappa * l_eps**2 * (l_n + l_eps**2.5),
        "fourier_query": d * kappa**2 * l_eps**2.5,
        "fourier_gate": d * kappa**2 * l_ke**2.5 * (l_n + l_ke**2.5),
    }
    values["query_ratio"] = values["fourier_query"] / values["qkls_query"]
    values["gate_ratio"] = values["fourier_gate"] / values["qkls_gate"]
    return {"inputs": {"d": d, "kappa": kappa, "epsilon": epsilon, "N": N}, **values}


def format_complexity(report: dict) -> str:
    inp = report["inputs"]
    lines = [
        "# natural logarithms, all hidden constants set to 1",
        f"# d={inp['d']} kappa={inp['kappa']} epsilon={inp['epsilon']} N={inp['N']}",
        f"{'method':<10}{'query':>16}{'gate':>16}",
        f"{'QKLS':<10}{report['qkls_query']:>16.6g}{report['qkls_gate']:>16.6g}",
        f"{'Fourier':<10}{report['fourier_query']:>16.6g}{report['fourier_gate']:>16.6g}",
        f"{'ratio F/Q':<10}{report['query_ratio']:>16.6g}{report['gate_ratio']:>16.6g}",
    ]
    return "\n".join(lines)


def run_metadata(config: ExperimentConfig, instances: dict[float, Instance],
                 constants: Optional[ScheduleConstants], records: Sequence[ExperimentRecord]) -> dict:
    return {
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "calibration": {str(k): {"eta": inst.eta, "zeta": inst.zeta} for k, inst in instances.items()},
        "schedule_constants": None if constants is None else asdict(constants),
        "records": [{**asdict(r)} for r in records],
    }


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def overlap_to_csv(records: Iterable[OverlapRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(OVERLAP_COLUMNS)
    for r in records:
        writer.writerow([repr(r.kappa), repr(r.t_fd), repr(r.max_element_error)])
    return buf.getvalue()


def read_records_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def write_outputs(path: str | Path, csv_text: str, metadata: Optional[dict] = None) -> tuple[Path, Optional[Path]]:
    """Write the CSV and, when given, a sibling ``.json`` metadata file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text)
    meta_path = None
    if metadata is not None:
        meta_path = path.with_suffix(".json")
        meta_path.write_text(json.dumps(metadata, indent=2, default=_json_default))
    return path, meta_path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def recompute_error(record: dict, config: ExperimentConfig, constants: Optional[ScheduleConstants] = None) -> float:
    """Recompute a serialized record's error from its coefficients or schedule."""
    inst = make_instance(config.n, config.J, float(record["kappa"]))
    meta = record["meta"]
    if record["method"] == "QKLS":
        c = np.array([complex(re, im) for re, im in meta["c"]])
        state = apply_lcu_direct(inst.h, inst.b, c, float(record["tau"])).state
    else:
        sd = dict(meta["schedule"])
        sd.pop("term_count", None)
        sd["constants"] = ScheduleConstants(**sd["constants"])
        try:
            state, _ = apply_fourier(inst.h, inst.b, FourierSchedule(**sd))
        except NullStateError:
            return 1.0
    return error_metric(state, inst.x_ref)
