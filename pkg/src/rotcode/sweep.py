"""Sweep harness: noise grids, per-family optimization, and persistent results.

The experiment loop is: for every noise point on a log-spaced grid and every
code family, evaluate the SDP-optimal recovery fidelity across that family's
parameter set (K for binomial/random, alpha for cat, a trial budget for the
random families), keep the best record per family, and compare families —
including the "does anything beat the trivial code here" mask.

Determinism contract: every random draw is keyed by a canonical string
(family, N, K, noise point, trial) hashed into an independent stream of the
master seed, so results are identical regardless of evaluation order or
worker count.  Evaluations are cached on disk keyed by a content hash of
everything that determines them.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from rotcode import __version__
from rotcode.channel_metrics import floored_infidelity
from rotcode.haar_sampling import SeededRng
from rotcode.noise_channel import NoisePoint, loss_dephasing_channel
from rotcode.optimal_recovery import (
    SolverTolerances,
    build_recovery_problem,
    solve_optimal_recovery,
)
from rotcode.rotation_codes import (
    Code,
    avg_photon,
    binomial_code,
    cat_code,
    rand_code_from_streams,
    trivial_code,
)

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "DEFAULT_SEED",
    "FAMILY_ORDER",
    "SweepConfig",
    "SweepRecord",
    "PhaseCell",
    "RecordCache",
    "noise_grid",
    "evaluate_point",
    "optimize_family",
    "phase_diagram",
    "rebuild_code",
    "write_records_csv",
    "write_summary_csv",
    "write_compare_csv",
    "write_manifest",
    "read_records_csv",
]

SCHEMA_VERSION = 1
DEFAULT_SEED = 2024

CSV_COLUMNS = [
    "family",
    "N",
    "param",
    "seed0",
    "seed1",
    "kappa_l_t",
    "kappa_phi_t",
    "cutoff_D",
    "fidelity",
    "infidelity",
    "nbar_code",
    "solver_status",
    "runtime_ms",
]

FAMILY_ORDER = {"TRIV": 0, "BIN": 1, "CAT": 2, "RAND1": 3, "RAND2": 4}


def _fmt(value: float) -> str:
    """Serialize a float with 17 significant digits (round-trips float64)."""
    return f"{value:.17g}"


def noise_grid(min: float, max: float, points_per_decade: int) -> list[float]:
    """Logarithmically spaced noise strengths.

    Values are ``10**(log10(min) + k / points_per_decade)`` with the count
    chosen so the top value lands within half a step of ``max`` — the default
    (1e-3, 0.25, 5) gives the 13 values 10^-3, 10^-2.8, ..., 10^-0.6.  ``max``
    is a nominal endpoint: the last grid value is the nearest on-grid decade
    fraction.
    """
    if not (0 < min < max):
        raise ValueError(f"need 0 < min < max, got min={min}, max={max}")
    if points_per_decade < 1:
        raise ValueError(f"points_per_decade must be >= 1, got {points_per_decade}")
    count = int(round(points_per_decade * np.log10(max / min))) + 1
    exponent = np.log10(min)
    return [float(10.0 ** (exponent + k / points_per_decade)) for k in range(count)]


def _default_cat_grid() -> tuple:
    return tuple(
        float(a) for a in np.logspace(np.log10(0.5), np.log10(4.0), 20)
    )


@dataclass
class SweepConfig:
    """Everything that determines a sweep, and therefore its cache keys."""

    families: tuple = ("TRIV", "BIN", "CAT", "RAND1", "RAND2")
    N_set: tuple = (2, 3, 4)
    bin_K_range: tuple = (1, 8)
    cat_alpha_grid: tuple = field(default_factory=_default_cat_grid)
    rand_K_range: tuple = (1, 6)
    trials: int = 50
    noise_min: float = 1e-3
    noise_max: float = 0.25
    points_per_decade: int = 5
    kl_axis: tuple | None = None
    kphi_axis: tuple | None = None
    master_seed: int = DEFAULT_SEED
    output_dir: str | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        self.families = tuple(f.upper() for f in self.families)
        if not self.families:
            raise ValueError("families must be non-empty")
        unknown = [f for f in self.families if f not in FAMILY_ORDER]
        if unknown:
            raise ValueError(f"unknown families: {unknown}")
        if not self.N_set:
            raise ValueError("N_set must be non-empty")
        if any(n not in (2, 3, 4) for n in self.N_set):
            raise ValueError(f"N_set must be a subset of {{2,3,4}}, got {self.N_set}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def kl_values(self) -> list[float]:
        if self.kl_axis is not None:
            return [float(v) for v in self.kl_axis]
        return noise_grid(self.noise_min, self.noise_max, self.points_per_decade)

    def kphi_values(self) -> list[float]:
        if self.kphi_axis is not None:
            return [float(v) for v in self.kphi_axis]
        return noise_grid(self.noise_min, self.noise_max, self.points_per_decade)


@dataclass
class SweepRecord:
    """One evaluation: a code at a noise point with its optimal-recovery result."""

    family: str
    N: int
    param: str
    seed0: int | None
    seed1: int | None
    kappa_l_t: float
    kappa_phi_t: float
    cutoff_D: int
    fidelity: float
    infidelity: float
    nbar_code: float
    solver_status: str
    runtime_ms: float

    def sort_key(self) -> tuple:
        return (
            self.kappa_l_t,
            self.kappa_phi_t,
            FAMILY_ORDER.get(self.family, 99),
            self.N,
            self.param,
            -1 if self.seed0 is None else self.seed0,
            -1 if self.seed1 is None else self.seed1,
        )

    def to_csv_row(self) -> list[str]:
        return [
            self.family,
            str(self.N),
            self.param,
            "" if self.seed0 is None else str(self.seed0),
            "" if self.seed1 is None else str(self.seed1),
            _fmt(self.kappa_l_t),
            _fmt(self.kappa_phi_t),
            str(self.cutoff_D),
            _fmt(self.fidelity),
            _fmt(self.infidelity),
            _fmt(self.nbar_code),
            self.solver_status,
            _fmt(self.runtime_ms),
        ]

    @classmethod
    def from_csv_row(cls, row: list[str]) -> "SweepRecord":
        return cls(
            family=row[0],
            N=int(row[1]),
            param=row[2],
            seed0=int(row[3]) if row[3] else None,
            seed1=int(row[4]) if row[4] else None,
            kappa_l_t=float(row[5]),
            kappa_phi_t=float(row[6]),
            cutoff_D=int(row[7]),
            fidelity=float(row[8]),
            infidelity=float(row[9]),
            nbar_code=float(row[10]),
            solver_status=row[11],
            runtime_ms=float(row[12]),
        )


def _param_descriptor(code: Code) -> str:
    if "K" in code.params:
        return f"K={code.params['K']}"
    if "alpha" in code.params:
        return f"alpha={_fmt(code.params['alpha'])}"
    return "-"


def evaluate_point(
    code: Code,
    noise: NoisePoint,
    tolerances: SolverTolerances | None = None,
) -> SweepRecord:
    """Evaluate one code at one noise point with the SDP-optimal recovery.

    Solver failures are recorded in the ``solver_status`` field (fidelity NaN)
    rather than raised, so sweeps keep going past bad cells.
    """
    import time

    start = time.perf_counter()
    tolerances = tolerances or SolverTolerances()
    channel = loss_dephasing_channel(noise, code.dim)
    try:
        problem = build_recovery_problem(code, channel, tolerances)
        solution = solve_optimal_recovery(problem)
        status = solution.solver_status
        fidelity = solution.fidelity
    except ValueError as exc:
        status = "failed"
        fidelity = float("nan")
        _ = exc
    runtime_ms = (time.perf_counter() - start) * 1e3
    return SweepRecord(
        family=code.family,
        N=code.N,
        param=_param_descriptor(code),
        seed0=code.seeds[0] if len(code.seeds) > 0 else None,
        seed1=code.seeds[1] if len(code.seeds) > 1 else None,
        kappa_l_t=noise.kappa_l_t,
        kappa_phi_t=noise.kappa_phi_t,
        cutoff_D=code.dim,
        fidelity=fidelity,
        infidelity=floored_infidelity(fidelity) if status != "failed" else float("nan"),
        nbar_code=avg_photon(code),
        solver_status=status,
        runtime_ms=runtime_ms,
    )


# ---------------------------------------------------------------------------
# Caching
# ---------------------------------------------------------------------------


def _record_cache_key(code: Code, noise: NoisePoint, tolerances: SolverTolerances) -> str:
    parts = [
        code.family,
        str(code.N),
        _param_descriptor(code),
        ",".join(str(s) for s in code.seeds),
        _fmt(noise.kappa_l_t),
        _fmt(noise.kappa_phi_t),
        str(code.dim),
        _fmt(tolerances.feasibility),
        _fmt(tolerances.gap),
        _fmt(tolerances.support_threshold),
    ]
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()


class RecordCache:
    """Disk-backed record cache: JSON-lines of {key, record-fields}.

    The parent process is the single writer; workers only read a snapshot.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self.entries: dict[str, SweepRecord] = {}
        self.hits = 0
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    payload = json.loads(line)
                    self.entries[payload["key"]] = SweepRecord(**payload["record"])

    def get(self, key: str) -> SweepRecord | None:
        record = self.entries.get(key)
        if record is not None:
            self.hits += 1
        return record

    def put(self, key: str, record: SweepRecord) -> None:
        if key in self.entries:
            return
        self.entries[key] = record
        if self.path:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps({"key": key, "record": asdict(record)}) + "\n"
                )


def _evaluate_cached(
    code: Code,
    noise: NoisePoint,
    tolerances: SolverTolerances,
    cache: RecordCache | None,
) -> SweepRecord:
    if cache is None:
        return evaluate_point(code, noise, tolerances)
    key = _record_cache_key(code, noise, tolerances)
    record = cache.get(key)
    if record is None:
        record = evaluate_point(code, noise, tolerances)
        cache.put(key, record)
    return record


# ---------------------------------------------------------------------------
# Per-family optimization and the phase diagram
# ---------------------------------------------------------------------------


def _family_candidates(
    family: str, N: int, noise: NoisePoint, config: SweepConfig
) -> list[Code]:
    """The parameter set of one family at one noise point, in parameter order."""
    family = family.upper()
    if family == "TRIV":
        return [trivial_code()]
    if family == "BIN":
        lo, hi = config.bin_K_range
        return [binomial_code(N, K) for K in range(lo, hi + 1)]
    if family == "CAT":
        return [cat_code(N, alpha) for alpha in config.cat_alpha_grid]
    if family in ("RAND1", "RAND2"):
        lo, hi = config.rand_K_range
        codes = []
        for K in range(lo, hi + 1):
            for trial in range(config.trials):
                key = (
                    f"{family}|N={N}|K={K}|kl={_fmt(noise.kappa_l_t)}"
                    f"|kphi={_fmt(noise.kappa_phi_t)}|trial={trial}"
                )
                rng = SeededRng.from_key(config.master_seed, key)
                if family == "RAND1":
                    codes.append(rand_code_from_streams("RAND1", N, K, None, rng))
                else:
                    codes.append(
                        rand_code_from_streams(
                            "RAND2", N, K, None, rng.child(0), rng.child(1)
                        )
                    )
        return codes
    raise ValueError(f"unknown family {family!r}")


def _better(candidate: tuple, incumbent: tuple) -> bool:
    """Compare (floored_infidelity, nbar, param_index) tuples."""
    return candidate < incumbent


def optimize_family(
    family: str,
    N: int,
    noise: NoisePoint,
    config: SweepConfig,
    cache: RecordCache | None = None,
    collect: list | None = None,
) -> SweepRecord:
    """Best record of one family at one noise point.

    The argmin of floored infidelity over the family's parameter set; ties
    break toward smaller mean photon number, then smaller parameter index.
    If every evaluation failed, the first (flagged) record is returned.
    ``collect``, when given, receives every evaluated record.
    """
    tolerances = SolverTolerances()
    best_record = None
    best_key = None
    for index, code in enumerate(_family_candidates(family, N, noise, config)):
        record = _evaluate_cached(code, noise, tolerances, cache)
        if collect is not None:
            collect.append(record)
        if record.solver_status == "failed":
            if best_record is None:
                best_record = record
                best_key = (float("inf"), float("inf"), index)
            continue
        key = (record.infidelity, record.nbar_code, index)
        if best_key is None or _better(key, best_key):
            best_record, best_key = record, key
    if best_record is None:
        raise ValueError(f"family {family} produced no candidates")
    return best_record


@dataclass
class PhaseCell:
    """All per-family bests at one noise point, plus the comparisons."""

    kappa_l_t: float
    kappa_phi_t: float
    family_best: dict
    winner: str
    trivial_wins: bool | None
    diffs: dict


def _best_over_n(
    family: str,
    noise: NoisePoint,
    config: SweepConfig,
    cache: RecordCache | None,
    collect: list | None,
) -> SweepRecord:
    """Family best across the configured N values (TRIV has no N to scan)."""
    n_values = [2] if family == "TRIV" else list(config.N_set)
    best = None
    best_key = None
    for n in n_values:
        record = optimize_family(family, n, noise, config, cache, collect)
        if record.solver_status == "failed":
            if best is None:
                best, best_key = record, (float("inf"), float("inf"), n)
            continue
        key = (record.infidelity, record.nbar_code, n)
        if best_key is None or key < best_key:
            best, best_key = record, key
    return best


def _evaluate_cell(
    config: SweepConfig, noise: NoisePoint, cache: RecordCache | None
) -> tuple:
    records: list[SweepRecord] = []
    family_best: dict[str, SweepRecord] = {}
    for family in sorted(config.families, key=FAMILY_ORDER.get):
        family_best[family] = _best_over_n(family, noise, config, cache, records)
    usable = {
        fam: rec
        for fam, rec in family_best.items()
        if rec is not None and rec.solver_status != "failed"
    }
    if usable:
        winner = min(
            usable, key=lambda fam: (usable[fam].infidelity, FAMILY_ORDER[fam])
        )
        for fam, rec in usable.items():
            if usable[winner].infidelity > rec.infidelity:  # pragma: no cover
                raise RuntimeError("winner dominance violated")
    else:
        winner = ""
    trivial_wins = None
    if "TRIV" in usable:
        trivial_inf = usable["TRIV"].infidelity
        trivial_wins = not any(
            rec.infidelity < trivial_inf
            for fam, rec in usable.items()
            if fam != "TRIV"
        )
    diffs = {}
    families = sorted(usable, key=FAMILY_ORDER.get)
    for i, fam_a in enumerate(families):
        for fam_b in families[i + 1 :]:
            fa, fb = usable[fam_a].fidelity, usable[fam_b].fidelity
            diffs[f"{fam_a}|{fam_b}"] = (fa - fb) / max(fa, fb)
    cell = PhaseCell(
        kappa_l_t=noise.kappa_l_t,
        kappa_phi_t=noise.kappa_phi_t,
        family_best=family_best,
        winner=winner,
        trivial_wins=trivial_wins,
        diffs=diffs,
    )
    return cell, records


_worker_cache: RecordCache | None = None
_worker_cache_path: str | None = None


def _cell_task(args: tuple) -> tuple:
    """Worker entry: evaluate one grid cell against a read-only cache snapshot."""
    global _worker_cache
    config, kl, kphi, cache_path = args
    if _worker_cache is None or _worker_cache_path != cache_path:
        snapshot = RecordCache(cache_path) if cache_path else RecordCache()
        snapshot.path = None  # workers never write; the parent is the single writer
        _worker_cache = snapshot
    return _evaluate_cell(config, NoisePoint(kl, kphi), _worker_cache)


def phase_diagram(
    config: SweepConfig, cache: RecordCache | None = None
) -> tuple[list[PhaseCell], list[SweepRecord]]:
    """Evaluate the full noise grid.

    Returns the cells (sorted by noise point) and every evaluated record
    (sorted by record key), identically for any worker count.
    """
    points = [
        (kl, kphi) for kl in config.kl_values() for kphi in config.kphi_values()
    ]
    cells: list[PhaseCell] = []
    records: list[SweepRecord] = []
    if config.jobs <= 1 or len(points) <= 1:
        own_cache = cache
        if own_cache is None and config.output_dir:
            own_cache = RecordCache(os.path.join(config.output_dir, "cache.jsonl"))
        for kl, kphi in points:
            cell, cell_records = _evaluate_cell(config, NoisePoint(kl, kphi), own_cache)
            cells.append(cell)
            records.extend(cell_records)
    else:
        cache_path = None
        if cache is not None and cache.path:
            cache_path = cache.path
        elif config.output_dir:
            cache_path = os.path.join(config.output_dir, "cache.jsonl")
            if not os.path.exists(cache_path):
                cache_path = None
        tasks = [(config, kl, kphi, cache_path) for kl, kphi in points]
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for cell, cell_records in pool.map(_cell_task, tasks):
                cells.append(cell)
                records.extend(cell_records)
        writer = cache
        if writer is None and config.output_dir:
            writer = RecordCache(os.path.join(config.output_dir, "cache.jsonl"))
        if writer is not None:
            tolerances = SolverTolerances()
            for record in records:
                writer.put(_merge_key(record, tolerances), record)
    cells.sort(key=lambda c: (c.kappa_l_t, c.kappa_phi_t))
    records.sort(key=SweepRecord.sort_key)
    return cells, records


def _merge_key(record: SweepRecord, tolerances: SolverTolerances) -> str:
    parts = [
        record.family,
        str(record.N),
        record.param,
        ",".join(
            str(s) for s in (record.seed0, record.seed1) if s is not None
        ),
        _fmt(record.kappa_l_t),
        _fmt(record.kappa_phi_t),
        str(record.cutoff_D),
        _fmt(tolerances.feasibility),
        _fmt(tolerances.gap),
        _fmt(tolerances.support_threshold),
    ]
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()


def rebuild_code(record: SweepRecord, master_seed: int) -> Code:
    """Reconstruct the exact code behind a record (for audits and reuse)."""
    family = record.family
    if family == "TRIV":
        return trivial_code(record.cutoff_D)
    if family == "BIN":
        k = int(record.param.split("=", 1)[1])
        return binomial_code(record.N, k, record.cutoff_D)
    if family == "CAT":
        alpha = float(record.param.split("=", 1)[1])
        return cat_code(record.N, alpha, record.cutoff_D)
    if family in ("RAND1", "RAND2"):
        k = int(record.param.split("=", 1)[1])
        stream_zero = SeededRng(master_seed, record.seed0)
        stream_one = (
            SeededRng(master_seed, record.seed1) if record.seed1 is not None else None
        )
        return rand_code_from_streams(
            family, record.N, k, record.cutoff_D, stream_zero, stream_one
        )
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def write_records_csv(records: list[SweepRecord], path: str) -> None:
    """Append records to the bulk CSV, writing the header for a new file."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as handle:
        if new_file:
            handle.write(",".join(CSV_COLUMNS) + "\n")
        for record in records:
            handle.write(",".join(record.to_csv_row()) + "\n")


def read_records_csv(path: str) -> list[SweepRecord]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    if not lines or lines[0].split(",") != CSV_COLUMNS:
        raise ValueError(f"{path} does not carry the sweep record schema")
    return [SweepRecord.from_csv_row(line.split(",")) for line in lines[1:]]


SUMMARY_COLUMNS = [
    "schema_version",
    "kappa_l_t",
    "kappa_phi_t",
    "family",
    "N",
    "param",
    "seed0",
    "seed1",
    "cutoff_D",
    "fidelity",
    "infidelity",
    "nbar_code",
    "solver_status",
    "winner",
    "trivial_wins",
]

COMPARE_COLUMNS = [
    "schema_version",
    "kappa_l_t",
    "kappa_phi_t",
    "family_a",
    "family_b",
    "fidelity_a",
    "fidelity_b",
    "rel_diff",
    "trivial_wins",
]


def write_summary_csv(cells: list[PhaseCell], path: str) -> None:
    """One row per (noise point, family): the family-best record plus the
    cell's winner and trivial-wins flag."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(SUMMARY_COLUMNS) + "\n")
        for cell in cells:
            mask = "" if cell.trivial_wins is None else str(int(cell.trivial_wins))
            for family in sorted(cell.family_best, key=FAMILY_ORDER.get):
                record = cell.family_best[family]
                if record is None:
                    continue
                row = [
                    str(SCHEMA_VERSION),
                    _fmt(cell.kappa_l_t),
                    _fmt(cell.kappa_phi_t),
                    family,
                    str(record.N),
                    record.param,
                    "" if record.seed0 is None else str(record.seed0),
                    "" if record.seed1 is None else str(record.seed1),
                    str(record.cutoff_D),
                    _fmt(record.fidelity),
                    _fmt(record.infidelity),
                    _fmt(record.nbar_code),
                    record.solver_status,
                    cell.winner,
                    mask,
                ]
                handle.write(",".join(row) + "\n")


def write_compare_csv(
    cells: list[PhaseCell], family_a: str, family_b: str, path: str
) -> None:
    """Pairwise relative fidelity difference per cell, with trivial-wins flag."""
    family_a, family_b = family_a.upper(), family_b.upper()
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(COMPARE_COLUMNS) + "\n")
        for cell in cells:
            rec_a = cell.family_best.get(family_a)
            rec_b = cell.family_best.get(family_b)
            if rec_a is None or rec_b is None:
                continue
            if rec_a.solver_status == "failed" or rec_b.solver_status == "failed":
                continue
            fa, fb = rec_a.fidelity, rec_b.fidelity
            rel = (fa - fb) / max(fa, fb)
            mask = "" if cell.trivial_wins is None else str(int(cell.trivial_wins))
            row = [
                str(SCHEMA_VERSION),
                _fmt(cell.kappa_l_t),
                _fmt(cell.kappa_phi_t),
                family_a,
                family_b,
                _fmt(fa),
                _fmt(fb),
                _fmt(rel),
                mask,
            ]
            handle.write(",".join(row) + "\n")


def write_manifest(config: SweepConfig, path: str) -> None:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": asdict(config),
        "kl_axis": [_fmt(v) for v in config.kl_values()],
        "kphi_axis": [_fmt(v) for v in config.kphi_values()],
        "solver_tolerances": asdict(SolverTolerances()),
        "csv_columns": CSV_COLUMNS,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
