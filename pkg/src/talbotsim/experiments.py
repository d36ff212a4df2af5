"""Orchestrated parameter sweeps.

Three studies, all reproducible bit-for-bit from a config and a master
seed: phase-noise accuracy vs oversampling ratio, phase noise vs comb
width per dispersion characteristic, and per-line delay-plan
differences between characteristics.

Per-point seeds derive from (master seed, experiment id, point index,
seed index), so results do not depend on execution order or worker
count.  Within one sweep point the same synthesized carrier is shared
by all dispersion kinds (paired comparison).
"""

from __future__ import annotations

import hashlib
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import phase_noise_spectrum
from .dispersion import DelayPlan, DispersionSpec, delay_plan, offset_difference
from .errors import BudgetError, ConfigError
from .model import CombSpec, SampledSignal, SimGrid, build_grid, comb_lines, NoiseProfile
from .superposition import superpose
from .synthesis import SynthesisRequest, default_noise_profile, synth_carrier

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "OffsetsTable",
    "Manifest",
    "derive_seed",
    "sweep_oversampling",
    "sweep_comb_width",
    "offsets_experiment",
    "run_all",
    "write_sweep_csv",
    "write_offsets_csv",
]

#: Desk-scale defaults: every dimensionless ratio the physics depends on
#: (offset times maximum delay, lines per unit width) matches the full
#: 100 MHz / 3 THz configuration at a small fraction of the memory.
DEFAULT_COMB = CombSpec(f_r=1e7, lambda0=1550e-9, width=1e9)
DEFAULT_RATIOS = (4, 8, 16, 32, 64)
DEFAULT_WIDTHS = (1e8, 2e8, 5e8, 1e9, 2e9, 5e9, 1e10, 2e10)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved parameters of a sweep run."""

    comb: CombSpec = DEFAULT_COMB
    oversampling: int = 16
    t_sig: float = 2e-3
    kinds: tuple[str, ...] = ("ideal", "linear", "constant")
    noise: NoiseProfile | None = None
    offsets: tuple[float, ...] = (1e4, 1e6)
    ratios: tuple[int, ...] = DEFAULT_RATIOS
    widths: tuple[float, ...] = DEFAULT_WIDTHS
    n_seeds: int = 10
    master_seed: int = 12345
    out_dir: Path = Path("out")
    memory_budget_bytes: int = 1 << 30
    max_offset_budget: int = 1 << 26
    workers: int = 1

    def __post_init__(self):
        periods = self.t_sig * self.comb.f_r
        if abs(periods - round(periods)) > 1e-6 * max(periods, 1.0):
            raise ConfigError(
                f"t_sig = {self.t_sig} s is not an integer number of carrier periods; "
                f"snap it to a multiple of 1/f_r = {1.0 / self.comb.f_r:.6e} s so the "
                "carrier stays bin-exact"
            )
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        if any(r < 2 for r in self.ratios):
            raise ConfigError("oversampling ratios must be >= 2")
        if any(o <= 0 for o in self.offsets):
            raise ConfigError("offsets of interest must be positive")
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    @property
    def grid(self) -> SimGrid:
        return build_grid(self.comb.f_r, self.oversampling, self.t_sig)

    def resolved_noise(self) -> NoiseProfile:
        if self.noise is not None:
            return self.noise
        return default_noise_profile(f_low=1.0 / self.t_sig)

    def to_dict(self) -> dict:
        noise = self.resolved_noise()
        return {
            "comb": {"f_r": self.comb.f_r, "lambda0": self.comb.lambda0, "width": self.comb.width},
            "oversampling": self.oversampling,
            "t_sig": self.t_sig,
            "kinds": list(self.kinds),
            "noise": {"terms": [list(t) for t in noise.terms], "f_low": noise.f_low},
            "offsets": list(self.offsets),
            "ratios": list(self.ratios),
            "widths": list(self.widths),
            "n_seeds": self.n_seeds,
            "master_seed": self.master_seed,
            "out_dir": str(self.out_dir),
            "memory_budget_bytes": self.memory_budget_bytes,
            "max_offset_budget": self.max_offset_budget,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class SweepRow:
    """One measured point of a sweep: mean +- std of L over seeds."""

    x_value: float
    kind: str
    offset_hz: float
    mean_l_dbc: float
    std_l_db: float
    n_seeds: int
    per_seed: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True, eq=False)
class OffsetsTable:
    """Per-line delay-plan differences of linear/constant vs ideal."""

    width: float
    line_index: np.ndarray
    lambda_nm: np.ndarray
    diff_linear: np.ndarray
    diff_constant: np.ndarray


def derive_seed(master_seed: int, experiment: str, point_index: int, seed_index: int) -> int:
    """Stable per-job seed; independent of execution order."""
    ss = np.random.SeedSequence(
        [int(master_seed), zlib.crc32(experiment.encode()), int(point_index), int(seed_index)]
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _predict_bytes(grid: SimGrid, extra_samples: int) -> int:
    # Double-precision working set of synthesis + superposition + FFT,
    # about four length-(M+extra) float64 arrays at peak.
    return (grid.n_samples + extra_samples) * 8 * 4


def _check_budget(cfg: ExperimentConfig, grid: SimGrid, extra_samples: int, what: str):
    predicted = _predict_bytes(grid, extra_samples)
    if predicted > cfg.memory_budget_bytes:
        raise BudgetError(
            f"{what} needs about {predicted / 2**30:.2f} GiB, over the budget of "
            f"{cfg.memory_budget_bytes / 2**30:.2f} GiB",
            estimate_bytes=predicted,
        )


def _rows_from_samples(
    x_value: float, kind: str, offsets, samples_by_seed: list[list[float]]
) -> list[SweepRow]:
    rows = []
    arr = np.asarray(samples_by_seed, dtype=np.float64)  # (seeds, offsets)
    for j, off in enumerate(offsets):
        per_seed = tuple(float(v) for v in arr[:, j])
        rows.append(
            SweepRow(
                x_value=float(x_value),
                kind=kind,
                offset_hz=float(off),
                mean_l_dbc=float(np.mean(arr[:, j])),
                std_l_db=float(np.std(arr[:, j])),
                n_seeds=arr.shape[0],
                per_seed=per_seed,
            )
        )
    return rows


def _run_jobs(cfg: ExperimentConfig, jobs: dict, fn) -> dict:
    """Evaluate fn over the job dict, keyed results, optionally threaded."""
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = dict(zip(jobs.keys(), pool.map(fn, jobs.values())))
    else:
        results = {key: fn(args) for key, args in jobs.items()}
    return results


def sweep_oversampling(cfg: ExperimentConfig, ratios=None) -> list[SweepRow]:
    """Measure L of a pure tone and of the impaired carrier vs oversampling.

    No dispersion is applied (single line); the pure tone exposes the
    numerical floor of the simulation, the impaired carrier shows when
    the measured noise saturates.
    """
    ratios = tuple(int(r) for r in (cfg.ratios if ratios is None else ratios))
    if list(ratios) != sorted(ratios):
        raise ConfigError("oversampling ratios must be ascending")
    grids = []
    for n in ratios:
        grid = build_grid(cfg.comb.f_r, n, cfg.t_sig)
        _check_budget(cfg, grid, 0, f"oversampling point N={n}")
        grids.append(grid)
    noise = cfg.resolved_noise()

    def job(args):
        grid, request_noise, seed = args
        signal = synth_carrier(SynthesisRequest(grid=grid, noise=request_noise, seed=seed))
        spectrum = phase_noise_spectrum(signal, grid.f_r, cfg.offsets)
        return list(spectrum.l_dbc)

    jobs = {}
    for i, grid in enumerate(grids):
        jobs[("pure_tone", i, 0)] = (grid, None, 0)
        for s in range(cfg.n_seeds):
            jobs[("impaired", i, s)] = (grid, noise, derive_seed(cfg.master_seed, "oversampling", i, s))
    results = _run_jobs(cfg, jobs, job)

    rows = []
    for i, n in enumerate(ratios):
        rows += _rows_from_samples(n, "pure_tone", cfg.offsets, [results[("pure_tone", i, 0)]])
        impaired = [results[("impaired", i, s)] for s in range(cfg.n_seeds)]
        rows += _rows_from_samples(n, "impaired", cfg.offsets, impaired)
    return rows


def _plans_for_width(cfg: ExperimentConfig, width: float, grid: SimGrid) -> dict[str, DelayPlan]:
    comb = replace(cfg.comb, width=width)
    plans = {}
    for kind in cfg.kinds:
        spec = DispersionSpec(kind, cfg.comb.f_r, cfg.comb.lambda0)
        plans[kind] = delay_plan(spec, comb, grid, max_offset_budget=cfg.max_offset_budget)
    return plans


def sweep_comb_width(cfg: ExperimentConfig, widths=None) -> list[SweepRow]:
    """Measure L vs comb width for every configured dispersion kind.

    One carrier is synthesized per (width, seed) and superposed with
    each kind's delay plan, so kinds are compared on identical noise.
    """
    widths = tuple(float(w) for w in (cfg.widths if widths is None else widths))
    if list(widths) != sorted(widths):
        raise ConfigError("comb widths must be ascending")
    grid = cfg.grid
    plans_by_width = []
    for w in widths:
        plans = _plans_for_width(cfg, w, grid)
        extra = max(p.max_offset for p in plans.values())
        _check_budget(cfg, grid, extra, f"comb-width point {w:.4g} Hz")
        plans_by_width.append(plans)
    noise = cfg.resolved_noise()

    def job(args):
        plans, seed = args
        extra = max(p.max_offset for p in plans.values())
        signal = synth_carrier(
            SynthesisRequest(grid=grid, noise=noise, extra_samples=extra, seed=seed)
        )
        out = {}
        for kind, plan in plans.items():
            # Right-align shorter plans inside the shared padding.
            lead = extra - plan.max_offset
            window = SampledSignal(
                samples=signal.samples[lead:],
                sample_rate=signal.sample_rate,
                t0_index=signal.t0_index + lead,
            )
            y = superpose(window, plan)
            out[kind] = list(phase_noise_spectrum(y, grid.f_r, cfg.offsets).l_dbc)
        return out

    jobs = {}
    for i, plans in enumerate(plans_by_width):
        for s in range(cfg.n_seeds):
            jobs[(i, s)] = (plans, derive_seed(cfg.master_seed, "comb_width", i, s))
    results = _run_jobs(cfg, jobs, job)

    rows = []
    for i, w in enumerate(widths):
        for kind in cfg.kinds:
            samples = [results[(i, s)][kind] for s in range(cfg.n_seeds)]
            rows += _rows_from_samples(w, kind, cfg.offsets, samples)
    return rows


def offsets_experiment(cfg: ExperimentConfig, widths=None) -> list[OffsetsTable]:
    """Per-line delay-plan differences (ideal minus linear / constant)."""
    widths = tuple(float(w) for w in (cfg.widths if widths is None else widths))
    grid = cfg.grid
    tables = []
    for w in widths:
        comb = replace(cfg.comb, width=w)
        lines = comb_lines(comb)
        plans = {
            kind: delay_plan(
                DispersionSpec(kind, cfg.comb.f_r, cfg.comb.lambda0),
                comb,
                grid,
                max_offset_budget=cfg.max_offset_budget,
            )
            for kind in ("ideal", "linear", "constant")
        }
        tables.append(
            OffsetsTable(
                width=w,
                line_index=lines.index,
                lambda_nm=lines.lam * 1e9,
                diff_linear=offset_difference(plans["ideal"], plans["linear"]),
                diff_constant=offset_difference(plans["ideal"], plans["constant"]),
            )
        )
    return tables


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    lines = ["x_value,dispersion_kind,offset_hz,mean_L_dbc_hz,std_L_db,n_seeds"]
    for r in rows:
        lines.append(
            f"{r.x_value:.10g},{r.kind},{r.offset_hz:.10g},"
            f"{r.mean_l_dbc:.10g},{r.std_l_db:.10g},{r.n_seeds}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_offsets_csv(table: OffsetsTable, path: str | Path) -> None:
    lines = ["line_index,lambda_nm,diff_linear_samples,diff_constant_samples"]
    for k, lam, dl, dc in zip(
        table.line_index, table.lambda_nm, table.diff_linear, table.diff_constant
    ):
        lines.append(f"{k},{lam:.10g},{dl},{dc}")
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class Manifest:
    """What a run produced: resolved config, hashes, refusals, failures."""

    config: dict
    config_sha256: str
    master_seed: int
    versions: dict
    files: list = field(default_factory=list)
    refusals: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "config_sha256": self.config_sha256,
            "master_seed": self.master_seed,
            "versions": self.versions,
            "files": self.files,
            "refusals": self.refusals,
            "errors": self.errors,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(
        json.dumps(cfg.to_dict(), sort_keys=True).encode()
    ).hexdigest()


def run_all(cfg: ExperimentConfig, render_svg: bool = False) -> Manifest:
    """Run all three experiments and write CSVs, plots, and a manifest.

    Budget refusals and per-experiment failures are recorded in the
    manifest instead of aborting the whole run.  Re-running with an
    identical config reproduces identical output bytes.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(
        config=cfg.to_dict(),
        config_sha256=config_hash(cfg),
        master_seed=cfg.master_seed,
        versions={"talbotsim": __version__},
    )
    written: list[Path] = []

    def attempt(name: str, runner):
        try:
            written.extend(runner())
        except BudgetError as exc:
            manifest.refusals.append(
                {
                    "experiment": name,
                    "message": str(exc),
                    "estimate_bytes": exc.estimate_bytes,
                    "budget_bytes": cfg.memory_budget_bytes,
                }
            )
        except Exception as exc:  # noqa: BLE001 - reported per experiment
            manifest.errors.append({"experiment": name, "error": f"{type(exc).__name__}: {exc}"})

    def run_oversampling():
        rows = sweep_oversampling(cfg)
        path = out / "sweep_oversampling.csv"
        write_sweep_csv(rows, path)
        return [path]

    def run_comb_width():
        rows = sweep_comb_width(cfg)
        path = out / "sweep_comb_width.csv"
        write_sweep_csv(rows, path)
        return [path]

    def run_offsets():
        paths = []
        for table in offsets_experiment(cfg):
            path = out / f"offsets_diff_{table.width:.10g}.csv"
            write_offsets_csv(table, path)
            paths.append(path)
        return paths

    attempt("oversampling", run_oversampling)
    attempt("comb_width", run_comb_width)
    attempt("offsets", run_offsets)

    if render_svg:
        from .svgplot import render_plots

        try:
            written.extend(render_plots([p for p in written if p.suffix == ".csv"], out))
        except Exception as exc:  # noqa: BLE001
            manifest.errors.append({"experiment": "plots", "error": f"{type(exc).__name__}: {exc}"})

    for path in written:
        manifest.files.append({"name": path.name, "sha256": _sha256(path)})
    manifest.files.sort(key=lambda item: item["name"])
    (out / "manifest.json").write_text(manifest.to_json())
    return manifest
