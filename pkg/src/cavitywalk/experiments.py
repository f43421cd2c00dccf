"""Experiment configuration, runners, presets and CSV/manifest output."""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import __version__
from .errors import ConfigError, InsufficientData, NumericalGuardError
from .gates import DeviceParams, synth_reports
from .open_system import OpenSystemConfig, run_noisy_walk
from .phase_stats import (
    classical_sigma_series,
    localization_check,
    scaling_exponent,
    sigma_series,
    SigmaSeries,
)
from .walk import CoinKind, CoinSpec, WalkConfig, initial_coin

log = logging.getLogger(__name__)

MODES = ("ideal-walk", "noisy-walk", "afd", "synth-check", "classical-baseline", "sweep", "preset")
PRESETS = ("table1", "fig2", "fig3")
INIT_LABELS = ("c1", "c2", "c3")
LOC_SLOPE = 0.15

TABLE1_COINS = ("dft", "hh", "sqrt-iswap", "grover")
FIG2_KAPPAS = (0.0, 0.02, 0.05, 0.1)
FIG2_GAMMAS = (0.0, 0.02, 0.05, 0.1)
FIG3_PAIRS = (((0.01, 0.0), (0.0, 0.02)), ((0.1, 0.0), (0.0, 0.2)))


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "ideal-walk"
    preset: str = ""
    name: str = ""
    coins: tuple[str, ...] = ("dft",)
    inits: tuple[str, ...] = ("c1",)
    theta: float = math.pi / 4
    delta: float = 0.8
    steps: int | None = None
    walker: int = 0
    fit_window: tuple[int, int] | None = None
    fock_dim: int = 16
    chi: float = 1.0
    kappas: tuple[float, ...] = (0.0,)
    gammas: tuple[float, ...] = (0.0,)
    dt: float = 0.01
    grid: int = 1024
    initial_cavity: str = "coherent"
    mean_photons: float | None = None
    coin_duration: float = 0.0
    omega_a: float = 7000.0
    omega_c: float = 5000.0
    g: float = 100.0
    epsilon: float = 1000.0
    n_bar: float = 0.0
    photon_number: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.mode == "preset" and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; expected one of {', '.join(PRESETS)}")
        for label in self.inits:
            if label not in INIT_LABELS:
                raise ConfigError(f"unknown initial coin label {label!r}")
        for c in self.coins:
            try:
                CoinKind.parse(c)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.fit_window is not None:
            a, b = self.fit_window
            if not 1 <= a < b:
                raise ConfigError(f"fit window {a}:{b} must satisfy 1 <= a < b")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if not self.name:
            object.__setattr__(self, "name", self.preset if self.mode == "preset" else self.mode)

    @property
    def noisy(self) -> bool:
        return self.mode in ("noisy-walk", "afd") or (self.mode == "sweep" and self._sweep_noisy())

    def _sweep_noisy(self) -> bool:
        return any(self.kappas) or any(self.gammas) or len(self.kappas) > 1 or len(self.gammas) > 1

    def resolved_steps(self) -> int:
        if self.steps is not None:
            return self.steps
        return 10 if self.noisy or self.preset in ("fig2", "fig3") else 25

    def resolved_window(self) -> tuple[int, int]:
        if self.fit_window is not None:
            return self.fit_window
        n = self.resolved_steps()
        return (2, n) if self.noisy or self.preset in ("fig2", "fig3") else (min(4, max(n - 2, 1)), n)

    def device(self) -> DeviceParams:
        return DeviceParams(self.omega_a, self.omega_c, self.g, self.epsilon)

    def to_mapping(self) -> dict[str, str]:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "fit_window":
                a, b = self.resolved_window()
                out[f.name] = f"{a}:{b}"
            elif f.name == "steps":
                out[f.name] = str(self.resolved_steps())
            elif isinstance(val, tuple):
                out[f.name] = ",".join(_num(v) for v in val)
            elif val is None:
                out[f.name] = ""
            else:
                out[f.name] = _num(val)
        return out


def _num(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


_LIST_KEYS = {"coins": str, "inits": str, "kappas": float, "gammas": float}
_ALIASES = {"coin": "coins", "init": "inits", "kappa": "kappas", "gamma": "gammas", "fock-dim": "fock_dim",
            "fit-window": "fit_window", "initial-cavity": "initial_cavity", "mean-photons": "mean_photons",
            "coin-duration": "coin_duration", "n-bar": "n_bar", "photon-number": "photon_number"}


def config_from_mapping(values: dict[str, str]) -> ExperimentConfig:
    """Build a config from string key/value pairs (file or command line)."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    kwargs = {}
    for raw_key, raw in values.items():
        key = _ALIASES.get(raw_key, raw_key.replace("-", "_"))
        if key == "version":
            continue
        if key not in types:
            raise ConfigError(f"unknown configuration key {raw_key!r}")
        text = str(raw).strip()
        try:
            if key in _LIST_KEYS:
                kind = _LIST_KEYS[key]
                items = [t.strip() for t in text.split(",") if t.strip()]
                if not items:
                    raise ConfigError(f"{raw_key} needs at least one value")
                val = tuple(kind(t) if kind is float else t.lower() for t in items)
                if key == "coins":
                    val = tuple(CoinKind.parse(t).value for t in val)
            elif key == "fit_window":
                if not text:
                    val = None
                else:
                    a, b = text.split(":")
                    val = (int(a), int(b))
            elif key in ("steps", "mean_photons"):
                val = None if not text else (int(text) if key == "steps" else float(text))
            elif key in ("mode", "preset", "name", "initial_cavity"):
                val = text
            elif key in ("walker", "fock_dim", "grid", "photon_number", "jobs"):
                val = int(text)
            else:
                val = float(text)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} for {raw_key}: {exc}") from None
        kwargs[key] = val
    return ExperimentConfig(**kwargs)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flatten a key=value file: ``[run]`` first, then the section named by its mode."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values = dict(parser["run"]) if parser.has_section("run") else {}
    mode = values.get("mode")
    if mode and parser.has_section(mode):
        values.update(parser[mode])
    return values


def write_manifest(config: ExperimentConfig, path: Path) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    parser["run"] = config.to_mapping()
    parser["manifest"] = {"version": __version__}
    buf = io.StringIO()
    parser.write(buf)
    path.write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    coin: str = ""
    init: str = ""
    kappa: float | None = None
    gamma: float | None = None
    N: int | None = None
    sigma: float | None = None
    afd: float | None = None
    slope: float | None = None
    slope_stderr: float | None = None
    fit_window: str = ""
    flag: str = ""

    def sort_key(self):
        return (
            self.experiment,
            self.coin,
            self.init,
            -1.0 if self.kappa is None else self.kappa,
            -1.0 if self.gamma is None else self.gamma,
            math.inf if self.N is None else self.N,
        )


COLUMNS = tuple(f.name for f in fields(ResultRow))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    return str(v)


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows, path: Path) -> None:
    path.write_text(format_csv(rows), encoding="utf-8")


@dataclass
class RunOutcome:
    rows: list[ResultRow]
    guard_tripped: bool = False
    text: str = ""
    extra: dict = field(default_factory=dict)


def _fit_row(series: SigmaSeries, window, base: ResultRow, localization: bool = True) -> ResultRow:
    a, b = window
    tag = f"{a}:{b}"
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = scaling_exponent(series, a, b)
    except InsufficientData as exc:
        log.warning("no fit for %s %s %s: %s", base.experiment, base.coin, base.init, exc)
        return replace(base, fit_window=tag, flag="insufficient-data")
    flag = ""
    if localization and 5 in series.ns:
        bounded, _, _ = localization_check(series, 5, 3.0)
        if bounded and abs(fit.slope) < LOC_SLOPE:
            flag = "loc"
    return replace(base, slope=fit.slope, slope_stderr=fit.slope_stderr, fit_window=tag, flag=flag)


# ---------------------------------------------------------------------------
# runners


def ideal_rows(experiment: str, coin: str, init: str, config: ExperimentConfig) -> list[ResultRow]:
    n = config.resolved_steps()
    spec = CoinSpec(CoinKind.parse(coin), config.theta)
    wc = WalkConfig(2, config.delta, initial_coin(init), None, n)
    series = sigma_series(wc, spec, config.walker, n)
    base = ResultRow(experiment, spec.label, init)
    rows = [replace(base, N=k, sigma=s) for k, s in series]
    rows.append(_fit_row(series, config.resolved_window(), base))
    return rows


def baseline_rows(config: ExperimentConfig, experiment: str = "classical-baseline") -> list[ResultRow]:
    series = classical_sigma_series(config.delta, config.resolved_steps())
    base = ResultRow(experiment, "classical", "")
    rows = [replace(base, N=k, sigma=s) for k, s in series]
    rows.append(_fit_row(series, config.resolved_window(), base, localization=False))
    return rows


def open_config(config: ExperimentConfig, coin: str, init: str, kappa: float, gamma: float) -> OpenSystemConfig:
    return OpenSystemConfig(
        fock_dim=config.fock_dim,
        chi=config.chi,
        delta_theta=config.delta,
        kappa=(kappa, kappa),
        gamma=(gamma, gamma),
        coin=CoinSpec(CoinKind.parse(coin), config.theta),
        initial_coin=initial_coin(init),
        steps=config.resolved_steps(),
        dt=config.dt,
        initial_cavity=config.initial_cavity,
        mean_photons=config.mean_photons,
        coin_duration=config.coin_duration,
    )


def noisy_rows(
    experiment: str, coin: str, init: str, kappa: float, gamma: float, config: ExperimentConfig
) -> tuple[list[ResultRow], bool]:
    """Per-step sigma/AFD rows and a fit row for one noisy run.

    Returns the rows and whether the truncation guard tripped.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        oc = open_config(config, coin, init, kappa, gamma)
    records = run_noisy_walk(oc, grid_size=config.grid)
    base = ResultRow(experiment, oc.coin.label, init, kappa, gamma)
    rows, tripped = [], False
    for rec in records:
        flag = "truncation-suspect" if rec.diagnostics.truncation_suspect else ""
        tripped |= bool(flag)
        sigma = rec.sigma[config.walker] if experiment != "afd" else None
        rows.append(replace(base, N=rec.step, sigma=sigma, afd=rec.afd, flag=flag))
    if experiment != "afd":
        series = SigmaSeries.from_pairs((r.step, r.sigma[config.walker]) for r in records if r.step >= 1)
        rows.append(_fit_row(series, config.resolved_window(), base, localization=False))
    return rows, tripped


def _noisy_job(args):
    return noisy_rows(*args)


def _map(func, jobs_args, jobs: int):
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, jobs_args))
    return [func(a) for a in jobs_args]


def _ideal_job(args):
    return ideal_rows(*args)


def sweep_rows(config: ExperimentConfig, experiment: str | None = None) -> tuple[list[ResultRow], bool]:
    experiment = experiment or config.name
    if config._sweep_noisy():
        grid = [
            (experiment, c, i, k, g, config)
            for c, i, k, g in itertools.product(config.coins, config.inits, config.kappas, config.gammas)
        ]
        results = _map(_noisy_job, grid, config.jobs)
        rows = [r for rs, _ in results for r in rs]
        return sorted(rows, key=ResultRow.sort_key), any(t for _, t in results)
    grid = [(experiment, c, i, config) for c, i in itertools.product(config.coins, config.inits)]
    rows = [r for rs in _map(_ideal_job, grid, config.jobs) for r in rs]
    return sorted(rows, key=ResultRow.sort_key), False


def preset_table1(config: ExperimentConfig | None = None) -> RunOutcome:
    """Slope table for every coin and initial state of the ideal walk."""
    base = config or ExperimentConfig(mode="preset", preset="table1")
    cfg = replace(base, coins=TABLE1_COINS, inits=INIT_LABELS)
    rows, _ = sweep_rows(cfg, "table1")
    fits = [r for r in rows if r.N is None]
    return RunOutcome(rows, text=format_table1(fits))


def format_table1(fits: list[ResultRow]) -> str:
    cells = {(r.coin, r.init): r for r in fits}
    lines = [f"{'coin':<12}" + "".join(f"{i:>18}" for i in INIT_LABELS)]
    for coin in TABLE1_COINS:
        label = CoinKind.parse(coin).value
        parts = []
        for init in INIT_LABELS:
            r = cells.get((label, init))
            if r is None:
                parts.append(f"{'':>18}")
            elif r.flag == "loc":
                parts.append(f"{'loc':>18}")
            elif r.slope is None:
                parts.append(f"{r.flag:>18}")
            else:
                parts.append(f"{r.slope:>10.3f}±{r.slope_stderr:<7.3f}")
        lines.append(f"{label:<12}" + "".join(parts))
    return "\n".join(lines)


def preset_fig2(config: ExperimentConfig | None = None) -> RunOutcome:
    """Slope against cavity decay at gamma = 0.06 and against dephasing at kappa = 0.01."""
    base = config or ExperimentConfig(mode="preset", preset="fig2")
    common = replace(base, coins=("dft",), inits=("c3",))
    rows_a, ta = sweep_rows(replace(common, kappas=FIG2_KAPPAS, gammas=(0.06,)), "fig2a")
    rows_b, tb = sweep_rows(replace(common, kappas=(0.01,), gammas=FIG2_GAMMAS), "fig2b")
    rows = rows_a + rows_b
    fits = [r for r in rows if r.N is None]
    text = "\n".join(
        f"{r.experiment} kappa={r.kappa:g} gamma={r.gamma:g} slope={_cell(r.slope)} stderr={_cell(r.slope_stderr)}"
        for r in fits
    )
    return RunOutcome(rows, guard_tripped=ta or tb, text=text)


def preset_fig3(config: ExperimentConfig | None = None) -> RunOutcome:
    """Matched cavity-decay and dephasing runs with AFD and slopes."""
    base = config or ExperimentConfig(mode="preset", preset="fig3")
    jobs = [
        ("fig3", "dft", "c3", k, g, base) for pair in FIG3_PAIRS for (k, g) in pair
    ]
    results = _map(_noisy_job, jobs, base.jobs)
    rows = sorted((r for rs, _ in results for r in rs), key=ResultRow.sort_key)
    n = base.resolved_steps()
    lines = []
    for (k1, g1), (k2, g2) in FIG3_PAIRS:
        def pick(k, g, attr):
            for r in rows:
                if r.kappa == k and r.gamma == g and (r.N == n if attr == "afd" else r.N is None):
                    return getattr(r, attr)
            return None
        lines.append(
            f"kappa={k1:g}: slope={_cell(pick(k1, g1, 'slope'))} afd={_cell(pick(k1, g1, 'afd'))} | "
            f"gamma={g2:g}: slope={_cell(pick(k2, g2, 'slope'))} afd={_cell(pick(k2, g2, 'afd'))}"
        )
    return RunOutcome(rows, guard_tripped=any(t for _, t in results), text="\n".join(lines))


def _single(values: tuple, what: str):
    if len(values) != 1:
        raise ConfigError(f"mode needs exactly one {what}, got {len(values)}")
    return values[0]


def execute(config: ExperimentConfig) -> RunOutcome:
    """Run one configured experiment without touching the filesystem."""
    mode = config.mode
    if mode == "ideal-walk":
        return RunOutcome(ideal_rows(config.name, _single(config.coins, "coin"), _single(config.inits, "init"), config))
    if mode == "classical-baseline":
        return RunOutcome(baseline_rows(config, config.name))
    if mode in ("noisy-walk", "afd"):
        rows, tripped = noisy_rows(
            "afd" if mode == "afd" else config.name,
            _single(config.coins, "coin"),
            _single(config.inits, "init"),
            _single(config.kappas, "kappa"),
            _single(config.gammas, "gamma"),
            config,
        )
        return RunOutcome(rows, guard_tripped=tripped)
    if mode == "sweep":
        rows, tripped = sweep_rows(config)
        return RunOutcome(rows, guard_tripped=tripped)
    if mode == "synth-check":
        reports = synth_reports(config.device(), config.n_bar, config.photon_number)
        return RunOutcome([], text="\n\n".join(r.format() for r in reports), extra={"reports": reports})
    return {"table1": preset_table1, "fig2": preset_fig2, "fig3": preset_fig3}[config.preset](config)


def run(config: ExperimentConfig, out_dir: str | Path = ".") -> tuple[int, RunOutcome | None]:
    """Execute and write ``<name>.csv`` (or ``.txt``) and ``<name>.manifest.txt``.

    Returns the process exit status: 0 success, 2 numerical guard tripped.
    Configuration problems surface as :class:`ConfigError`.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        outcome = execute(config)
    except NumericalGuardError as exc:
        log.error("numerical guard tripped: %s", exc)
        write_manifest(config, out / f"{config.name}.manifest.txt")
        return 2, None
    if config.mode == "synth-check":
        (out / f"{config.name}.txt").write_text(outcome.text + "\n", encoding="utf-8")
    else:
        write_csv(outcome.rows, out / f"{config.name}.csv")
    write_manifest(config, out / f"{config.name}.manifest.txt")
    return (2 if outcome.guard_tripped else 0), outcome
