"""INI experiment configuration: defaults, file layer, ``section.key=value`` overrides."""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

from .core import ETA, OMEGA_PROBE, OMEGA_TILDE

EXPERIMENTS = ("fig1", "fig2", "fig3", "sweep", "custom")
ENGINES = ("spectral", "fock", "both")
OUTPUT_ENV = "IONDIRAC_OUTPUT"


class ConfigError(ValueError):
    pass


_DEFAULTS = {
    "experiment": {"engine": "spectral"},
    "params": {
        "eta": repr(ETA),
        "omega_tilde": repr(OMEGA_TILDE),
        "omega": "",
        "compton": "1.2",
        "omega_probe": repr(OMEGA_PROBE),
    },
    "grid": {"n_points": "4096", "x_min": "-60", "x_max": "60"},
    "time": {"horizon": "250", "step": "2", "snapshots": "0, 75, 150"},
    "measurement": {
        "shots": "10000",
        "seed": "2010",
        "probe_times": "0, 2, 4, 6, 8, 10, 12, 14",
        "measure_step": "10",
        "k_max": "3",
        "k_points": "61",
        "window": "rect",
    },
    "fock": {"n_trunc": "400"},
    "state": {"spinor": "1, 1", "x0": "0", "momentum": "0", "width": "1"},
    "sweep": {"compton_list": "5.4, 2.5, 1.2, 0.6"},
    "output": {"dir": ""},
}

_EXPERIMENT_DEFAULTS = {
    "fig1": {},
    "fig2": {"time": {"horizon": "150", "step": "1"}, "state": {"momentum": "1.0"}},
    "fig3": {"time": {"horizon": "150", "step": "1"}, "state": {"momentum": "2.2"}},
    "sweep": {"time": {"horizon": "auto"}},
    "custom": {},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    engine: str
    eta: float
    omega_tilde: float
    omega: float | None
    compton: float | None
    omega_probe: float
    n_points: int
    x_min: float
    x_max: float
    horizon: float | None
    step: float
    snapshots: tuple
    shots: int | None
    seed: int | None
    probe_times: tuple
    measure_step: float
    k_max: float
    k_points: int
    window: str
    n_trunc: int
    spinor: tuple
    x0: float
    momentum: float
    width: float
    compton_list: tuple
    output_dir: str

    @property
    def c(self) -> float:
        return 2 * self.eta * self.omega_tilde

    @property
    def mass_term(self) -> float:
        if self.omega is not None:
            return self.omega
        return self.c / self.compton

    def derived(self) -> dict:
        k_probe = 2 * self.eta * self.omega_probe * max(self.probe_times)
        return {
            "c": self.c,
            "mass_term": self.mass_term,
            "compton": (self.c / self.mass_term) if self.mass_term > 0 else math.inf,
            "dx": (self.x_max - self.x_min) / self.n_points,
            "dp": 2 * math.pi / (self.x_max - self.x_min),
            "k_probe_max": k_probe,
        }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v).strip("()")
    return str(v)


def _parser_from(layers) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    for layer in layers:
        for sec, kv in layer.items():
            if not cp.has_section(sec):
                cp.add_section(sec)
            for k, v in kv.items():
                cp.set(sec, k, v)
    return cp


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.key=value")
    key, value = item.split("=", 1)
    if "." not in key:
        raise ConfigError(f"override key {key!r} is not of the form section.key")
    sec, name = key.strip().split(".", 1)
    return sec.strip(), name.strip(), value.strip()


def _floats(text, name):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{name}: expected a comma-separated list of numbers, got {text!r}") from exc


def _opt(text: str):
    text = text.strip()
    return None if text.lower() in ("", "none", "inf") else text


def load_config(experiment: str, path=None, overrides=()) -> ExperimentConfig:
    """Resolve defaults, an optional INI file and overrides into a config.

    If the user layers set exactly one of ``params.omega`` and
    ``params.compton``, the default of the other is dropped.
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    user: dict = {}
    if path is not None:
        fp = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                fp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for sec in fp.sections():
            if sec == "derived":
                continue  # echo of computed values, recomputed on load
            user.setdefault(sec, {}).update(dict(fp.items(sec)))
    for item in overrides:
        sec, name, value = _parse_override(item)
        user.setdefault(sec, {})[name] = value
    for sec, kv in user.items():
        if sec not in _DEFAULTS:
            raise ConfigError(f"unknown config section [{sec}]")
        for k in kv:
            if k not in _DEFAULTS[sec] and not (sec == "experiment" and k == "name"):
                raise ConfigError(f"unknown config key {sec}.{k}")
    name = user.get("experiment", {}).get("name", experiment)
    if name != experiment:
        raise ConfigError(f"config is for experiment {name!r}, not {experiment!r}")

    base = {sec: dict(kv) for sec, kv in _DEFAULTS.items()}
    user_params = user.get("params", {})
    if _opt(user_params.get("omega", "")) is not None and "compton" not in user_params:
        base["params"]["compton"] = ""
    cp = _parser_from([base, _EXPERIMENT_DEFAULTS[experiment], user])
    return _build(experiment, cp)


def _build(experiment, cp) -> ExperimentConfig:
    g = lambda sec, key: cp.get(sec, key)  # noqa: E731

    def num(sec, key, kind=float):
        try:
            return kind(g(sec, key))
        except ValueError as exc:
            raise ConfigError(f"{sec}.{key}: cannot parse {g(sec, key)!r} as {kind.__name__}") from exc

    engine = g("experiment", "engine")
    if engine not in ENGINES:
        raise ConfigError(f"experiment.engine must be one of {ENGINES}, got {engine!r}")

    omega, compton = _opt(g("params", "omega")), _opt(g("params", "compton"))
    if (omega is None) == (compton is None):
        raise ConfigError("exactly one of params.omega and params.compton must be given")
    try:
        omega = None if omega is None else float(omega)
        compton = None if compton is None else float(compton)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    if omega is not None and omega < 0:
        raise ConfigError("params.omega must be >= 0")
    if compton is not None and compton <= 0:
        raise ConfigError("params.compton must be > 0")
    eta, omega_tilde, omega_probe = num("params", "eta"), num("params", "omega_tilde"), num("params", "omega_probe")
    if eta <= 0 or omega_tilde <= 0 or omega_probe < 0:
        raise ConfigError("params.eta and params.omega_tilde must be > 0, params.omega_probe >= 0")

    n_points = num("grid", "n_points", int)
    if n_points < 2 or n_points & (n_points - 1):
        raise ConfigError("grid.n_points must be a power of two")
    x_min, x_max = num("grid", "x_min"), num("grid", "x_max")
    if x_max <= x_min:
        raise ConfigError("grid.x_max must exceed grid.x_min")

    horizon_text = g("time", "horizon").strip().lower()
    horizon = None if horizon_text == "auto" else num("time", "horizon")
    step = num("time", "step")
    if step <= 0 or (horizon is not None and horizon <= 0):
        raise ConfigError("time.step and time.horizon must be positive")

    shots_text = _opt(g("measurement", "shots"))
    seed_text = _opt(g("measurement", "seed"))
    shots = None if shots_text is None else num("measurement", "shots", int)
    seed = None if seed_text is None else num("measurement", "seed", int)
    if shots is not None and shots < 1:
        raise ConfigError("measurement.shots must be >= 1")
    if shots is not None and seed is None:
        raise ConfigError("measurement.seed is required when measurement.shots is finite")
    probe_times = _floats(g("measurement", "probe_times"), "measurement.probe_times")
    if len(probe_times) < 3:
        raise ConfigError("measurement.probe_times needs at least 3 values")
    window = g("measurement", "window")
    if window not in ("rect", "hann"):
        raise ConfigError("measurement.window must be 'rect' or 'hann'")
    k_points = num("measurement", "k_points", int)
    if k_points < 3 or k_points % 2 == 0:
        raise ConfigError("measurement.k_points must be odd and >= 3")

    try:
        spinor = tuple(complex(v.strip().replace("i", "j")) for v in g("state", "spinor").split(","))
    except ValueError as exc:
        raise ConfigError(f"state.spinor: {exc}") from exc
    if len(spinor) != 2 or not any(spinor):
        raise ConfigError("state.spinor must be two numbers, not both zero")

    return ExperimentConfig(
        experiment=experiment,
        engine=engine,
        eta=eta,
        omega_tilde=omega_tilde,
        omega=omega,
        compton=compton,
        omega_probe=omega_probe,
        n_points=n_points,
        x_min=x_min,
        x_max=x_max,
        horizon=horizon,
        step=step,
        snapshots=_floats(g("time", "snapshots"), "time.snapshots"),
        shots=shots,
        seed=seed,
        probe_times=probe_times,
        measure_step=num("measurement", "measure_step"),
        k_max=num("measurement", "k_max"),
        k_points=k_points,
        window=window,
        n_trunc=num("fock", "n_trunc", int),
        spinor=spinor,
        x0=num("state", "x0"),
        momentum=num("state", "momentum"),
        width=num("state", "width"),
        compton_list=_floats(g("sweep", "compton_list"), "sweep.compton_list"),
        output_dir=g("output", "dir"),
    )


def resolve_output_dir(cfg: ExperimentConfig, override=None) -> Path:
    if override:
        return Path(override)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = os.environ.get(OUTPUT_ENV, "iondirac-runs")
    return Path(root) / cfg.experiment


_SECTION_OF = {
    "engine": "experiment",
    "eta": "params", "omega_tilde": "params", "omega": "params", "compton": "params", "omega_probe": "params",
    "n_points": "grid", "x_min": "grid", "x_max": "grid",
    "horizon": "time", "step": "time", "snapshots": "time",
    "shots": "measurement", "seed": "measurement", "probe_times": "measurement", "measure_step": "measurement",
    "k_max": "measurement", "k_points": "measurement", "window": "measurement",
    "n_trunc": "fock",
    "spinor": "state", "x0": "state", "momentum": "state", "width": "state",
    "compton_list": "sweep",
    "output_dir": "output",
}


def to_ini(cfg: ExperimentConfig, extra: dict | None = None) -> str:
    """Fully resolved config as INI text, with derived values in ``[derived]``."""
    sections: dict = {"experiment": {"name": cfg.experiment}}
    for key, value in asdict(cfg).items():
        if key == "experiment":
            continue
        sec = _SECTION_OF[key]
        name = "dir" if key == "output_dir" else key
        if key == "horizon" and value is None:
            value = "auto"
        sections.setdefault(sec, {})[name] = _fmt(value)
    sections["derived"] = {k: _fmt(v) for k, v in cfg.derived().items()}
    if extra:
        sections["derived"].update({k: _fmt(v) for k, v in extra.items()})
    lines = []
    for sec, kv in sections.items():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {v}" for k, v in kv.items())
        lines.append("")
    return "\n".join(lines)
