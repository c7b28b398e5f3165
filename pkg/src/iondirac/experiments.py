"""Named experiments: the crossover curves, the kicked packet, the negative-energy packet, mass sweeps."""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from pathlib import Path

import numpy as np

from . import serialize
from .analysis import ZbFitError, auto_horizon, detrended_amplitude, fit_zb, zb_sweep
from .config import ExperimentConfig, to_ini
from .core import SpinorField, make_grid, params_from_lab
from .fock import build_hamiltonian, fock_from_field, fock_x_series
from .measurement import LINEAR_PHASE_LIMIT, measure_x, reconstruct_density, spinor_resolved_density
from .plotting import PlotStyle, Series, emit_plot
from .propagator import density_x, evolve, evolve_series, expect_energy, expect_p, expect_x, to_momentum
from .state_prep import displace_momentum, gaussian_spinor, negative_energy_preparation, project_energy

log = logging.getLogger(__name__)

CONSERVATION_TOL = 1e-10


class HealthError(RuntimeError):
    """A conservation or convergence check failed."""


def _times(horizon, step):
    return np.arange(0.0, horizon + step / 2, step)


def _rng_seed(cfg, *keys):
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, *keys])) if cfg.seed is not None else None


def _trajectory(state: SpinorField, times, params):
    """<x>(t) plus the worst drift of norm, <p> and <H> along the way."""
    states = evolve_series(state, times, params)
    xs = np.array([expect_x(s) for s in states])
    p0, e0 = expect_p(state), expect_energy(state, params)
    drift = {"norm": 0.0, "p": 0.0, "energy": 0.0}
    for s in states:
        drift["norm"] = max(drift["norm"], abs(s.norm() - 1))
        drift["p"] = max(drift["p"], abs(expect_p(s) - p0))
        drift["energy"] = max(drift["energy"], abs(expect_energy(s, params) - e0))
    bad = {k: v for k, v in drift.items() if v > CONSERVATION_TOL}
    if bad:
        raise HealthError(f"conservation violated beyond {CONSERVATION_TOL:g}: {bad}")
    return xs, drift


def _fock_trajectory(state, times, params, n_trunc):
    H = build_hamiltonian(n_trunc, params)
    return fock_x_series(fock_from_field(state, n_trunc), times, H, strict=True)


def _fit_dict(fit):
    if fit is None:
        return {"a": math.nan, "R_zb": math.nan, "omega_zb": math.nan, "a_err": math.nan, "R_err": math.nan, "omega_err": math.nan}
    err = fit.stderr
    return {"a": fit.a, "R_zb": fit.R_zb, "omega_zb": fit.omega_zb, "a_err": err[0], "R_err": err[1], "omega_err": err[2]}


def _safe_fit(times, xs, sigmas, omega_seed):
    try:
        return fit_zb(times, xs, sigmas, omega_seed), None
    except (ZbFitError, ValueError) as exc:
        return None, str(exc)


def probe_schedule(cfg, params, t, x0=0.0, width=1.0):
    """Probe times for a measurement at evolution time ``t``.

    The configured times are shortened so that the largest probe phase stays
    within the linear regime for any position the packet can reach by ``t``
    (light cone ``|x0| + 3 width + c t``).
    """
    probe = np.asarray(cfg.probe_times, dtype=float)
    k_max = 2 * params.eta * params.omega_probe * probe.max()
    reach = abs(x0) + 3 * width + params.c * t
    scale = min(1.0, LINEAR_PHASE_LIMIT / (k_max * reach)) if k_max > 0 else 1.0
    return probe * scale


def _measured_curve(cfg, state, params, horizon, key):
    t_meas = _times(horizon, cfg.measure_step)
    xs, errs = [], []
    for i, t in enumerate(t_meas):
        st = evolve(state, t, params)
        probe = probe_schedule(cfg, params, t, cfg.x0, cfg.width)
        x, e = measure_x(st, params, probe, cfg.shots, _rng_seed(cfg, key, i))
        xs.append(x)
        errs.append(e)
    return t_meas, np.array(xs), np.array(errs)


class _Run:
    def __init__(self, cfg: ExperimentConfig, out_dir: Path):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.grid = make_grid(cfg.n_points, (cfg.x_min, cfg.x_max))
        self.files: list[str] = []
        self.report: dict = {"experiment": cfg.experiment, "engine": cfg.engine}

    def params(self, mass_term=None):
        c = self.cfg
        m = c.mass_term if mass_term is None else mass_term
        return params_from_lab(c.eta, c.omega_tilde, m, c.omega_probe)

    def csv(self, name, columns):
        serialize.write_series(self.out / name, columns)
        self.files.append(name)

    def plot(self, name, series, style):
        emit_plot(series, style, self.out / name)
        self.files.append(name)

    def curve(self, state, times, params, tag):
        """Ideal <x>(t) from the configured engine(s); returns (primary, columns)."""
        cols = {}
        xs, drift = _trajectory(state, times, params)
        self.report.setdefault("conservation", {})[tag] = drift
        if self.cfg.engine in ("spectral", "both"):
            cols["x[Delta]"] = xs
        if self.cfg.engine in ("fock", "both"):
            xf = _fock_trajectory(state, times, params, self.cfg.n_trunc)
            cols["x_fock[Delta]"] = xf
            if self.cfg.engine == "both":
                self.report.setdefault("engine_max_diff", {})[tag] = float(np.max(np.abs(xf - xs)))
        primary = cols.get("x[Delta]", cols.get("x_fock[Delta]"))
        return primary, cols

    def snapshots(self, state, params, prefix):
        cfg = self.cfg
        k_grid = np.linspace(-cfg.k_max, cfg.k_max, cfg.k_points)
        panels = []
        for i, t in enumerate(cfg.snapshots):
            st = evolve(state, t, params)
            w0, d0 = spinor_resolved_density(st, 0)
            w1, d1 = spinor_resolved_density(st, 1)
            tomo = reconstruct_density(st, k_grid, cfg.shots, _rng_seed(cfg, 7000 + i), cfg.window)
            name = f"{prefix}_density_t{int(round(t)):03d}.csv"
            self.csv(name, {
                "x[Delta]": self.grid.x,
                "rho[1/Delta]": density_x(st),
                "rho_0[1/Delta]": w0 * d0,
                "rho_1[1/Delta]": w1 * d1,
                "rho_tomography[1/Delta]": tomo,
            })
            view = np.abs(self.grid.x) < 20
            x = self.grid.x[view]
            panels.append([
                Series("|0>", x, (w0 * d0)[view], fill=True),
                Series("|1> (inverted)", x, (w1 * d1)[view], fill=True, invert=True),
                Series("total", x, density_x(st)[view]),
            ])
        self.plot(f"{prefix}_densities.svg", panels, PlotStyle("x [Delta]", "|psi(x)|^2 [1/Delta]",
                                                              panel_titles=[f"t = {t:g} us" for t in cfg.snapshots]))


def _run_fig1(run: _Run):
    cfg = run.cfg
    times = _times(cfg.horizon, cfg.step)
    state = gaussian_spinor(cfg.spinor, cfg.x0, cfg.momentum, cfg.width, run.grid)
    base = run.params(0.0)
    entries = [("massless", 0.0, math.inf)] + [(f"lc{lc:g}", base.c / lc, lc) for lc in cfg.compton_list]
    fits, series = [], []
    for idx, (label, mass, lc) in enumerate(entries):
        p = run.params(mass)
        xs, cols = run.curve(state, times, p, label)
        run.csv(f"fig1_x_{label}.csv", {"t[us]": times, **cols})
        ideal, err = _safe_fit(times, xs, None, 2 * mass)
        row = {"label": label, "compton": lc, "Omega": mass, "ideal": _fit_dict(ideal), "ideal_error": err}
        series.append(Series(label, times, xs))
        if cfg.shots is not None:
            tm, xm, em = _measured_curve(cfg, state, p, cfg.horizon, idx)
            run.csv(f"fig1_measured_{label}.csv", {"t[us]": tm, "x[Delta]": xm, "stderr[Delta]": em})
            meas, merr = _safe_fit(tm, xm, np.maximum(em, 1e-12), 2 * mass)
            row["measured"], row["measured_error"] = _fit_dict(meas), merr
            series.append(Series(f"{label} measured", tm, xm, yerr=em))
        fits.append(row)
    run.report["fits"] = fits
    run.report["massless_slope"] = fits[0]["ideal"]["a"]
    cols = {
        "compton[Delta]": [f["compton"] for f in fits],
        "Omega[rad/us]": [f["Omega"] for f in fits],
    }
    for key, err, unit in (("a", "a_err", "Delta/us"), ("R_zb", "R_err", "Delta"), ("omega_zb", "omega_err", "rad/us")):
        cols[f"{key}[{unit}]"] = [f["ideal"][key] for f in fits]
        cols[f"{key}_err[{unit}]"] = [f["ideal"][err] for f in fits]
        if cfg.shots is not None:
            cols[f"{key}_measured[{unit}]"] = [f["measured"][key] for f in fits]
            cols[f"{key}_measured_err[{unit}]"] = [f["measured"][err] for f in fits]
    run.csv("fig1_fits.csv", cols)
    run.plot("fig1.svg", series, PlotStyle("t [us]", "<x> [Delta]", "<x>(t) for increasing mass"))
    _sweep_outputs(run, [e[1] for e in entries[1:]], state, None, "fig1_inset")


def _sweep_outputs(run: _Run, masses, state, horizon, prefix):
    cfg = run.cfg
    base = run.params(0.0)
    engines = ["spectral", "fock"] if cfg.engine == "both" else [cfg.engine]
    for engine in engines:
        rows = zb_sweep(masses, base, state, horizon, cfg.step, engine, run.grid)
        tag = prefix if engine == engines[0] else f"{prefix}_{engine}"
        fd = [_fit_dict(r.fit) for r in rows]
        run.csv(f"{tag}.csv", {
            "mass_parameter[Omega/(eta*Omega_tilde)]": [r.mass_parameter for r in rows],
            "Omega[rad/us]": [r.mass_term for r in rows],
            "compton[Delta]": [r.compton for r in rows],
            "a[Delta/us]": [f["a"] for f in fd],
            "R_zb[Delta]": [f["R_zb"] for f in fd],
            "R_zb_err[Delta]": [f["R_err"] for f in fd],
            "omega_zb[rad/us]": [f["omega_zb"] for f in fd],
            "omega_zb_err[rad/us]": [f["omega_err"] for f in fd],
        })
        run.report.setdefault("sweeps", {})[tag] = {
            "horizon": horizon if horizon is not None else auto_horizon(masses, step=cfg.step),
            "rows": [{"Omega": r.mass_term, "compton": r.compton, **_fit_dict(r.fit), "error": r.error} for r in rows],
        }
        mp = np.array([r.mass_parameter for r in rows])
        run.plot(f"{tag}.svg", [
            [Series("R_ZB", mp, [f["R_zb"] for f in fd], yerr=[f["R_err"] for f in fd])],
            [Series("omega_ZB", mp, [f["omega_zb"] for f in fd], yerr=[f["omega_err"] for f in fd]),
             Series("2 Omega", mp, 2 * np.array([r.mass_term for r in rows]))],
        ], PlotStyle("Omega / (eta Omega_tilde)", "R_ZB [Delta] | omega_ZB [rad/us]", panel_titles=["amplitude", "frequency"]))


def _run_fig2(run: _Run):
    cfg = run.cfg
    p = run.params()
    times = _times(cfg.horizon, cfg.step)
    rest = gaussian_spinor(cfg.spinor, cfg.x0, 0.0, cfg.width, run.grid)
    state = displace_momentum(rest, -cfg.momentum, "x")
    xs, cols = run.curve(state, times, p, "fig2")
    plus, w_plus = project_energy(state, p, +1)
    minus, w_minus = project_energy(state, p, -1)
    x_plus, _ = _trajectory(plus, times, p)
    x_minus, _ = _trajectory(minus, times, p)
    run.csv("fig2_x.csv", {"t[us]": times, **cols, "x_plus[Delta]": x_plus, "x_minus[Delta]": x_minus})
    early = detrended_amplitude(times, xs, 0, min(50, cfg.horizon))
    run.report.update({
        "initial_momentum": expect_p(state),
        "energy_weights": {"plus": w_plus, "minus": w_minus},
        "detrended_amplitude_early": early,
    })
    if cfg.horizon >= 150:
        run.report["detrended_amplitude_late"] = late = detrended_amplitude(times, xs, 100, 150)
        run.report["decay_ratio"] = late / early
    run.plot("fig2.svg", [Series("<x>", times, xs), Series("<x> positive energy", times, x_plus),
                          Series("<x> negative energy", times, x_minus)],
             PlotStyle("t [us]", "<x> [Delta]", "packet with initial momentum"))
    run.snapshots(state, p, "fig2")


def _run_fig3(run: _Run):
    cfg = run.cfg
    p = run.params()
    prep = negative_energy_preparation(p, run.grid, momentum=cfg.momentum)
    state = prep.state
    times = _times(cfg.horizon, cfg.step)
    xs, cols = run.curve(state, times, p, "fig3")
    run.csv("fig3_x.csv", {"t[us]": times, **cols})
    fit, err = _safe_fit(times, xs, None, 2 * p.mass_term)
    mom = to_momentum(state)
    order = np.argsort(run.grid.p)
    dens_p = np.abs(mom.upper) ** 2 + np.abs(mom.lower) ** 2
    run.csv("fig3_momentum_density.csv", {"p[hbar/Delta]": run.grid.p[order], "rho_p[Delta/hbar]": dens_p[order]})
    run.report.update({
        "overlap_sq": prep.overlap_sq,
        "first_kick": prep.first_kick,
        "first_kick_duration_us": prep.first_kick_duration,
        "stark_angle": prep.stark_angle,
        "second_kick": prep.second_kick,
        "second_kick_duration_us": prep.second_kick_duration,
        "mean_momentum": expect_p(state),
        "fit": _fit_dict(fit),
        "fit_error": err,
    })
    run.plot("fig3.svg", [Series("<x>", times, xs)], PlotStyle("t [us]", "<x> [Delta]", "negative-energy packet"))
    view = np.abs(run.grid.p[order]) < 6
    run.plot("fig3_momentum.svg", [Series("|psi(p)|^2", run.grid.p[order][view], dens_p[order][view], fill=True)],
             PlotStyle("p [hbar/Delta]", "|psi(p)|^2 [Delta/hbar]"))
    run.snapshots(state, p, "fig3")


def _run_sweep(run: _Run):
    cfg = run.cfg
    base = run.params(0.0)
    masses = [base.c / lc for lc in cfg.compton_list]
    state = gaussian_spinor(cfg.spinor, cfg.x0, cfg.momentum, cfg.width, run.grid)
    _sweep_outputs(run, masses, state, cfg.horizon, "sweep")


def _run_custom(run: _Run):
    cfg = run.cfg
    p = run.params()
    times = _times(cfg.horizon, cfg.step)
    state = gaussian_spinor(cfg.spinor, cfg.x0, cfg.momentum, cfg.width, run.grid)
    xs, cols = run.curve(state, times, p, "custom")
    run.csv("custom_x.csv", {"t[us]": times, **cols})
    fit, err = _safe_fit(times, xs, None, 2 * p.mass_term)
    run.report.update({"fit": _fit_dict(fit), "fit_error": err})
    series = [Series("<x>", times, xs)]
    if cfg.shots is not None:
        tm, xm, em = _measured_curve(cfg, state, p, cfg.horizon, 0)
        run.csv("custom_measured.csv", {"t[us]": tm, "x[Delta]": xm, "stderr[Delta]": em})
        series.append(Series("measured", tm, xm, yerr=em))
    run.plot("custom.svg", series, PlotStyle("t [us]", "<x> [Delta]"))


_RUNNERS = {"fig1": _run_fig1, "fig2": _run_fig2, "fig3": _run_fig3, "sweep": _run_sweep, "custom": _run_custom}


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Run one experiment, writing CSV/JSON/SVG artifacts into ``out_dir``.

    Returns the report that is also written to ``report.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    serialize.atomic_write_text(out / "config.resolved.ini", to_ini(cfg))
    run = _Run(cfg, out)
    log.info("running %s into %s", cfg.experiment, out)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _RUNNERS[cfg.experiment](run)
    counts = Counter(f"{w.category.__name__}: {str(w.message).split(':')[0]}" for w in caught)
    for msg, n in counts.items():
        log.warning("%s (x%d)", msg, n)
    run.report["warnings"] = [str(w.message) for w in caught]
    run.report["files"] = ["config.resolved.ini", *run.files, "report.json"]
    serialize.write_json(out / "report.json", run.report)
    return run.report
