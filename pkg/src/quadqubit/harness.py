"""Ensemble studies: decay comparison, decay times, density sweep,
placement-error robustness and gate-error ratio.

Every run is a pure function of its :class:`RunConfig`; random streams are
keyed by ``(seed, study tag, indices)`` so thread count and evaluation order
never change the numbers.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import coherence, gates
from .constants import PhysicalConstants
from .electrostatics import coupling_constants, state_shifts
from .geometry import Encoding, QubitGeometry, TrapEnsemble, fixed_count_ensemble, make_ideal_geometry, sample_traps, TrapRegion

# stream tags
_TRAPS, _MC2, _MC4, _PERTURB, _GATE, _BOOT = range(6)


def derive_seed(seed, *key) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class RunConfig:
    experiment: str = "decay"
    side_length: float = 20e-9
    depth: float = 20e-9
    densities: list = field(default_factory=lambda: [1e12])
    trap_count: int | None = 100
    window: float | None = None
    rate: float = 2e8
    n_distributions: int = 1
    n_trajectories: int = 200
    n_perturbations: int = 100
    sigmas: list = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.2, 0.3])
    p: float = 0.99
    horizon: float | None = None
    n_times: int = 400
    gate_n: int = 62
    gate_m: int = 61
    delta: float = 3.84e12
    coupling_targets: list = field(default_factory=lambda: [0.0, 1e8, 3e8, 1e9, 3e9, 1e10])
    n_bootstrap: int = 2000
    min_standoff: float = 1e-9
    relative_permittivity: float = 11.7
    kappa: float | None = None
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def positive(name):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

        for name in ("side_length", "depth", "rate", "n_distributions", "n_trajectories",
                     "n_perturbations", "n_times", "delta", "n_bootstrap", "relative_permittivity"):
            positive(name)
        self.densities = [float(d) for d in self.densities]
        if not self.densities or any(not d > 0 for d in self.densities):
            raise ValueError("densities must be a non-empty list of positive values")
        if self.trap_count is None and self.window is None:
            raise ValueError("set trap_count (fixed-count mode) or window (fixed-window mode)")
        if self.trap_count is not None and self.trap_count < 1:
            raise ValueError("trap_count must be positive")
        if self.window is not None and not self.window > 0:
            raise ValueError("window must be positive")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")
        self.sigmas = [float(s) for s in self.sigmas]
        if any(s < 0 for s in self.sigmas):
            raise ValueError("sigmas must be non-negative")
        self.coupling_targets = [float(c) for c in self.coupling_targets]
        if any(c < 0 for c in self.coupling_targets):
            raise ValueError("coupling_targets must be non-negative")
        if self.kappa is not None and not self.kappa >= 0:
            raise ValueError("kappa must be non-negative")
        gates.design_gate(self.gate_n, self.gate_m)

    @property
    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(relative_permittivity=self.relative_permittivity, kappa_override=self.kappa)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


PRESETS = {
    "fig2": dict(experiment="decay", densities=[1e12], n_trajectories=200),
    "fig3": dict(experiment="decaytimes", densities=[1e12, 1e13, 1e14], n_distributions=50, n_trajectories=200),
    "fig4": dict(experiment="sweep-density", densities=[1e12, 1e13, 1e14, 1e15, 1e16], n_distributions=50),
    "fig4-full": dict(experiment="sweep-density", densities=[1e12, 1e13, 1e14, 1e15, 1e16], n_distributions=100),
    "fig5": dict(experiment="perturb", densities=[1e12, 1e14, 1e16], n_distributions=100, n_perturbations=100),
    "fig5-full": dict(experiment="perturb", densities=[1e12, 1e14, 1e16], n_distributions=500, n_perturbations=1000),
    "fig6": dict(experiment="gate-sweep", densities=[1e12], n_trajectories=50),
}


def preset_config(name: str, **overrides) -> RunConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return RunConfig(**{**PRESETS[name], **overrides})


def geometries(config: RunConfig) -> tuple:
    return (make_ideal_geometry(Encoding.DIPOLE, config.side_length, config.depth),
            make_ideal_geometry(Encoding.QUADRUPOLE, config.side_length, config.depth))


def sample_ensemble(config: RunConfig, density: float, seed: int, avoid=None) -> TrapEnsemble:
    if config.trap_count is not None:
        return fixed_count_ensemble(config.trap_count, density, config.rate, seed,
                                    avoid=avoid, min_standoff=config.min_standoff)
    region = TrapRegion(config.window, config.window)
    return sample_traps(region, density, config.rate, seed, avoid=avoid, min_standoff=config.min_standoff)


def _avoid(geoms):
    return np.vstack([g.dots for g in geoms])


def _keff(k):
    return float(np.sqrt(np.sum(np.square(k))))


def _ratio(a, b):
    return a / b if b > 0 else math.inf


# ---------------------------------------------------------------- results


@dataclass
class StudyResult:
    """Tabular rows plus a JSON-ready summary; extra tables keyed by file stem."""

    rows: list
    summary: dict
    columns: list
    tables: dict = field(default_factory=dict)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- studies


def run_decay_comparison(config: RunConfig, *, traps: TrapEnsemble | None = None,
                         geoms: tuple | None = None, threads: int = 1) -> StudyResult:
    """One trap distribution seen by both encodings: MC and analytic coherence traces."""
    g2, g4 = geoms or geometries(config)
    if traps is None:
        traps = sample_ensemble(config, config.densities[0], derive_seed(config.seed, _TRAPS, 0, 0), _avoid((g2, g4)))
    const = config.constants
    k2 = coupling_constants(traps, g2, const)
    k4 = coupling_constants(traps, g4, const)
    keff2, keff4 = _keff(k2), _keff(k4)
    horizon = config.horizon
    if horizon is None:
        slow = min(k for k in (keff2, keff4) if k > 0) if max(keff2, keff4) > 0 else config.rate
        horizon = 10.0 / slow
    fast = max(keff2, keff4)
    # start the log section early enough to resolve the faster encoding's onset
    log_start = min(1e-3, 1e-2 / (fast * horizon)) if fast > 0 else 1e-3
    t = coherence.default_time_grid(horizon, config.n_times, log_start)
    tables = {}
    tau = {}
    for tag, k, stream in (("2qd", k2, _MC2), ("4qd", k4, _MC4)):
        mc = coherence.mc_dephasing(k, traps.rates, t, config.n_trajectories, config.seed, threads=threads, stream=stream)
        an = coherence.analytic_many(zip(k, traps.rates), t)
        tables[f"decay_{tag}"] = (
            [{"t_s": ti, "re": m.real, "im": m.imag, "stderr": s, "analytic": a}
             for ti, m, s, a in zip(t, mc.values, mc.stderr, an.values)],
            ["t_s", "re", "im", "stderr", "analytic"],
        )
        z = np.abs(mc.values - an.values)
        within = bool(np.all(z <= 3.0 * mc.stderr + 1e-12))
        tau[tag] = {
            "formula": coherence.formula_decay_time(_keff(k), config.p).tau,
            "analytic_crossing": coherence.analytic_decay_time(zip(k, traps.rates), config.p).tau,
            "mc_crossing": coherence.decay_time(mc, config.p, coherence.DecayMethod.MC_CROSSING).tau,
            "mc_within_3sigma": within,
        }
    summary = {
        "k_eff_2qd": keff2,
        "k_eff_4qd": keff4,
        "ratio": _ratio(keff2, keff4),
        "horizon_s": horizon,
        "n_traps": len(traps),
        "kappa": const.kappa,
        "p": config.p,
        "tau_p": tau,
    }
    return StudyResult([], summary, [], tables)


def run_decaytime_study(config: RunConfig, *, threads: int = 1, with_mc: bool = True) -> StudyResult:
    """Decay time against effective coupling for many paired distributions.

    Distributions cycle through ``config.densities`` to spread the couplings.
    """
    g2, g4 = geometries(config)
    const = config.constants
    rows, missing = [], []
    for d in range(config.n_distributions):
        density = config.densities[d % len(config.densities)]
        traps = sample_ensemble(config, density, derive_seed(config.seed, _TRAPS, 1, d), _avoid((g2, g4)))
        row = {"distribution": d, "density_per_m2": density}
        for tag, geom, stream in (("2qd", g2, _MC2), ("4qd", g4, _MC4)):
            k = coupling_constants(traps, geom, const)
            keff = _keff(k)
            an = coherence.analytic_decay_time(zip(k, traps.rates), config.p)
            row[f"keff_{tag}"] = keff
            row[f"tau_{tag}"] = an.tau
            row[f"tau_formula_{tag}"] = coherence.formula_decay_time(keff, config.p).tau
            if not an.reached:
                missing.append({"distribution": d, "encoding": tag})
            if with_mc:
                grid = np.linspace(0.0, 3.0 * row[f"tau_formula_{tag}"], 241)
                mc = coherence.mc_dephasing(k, traps.rates, grid, config.n_trajectories,
                                            derive_seed(config.seed, stream, d), threads=threads)
                row[f"tau_mc_{tag}"] = coherence.decay_time(mc, config.p, coherence.DecayMethod.MC_CROSSING).tau
        row["tau_ratio"] = row["tau_4qd"] / row["tau_2qd"]
        row["keff_ratio"] = row["keff_2qd"] / row["keff_4qd"]
        rows.append(row)
    tau = np.array([[r["tau_2qd"], r["tau_4qd"]] for r in rows]).ravel()
    keff = np.array([[r["keff_2qd"], r["keff_4qd"]] for r in rows]).ravel()
    ok = np.isfinite(tau) & (keff > 0)
    slope = float(np.polyfit(np.log(keff[ok]), np.log(tau[ok]), 1)[0]) if ok.sum() >= 2 else math.nan
    dev = np.array([abs(r["tau_ratio"] / r["keff_ratio"] - 1.0) for r in rows])
    summary = {
        "p": config.p,
        "n_distributions": config.n_distributions,
        "loglog_slope_tau_vs_keff": slope,
        "median_abs_rel_deviation": float(np.median(dev)),
        "max_abs_rel_deviation": float(dev.max()),
        "not_reached": missing,
    }
    columns = list(rows[0].keys())
    return StudyResult(rows, summary, columns)


def _ratio_stats(ratios):
    r = np.asarray(ratios, dtype=float)
    return {
        "ratio_mean": float(r.mean()),
        "ratio_median": float(np.median(r)),
        "ratio_p10": float(np.percentile(r, 10)),
        "ratio_p90": float(np.percentile(r, 90)),
    }


SWEEP_COLUMNS = ["density_per_m2", "ratio_mean", "ratio_median", "ratio_p10", "ratio_p90", "keff2_mean", "keff4_mean"]


def run_density_sweep(config: RunConfig) -> StudyResult:
    """Decoupling ratio k_eff(2QD) / k_eff(4QD) statistics per trap density.

    Mean couplings are reported in units of 1e9 rad/s.
    """
    if len(config.densities) < 2:
        raise ValueError("density sweep needs at least 2 densities")
    g2, g4 = geometries(config)
    const = config.constants
    rows = []
    for i, density in enumerate(config.densities):
        ratios, k2s, k4s = [], [], []
        for d in range(config.n_distributions):
            traps = sample_ensemble(config, density, derive_seed(config.seed, _TRAPS, 2, i, d), _avoid((g2, g4)))
            k2 = _keff(coupling_constants(traps, g2, const))
            k4 = _keff(coupling_constants(traps, g4, const))
            ratios.append(_ratio(k2, k4))
            k2s.append(k2)
            k4s.append(k4)
        row = {"density_per_m2": density, **_ratio_stats(ratios),
               "keff2_mean": float(np.mean(k2s)) / 1e9, "keff4_mean": float(np.mean(k4s)) / 1e9}
        rows.append(row)
    medians = [r["ratio_median"] for r in rows]
    summary = {
        "n_distributions": config.n_distributions,
        "median_strictly_decreasing": bool(np.all(np.diff(medians) < 0)),
        "kappa": const.kappa,
    }
    return StudyResult(rows, summary, SWEEP_COLUMNS)


def perturbed_keff(traps: TrapEnsemble, geom: QubitGeometry, displacements, sigma: float,
                   constants: PhysicalConstants) -> np.ndarray:
    """k_eff for a batch of perturbed copies of ``geom``.

    ``displacements`` are unit-variance Gaussian draws of shape
    ``(n_copies, n_dots, 3)``, scaled by ``sigma * side_length``.
    """
    dots = geom.dots[None] + sigma * geom.side_length * np.asarray(displacements)
    occ = geom.occupancy_matrix(("0", "1"))
    weights = occ[:, 0] - occ[:, 1]
    r = np.linalg.norm(traps.positions[None, :, None, :] - dots[:, None, :, :], axis=-1)
    k = (constants.kappa / r) @ weights
    return np.sqrt(np.sum(k * k, axis=1))


def run_perturbation_study(config: RunConfig) -> StudyResult:
    """Median over distributions of the mean over placement errors of the decoupling ratio.

    The same unit displacement draws are reused across sigmas so the curves
    are directly comparable.
    """
    if 0.0 not in config.sigmas:
        raise ValueError("sigmas must include 0")
    g2, g4 = geometries(config)
    const = config.constants
    n_p = config.n_perturbations
    per = {(s, dens): [] for s in config.sigmas for dens in config.densities}
    for i, density in enumerate(config.densities):
        for d in range(config.n_distributions):
            traps = sample_ensemble(config, density, derive_seed(config.seed, _TRAPS, 3, i, d), _avoid((g2, g4)))
            rng = np.random.default_rng(derive_seed(config.seed, _PERTURB, i, d))
            disp2 = rng.standard_normal((n_p, g2.n_dots, 3))
            disp4 = rng.standard_normal((n_p, g4.n_dots, 3))
            for s in config.sigmas:
                if s == 0.0:
                    k2 = np.full(1, _keff(coupling_constants(traps, g2, const)))
                    k4 = np.full(1, _keff(coupling_constants(traps, g4, const)))
                else:
                    k2 = perturbed_keff(traps, g2, disp2, s, const)
                    k4 = perturbed_keff(traps, g4, disp4, s, const)
                per[(s, density)].append(float(np.mean(k2 / k4)))
    rows = []
    for s in config.sigmas:
        for density in config.densities:
            vals = np.array(per[(s, density)])
            rows.append({"sigma": s, "density_per_m2": density, "ratio_median_of_means": float(np.median(vals)),
                         "ratio_p10": float(np.percentile(vals, 10)), "ratio_p90": float(np.percentile(vals, 90))})
    summary = {"n_distributions": config.n_distributions, "n_perturbations": n_p, "kappa": const.kappa}
    return StudyResult(rows, summary, ["sigma", "density_per_m2", "ratio_median_of_means"])


def bootstrap_ratio_ci(err_a, err_b, n_boot: int, seed, level: float = 0.9):
    """Paired percentile bootstrap of mean(err_a) / mean(err_b)."""
    err_a = np.asarray(err_a)
    err_b = np.asarray(err_b)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, err_a.size, size=(n_boot, err_a.size))
    num = err_a[idx].mean(axis=1)
    den = err_b[idx].mean(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = num / den
    lo, hi = np.percentile(ratios, [50 * (1 - level), 50 * (1 + level)])
    return float(lo), float(hi)


GATE_COLUMNS = ["keff_radps", "err_2qd", "err_4qd", "ratio", "stderr_2qd", "stderr_4qd"]


def gate_setup(config: RunConfig, traps: TrapEnsemble | None = None):
    g2, g4 = geometries(config)
    if traps is None:
        traps = sample_ensemble(config, config.densities[0], derive_seed(config.seed, _TRAPS, 4, 0), _avoid((g2, g4)))
    design = gates.design_gate(config.gate_n, config.gate_m)
    quad = gates.QuadrupoleGate(design, config.delta)
    dip = gates.DipoleGate(quad.duration)
    const = config.constants
    k2 = coupling_constants(traps, g2, const)
    s4 = state_shifts(traps, g4, const, labels=("0", "1", "e0", "e1"))
    return traps, quad, dip, k2, s4


def run_gate_error_study(config: RunConfig, *, traps: TrapEnsemble | None = None) -> StudyResult:
    """Gate error of the 2-dot reference and the 4-dot design against noise coupling.

    The trap couplings of one distribution are rescaled so the 2-dot k_eff hits
    each entry of ``coupling_targets``; the x column reports that k_eff. Both
    encodings see the same switching records at every point.
    """
    traps, quad, dip, k2, s4 = gate_setup(config, traps)
    native = _keff(k2)
    rows, cis = [], []
    for i, target in enumerate(config.coupling_targets):
        scale = target / native if native > 0 else 0.0
        f2 = gates.average_fidelity(dip, dip.noise_diagonals(k2 * scale), traps.rates,
                                    config.n_trajectories, config.seed, stream=_GATE)
        f4 = gates.average_fidelity(quad, quad.noise_diagonals(s4 * scale), traps.rates,
                                    config.n_trajectories, config.seed, stream=_GATE)
        e2, e4 = f2.error, f4.error
        defined = target > 0 and e4 > 0
        ratio = e2 / e4 if defined else math.nan
        lo, hi = (bootstrap_ratio_ci(1 - f2.samples, 1 - f4.samples, config.n_bootstrap,
                                     derive_seed(config.seed, _BOOT, i)) if defined else (math.nan, math.nan))
        rows.append({"keff_radps": target, "err_2qd": e2, "err_4qd": e4, "ratio": ratio,
                     "stderr_2qd": f2.stderr, "stderr_4qd": f4.stderr})
        cis.append({"keff_radps": target, "ratio_ci90_low": lo, "ratio_ci90_high": hi,
                    "keff_4qd_radps": _keff(s4[:, 0] - s4[:, 1]) * scale})
    summary = {
        "design": quad.design.to_dict(),
        "gate_time_s": quad.duration,
        "delta_radps": quad.delta,
        "omega_2qd_radps": dip.omega,
        "native_keff_2qd": native,
        "n_traj_per_state": config.n_trajectories,
        "bootstrap": cis,
    }
    return StudyResult(rows, summary, GATE_COLUMNS)


def gate_population_trace(config: RunConfig, n_points: int = 401) -> StudyResult:
    """Noiseless basis populations from |0> across the designed gate."""
    design = gates.design_gate(config.gate_n, config.gate_m)
    t = np.linspace(0.0, design.t_f, n_points)
    pop = gates.populations(design.model(), [1.0, 0.0, 0.0, 0.0], t)
    rows = [{"time": ti / config.delta, "p0": p[0], "p1": p[1], "pe0": p[2], "pe1": p[3]} for ti, p in zip(t, pop)]
    return StudyResult(rows, {"design": design.to_dict()}, ["time", "p0", "p1", "pe0", "pe1"])
