"""Experiment orchestration: JSON configs in, CSV + JSON + manifest out.

Exit-code contract: 0 success, 2 config/schema violation (the message names
the offending field), 3 numerical guard tripped (the message names the
guard).  CSV bodies are deterministic for a fixed config and seed; the
manifest carries the timestamps and environment data.
"""

from __future__ import annotations

import hashlib
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .kernel3p1 import (GROWTH_CONVERGENT, SLOPE_DIVERGENT, STDERR_BUDGET,
                        GaussianPulse4, Potential3p1, SamplerSpec,
                        cutoff_probe, hs_norm_squared, tangential_probe)
from .lattice import (DegeneracyError, GaussianPulse, LatticeConfig,
                      Potential1p1, UnitarityError, evolve, free_mode_basis)
from .observables import (TWO_PAIR_CHANNEL_CAP, bogolyubov_current,
                          gauge_covariance_probe, linear_phase_functional,
                          pair_number, pair_spectrum, vacuum_persistence)
from .polarization import (blocks, build_Q, class_distance, free_projectors,
                           key_prop_defects, local_gauge_projector,
                           representative_projector)
from .wedge import IllConditionedError, PolarizationBasis, lift

EXPERIMENTS = ("evolve", "shale", "class-probe", "cutoff-probe",
               "tangential-probe", "spectrum", "current", "gauge-probe",
               "sweep")
SWEEP_AXES = ("N", "e", "amplitude", "Lambda")

CALIBRATION = {
    "slope_divergent": SLOPE_DIVERGENT,
    "growth_convergent": GROWTH_CONVERGENT,
    "stderr_budget": STDERR_BUDGET,
    "two_pair_channel_cap": TWO_PAIR_CHANNEL_CAP,
    "lambda_sign": 1.0,
    "pa_regularity_tolerance": 0.20,
}

NUMERICAL_GUARDS = (UnitarityError, IllConditionedError, DegeneracyError)


class SchemaError(ValueError):
    """Config does not match the schema; the message names the field."""


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


def _require(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaError(f"missing field '{path}.{key}'")
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise SchemaError(f"field '{path}.{key}' has the wrong type")
    return val


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"config file '{path}' not found")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise SchemaError("top-level config must be an object")
    schema = _require(cfg, "schema", int, "")
    if schema != 1:
        raise SchemaError("field '.schema' must be 1")
    experiment = _require(cfg, "experiment", str, "")
    if experiment not in EXPERIMENTS:
        raise SchemaError(
            f"field '.experiment' must be one of {', '.join(EXPERIMENTS)}")
    return cfg


def build_lattice(cfg: dict) -> LatticeConfig:
    lat = _require(cfg, "lattice", dict, "")
    N = _require(lat, "N", int, "lattice")
    if N < 4 or (N & (N - 1)) != 0:
        raise SchemaError("field 'lattice.N' must be a power of two >= 4")
    L = _require(lat, "L", (int, float), "lattice")
    m = _require(lat, "m", (int, float), "lattice")
    e = _require(lat, "e", (int, float), "lattice")
    t0 = _require(lat, "t0", (int, float), "lattice")
    t1 = _require(lat, "t1", (int, float), "lattice")
    nsteps = _require(lat, "nsteps", int, "lattice")
    tol = cfg.get("tolerances", {}).get("unitarity", 1e-10)
    try:
        return LatticeConfig(N=N, L=float(L), m=float(m), e=float(e),
                             t0=float(t0), t1=float(t1), nsteps=nsteps,
                             tol_unitarity=float(tol))
    except ValueError as exc:
        raise SchemaError(f"field 'lattice': {exc}") from exc


def _parse_pulse(entry: dict, path: str) -> GaussianPulse:
    if not isinstance(entry, dict):
        raise SchemaError(f"field '{path}' must be an object")
    kwargs = {}
    for key in ("amplitude", "t_center", "x_center", "sigma_t", "sigma_x"):
        kwargs[key] = float(_require(entry, key, (int, float), path))
    try:
        return GaussianPulse(**kwargs)
    except ValueError as exc:
        raise SchemaError(f"field '{path}': {exc}") from exc


def build_potential(cfg: dict, lattice: LatticeConfig) -> Potential1p1:
    pot = cfg.get("potential", {})
    if not isinstance(pot, dict):
        raise SchemaError("field '.potential' must be an object")
    groups = {}
    for name in ("a0_pulses", "a1_pulses", "gamma_pulses"):
        entries = pot.get(name, [])
        if not isinstance(entries, list):
            raise SchemaError(f"field 'potential.{name}' must be a list")
        groups[name] = tuple(
            _parse_pulse(p, f"potential.{name}[{i}]")
            for i, p in enumerate(entries))
    try:
        return Potential1p1.validated(lattice, **groups)
    except ValueError as exc:
        raise SchemaError(f"field 'potential': {exc}") from exc


def _parse_pulse4(entry: dict, path: str) -> GaussianPulse4:
    if not isinstance(entry, dict):
        raise SchemaError(f"field '{path}' must be an object")
    amplitude = float(_require(entry, "amplitude", (int, float), path))
    sigma_t = float(entry.get("sigma_t", 1.0))
    sigma_x = float(entry.get("sigma_x", 1.0))
    t_center = float(entry.get("t_center", 0.0))
    x_center = entry.get("x_center", [0.0, 0.0, 0.0])
    if not (isinstance(x_center, list) and len(x_center) == 3):
        raise SchemaError(f"field '{path}.x_center' must be a 3-vector")
    try:
        return GaussianPulse4(amplitude=amplitude, t_center=t_center,
                              sigma_t=sigma_t,
                              x_center=tuple(float(v) for v in x_center),
                              sigma_x=sigma_x)
    except ValueError as exc:
        raise SchemaError(f"field '{path}': {exc}") from exc


def build_kernel_potential(section: dict, key: str) -> Potential3p1:
    comp = _require(section, key, dict, "kernel3p1")
    comps = []
    for name in ("a0", "a1", "a2", "a3"):
        entry = comp.get(name)
        comps.append(None if entry is None
                     else _parse_pulse4(entry, f"kernel3p1.{key}.{name}"))
    m = float(section.get("m", 1.0))
    e = float(section.get("e", 1.0))
    try:
        return Potential3p1(components=tuple(comps), m=m, e=e)
    except ValueError as exc:
        raise SchemaError(f"field 'kernel3p1.{key}': {exc}") from exc


def build_kernel_inputs(cfg: dict, seed_override=None):
    section = _require(cfg, "kernel3p1", dict, "")
    cutoffs = _require(section, "cutoffs", list, "kernel3p1")
    if not cutoffs or not all(isinstance(c, (int, float)) for c in cutoffs):
        raise SchemaError("field 'kernel3p1.cutoffs' must be a numeric list")
    samples = _require(section, "samples", int, "kernel3p1")
    seed = seed_override if seed_override is not None \
        else _require(section, "seed", int, "kernel3p1")
    try:
        sampler = SamplerSpec(samples=samples, seed=int(seed))
    except ValueError as exc:
        raise SchemaError(f"field 'kernel3p1.samples': {exc}") from exc
    return section, [float(c) for c in cutoffs], sampler


# ---------------------------------------------------------------------------
# experiment implementations; each returns (header, rows, report_dict)

def _free_pol(lattice: LatticeConfig) -> PolarizationBasis:
    v_plus, v_minus, _ = free_mode_basis(lattice)
    return PolarizationBasis(minus=v_minus, plus=v_plus)


def _exp_evolve(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    order = int(cfg.get("observables", {}).get("order", 2))
    U = evolve(lattice, pot, lattice.t0, lattice.t1, order=order)
    pol = _free_pol(lattice)
    lifted = lift(U, pol, pol)
    header = ["t_from", "t_to", "unitarity_defect", "pair_number",
              "vacuum_persistence"]
    row = [U.t_from, U.t_to, U.unitarity_defect,
           pair_number(U, pol, pol), vacuum_persistence(lifted)]
    return header, [row], {"order": order,
                           "smallest_singular": lifted.smallest_singular}


def _exp_shale(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    order = int(cfg.get("observables", {}).get("order", 2))
    U = evolve(lattice, pot, lattice.t0, lattice.t1, order=order)
    p_minus, p_plus = free_projectors(lattice)
    blk = blocks(U, (p_minus, p_plus), (p_minus, p_plus))
    pol = _free_pol(lattice)
    lifted = lift(U, pol, pol)
    header = ["hs_plus_minus", "hs_minus_plus", "pair_number",
              "vacuum_persistence"]
    row = [blk.report.hs_plus_minus, blk.report.hs_minus_plus,
           pair_number(U, pol, pol), vacuum_persistence(lifted)]
    return header, [row], {"order": order}


def _exp_class_probe(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    section = cfg.get("class_probe", {})
    probe_time = float(section.get("probe_time",
                                   0.5 * (lattice.t0 + lattice.t1)))
    sign = float(section.get("sign", CALIBRATION["lambda_sign"]))
    order = int(cfg.get("observables", {}).get("order", 2))
    d1, d2 = key_prop_defects(lattice, pot, window=(lattice.t0, probe_time),
                              order=order, sign=sign)
    p_minus, p_plus = free_projectors(lattice)
    p_a = local_gauge_projector(lattice, pot, probe_time, sign=sign)
    Q = build_Q(p_plus, p_minus, p_a)
    rep = representative_projector(Q, p_minus)
    U = evolve(lattice, pot, lattice.t0, probe_time, order=order)
    interp = U.matrix @ p_minus.matrix @ U.matrix.conj().T
    cd = class_distance(rep, interp)
    header = ["N", "delta1", "delta2", "class_distance"]
    return header, [[lattice.N, d1, d2, cd]], {
        "probe_time": probe_time, "lambda_sign": sign,
        "pa_hermiticity_defect": p_a.hermiticity_defect,
        "pa_idempotency_defect": p_a.idempotency_defect,
    }


def _probe_report(result):
    return {
        "slope": result.slope,
        "verdict": result.verdict,
        "stderr_flags": [bool(f) for f in result.stderr_flags],
        "thresholds": {"slope_divergent": SLOPE_DIVERGENT,
                       "growth_convergent": GROWTH_CONVERGENT,
                       "stderr_budget": STDERR_BUDGET},
    }


def _exp_cutoff_probe(cfg, lattice, seed):
    section, cutoffs, sampler = build_kernel_inputs(cfg, seed)
    pot = build_kernel_potential(section, "components")
    result = cutoff_probe(pot, cutoffs, sampler)
    header = ["cutoff", "value", "stderr"]
    rows = [[c, v, s] for c, v, s in
            zip(result.cutoffs, result.hs2, result.stderr)]
    return header, rows, _probe_report(result)


def _exp_tangential_probe(cfg, lattice, seed):
    section, cutoffs, sampler = build_kernel_inputs(cfg, seed)
    pot_a = build_kernel_potential(section, "components")
    pot_b = build_kernel_potential(section, "components_b")
    result = tangential_probe(pot_a, pot_b, cutoffs, sampler)
    header = ["cutoff", "value", "stderr"]
    rows = [[c, v, s] for c, v, s in
            zip(result.cutoffs, result.hs2, result.stderr)]
    return header, rows, _probe_report(result)


def _exp_spectrum(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    obs = cfg.get("observables", {})
    order = int(obs.get("order", 2))
    max_pairs = int(obs.get("max_pairs", 1))
    U = evolve(lattice, pot, lattice.t0, lattice.t1, order=order)
    pol = _free_pol(lattice)
    lifted = lift(U, pol, pol)
    spec = pair_spectrum(lifted, max_pairs=max_pairs)
    header = ["mode_i", "mode_j", "probability"]
    rows = [[int(i), int(j), p] for i, j, p in
            zip(spec.electron_modes, spec.hole_modes, spec.probabilities)]
    report = {"sector_totals": {str(k): v for k, v in
                                spec.sector_totals.items()},
              "max_pairs": max_pairs,
              "mode_momenta": [float(v) for v in free_mode_basis(lattice)[2]]}
    if spec.channel_cap is not None:
        report["two_pair_channel_cap"] = spec.channel_cap
    return header, rows, report


def _exp_current(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    obs = cfg.get("observables", {})
    point = obs.get("current_point")
    if not (isinstance(point, list) and len(point) == 2
            and all(isinstance(v, (int, float)) for v in point)):
        raise SchemaError("field 'observables.current_point' must be [t, x]")
    mu = obs.get("mu", 0)
    if mu not in (0, 1):
        raise SchemaError("field 'observables.mu' must be 0 or 1")
    eps = float(obs.get("eps", 1e-3))
    order = int(obs.get("order", 2))
    theta = None
    phase_cfg = obs.get("phase_functional")
    if phase_cfg is not None:
        if not isinstance(phase_cfg, dict):
            raise SchemaError("field 'observables.phase_functional' "
                              "must be an object")
        coeff = float(_require(phase_cfg, "coefficient", (int, float),
                               "observables.phase_functional"))
        j_pulse = _parse_pulse(
            {k: phase_cfg.get(k, 0.0 if "center" in k else 1.0)
             for k in ("amplitude", "t_center", "x_center",
                       "sigma_t", "sigma_x")},
            "observables.phase_functional")
        j_mu = int(phase_cfg.get("mu", 0))

        def j_ext(component, t, x):
            if component != j_mu:
                return np.zeros_like(np.asarray(x, float))
            return j_pulse(t, x)

        theta = linear_phase_functional(lattice, j_ext, coeff)
    sample = bogolyubov_current(lattice, pot, (float(point[0]),
                                               float(point[1])),
                                mu, phase_functional=theta, eps=eps,
                                order=order)
    header = ["t", "x", "mu", "value", "eps", "residual", "resolved"]
    row = [sample.t, sample.x, sample.mu, sample.value, sample.eps,
           sample.residual, sample.resolved]
    return header, [row], {"bump_sigma_t": sample.bump_sigma_t,
                           "bump_sigma_x": sample.bump_sigma_x}


def _exp_gauge_probe(cfg, lattice, seed):
    pot = build_potential(cfg, lattice)
    order = int(cfg.get("observables", {}).get("order", 4))
    try:
        report = gauge_covariance_probe(lattice, pot, order=order)
    except ValueError as exc:
        raise SchemaError(f"field 'potential': {exc}") from exc
    header = ["fixed_pair_number", "transformed_pair_number"]
    return header, [[report.fixed_pair_number,
                     report.transformed_pair_number]], {"order": order}


_DISPATCH = {
    "evolve": _exp_evolve,
    "shale": _exp_shale,
    "class-probe": _exp_class_probe,
    "cutoff-probe": _exp_cutoff_probe,
    "tangential-probe": _exp_tangential_probe,
    "spectrum": _exp_spectrum,
    "current": _exp_current,
    "gauge-probe": _exp_gauge_probe,
}


# ---------------------------------------------------------------------------
# sweeps

def _apply_axis(cfg: dict, axis: str, value: float) -> dict:
    out = json.loads(json.dumps(cfg))  # deep copy
    if axis == "N":
        n = int(value)
        if n != value or n < 4 or (n & (n - 1)) != 0:
            raise SchemaError(
                f"sweep value {value} for axis 'N' is not a power of two >= 4")
        out.setdefault("lattice", {})["N"] = n
    elif axis == "e":
        out.setdefault("lattice", {})["e"] = float(value)
        if "kernel3p1" in out:
            out["kernel3p1"]["e"] = float(value)
    elif axis == "amplitude":
        # multiplicative scale on every configured pulse amplitude
        pot = out.get("potential", {})
        for group in ("a0_pulses", "a1_pulses", "gamma_pulses"):
            for pulse in pot.get(group, []):
                pulse["amplitude"] = pulse.get("amplitude", 0.0) * value
        kern = out.get("kernel3p1", {})
        for key in ("components", "components_b"):
            for comp in kern.get(key, {}).values():
                if comp is not None:
                    comp["amplitude"] = comp.get("amplitude", 0.0) * value
    else:  # Lambda
        raise SchemaError("axis 'Lambda' applies only to kernel experiments")
    return out


def run_sweep(cfg: dict, axis: str, values, seed=None, threads=1):
    if axis not in SWEEP_AXES:
        raise SchemaError(
            f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got '{axis}'")
    if not values:
        raise SchemaError("sweep values list is empty")
    experiment = cfg.get("experiment")
    if experiment == "sweep":
        raise SchemaError("field '.experiment' must name the swept "
                          "experiment, not 'sweep'")

    if axis == "Lambda":
        if experiment not in ("cutoff-probe", "tangential-probe"):
            raise SchemaError(
                "axis 'Lambda' requires a cutoff-probe or tangential-probe "
                "experiment")
        section, _, sampler = build_kernel_inputs(cfg, seed)
        pot = build_kernel_potential(section, "components")
        pot_b = build_kernel_potential(section, "components_b") \
            if experiment == "tangential-probe" else None
        window = pot.default_window()
        if pot_b is not None:
            wb = pot_b.default_window()
            window = (min(window[0], wb[0]), max(window[1], wb[1]))
        header = ["Lambda", "value", "stderr"]
        rows = []
        for i, lam in enumerate(values):
            sub = SamplerSpec(sampler.samples, sampler.seed + 7919 * i)
            est, err = hs_norm_squared(pot, float(lam), sub, window=window,
                                       pot_b=pot_b)
            rows.append([float(lam), est, err])
        report = {"axis": axis, "values": [float(v) for v in values]}
        vals = np.array([r[1] for r in rows])
        if np.all(vals > 0):
            report["loglog_slope"] = float(np.polyfit(
                np.log(np.asarray(values, float)), np.log(vals), 1)[0])
        return header, rows, report

    configs = [_apply_axis(cfg, axis, v) for v in values]

    def one(sub_cfg):
        lattice = build_lattice(sub_cfg)
        return _DISPATCH[experiment](sub_cfg, lattice, seed)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, configs))
    else:
        results = [one(c) for c in configs]

    sub_header = list(results[0][0])
    drop = sub_header.index(axis) if axis in sub_header else None
    kept = [c for i, c in enumerate(sub_header) if i != drop]
    header = [axis] + kept
    rows = []
    for value, (hdr, sub_rows, _) in zip(values, results):
        if len(sub_rows) != 1:
            raise SchemaError(
                f"experiment '{experiment}' is not single-row and cannot "
                f"be swept over axis '{axis}'")
        row = [v for i, v in enumerate(sub_rows[0]) if i != drop]
        rows.append([float(value)] + row)

    report = {"axis": axis, "values": [float(v) for v in values],
              "sub_reports": [r[2] for r in results]}
    # ratio column for scaling studies on the last data column
    last = [row[-1] for row in rows]
    header = header + ["ratio_to_previous"]
    for i, row in enumerate(rows):
        row.append(float("nan") if i == 0 or last[i - 1] == 0
                   else last[i] / last[i - 1])
    for name in ("pair_number",):
        if name in kept and all(v > 0 for v in
                                (row[1 + kept.index(name)] for row in rows)):
            ys = [row[1 + kept.index(name)] for row in rows]
            xs = [float(v) for v in values]
            if all(x > 0 for x in xs):
                report["loglog_slope"] = float(np.polyfit(
                    np.log(xs), np.log(ys), 1)[0])
    return header, rows, report


# ---------------------------------------------------------------------------
# output plumbing

def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def execute(config_path, out_dir, seed=None, threads=1,
            sweep_axis=None, sweep_values=None) -> int:
    """Run one experiment (or a sweep) and write outputs; returns the exit
    code of the contract."""
    started = time.time()
    try:
        cfg = load_config(config_path)
        experiment = cfg["experiment"]
        if experiment == "sweep" and sweep_axis is None:
            section = _require(cfg, "sweep", dict, "")
            sweep_axis = _require(section, "axis", str, "sweep")
            sweep_values = _require(section, "values", list, "sweep")
            experiment = _require(section, "experiment", str, "sweep")
            if experiment not in _DISPATCH:
                raise SchemaError("field 'sweep.experiment' must name a "
                                  "non-sweep experiment")
            cfg = dict(cfg, experiment=experiment)
        if sweep_axis is not None:
            header, rows, report = run_sweep(
                cfg, sweep_axis, sweep_values, seed=seed,
                threads=threads or 1)
            name = f"sweep-{experiment}"
        else:
            lattice = build_lattice(cfg) if experiment not in (
                "cutoff-probe", "tangential-probe") else None
            header, rows, report = _DISPATCH[experiment](cfg, lattice, seed)
            name = experiment
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_GUARDS as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 3

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    json_path = out / f"{name}.json"
    manifest_path = out / "manifest.json"
    _write_csv(csv_path, header, rows)
    json_path.write_text(json.dumps({"experiment": name, **report},
                                    sort_keys=True, indent=2) + "\n")
    manifest = {
        "config_hash": _config_hash(cfg),
        "seed": seed,
        "threads": threads,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "diracsea": __version__,
        },
        "wall_time_s": time.time() - started,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": [csv_path.name, json_path.name],
        "calibration": CALIBRATION,
    }
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2)
                             + "\n")
    return 0
