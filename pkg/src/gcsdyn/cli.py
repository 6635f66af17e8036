# coding: utf-8
"""Batch scenario runner: every capability as a subcommand over a strict
JSON scenario, emitting CSV series and JSON reports.

Scenarios are strict JSON (unknown fields rejected).  Reports embed the
resolved numerics and a pass/fail verdict; exit codes are 0 (pass),
2 (quantitative failure), 1 (usage or input error).  Identical scenario and
seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import charts, classical, evolution, gcs_family, lie_core

DEFAULT_NUMERICS = {
    "dt": 1e-3,
    "classical_dt": 1e-2,
    "tail_tol": 1e-10,
    "fd_step": 1e-4,
    "fd_param_step": 1e-5,
    "rep_tol": 1e-10,
    "stability_tol": 1e-8,
    "quadrature": None,           # chart-dependent default sizes
}

_TOP_KEYS = {"representation", "fiducial", "chart", "hamiltonian", "task",
             "numerics", "output", "seed"}


class ScenarioError(Exception):
    """Input error in a scenario file."""


# ---------------------------------------------------------------------------
# Scenario parsing (strict)
# ---------------------------------------------------------------------------

def _require_keys(d: dict, allowed: set, required: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ScenarioError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ScenarioError(f"{where}: missing fields {sorted(missing)}")


def _positive(value, name):
    if not (isinstance(value, (int, float)) and value > 0):
        raise ScenarioError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def coeff_from_json(spec):
    """Coefficient expression: const | poly | trig | sum | product.

    Sums and products evaluate left to right so scenario results are
    bit-reproducible across runs.
    """
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda t: c
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ScenarioError(f"bad coefficient expression {spec!r}")
    kind, val = next(iter(spec.items()))
    if kind == "const":
        c = float(val)
        return lambda t: c
    if kind == "poly":
        coefs = [float(v) for v in val]
        def poly(t, coefs=tuple(coefs)):
            acc = 0.0
            for k, ck in enumerate(coefs):
                acc = acc + ck * t ** k
            return acc
        return poly
    if kind == "trig":
        _require_keys(val, {"fn", "amplitude", "omega", "phase"}, {"fn"}, "trig")
        fn = {"cos": math.cos, "sin": math.sin}.get(val["fn"])
        if fn is None:
            raise ScenarioError(f"trig fn must be cos or sin, got {val['fn']!r}")
        amp = float(val.get("amplitude", 1.0))
        omega = float(val.get("omega", 1.0))
        phase = float(val.get("phase", 0.0))
        return lambda t: amp * fn(omega * t + phase)
    if kind == "sum":
        parts = [coeff_from_json(v) for v in val]
        def total(t, parts=tuple(parts)):
            acc = 0.0
            for p in parts:
                acc = acc + p(t)
            return acc
        return total
    if kind == "product":
        parts = [coeff_from_json(v) for v in val]
        def prod(t, parts=tuple(parts)):
            acc = 1.0
            for p in parts:
                acc = acc * p(t)
            return acc
        return prod
    raise ScenarioError(f"unknown coefficient kind {kind!r}")


def build_representation(spec: dict) -> lie_core.Representation:
    if not isinstance(spec, dict) or "algebra" not in spec:
        raise ScenarioError("representation spec needs an 'algebra' field")
    try:
        return lie_core.rep_from_spec(spec)
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"representation: {exc}") from exc


def build_fiducial(spec, rep) -> gcs_family.FiducialSpec:
    if spec is None:
        return gcs_family.fiducial_lowest_weight(rep)
    _require_keys(spec, {"kind", "index"}, {"kind"}, "fiducial")
    if spec["kind"] == "lowest_weight":
        return gcs_family.fiducial_lowest_weight(rep)
    if spec["kind"] == "basis":
        idx = int(spec.get("index", 0))
        if not 0 <= idx < rep.hilbert_dim:
            raise ScenarioError(f"fiducial index {idx} out of range")
        return gcs_family.fiducial_basis_state(rep, idx)
    raise ScenarioError(f"unknown fiducial kind {spec['kind']!r}")


def build_chart(spec, rep) -> charts.CosetChart:
    if spec is None:
        raise ScenarioError("this task requires a 'chart' block")
    _require_keys(spec, {"kind"}, {"kind"}, "chart")
    try:
        return charts.make_chart(spec["kind"], rep)
    except ValueError as exc:
        raise ScenarioError(f"chart: {exc}") from exc


def build_hamiltonian(spec, rep) -> evolution.HamiltonianSpec:
    if spec is None:
        raise ScenarioError("this task requires a 'hamiltonian' block")
    _require_keys(spec, {"terms"}, {"terms"}, "hamiltonian")
    terms = []
    for i, term in enumerate(spec["terms"]):
        _require_keys(term, {"coeff", "op"}, {"coeff", "op"}, f"hamiltonian.terms[{i}]")
        op = term["op"]
        if not isinstance(op, (int, str)):
            raise ScenarioError(f"hamiltonian.terms[{i}].op must be an index or name")
        terms.append((coeff_from_json(term["coeff"]), op))
    ham = evolution.HamiltonianSpec(terms)
    try:
        ham.matrix(0.0, rep)
    except ValueError as exc:
        raise ScenarioError(f"hamiltonian: {exc}") from exc
    return ham


def build_quadrature(chart: charts.CosetChart, numerics: dict) -> charts.Quadrature:
    spec = numerics.get("quadrature")
    if spec is None:
        return chart.default_quadrature()
    allowed = {"n_radial", "r_max", "n_angles", "n_polar"}
    _require_keys(spec, allowed, set(), "numerics.quadrature")
    return chart.default_quadrature(**spec)


def resolve_numerics(spec) -> dict:
    numerics = dict(DEFAULT_NUMERICS)
    if spec is not None:
        _require_keys(spec, set(DEFAULT_NUMERICS), set(), "numerics")
        numerics.update(spec)
    for key in ("dt", "classical_dt", "tail_tol", "fd_step", "fd_param_step",
                "rep_tol", "stability_tol"):
        _positive(numerics[key], f"numerics.{key}")
    return numerics


def load_scenario(path: str, overrides) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    for item in overrides or []:
        if "=" not in item:
            raise ScenarioError(f"override {item!r} is not key=value")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ScenarioError(f"override path {key!r} crosses a non-object")
        node[parts[-1]] = value
    _require_keys(data, _TOP_KEYS, {"representation", "task"}, "scenario")
    return data


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class _JsonEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, complex):
            return [o.real, o.imag]
        return super().default(o)


def write_report(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, cls=_JsonEncoder)
        fh.write("\n")


def _report_skeleton(command: str, scenario: dict, numerics: dict) -> dict:
    return {
        "command": command,
        "numerics": {k: v for k, v in numerics.items() if v is not None},
        "seed": scenario.get("seed", 0),
        "representation": scenario["representation"],
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _initial_state(task: dict, rep, chart, fid, tail_tol):
    spec = task.get("initial", {"kind": "fiducial"})
    _require_keys(spec, {"kind", "z", "index"}, {"kind"}, "task.initial")
    if spec["kind"] == "fiducial":
        return fid.state.copy()
    if spec["kind"] == "basis":
        idx = int(spec.get("index", 0))
        psi = np.zeros(rep.hilbert_dim, complex)
        psi[idx] = 1.0
        return psi
    if spec["kind"] == "gcs":
        z = _as_complex(spec.get("z", [0.0, 0.0]), "task.initial.z")
        if chart is None:
            raise ScenarioError("gcs initial state needs a chart")
        return gcs_family.gcs_state(rep, chart, fid, z, tail_tol=tail_tol)
    raise ScenarioError(f"unknown initial kind {spec['kind']!r}")


def _as_complex(val, name) -> complex:
    if isinstance(val, (int, float)):
        return complex(val)
    if isinstance(val, list) and len(val) == 2:
        return complex(float(val[0]), float(val[1]))
    raise ScenarioError(f"{name} must be a number or [re, im] pair")


def _time_grid(task: dict) -> np.ndarray:
    t_max = _positive(task.get("t_max", 1.0), "task.t_max")
    n_out = int(task.get("n_out", 51))
    if n_out < 2:
        raise ScenarioError("task.n_out must be at least 2")
    return np.linspace(0.0, t_max, n_out)


def cmd_rep_check(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, set(), set(), "task")
    rep = build_representation(scenario["representation"])
    report = lie_core.check_structure(rep, tol=numerics["rep_tol"])
    payload = _report_skeleton("rep-check", scenario, numerics)
    payload.update({
        "max_residual": report.worst_residual,
        "worst_pair": list(report.worst_pair),
        "residuals": report.residuals,
        "tolerance": report.tolerance,
        "reliable_dim": rep.reliable_dim,
        "verdict": "pass" if report.passed else "fail",
    })
    _emit(payload, scenario, out_dir, "rep_check", quiet)
    return 0 if report.passed else 2


def cmd_identity(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"compress_dim", "tolerance"}, set(), "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    chart = build_chart(scenario.get("chart"), rep)
    quad = build_quadrature(chart, numerics)
    compress = task.get("compress_dim")
    report = gcs_family.resolution_of_identity(
        rep, chart, fid, quad,
        compress_dim=int(compress) if compress is not None else None,
        tail_tol=numerics["tail_tol"])
    tol = float(task.get("tolerance", 1e-8))
    payload = _report_skeleton("identity", scenario, numerics)
    payload.update(report.to_jsonable())
    payload["tolerance"] = tol
    payload["verdict"] = "pass" if report.deviation < tol else "fail"
    csv_name = scenario.get("output", {}).get("csv")
    if csv_name:
        write_csv(out_dir / csv_name, ["basis_index", "diag_deficit"],
                  [(k, d) for k, d in enumerate(report.diag_deficit)])
    _emit(payload, scenario, out_dir, "identity", quiet)
    return 0 if payload["verdict"] == "pass" else 2


def cmd_evolve(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"initial", "t_max", "n_out", "observables"}, set(), "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    chart = build_chart(scenario["chart"], rep) if scenario.get("chart") else None
    ham = build_hamiltonian(scenario.get("hamiltonian"), rep)
    psi0 = _initial_state(task, rep, chart, fid, numerics["tail_tol"])
    t_grid = _time_grid(task)
    obs_names = task.get("observables", list(rep.generator_names))
    obs = [(name, evolution.HamiltonianSpec._resolve(name, rep)) for name in obs_names]
    traj = evolution.evolve(rep, ham, psi0, t_grid, numerics["dt"],
                            tail_tol=numerics["tail_tol"])
    header = ["t"]
    for name, _ in obs:
        header += [f"re_{name}", f"im_{name}"]
    header.append("norm")
    rows = []
    for i, t in enumerate(traj.times):
        row = [t]
        for _, op in obs:
            val = complex(np.vdot(traj.states[i], op @ traj.states[i]))
            row += [val.real, val.imag]
        row.append(float(np.linalg.norm(traj.states[i])))
        rows.append(row)
    csv_name = scenario.get("output", {}).get("csv", "evolve.csv")
    write_csv(out_dir / csv_name, header, rows)
    norm_dev = max(abs(r[-1] - 1.0) for r in rows)
    payload = _report_skeleton("evolve", scenario, numerics)
    payload.update({
        "t_max": float(t_grid[-1]),
        "n_out": len(t_grid),
        "max_norm_deviation": norm_dev,
        "norm_tolerance": 1e-10,
        "stepper": traj.stepper_meta,
        "csv": csv_name,
        "verdict": "pass" if norm_dev < 1e-10 else "fail",
    })
    _emit(payload, scenario, out_dir, "evolve", quiet)
    return 0 if payload["verdict"] == "pass" else 2


def cmd_stability(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"z0", "t_max", "n_out", "superstability_subset"},
                  set(), "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    chart = build_chart(scenario.get("chart"), rep)
    ham = build_hamiltonian(scenario.get("hamiltonian"), rep)
    t_grid = _time_grid(task)
    z0 = _as_complex(task.get("z0", [0.5, 0.0]), "task.z0")
    mk = evolution.linearity_classify(rep, ham, t_grid[:: max(1, len(t_grid) // 8)])
    stab = evolution.stability_test(rep, chart, fid, ham, z0, t_grid,
                                    numerics["dt"], tol=numerics["stability_tol"])
    payload = _report_skeleton("stability", scenario, numerics)
    payload.update({
        "linearity": mk.to_jsonable(),
        "stability": stab.to_jsonable(),
        "fidelity_min": stab.min_fidelity,
    })
    subset = task.get("superstability_subset")
    if subset:
        ss = evolution.superstability_check(rep, ham, fid, subset, t_grid,
                                            numerics["dt"],
                                            tol=numerics["stability_tol"])
        payload["superstability"] = ss.to_jsonable()
    expected_stable = mk.classification == "LinearInGenerators"
    consistent = (not expected_stable) or stab.stable
    payload["verdict"] = "pass" if consistent else "fail"
    _emit(payload, scenario, out_dir, "stability", quiet)
    return 0 if consistent else 2


def cmd_classical(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"route", "z0", "ell0", "active", "t_max", "n_out"},
                  {"route"}, "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    ham = build_hamiltonian(scenario.get("hamiltonian"), rep)
    t_grid = _time_grid(task)
    payload = _report_skeleton("classical", scenario, numerics)
    csv_name = scenario.get("output", {}).get("csv", "classical.csv")
    route = task["route"]
    if route == "coset":
        chart = build_chart(scenario.get("chart"), rep)
        z0 = _as_complex(task.get("z0", [0.5, 0.0]), "task.z0")
        field = classical.coset_rhs_field(rep, chart, fid, ham,
                                          h=numerics["fd_step"])
        traj = classical.integrate_classical(field, z0, t_grid,
                                             numerics["classical_dt"],
                                             domain=chart.domain_contains)
        energies = [classical.classical_hamiltonian(rep, fid, ham, t, chart=chart, z=z)
                    for t, z in zip(traj.times, traj.points)]
        rows = [(t, z.real, z.imag, e)
                for t, z, e in zip(traj.times, traj.points, energies)]
        write_csv(out_dir / csv_name, ["t", "re_z", "im_z", "energy"], rows)
        kp = classical.kahler_metric(rep, chart, fid, z0, h=numerics["fd_step"])
        payload["metric_at_start"] = {"potential": kp.potential, "metric": kp.metric}
    elif route == "birkhoff":
        data = classical.birkhoff_data(rep, fid)
        if task.get("active") is not None:
            data = data.restrict([int(i) for i in task["active"]])
        ell0 = np.asarray(task.get("ell0", [0.0] * data.n_active), dtype=float)
        if len(ell0) != data.n_active:
            raise ScenarioError(f"ell0 needs {data.n_active} components")
        grad = classical.birkhoff_grad_h(rep, fid, ham, data,
                                         h=numerics["fd_param_step"])
        om0 = classical.omega_matrix(data, ell0, h=numerics["fd_param_step"])
        payload["omega"] = {"rank": om0.rank, "cond": om0.cond,
                            "singular_values": om0.singular_values,
                            "null_directions": om0.null_directions}
        try:
            def field(t, ell):
                return classical.birkhoff_rhs(data, grad, ell, t,
                                              h=numerics["fd_param_step"])
            traj = classical.integrate_classical(field, ell0, t_grid,
                                                 numerics["classical_dt"])
        except classical.DegenerateForm as exc:
            payload.update({
                "degenerate_form": {
                    "rank": exc.rank,
                    "null_directions": exc.null_directions,
                },
                "verdict": "degenerate",
            })
            _emit(payload, scenario, out_dir, "classical", quiet)
            return 2
        energies = [classical.classical_hamiltonian(rep, fid, ham, t,
                                                    ell=data.embed(e))
                    for t, e in zip(traj.times, traj.points)]
        header = ["t"] + [f"ell_{i}" for i in data.active] + ["energy"]
        rows = [(t, *e, en) for t, e, en in zip(traj.times, traj.points, energies)]
        write_csv(out_dir / csv_name, header, rows)
    else:
        raise ScenarioError(f"unknown classical route {route!r}")
    drift = float(np.max(np.abs(np.asarray(energies) - energies[0])))
    payload.update({
        "energy_drift": drift,
        "csv": csv_name,
        "verdict": "pass",
    })
    _emit(payload, scenario, out_dir, "classical", quiet)
    return 0


def cmd_compare(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"z0", "t_max", "n_out", "fidelity_tol"}, set(), "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    chart = build_chart(scenario.get("chart"), rep)
    ham = build_hamiltonian(scenario.get("hamiltonian"), rep)
    t_grid = _time_grid(task)
    z0 = _as_complex(task.get("z0", [0.5, 0.0]), "task.z0")
    report = classical.compare_quantum_classical(
        rep, chart, fid, ham, z0, t_grid, numerics["dt"],
        fd_step=numerics["fd_step"], classical_dt=numerics["classical_dt"])
    csv_name = scenario.get("output", {}).get("csv", "compare.csv")
    rows = [(t, f, d) for t, f, d in zip(report.times, report.fidelity,
                                         report.coordinate_discrepancy)]
    write_csv(out_dir / csv_name, ["t", "fidelity", "coord_discrepancy"], rows)
    payload = _report_skeleton("compare", scenario, numerics)
    payload.update(report.to_jsonable())
    payload["csv"] = csv_name
    fid_tol = float(task.get("fidelity_tol", 1e-5))
    if report.linearity_class == "LinearInGenerators":
        verdict = "pass" if report.min_fidelity >= 1.0 - fid_tol else "fail"
    else:
        verdict = "approximate_regime"
    payload["fidelity_tol"] = fid_tol
    payload["verdict"] = verdict
    _emit(payload, scenario, out_dir, "compare", quiet)
    return 0 if verdict != "fail" else 2


def cmd_povm(scenario, out_dir, quiet):
    numerics = resolve_numerics(scenario.get("numerics"))
    task = scenario["task"]
    _require_keys(task, {"sectors", "state", "rotation", "translated",
                         "compress_dim"}, set(), "task")
    rep = build_representation(scenario["representation"])
    fid = build_fiducial(scenario.get("fiducial"), rep)
    chart = build_chart(scenario.get("chart"), rep)
    ham = (build_hamiltonian(scenario.get("hamiltonian"), rep)
           if scenario.get("hamiltonian") else None)
    quad = build_quadrature(chart, numerics)
    n_sectors = int(task.get("sectors", 8))
    partition = charts.angular_sectors(n_sectors)
    povm = gcs_family.build_povm(rep, chart, fid, partition, quad,
                                 tail_tol=numerics["tail_tol"])
    state_spec = task.get("state", {"kind": "fiducial"})
    psi = _initial_state({"initial": state_spec}, rep, chart, fid,
                         numerics["tail_tol"])
    probs = gcs_family.measurement_distribution(psi, povm)
    payload = _report_skeleton("povm", scenario, numerics)
    payload.update({
        "n_sectors": n_sectors,
        "cell_probabilities": probs,
        "total_probability": float(probs.sum()),
        "quad_error_bound": povm.quad_error_bound,
        "coverage_loss": povm.coverage_loss,
    })
    verdict_ok = True
    if task.get("rotation") is not None:
        angle = float(task["rotation"])
        params = np.zeros(rep.algebra.dim)
        rot_name = {"plane": "N", "sphere": "Jz", "disk": "K0"}[chart.kind]
        if rot_name not in chart.indices:
            raise ScenarioError(f"chart lacks rotation generator {rot_name}")
        params[chart.indices[rot_name]] = angle
        compress = task.get("compress_dim")
        cov = gcs_family.covariance_check(
            rep, chart, fid, lie_core.GroupPoint(params), partition, quad,
            compress_dim=int(compress) if compress is not None else None,
            tail_tol=numerics["tail_tol"])
        payload["covariance"] = cov.to_jsonable()
        verdict_ok = verdict_ok and cov.deviation <= max(cov.quad_error_bound, 1e-12)
    if task.get("translated") is not None:
        tspec = task["translated"]
        _require_keys(tspec, {"t"}, {"t"}, "task.translated")
        if ham is None:
            raise ScenarioError("translated check requires a hamiltonian")
        tr = gcs_family.translated_distribution_check(
            rep, chart, fid, psi, ham, partition, quad,
            float(tspec["t"]), dt=numerics["dt"], tail_tol=numerics["tail_tol"])
        payload["translated"] = tr.to_jsonable()
        if tr.linearity_class == "LinearInGenerators":
            verdict_ok = verdict_ok and tr.max_difference <= tr.error_budget
    payload["verdict"] = "pass" if verdict_ok else "fail"
    _emit(payload, scenario, out_dir, "povm", quiet)
    return 0 if verdict_ok else 2


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "rep-check": cmd_rep_check,
    "identity": cmd_identity,
    "evolve": cmd_evolve,
    "stability": cmd_stability,
    "classical": cmd_classical,
    "compare": cmd_compare,
    "povm": cmd_povm,
}


def _emit(payload: dict, scenario: dict, out_dir: Path, default_name: str,
          quiet: bool) -> None:
    name = scenario.get("output", {}).get("report", f"{default_name}.json")
    write_report(out_dir / name, payload)
    if not quiet:
        print(f"{payload['command']}: {payload.get('verdict', 'done')} "
              f"-> {out_dir / name}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gcsdyn",
        description="coherent-state family scenario runner (JSON in, CSV/JSON out)")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--scenario", required=True, help="path to a JSON scenario")
    parser.add_argument("--out-dir", default=".", help="directory for outputs")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="dotted-path scenario override (value parsed as JSON)")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        scenario = load_scenario(args.scenario, args.override)
        if "output" in scenario and scenario["output"] is not None:
            _require_keys(scenario["output"], {"csv", "report"}, set(), "output")
        return _COMMANDS[args.command](scenario, out_dir, args.quiet)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (lie_core.TruncationOverflow, classical.DomainExit, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
