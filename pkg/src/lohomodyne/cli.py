"""Batch command-line front end.

Subcommands ``bound``, ``gkp plan``, ``gkp fidelity`` and ``witness`` read a
JSON config and write CSV (17 significant digits, ``#`` provenance lines,
header row) or an aligned plain-text table.

Exit codes: 0 success, 2 validation error, 3 invariant violation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bounds import (
    ConditionalDisplacementSpec,
    FunctionMeasureMoments,
    TeleportationMoments,
    charfn_error_bound,
    conditional_displacement_bound,
    function_distance_bound,
    function_distance_bound_sph,
    measurement_fidelity_bound,
    measurement_fidelity_bound_sph,
    moment_error_bound,
    moment_error_bound_at,
    multi_measurement_function_bound,
    teleportation_bound,
)
from .core import ApparatusModel, StateMoments, standard_ensemble, validate_ensemble
from .errors import ConfigError, EmptyGrid, NoBudget, NumericError, ValidationError
from .gkp import (
    analytic_entanglement_fidelity,
    build_gkp_code,
    delta_from_n_bar,
    displacement_channel_kraus,
    entanglement_fidelity,
    sigma_gkp_sq_from_delta,
    squeezing_db,
    transpose_channel_recovery,
)
from .planner import PHOTODIODE_NOISE, GkpBudgetInput, plan, reference_inputs
from .witness import CoherentWitnessInput, witness_point

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# config helpers


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def expand_axis(name: str, spec) -> list:
    """Grid axis from a scalar, a list, ``{"linspace": [a, b, n]}`` or ``{"logspace": [a, b, n]}``.

    ``logspace`` endpoints are values, not exponents.
    """
    if isinstance(spec, dict):
        if len(spec) != 1:
            raise ConfigError(f"field {name!r}: axis object needs exactly one of linspace/logspace")
        (kind, args), = spec.items()
        if kind not in ("linspace", "logspace") or not isinstance(args, list) or len(args) != 3:
            raise ConfigError(f"field {name!r}: expected {{'linspace'|'logspace': [start, stop, n]}}")
        a, b, n = args
        if int(n) != n or n < 0:
            raise ConfigError(f"field {name!r}: point count must be a non-negative integer")
        if kind == "linspace":
            values = np.linspace(float(a), float(b), int(n))
        else:
            if a <= 0 or b <= 0:
                raise ConfigError(f"field {name!r}: logspace endpoints must be positive")
            values = np.geomspace(float(a), float(b), int(n))
        values = [float(v) for v in values]
    elif isinstance(spec, list):
        values = spec
    else:
        values = [spec]
    if len(values) == 0:
        raise EmptyGrid(f"grid axis {name!r} has no points")
    return values


def grid_points(base: dict, grid: dict) -> list[dict]:
    if not isinstance(grid, dict):
        raise ConfigError("field 'grid' must be an object")
    names = list(grid)
    axes = [expand_axis(f"grid.{k}", grid[k]) for k in names]
    points = []
    for combo in itertools.product(*axes):
        p = dict(base)
        p.update(zip(names, combo))
        points.append(p)
    if not points:
        raise EmptyGrid("grid has no points")
    return points


def _req(p: dict, key: str, kind: str):
    if key not in p:
        raise ConfigError(f"{kind}: missing field {key!r}")
    return p[key]


def _num(p: dict, key: str, kind: str, default=None):
    v = p.get(key, default)
    if v is None:
        raise ConfigError(f"{kind}: missing field {key!r}")
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{kind}: field {key!r} must be a number, got {v!r}") from exc


def _apparatus(p: dict, kind: str) -> ApparatusModel:
    if "r" in p:
        return ApparatusModel.gaussian(_num(p, "r", kind))
    if "sigma" in p:
        return ApparatusModel.gaussian(_num(p, "delta", kind) * _num(p, "sigma", kind))
    if "b2" in p and "b4" in p:
        b6 = p.get("b6")
        return ApparatusModel.explicit(float(p["b2"]), float(p["b4"]), None if b6 is None else float(b6))
    raise ConfigError(f"{kind}: give 'r', 'sigma' or explicit 'b2'/'b4'")


def _ensemble(p: dict):
    if "alphas" in p or "omegas" in p:
        return validate_ensemble(_req(p, "alphas", "ensemble"), _req(p, "omegas", "ensemble"))
    return standard_ensemble()


def _moments(p: dict, kind: str) -> StateMoments:
    n = _num(p, "n_tot", kind)
    om = _num(p, "omega_exp", kind, default=n)
    q = p.get("q_sq")
    return StateMoments(omega_exp=om, n_tot=n, q_sq=None if q is None else float(q))


# ---------------------------------------------------------------------------
# bound evaluators: each returns (equation_id, inputs, value, fidelity_lb or None, notes)


def _report_row(rep):
    return rep.equation_id, dict(rep.inputs_echo), rep.distance_sq, rep.fidelity_lb, rep.notes


def _eval_measure(p):
    rep = measurement_fidelity_bound(_num(p, "delta", "measure"), _apparatus(p, "measure"), _moments(p, "measure"), _ensemble(p))
    return _report_row(rep)


def _eval_measure_sph(p):
    q = p.get("q_sq")
    rep = measurement_fidelity_bound_sph(
        _num(p, "delta", "measure-sph"),
        _apparatus(p, "measure-sph"),
        _num(p, "n_tot", "measure-sph"),
        None if q is None else float(q),
    )
    return _report_row(rep)


def _eval_charfn(p):
    variant = p.get("variant", "general")
    q = p.get("q_sq")
    inputs = {
        "delta": _num(p, "delta", "charfn"),
        "gamma_abs": _num(p, "gamma_abs", "charfn"),
        "n_tot": _num(p, "n_tot", "charfn"),
        "variant": variant,
    }
    if q is not None:
        inputs["q_sq"] = float(q)
    v = charfn_error_bound(inputs["delta"], inputs["gamma_abs"], inputs["n_tot"], variant, q)
    return f"charfn-{variant}", inputs, v, None, ("error bound on the characteristic function",)


def _eval_moment(p):
    delta = _num(p, "delta", "moment")
    k = int(_num(p, "k", "moment"))
    n = _num(p, "n_tot", "moment")
    q = _num(p, "q_4k", "moment")
    inputs = {"delta": delta, "k": k, "n_tot": n, "q_4k": q}
    if "lambda" in p:
        lam = _num(p, "lambda", "moment")
        inputs["lambda"] = lam
        v = moment_error_bound_at(delta, k, n, q, lam)
        return "moment-two-term", inputs, v, None, ("squared error bound on the k-th moment",)
    v, lam = moment_error_bound(delta, k, n, q)
    inputs["lambda"] = lam
    notes = ["squared error bound on the k-th moment"]
    if lam == 0:
        notes.append("delta = 0 limit, lambda = 0")
    return "moment-optimized", inputs, v, None, tuple(notes)


def _eval_function(p):
    fm = FunctionMeasureMoments(
        f0=_num(p, "f0", "function"),
        f2=_num(p, "f2", "function"),
        f1=p.get("f1"),
        f4=p.get("f4"),
    )
    delta = _num(p, "delta", "function")
    if p.get("variant", "general") == "sph":
        q = p.get("q_sq")
        rep = function_distance_bound_sph(delta, fm, _num(p, "n_tot", "function"), None if q is None else float(q))
    else:
        rep = function_distance_bound(delta, fm, _moments(p, "function"), _ensemble(p))
    return _report_row(rep)


def _eval_conddisp(p):
    spec = ConditionalDisplacementSpec(
        xi=_num(p, "xi", "conddisp"),
        **{k: float(p.get(k, 0.0)) for k in ("w0", "w1", "w2", "wt0", "wt1", "wt2")},
    )
    rep = conditional_displacement_bound(_num(p, "delta", "conddisp"), spec, _num(p, "composite_exp", "conddisp"))
    return _report_row(rep)


def _eval_teleport(p):
    chain = TeleportationMoments.from_mapping(
        {k: p[k] for k in ("m1", "m2a", "m2b", "n_a", "n_b", "b2", "b4") if k in p}
    )
    rep = teleportation_bound(
        _num(p, "delta", "teleport"), _num(p, "xi", "teleport"), _num(p, "sigma", "teleport"), chain
    )
    return _report_row(rep)


def _eval_multi(p):
    ms = _req(p, "measurements", "multi")
    if not isinstance(ms, list):
        raise ConfigError("multi: 'measurements' must be a list")
    fms = [
        FunctionMeasureMoments(f0=float(m.get("f0", 0.0)), f1=m.get("f1"), f2=float(m.get("f2", 0.0)))
        for m in ms
    ]
    rep = multi_measurement_function_bound(
        _num(p, "delta", "multi"), fms, _num(p, "omega_tot_exp", "multi"), _num(p, "omega_bar_sq_tot", "multi")
    )
    return _report_row(rep)


BOUND_KINDS = {
    "measure": _eval_measure,
    "measure-sph": _eval_measure_sph,
    "charfn": _eval_charfn,
    "moment": _eval_moment,
    "function": _eval_function,
    "conddisp": _eval_conddisp,
    "teleport": _eval_teleport,
    "multi": _eval_multi,
}


# ---------------------------------------------------------------------------
# output


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str, provenance: list[str]) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        for line in provenance:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt_value(r.get(c)) for c in columns])
        return buf.getvalue()
    cells = [[c for c in columns]]
    for r in rows:
        line = []
        for c in columns:
            v = r.get(c)
            if isinstance(v, (float, np.floating)) and not isinstance(v, bool):
                line.append(format(float(v), ".6g"))
            else:
                line.append(fmt_value(v))
        cells.append(line)
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    for line in provenance:
        buf.write(f"# {line}\n")
    for row in cells:
        buf.write("  ".join(s.rjust(wd) for s, wd in zip(row, widths)).rstrip() + "\n")
    return buf.getvalue()


def _columns(rows: list[dict], leading: list[str], trailing: list[str]) -> list[str]:
    seen = list(leading)
    for r in rows:
        for k in r:
            if k not in seen and k not in trailing:
                seen.append(k)
    return seen + trailing


def _parallel_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands; each returns (rows, columns, extra provenance lines)


def cmd_bound(config: dict, threads: int = 1, seed: int | None = None):
    kind = config.get("kind")
    if kind not in BOUND_KINDS:
        raise ConfigError(f"field 'kind' must be one of {sorted(BOUND_KINDS)}, got {kind!r}")
    params = config.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("field 'params' must be an object")
    points = grid_points(params, config.get("grid", {}))
    evaluator = BOUND_KINDS[kind]

    def one(p):
        eq, inputs, value, fid, notes = evaluator(p)
        row = {"equation_id": eq}
        row.update(inputs)
        row["distance_sq"] = value
        row["fidelity_lb"] = fid
        row["notes"] = list(notes)
        return row

    rows = _parallel_map(one, points, threads)
    cols = _columns(rows, ["equation_id"], ["distance_sq", "fidelity_lb", "notes"])
    return rows, cols, [f"kind={kind} points={len(rows)}"]


def cmd_gkp_plan(config: dict, threads: int = 1, seed: int | None = None):
    targets = [float(t) for t in config.get("sigma_targets", PHOTODIODE_NOISE)]
    pauli = bool(config.get("pauli_allowance", True))
    raw_rows = config.get("rows")
    if raw_rows is None:
        raw_rows = [vars_of(i) for i in reference_inputs()]
    if not isinstance(raw_rows, list) or not raw_rows:
        raise EmptyGrid("field 'rows' must be a non-empty list")

    def one(item):
        idx, r = item
        if not isinstance(r, dict):
            raise ConfigError(f"rows[{idx}] must be an object")
        row = {k: r.get(k) for k in ("n_bar", "sigma_noise", "sigma_0", "eps_ec", "eps_m")}
        for k, v in row.items():
            if v is None:
                raise ConfigError(f"rows[{idx}]: missing field {k!r}")
            row[k] = float(v)
        sg = r.get("sigma_gkp")
        try:
            inp = GkpBudgetInput(**row, sigma_gkp=None if sg is None else float(sg), pauli_allowance=pauli)
        except NoBudget as exc:
            out = {"row": idx, **row, "status": "no-budget", "message": str(exc)}
            return out
        p = plan(inp)
        sgkp = inp.sigma_gkp_value
        infid = 1.0 - analytic_entanglement_fidelity(sgkp**2, inp.sigma_noise**2)
        out = {
            "row": idx,
            "n_bar": inp.n_bar,
            "dB": p.squeezing_db,
            "sigma_gkp": sgkp,
            "sigma_noise": inp.sigma_noise,
            "sigma_0": inp.sigma_0,
            "eps_ec": inp.eps_ec,
            "eps_m": inp.eps_m,
            "r": p.r,
            "n_lo": p.n_lo,
            "sigma_e": p.sigma_e,
        }
        for t in targets:
            out[f"n_lo_at_{t:g}"] = p.n_lo_at(t)
        out["residual"] = p.residual
        out["ec_infidelity"] = infid
        out["status"] = "ok" if infid <= inp.eps_ec else "ec-budget-infeasible"
        out["message"] = ""
        return out

    rows = _parallel_map(one, list(enumerate(raw_rows)), threads)
    lead = ["row", "n_bar", "dB", "sigma_gkp", "sigma_noise", "sigma_0", "eps_ec", "eps_m", "r", "n_lo", "sigma_e"]
    lead += [f"n_lo_at_{t:g}" for t in targets] + ["residual", "ec_infidelity"]
    return rows, lead + ["status", "message"], [f"rows={len(rows)} pauli_allowance={pauli}"]


def vars_of(inp: GkpBudgetInput) -> dict:
    return {
        "n_bar": inp.n_bar,
        "sigma_noise": inp.sigma_noise,
        "sigma_0": inp.sigma_0,
        "eps_ec": inp.eps_ec,
        "eps_m": inp.eps_m,
        "sigma_gkp": inp.sigma_gkp,
    }


def cmd_gkp_fidelity(config: dict, threads: int = 1, seed: int | None = None):
    mode = config.get("mode", "analytic")
    if mode not in ("analytic", "numeric-transpose"):
        raise ConfigError(f"field 'mode' must be 'analytic' or 'numeric-transpose', got {mode!r}")
    if config.get("code_kind", "square") != "square":
        raise ConfigError("only the square GKP code is supported; other codes need an optimized recovery")
    codes = config.get("codes", [{"n_bar": 4.8}])
    if not isinstance(codes, list) or not codes:
        raise EmptyGrid("field 'codes' must be a non-empty list")
    if "sigma_noise_sq" in config:
        noise_sq = [float(v) for v in expand_axis("sigma_noise_sq", config["sigma_noise_sq"])]
    else:
        noise_sq = [float(v) ** 2 for v in expand_axis("sigma_noise", config.get("sigma_noise", [0.0, 0.05, 0.1, 0.15]))]
    if any(v < 0 for v in noise_sq):
        raise ValidationError("noise variances must be non-negative")
    cutoff = config.get("cutoff")
    max_cutoff = int(config.get("max_cutoff", 200))

    def code_delta(c, idx):
        if not isinstance(c, dict):
            raise ConfigError(f"codes[{idx}] must be an object")
        if "delta_env" in c:
            return float(c["delta_env"])
        if "n_bar" in c:
            return delta_from_n_bar(float(c["n_bar"]))
        raise ConfigError(f"codes[{idx}]: give 'n_bar' or 'delta_env'")

    tasks = [(code_delta(c, i), s2) for i, c in enumerate(codes) for s2 in noise_sq]
    built = {}
    if mode == "numeric-transpose":
        for d in sorted({t[0] for t in tasks}):
            built[d] = build_gkp_code(d, cutoff=cutoff, max_cutoff=max_cutoff)

    def one(task):
        d, s2 = task
        g2 = sigma_gkp_sq_from_delta(d)
        row = {"n_bar": 1.0 / (2 * d * d), "dB": squeezing_db(g2), "sigma_noise_sq": s2}
        if mode == "analytic":
            row["infidelity"] = 1.0 - analytic_entanglement_fidelity(g2, s2)
        else:
            code = built[d]
            ch = displacement_channel_kraus(s2, code.cutoff)
            fe = entanglement_fidelity(code, ch, transpose_channel_recovery(code, ch))
            row["infidelity"] = 1.0 - fe
            row["cutoff"] = code.cutoff
        row["mode"] = mode
        return row

    rows = _parallel_map(one, tasks, threads)
    cols = ["n_bar", "dB", "sigma_noise_sq", "infidelity", "mode"]
    extra = [f"mode={mode}"]
    if mode == "numeric-transpose":
        cols.append("cutoff")
        extra.append("numeric transpose-channel recovery; not an optimized-recovery curve")
    return rows, cols, extra


DEFAULT_WITNESS = {
    "delta": {"logspace": [1e-4, 0.3, 12]},
    "s": {"linspace": [-5, 5, 21]},
    "gamma": [-3.0, 0.0, 3.0],
    "ensembles": [
        {"alphas": [1.0], "omegas": [1.0]},
        {"alphas": [0.7071067811865476, 0.7071067811865476], "omegas": [1.0, 0.5]},
    ],
}


def cmd_witness(config: dict, threads: int = 1, seed: int | None = None):
    cfg = {**DEFAULT_WITNESS, **config}
    deltas = expand_axis("delta", cfg["delta"])
    ss = expand_axis("s", cfg["s"])
    gammas = expand_axis("gamma", cfg["gamma"])
    ens_cfg = cfg["ensembles"]
    if not isinstance(ens_cfg, list) or not ens_cfg:
        raise EmptyGrid("field 'ensembles' must be a non-empty list")
    ensembles = []
    for i, e in enumerate(ens_cfg):
        if not isinstance(e, dict):
            raise ConfigError(f"ensembles[{i}] must be an object")
        ensembles.append(validate_ensemble(_req(e, "alphas", f"ensembles[{i}]"), _req(e, "omegas", f"ensembles[{i}]")))
    tasks = [
        (ei, float(d), float(s), tuple([float(g)] * e.n_modes))
        for ei, e in enumerate(ensembles)
        for d in deltas
        for s in ss
        for g in gammas
    ]
    n_random = int(cfg.get("random_points", 0))
    if n_random:
        rng = np.random.default_rng(seed)
        for _ in range(n_random):
            ei = int(rng.integers(len(ensembles)))
            d = float(10 ** rng.uniform(-4, math.log10(0.3)))
            s = float(rng.uniform(-5, 5))
            tasks.append((ei, d, s, tuple(float(g) for g in rng.uniform(-3, 3, ensembles[ei].n_modes))))

    def one(task):
        ei, d, s, g = task
        row = {"ensemble": ei, "delta": d, "s": s, "gamma": ";".join(format(x, ".16e") for x in g)}
        if d == 0:
            row.update({"note": "zero delta skipped"})
            return row
        wp = witness_point(CoherentWitnessInput(d, s, ensembles[ei], g))
        row.update(
            {
                "exact": wp.exact,
                "general": wp.general,
                "refined": wp.refined,
                "refined_regime": wp.refined_regime,
                "general_ok": wp.general_ok,
                "refined_ok": wp.refined_ok,
                "note": "",
            }
        )
        return row

    rows = _parallel_map(one, tasks, threads)
    violations = sum(1 for r in rows if r.get("general_ok") is False or r.get("refined_ok") is False)
    cols = ["ensemble", "delta", "s", "gamma", "exact", "general", "refined", "refined_regime", "general_ok", "refined_ok", "note"]
    extra = [f"points={len(rows)} violations={violations}"]
    return rows, cols, extra, violations


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "pretty"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized scans")

    parser = argparse.ArgumentParser(prog="lohomodyne", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="evaluate a closed-form bound over a grid")
    sub.add_parser("witness", parents=[common], help="exact coherent-state witness scan")
    gkp = sub.add_parser("gkp", help="GKP planning and fidelity curves")
    gsub = gkp.add_subparsers(dest="gkp_command", required=True)
    gsub.add_parser("plan", parents=[common], help="LO and resolution budget table")
    gsub.add_parser("fidelity", parents=[common], help="entanglement infidelity curves")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config = load_config(args.config)
        name = args.command if args.command != "gkp" else f"gkp {args.gkp_command}"
        violations = 0
        if name == "bound":
            if args.config is None:
                raise ConfigError("bound needs --config")
            rows, cols, extra = cmd_bound(config, args.threads, args.seed)
        elif name == "gkp plan":
            rows, cols, extra = cmd_gkp_plan(config, args.threads, args.seed)
        elif name == "gkp fidelity":
            rows, cols, extra = cmd_gkp_fidelity(config, args.threads, args.seed)
        else:
            rows, cols, extra, violations = cmd_witness(config, args.threads, args.seed)
        provenance = [f"lohomodyne {__version__} command={name} config_sha256={config_hash(config)} seed={args.seed}"]
        provenance += extra
        text = render(rows, cols, args.format, provenance)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        if violations:
            print(f"lohomodyne: {violations} domination violations", file=sys.stderr)
            return EXIT_INVARIANT
        return EXIT_OK
    except NumericError as exc:
        print(f"lohomodyne: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"lohomodyne: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"lohomodyne: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
