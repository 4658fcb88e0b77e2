"""Batch driver: run subsystem pipelines and one-shot matrix reports.

Subcommands
    run         execute a configured subsystem-evolution pipeline
    project     project a symplectic matrix's ball onto subsystem A
    williamson  Williamson normal form report for an SPD matrix
    capacity    symplectic capacity of an ellipsoid shape matrix

Exit codes: 0 success; 2 malformed configuration or arguments; 3 divergent
integration (partial output flushed with a terminal status record); 4 invalid
matrix input (non-symplectic or non-SPD).

Config files are flat text, one ``section.key = value`` per line, ``#``
comments allowed.  Values are booleans (true/false), numbers, bare words or
whitespace-separated number lists.  Recognized keys:

    system.n_a, system.n_b, system.hbar
    hamiltonian.model (catalog name) plus model parameters
        (hamiltonian.epsilon, hamiltonian.omega_a, ...)
    initial.z0 (2n numbers), initial.radius
    integration.t_end, integration.step, integration.scheme (rk4|leapfrog),
        integration.reproject, integration.frozen_hessian
    output.format (csv|jsonl), output.path, output.fields, output.stride
    sweep.field (dotted key), sweep.values (';' separates vector values)

The trace columns are, in order: t, z_0..z_{2n-1}, purity, entropy_kB,
capacity, lambda_1..lambda_{n_A}, volume_ratio, symplecticity_defect.
CSV numbers carry 17 significant digits; JSONL records include a
schema_version field.  Identical config and seed give byte-identical output.
The env var PHASESHADOW_TOLERANCES selects the tolerance profile.
"""

import argparse
import json
import sys
from dataclasses import dataclass, replace
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .config import Tolerances, active_tolerances
from .core import Dimensions, load_matrix_text, symplecticity_defect
from .dynamics import DivergenceError
from .gaussian import SubsystemTrace, subsystem_evolution
from .models import catalog_model
from .projection import containment_check, project_ball
from .williamson import symplectic_eigenvalues, williamson, symplectic_capacity
from .core import Ellipsoid

SCHEMA_VERSION = 1
FIELD_GROUPS = ("t", "z", "purity", "entropy_kB", "capacity", "lambda", "volume_ratio", "symplecticity_defect")


class ConfigError(ValueError):
    """Malformed run configuration; message names the offending field."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def parse_config_text(text: str) -> dict:
    """Parse the flat dotted-key grammar into {key: (raw_value, line_no)}."""
    entries: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or "." not in key:
            raise ConfigError(f"line {line_no}: key must be dotted 'section.name', got {key!r}")
        if key in entries:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        entries[key] = (value, line_no)
    return entries


def _parse_scalar(token: str):
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def _parse_value(raw: str):
    parts = raw.split()
    if len(parts) == 1:
        return _parse_scalar(parts[0])
    values = [_parse_scalar(p) for p in parts]
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        return [float(v) for v in values]
    if all(isinstance(v, str) for v in values):
        return values
    raise ValueError("lists must be all numbers or all words")


class _ConfigReader:
    def __init__(self, entries: dict):
        self.entries = entries
        self.used: set = set()

    def get(self, key: str, required: bool = False, default=None, kind=None):
        if key not in self.entries:
            if required:
                raise ConfigError(f"missing required field {key!r}")
            return default
        raw, line_no = self.entries[key]
        self.used.add(key)
        try:
            value = _parse_value(raw)
        except ValueError as exc:
            raise ConfigError(f"line {line_no}: field {key!r}: {exc}") from None
        if kind is not None:
            value = self._coerce(key, line_no, value, kind)
        return value

    def _coerce(self, key, line_no, value, kind):
        def fail(expected):
            raise ConfigError(
                f"line {line_no}: field {key!r} expects {expected}, got {value!r}"
            )

        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                fail("an integer")
        elif kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                fail("a number")
            value = float(value)
        elif kind == "bool":
            if not isinstance(value, bool):
                fail("true or false")
        elif kind == "word":
            if not isinstance(value, str):
                fail("a word")
        elif kind == "floats":
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                value = [float(value)]
            if not isinstance(value, list):
                fail("a list of numbers")
        return value


@dataclass(frozen=True)
class RunConfig:
    dims: Dimensions
    hbar: float
    model: str
    params: dict
    z0: np.ndarray
    radius: float
    t_end: float
    step: float
    scheme: str
    reproject: bool
    frozen_hessian: bool
    out_format: str
    out_path: str
    fields: tuple
    stride: int


def build_run_config(entries: dict, output_override: str | None = None) -> RunConfig:
    reader = _ConfigReader(entries)
    n_a = reader.get("system.n_a", required=True, kind="int")
    n_b = reader.get("system.n_b", required=True, kind="int")
    try:
        dims = Dimensions(n_a, n_b)
    except ValueError as exc:
        raise ConfigError(f"field 'system.n_a'/'system.n_b': {exc}") from None
    hbar = reader.get("system.hbar", default=1.0, kind="float")
    if not hbar > 0:
        raise ConfigError(f"field 'system.hbar' must be positive, got {hbar}")

    model = reader.get("hamiltonian.model", required=True, kind="word")
    params = {}
    for key in entries:
        if key.startswith("hamiltonian.") and key != "hamiltonian.model":
            params[key.split(".", 1)[1]] = reader.get(key)

    z0 = reader.get("initial.z0", required=True, kind="floats")
    if len(z0) != dims.dim:
        raise ConfigError(
            f"field 'initial.z0' needs {dims.dim} numbers for n = {dims.n}, got {len(z0)}"
        )
    radius = reader.get("initial.radius", default=1.0, kind="float")
    if not radius > 0:
        raise ConfigError(f"field 'initial.radius' must be positive, got {radius}")

    t_end = reader.get("integration.t_end", required=True, kind="float")
    step = reader.get("integration.step", required=True, kind="float")
    if not t_end > 0:
        raise ConfigError(f"field 'integration.t_end' must be positive, got {t_end}")
    if not step > 0:
        raise ConfigError(f"field 'integration.step' must be positive, got {step}")
    scheme = reader.get("integration.scheme", default="rk4", kind="word")
    if scheme not in ("rk4", "leapfrog"):
        raise ConfigError(f"field 'integration.scheme' must be rk4 or leapfrog, got {scheme!r}")
    reproject = reader.get("integration.reproject", default=False, kind="bool")
    frozen = reader.get("integration.frozen_hessian", default=False, kind="bool")

    out_format = reader.get("output.format", default="csv", kind="word")
    if out_format not in ("csv", "jsonl"):
        raise ConfigError(f"field 'output.format' must be csv or jsonl, got {out_format!r}")
    out_path = output_override or reader.get("output.path", kind="word")
    if out_path is None:
        raise ConfigError("missing required field 'output.path' (or --output)")
    raw_fields = reader.get("output.fields", default=list(FIELD_GROUPS))
    if isinstance(raw_fields, str):
        raw_fields = [raw_fields]
    for name in raw_fields:
        if name not in FIELD_GROUPS:
            raise ConfigError(
                f"field 'output.fields': unknown column group {name!r}; "
                f"expected among {list(FIELD_GROUPS)}"
            )
    stride = reader.get("output.stride", default=10, kind="int")
    if stride < 1:
        raise ConfigError(f"field 'output.stride' must be >= 1, got {stride}")

    known_prefixes = ("system.", "hamiltonian.", "initial.", "integration.", "output.", "sweep.")
    for key in entries:
        if not key.startswith(known_prefixes):
            raise ConfigError(f"unknown section in field {key!r}")

    return RunConfig(
        dims=dims,
        hbar=hbar,
        model=model,
        params=params,
        z0=np.asarray(z0, dtype=float),
        radius=radius,
        t_end=t_end,
        step=step,
        scheme=scheme,
        reproject=reproject,
        frozen_hessian=frozen,
        out_format=out_format,
        out_path=str(out_path),
        fields=tuple(raw_fields),
        stride=stride,
    )


def _columns(cfg: RunConfig) -> list:
    cols = []
    for group in cfg.fields:
        if group == "t":
            cols.append("t")
        elif group == "z":
            cols.extend(f"z_{i}" for i in range(cfg.dims.dim))
        elif group == "lambda":
            cols.extend(f"lambda_{j}" for j in range(1, cfg.dims.n_a + 1))
        else:
            cols.append(group)
    return cols


def _record_values(cfg: RunConfig, trace: SubsystemTrace, k: int) -> dict:
    values: dict = {}
    for group in cfg.fields:
        if group == "t":
            values["t"] = trace.times[k]
        elif group == "z":
            for i in range(cfg.dims.dim):
                values[f"z_{i}"] = trace.points[k, i]
        elif group == "purity":
            values["purity"] = trace.purity[k]
        elif group == "entropy_kB":
            values["entropy_kB"] = trace.entropy_kb[k]
        elif group == "capacity":
            values["capacity"] = trace.capacity[k]
        elif group == "lambda":
            for j in range(cfg.dims.n_a):
                values[f"lambda_{j + 1}"] = trace.spectra[k, j]
        elif group == "volume_ratio":
            values["volume_ratio"] = float(np.exp(-np.sum(np.log(trace.spectra[k]))))
        elif group == "symplecticity_defect":
            values["symplecticity_defect"] = trace.defects[k]
    return values


def _write_trace(cfg: RunConfig, trace: SubsystemTrace | None, status: str | None, status_time: float | None):
    path = Path(cfg.out_path)
    knots = [] if trace is None else range(0, trace.times.shape[0], cfg.stride)
    with path.open("w", newline="") as fh:
        if cfg.out_format == "csv":
            fh.write(",".join(_columns(cfg)) + "\n")
            if trace is not None:
                for k in knots:
                    row = _record_values(cfg, trace, k)
                    fh.write(",".join(_fmt(row[c]) for c in _columns(cfg)) + "\n")
            if status is not None:
                fh.write(f"# status={status} t={_fmt(status_time)}\n")
        else:
            if trace is not None:
                for k in knots:
                    record = {"schema_version": SCHEMA_VERSION}
                    record.update(_record_values(cfg, trace, k))
                    fh.write(json.dumps(record) + "\n")
            if status is not None:
                fh.write(json.dumps({"schema_version": SCHEMA_VERSION, "status": status, "t": status_time}) + "\n")


def _grid(cfg: RunConfig) -> np.ndarray:
    steps = int(round(cfg.t_end / cfg.step))
    steps = max(steps, 1)
    return cfg.step * np.arange(steps + 1)


def run_one(cfg: RunConfig, tol: Tolerances) -> int:
    """Execute one configured pipeline; returns the process exit code."""
    try:
        model = catalog_model(cfg.model, cfg.dims, cfg.params)
    except ValueError as exc:
        raise ConfigError(f"field 'hamiltonian.model': {exc}") from None
    times = _grid(cfg)
    kwargs = dict(
        hbar=cfg.hbar, scheme=cfg.scheme, reproject=cfg.reproject,
        frozen_hessian=cfg.frozen_hessian, tol=tol,
    )
    try:
        trace = subsystem_evolution(model, cfg.z0, times, **kwargs)
    except DivergenceError as exc:
        # flush whatever prefix is still computable; each retry strictly
        # shortens the grid, so this terminates
        t_fail = exc.time
        trace = None
        while True:
            partial = times[times < t_fail]
            if partial.shape[0] < 2:
                break
            try:
                trace = subsystem_evolution(model, cfg.z0, partial, **kwargs)
                break
            except DivergenceError as again:
                t_fail = min(again.time, float(partial[-1]))
        _write_trace(cfg, trace, status="divergence", status_time=t_fail)
        print(f"divergence near t = {t_fail:.6g}; partial output in {cfg.out_path}", file=sys.stderr)
        return 3
    _write_trace(cfg, trace, status=None, status_time=None)
    return 0


def _expand_sweep(entries: dict, cfg: RunConfig) -> list:
    if "sweep.field" not in entries:
        return [cfg]
    reader = _ConfigReader(entries)
    field = reader.get("sweep.field", kind="word")
    raw_values = entries.get("sweep.values")
    if raw_values is None:
        raise ConfigError("missing required field 'sweep.values'")
    # ';' separates vector-valued entries; plain lists sweep scalars
    if ";" in raw_values[0]:
        tokens = [part.strip() for part in raw_values[0].split(";") if part.strip()]
    else:
        tokens = raw_values[0].split()
    if not tokens:
        raise ConfigError("field 'sweep.values' is empty")

    configs = []
    root = Path(cfg.out_path)
    for i, token in enumerate(tokens):
        try:
            value = _parse_value(token)
        except ValueError as exc:
            raise ConfigError(f"field 'sweep.values': {exc}") from None
        out_path = str(root.with_name(f"{root.stem}_{i}{root.suffix}"))
        if field == "initial.z0":
            if not isinstance(value, list) or len(value) != cfg.dims.dim:
                raise ConfigError(
                    f"field 'sweep.values' entry {i}: initial.z0 needs {cfg.dims.dim} numbers"
                )
            configs.append(replace(cfg, z0=np.asarray(value, dtype=float), out_path=out_path))
        elif field == "initial.radius":
            configs.append(replace(cfg, radius=float(value), out_path=out_path))
        elif field.startswith("hamiltonian."):
            name = field.split(".", 1)[1]
            params = dict(cfg.params)
            params[name] = value
            configs.append(replace(cfg, params=params, out_path=out_path))
        else:
            raise ConfigError(
                f"field 'sweep.field': cannot sweep {field!r}; supported are "
                "hamiltonian.* parameters, initial.radius and initial.z0"
            )
    return configs


def _run_worker(payload):
    cfg, tol = payload
    try:
        return run_one(cfg, tol)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def cmd_run(args) -> int:
    tol = active_tolerances()
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        entries = parse_config_text(text)
        cfg = build_run_config(entries, output_override=args.output)
        configs = _expand_sweep(entries, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if len(configs) == 1:
        return _run_worker((configs[0], tol))
    payloads = [(c, tol) for c in configs]
    if args.jobs > 1:
        with Pool(processes=args.jobs) as pool:
            codes = pool.map(_run_worker, payloads)
    else:
        codes = [_run_worker(p) for p in payloads]
    return max(codes)


def _load_matrix(path: str) -> np.ndarray | None:
    try:
        return load_matrix_text(path)
    except OSError as exc:
        print(f"cannot read matrix file {path}: {exc}", file=sys.stderr)
        return None
    except ValueError as exc:
        print(f"malformed matrix file {path}: {exc}", file=sys.stderr)
        return None


def cmd_project(args) -> int:
    tol = active_tolerances()
    matrix = _load_matrix(args.matrix)
    if matrix is None:
        return 2
    try:
        dims = Dimensions(args.n_a, args.n_b)
    except ValueError as exc:
        print(f"invalid dims: {exc}", file=sys.stderr)
        return 2
    if matrix.shape != (dims.dim, dims.dim):
        print(
            f"matrix side {matrix.shape[0]} does not match dims (2n = {dims.dim})",
            file=sys.stderr,
        )
        return 2
    defect = symplecticity_defect(matrix, dims)
    if defect > tol.cli_input_defect:
        print(f"matrix is not symplectic: defect {defect:.6e} > {tol.cli_input_defect:g}", file=sys.stderr)
        return 4
    result = project_ball(matrix, dims, radius=args.radius, defect_gate=tol.cli_input_defect, tol=tol)
    rng = np.random.default_rng(args.seed)
    contained = containment_check(result, args.radius, samples=10_000, rng=rng, tol=tol)
    report = {
        "spectrum": [float(v) for v in result.spectrum],
        "entropy_kB": result.entropy_increase,
        "volume_ratio": result.volume_ratio,
        "capacity": symplectic_capacity(result.omega_a, tol=tol),
        "containment": bool(contained),
        "symplecticity_defect": defect,
    }
    print(json.dumps(report))
    return 0


def _spd_gate(matrix: np.ndarray) -> str | None:
    if matrix.shape[0] != matrix.shape[1]:
        return f"matrix must be square, got shape {matrix.shape}"
    if matrix.shape[0] % 2 != 0:
        return f"matrix side must be even, got {matrix.shape[0]}"
    asym = np.abs(matrix - matrix.T).max()
    if asym > 1e-10 * max(1.0, np.abs(matrix).max()):
        return f"matrix is not symmetric (asymmetry {asym:.3e})"
    w = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    if w[0] <= 0:
        return f"matrix is not positive definite (min eigenvalue {w[0]:.6e})"
    return None


def cmd_williamson(args) -> int:
    tol = active_tolerances()
    matrix = _load_matrix(args.matrix)
    if matrix is None:
        return 2
    message = _spd_gate(matrix)
    if message is not None:
        print(message, file=sys.stderr)
        return 4
    wd = williamson(matrix, tol=tol)
    residual = float(np.abs(wd.reconstruct() - matrix).max() / max(1.0, np.abs(matrix).max()))
    report = {
        "spectrum": [float(v) for v in wd.spectrum],
        "reconstruction_residual": residual,
        "symplecticity_defect": symplecticity_defect(wd.s),
        "degenerate": bool(wd.degenerate),
    }
    print(json.dumps(report))
    return 0


def cmd_capacity(args) -> int:
    tol = active_tolerances()
    matrix = _load_matrix(args.matrix)
    if matrix is None:
        return 2
    message = _spd_gate(matrix)
    if message is not None:
        print(message, file=sys.stderr)
        return 4
    lam = symplectic_eigenvalues(matrix, tol=tol)
    ellipsoid = Ellipsoid(np.zeros(matrix.shape[0]), matrix, args.radius)
    report = {
        "capacity": symplectic_capacity(ellipsoid, tol=tol),
        "lambda_max": float(lam[0]),
        "radius": args.radius,
    }
    print(json.dumps(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseshadow",
        description="Phase-space subsystem dynamics: projections, spectra, purity traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured pipeline")
    p_run.add_argument("--config", required=True, help="path to the run configuration")
    p_run.add_argument("--seed", type=int, default=0, help="seed for stochastic checks")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p_run.add_argument("--output", default=None, help="override output.path")
    p_run.set_defaults(func=cmd_run)

    p_proj = sub.add_parser("project", help="project a symplectic ball onto subsystem A")
    p_proj.add_argument("matrix", help="matrix file (rows of decimals)")
    p_proj.add_argument("--n-a", type=int, required=True, dest="n_a")
    p_proj.add_argument("--n-b", type=int, required=True, dest="n_b")
    p_proj.add_argument("--radius", type=float, default=1.0)
    p_proj.add_argument("--seed", type=int, default=0)
    p_proj.set_defaults(func=cmd_project)

    p_wil = sub.add_parser("williamson", help="Williamson normal form report")
    p_wil.add_argument("matrix")
    p_wil.set_defaults(func=cmd_williamson)

    p_cap = sub.add_parser("capacity", help="ellipsoid symplectic capacity")
    p_cap.add_argument("matrix")
    p_cap.add_argument("--radius", type=float, default=1.0)
    p_cap.set_defaults(func=cmd_capacity)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
