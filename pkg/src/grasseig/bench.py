"""Benchmark harness: problem presets, manifest-driven runs, parameter-file
preparation, and the command-line entry point.

Commands
--------
run     execute solvers on a problem, one trace CSV per (solver, seed)
params  write the spectral parameters of a problem as JSON
verify  run the geometry/convexity/solver property suites

Trace CSVs carry '#'-prefixed metadata lines (including timestamps and the
initial-point hash) followed by a fixed column schema; bodies are
reproducible for fixed seeds except for the wall_time_s column.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .errors import SizeError
from .grassmann import SubspacePoint, perturb_within, random_point
from .matops import (
    DenseOperator,
    Fd3dSpec,
    SymmetricOperator,
    analytic_fd3d_eigenvalues,
    build_fd3d,
    dense_eig_oracle,
    load_matrix_market,
    shift,
)
from .rayleigh import SpectralParams, derive_params, local_convergence_radius
from .solvers import Reference, SolverConfig, run


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlantedGapSpec:
    """Synthetic diagonal-plus-rotation problem with a controlled gap.

    The top p eigenvalues are linearly spaced in [1 - rho, 1], the (p+1)-th
    sits exactly ``delta`` below the p-th, and the tail decays geometrically
    to ``lam_min``; the diagonal is conjugated by a seeded random rotation.
    """

    n: int
    p: int
    delta: float
    rho: float = 0.05
    lam_min: float = 1e-4
    matrix_seed: int = 1234

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("planted gap must be positive")
        if not 0 < self.p < self.n:
            raise ValueError(f"need 0 < p < n, got {(self.p, self.n)}")
        if (1.0 - self.rho) - self.delta <= self.lam_min:
            raise ValueError("gap too large: the tail head would drop below lam_min")

    def eigenvalues(self) -> np.ndarray:
        top = np.linspace(1.0, 1.0 - self.rho, self.p)
        head = (1.0 - self.rho) - self.delta
        tail = np.geomspace(head, self.lam_min, self.n - self.p)
        return np.concatenate([top, tail])


def planted_gap_delta_for_ratio(ratio: float, lam_min: float = 1e-4) -> float:
    """Gap that realizes a requested mu/gamma ratio for lambda_1 = 1."""
    from .rayleigh import C_Q

    return ratio * (1.0 - lam_min) / C_Q


def build_planted_gap(spec: PlantedGapSpec):
    """Operator, exact spectral parameters, and exact reference subspace."""
    lam = spec.eigenvalues()
    rng = np.random.default_rng(spec.matrix_seed)
    Q, _ = np.linalg.qr(rng.standard_normal((spec.n, spec.n)))
    arr = (Q * lam) @ Q.T
    arr = 0.5 * (arr + arr.T)
    op = DenseOperator(arr)
    params = derive_params(lam, spec.p)
    reference = Reference(
        v_alpha=SubspacePoint(np.linalg.qr(Q[:, : spec.p])[0]),
        f_star=-float(lam[: spec.p].sum()),
    )
    return op, params, reference, lam


@dataclass
class ProblemSpec:
    """A benchmark problem: matrix source, subspace dimension, objective."""

    name: str
    p: int
    fd3d: Fd3dSpec | None = None
    matrix_path: str | None = None
    planted: PlantedGapSpec | None = None
    objective: str = "max"
    shift_by: float | None = None

    def __post_init__(self):
        sources = [s is not None for s in (self.fd3d, self.matrix_path, self.planted)]
        if sum(sources) != 1:
            raise ValueError("exactly one of fd3d / matrix / planted must be given")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.objective not in ("max", "min"):
            raise ValueError(f"objective must be max or min, got {self.objective!r}")


@dataclass
class BuiltProblem:
    spec: ProblemSpec
    operator: SymmetricOperator
    params: SpectralParams | None
    reference: Reference | None
    meta: dict


def presets() -> dict:
    """Named desk-scale presets used by the acceptance experiments."""
    return {
        "fd3d-small": ProblemSpec(name="fd3d-small", p=16, fd3d=Fd3dSpec(10, 12, 8)),
        "fd3d-min": ProblemSpec(
            name="fd3d-min", p=16, fd3d=Fd3dSpec(10, 12, 8), objective="min"
        ),
        "clustered": ProblemSpec(
            name="clustered",
            p=8,
            planted=PlantedGapSpec(n=300, p=8, delta=planted_gap_delta_for_ratio(1e-3)),
        ),
        "wide-gap": ProblemSpec(
            name="wide-gap",
            p=8,
            planted=PlantedGapSpec(n=300, p=8, delta=planted_gap_delta_for_ratio(1e-1)),
        ),
    }


def build_problem(spec: ProblemSpec, param_file: str | None = None) -> BuiltProblem:
    """Materialize the operator plus spectral parameters and reference data.

    Parameters come from the exact construction (planted), the closed-form
    spectrum (FD3D), the dense oracle (any matrix within the cap), or a JSON
    parameter file for larger matrices (in which case the subopt/dist trace
    columns stay empty). A 'min' objective is realized by negating and
    shifting the operator so the one maximization path runs unchanged.
    """
    meta = {"problem": spec.name, "objective": spec.objective}
    if spec.planted is not None:
        op, params, reference, lam = build_planted_gap(spec.planted)
        if spec.objective == "min":
            op, params, reference = _to_min_problem(op, lam, spec.p)
        meta["n"] = op.n
        return BuiltProblem(spec, _maybe_shift(op, spec), params, reference, meta)

    if spec.fd3d is not None:
        op = build_fd3d(spec.fd3d)
        lam = analytic_fd3d_eigenvalues(spec.fd3d)
    else:
        op = load_matrix_market(spec.matrix_path)
        lam = None

    if spec.objective == "min":
        if lam is None:
            lam = dense_eig_oracle(op).eigenvalues
        op, params, reference = _to_min_problem(op, lam, spec.p)
        meta["n"] = op.n
        return BuiltProblem(spec, _maybe_shift(op, spec), params, reference, meta)

    params = None
    reference = None
    if lam is not None:
        params = derive_params(lam, spec.p)
    try:
        spectrum = dense_eig_oracle(op)
        if params is None:
            params = derive_params(spectrum, spec.p)
        reference = Reference(
            v_alpha=SubspacePoint(spectrum.leading_block(spec.p)),
            f_star=-float(spectrum.eigenvalues[: spec.p].sum()),
        )
    except SizeError:
        if params is None:
            if param_file is None:
                raise
            params = derive_params(_read_param_file(param_file), spec.p)
    meta["n"] = op.n
    return BuiltProblem(spec, _maybe_shift(op, spec), params, reference, meta)


def _maybe_shift(op, spec):
    if spec.shift_by:
        return shift(op, spec.shift_by)
    return op


def _to_min_problem(op, lam, p):
    """Bottom-subspace problem as a maximization on lambda_1 I - A."""
    lam = np.asarray(lam, dtype=float)
    flipped = shift(op.negated(), float(lam[0]))
    lam_new = np.sort(lam[0] - lam)[::-1]
    params = derive_params(lam_new, p)
    spectrum = dense_eig_oracle(flipped)
    reference = Reference(
        v_alpha=SubspacePoint(spectrum.leading_block(p)),
        f_star=-float(spectrum.eigenvalues[:p].sum()),
    )
    return flipped, params, reference


def _read_param_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    missing = {"lambda1", "lambdaP", "lambdaP1", "lambdaN"} - set(payload)
    if missing:
        raise ValueError(f"parameter file {path} is missing keys {sorted(missing)}")
    return payload


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def x0_digest(X0: SubspacePoint) -> str:
    return hashlib.sha256(np.ascontiguousarray(X0.rep).tobytes()).hexdigest()


def trace_body_digest(path) -> str:
    """Digest of the deterministic CSV body: '#' lines and wall time excluded."""
    h = hashlib.sha256()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            h.update(",".join(line.rstrip("\n").split(",")[:-1]).encode())
            h.update(b"\n")
    return h.hexdigest()


def _solver_filename(problem: str, solver_spec: dict, seed: int) -> str:
    sid = solver_spec["id"]
    suffix = ""
    if sid == "agd" and solver_spec.get("variant", "exp") != "exp":
        suffix = "-" + solver_spec["variant"]
    if sid == "cheb" and "degree" in solver_spec:
        suffix = f"-d{solver_spec['degree']}"
    return f"{problem}_{sid}{suffix}_s{seed}.csv"


def cmd_run(manifest: dict, base_dir: Path | str = ".") -> list[Path]:
    """Execute every (solver, seed) pair of a manifest; returns trace paths.

    All solvers of one seed share the same initial point, recorded by hash
    in each trace's metadata so fairness is checkable after the fact.
    """
    base_dir = Path(base_dir)
    spec = _problem_from_manifest(manifest["problem"])
    built = build_problem(spec, manifest.get("param_file"))
    out_dir = Path(manifest.get("out_dir", "traces"))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    seeds = manifest.get("seeds", [0])
    config = SolverConfig(
        max_iters=manifest.get("max_iters"),
        grad_tol=manifest.get("grad_tol"),
        dist_tol=manifest.get("dist_tol"),
        record_every=manifest.get("record_every", 1),
    )
    init_radius = manifest.get("init_radius")
    paths = []
    for seed in seeds:
        if init_radius is not None:
            if built.reference is None:
                raise ValueError("init_radius needs a reference subspace (oracle)")
            radius = (
                local_convergence_radius(built.params)
                if init_radius == "local"
                else float(init_radius)
            )
            X0 = perturb_within(built.reference.v_alpha, radius, seed=seed)
        else:
            X0 = random_point(built.operator.n, spec.p, seed=seed)
        digest = x0_digest(X0)
        for solver_spec in manifest["solvers"]:
            sid = solver_spec["id"]
            op = built.operator.with_fresh_counter()
            trace = run(
                sid,
                op,
                X0,
                config=config,
                reference=built.reference,
                params=built.params,
                variant=solver_spec.get("variant", "exp"),
                cheb_degree=solver_spec.get("degree", 50),
                meta={
                    **built.meta,
                    "seed": seed,
                    "x0_sha256": digest,
                    "params_json": json.dumps(built.params.as_dict())
                    if built.params
                    else "",
                    # timestamps live here so CSV bodies stay reproducible
                    "generated": datetime.now(timezone.utc).isoformat(),
                },
            )
            path = out_dir / _solver_filename(spec.name, solver_spec, seed)
            trace.write_csv(path)
            paths.append(path)
    return paths


def _problem_from_manifest(problem) -> ProblemSpec:
    if isinstance(problem, str):
        return _preset_or_die(problem)
    if "preset" in problem:
        base = _preset_or_die(problem["preset"])
        return base
    p = int(problem["p"])
    objective = problem.get("objective", "max")
    shift_by = problem.get("shift")
    if "fd3d" in problem:
        nx, ny, nz = problem["fd3d"]
        return ProblemSpec(
            name=problem.get("name", f"fd3d-{nx}x{ny}x{nz}"),
            p=p,
            fd3d=Fd3dSpec(nx, ny, nz),
            objective=objective,
            shift_by=shift_by,
        )
    if "matrix" in problem:
        return ProblemSpec(
            name=problem.get("name", Path(problem["matrix"]).stem),
            p=p,
            matrix_path=problem["matrix"],
            objective=objective,
            shift_by=shift_by,
        )
    if "planted" in problem:
        ps = problem["planted"]
        planted = PlantedGapSpec(
            n=int(ps["n"]),
            p=p,
            delta=float(ps["delta"]),
            rho=float(ps.get("rho", 0.05)),
            lam_min=float(ps.get("lam_min", 1e-4)),
            matrix_seed=int(ps.get("matrix_seed", 1234)),
        )
        return ProblemSpec(
            name=problem.get("name", f"planted-n{planted.n}-p{p}"),
            p=p,
            planted=planted,
            objective=objective,
            shift_by=shift_by,
        )
    raise ValueError("manifest problem needs one of: preset, fd3d, matrix, planted")


def _preset_or_die(name: str) -> ProblemSpec:
    table = presets()
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(table)}")
    return table[name]


def cmd_params(problem: ProblemSpec, out_path=None) -> dict:
    """Spectral parameters of a problem as a JSON-ready mapping.

    FD3D problems bypass the dense oracle via the closed-form spectrum; any
    other matrix must fit under the oracle cap.
    """
    if not 1 <= problem.p:
        raise ValueError("p must be >= 1")
    if problem.fd3d is not None:
        lam = analytic_fd3d_eigenvalues(problem.fd3d)
        if problem.objective == "min":
            lam = np.sort(lam[0] - lam)[::-1]
        if problem.p >= lam.size:
            raise ValueError(f"p = {problem.p} must be < n = {lam.size}")
        params = derive_params(lam, problem.p)
    elif problem.planted is not None:
        params = derive_params(problem.planted.eigenvalues(), problem.p)
    else:
        op = load_matrix_market(problem.matrix_path)
        if problem.p >= op.n:
            raise ValueError(f"p = {problem.p} must be < n = {op.n}")
        spectrum = dense_eig_oracle(op)
        lam = spectrum.eigenvalues
        if problem.objective == "min":
            lam = np.sort(lam[0] - lam)[::-1]
        params = derive_params(lam, problem.p)
    payload = params.as_dict()
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return payload


def cmd_verify(selector: str | None = None, samples: int | None = None, seed: int = 0) -> dict:
    """Run the named property suite (or all of them); failures are content."""
    return verify_mod.run_suites(selector, samples=samples, seed=seed)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _parse_extents(text: str):
    parts = [int(tok) for tok in text.replace("x", ",").split(",") if tok]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three extents, e.g. 10,12,8")
    return Fd3dSpec(*parts)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grasseig",
        description="Benchmark harness for Grassmann-manifold eigensolvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run solvers and emit trace CSVs")
    p_run.add_argument("--manifest", help="JSON manifest path")
    p_run.add_argument("--matrix", help="Matrix Market file")
    p_run.add_argument("--fd3d", type=_parse_extents, help="grid extents nx,ny,nz")
    p_run.add_argument("--preset", help="named preset problem")
    p_run.add_argument("--p", type=int, help="subspace dimension")
    p_run.add_argument(
        "--solver",
        help="comma-separated list from: agd,sd,subspace,cheb,rcg",
        default="agd",
    )
    p_run.add_argument("--cheb-degree", type=int, default=50)
    p_run.add_argument("--variant", choices=("exp", "retr"), default="exp")
    p_run.add_argument("--seed", default="0", help="comma-separated seeds")
    p_run.add_argument("--max-iters", type=int)
    p_run.add_argument("--tol", type=float, help="gradient-norm stopping tolerance")
    p_run.add_argument("--out", default="traces", help="output directory")
    p_run.add_argument("--param-file", help="JSON spectral parameters for large matrices")
    p_run.add_argument("--objective", choices=("max", "min"), default="max")

    p_par = sub.add_parser("params", help="write spectral parameters as JSON")
    p_par.add_argument("--fd3d", type=_parse_extents)
    p_par.add_argument("--matrix")
    p_par.add_argument("--p", type=int, required=True)
    p_par.add_argument("--objective", choices=("max", "min"), default="max")
    p_par.add_argument("--out", help="output file (default: stdout)")

    p_ver = sub.add_parser("verify", help="run property suites")
    p_ver.add_argument("suite", nargs="?", help="geometry | convexity | solvers")
    p_ver.add_argument("--samples", type=int, help="override per-check sample count")
    p_ver.add_argument("--seed", type=int, default=0)

    return parser


def _manifest_from_args(args) -> dict:
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            return json.load(fh)
    if args.preset:
        problem = {"preset": args.preset}
    elif args.fd3d is not None:
        if args.p is None:
            raise SystemExit("--p is required with --fd3d")
        problem = {
            "fd3d": [args.fd3d.nx, args.fd3d.ny, args.fd3d.nz],
            "p": args.p,
            "objective": args.objective,
        }
    elif args.matrix:
        if args.p is None:
            raise SystemExit("--p is required with --matrix")
        problem = {"matrix": args.matrix, "p": args.p, "objective": args.objective}
    else:
        raise SystemExit("run needs --manifest, --preset, --fd3d, or --matrix")
    solvers = []
    for sid in args.solver.split(","):
        sid = sid.strip()
        entry = {"id": sid}
        if sid == "agd":
            entry["variant"] = args.variant
        if sid == "cheb":
            entry["degree"] = args.cheb_degree
        solvers.append(entry)
    manifest = {
        "problem": problem,
        "solvers": solvers,
        "seeds": [int(s) for s in str(args.seed).split(",")],
        "out_dir": args.out,
    }
    if args.max_iters is not None:
        manifest["max_iters"] = args.max_iters
    if args.tol is not None:
        manifest["grad_tol"] = args.tol
    if args.param_file:
        manifest["param_file"] = args.param_file
    return manifest


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        manifest = _manifest_from_args(args)
        paths = cmd_run(manifest)
        for path in paths:
            print(path)
        return 0
    if args.command == "params":
        if args.fd3d is not None:
            problem = ProblemSpec(
                name="fd3d", p=args.p, fd3d=args.fd3d, objective=args.objective
            )
        elif args.matrix:
            problem = ProblemSpec(
                name=Path(args.matrix).stem,
                p=args.p,
                matrix_path=args.matrix,
                objective=args.objective,
            )
        else:
            raise SystemExit("params needs --fd3d or --matrix")
        payload = cmd_params(problem, out_path=args.out)
        if not args.out:
            json.dump(payload, sys.stdout, indent=2, sort_keys=True)
            print()
        return 0
    if args.command == "verify":
        report = cmd_verify(args.suite, samples=args.samples, seed=args.seed)
        json.dump(report, sys.stdout, indent=2)
        print()
        return 0
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
