"""Racing the solvers on a 3D Laplacian, counting block products.

Reproduces the desk-scale benchmark: a 10x12x8 finite-difference Laplacian,
target subspace dimension 16, all five solvers from one shared random start.
The accelerated method pays two block products per iteration but needs far
fewer of them than plain subspace iteration or steepest descent; conjugate
gradient is the strongest baseline on this matrix. Traces land in
demos/output/ for the plot tool.
"""

from pathlib import Path

import numpy as np

from grasseig.bench import build_problem, presets
from grasseig.grassmann import random_point
from grasseig.solvers import SolverConfig, run

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

built = build_problem(presets()["fd3d-small"])
print(f"problem: fd3d-small, n = {built.operator.n}, p = 16")
print(f"gap delta = {built.params.delta:.4e}, kappa_R = {built.params.kappa_r:.1f}, "
      f"mu/gamma = {built.params.mu / built.params.gamma:.2e}")

X0 = random_point(built.operator.n, 16, seed=0)
budget = {"agd": 300, "sd": 1300, "subspace": 1300, "rcg": 300, "cheb": 12}

print(f"\n{'solver':>10s} {'products/iter':>14s} {'to 1e-4':>9s} {'to 1e-6':>9s} {'to 1e-8':>9s}")
for solver in ("agd", "sd", "subspace", "rcg", "cheb"):
    op = built.operator.with_fresh_counter()
    trace = run(
        solver,
        op,
        X0,
        SolverConfig(max_iters=budget[solver], grad_tol=0.0),
        reference=built.reference,
        params=built.params,
        cheb_degree=30,
    )
    trace.write_csv(OUT / f"fd3d-small_{solver}_s0.csv")

    def first(tol):
        hits = [r.block_matvecs for r in trace.rows if r.subopt <= tol]
        return str(hits[0]) if hits else "-"

    deltas = np.diff([r.block_matvecs for r in trace.rows])
    per_iter = f"{int(np.median(deltas))}" if len(deltas) else "?"
    print(f"{solver:>10s} {per_iter:>14s} {first(1e-4):>9s} {first(1e-6):>9s} {first(1e-8):>9s}")

print(f"\ntraces written to {OUT}/ "
      "(plot with: node frontend/dist/cli.js plot --glob 'demos/output/*.csv' "
      "--y subopt --x block_matvecs --out fig.svg)")
