"""Smoke tests for the python bindings, run through ctest."""

import json
import os
import sys
import tempfile

ext_dir = os.environ.get("SPLINECGGM_EXT_DIR")
pkg_dir = os.environ.get("SPLINECGGM_PKG_DIR")
if ext_dir:
    sys.path.insert(0, ext_dir)
if pkg_dir:
    sys.path.insert(0, pkg_dir)

import numpy as np

try:
    import splinecggm as scg

    HAVE_PKG = True
except ImportError:
    import _core as scg

    HAVE_PKG = False

failures = []


def check(name, cond):
    print(("PASS" if cond else "FAIL") + f" {name}")
    if not cond:
        failures.append(name)


rng = np.random.default_rng(7)
n, d, p = 120, 2, 4
x = rng.uniform(size=(n, d))
y = 0.6 * rng.normal(size=(n, p))
y[:, 0] += 0.8 * x[:, 0]

data = scg.Dataset(x, y)
check("dataset dims", (data.n, data.d, data.p) == (n, d, p))

stats = scg.sufficient_stats(data)
check("sxx matches numpy", np.allclose(stats.sxx, x.T @ x / n))

check("soft_threshold", scg.soft_threshold(3.0, 1.0) == 2.0 and scg.soft_threshold(-0.5, 1.0) == 0.0)

# zero-penalty fit reproduces the closed-form MLE
fit0 = scg.fit_cggm(stats, 0.0, 0.0)
sxx_inv = np.linalg.inv(stats.sxx)
cond = stats.syy - stats.sxy.T @ sxx_inv @ stats.sxy
lam_mle = np.linalg.inv(cond)
theta_mle = -sxx_inv @ stats.sxy @ lam_mle
check("mle equivalence", np.linalg.norm(fit0.lambda_mat - lam_mle) / np.linalg.norm(lam_mle) < 1e-5)
check("mle theta", np.linalg.norm(fit0.theta_mat - theta_mle) / np.linalg.norm(theta_mle) < 1e-5)

# penalized fit: convergence flags and bounded objective trace
fit = scg.fit_cggm(stats, 0.08, 0.08)
trace = np.asarray(fit.objective_trace)
check("fit converged", fit.converged)
check("kkt small", fit.kkt_residual <= 1e-4)
running_min = np.minimum.accumulate(trace)
check(
    "objective rise bounded",
    np.all(trace <= running_min + 1e-3 * np.maximum(1.0, np.abs(running_min))),
)

# scoring functions agree with themselves across calls (determinism)
s1 = scg.lookl_score(data, fit)
s2 = scg.lookl_score(data, fit)
check("lookl deterministic", s1 == s2)
check("bic finite", np.isfinite(scg.bic_score(fit, stats, n)))

# density fit: normalization over its own box
opts = scg.SsAnovaOptions()
opts.seed = 3
model = scg.fit_density_auto(x, opts)
box = model.box
grid = np.stack(
    np.meshgrid(
        np.linspace(box[0, 0] + 1e-9, box[0, 1] - 1e-9, 60),
        np.linspace(box[1, 0] + 1e-9, box[1, 1] - 1e-9, 60),
    ),
    axis=-1,
).reshape(-1, 2)
vals = scg.eval_density_rows(model, grid)
cell = (box[0, 1] - box[0, 0]) * (box[1, 1] - box[1, 0]) / len(grid)
check("density roughly normalized", abs(float(vals.sum() * cell) - 1.0) < 0.05)
check("density positive", bool((vals > 0).all()))

# graph pipeline end to end
zeta = scg.build_zeta(model, fit)
sel = scg.forward_select(zeta, 0.03)
graph = scg.assemble_graph(fit, sel.pi)
adj = np.asarray(graph.adjacency)
check("adjacency symmetric", (adj == adj.T).all())
check("zero diagonal", (np.diag(adj) == 0).all())

# generators are reproducible
cfg = scg.SimulationConfig()
cfg.n, cfg.d, cfg.p = 40, 3, 4
a = scg.gen_mixture_x(cfg, 11)
b = scg.gen_mixture_x(cfg, 11)
check("generator reproducible", (a == b).all())
truth = scg.gen_sparse_precision(7, 2, 0.3, 5)
check("precision PD", np.linalg.eigvalsh(truth.omega_full).min() > 0)

check(
    "skl zero on itself",
    scg.skl_conditional_explicit(
        truth.theta_true, truth.lambda_true, truth.theta_true, truth.lambda_true,
        np.eye(2), np.eye(2),
    )
    == 0.0,
)

if failures:
    print("FAILED:", failures)
    sys.exit(1)
print("all python smoke checks passed")
