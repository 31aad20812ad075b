"""Experiment runner: each experiment reproduces one published-figure-style
study as CSV data plus rendered PNG figures, under a JSON manifest.

Reproducibility contract: a descriptor with the same parameters and seeds
produces byte-identical CSV bodies; wall-clock times and timestamps live
only in the manifest.
"""

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plots, serialize
from .diagnostics import condition_number, gram_report
from .orthopoly import design_matrix, evaluate_basis, multi_index_set, recurrence_coefficients
from .quadrature import (SparseGridSpec, clenshaw_curtis, gauss_lobatto,
                         golub_welsch, pseudospectral_coefficients, sparse_grid,
                         tensor_grid)
from .sampling import christoffel_sample, monte_carlo_sample, sample_weights
from .subselect import newton_subselect, nnls_weights, run_strategy
from . import __version__

EXPERIMENT_NAMES = ("doe-gram", "sparse-decay", "cs-conditioning",
                    "subsample-gauss-1d", "subsample-gauss-2d", "padua", "timing")

# ten pinned trial seeds; shipping them makes the statistical runs replayable
DEFAULT_SEEDS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)


@dataclass
class ExperimentDescriptor:
    name: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "."

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.name!r}; "
                             f"choose from {', '.join(EXPERIMENT_NAMES)}")
        schema = _SCHEMAS[self.name]
        unknown = set(self.parameters) - set(schema) - {"plots", "seeds", "trials"}
        if unknown:
            raise ValueError(f"unknown parameters for {self.name}: {sorted(unknown)}")

    def resolved(self):
        params = dict(_SCHEMAS[self.name])
        params["plots"] = True
        params["seeds"] = list(DEFAULT_SEEDS)
        params.update(self.parameters)
        if "trials" in self.parameters and "seeds" not in self.parameters:
            params["seeds"] = list(range(1, int(self.parameters["trials"]) + 1))
        params["seeds"] = [int(s) for s in params["seeds"]]
        return params


_SCHEMAS = {
    "doe-gram": {"m": 5},
    "sparse-decay": {"order": 35, "linear_levels": [12, 13],
                     "exponential_levels": [5, 6],
                     "linear_target": 1015, "exponential_target": 667},
    "cs-conditioning": {"d": 2, "max_order": 15, "oversampling": [1.2, 2.0],
                        "gram_d": 4, "gram_order": 3},
    "subsample-gauss-1d": {"grid_size": 101, "orders": [4, 8],
                           "strategies": ["qr", "lu", "svd"]},
    "subsample-gauss-2d": {"grid_order": 50, "basis_order": 3,
                           "strategies": ["qr", "lu", "svd"],
                           "chebyshev_candidates": True, "use_sample_weights": True,
                           "seed": 7},
    "padua": {"N": 4, "lam": 1e-2},
    "timing": {"d": 3, "orders": [2, 3, 4, 5, 6, 7, 8],
               "strategies": ["qr", "lu", "svd", "newton", "greedy"]},
}

GNUPLOT_HINTS = {
    "doe-gram": "gram_<rule>.csv: columns p,q,value; plot as n x n heatmap per rule.",
    "sparse-decay": ("coefficients_<grid>.csv: columns order1,order2,value; heatmap of "
                     "log10|value|. points_<grid>.csv: columns z1,z2,weight; scatter z1 vs z2. "
                     "counts.csv: growth,level,points,target,relative_gap."),
    "cs-conditioning": ("conditioning.csv: columns oversampling,order,n,m,seed,strategy,kappa; "
                        "plot mean kappa vs order per strategy, log y. "
                        "conditioning_mean.csv adds the m/(n log m) budget_ratio diagnostic. "
                        "gram_christoffel.csv: columns p,q,value heatmap."),
    "subsample-gauss-1d": ("selections.csv: columns order,strategy,node; compare against "
                           "gauss_nodes.csv columns order,node."),
    "subsample-gauss-2d": ("selections_<candidates>.csv: columns strategy,z1,z2; scatter vs "
                           "target_nodes.csv columns z1,z2."),
    "padua": ("full_gram.csv / selected_gram.csv: columns p,q,value heatmaps. "
              "selection.csv & padua_closed_form.csv: columns z1,z2[,weight]; overlay scatters."),
    "timing": "timings.csv: columns order,n,m,strategy,seconds,kappa; seconds vs n per strategy, log y.",
}


def run_experiment(descriptor):
    """Run one experiment; returns the manifest dict (also written to disk).

    The manifest is written even when a stage fails, with the failing stage
    and error recorded; stage outputs are listed with wall-clock seconds.
    """
    params = descriptor.resolved()
    outdir = Path(descriptor.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "experiment": descriptor.name,
        "parameters": {k: v for k, v in params.items() if k != "plots"},
        "library_version": __version__,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "stages": [],
        "status": "running",
    }
    runner = _RUNNERS[descriptor.name]
    stage_name = "setup"
    try:
        for stage_name, stage_fn in runner(params, outdir):
            t0 = time.perf_counter()
            outputs = stage_fn()
            manifest["stages"].append({
                "name": stage_name,
                "seconds": time.perf_counter() - t0,
                "outputs": [str(Path(p).name) for p in outputs],
            })
        manifest["status"] = "success"
    except Exception as exc:
        manifest["status"] = "failed"
        manifest["failing_stage"] = stage_name
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        serialize.save_json(manifest, outdir / "manifest.json")
        raise
    manifest["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    serialize.save_json(manifest, outdir / "manifest.json")
    return manifest


def emit_gnuplot_hints(name, outdir):
    path = Path(outdir) / "columns.txt"
    path.write_text(GNUPLOT_HINTS[name] + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# experiment bodies: each returns an iterable of (stage_name, callable)


def _doe_gram(params, outdir):
    m = int(params["m"])
    table = recurrence_coefficients("legendre", max(2 * m, m + 2))
    basis = multi_index_set("total_order", 1, m - 1)
    rules = {
        "gauss": golub_welsch(table, m),
        "lobatto": gauss_lobatto(table, m),
        "clenshaw_curtis": clenshaw_curtis(m),
    }

    def stage(rule_name, rule):
        def run():
            A = design_matrix(basis, (table,), rule.points, rule.weights)
            report = gram_report(A)
            outputs = [serialize.save_gram_csv(report, outdir / f"gram_{rule_name}.csv")]
            if params["plots"]:
                outputs.append(plots.gram_heatmap(
                    report.gram, outdir / f"gram_{rule_name}.png",
                    title=f"{rule_name} (m={m})"))
            return outputs
        return run

    for rule_name, rule in rules.items():
        yield f"gram-{rule_name}", stage(rule_name, rule)


def _sparse_decay(params, outdir):
    order = int(params["order"])
    table = recurrence_coefficients("legendre", 2 ** max(params["exponential_levels"]) + 8)
    basis = multi_index_set("tensor_order", 2, order)

    def coefficients_for(rule, tag):
        f = np.exp(3.0 * rule.points[:, 0] + rule.points[:, 1])
        x = pseudospectral_coefficients(f, rule, basis, (table, table))
        rows = ([str(int(p1)), str(int(p2)), serialize.fmt(v)]
                for (p1, p2), v in zip(basis.indices, x))
        outputs = [serialize.write_csv(outdir / f"coefficients_{tag}.csv", rows,
                                       header=["order1", "order2", "value"]),
                   serialize.write_csv(outdir / f"points_{tag}.csv",
                                       ([serialize.fmt(p[0]), serialize.fmt(p[1]),
                                         serialize.fmt(w)]
                                        for p, w in zip(rule.points, rule.weights)),
                                       header=["z1", "z2", "weight"])]
        if params["plots"]:
            outputs.append(plots.coefficient_decay(
                basis.indices, x, outdir / f"coefficients_{tag}.png", title=tag))
            outputs.append(plots.point_scatter(
                [(f"{tag} ({rule.m} pts)", rule.points, "o")],
                outdir / f"points_{tag}.png"))
        return x, outputs

    counts = []

    def tensor_stage():
        gl = golub_welsch(table, order + 1)
        rule = tensor_grid([gl, gl])
        _, outputs = coefficients_for(rule, "tensor")
        counts.append(("tensor", order, rule.m, rule.m, 0.0))
        return outputs

    def sparse_stage(growth, levels, target):
        def run():
            best = None
            for level in levels:
                rule = sparse_grid(SparseGridSpec(2, int(level), growth), (table, table))
                gap = abs(rule.m - target) / target
                if best is None or gap < best[2]:
                    best = (level, rule, gap)
            level, rule, gap = best
            counts.append((growth, level, rule.m, target, gap))
            _, outputs = coefficients_for(rule, growth)
            return outputs
        return run

    def counts_stage():
        rows = ([str(g), str(int(l)), str(int(p)), str(int(t)), serialize.fmt(gap)]
                for g, l, p, t, gap in counts)
        return [serialize.write_csv(outdir / "counts.csv", rows,
                                    header=["growth", "level", "points", "target",
                                            "relative_gap"])]

    yield "tensor", tensor_stage
    yield "sparse-linear", sparse_stage("linear", params["linear_levels"],
                                        int(params["linear_target"]))
    yield "sparse-exponential", sparse_stage("exponential", params["exponential_levels"],
                                             int(params["exponential_target"]))
    yield "counts", counts_stage


def _cs_conditioning(params, outdir):
    d = int(params["d"])
    max_order = int(params["max_order"])
    factors = [float(f) for f in params["oversampling"]]
    seeds = params["seeds"]
    table = recurrence_coefficients("legendre", 4 * max_order + 8)

    def sweep_stage():
        rows = []
        curves = {}
        orders = list(range(1, max_order + 1))
        for factor in factors:
            for order in orders:
                basis = multi_index_set("total_order", d, order)
                n = len(basis)
                m = max(n + 1, int(np.ceil(factor * n)))
                for strategy in ("monte_carlo", "christoffel"):
                    kappas = []
                    for seed in seeds:
                        if strategy == "monte_carlo":
                            samp = monte_carlo_sample(("legendre",) * d, m, seed)
                        else:
                            samp = christoffel_sample(d, m, seed)
                        w = sample_weights(samp.points, basis, (table,) * d)
                        A = design_matrix(basis, (table,) * d, samp.points, w)
                        kappa = condition_number(A)
                        kappas.append(kappa)
                        rows.append([serialize.fmt(factor), str(order), str(n), str(m),
                                     str(seed), strategy, serialize.fmt(kappa)])
                    curves.setdefault((factor, strategy), []).append(float(np.mean(kappas)))
        outputs = [serialize.write_csv(outdir / "conditioning.csv", rows,
                                       header=["oversampling", "order", "n", "m",
                                               "seed", "strategy", "kappa"])]

        def budget_ratio(order, factor):
            # sample-budget diagnostic m / (n log m); reported, never asserted
            n = len(multi_index_set("total_order", d, order))
            m = max(n + 1, int(np.ceil(factor * n)))
            return m / (n * np.log(m))

        mean_rows = ([serialize.fmt(f), str(o), s, serialize.fmt(v),
                      serialize.fmt(budget_ratio(o, f))]
                     for (f, s), vals in sorted(curves.items())
                     for o, v in zip(orders, vals))
        outputs.append(serialize.write_csv(outdir / "conditioning_mean.csv", mean_rows,
                                           header=["oversampling", "order", "strategy",
                                                   "kappa_mean", "budget_ratio"]))
        if params["plots"]:
            for factor in factors:
                series = {s: curves[(factor, s)] for s in ("monte_carlo", "christoffel")}
                outputs.append(plots.condition_curves(
                    orders, series, outdir / f"conditioning_x{factor:g}.png",
                    title=f"d={d}, oversampling {factor:g}"))
        return outputs

    def gram_stage():
        gd = int(params["gram_d"])
        basis = multi_index_set("total_order", gd, int(params["gram_order"]))
        n = len(basis)
        samp = christoffel_sample(gd, 2 * n, seeds[0])
        w = sample_weights(samp.points, basis, (table,) * gd)
        A = design_matrix(basis, (table,) * gd, samp.points, w)
        report = gram_report(A)
        outputs = [serialize.save_gram_csv(report, outdir / "gram_christoffel.csv")]
        if params["plots"]:
            outputs.append(plots.gram_heatmap(
                report.gram, outdir / "gram_christoffel.png",
                title=f"christoffel d={gd}, m=2n, kappa(A)={condition_number(A):.3f}"))
        return outputs

    yield "conditioning-sweep", sweep_stage
    yield "christoffel-gram", gram_stage


def _subsample_gauss_1d(params, outdir):
    grid_size = int(params["grid_size"])
    table = recurrence_coefficients("legendre", grid_size + 8)
    candidates = golub_welsch(table, grid_size)

    def run():
        sel_rows = []
        node_rows = []
        series = []
        errors = {}
        for order in params["orders"]:
            k = int(order)
            basis = multi_index_set("total_order", 1, k - 1)
            A = design_matrix(basis, (table,), candidates.points, candidates.weights)
            truth = golub_welsch(table, k).points.ravel()
            node_rows += [[str(k), serialize.fmt(v)] for v in truth]
            for strategy in params["strategies"]:
                sel = run_strategy(strategy, A, k)
                nodes = np.sort(candidates.points[sel.row_indices, 0])
                sel_rows += [[str(k), strategy, serialize.fmt(v)] for v in nodes]
                errors[f"{strategy}_k{k}"] = float(np.max(np.abs(nodes - truth)))
                series.append((f"{strategy} k={k}", nodes))
            series.append((f"gauss k={k}", truth))
        outputs = [serialize.write_csv(outdir / "selections.csv", sel_rows,
                                       header=["order", "strategy", "node"]),
                   serialize.write_csv(outdir / "gauss_nodes.csv", node_rows,
                                       header=["order", "node"]),
                   serialize.save_json(errors, outdir / "node_errors.json")]
        if params["plots"]:
            outputs.append(plots.nodes_1d(series, outdir / "selections.png",
                                          title=f"{grid_size}-point candidate grid"))
        return outputs

    yield "subselect-1d", run


def _subsample_gauss_2d(params, outdir):
    grid_order = int(params["grid_order"])
    basis_order = int(params["basis_order"])
    table = recurrence_coefficients("legendre", grid_order + 8)
    basis = multi_index_set("tensor_order", 2, basis_order)
    n = len(basis)
    truth_1d = golub_welsch(table, basis_order + 1).points.ravel()
    target = np.array([(a, b) for a in truth_1d for b in truth_1d])

    def candidate_sets():
        gl = golub_welsch(table, grid_order + 1)
        grid = tensor_grid([gl, gl])
        yield "tensor", grid.points, grid.weights
        if params["chebyshev_candidates"]:
            samp = christoffel_sample(2, grid.m, int(params["seed"]))
            if params["use_sample_weights"]:
                w = sample_weights(samp.points, basis, (table, table))
            else:
                w = np.full(samp.m, 1.0 / samp.m)
            yield "chebyshev", samp.points, w

    def stage(tag, pts, wts):
        def run():
            A = design_matrix(basis, (table, table), pts, wts)
            rows = []
            series = [("target 4x4 gauss", target, "s")]
            errors = {}
            for strategy in params["strategies"]:
                sel = run_strategy(strategy, A, n)
                chosen = pts[sel.row_indices]
                rows += [[strategy, serialize.fmt(p[0]), serialize.fmt(p[1])]
                         for p in chosen]
                err = max(np.min(np.max(np.abs(chosen - t), axis=1)) for t in target)
                errors[strategy] = float(err)
                series.append((strategy, chosen, {"qr": "o", "lu": "^", "svd": "x"}
                               .get(strategy, "+")))
            outputs = [serialize.write_csv(outdir / f"selections_{tag}.csv", rows,
                                           header=["strategy", "z1", "z2"]),
                       serialize.save_json(errors, outdir / f"node_errors_{tag}.json")]
            if tag == "tensor":
                outputs.append(serialize.write_csv(
                    outdir / "target_nodes.csv",
                    ([serialize.fmt(p[0]), serialize.fmt(p[1])] for p in target),
                    header=["z1", "z2"]))
            if params["plots"]:
                outputs.append(plots.point_scatter(
                    series, outdir / f"selections_{tag}.png",
                    title=f"{tag} candidates, k={n}"))
            return outputs
        return run

    for tag, pts, wts in candidate_sets():
        yield f"subselect-2d-{tag}", stage(tag, pts, wts)


def padua_points(N):
    """Closed-form Padua points for even N: the odd checkerboard of the
    (N+1) x (N+2) Chebyshev-Lobatto tensor grid."""
    pts = []
    for mm in range(1, N + 2):
        z1 = np.cos(np.pi * (mm - 1) / N)
        for kk in range(1, N // 2 + 2):
            angle = (2 * kk - 1) if mm % 2 == 1 else (2 * kk - 2)
            pts.append((z1, np.cos(np.pi * angle / (N + 1))))
    return np.array(pts)


def _match_point_set(found, reference, tol=1e-9):
    reference = np.atleast_2d(reference)
    if len(found) != len(reference):
        return False
    used = np.zeros(len(reference), dtype=bool)
    for p in np.atleast_2d(found):
        dists = np.linalg.norm(reference - p, axis=1)
        dists[used] = np.inf
        j = int(np.argmin(dists))
        if dists[j] > tol:
            return False
        used[j] = True
    return True


def _padua(params, outdir):
    N = int(params["N"])
    if N % 2:
        raise ValueError("N must be even for the closed-form grid used here")
    table = recurrence_coefficients("chebyshev1", 2 * N + 8)
    grid = tensor_grid([gauss_lobatto(table, N + 1), gauss_lobatto(table, N + 2)])
    basis = multi_index_set("total_order", 2, N)
    n = len(basis)
    A = design_matrix(basis, (table, table), grid.points, grid.weights)
    state = {}

    def full_gram_stage():
        report = gram_report(A)
        outputs = [serialize.save_gram_csv(report, outdir / "full_gram.csv")]
        if params["plots"]:
            outputs.append(plots.gram_heatmap(report.gram, outdir / "full_gram.png",
                                              title=f"{grid.m}-point grid"))
        return outputs

    def select_stage():
        sel = newton_subselect(A, n, lam=float(params["lam"]))
        state["selection"] = sel
        chosen = grid.points[sel.row_indices]
        closed = padua_points(N)
        mirrored = closed * np.array([1.0, -1.0])
        match = ("closed-form" if _match_point_set(chosen, closed)
                 else "mirror" if _match_point_set(chosen, mirrored) else "none")
        state["match"] = match
        outputs = [
            serialize.write_csv(outdir / "selection.csv",
                                ([serialize.fmt(p[0]), serialize.fmt(p[1]),
                                  serialize.fmt(w)] for p, w in
                                 zip(chosen, sel.renormalized_weights)),
                                header=["z1", "z2", "weight"]),
            serialize.write_csv(outdir / "padua_closed_form.csv",
                                ([serialize.fmt(p[0]), serialize.fmt(p[1])]
                                 for p in closed),
                                header=["z1", "z2"]),
            serialize.save_json({"family_match": match,
                                 "iterations": sel.objective_report["iterations"],
                                 "swaps": sel.objective_report["swaps"]},
                                outdir / "match.json"),
            serialize.save_selection(sel, outdir / "selection.json", design=A),
        ]
        if params["plots"]:
            outputs.append(plots.point_scatter(
                [("grid", grid.points, "."), ("selected", chosen, "o"),
                 ("closed form", closed, "x")],
                outdir / "selection.png", title=f"N={N}: {match}"))
        return outputs

    def weights_stage():
        sel = state["selection"]
        chosen = grid.points[sel.row_indices]
        mw = nnls_weights(chosen, basis, (table, table))
        psi = evaluate_basis(basis, (table, table), chosen)
        gram = (psi.T * mw.weights) @ psi
        rows = ([str(p), str(q), serialize.fmt(gram[p, q])]
                for p in range(n) for q in range(n))
        outputs = [serialize.write_csv(outdir / "selected_gram.csv", rows,
                                       header=["p", "q", "value"]),
                   serialize.save_json({"residual": mw.residual,
                                        "inexact": mw.inexact},
                                       outdir / "nnls_report.json")]
        if params["plots"]:
            outputs.append(plots.gram_heatmap(gram, outdir / "selected_gram.png",
                                              title="subselected rule"))
        return outputs

    yield "full-gram", full_gram_stage
    yield "newton-select", select_stage
    yield "moment-weights", weights_stage


def _timing(params, outdir):
    d = int(params["d"])
    orders = [int(o) for o in params["orders"]]
    table = recurrence_coefficients("chebyshev1", max(orders) + 9)

    def run():
        rows = []
        curves = {s: [] for s in params["strategies"]}
        sizes = []
        for order in orders:
            basis = multi_index_set("total_order", d, order)
            n = len(basis)
            gl = golub_welsch(table, order + 1)
            grid = tensor_grid([gl] * d)
            A = design_matrix(basis, (table,) * d, grid.points, grid.weights)
            sizes.append(n)
            for strategy in params["strategies"]:
                t0 = time.perf_counter()
                sel = run_strategy(strategy, A, n)
                elapsed = time.perf_counter() - t0
                curves[strategy].append(elapsed)
                rows.append([str(order), str(n), str(grid.m), strategy,
                             serialize.fmt(elapsed),
                             serialize.fmt(sel.objective_report["kappa"])])
        outputs = [serialize.write_csv(outdir / "timings.csv", rows,
                                       header=["order", "n", "m", "strategy",
                                               "seconds", "kappa"])]
        if params["plots"]:
            outputs.append(plots.timing_curves(sizes, curves, outdir / "timings.png",
                                               title=f"d={d}, k=n selection"))
        return outputs

    yield "timing-sweep", run


_RUNNERS = {
    "doe-gram": _doe_gram,
    "sparse-decay": _sparse_decay,
    "cs-conditioning": _cs_conditioning,
    "subsample-gauss-1d": _subsample_gauss_1d,
    "subsample-gauss-2d": _subsample_gauss_2d,
    "padua": _padua,
    "timing": _timing,
}


def validate_selection(selection_path, design_path, tol=1e-10):
    """Recompute a stored selection's diagnostics against its design.

    Raises on out-of-range indices or a design checksum mismatch; metric
    disagreements are reported, not raised.
    """
    selection, checksum = serialize.load_selection(selection_path)
    design = serialize.load_design(design_path)
    if checksum is not None:
        actual = serialize.design_checksum(design)
        if actual != checksum:
            raise ValueError("design checksum mismatch: selection was made on a "
                             "different design")
    m, n = design.shape
    if selection.row_indices.min() < 0 or selection.row_indices.max() >= m:
        raise IndexError(f"selection index out of range for design with {m} rows")
    tau = design.weights[selection.row_indices].sum()
    sub = design.entries[selection.row_indices] / np.sqrt(tau)
    gram = sub.T @ sub
    svals = np.linalg.svd(sub, compute_uv=False)
    kappa = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    sign, logdet = np.linalg.slogdet(gram)
    frontier = np.abs(gram - np.eye(n)) < tol
    report = {
        "k": int(selection.k),
        "kappa": kappa,
        "log_det": float(logdet) if sign > 0 else float("-inf"),
        "weights_match": bool(np.allclose(
            selection.renormalized_weights,
            design.weights[selection.row_indices] / tau, atol=1e-12)),
        "frontier_pass_fraction": float(frontier.mean()),
        "stored_report": selection.objective_report,
        "diffs": {},
    }
    for key in ("kappa", "log_det"):
        stored = selection.objective_report.get(key)
        if stored is not None:
            report["diffs"][key] = abs(float(stored) - report[key])
    return report
