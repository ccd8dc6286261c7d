"""Acceptance checks with their tolerances and time budgets.

Each check returns one or more :class:`CheckResult` objects.  ``quick``
shrinks instance counts for a fast smoke run; the tolerances never change.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .attention import (
    AttentionParams,
    FeatureMap,
    deepsets_layer,
    linear_attention,
    mpnn_vn_attention,
    mpnn_vn_deepsets,
)
from .coarsening import VertexMap, coarsen, induced_coarse_graph, lift_matrix, projection_matrix
from .eigen import sym_eig
from .generators import generate_graph
from .graph import Graph, combinatorial_laplacian, normalized_laplacian
from .graphon import (
    Graphon,
    Grid,
    Mode,
    Observation,
    SampleScheme,
    convergence_experiment,
    d2inf,
    estimate_probabilities,
    median_errors,
    sample_adjacency,
    sample_grid,
)
from .ign import (
    IGNModel,
    bell,
    enumerate_partitions,
    ign_forward,
    le_op_1to2,
    le_op_2to1,
    le_op_2to2,
    partition_norm_2,
    vector_norm,
)
from .losses import (
    conductance_loss,
    normalized_quadratic_loss,
    quadratic_loss,
    rayleigh_loss_report,
    sample_subsets,
)
from .operators import OperatorChoice, coarse_operator, functional, lift, original_operator, project
from .optimizer import WeightVector, align_spectrum


@dataclass
class CheckResult:
    cid: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    gating: bool = True

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tag = "" if self.gating else " (informative)"
        return f"[{status}] criterion {self.cid}: {self.title}{tag} | {self.detail} | {self.seconds:.2f}s"


def _timed(budget):
    def wrap(fn):
        def run(quick=False):
            t0 = time.perf_counter()
            results = fn(quick)
            dt = time.perf_counter() - t0
            for r in results:
                r.seconds = dt
                if budget is not None and dt > budget:
                    r.passed = False
                    r.detail += f"; exceeded {budget:.0f}s budget"
            return results
        run.__name__ = fn.__name__
        return run
    return wrap


# -- instance generators -------------------------------------------------------

def random_connected_graph(rng, n, p=None, weighted=True) -> Graph:
    """Random spanning tree plus Erdos-Renyi extras, with uniform weights in [0.5, 2]."""
    p = rng.uniform(0.1, 0.6) if p is None else p
    perm = rng.permutation(n)
    edges = {}
    for t in range(1, n):
        a, b = perm[t], perm[rng.integers(t)]
        edges[(min(a, b), max(a, b))] = 1.0
    iu, ju = np.triu_indices(n, 1)
    extra = rng.uniform(size=iu.size) < p
    for a, b in zip(iu[extra], ju[extra]):
        edges[(int(a), int(b))] = 1.0
    keys = sorted(edges)
    w = rng.uniform(0.5, 2.0, size=len(keys)) if weighted else np.ones(len(keys))
    return Graph.from_edges(n, [(a, b, float(x)) for (a, b), x in zip(keys, w)])


def random_map(rng, n, n_hat=None) -> VertexMap:
    n_hat = int(rng.integers(2, n + 1)) if n_hat is None else n_hat
    assign = np.concatenate([np.arange(n_hat), rng.integers(n_hat, size=n - n_hat)])
    return VertexMap.from_assignments(rng.permutation(assign))


def simple_spectrum(m, rel_gap=1e-4) -> bool:
    ev = np.linalg.eigvalsh(m)
    return bool(np.min(np.diff(ev)) > rel_gap * max(1.0, ev[-1]))


def random_instance(rng, n_max=40, n_min=4):
    n = int(rng.integers(n_min, n_max + 1))
    g = random_connected_graph(rng, n)
    return g, induced_coarse_graph(g, random_map(rng, n))


# -- oracles ---------------------------------------------------------------------

def oracle_laplacian(n, edges):
    lap = np.zeros((n, n))
    for i, j, w in edges:
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


def oracle_coarse_laplacian(g: Graph, assign, n_hat):
    lap = np.zeros((n_hat, n_hat))
    for i, j, w in g.edges:
        r, s = assign[i], assign[j]
        if r != s:
            lap[r, r] += w
            lap[s, s] += w
            lap[r, s] -= w
            lap[s, r] -= w
    return lap


def oracle_losses(g: Graph, assign, n_hat, k):
    """Quadratic, normalized and Rayleigh losses written directly from their formulas."""
    n = g.n
    lap = oracle_laplacian(n, g.edges)
    lap_hat = oracle_coarse_laplacian(g, assign, n_hat)
    gamma = np.bincount(assign, minlength=n_hat).astype(float)
    p = np.zeros((n_hat, n))
    for i in range(n):
        p[assign[i], i] = 1.0 / gamma[assign[i]]
    pplus = (p > 0).astype(float).T
    d, dh = np.diag(lap), np.diag(lap_hat)
    nl = np.eye(n) - (lap * -1 + np.diag(d)) / np.sqrt(np.outer(d, d))
    nl_hat = np.eye(n_hat) - (lap_hat * -1 + np.diag(dh)) / np.sqrt(np.outer(dh, dh))
    dw = lap_hat / np.sqrt(np.outer(gamma, gamma))

    _, f = np.linalg.eigh(lap)
    quad = np.mean([abs(f[:, i] @ lap @ f[:, i] - (p @ f[:, i]) @ lap_hat @ (p @ f[:, i])) for i in range(k)])
    _, fn = np.linalg.eigh(nl)
    proj_n = np.diag(np.sqrt(dh)) @ p @ np.diag(1 / np.sqrt(d))
    nquad = np.mean([abs(fn[:, i] @ nl @ fn[:, i] - (proj_n @ fn[:, i]) @ nl_hat @ (proj_n @ fn[:, i]))
                     for i in range(k)])
    proj_r = np.diag(1 / np.sqrt(gamma)) @ pplus.T
    terms = []
    for i in range(k):
        x = f[:, i]
        y = proj_r @ x
        if y @ y > 1e-24:
            terms.append(abs(x @ lap @ x / (x @ x) - y @ dw @ y / (y @ y)))
    ray = np.mean(terms) if terms else 0.0
    return quad, nquad, ray


def oracle_conductance(n, edges, subset):
    s = set(int(v) for v in subset)
    cut = sum(w for i, j, w in edges if (i in s) != (j in s))
    deg = np.zeros(n)
    for i, j, w in edges:
        deg[i] += w
        deg[j] += w
    a_s = sum(deg[v] for v in s)
    return cut / min(a_s, deg.sum() - a_s)


# -- checks -------------------------------------------------------------------------

@_timed(1)
def check_bell(quick=False):
    lengths = tuple(len(enumerate_partitions(k)) for k in range(6))
    counts = tuple(bell(k) for k in range(6))
    target = (1, 1, 2, 5, 15, 52)
    ok = lengths == target and counts == target
    return [CheckResult("1", "Bell numbers", ok, f"lengths={lengths}")]


@_timed(10)
def check_stability(quick=False):
    rng = np.random.default_rng(2)
    trials = 100 if quick else 1000
    slack = 1e-12
    literal_fail, box_fail, vec_fail = {}, {}, {}
    for _ in range(trials):
        n = int(rng.integers(3, 13))
        a = rng.normal(size=(n, n))
        x = rng.normal(size=n)
        pa = partition_norm_2(a)
        for i in range(1, 16):
            pt = partition_norm_2(le_op_2to2(i, a))
            if not pt.le(pa, slack):
                literal_fail[i] = literal_fail.get(i, 0) + 1
            if pt.max() > pa.max() + slack:
                box_fail[i] = box_fail.get(i, 0) + 1
        nx_ = vector_norm(x)
        for i in range(1, 6):
            pt = partition_norm_2(le_op_1to2(i, x))
            if pt.diag_part > nx_ + slack or pt.matrix_part > nx_ + slack:
                vec_fail[f"1->2:{i}"] = vec_fail.get(f"1->2:{i}", 0) + 1
            if vector_norm(le_op_2to1(i, a)) > pa.max() + slack:
                vec_fail[f"2->1:{i}"] = vec_fail.get(f"2->1:{i}", 0) + 1
    literal = CheckResult(
        "2", "LE stability, componentwise partition-norm bound",
        not literal_fail and not vec_fail,
        f"{trials} matrices; ops violating the componentwise bound (op: count) = {literal_fail or 'none'}; "
        f"1->2 / 2->1 violations = {vec_fail or 'none'}")
    box = CheckResult(
        "2-box", "LE stability, bound by the larger partition-norm component",
        not box_fail and not vec_fail,
        f"{trials} matrices; violations = {box_fail or 'none'}", gating=False)
    return [literal, box]


@_timed(10)
def check_equivariance(quick=False):
    rng = np.random.default_rng(3)
    trials = 40 if quick else 200
    model = IGNModel.random(rng=11)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 13))
        perm = rng.permutation(n)
        pm = np.eye(n)[perm]
        a = rng.normal(size=(n, n))
        x = rng.normal(size=n)
        pa = pm @ a @ pm.T
        for i in range(1, 16):
            worst = max(worst, np.abs(le_op_2to2(i, pa) - pm @ le_op_2to2(i, a) @ pm.T).max())
        for i in range(1, 6):
            worst = max(worst, np.abs(le_op_1to2(i, pm @ x) - pm @ le_op_1to2(i, x) @ pm.T).max())
            worst = max(worst, np.abs(le_op_2to1(i, pa) - pm @ le_op_2to1(i, a)).max())
        worst = max(worst, np.abs(ign_forward(model, pa) - ign_forward(model, a)).max())
    return [CheckResult("3", "Equivariance of LE ops and IGN invariance", worst <= 1e-10,
                        f"{trials} permutations; max deviation {worst:.2e} (tol 1e-10)")]


@_timed(30)
def check_operator_table(quick=False):
    worst = {c: 0.0 for c in OperatorChoice}
    lift_proj = 0.0
    rng = np.random.default_rng(4)
    trials = 100 if quick else 500
    for _ in range(trials):
        g, cr = random_instance(rng)
        x_hat = rng.normal(size=cr.coarse.n)
        for c in OperatorChoice:
            m, m_hat = original_operator(c, g), coarse_operator(c, g, cr)
            x = lift(c, g, cr, x_hat)
            a, b = functional(c, m, x), functional(c, m_hat, x_hat)
            worst[c] = max(worst[c], abs(a - b) / (1 + abs(b)))
            lift_proj = max(lift_proj, np.abs(project(c, g, cr, x) - x_hat).max())
    ok = max(worst.values()) <= 1e-9
    detail = ", ".join(f"{c.name.lower()} {v:.1e}" for c, v in worst.items())
    return [CheckResult("4", "Operator-table invariance", ok,
                        f"{trials} instances; max relative gap: {detail} (tol 1e-9); "
                        f"project(lift) deviation {lift_proj:.1e}")]


@_timed(10)
def check_projection(quick=False):
    rng = np.random.default_rng(4)
    trials = 100 if quick else 500
    pp_err = lap_err = 0.0
    for _ in range(trials):
        g, cr = random_instance(rng)
        p, pl = projection_matrix(cr.map), lift_matrix(cr.map)
        pp_err = max(pp_err, np.abs(p @ pl - np.eye(cr.coarse.n)).max())
        lap_err = max(lap_err, np.abs(pl.T @ combinatorial_laplacian(g) @ pl
                                      - combinatorial_laplacian(cr.coarse)).max())
    ok = pp_err <= 1e-15 and lap_err <= 1e-12
    return [CheckResult("5", "Projection identities", ok,
                        f"{trials} instances; |PP+ - I| {pp_err:.1e} (tol 1e-15); "
                        f"|P+' L P+ - Lhat| {lap_err:.1e} (tol 1e-12)")]


def optimizer_instances(rng, count):
    out = []
    while len(out) < count:
        n = int(rng.integers(8, 41))
        g = random_connected_graph(rng, n, p=0.3)
        cr = coarsen(g, "heavy", 0.5, rng=int(rng.integers(1 << 30)))
        if 3 <= cr.coarse.n <= 20:
            out.append(cr.coarse)
    return out


@_timed(60)
def check_optimizer(quick=False):
    rng = np.random.default_rng(6)
    tol = 1e-9
    runs = optimizer_instances(rng, 3 if quick else 10)
    mono = mask_ok = True
    worst_obj = worst_w = worst_res = 0.0
    for i, c in enumerate(runs):
        lam = 2.0 * sym_eig(combinatorial_laplacian(c)).values
        w0 = WeightVector.from_graph(c)
        seen = []

        def watch(t, wv, u, f):
            nonlocal mask_ok
            mask_ok &= bool(np.all(wv.w[~wv.mask] == 0.0) and np.all(wv.w >= 0))
            seen.append(f)

        out, trace = align_spectrum(c, lam, tol=tol, max_iter=20000, rng=i, callback=watch)
        obj = np.array(trace.objectives)
        mono &= bool(np.all(np.diff(obj) <= 1e-12 * np.maximum(1.0, obj[:-1])))
        w1 = np.zeros_like(w0.w)
        w_out = WeightVector.from_graph(out)
        w1[w_out.mask] = w_out.w[w_out.mask]
        worst_obj = max(worst_obj, obj[-1])
        worst_w = max(worst_w, np.abs(w1 - 2.0 * w0.w).max())
        worst_res = max(worst_res, trace.residual)
    n_runs = len(runs)
    return [
        CheckResult("6a", "Optimizer objective monotone", mono, f"{n_runs} runs"),
        CheckResult("6b", "Optimizer masked coordinates stay 0", mask_ok, f"{n_runs} runs"),
        CheckResult("6c", "Scaled-spectrum objective", worst_obj <= 1e-8,
                    f"max final objective {worst_obj:.2e} (tol 1e-8)"),
        CheckResult("6d", "Scaled-spectrum weights recover 2*w0", worst_w <= 1e-4,
                    f"max |w - 2 w0| {worst_w:.2e} (tol 1e-4)"),
        CheckResult("6e", "Fixed-point residual at termination", worst_res <= 10 * tol,
                    f"max residual {worst_res:.2e} (tol {10 * tol:.0e})"),
    ]


@_timed(600)
def check_graphon(quick=False):
    sizes = [32, 64, 128] if quick else [32, 64, 128, 256, 512]
    seeds = range(2 if quick else 5)
    model = IGNModel.random(depth=5, width=16, rng=0)
    lo, hi = sizes[0], sizes[-1]
    med = {}
    for name in ("sbm", "lip"):
        wg = Graphon.named(name)
        for mode in Mode:
            med[name, mode] = median_errors(convergence_experiment(wg, model, sizes, mode, seeds))
    a_ok = all(med[nm, m][hi] < 0.5 * med[nm, m][lo] for nm in ("sbm", "lip") for m in (Mode.EW_FIXED, Mode.EW_RANDOM))
    b_ok = all(med[nm, Mode.EP_RAW][hi] >= 0.5 * med[nm, Mode.EP_RAW][lo] for nm in ("sbm", "lip"))
    c_ok = all(med[nm, Mode.EP_SMOOTH][hi] < med[nm, Mode.EP_RAW][hi] for nm in ("sbm", "lip"))

    def fmt(modes):
        return "; ".join(f"{nm} {m.value}: {med[nm, m][lo]:.2e} -> {med[nm, m][hi]:.2e}"
                         for nm in ("sbm", "lip") for m in modes)
    return [
        CheckResult("7a", "Edge-weight inputs converge", a_ok,
                    f"median error n={lo} -> n={hi}: " + fmt((Mode.EW_FIXED, Mode.EW_RANDOM))),
        CheckResult("7b", "Raw 0-1 adjacency does not converge", b_ok, fmt((Mode.EP_RAW,))),
        CheckResult("7c", "Smoothed adjacency beats raw", c_ok, fmt((Mode.EP_SMOOTH, Mode.EP_RAW))),
    ]


@_timed(30)
def check_linear_attention(quick=False):
    rng = np.random.default_rng(8)
    trials = 100 if quick else 500
    worst = 0.0
    min_den = np.inf
    for t in range(trials):
        n, d = int(rng.integers(1, 65)), int(rng.integers(1, 9))
        x = rng.normal(size=(n, d))
        p = AttentionParams.random(d, int(rng.integers(1, 9)), rng)
        phi = FeatureMap.performer(int(rng.integers(1, 17)), p.d_key, rng) if t % 2 == 0 \
            else FeatureMap.linear_transformer()
        diff = mpnn_vn_attention(x, p, phi) - linear_attention(x, p, phi)
        worst = max(worst, np.linalg.norm(diff, axis=1).max())
        min_den = min(min_den, (phi(x @ p.w_q) @ phi(x @ p.w_k).sum(axis=0)).min())
    return [CheckResult("8", "MPNN+VN equals linear attention", worst <= 1e-10 and min_den > 0,
                        f"{trials} instances; max row error {worst:.2e} (tol 1e-10); "
                        f"min denominator {min_den:.2e}")]


@_timed(10)
def check_deepsets(quick=False):
    rng = np.random.default_rng(9)
    trials = 100 if quick else 500
    worst = 0.0
    for _ in range(trials):
        n, di, do = (int(v) for v in rng.integers(1, 33, size=3))
        x = rng.normal(size=(n, di))
        a, b, c = rng.normal(size=(di, do)), rng.normal(size=(di, do)), rng.normal(size=do)
        worst = max(worst, np.abs(mpnn_vn_deepsets(x, a, b, c) - deepsets_layer(x, a, b, c)).max())
    return [CheckResult("9", "MPNN+VN simulates DeepSets", worst <= 1e-14,
                        f"{trials} instances; max error {worst:.2e} (tol 1e-14)")]


@_timed(300)
def check_estimation(quick=False):
    sizes = [64, 128, 256] if quick else [256, 512, 1024]
    wg = Graphon.sbm()
    med = []
    for n in sizes:
        vals = []
        for seed in range(5):
            u = sample_grid(n, Grid.RANDOM, np.random.default_rng([seed, n, 0]))
            p = wg(u[:, None], u[None, :])
            a = sample_adjacency(wg, n, SampleScheme(Grid.RANDOM, Observation.BERNOULLI),
                                 np.random.default_rng([seed, n, 0]))
            vals.append(d2inf(estimate_probabilities(a), p) ** 2)
        med.append(float(np.median(vals)))
    ok = all(b < a for a, b in zip(med, med[1:]))
    return [CheckResult("10", "Edge-probability estimation improves with n", ok,
                        "median d2inf^2: " + ", ".join(f"n={n}: {m:.4f}" for n, m in zip(sizes, med)))]


@_timed(30)
def check_loss_oracles(quick=False):
    rng = np.random.default_rng(11)
    trials = 30 if quick else 100
    worst = {"quad": 0.0, "nquad": 0.0, "ray": 0.0, "cond": 0.0}
    for t in range(trials):
        # per-term losses depend on the eigenbasis inside a repeated eigenvalue
        g, cr = random_instance(rng, n_min=6)
        while not (simple_spectrum(combinatorial_laplacian(g)) and simple_spectrum(normalized_laplacian(g))):
            g, cr = random_instance(rng, n_min=6)
        k = int(rng.integers(1, g.n + 1))
        q, nq, r = oracle_losses(g, np.asarray(cr.map.assignments), cr.coarse.n, k)
        worst["quad"] = max(worst["quad"], abs(quadratic_loss(g, cr, k) - q))
        worst["nquad"] = max(worst["nquad"], abs(normalized_quadratic_loss(g, cr, k) - nq))
        worst["ray"] = max(worst["ray"], abs(rayleigh_loss_report(g, cr, k).value - r))
        if 2 * cr.coarse.n >= g.n:
            kc = 5
            value = conductance_loss(g, cr, kc, rng=t)
            subsets = sample_subsets(g, cr, kc, np.random.default_rng(t))
            edges_hat = cr.coarse.edges
            ref = np.mean([abs(oracle_conductance(g.n, g.edges, s)
                               - oracle_conductance(cr.coarse.n, edges_hat,
                                                    {int(cr.map.assignments[v]) for v in s}))
                           for s, _ in subsets])
            worst["cond"] = max(worst["cond"], abs(value - ref))
    ok = max(worst.values()) <= 1e-10
    return [CheckResult("11", "Loss oracle equivalence", ok,
                        f"{trials} instances; max abs gap " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                        + " (tol 1e-10)")]


@_timed(None)
def check_smoke_ws(quick=False):
    g = generate_graph("ws", 512, 0)
    cr = coarsen(g, "lvn", 0.5, rng=0)
    value = quadratic_loss(g, cr, 40)
    ok = 0.011 <= value <= 1.1
    return [CheckResult("12", "WS n=512 local-variation quadratic loss near 0.11", ok,
                        f"quadratic loss {value:.4f} with n_hat={cr.coarse.n}", gating=False)]


CHECKS = (check_bell, check_stability, check_equivariance, check_operator_table, check_projection,
          check_optimizer, check_graphon, check_linear_attention, check_deepsets, check_estimation,
          check_loss_oracles, check_smoke_ws)


def run_all(quick=False) -> list[CheckResult]:
    out = []
    for check in CHECKS:
        out.extend(check(quick))
    return out
