"""Crude Monte Carlo exceedance estimates and comparison tables.

The estimates here are the empirical side of every tail formula in
:mod:`excursion.asymptotics`: simulate the field exactly on a grid,
count threshold crossings, and report Wilson intervals plus the known
sources of bias (mesh slack, domain truncation) instead of hiding them.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import asym_general, informative_width
from .constants import _window_sum_estimate
from .model import ClassificationError, ModelError, h1_limit
from .simulate import (
    CHUNK,
    GridSpec,
    _chunk_indices,
    mesh_rule_delta,
    mesh_rule_slack,
    prepare_plan,
    sample_chunk,
)
from .specfun import gauss_tail, psi

__all__ = [
    "MeshRuleError",
    "McEstimate",
    "default_grid",
    "mc_exceedance",
    "compare_table",
    "write_csv",
    "verify_local_lemma",
    "CSV_COLUMNS",
]

_Z95 = 1.959963984540054


class MeshRuleError(ValueError):
    """Grid too coarse for the requested level; carries a suggestion."""


@dataclass
class McEstimate:
    """Crude MC exceedance estimate with its audit trail."""

    p_hat: float
    std_err: float
    ci95: tuple
    n_paths: int
    n_hits: int
    u: float
    grid: GridSpec
    seed: int
    mesh_slack: float = 0.0
    notes: tuple = ()

    @property
    def ci_lo(self):
        return self.ci95[0]

    @property
    def ci_hi(self):
        return self.ci95[1]


def _wilson(hits, n):
    p = hits / n
    denom = 1.0 + _Z95**2 / n
    center = (p + _Z95**2 / (2.0 * n)) / denom
    halfw = _Z95 * math.sqrt(p * (1.0 - p) / n + _Z95**2 / (4.0 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - halfw)
    hi = 1.0 if hits == n else min(1.0, center + halfw)
    return lo, hi


def _max_amplitudes(model):
    pts = []
    for chart in model.maxset.charts:
        pts.extend(chart.representative_points(3))
    amps = np.array([model.correlation.amplitude(p) for p in pts], dtype=float)
    return amps.max(axis=0)


def default_grid(model, u, budget=0.01):
    """Uniform grid over the box domain satisfying the mesh rule at level u."""
    if model.domain.kind not in ("box", "cylinder"):
        raise ModelError("default_grid needs a box or cylinder domain")
    amps = _max_amplitudes(model)
    axes = []
    for (lo, hi), alpha, amp in zip(model.domain.bounds, model.correlation.alphas, amps):
        delta = mesh_rule_delta(u, alpha, amp, budget)
        n_nodes = max(2, int(math.ceil((hi - lo) / delta)) + 1)
        axes.append(np.linspace(lo, hi, n_nodes))
    return GridSpec(tuple(axes))


def _check_mesh(model, u, grid):
    amps = _max_amplitudes(model)
    slack = mesh_rule_slack(u, model.correlation.alphas, amps, grid.mesh)
    if slack > 0.01 + 1e-12:
        suggestion = tuple(
            mesh_rule_delta(u, alpha, amp)
            for alpha, amp in zip(model.correlation.alphas, amps)
        )
        raise MeshRuleError(
            "mesh slack u^2 max_i A_i delta^alpha_i = %.3g exceeds 0.01 at u = %g; "
            "use per-axis mesh <= %s" % (slack, u, suggestion)
        )
    return slack


def mc_exceedance(model, u, grid=None, n=10**4, seed=None, threads=1):
    """Estimate P(max over grid > u) by exact-path simulation.

    The grid must satisfy the mesh rule (slack u^2 max A delta^alpha at
    most 0.01), otherwise a :class:`MeshRuleError` with a compliant mesh
    is raised.  Chunks of paths are simulated independently (optionally
    on several threads); per-chunk hit counts are integers, so the
    estimate does not depend on the thread count.
    """
    if model.sim is None:
        raise ModelError("model carries no simulation plan (full correlation)")
    if n < 10**3:
        raise ValueError("need n >= 1e3 paths")
    if seed is None:
        raise ValueError("seed is required for reproducible estimates")
    u = float(u)
    if grid is None:
        grid = default_grid(model, max(u, 1.0))
    elif not isinstance(grid, GridSpec):
        grid = GridSpec((np.asarray(grid, dtype=float),))
    slack = _check_mesh(model, max(u, 1.0), grid) if u > 0 else 0.0

    nodes = grid.nodes
    state = prepare_plan(model.sim, nodes)
    tube = None
    eps = None
    if model.sim.maxset_distance is not None and u > 1.0:
        eps = informative_width(u)
        tube = np.asarray(model.sim.maxset_distance(nodes), dtype=float) <= eps
        if not tube.any():
            tube = None

    chunk_ids = sorted({cid for cid, _, _ in _chunk_indices(n)})
    bounds = {cid: lsl for cid, lsl, _ in _chunk_indices(n)}

    def one_chunk(cid):
        rows = sample_chunk(model.sim, nodes, seed, cid, state)[bounds[cid]]
        sup = rows.max(axis=1)
        hits = int(np.count_nonzero(sup > u))
        hits_tube = (
            int(np.count_nonzero(rows[:, tube].max(axis=1) > u)) if tube is not None else 0
        )
        return hits, hits_tube

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(one_chunk, chunk_ids))
    else:
        results = [one_chunk(cid) for cid in chunk_ids]

    hits = sum(r[0] for r in results)
    p_hat = hits / n
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / n)
    notes = ["mesh_slack=%.3g" % slack]
    if tube is not None:
        hits_tube = sum(r[1] for r in results)
        gap = abs(hits - hits_tube) / n
        notes.append(
            "tube(eps=%.4g) p_hat=%.6g, %s CI"
            % (eps, hits_tube / n, "within" if gap <= 2.0 * max(std_err, 1.0 / n) else "OUTSIDE")
        )
    return McEstimate(
        p_hat, std_err, _wilson(hits, n), n, hits, u, grid, seed, slack, tuple(notes)
    )


# ---------------------------------------------------------------------------
# Comparison tables

CSV_COLUMNS = (
    "model_id",
    "u",
    "asym_value",
    "asym_lo",
    "asym_hi",
    "p_hat",
    "ci_lo",
    "ci_hi",
    "ratio",
    "n_paths",
    "mesh",
    "seed",
)


def compare_table(model, u_list, n=10**4, seed=None, grid=None, threads=1, asym=None):
    """One row per level: tail formula vs crude MC, with their ratio."""
    if asym is None:
        asym = asym_general(model)
    rows = []
    for u in u_list:
        est = mc_exceedance(model, u, grid=grid, n=n, seed=seed, threads=threads)
        a_val = float(asym.evaluate(u))
        a_lo, a_hi = asym.evaluate_band(u)
        rows.append(
            {
                "model_id": model.model_id,
                "u": float(u),
                "asym_value": a_val,
                "asym_lo": float(a_lo),
                "asym_hi": float(a_hi),
                "p_hat": est.p_hat,
                "ci_lo": est.ci_lo,
                "ci_hi": est.ci_hi,
                "ratio": est.p_hat / a_val if a_val else math.inf,
                "n_paths": est.n_paths,
                "mesh": max(est.grid.mesh),
                "seed": est.seed,
            }
        )
    return rows


def _fmt_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    return "%.10g" % value


def write_csv(rows, out):
    """Write comparison rows in the fixed column order (10 significant digits)."""
    own = isinstance(out, str)
    handle = open(out, "w", encoding="ascii", newline="") if own else out
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt_cell(row[c]) for c in CSV_COLUMNS])
    finally:
        if own:
            handle.close()


def csv_text(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Windowed check of the local double-sum lemma


def verify_local_lemma(model, t, window, u, n=10**4, seed=None, delta=None):
    """Compare P(max over t + scale * [0, W] > u) / psi(u) with its window constant.

    ``scale`` is the local window width q(u) C(t) of the model at t.  The
    predicted value is the tilted window estimate (or 1 for a window that
    the variance drop collapses, or exactly 1 for the single point), so
    both sides carry Monte Carlo errors of known size.  Returns
    ``(mc_value, predicted)`` as :class:`~excursion.constants.ConstantEstimate`-like
    pairs (value, std_err).
    """
    if model.d != 1:
        raise ModelError("windowed checks are implemented for scalar-parameter models")
    if model.sim is None:
        raise ModelError("model carries no simulation plan")
    if seed is None:
        raise ValueError("seed is required for reproducible estimates")
    t = float(t)
    width = float(window)
    if width < 0:
        raise ValueError("window width must be nonnegative")
    u = float(u)
    alpha = model.correlation.alphas[0]
    amp = float(model.correlation.amplitude(t)[0])
    scale = float(model.correlation.q(u)[0]) * amp ** (-1.0 / alpha)

    sigma_t = model.variance.sigma_at(t)
    u_loc = u / sigma_t

    if width == 0.0:
        mc = gauss_tail(u_loc) / psi(u_loc)
        return (float(mc), 0.0), (1.0, 0.0)

    lo, hi = model.domain.bounds[0]
    if not (lo <= t and t + scale * width <= hi):
        raise ModelError(
            "window [%g, %g] escapes the domain [%g, %g]" % (t, t + scale * width, lo, hi)
        )

    if delta is None:
        delta = min(width / 8.0, 0.01 ** (1.0 / alpha))
    m = max(8, int(math.ceil(width / delta)))
    delta = width / m

    # predicted window constant, by regime of the variance drop at t
    try:
        limit = h1_limit(model, t, 1.0)
        kind = limit.kind
    except ClassificationError:
        kind = "zero"
    if kind == "infinite":
        predicted = (1.0, 0.0)
    elif kind == "finite":
        est = _window_sum_estimate(
            alpha, float(limit.value), alpha, width, delta, n, seed + 1, two_sided=False
        )
        predicted = (est.value, est.std_err)
    else:
        est = _window_sum_estimate(alpha, 0.0, 1.0, width, delta, n, seed + 1, two_sided=False)
        predicted = (est.value, est.std_err)

    nodes = t + scale * np.linspace(0.0, width, m + 1)
    state = prepare_plan(model.sim, nodes)
    hits = 0
    for cid, lsl, _ in _chunk_indices(n):
        rows = sample_chunk(model.sim, nodes, seed, cid, state)[lsl]
        hits += int(np.count_nonzero(rows.max(axis=1) > u))
    p_hat = hits / n
    mc_value = p_hat / psi(u_loc)
    mc_se = math.sqrt(max(p_hat, 1.0 / n) * (1.0 - p_hat) / n) / psi(u_loc)
    return (float(mc_value), float(mc_se)), (float(predicted[0]), float(predicted[1]))
