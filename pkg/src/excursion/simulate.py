"""Exact Gaussian path sampling engines.

All engines draw from counter-based streams: path chunk c of engine e
on lane l uses ``SeedSequence(master_seed, spawn_key=(e, l, c))`` with a
fixed chunk size, so results are bit-identical no matter how many
chunks, threads or processes the work is split into.  Lanes separate
independent coordinate processes that share a master seed.

Engines:

* chol_paths: dense Cholesky factorization of an arbitrary covariance,
  with diagonal jitter escalation when the matrix is numerically
  indefinite.
* circulant_paths: circulant embedding of a stationary correlation on a
  uniform grid.  Exact in distribution when the embedding spectrum is
  nonnegative; tiny negative eigenvalues are clipped with a warning,
  larger ones trigger padding escalation and finally an error.
* fbm_paths: exact fractional Brownian motion through circulant
  embedding of the stationary increments (the H=1 case degenerates to
  the random line t*xi).
* bm_increment_paths: plain Brownian motion by cumulative sums, the
  cheap special case used by the product-domain models.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CHUNK",
    "GridSpec",
    "PathBatch",
    "chol_paths",
    "circulant_paths",
    "fbm_paths",
    "bm_increment_paths",
    "dual_norm_reduction",
    "sample_chunk",
    "mesh_rule_slack",
    "mesh_rule_delta",
    "dump_paths",
    "load_paths",
]

CHUNK = 1024

_ENGINE_IDS = {"chol": 1, "circulant": 2, "fbm": 3, "bm": 4}


def stream(seed, engine, chunk, lane=0):
    """Deterministic generator for one path chunk of one engine lane."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_ENGINE_IDS[engine], int(lane), int(chunk)))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class GridSpec:
    """Per-axis node lists; strictly increasing, at least one node."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        for a in axes:
            if a.size < 1 or np.any(np.diff(a) <= 0):
                raise ValueError("grid nodes must be strictly increasing and nonempty")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def uniform(cls, lo, hi, n):
        return cls((np.linspace(lo, hi, int(n)),))

    @property
    def nodes(self):
        if len(self.axes) != 1:
            raise ValueError("nodes is defined for one-axis grids")
        return self.axes[0]

    @property
    def n_nodes(self):
        out = 1
        for a in self.axes:
            out *= a.size
        return out

    @property
    def mesh(self):
        return tuple(float(np.max(np.diff(a))) if a.size > 1 else 0.0 for a in self.axes)


@dataclass
class PathBatch:
    """A block of sampled paths (n_paths x n_nodes) with its provenance."""

    values: np.ndarray
    grid: object
    seed: int
    engine: str
    notes: tuple = ()

    @property
    def n_paths(self):
        return self.values.shape[0]


def _chunk_indices(n, offset=0):
    """Yield (chunk_id, local_slice, out_slice) covering paths [offset, offset+n)."""
    done = 0
    while done < n:
        gidx = offset + done
        cid = gidx // CHUNK
        lo = gidx - cid * CHUNK
        take = min(CHUNK - lo, n - done)
        yield cid, slice(lo, lo + take), slice(done, done + take)
        done += take


def _covariance_matrix(cov, points):
    pts = np.asarray(points, dtype=float)
    try:
        mat = np.asarray(cov(pts[:, None], pts[None, :]), dtype=float)
        if mat.shape != (pts.size, pts.size):
            raise ValueError
    except Exception:
        mat = np.array([[cov(a, b) for b in pts] for a in pts], dtype=float)
    return 0.5 * (mat + mat.T)


def _cholesky_with_jitter(mat):
    scale = max(np.mean(np.diag(mat)), 1e-300)
    for jitter in (0.0, 1e-12, 1e-10, 1e-8):
        try:
            return np.linalg.cholesky(mat + jitter * scale * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise ValueError("covariance not PSD within tolerance (jitter up to 1e-8 failed)")


def chol_paths(cov, points, n, seed, lane=0, offset=0):
    """Exact zero-mean Gaussian vectors with covariance cov(points, points)."""
    if n < 1:
        raise ValueError("need n >= 1 paths")
    pts = np.asarray(points, dtype=float)
    if np.unique(pts).size != pts.size:
        raise ValueError("sample points must be distinct")
    L = _cholesky_with_jitter(_covariance_matrix(cov, pts))
    out = np.empty((n, pts.size))
    for cid, lsl, osl in _chunk_indices(n, offset):
        z = stream(seed, "chol", cid, lane).standard_normal((CHUNK, pts.size))
        out[osl] = z[lsl] @ L.T
    return PathBatch(out, pts, seed, "chol")


def _embedding_spectrum(kernel, delta, n_nodes, factor):
    """Eigenvalues of the wrapped-kernel circulant of size M >= factor*(n-1)."""
    m = 1
    target = max(2 * factor * max(n_nodes - 1, 1), 1)
    while m < target:
        m *= 2
    lags = np.minimum(np.arange(m), m - np.arange(m)) * delta
    lam = np.fft.fft(np.asarray(kernel(lags), dtype=float)).real
    return m, lam


def _circulant_setup(kernel, nodes):
    delta = float(nodes[1] - nodes[0]) if nodes.size > 1 else 1.0
    notes = []
    for factor in (1, 2, 4):
        m, lam = _embedding_spectrum(kernel, delta, nodes.size, factor)
        lmin, lmax = float(lam.min()), float(lam.max())
        if lmin >= -1e-8 * lmax:
            if lmin < 0:
                msg = "clipped negative embedding eigenvalues (min %.3e)" % lmin
                warnings.warn(msg)
                notes.append(msg)
            amp = np.sqrt(np.clip(lam, 0.0, None) / m)
            return m, amp, tuple(notes)
    raise ValueError("embedding failed; increase padding or use chol_paths")


def _circulant_chunk(rng, amp, m, n_nodes, count):
    pairs = (count + 1) // 2
    w = rng.standard_normal((pairs, m)) + 1j * rng.standard_normal((pairs, m))
    y = np.fft.fft(amp[None, :] * w, axis=1)
    return np.concatenate([y.real, y.imag], axis=0)[:count, :n_nodes]


def circulant_paths(kernel, grid, n, seed, lane=0, offset=0):
    """Stationary Gaussian paths on a uniform grid by circulant embedding."""
    nodes = grid.nodes if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    if nodes.size > 2:
        steps = np.diff(nodes)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ValueError("circulant_paths needs a uniform grid")
    m, amp, notes = _circulant_setup(kernel, nodes)
    out = np.empty((n, nodes.size))
    for cid, lsl, osl in _chunk_indices(n, offset):
        rows = _circulant_chunk(stream(seed, "circulant", cid, lane), amp, m, nodes.size, CHUNK)
        out[osl] = rows[lsl]
    return PathBatch(out, nodes, seed, "circulant", notes)


def _fgn_setup(hurst, delta, n_increments):
    """Embedding amplitudes for fractional Gaussian noise increments."""
    def gamma(k):
        k = np.abs(np.asarray(k, dtype=float))
        return 0.5 * ((k + 1) ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst) - 2 * k ** (2 * hurst))

    for factor in (1, 2, 4):
        m = 1
        while m < max(2 * factor * max(n_increments - 1, 1), 1):
            m *= 2
        lags = np.minimum(np.arange(m), m - np.arange(m))
        lam = np.fft.fft(gamma(lags)).real
        lmin, lmax = float(lam.min()), float(lam.max())
        if lmin >= -1e-8 * lmax:
            scale = delta**hurst  # increments over step delta
            return m, scale * np.sqrt(np.clip(lam, 0.0, None) / m)
    raise ValueError("embedding failed; increase padding or use chol_paths")


def fbm_paths(hurst, grid, n, seed, lane=0, offset=0):
    """Exact fractional Brownian motion on a uniform grid starting at 0."""
    if not 0.0 < hurst <= 1.0:
        raise ValueError("Hurst index must lie in (0, 1]")
    nodes = grid.nodes if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    if abs(nodes[0]) > 1e-12:
        raise ValueError("fbm grid must start at 0")
    out = np.empty((n, nodes.size))
    if hurst == 1.0:
        for cid, lsl, osl in _chunk_indices(n, offset):
            xi = stream(seed, "fbm", cid, lane).standard_normal(CHUNK)
            out[osl] = xi[lsl, None] * nodes[None, :]
        return PathBatch(out, nodes, seed, "fbm")
    if nodes.size == 1:
        out[:] = 0.0
        return PathBatch(out, nodes, seed, "fbm")
    delta = float(nodes[1] - nodes[0])
    n_inc = nodes.size - 1
    m, amp = _fgn_setup(hurst, delta, n_inc)
    for cid, lsl, osl in _chunk_indices(n, offset):
        rows = _circulant_chunk(stream(seed, "fbm", cid, lane), amp, m, n_inc, CHUNK)
        block = np.empty((rows.shape[0], nodes.size))
        block[:, 0] = 0.0
        np.cumsum(rows, axis=1, out=block[:, 1:])
        out[osl] = block[lsl]
    return PathBatch(out, nodes, seed, "fbm")


def bm_increment_paths(grid, n, seed, lane=0, offset=0):
    """Standard Brownian motion by cumulative sums of independent increments."""
    nodes = grid.nodes if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    if nodes[0] < -1e-12:
        raise ValueError("bm grid must start at t >= 0")
    sd = np.sqrt(np.diff(np.concatenate([[0.0], nodes])))
    out = np.empty((n, nodes.size))
    for cid, lsl, osl in _chunk_indices(n, offset):
        z = stream(seed, "bm", cid, lane).standard_normal((CHUNK, nodes.size))
        out[osl] = np.cumsum(sd[None, :] * z, axis=1)[lsl]
    return PathBatch(out, nodes, seed, "bm")


def dual_norm_reduction(batches, weights=None):
    """Pointwise weighted norm sqrt(sum_i w_i^2 X_i(t)^2) of coordinate paths.

    For a field <v, X(t)> on (domain x unit sphere) this equals the
    exact supremum over the sphere at every t, so the sphere never
    appears in the Monte Carlo grid.
    """
    if not batches:
        raise ValueError("need at least one coordinate batch")
    shapes = {b.values.shape for b in batches}
    if len(shapes) != 1:
        raise ValueError("coordinate batches have mismatched shapes: %r" % (shapes,))
    seeds = {b.seed for b in batches}
    if len(seeds) != 1:
        raise ValueError("coordinate batches must share a master seed")
    if weights is None:
        weights = np.ones(len(batches))
    weights = np.asarray(weights, dtype=float)
    acc = np.zeros_like(batches[0].values)
    for w, b in zip(weights, batches):
        acc += (w * b.values) ** 2
    return PathBatch(np.sqrt(acc), batches[0].grid, batches[0].seed, "dualnorm")


# ---------------------------------------------------------------------------
# Streaming interface used by the Monte Carlo harness


def prepare_plan(plan, nodes):
    """Precompute the engine state (factorizations, spectra) for a plan."""
    nodes = np.asarray(nodes, dtype=float)
    state = {"nodes": nodes}
    if plan.engine == "circulant":
        state["embedding"] = _circulant_setup(plan.kernel, nodes)
    elif plan.engine == "chol":
        state["chol"] = _cholesky_with_jitter(_covariance_matrix(plan.cov, nodes))
    elif plan.engine == "bm":
        state["sd"] = np.sqrt(np.diff(np.concatenate([[0.0], nodes])))
    else:
        raise ValueError("unknown engine %r" % (plan.engine,))
    if plan.sigma is not None:
        state["profile"] = np.asarray(plan.sigma(nodes), dtype=float)
    return state


def _engine_chunk(plan, state, seed, chunk_id, lane):
    nodes = state["nodes"]
    if plan.engine == "circulant":
        m, amp, _ = state["embedding"]
        return _circulant_chunk(stream(seed, "circulant", chunk_id, lane), amp, m, nodes.size, CHUNK)
    if plan.engine == "bm":
        z = stream(seed, "bm", chunk_id, lane).standard_normal((CHUNK, nodes.size))
        return np.cumsum(state["sd"][None, :] * z, axis=1)
    z = stream(seed, "chol", chunk_id, lane).standard_normal((CHUNK, nodes.size))
    return z @ state["chol"].T


def sample_chunk(plan, nodes, seed, chunk_id, state=None):
    """One CHUNK of field paths on the time grid, per a SimulationPlan.

    Scalar plans return sigma(t) * Z(t) for the stationary or general
    covariance in the plan; coordinate plans return the weighted norm of
    independent coordinate processes.  Deterministic in (seed, chunk_id);
    pass the ``state`` from :func:`prepare_plan` to amortize setup work.
    """
    if state is None:
        state = prepare_plan(plan, nodes)
    prof = state.get("profile")
    if plan.kind == "scalar":
        rows = _engine_chunk(plan, state, seed, chunk_id, 0)
        if prof is not None:
            rows = rows * prof[None, :]
        return rows
    if plan.kind == "coordinates":
        weights = np.asarray(plan.weights if plan.weights else np.ones(plan.n_coords), dtype=float)
        acc = None
        for lane in range(plan.n_coords):
            rows = _engine_chunk(plan, state, seed, chunk_id, lane)
            if prof is not None:
                rows = rows * prof[None, :]
            term = (weights[lane] * rows) ** 2
            acc = term if acc is None else acc + term
        return np.sqrt(acc)
    raise ValueError("unknown plan kind %r" % (plan.kind,))


# ---------------------------------------------------------------------------
# Mesh rule for exceedance grids


def mesh_rule_slack(u, alphas, amplitudes, deltas):
    """Worst per-axis value of u^2 A_i delta_i^alpha_i (must stay <= 0.01)."""
    alphas = np.asarray(alphas, dtype=float)
    amps = np.asarray(amplitudes, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    return float(np.max(u * u * amps * deltas**alphas))


def mesh_rule_delta(u, alpha, amplitude, budget=0.01):
    """Largest step satisfying the discretization rule on one axis."""
    return float((budget / (u * u * amplitude)) ** (1.0 / alpha))


# ---------------------------------------------------------------------------
# Optional raw path dump (debugging aid)

_MAGIC = b"EXCPATH1"


def dump_paths(batch, path):
    """Write paths as a binary matrix: 32-byte header, float64 rows."""
    n, k = batch.values.shape
    header = _MAGIC + struct.pack("<QQQ", n, k, batch.seed & (2**64 - 1))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(batch.values, dtype="<f8").tobytes())


def load_paths(path):
    """Read a dump written by :func:`dump_paths`."""
    with open(path, "rb") as fh:
        header = fh.read(32)
        if header[:8] != _MAGIC:
            raise ValueError("not a path dump file")
        n, k, seed = struct.unpack("<QQQ", header[8:])
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(n, k)
    return PathBatch(data.copy(), None, seed, "dump")
