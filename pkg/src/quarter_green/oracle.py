"""Analysis-free reference values: truncated lattice solves and Monte Carlo.

The walk is killed on reaching ``i = 0`` or ``j = 0`` and, in the truncated
problem, on leaving the box ``[1, N]^2``.  Expected visit counts from a fixed
start solve the row-vector system ``g (I - P_N) = e_start``.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .curve import q_eval
from .exceptions import NonConvergenceError
from .green_integral import GreenEstimate
from .walk_model import JumpKernel

CACHE_ENV = "QUARTER_GREEN_CACHE"


@dataclass(frozen=True)
class TruncationConfig:
    """Box side ``N``, solver residual tolerance and whether to compare against ``2N``."""

    N: int = 300
    solver_tol: float = 1e-12
    extrapolate: bool = False
    max_refinements: int = 5

    def __post_init__(self):
        if self.N < 16:
            raise ValueError("N must be at least 16")


@dataclass(frozen=True)
class SimulationConfig:
    paths: int = 10_000
    step_cap: int = 1_000_000
    seed: int = 0


@dataclass
class GreenGrid:
    """Expected visit counts ``values[i-1, j-1]`` over the box, from one start."""

    start: tuple
    values: np.ndarray
    abs_error: np.ndarray | None
    N: int
    meta: dict = field(default_factory=dict)

    def __getitem__(self, target) -> float:
        i, j = target
        return float(self.values[i - 1, j - 1])

    def estimate(self, i: int, j: int) -> GreenEstimate:
        err = 0.0 if self.abs_error is None else float(self.abs_error[i - 1, j - 1])
        return GreenEstimate(self[i, j], err, "oracle-truncation", {"N": self.N, **self.meta})


@dataclass
class AbsorptionResult:
    """Absorption probabilities on the horizontal axis, the vertical axis and at the corner."""

    horizontal: np.ndarray
    vertical: np.ndarray
    corner: float

    @property
    def total(self) -> float:
        return float(self.horizontal.sum() + self.vertical.sum() + self.corner)


def transition_matrix(k: JumpKernel, N: int) -> sparse.csr_matrix:
    """Substochastic transition matrix of the walk on ``[1, N]^2`` (state ``(i-1) N + (j-1)``)."""
    I, J = np.meshgrid(np.arange(1, N + 1), np.arange(1, N + 1), indexing="ij")
    rows, cols, vals = [], [], []
    for (di, dj), p in k.items():
        if p == 0:
            continue
        ii, jj = I + di, J + dj
        keep = (ii >= 1) & (ii <= N) & (jj >= 1) & (jj <= N)
        rows.append(((I - 1) * N + (J - 1))[keep])
        cols.append(((ii - 1) * N + (jj - 1))[keep])
        vals.append(np.full(keep.sum(), p))
    n = N * N
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def nested_dissection_order(N: int, leaf: int = 16) -> np.ndarray:
    """Elimination order of the ``N x N`` grid: both halves first, then the separating line."""
    parts = []

    def split(i0, i1, j0, j1):
        h, w = i1 - i0, j1 - j0
        if h <= 0 or w <= 0:
            return
        if h * w <= leaf * leaf:
            I, J = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="ij")
            parts.append((I * N + J).ravel())
        elif h >= w:
            m = (i0 + i1) // 2
            split(i0, m, j0, j1)
            split(m + 1, i1, j0, j1)
            parts.append(m * N + np.arange(j0, j1))
        else:
            m = (j0 + j1) // 2
            split(i0, i1, j0, m)
            split(i0, i1, m + 1, j1)
            parts.append(np.arange(i0, i1) * N + m)

    split(0, N, 0, N)
    return np.concatenate(parts)


class _Solver:
    """One sparse LU factorization of ``(I - P_N)^T``, reused across starts.

    The matrix is column diagonally dominant, so elimination runs without
    pivoting in a nested-dissection order, which keeps the fill near
    ``N^2 log N``.
    """

    def __init__(self, k: JumpKernel, N: int, cfg: TruncationConfig):
        self.N = N
        self.cfg = cfg
        self.A = (sparse.identity(N * N, format="csr") - transition_matrix(k, N)).T.tocsc()
        self.perm = nested_dissection_order(N)
        permuted = self.A[self.perm][:, self.perm].tocsc()
        self.lu = splu(permuted, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhs)
        out[self.perm] = self.lu.solve(rhs[self.perm])
        return out

    def solve(self, i0: int, j0: int) -> tuple[np.ndarray, list]:
        e = np.zeros(self.N * self.N)
        e[(i0 - 1) * self.N + (j0 - 1)] = 1.0
        g = self._solve(e)
        history = []
        # iterative refinement until the residual meets the tolerance
        for _ in range(self.cfg.max_refinements):
            r = e - self.A @ g
            history.append(float(np.abs(r).max()))
            if history[-1] <= self.cfg.solver_tol:
                break
            g += self._solve(r)
        else:
            raise NonConvergenceError(f"residual {history[-1]:.2e} above {self.cfg.solver_tol:.0e}")
        return g.reshape(self.N, self.N), history


def _cache_path(k: JumpKernel, i0: int, j0: int, N: int) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = hashlib.sha256(f"{k.digest()}:{i0}:{j0}:{N}".encode()).hexdigest()[:24]
    return Path(root) / f"{key}.npy"


def _grids_at(k: JumpKernel, starts, N: int, cfg: TruncationConfig) -> dict:
    out, missing = {}, []
    for s in starts:
        path = _cache_path(k, *s, N)
        if path is not None and path.exists():
            out[s] = np.load(path)
        else:
            missing.append(s)
    if missing:
        solver = _Solver(k, N, cfg)
        for s in missing:
            out[s], _ = solver.solve(*s)
            path = _cache_path(k, *s, N)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                np.save(path, out[s])
    return out


def green_truncated_many(k: JumpKernel, starts, cfg: TruncationConfig | None = None) -> dict:
    """``green_truncated`` for several starts, sharing the factorizations."""
    cfg = TruncationConfig() if cfg is None else cfg
    starts = [tuple(s) for s in starts]
    for i0, j0 in starts:
        if not (1 <= i0 <= cfg.N and 1 <= j0 <= cfg.N):
            raise ValueError(f"start ({i0}, {j0}) outside the box [1, {cfg.N}]^2")
    base = _grids_at(k, starts, cfg.N, cfg)
    if not cfg.extrapolate:
        return {s: GreenGrid(s, base[s], None, cfg.N) for s in starts}
    fine = _grids_at(k, starts, 2 * cfg.N, cfg)
    out = {}
    for s in starts:
        g_fine = fine[s][: cfg.N, : cfg.N]
        monotone = bool(np.all(g_fine >= base[s] - 1e-12))
        out[s] = GreenGrid(s, g_fine, np.abs(g_fine - base[s]), cfg.N,
                           {"refined_N": 2 * cfg.N, "monotone": monotone})
    return out


def green_truncated(k: JumpKernel, i0: int, j0: int, cfg: TruncationConfig | None = None) -> GreenGrid:
    """Expected visit counts over ``[1, N]^2`` of the walk killed outside the box.

    With ``cfg.extrapolate`` the values come from the ``2N`` box and
    ``abs_error`` is the change from ``N`` to ``2N``.
    """
    return green_truncated_many(k, [(i0, j0)], cfg)[(i0, j0)]


def absorption_from_grid(k: JumpKernel, grid: GreenGrid) -> AbsorptionResult:
    """Probabilities of being killed at ``(i, 0)``, ``(0, j)`` and ``(0, 0)``."""
    g = grid.values
    first_row = np.concatenate([[0.0], g[:, 0], [0.0]])   # G(i, 1), i = 0..N+1
    first_col = np.concatenate([[0.0], g[0, :], [0.0]])   # G(1, j), j = 0..N+1
    horizontal = k[1, -1] * first_row[:-2] + k[0, -1] * first_row[1:-1] + k[-1, -1] * first_row[2:]
    vertical = k[-1, 1] * first_col[:-2] + k[-1, 0] * first_col[1:-1] + k[-1, -1] * first_col[2:]
    return AbsorptionResult(horizontal, vertical, k[-1, -1] * g[0, 0])


def absorption_truncated(k: JumpKernel, i0: int, j0: int, cfg: TruncationConfig | None = None) -> AbsorptionResult:
    return absorption_from_grid(k, green_truncated(k, i0, j0, cfg))


def functional_equation_residual(k: JumpKernel, i0: int, j0: int, x: complex, y: complex,
                                 cfg: TruncationConfig | None = None, grid: GreenGrid | None = None) -> complex:
    """``Q G(x, y) - [h(x) + h~(y) + h_00 - x^i0 y^j0]`` from truncated coefficients."""
    if abs(x) >= 1 or abs(y) >= 1:
        raise ValueError("generating functions are evaluated inside the unit polydisc")
    grid = green_truncated(k, i0, j0, cfg) if grid is None else grid
    ab = absorption_from_grid(k, grid)
    n = grid.values.shape[0]
    xs = x ** np.arange(n)
    ys = y ** np.arange(n)
    G = xs @ grid.values @ ys
    h = x * (xs @ ab.horizontal)
    ht = y * (ys @ ab.vertical)
    return complex(q_eval(k, x, y) * G - (h + ht + ab.corner - x**i0 * y**j0))


@dataclass
class SimulationResult:
    targets: list
    visits: np.ndarray
    visits_se: np.ndarray
    horizontal_hits: dict
    vertical_hits: dict
    corner_hits: int
    truncated_paths: int
    paths: int

    def absorption_horizontal(self, i: int) -> tuple[float, float]:
        """Frequency of absorption at ``(i, 0)`` and its standard error."""
        p = self.horizontal_hits.get(i, 0) / self.paths
        return p, float(np.sqrt(p * (1 - p) / self.paths))


def simulate(k: JumpKernel, i0: int, j0: int, cfg: SimulationConfig | None = None, targets=()) -> SimulationResult:
    """Monte Carlo visit counts at ``targets`` and absorption sites.

    Paths still alive after ``step_cap`` steps are dropped from the visit
    counts' future and reported as ``truncated_paths`` (a downward bias).
    """
    cfg = SimulationConfig() if cfg is None else cfg
    rng = np.random.default_rng(cfg.seed)
    steps = np.array([s for s, _ in k.items()])
    cum = np.cumsum([p for _, p in k.items()])
    cum /= cum[-1]
    targets = [tuple(t) for t in targets]
    width = 1 << 32
    codes = np.array([i * width + j for i, j in targets], dtype=np.int64)
    order = np.argsort(codes)
    sorted_codes = codes[order]

    pos_i = np.full(cfg.paths, i0, dtype=np.int64)
    pos_j = np.full(cfg.paths, j0, dtype=np.int64)
    ids = np.arange(cfg.paths)
    visits = np.zeros((cfg.paths, len(targets)))

    def record(pi, pj, who):
        if not len(targets):
            return
        c = pi * width + pj
        loc = np.searchsorted(sorted_codes, c)
        loc = np.minimum(loc, len(sorted_codes) - 1)
        hit = sorted_codes[loc] == c
        np.add.at(visits, (who[hit], order[loc[hit]]), 1)

    record(pos_i, pos_j, ids)
    h_hits, v_hits, corner = {}, {}, 0
    for _ in range(cfg.step_cap):
        if not len(ids):
            break
        choice = np.searchsorted(cum, rng.random(len(ids)), side="right")
        choice = np.minimum(choice, len(cum) - 1)
        pos_i = pos_i + steps[choice, 0]
        pos_j = pos_j + steps[choice, 1]
        dead = (pos_i == 0) | (pos_j == 0)
        for a, b in zip(pos_i[dead], pos_j[dead]):
            if a == 0 and b == 0:
                corner += 1
            elif b == 0:
                h_hits[int(a)] = h_hits.get(int(a), 0) + 1
            else:
                v_hits[int(b)] = v_hits.get(int(b), 0) + 1
        alive = ~dead
        pos_i, pos_j, ids = pos_i[alive], pos_j[alive], ids[alive]
        record(pos_i, pos_j, ids)
    mean = visits.mean(axis=0)
    se = visits.std(axis=0, ddof=1) / np.sqrt(cfg.paths) if cfg.paths > 1 else np.zeros_like(mean)
    return SimulationResult(targets, mean, se, h_hits, v_hits, corner, len(ids), cfg.paths)
