"""Numerical evidence for the maximal number of zeros.

Zero patterns are symmetric boolean support masks, taken one per class
under simultaneous row/column permutation and restricted to connected
off-diagonal support.  Feasibility of a pattern is probed by multi-start
Levenberg-Marquardt on a Hermitian parametrization of the support:

* real diagonal entries where the diagonal is in the support,
* off-diagonal entries ``(floor + rho^2) e^{i phi}``.

The modulus floor keeps every off-diagonal support entry structurally
nonzero; without it the optimizer happily converges to disconnected
matrices that fit inside the pattern with extra zeros.

A local search cannot prove infeasibility, so each pattern is labelled
``feasible`` (residual <= 1e-10), ``infeasible`` (every restart >= 1e-4)
or ``undecided``.  Independently, two rows whose supports meet in exactly
one column can never be orthogonal; such patterns are flagged as
combinatorially infeasible, which is a proof rather than evidence.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import os
import zlib

import networkx as nx
import numpy as np

from .errors import BudgetError, InvalidInputError

FEAS_TOL = 1e-10
INFEAS_TOL = 1e-4
MODULUS_FLOOR = 0.2
MAX_N = 7


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def canonical_key(mask: np.ndarray) -> int:
    """Lexicographically smallest row-major bit string over all n! relabellings.

    Returned as an integer whose leading bit is entry (0, 0), so integer order
    and lexicographic order agree.
    """
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    if n > MAX_N:
        raise BudgetError(f"canonicalization limited to n <= {MAX_N}")
    perms = _permutations(n)
    permuted = mask[perms[:, :, None], perms[:, None, :]].reshape(len(perms), n * n)
    weights = np.left_shift(np.int64(1), np.arange(n * n - 1, -1, -1, dtype=np.int64))
    return int((permuted.astype(np.int64) * weights).sum(axis=1).min())


def mask_from_key(key: int, n: int) -> np.ndarray:
    bits = [(key >> (n * n - 1 - i)) & 1 for i in range(n * n)]
    return np.array(bits, dtype=bool).reshape(n, n)


def off_diagonal_connected(mask: np.ndarray) -> bool:
    n = mask.shape[0]
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j])
    return nx.is_connected(g)


def combinatorially_orthogonal(mask: np.ndarray) -> bool:
    """No two distinct rows share exactly one support column."""
    m = np.asarray(mask, dtype=np.int64)
    overlap = m @ m.T
    np.fill_diagonal(overlap, 0)
    return not np.any(overlap == 1)


@dataclass(frozen=True)
class SupportPattern:
    n: int
    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.shape != (self.n, self.n):
            raise InvalidInputError(f"mask must be {self.n}x{self.n}")
        if not np.array_equal(mask, mask.T):
            raise InvalidInputError("support mask must be symmetric")
        if not off_diagonal_connected(mask):
            raise InvalidInputError("off-diagonal support is not connected")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def zeros(self) -> int:
        return int(self.n * self.n - self.mask.sum())

    @property
    def key(self) -> int:
        return canonical_key(self.mask)

    @classmethod
    def from_matrix(cls, s, tol_zero: float = 1e-9) -> "SupportPattern":
        a = np.asarray(getattr(s, "entries", s))
        return cls(n=a.shape[0], mask=np.abs(a) > tol_zero)

    def to_dict(self) -> dict:
        return {"n": self.n, "zeros": self.zeros, "mask": self.mask.astype(int).tolist()}


def _connected_graphs(n: int, n_edges: int):
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() == n and g.number_of_edges() == n_edges and nx.is_connected(g):
            yield g


def enumerate_patterns(n: int, zeros: int, max_patterns: int | None = None) -> list[SupportPattern]:
    """One connected pattern per permutation class with ``zeros`` zero entries.

    Ordered by canonical key.  Raises :class:`BudgetError` (with the partial
    list attached) once more than ``max_patterns`` classes are found.
    """
    if n < 2 or n > MAX_N:
        raise BudgetError(f"pattern enumeration supports 2 <= n <= {MAX_N}, got n={n}")
    pairs = n * (n - 1) // 2
    found: dict[int, np.ndarray] = {}
    for diag_zeros in range(zeros % 2, min(n, zeros) + 1, 2):
        off_zero_pairs = (zeros - diag_zeros) // 2
        n_edges = pairs - off_zero_pairs
        if n_edges < n - 1 or off_zero_pairs < 0:
            continue
        for g in _connected_graphs(n, n_edges):
            adj = nx.to_numpy_array(g, nodelist=range(n), dtype=int).astype(bool)
            for diag in itertools.combinations(range(n), diag_zeros):
                mask = adj.copy()
                np.fill_diagonal(mask, True)
                mask[list(diag), list(diag)] = False
                key = canonical_key(mask)
                if key not in found:
                    found[key] = mask_from_key(key, n)
                    if max_patterns is not None and len(found) > max_patterns:
                        partial = [SupportPattern(n, found[k]) for k in sorted(found)]
                        raise BudgetError(
                            f"more than {max_patterns} patterns for n={n}, zeros={zeros}",
                            partial=partial,
                        )
    return [SupportPattern(n, found[k]) for k in sorted(found)]


class _Residual:
    """Residual and analytic Jacobian of ``S S^+ - I`` for a batch of points.

    The residual vector holds the real and imaginary parts of the upper
    triangle, weighted so that its squared norm is the Frobenius norm.
    """

    def __init__(self, mask: np.ndarray, floor: float):
        n = mask.shape[0]
        self.n = n
        self.floor = floor
        self.diag = np.flatnonzero(np.diag(mask))
        iu = np.triu_indices(n, 1)
        sel = mask[iu]
        self.oi, self.oj = iu[0][sel], iu[1][sel]
        self.ui, self.uj = np.triu_indices(n)
        self.off = self.ui != self.uj
        self.weight = np.where(self.off, np.sqrt(2.0), 1.0)
        self.size = self.diag.size + 2 * self.oi.size

    def build(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        n, nd = self.n, self.diag.size
        s = np.zeros((x.shape[0], n, n), dtype=complex)
        s[:, self.diag, self.diag] = x[:, :nd]
        rho, phi = x[:, nd::2], x[:, nd + 1 :: 2]
        v = (self.floor + rho**2) * np.exp(1j * phi)
        s[:, self.oi, self.oj] = v
        s[:, self.oj, self.oi] = v.conj()
        return s

    def _split(self, r: np.ndarray) -> np.ndarray:
        upper = r[..., self.ui, self.uj] * self.weight
        im = upper[..., self.off].imag
        return np.concatenate([upper.real, im], axis=-1)

    def residual(self, s: np.ndarray) -> np.ndarray:
        return self._split(s @ s - np.eye(self.n))

    def jacobian(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Shape ``(batch, residuals, params)``.

        A parameter moves ``S`` by a Hermitian ``E`` supported on rows and
        columns ``i, j``; with ``S`` Hermitian, ``d(S S) = M + M^+`` where
        ``M = E S`` only has rows ``i`` and ``j`` filled.
        """
        b = x.shape[0]
        n, nd = self.n, self.diag.size
        m = np.zeros((b, self.size, n, n), dtype=complex)
        m[:, np.arange(nd), self.diag, :] = s[:, self.diag, :]
        rho, phi = x[:, nd::2], x[:, nd + 1 :: 2]
        phase = np.exp(1j * phi)
        k = np.arange(self.oi.size)
        for offset, dv in ((0, 2.0 * rho * phase), (1, 1j * (self.floor + rho**2) * phase)):
            idx = nd + 2 * k + offset
            m[:, idx, self.oi, :] = dv[..., None] * s[:, self.oj, :]
            m[:, idx, self.oj, :] = dv.conj()[..., None] * s[:, self.oi, :]
        return np.swapaxes(self._split(m + np.conj(np.swapaxes(m, 2, 3))), 1, 2)


def _batched_lm(model: _Residual, x: np.ndarray, max_iter: int = 400, window: int = 20, gain: float = 1e-3):
    """Levenberg-Marquardt run independently on every row of ``x``.

    scipy's ``least_squares`` handles one start at a time; vectorizing across
    restarts is what keeps the default 200-restart budget affordable.
    A restart stops once its cost has improved by less than the relative
    ``gain`` over the last ``window`` iterations (a plateau), or on
    convergence.  Returns final costs (sum of squared residuals) and
    parameters.
    """
    x = np.array(x, dtype=float)
    b, p = x.shape
    s = model.build(x)
    r = model.residual(s)
    cost = np.sum(r**2, axis=1)
    lam = np.full(b, 1e-3)
    history = np.full((window, b), np.inf)
    active = np.ones(b, dtype=bool)
    eye = np.eye(p)
    for it in range(max_iter):
        a = np.flatnonzero(active)
        if a.size == 0:
            break
        jac = model.jacobian(x[a], s[a])
        jt = np.swapaxes(jac, 1, 2)
        grad = (jt @ r[a][..., None])[..., 0]
        hess = jt @ jac
        diag = np.diagonal(hess, axis1=1, axis2=2) + 1e-9 * (1.0 + np.max(np.diagonal(hess, axis1=1, axis2=2), axis=1, keepdims=True))
        step = -np.linalg.solve(hess + lam[a, None, None] * diag[:, :, None] * eye, grad[..., None])[..., 0]
        xn = x[a] + step
        sn = model.build(xn)
        rn = model.residual(sn)
        cn = np.sum(rn**2, axis=1)
        ok = cn < cost[a]
        acc = a[ok]
        x[acc], s[acc], r[acc], cost[acc] = xn[ok], sn[ok], rn[ok], cn[ok]
        lam[a] = np.where(ok, np.maximum(lam[a] / 3.0, 1e-10), lam[a] * 2.0)
        slot = it % window
        plateau = cost[a] > (1.0 - gain) * history[slot, a]
        history[slot, a] = cost[a]
        small_step = np.linalg.norm(step, axis=1) < 1e-14 * (1.0 + np.linalg.norm(xn, axis=1))
        done = (cost[a] < 1e-30) | (lam[a] > 1e14) | small_step | plateau
        active[a[done]] = False
    return cost, x


def pattern_residual(s, mask) -> float:
    """``||S S^+ - I||_F^2 + ||S - S^+||_F^2`` of ``s`` restricted to ``mask``."""
    a = np.where(mask, np.asarray(getattr(s, "entries", s)), 0.0)
    n = a.shape[0]
    return float(np.sum(np.abs(a @ a.conj().T - np.eye(n)) ** 2) + np.sum(np.abs(a - a.conj().T) ** 2))


@dataclass
class FeasibilityResult:
    pattern: SupportPattern
    residual: float
    witness: np.ndarray
    restarts: int
    all_residuals: np.ndarray = field(repr=False, default=None)
    combinatorial: bool = True

    @property
    def status(self) -> str:
        if self.residual <= FEAS_TOL:
            return "feasible"
        if np.min(self.all_residuals) >= INFEAS_TOL:
            return "infeasible"
        return "undecided"

    @property
    def feasible(self) -> bool:
        return self.residual <= FEAS_TOL

    def to_dict(self, with_witness: bool = True) -> dict:
        out = {
            "pattern": self.pattern.to_dict(),
            "residual": float(self.residual),
            "status": self.status,
            "restarts": int(self.restarts),
            "combinatorially_orthogonal": bool(self.combinatorial),
        }
        if with_witness:
            out["witness"] = {"re": self.witness.real.tolist(), "im": self.witness.imag.tolist()}
        return out


def _pattern_seed(seed: int, pattern: SupportPattern) -> int:
    return zlib.crc32(f"{seed}:{pattern.n}:{pattern.key}".encode())


def test_feasibility(
    p: SupportPattern,
    restarts: int = 200,
    seed: int = 0,
    floor: float = MODULUS_FLOOR,
) -> FeasibilityResult:
    """Multi-start local minimization of the unitarity residual on ``p``.

    All restarts run (batched), so ``all_residuals`` always has ``restarts``
    entries; the seed is mixed with the pattern's canonical key, making the
    outcome independent of enumeration order.
    """
    model = _Residual(p.mask, floor)
    rng = np.random.default_rng(_pattern_seed(seed, p))
    cost, x = _batched_lm(model, rng.normal(size=(restarts, model.size)))
    best = int(np.argmin(cost))
    return FeasibilityResult(
        pattern=p, residual=float(cost[best]), witness=model.build(x[best])[0],
        restarts=restarts, all_residuals=cost, combinatorial=combinatorially_orthogonal(p.mask),
    )


test_feasibility.__test__ = False  # keep pytest from collecting it on import


def _feasibility_job(args):
    p, restarts, seed, floor = args
    return test_feasibility(p, restarts=restarts, seed=seed, floor=floor)


def run_patterns(patterns, restarts=200, seed=0, floor=MODULUS_FLOOR, workers=None) -> list[FeasibilityResult]:
    jobs = [(p, restarts, seed, floor) for p in patterns]
    workers = workers or int(os.environ.get("QGVERTEX_THREADS", "1"))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_feasibility_job, jobs, chunksize=4))
    return [_feasibility_job(j) for j in jobs]


@dataclass
class ZeroCountReport:
    zeros: int
    patterns: int
    pruned: int
    feasible: int
    infeasible: int
    undecided: int
    best: FeasibilityResult | None

    def to_dict(self) -> dict:
        return {
            "zeros": self.zeros,
            "patterns": self.patterns,
            "combinatorially_pruned": self.pruned,
            "feasible": self.feasible,
            "infeasible": self.infeasible,
            "undecided": self.undecided,
            "best": self.best.to_dict() if self.best is not None else None,
        }


def search_zero_count(n, zeros, restarts=200, seed=0, floor=MODULUS_FLOOR,
                      prune=True, workers=None, max_patterns=None) -> ZeroCountReport:
    patterns = enumerate_patterns(n, zeros, max_patterns=max_patterns)
    if prune:
        candidates = [p for p in patterns if combinatorially_orthogonal(p.mask)]
    else:
        candidates = patterns
    results = run_patterns(candidates, restarts=restarts, seed=seed, floor=floor, workers=workers)
    statuses = [r.status for r in results]
    best = min(results, key=lambda r: r.residual) if results else None
    return ZeroCountReport(
        zeros=zeros,
        patterns=len(patterns),
        pruned=len(patterns) - len(candidates),
        feasible=statuses.count("feasible"),
        infeasible=statuses.count("infeasible") + (len(patterns) - len(candidates)),
        undecided=statuses.count("undecided"),
        best=best,
    )


@dataclass
class MaxZerosResult:
    n: int
    max_zeros: int
    witness: np.ndarray
    reports: list

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "max_zeros": self.max_zeros,
            "witness": {"re": self.witness.real.tolist(), "im": self.witness.imag.tolist()},
            "per_zero_count": [r.to_dict() for r in self.reports],
        }


def max_zeros(n: int, restarts: int = 200, seed: int = 0, floor: float = MODULUS_FLOOR,
              prune: bool = True, workers=None) -> MaxZerosResult:
    """Largest zero count admitting a connected feasible pattern.

    Scans downward from ``n^2 - 2(n-1)`` (a connected off-diagonal support
    needs at least ``n-1`` edges) and stops at the first feasible count.
    """
    if not 2 <= n <= MAX_N:
        raise BudgetError(f"max_zeros supports 2 <= n <= {MAX_N}")
    reports = []
    for zeros in range(n * n - 2 * (n - 1), -1, -1):
        rep = search_zero_count(n, zeros, restarts=restarts, seed=seed, floor=floor,
                                prune=prune, workers=workers)
        reports.append(rep)
        if rep.feasible:
            return MaxZerosResult(n=n, max_zeros=zeros, witness=rep.best.witness, reports=reports)
    raise AssertionError("a zero-free unitary always exists")
