"""Direct scattering on finite metric graphs with delta vertices and leads.

On an internal edge ``a -> b`` of length ``l`` carrying phase ``chi`` the
vector potential is ``A = chi / l`` and the covariant derivative
``(d/dx - iA)``; the wavefunction is

    psi(x) = e^{iAx} (alpha e^{ikx} + beta e^{-ikx}),   0 <= x <= l,

so it accumulates ``e^{i chi}`` from ``a`` to ``b``.  A lead at vertex ``v``
carries ``a_in e^{-ikx} + b_out e^{ikx}``.  At every vertex the values of all
incident ends agree (unknown ``phi_v``) and the outgoing covariant
derivatives sum to ``v_v phi_v``.  Unknowns: ``alpha, beta`` per edge,
``phi`` per vertex, ``b_out`` per lead; all incoming amplitudes are solved
for at once as right-hand sides.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from .couplings import VertexCoupling, build_s_from_t
from .errors import InvalidInputError, ResonanceError
from .realization import RealizationBlueprint, compile_coupling

COND_LIMIT = 1e12


@dataclass(frozen=True)
class MetricGraph:
    strengths: tuple
    edges: tuple  # (i, j, length, chi)
    leads: tuple  # vertex index of lead 1, lead 2, ...

    def __post_init__(self):
        nv = len(self.strengths)
        object.__setattr__(self, "strengths", tuple(float(v) for v in self.strengths))
        object.__setattr__(self, "edges", tuple((int(i), int(j), float(l), float(c)) for i, j, l, c in self.edges))
        object.__setattr__(self, "leads", tuple(int(v) for v in self.leads))
        for i, j, length, _ in self.edges:
            if not (0 <= i < nv and 0 <= j < nv):
                raise InvalidInputError(f"edge ({i}, {j}) references a missing vertex")
            if i == j:
                raise InvalidInputError("loops are not supported")
            if not length > 0 or not np.isfinite(length):
                raise InvalidInputError(f"edge ({i}, {j}) has invalid length {length}")
        for v in self.leads:
            if not 0 <= v < nv:
                raise InvalidInputError(f"lead attached to missing vertex {v}")
        if not self.leads:
            raise InvalidInputError("graph needs at least one lead")

    @classmethod
    def from_blueprint(cls, b: RealizationBlueprint) -> "MetricGraph":
        # Vertex i hops to j with factor e^{i chi_ij}; with the covariant
        # convention above that is an edge j -> i carrying chi_ij.
        edges = [(j, i, length, chi) for i, j, length, chi in b.edges()]
        return cls(strengths=tuple(b.strengths), edges=tuple(edges), leads=tuple(range(b.n)))

    def to_dict(self) -> dict:
        return {
            "strengths": list(self.strengths),
            "edges": [list(e) for e in self.edges],
            "leads": list(self.leads),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricGraph":
        try:
            return cls(strengths=data["strengths"], edges=[tuple(e) for e in data["edges"]], leads=data["leads"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed metric graph JSON: {exc}") from exc


def _assemble(g: MetricGraph, k: float):
    nv, ne, nl = len(g.strengths), len(g.edges), len(g.leads)
    n_unknown = 2 * ne + nv + nl
    phi = lambda v: 2 * ne + v  # noqa: E731
    out = lambda q: 2 * ne + nv + q  # noqa: E731

    rows = []
    rhs = []
    # per vertex: list of (coefficient dict for value, coefficient dict for outgoing derivative, rhs value/derivative)
    derivative = [dict() for _ in range(nv)]
    deriv_rhs = [np.zeros(nl, dtype=complex) for _ in range(nv)]

    def add_row(coeffs, b):
        row = np.zeros(n_unknown, dtype=complex)
        for idx, val in coeffs.items():
            row[idx] += val
        rows.append(row)
        rhs.append(b)

    zero = np.zeros(nl, dtype=complex)
    for e, (a, b, length, chi) in enumerate(g.edges):
        ia, ib = 2 * e, 2 * e + 1
        ep, em, ph = np.exp(1j * k * length), np.exp(-1j * k * length), np.exp(1j * chi)
        add_row({ia: 1.0, ib: 1.0, phi(a): -1.0}, zero)
        add_row({ia: ph * ep, ib: ph * em, phi(b): -1.0}, zero)
        for idx, val in ((ia, 1j * k), (ib, -1j * k)):
            derivative[a][idx] = derivative[a].get(idx, 0) + val
        for idx, val in ((ia, -1j * k * ph * ep), (ib, 1j * k * ph * em)):
            derivative[b][idx] = derivative[b].get(idx, 0) + val
    for q, v in enumerate(g.leads):
        # value a_in + b_out = phi_v ; outgoing derivative ik(b_out - a_in)
        unit = np.zeros(nl, dtype=complex)
        unit[q] = -1.0
        add_row({out(q): 1.0, phi(v): -1.0}, unit)
        derivative[v][out(q)] = derivative[v].get(out(q), 0) + 1j * k
        deriv_rhs[v][q] += 1j * k
    for v in range(nv):
        coeffs = dict(derivative[v])
        coeffs[phi(v)] = coeffs.get(phi(v), 0) - g.strengths[v]
        add_row(coeffs, deriv_rhs[v])
    return np.array(rows), np.array(rhs), out(0)


def scatter(g: MetricGraph, k: float) -> np.ndarray:
    """Lead-to-lead scattering matrix ``S(k)``; column ``q`` is incidence on lead ``q``."""
    if not k > 0:
        raise InvalidInputError(f"wavenumber must be positive, got k={k}")
    a, rhs, first_out = _assemble(g, k)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ResonanceError(f"scattering system singular at k={k} (cond={cond:.3g})", k=k)
    x = np.linalg.solve(a, rhs)
    return x[first_out : first_out + len(g.leads), :]


def scatter_retry(g: MetricGraph, k: float, attempts: int = 3) -> tuple[np.ndarray, float]:
    """:func:`scatter`, nudging ``k`` by a relative 1e-6 on resonance."""
    for i in range(attempts):
        kk = k * (1.0 + 1e-6) ** i
        try:
            return scatter(g, kk), kk
        except ResonanceError:
            if i == attempts - 1:
                raise
    raise AssertionError("unreachable")


@dataclass
class ConvergenceStudy:
    k: float
    d_values: np.ndarray
    errors: np.ndarray
    unitarity: np.ndarray
    k_used: np.ndarray = field(default=None)

    def tail_decreasing(self, points: int = 3) -> bool:
        """Strict decrease over the last ``points`` refinements."""
        tail = self.errors[-(points + 1):]
        return bool(np.all(np.diff(tail) < 0))

    def rows(self) -> list[list[str]]:
        return [
            [repr(float(d)), repr(float(e)), repr(float(u)), repr(float(kk))]
            for d, e, u, kk in zip(self.d_values, self.errors, self.unitarity, self.k_used)
        ]


def _one_d(args):
    b, d, k, target = args
    try:
        s, kk = scatter_retry(MetricGraph.from_blueprint(b.with_scale(d)), k)
    except ResonanceError as exc:
        raise ResonanceError(f"{exc} at d={d}", k=k, d=d) from exc
    err = float(np.max(np.abs(s - target)))
    uni = float(np.max(np.abs(s @ s.conj().T - np.eye(s.shape[0]))))
    return err, uni, kk


def convergence_study(c: VertexCoupling, k: float, d_values, workers: int | None = None) -> ConvergenceStudy:
    d_values = np.asarray(d_values, dtype=float)
    if d_values.size == 0 or np.any(np.diff(d_values) >= 0):
        raise InvalidInputError("d_values must be strictly decreasing")
    target = build_s_from_t(c).entries
    b = compile_coupling(c, d=1.0)
    jobs = [(b, d, k, target) for d in d_values]
    workers = workers or int(os.environ.get("QGVERTEX_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_d, jobs))
    else:
        results = [_one_d(j) for j in jobs]
    errs, unis, ks = (np.array(x) for x in zip(*results))
    return ConvergenceStudy(k=k, d_values=d_values, errors=errs, unitarity=unis, k_used=ks)


def halving_schedule(dmax: float, halvings: int) -> np.ndarray:
    return dmax * 0.5 ** np.arange(halvings + 1)
