"""Compile a scale-invariant coupling into a finite delta-graph blueprint.

The ``n`` half-lines are cut loose and their endpoints joined pairwise by
short edges of length ``d / r_ij``; each endpoint gets a delta coupling of
strength ``v_i`` and edge ``i < j`` a magnetic phase ``chi_ij``.  Both come
from

    Q = [T; I] [-T^+, I] = [[-T T^+, T], [-T^+, I]],
    r_ij e^{i chi_ij} = Q_ij  (i < j),
    v = diag((2I - J) R) / d,   R = |Q| entrywise (diagonal included).

Phases are stored antisymmetric (``chi_ji = -chi_ij``).  Because
``Q_ji = -conj(Q_ij)`` on the cross block, the read-back
``r_ij e^{i chi_ij} = Q_ij`` holds for ``i < j`` only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import VertexCoupling
from .errors import InvalidInputError

RATIO_ZERO = 1e-12


def build_q(c: VertexCoupling) -> np.ndarray:
    t = c.t
    k = c.n - c.m
    return np.block([[-t @ t.conj().T, t], [-t.conj().T, np.eye(k)]])


@dataclass(frozen=True)
class RealizationBlueprint:
    n: int
    d: float
    ratios: np.ndarray
    phases: np.ndarray
    strengths: np.ndarray
    m: int | None = None

    def __post_init__(self):
        if not self.d > 0:
            raise InvalidInputError(f"length scale d must be positive, got {self.d}")
        for name in ("ratios", "phases", "strengths"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.ratios.shape != (self.n, self.n) or self.phases.shape != (self.n, self.n):
            raise InvalidInputError("ratios and phases must be n x n")
        if self.strengths.shape != (self.n,):
            raise InvalidInputError("strengths must have length n")
        if np.any(self.ratios < 0) or not np.allclose(self.ratios, self.ratios.T, atol=1e-14):
            raise InvalidInputError("ratios must be symmetric and non-negative")

    def edges(self) -> list[tuple[int, int, float, float]]:
        """Connected pairs ``(i, j, length, chi_ij)`` with ``i < j``, row-major."""
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                r = self.ratios[i, j]
                if r > RATIO_ZERO:
                    out.append((i, j, self.d / r, float(self.phases[i, j])))
        return out

    def with_scale(self, d: float) -> "RealizationBlueprint":
        """Same graph at another length scale; strengths scale like 1/d."""
        return RealizationBlueprint(
            n=self.n, d=d, ratios=self.ratios, phases=self.phases,
            strengths=self.strengths * (self.d / d), m=self.m,
        )

    def is_bipartite(self, m: int | None = None) -> bool:
        m = self.m if m is None else m
        if m is None:
            raise InvalidInputError("bipartition size m unknown")
        conn = self.ratios > RATIO_ZERO
        return not (np.any(conn[:m, :m] & ~np.eye(m, dtype=bool)) or np.any(conn[m:, m:] & ~np.eye(self.n - m, dtype=bool)))

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "d": float(self.d),
            "ratios": self.ratios.tolist(),
            "phases": self.phases.tolist(),
            "strengths": self.strengths.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RealizationBlueprint":
        try:
            return cls(
                n=int(data["n"]), d=float(data["d"]), ratios=data["ratios"],
                phases=data["phases"], strengths=data["strengths"], m=data.get("m"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed blueprint JSON: {exc}") from exc


def compile_coupling(c: VertexCoupling, d: float = 1.0) -> RealizationBlueprint:
    if not d > 0:
        raise InvalidInputError(f"length scale d must be positive, got {d}")
    q = build_q(c)
    r = np.abs(q)
    ratios = r.copy()
    np.fill_diagonal(ratios, 0.0)
    ratios[ratios <= RATIO_ZERO] = 0.0
    # |Q_ij| == |Q_ji| up to rounding; make the stored matrix exactly symmetric.
    ratios = np.triu(ratios, 1) + np.triu(ratios, 1).T
    upper = np.triu(np.where(ratios > 0, np.angle(q), 0.0), 1)
    phases = upper - upper.T
    n = c.n
    strengths = np.diag((2.0 * np.eye(n) - np.ones((n, n))) @ r) / d
    return RealizationBlueprint(n=n, d=d, ratios=ratios, phases=phases, strengths=strengths, m=c.m)


def bipartite_strengths(t: np.ndarray, d: float = 1.0) -> np.ndarray:
    """Strengths for a co-isometric ``T``: ``1 - (row or column sum of |T|)``."""
    a = np.abs(np.asarray(t))
    return np.concatenate([1.0 - a.sum(axis=1), 1.0 - a.sum(axis=0)]) / d


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def export_dot(b: RealizationBlueprint) -> str:
    lines = ["graph blueprint {", "  node [shape=circle];"]
    if b.m is not None:
        for name, idx in (("left", range(b.m)), ("right", range(b.m, b.n))):
            members = " ".join(f"v{i + 1};" for i in idx)
            lines.append(f"  subgraph cluster_{name} {{ rank=same; {members} }}")
    for i in range(b.n):
        lines.append(f'  v{i + 1} [label="{i + 1}\\nv={_fmt(b.strengths[i])}"];')
    for i, j, length, chi in b.edges():
        lines.append(f'  v{i + 1} -- v{j + 1} [label="l={_fmt(length)}, chi={_fmt(chi)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
