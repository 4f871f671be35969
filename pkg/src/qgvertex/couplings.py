"""Scale-invariant vertex couplings and their scattering matrices.

A coupling of degree ``n`` is fixed by an integer ``m`` and an ``m x (n-m)``
complex matrix ``T``; the boundary conditions read

    [I  T] Psi' = 0,      -T^dagger Psi_1 + Psi_2 = 0,

and the energy-independent scattering matrix is

    S = -I + 2 [I; T^dagger] (I + T T^dagger)^{-1} [I  T].

Every Hermitian unitary matrix arises this way (after a renumbering of the
edges), which is what :func:`recover_t_from_s` implements.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalError

TOL_HERMITIAN = 1e-10
TOL_UNITARY = 1e-10
TOL_ZERO = 1e-9
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class VertexCoupling:
    n: int
    m: int
    t: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=complex, copy=True)
        if t.ndim == 1 and self.m == 1:
            t = t.reshape(1, -1)
        object.__setattr__(self, "t", t)
        if self.n < 2:
            raise InvalidInputError(f"vertex degree must be >= 2, got n={self.n}")
        if not 1 <= self.m <= self.n - 1:
            raise InvalidInputError(f"need 1 <= m <= n-1, got m={self.m}, n={self.n}")
        if t.shape != (self.m, self.n - self.m):
            raise InvalidInputError(
                f"T must have shape {(self.m, self.n - self.m)}, got {t.shape}"
            )
        if not np.all(np.isfinite(t)):
            raise InvalidInputError("T has non-finite entries")
        t.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "m": int(self.m),
            "re_t": self.t.real.tolist(),
            "im_t": self.t.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VertexCoupling":
        try:
            t = np.array(data["re_t"], dtype=float) + 1j * np.array(data["im_t"], dtype=float)
            n, m = int(data["n"]), int(data["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed coupling JSON: {exc}") from exc
        return cls(n=n, m=m, t=t.reshape(m, n - m))


@dataclass(frozen=True)
class SMatrix:
    """An ``n x n`` scattering matrix with checked structural flags.

    ``hermitian`` and ``unitary`` are computed at construction against the
    validation tolerances; ``support`` marks entries with modulus above
    ``tol_zero``.  Energy-dependent matrices (closed channels, potentials)
    are legitimately neither, so construction never raises on them; call
    :meth:`require_hermitian_unitary` where the invariant is a precondition.
    """

    entries: np.ndarray
    tol_zero: float = TOL_ZERO
    n: int = field(init=False)
    support: np.ndarray = field(init=False)
    hermitian: bool = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        s = np.array(self.entries, dtype=complex, copy=True)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise InvalidInputError(f"scattering matrix must be square, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("scattering matrix has non-finite entries")
        s.setflags(write=False)
        support = np.abs(s) > self.tol_zero
        support.setflags(write=False)
        object.__setattr__(self, "entries", s)
        object.__setattr__(self, "n", s.shape[0])
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "hermitian", hermitian_residual(s) <= TOL_HERMITIAN)
        object.__setattr__(self, "unitary", unitary_residual(s) <= TOL_UNITARY)

    def require_hermitian_unitary(self):
        if not (self.hermitian and self.unitary):
            raise InvalidInputError(
                "matrix is not Hermitian-unitary within tolerance "
                f"(|S-S^+|={hermitian_residual(self.entries):.2e}, "
                f"|SS^+-I|={unitary_residual(self.entries):.2e})"
            )
        return self

    def permuted(self, perm) -> "SMatrix":
        perm = np.asarray(perm)
        return SMatrix(self.entries[np.ix_(perm, perm)], tol_zero=self.tol_zero)

    def to_dict(self) -> dict:
        return {"n": int(self.n), "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SMatrix":
        try:
            s = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
            n = int(data["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed matrix JSON: {exc}") from exc
        if s.shape != (n, n):
            raise InvalidInputError(f"declared n={n} but matrix has shape {s.shape}")
        return cls(s)


def hermitian_residual(s: np.ndarray) -> float:
    return float(np.max(np.abs(s - s.conj().T)))


def unitary_residual(s: np.ndarray) -> float:
    return float(np.max(np.abs(s @ s.conj().T - np.eye(s.shape[0]))))


def _as_array(s) -> np.ndarray:
    return s.entries if isinstance(s, SMatrix) else np.asarray(s, dtype=complex)


def _as_smatrix(s) -> SMatrix:
    return s if isinstance(s, SMatrix) else SMatrix(s)


def build_s_from_t(c: VertexCoupling) -> SMatrix:
    m, n = c.m, c.n
    t = c.t
    left = np.vstack([np.eye(m), t.conj().T])  # n x m
    right = np.hstack([np.eye(m), t])  # m x n
    gram = np.eye(m) + t @ t.conj().T
    # gram is Hermitian positive definite; solve instead of inverting.
    s = -np.eye(n) + 2.0 * left @ scipy.linalg.solve(gram, right, assume_a="pos")
    # Symmetrize away round-off so S == S^dagger holds to machine precision.
    s = 0.5 * (s + s.conj().T)
    return SMatrix(s)


def numerical_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def _select_regular_rows(s: np.ndarray, m: int) -> np.ndarray:
    """Permutation putting ``m`` edges first so that ``I + S_11`` is regular.

    ``S + I = 2 V V^dagger`` with ``V`` an orthonormal basis of the +1
    eigenspace, so ``I + S_11`` is regular exactly when the chosen rows of
    ``V`` are.  Column-pivoted QR of ``V^dagger`` picks a well-conditioned set.
    """
    n = s.shape[0]
    head = np.eye(m) + s[:m, :m]
    if np.linalg.cond(head) < 1e8:
        return np.arange(n)
    w, v = np.linalg.eigh(s)
    basis = v[:, w > 0]
    _, _, piv = scipy.linalg.qr(basis.conj().T, pivoting=True, mode="economic")
    chosen = np.sort(piv[:m])
    rest = np.setdiff1d(np.arange(n), chosen)
    return np.concatenate([chosen, rest])


def recover_t_from_s(s) -> tuple[VertexCoupling, np.ndarray]:
    """Inverse problem: coupling ``T`` and edge renumbering reproducing ``s``.

    Returns ``(coupling, perm)`` with
    ``build_s_from_t(coupling) == s[perm][:, perm]``.
    """
    sm = _as_smatrix(s).require_hermitian_unitary()
    a = sm.entries
    n = sm.n
    m = numerical_rank(a + np.eye(n))
    if m == 0 or m == n:
        raise InvalidInputError(
            f"S = {'-' if m == 0 else '+'}I has no scale-invariant coupling with 1 <= m <= n-1"
        )
    perm = _select_regular_rows(a, m)
    p = a[np.ix_(perm, perm)]
    head = np.eye(m) + p[:m, :m]
    if np.linalg.cond(head) > 1e12:
        raise NumericalError("no edge renumbering makes I + S_11 regular")
    t = np.linalg.solve(head, p[:m, m:])
    return VertexCoupling(n=n, m=m, t=t), perm


def rank_signature(s) -> tuple[int, int]:
    """Counts ``(n_plus, n_minus)`` of eigenvalues +1 and -1."""
    sm = _as_smatrix(s).require_hermitian_unitary()
    w = np.linalg.eigvalsh(sm.entries)
    return int(np.sum(w > 0)), int(np.sum(w < 0))


def support_graph(s, tol_zero: float = TOL_ZERO) -> list[set[int]]:
    a = _as_array(s)
    n = a.shape[0]
    nz = np.abs(a) > tol_zero
    return [{j for j in range(n) if j != i and (nz[i, j] or nz[j, i])} for i in range(n)]


def is_completely_connected(s, tol_zero: float = TOL_ZERO) -> bool:
    """Connectivity of the off-diagonal support graph."""
    adj = support_graph(s, tol_zero)
    if not adj:
        return False
    g = nx.Graph()
    g.add_nodes_from(range(len(adj)))
    g.add_edges_from((i, j) for i, nbrs in enumerate(adj) for j in nbrs)
    return nx.is_connected(g)


def random_coupling(rng: np.random.Generator, n: int, m: int | None = None) -> VertexCoupling:
    if m is None:
        m = int(rng.integers(1, n))
    t = rng.normal(size=(m, n - m)) + 1j * rng.normal(size=(m, n - m))
    return VertexCoupling(n=n, m=m, t=t)
