"""Hermitian unitary matrices with the maximal number of zero entries.

Building blocks are two unit rows and two rank-one 2x2 kernels, each
parametrized by nonzero complex numbers kappa.  They are tiled along an
anti-diagonal staircase into unitary ``r x r`` blocks ``A``; even vertex
degrees use ``[[0, A], [A^+, 0]]`` and odd degrees a Hermitized staircase of
full size.  Layout (0-based):

* odd r = 2P+1: rows are ``[0] + pairs (1,2), (3,4), ...``; columns are
  ``[0] + pairs``.  Block row ``j`` (1..P) holds ``K1(k[2j-1], k[2j])`` in
  column pair ``P-j`` and ``K2(k[2j], k[2j+1])`` one pair to the left, except
  the last block row, which holds ``Q1(k[2P])^+`` in the single column.
* even r = 2P: rows are ``[0] + pairs + [r-1]``; columns are pairs only.  The
  last row is ``Q2(k[r-1])`` in the first column pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .couplings import TOL_ZERO, SMatrix, unitary_residual
from .errors import InvalidInputError

FAMILIES = ("even-block", "odd-4p+3", "odd-4p+1", "exceptional-A4")


def _norm(k: complex) -> float:
    return float(np.sqrt(1.0 + abs(k) ** 2))


def kernel_q1(kappa: complex) -> np.ndarray:
    return np.array([[kappa, 1.0]], dtype=complex) / _norm(kappa)


def kernel_q2(kappa: complex) -> np.ndarray:
    return np.array([[1.0, -np.conj(kappa)]], dtype=complex) / _norm(kappa)


def kernel_k1(k1: complex, k2: complex) -> np.ndarray:
    c1 = np.conj(k1)
    return np.array([[-1.0, c1], [k2, -c1 * k2]], dtype=complex) / (_norm(k1) * _norm(k2))


def kernel_k2(k1: complex, k2: complex) -> np.ndarray:
    c1 = np.conj(k1)
    return np.array([[c1 * k2, c1], [k2, 1.0]], dtype=complex) / (_norm(k1) * _norm(k2))


def _check_nonzero(kappas):
    if any(k == 0 for k in kappas):
        raise InvalidInputError("all kappa parameters must be nonzero")


def build_a3(k1: complex, k2: complex) -> np.ndarray:
    """The 3x3 unitary with a single zero, in its sign-explicit layout.

    Same zero pattern as ``build_a_block(3, [k1, k2])``; the two differ by
    diagonal sign matrices ``diag(1,-1,1) X diag(-1,1,-1)``.
    """
    _check_nonzero([k1, k2])
    n1, n2 = _norm(k1), _norm(k2)
    c1, c2 = np.conj(k1), np.conj(k2)
    return np.array(
        [
            [0.0, k1 / n1, -1.0 / n1],
            [c2 / n2, 1.0 / (n1 * n2), c1 / (n1 * n2)],
            [-1.0 / n2, k2 / (n1 * n2), c1 * k2 / (n1 * n2)],
        ],
        dtype=complex,
    )


def _row_offset(block_row: int) -> int:
    return 0 if block_row == 0 else 1 + 2 * (block_row - 1)


def build_a_block(r: int, kappas: Sequence[complex]) -> np.ndarray:
    """Unitary ``r x r`` staircase block with ``(r-2)**2`` zeros.

    ``r >= 3`` gives the generalized family; ``r == 2`` is accepted and
    returns the zero-free ``[[Q1(k)], [Q2(k)]]`` so that the even family also
    covers degree 4.
    """
    r = int(r)
    if r < 2:
        raise InvalidInputError(f"block size must be >= 2, got {r}")
    kappas = [complex(k) for k in kappas]
    if len(kappas) != r - 1:
        raise InvalidInputError(f"block size {r} needs {r - 1} kappas, got {len(kappas)}")
    _check_nonzero(kappas)
    k = [None] + kappas  # 1-based, as in the parameter labels
    a = np.zeros((r, r), dtype=complex)

    if r % 2:
        npairs = (r - 1) // 2
        col0 = lambda c: 1 + 2 * c  # noqa: E731
    else:
        npairs = r // 2
        col0 = lambda c: 2 * c  # noqa: E731

    a[0, col0(npairs - 1) : col0(npairs - 1) + 2] = kernel_q1(k[1])
    last_pair_row = npairs if r % 2 else npairs - 1
    for j in range(1, last_pair_row + 1):
        r0 = _row_offset(j)
        c = npairs - j
        a[r0 : r0 + 2, col0(c) : col0(c) + 2] = kernel_k1(k[2 * j - 1], k[2 * j])
        if c - 1 >= 0:
            a[r0 : r0 + 2, col0(c - 1) : col0(c - 1) + 2] = kernel_k2(k[2 * j], k[2 * j + 1])
        else:
            a[r0 : r0 + 2, 0:1] = kernel_q1(k[2 * j]).conj().T
    if r % 2 == 0:
        a[r - 1, 0:2] = kernel_q2(k[r - 1])
    return a


def build_a4_exceptional(k1: complex, k2: complex) -> np.ndarray:
    c1, c2 = np.conj(k1), np.conj(k2)
    a = np.array(
        [
            [0.0, k2, k1, 1.0],
            [k2, 0.0, 1.0, -c1],
            [-k1, 1.0, 0.0, -c2],
            [1.0, c1, -c2, 0.0],
        ],
        dtype=complex,
    )
    return a / np.sqrt(1.0 + abs(k1) ** 2 + abs(k2) ** 2)


def build_s_even(r: int, a: np.ndarray) -> SMatrix:
    a = np.asarray(a, dtype=complex)
    if a.shape != (r, r):
        raise InvalidInputError(f"A must be {r}x{r}, got {a.shape}")
    if unitary_residual(a) > 1e-10:
        raise InvalidInputError("A block is not unitary")
    z = np.zeros((r, r), dtype=complex)
    return SMatrix(np.block([[z, a], [a.conj().T, z]]))


@dataclass(frozen=True)
class KappaFamilySpec:
    n: int
    kappas: tuple
    family: str

    def __post_init__(self):
        object.__setattr__(self, "kappas", tuple(complex(k) for k in self.kappas))
        n, q = self.n, len(self.kappas)
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if n < 3:
            raise InvalidInputError(f"vertex degree must be >= 3, got {n}")
        if self.family == "even-block":
            if n % 2:
                raise InvalidInputError(f"even-block family needs even n, got {n}")
            need = n // 2 - 1
        elif self.family == "exceptional-A4":
            if n != 8:
                raise InvalidInputError("exceptional-A4 family exists only for n = 8")
            need = 2
        else:
            if n % 2 == 0:
                raise InvalidInputError(f"odd family needs odd n, got {n}")
            expected = "odd-4p+3" if n % 4 == 3 else "odd-4p+1"
            if self.family != expected:
                raise InvalidInputError(f"n={n} belongs to family {expected!r}")
            need = (n - 1) // 2
        if q != need:
            raise InvalidInputError(f"{self.family} with n={n} needs {need} kappas, got {q}")
        _check_nonzero(self.kappas)

    @classmethod
    def default(cls, n: int, family: str | None = None, kappas=None) -> "KappaFamilySpec":
        """All-ones kappas; the family tag defaults from the parity of ``n``.

        ``"even"``/``"odd"`` are accepted as short tags; a tag that does not
        fit ``n`` is still rejected by validation.
        """
        odd_tag = "odd-4p+3" if n % 4 == 3 else "odd-4p+1"
        if family is None:
            family = "even-block" if n % 2 == 0 else odd_tag
        elif family == "even":
            family = "even-block"
        elif family == "odd":
            family = odd_tag
        elif family == "a4":
            family = "exceptional-A4"
        if kappas is None:
            q = {"even-block": n // 2 - 1, "exceptional-A4": 2}.get(family, (n - 1) // 2)
            kappas = (1.0,) * q
        return cls(n=n, kappas=tuple(kappas), family=family)


def build_s_odd(spec: KappaFamilySpec) -> SMatrix:
    """Odd-degree family: the size-``n`` staircase with mirrored kappas.

    Hermiticity forces ``k[i] == k[n-i]``, so the staircase parameters are
    ``(k1, ..., kr, kr, ..., k1)``; the centre block becomes ``K1(kr, kr)``
    for n = 4p+3 and ``K2(kr, kr)`` for n = 4p+1.
    """
    if spec.family not in ("odd-4p+3", "odd-4p+1"):
        raise InvalidInputError(f"build_s_odd needs an odd family, got {spec.family!r}")
    ks = list(spec.kappas)
    a = build_a_block(spec.n, ks + ks[::-1])
    # Exact by construction; the mean removes the ~1e-17 rounding asymmetry.
    return SMatrix(0.5 * (a + a.conj().T))


def build_family(spec: KappaFamilySpec) -> SMatrix:
    if spec.family == "even-block":
        r = spec.n // 2
        return build_s_even(r, build_a_block(r, spec.kappas))
    if spec.family == "exceptional-A4":
        return build_s_even(4, build_a4_exceptional(*spec.kappas))
    return build_s_odd(spec)


def max_zeros_bound(n: int) -> int:
    return (n - 2) ** 2 + (4 if n % 2 == 0 else 0)


def zero_count(s, tol_zero: float = TOL_ZERO) -> int:
    a = s.entries if isinstance(s, SMatrix) else np.asarray(s)
    return int(np.sum(np.abs(a) <= tol_zero))


def passband_count(s, tol_zero: float = TOL_ZERO) -> int:
    a = s.entries if isinstance(s, SMatrix) else np.asarray(s)
    return a.size - zero_count(a, tol_zero)
