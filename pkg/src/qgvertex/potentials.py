"""Energy-dependent scattering under constant potentials on the edges.

With potentials ``V_i`` on the half-lines and energy ``E`` (units with
hbar^2/2m = 1, so ``E = k^2``) the scattering matrix is

    S(E) = -I + 2 [Q1; Q2 T^+] (Q1^2 + T Q2^2 T^+)^{-1} [Q1, T Q2],

with ``Q1, Q2`` diagonal holding ``(1 - V_i/E)^{1/4}`` (principal branch).
Channels with ``V_i > E`` are closed: their rows and columns are zeroed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import SMatrix, VertexCoupling, recover_t_from_s
from .errors import InvalidInputError, ThresholdError
from .families import KappaFamilySpec, build_family

THRESHOLD_RTOL = 1e-14


@dataclass(frozen=True)
class ChannelPotentials:
    v: np.ndarray
    e: float

    def __post_init__(self):
        v = np.array(self.v, dtype=float, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "e", float(self.e))
        if not np.isfinite(self.e) or self.e <= 0:
            raise InvalidInputError(f"energy must be positive, got E={self.e}")
        if np.any(np.abs(v - self.e) <= THRESHOLD_RTOL * max(1.0, self.e)):
            raise ThresholdError(f"E={self.e} coincides with a channel threshold")

    @property
    def open_mask(self) -> np.ndarray:
        return self.e > self.v


def quartic_factors(v, e: float) -> np.ndarray:
    """``(1 - V_i/E)^{1/4}``; negative radicands carry the phase e^{i pi/4}."""
    return np.power(1.0 - np.asarray(v, dtype=complex) / e, 0.25)


def s_with_potentials(c: VertexCoupling, p: ChannelPotentials) -> SMatrix:
    if p.v.shape != (c.n,):
        raise InvalidInputError(f"need {c.n} potentials, got {p.v.shape}")
    q = quartic_factors(p.v, p.e)
    q1 = np.diag(q[: c.m])
    q2 = np.diag(q[c.m :])
    t = c.t
    th = t.conj().T
    left = np.vstack([q1, q2 @ th])
    right = np.hstack([q1, t @ q2])
    middle = q1 @ q1 + t @ q2 @ q2 @ th
    s = -np.eye(c.n) + 2.0 * left @ np.linalg.solve(middle, right)
    closed = ~p.open_mask
    s[closed, :] = 0.0
    s[:, closed] = 0.0
    return SMatrix(s)


def _t_factor(e: float, u: float) -> complex:
    if e <= 0:
        raise InvalidInputError(f"energy must be positive, got E={e}")
    if u < 0:
        raise InvalidInputError(f"potential must be >= 0, got U={u}")
    if abs(e - u) <= THRESHOLD_RTOL * max(1.0, e):
        raise ThresholdError(f"E={e} equals the potential U={u}")
    return complex(np.sqrt(complex(1.0 - u / e)))


def f1(e: float, u: float) -> complex:
    t = _t_factor(e, u)
    return (1.0 - t) / (1.0 + t)


def f2(e: float, u: float) -> complex:
    """Transmission factor into the potential-carrying edge.

    Uses the fourth root ``2 (1-U/E)^{1/4} / (1 + sqrt(1-U/E))``; with a
    square root in the numerator ``|f1|^2 + |f2|^2 = 1`` would fail.
    """
    t = _t_factor(e, u)
    if e < u:
        return 0j
    return 2.0 * np.sqrt(t) / (1.0 + t)


def f2_printed(e: float, u: float) -> complex:
    """The square-root numerator variant, kept for the discrepancy report."""
    t = _t_factor(e, u)
    if e < u:
        return 0j
    return 2.0 * t / (1.0 + t)


def _g(e: float, u: float) -> complex:
    t = _t_factor(e, u)
    return (2.0 * e / u) * (1.0 - t)


def _first_column(spec: KappaFamilySpec, u: float, e: float, edge2_sign: float) -> np.ndarray:
    if spec.family not in ("odd-4p+3", "odd-4p+1"):
        raise InvalidInputError("closed forms exist only for the odd families")
    if u <= 0:
        raise InvalidInputError("closed forms need a positive potential U")
    n = spec.n
    out = np.zeros(n, dtype=complex)
    k1 = spec.kappas[0]
    c1 = np.conj(k1)
    nk1 = 1.0 + abs(k1) ** 2
    t = _t_factor(e, u)
    if n == 3:
        den = 1.0 + t + 2.0 * abs(k1) ** 2
        out[0] = (1.0 - t) / den
        out[1] = 2.0 * c1 * np.sqrt(nk1) / den
        out[2] = 2.0 * np.sqrt(t) * np.sqrt(nk1) / den
    else:
        k2 = spec.kappas[1]
        nk2 = 1.0 + abs(k2) ** 2
        g = _g(e, u)
        out[0] = (-1.0 + g) / nk1
        out[1] = (edge2_sign + g) * c1 / (np.sqrt(nk2) * nk1)
        out[2] = -(-1.0 + g) * c1 * k2 / (np.sqrt(nk2) * nk1)
        out[n - 2] = c1 / np.sqrt(nk1)
        out[n - 1] = 2.0 * e * np.sqrt(t) * (1.0 - t) / (u * np.sqrt(nk1))
    if e < u:
        out[n - 1] = 0.0
    return out


def first_column_printed(spec: KappaFamilySpec, u: float, e: float) -> np.ndarray:
    """First column of an odd family with ``U`` on the last edge, as typeset.

    For n >= 5 the edge-2 amplitude carries ``1 + g`` where the general
    formula gives ``g - 1``; :func:`first_column_report` flags it.
    """
    return _first_column(spec, u, e, edge2_sign=+1.0)


def first_column_closed_form(spec: KappaFamilySpec, u: float, e: float) -> np.ndarray:
    """First column of an odd family with potential ``U`` on edge ``n``.

    With ``t = sqrt(1-U/E)`` and ``g = (2E/U)(1-t)``, for n >= 5 the only
    nonzero amplitudes are on edges 1, 2, 3, n-1 and n; edge n-1 keeps the
    energy-independent value ``k1^*/sqrt(1+|k1|^2)``.  Below threshold
    ``|g - 1| = 1``, hence every open probability is flat in ``E``.
    The edge-2 numerator is ``g - 1``, which is what the general formula
    produces (phase included).
    """
    return _first_column(spec, u, e, edge2_sign=-1.0)


def general_first_column(spec: KappaFamilySpec, u: float, e: float) -> np.ndarray:
    c, perm = recover_t_from_s(build_family(spec))
    v = np.zeros(spec.n)
    v[perm == spec.n - 1] = u
    s = s_with_potentials(c, ChannelPotentials(v, e)).entries
    inv = np.argsort(perm)
    return s[np.ix_(inv, inv)][:, 0]


def first_column_report(spec: KappaFamilySpec, u: float, energies, tol: float = 1e-10) -> dict:
    """Modulus comparison of printed and corrected closed forms vs the general formula."""
    energies = np.asarray(energies, dtype=float)
    gen = np.array([np.abs(general_first_column(spec, u, e)) for e in energies])
    printed = np.array([np.abs(first_column_printed(spec, u, e)) for e in energies])
    fixed = np.array([np.abs(first_column_closed_form(spec, u, e)) for e in energies])
    dev_printed = np.max(np.abs(printed - gen), axis=0)
    dev_fixed = np.max(np.abs(fixed - gen), axis=0)
    return {
        "n": spec.n,
        "kappas": [[k.real, k.imag] for k in spec.kappas],
        "U": float(u),
        "energies": energies.tolist(),
        "max_dev_printed": dev_printed.tolist(),
        "max_dev_corrected": dev_fixed.tolist(),
        "printed_discrepant_rows": [int(i) + 1 for i in np.flatnonzero(dev_printed > tol)],
        "corrected_discrepant_rows": [int(i) + 1 for i in np.flatnonzero(dev_fixed > tol)],
    }


@dataclass
class EnergySweep:
    energies: np.ndarray
    probabilities: np.ndarray  # (len(E), n, n) of |S_ij|^2
    open_mask: np.ndarray  # (len(E), n)

    def column_sums(self) -> np.ndarray:
        """Per-energy sums of open-channel probabilities in each open column."""
        sums = np.einsum("eij,ei->ej", self.probabilities, self.open_mask.astype(float))
        return np.where(self.open_mask, sums, np.nan)

    def to_rows(self) -> list[list]:
        rows = []
        for e, prob, mask in zip(self.energies, self.probabilities, self.open_mask):
            rows.append([repr(float(e)), "".join("1" if x else "0" for x in mask)]
                        + [repr(float(x)) for x in prob.ravel()])
        return rows

    def header(self) -> list[str]:
        n = self.probabilities.shape[1]
        return ["E", "open_mask"] + [f"P{i + 1}_{j + 1}" for i in range(n) for j in range(n)]


def sweep(c: VertexCoupling, v, energies) -> EnergySweep:
    energies = np.asarray(energies, dtype=float)
    v = np.asarray(v, dtype=float)
    probs = np.empty((energies.size, c.n, c.n))
    masks = np.empty((energies.size, c.n), dtype=bool)
    for idx, e in enumerate(energies):
        p = ChannelPotentials(v, e)
        s = s_with_potentials(c, p)
        probs[idx] = np.abs(s.entries) ** 2
        masks[idx] = p.open_mask
    return EnergySweep(energies=energies, probabilities=probs, open_mask=masks)


def sweep_matrix(s, v, energies) -> EnergySweep:
    """:func:`sweep` for a Hermitian-unitary ``S`` in its own edge numbering.

    The coupling is recovered with an edge renumbering; potentials are mapped
    into that numbering and the probabilities mapped back.
    """
    c, perm = recover_t_from_s(s)
    v = np.asarray(v, dtype=float)
    if v.shape != (c.n,):
        raise InvalidInputError(f"need {c.n} potentials, got {v.shape}")
    res = sweep(c, v[perm], energies)
    inv = np.argsort(perm)
    return EnergySweep(
        energies=res.energies,
        probabilities=res.probabilities[:, inv][:, :, inv],
        open_mask=res.open_mask[:, inv],
    )
