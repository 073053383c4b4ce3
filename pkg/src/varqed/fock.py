"""Truncated multimode Fock basis.

States are ``(matter level a, occupation vector n)``.  Occupation vectors
are ordered lexicographically (first mode most significant) and the matter
index runs fastest, so a state vector reshapes to ``(n_occupations,
n_matter)``.  Two truncations are supported: a cap on the total photon
number (``"total"``, the default) and a cap on every single mode
(``"per_mode"``).
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools
from math import comb

import numpy as np

__all__ = ["FockBasis", "BasisTooLarge", "enumerate_basis", "basis_size"]

DEFAULT_MAX_STATES = 20_000_000


class BasisTooLarge(MemoryError):
    pass


def basis_size(n_matter, n_modes, max_photons, truncation="total"):
    if truncation == "total":
        return n_matter * comb(n_modes + max_photons, max_photons)
    if truncation == "per_mode":
        return n_matter * (max_photons + 1) ** n_modes
    raise ValueError(f"unknown truncation {truncation!r}")


@lru_cache(maxsize=None)
def _lex_occupations(n_modes, budget):
    """All vectors of length ``n_modes`` with sum <= budget, lexicographic."""
    if n_modes == 0:
        return np.zeros((1, 0), dtype=np.int8)
    blocks = []
    for x in range(budget + 1):
        tail = _lex_occupations(n_modes - 1, budget - x)
        head = np.full((len(tail), 1), x, dtype=np.int8)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def _count_table(n_modes, max_photons):
    # count[m, b] = number of length-m vectors with sum <= b
    table = np.zeros((n_modes + 1, max_photons + 2), dtype=np.int64)
    for m in range(n_modes + 1):
        for b in range(max_photons + 2):
            table[m, b] = comb(m + b, b)
    return table


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Enumerated truncated basis with raise/lower index tables.

    Attributes
    ----------
    occupations : (D, M) int8 ndarray
        Photon occupation vectors in basis order.
    raise_index : (D, M) int32 ndarray
        Row of ``n + e_i``, or -1 when it falls outside the truncation.
    lower_index : (D, M) int32 ndarray
        Row of ``n - e_i``, or -1 when ``n_i = 0``.
    """

    n_matter: int
    n_modes: int
    max_photons: int
    truncation: str
    occupations: np.ndarray
    raise_index: np.ndarray
    lower_index: np.ndarray

    @property
    def n_occupations(self):
        return len(self.occupations)

    @property
    def size(self):
        return self.n_occupations * self.n_matter

    def index(self, matter, occupation):
        """Flat index of ``(matter, occupation)``."""
        occupation = np.asarray(occupation, dtype=np.int64)
        if occupation.shape != (self.n_modes,) or np.any(occupation < 0):
            raise KeyError(f"bad occupation vector {occupation!r}")
        if self.truncation == "total":
            if occupation.sum() > self.max_photons:
                raise KeyError("occupation exceeds the photon cap")
            row = int(self._rank(occupation[None, :])[0])
        else:
            if occupation.max(initial=0) > self.max_photons:
                raise KeyError("occupation exceeds the per-mode cap")
            row = int(np.ravel_multi_index(occupation, (self.max_photons + 1,) * self.n_modes))
        if not 0 <= matter < self.n_matter:
            raise KeyError(f"matter index {matter} out of range")
        return row * self.n_matter + matter

    def state(self, index):
        """``(matter, occupation tuple)`` at flat ``index``."""
        row, matter = divmod(int(index), self.n_matter)
        return matter, tuple(int(x) for x in self.occupations[row])

    def _rank(self, occ):
        counts = _count_table(self.n_modes, self.max_photons)
        occ = np.asarray(occ, dtype=np.int64)
        rank = np.zeros(len(occ), dtype=np.int64)
        remaining = np.full(len(occ), self.max_photons, dtype=np.int64)
        for j in range(self.n_modes):
            m = self.n_modes - 1 - j
            for x in range(self.max_photons):
                hit = occ[:, j] > x
                rank += np.where(hit, counts[m, np.maximum(remaining - x, 0)], 0)
            remaining -= occ[:, j]
        return rank

    def photon_energies(self, omegas):
        return self.occupations.astype(float) @ np.asarray(omegas, dtype=float)

    def total_photons(self):
        return self.occupations.sum(axis=1, dtype=np.int64)


def _total_tables(occ, n_modes, max_photons):
    """Raise/lower tables for the total-number cap via incremental ranks.

    With ``r_j`` the budget left before mode ``j``, the rank is a sum of
    per-mode terms ``T_j(n_j, r_j)``.  Raising mode ``i`` changes ``T_i``
    and lowers the budget of every later mode by one, so each raised rank
    follows from prefix/suffix sums of two term arrays.
    """
    counts = _count_table(n_modes, max_photons)
    D = len(occ)
    occ = occ.astype(np.int64)
    prefix_budget = max_photons - np.concatenate(
        [np.zeros((D, 1), np.int64), np.cumsum(occ, axis=1)[:, :-1]], axis=1
    )

    def term(n, budget, m):
        # sum_{x < n} count(m, budget - x), zero for negative budgets
        out = np.zeros_like(n)
        for x in range(max_photons + 1):
            b = budget - x
            ok = (n > x) & (b >= 0)
            out += np.where(ok, counts[m, np.clip(b, 0, None)], 0)
        return out

    ms = n_modes - 1 - np.arange(n_modes)
    base = np.stack([term(occ[:, j], prefix_budget[:, j], ms[j]) for j in range(n_modes)], axis=1)
    shifted = np.stack(
        [term(occ[:, j], prefix_budget[:, j] - 1, ms[j]) for j in range(n_modes)], axis=1
    )
    bumped = np.stack(
        [term(occ[:, j] + 1, prefix_budget[:, j], ms[j]) for j in range(n_modes)], axis=1
    )
    lowered_shift = np.stack(
        [term(occ[:, j], prefix_budget[:, j] + 1, ms[j]) for j in range(n_modes)], axis=1
    )
    dropped = np.stack(
        [term(occ[:, j] - 1, prefix_budget[:, j], ms[j]) for j in range(n_modes)], axis=1
    )
    before = np.cumsum(base, axis=1) - base
    after_shift = np.cumsum(shifted[:, ::-1], axis=1)[:, ::-1] - shifted
    after_lower = np.cumsum(lowered_shift[:, ::-1], axis=1)[:, ::-1] - lowered_shift

    total = occ.sum(axis=1)
    raise_index = before + bumped + after_shift
    raise_index[total >= max_photons, :] = -1
    lower_index = before + dropped + after_lower
    lower_index[occ == 0] = -1
    return raise_index.astype(np.int32), lower_index.astype(np.int32)


def _generic_tables(occ, max_photons):
    lookup = {tuple(row): k for k, row in enumerate(occ.tolist())}
    D, M = occ.shape
    raise_index = np.full((D, M), -1, dtype=np.int32)
    lower_index = np.full((D, M), -1, dtype=np.int32)
    for k, row in enumerate(occ.tolist()):
        for i in range(M):
            row[i] += 1
            raise_index[k, i] = lookup.get(tuple(row), -1)
            row[i] -= 2
            if row[i] >= 0:
                lower_index[k, i] = lookup[tuple(row)]
            row[i] += 1
    return raise_index, lower_index


def enumerate_basis(n_matter, n_modes, max_photons, truncation="total",
                    max_states=DEFAULT_MAX_STATES):
    """Enumerate the truncated basis and its ladder tables.

    Raises
    ------
    BasisTooLarge
        If the basis would exceed ``max_states`` states.
    """
    if n_matter < 1 or n_modes < 1 or max_photons < 0:
        raise ValueError("need n_matter >= 1, n_modes >= 1, max_photons >= 0")
    size = basis_size(n_matter, n_modes, max_photons, truncation)
    if size > max_states:
        raise BasisTooLarge(
            f"basis of {size} states ({n_matter} levels, {n_modes} modes, "
            f"cap {max_photons}, {truncation}) exceeds the limit of {max_states}"
        )
    if truncation == "total":
        occ = _lex_occupations(n_modes, max_photons).copy()
        raise_index, lower_index = _total_tables(occ, n_modes, max_photons)
    else:
        occ = np.array(
            list(itertools.product(range(max_photons + 1), repeat=n_modes)), dtype=np.int8
        ).reshape(-1, n_modes)
        raise_index, lower_index = _generic_tables(occ, max_photons)
    occ.setflags(write=False)
    return FockBasis(n_matter, n_modes, max_photons, truncation, occ, raise_index, lower_index)
