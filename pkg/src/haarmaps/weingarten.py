"""Exact Weingarten function of the unitary group at fixed dimension, with a
monotone-walk series expansion as an independent second implementation, and
the per-permutation weight appearing in Haar moment sums.

``weingarten_exact`` solves the conjugacy-class-symmetrized Gram system

    Σ_{classes λ} ( Σ_{π in class λ} N^{c(σ_μ π⁻¹)} ) · w(λ)  =  [μ = class of identity]

over exact rationals; the unsymmetrized system is the defining convolution
identity ``Σ_π Wg_N(π) N^{c(σπ⁻¹)} = [σ = id]``, and symmetrizing is valid
because the solution is a class function.  Values are cached per ``(q, N)``.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .ncpoly import NCWord, TraceExpression, trace_of_permutation
from .perm_core import Permutation, SignVector, is_sign_compatible, pi_eps
from .walks import count_monotone_walks

__all__ = [
    "WeingartenRegimeError",
    "WeingartenTable",
    "weingarten_exact",
    "weingarten_series_partial",
    "moment_weight",
]


class WeingartenRegimeError(ValueError):
    """Dimension too small: outside the guaranteed-invertible regime ``N ≥ q``."""


def _partitions(n: int) -> list[tuple[int, ...]]:
    """All partitions of ``n`` as decreasing tuples, deterministic order."""
    if n == 0:
        return [()]
    out: list[tuple[int, ...]] = []

    def build(remaining: int, largest: int, prefix: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(remaining, largest), 0, -1):
            build(remaining - part, part, prefix + (part,))

    build(n, n, ())
    return out


def _representative(cycle_type: tuple[int, ...], q: int) -> Permutation:
    """A permutation of [q] with the given cycle type (consecutive cycles)."""
    cycles = []
    start = 1
    for length in cycle_type:
        cycles.append(tuple(range(start, start + length)))
        start += length
    return Permutation.from_cycles(cycles, range(1, q + 1))


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact rationals and partial pivoting."""
    n = len(matrix)
    A = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise WeingartenRegimeError("Gram system is singular")
        A[col], A[pivot] = A[pivot], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                factor = A[r][col]
                A[r] = [x - factor * y for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


@dataclass(frozen=True)
class WeingartenTable:
    """Exact Weingarten values for all of ``S_q`` at one dimension ``N``,
    stored per cycle type."""

    q: int
    N: int
    values: Mapping[tuple[int, ...], Fraction]

    def lookup(self, pi: Permutation) -> Fraction:
        return self.values[pi.cycle_type()]


_table_lock = threading.Lock()
_tables: dict[tuple[int, int], WeingartenTable] = {}


def _build_table(q: int, N: int) -> WeingartenTable:
    classes = _partitions(q)
    reps = {lam: _representative(lam, q) for lam in classes}
    domain = tuple(range(1, q + 1))
    # bucket all of S_q by cycle type once
    members: dict[tuple[int, ...], list[Permutation]] = {lam: [] for lam in classes}
    for images in itertools.permutations(domain):
        pi = Permutation.from_one_line(images, domain)
        members[pi.cycle_type()].append(pi)
    matrix: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    identity_type = tuple([1] * q)
    for mu in classes:
        sigma = reps[mu]
        row = []
        for lam in classes:
            entry = Fraction(0)
            for pi in members[lam]:
                entry += Fraction(N) ** sigma.compose(pi.inverse()).cycle_count()
            row.append(entry)
        matrix.append(row)
        rhs.append(Fraction(1) if mu == identity_type else Fraction(0))
    solution = _solve_exact(matrix, rhs)
    return WeingartenTable(q, N, dict(zip(classes, solution)))


def get_table(q: int, N: int) -> WeingartenTable:
    """The cached table for ``(q, N)``; refuses ``N < q``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if N < q:
        raise WeingartenRegimeError(
            f"N = {N} < q = {q}: outside the guaranteed-invertible regime"
        )
    key = (q, N)
    with _table_lock:
        table = _tables.get(key)
    if table is not None:
        return table
    table = _build_table(q, N)
    with _table_lock:
        _tables.setdefault(key, table)
    return table


def weingarten_exact(pi: Permutation, N: int) -> Fraction:
    """Exact Weingarten value ``Wg_N(π)`` for ``π`` on ``[q]``, ``N ≥ q``."""
    q = len(pi.domain)
    return get_table(q, N).lookup(pi)


def weingarten_series_partial(pi: Permutation, N: int, R: int) -> Fraction:
    """Partial sum ``Σ_{r=0}^{R} (−1)^r w^r(id, π) / N^{r+q}`` of the
    monotone-walk expansion of ``Wg_N(π)``."""
    q = len(pi.domain)
    if N < q:
        raise WeingartenRegimeError(
            f"N = {N} < q = {q}: outside the guaranteed-invertible regime"
        )
    if R < 0:
        raise ValueError("R must be >= 0")
    total = Fraction(0)
    labels = pi.domain
    for r in range(R + 1):
        count = count_monotone_walks(pi, r, labels)
        if count:
            total += Fraction((-1) ** r * count, N ** (r + q))
    return total


def moment_weight(
    gamma: Permutation,
    pi: Permutation,
    M: Sequence[NCWord],
    N: int,
    *,
    eps: SignVector,
    colors: Mapping[int, int] | None = None,
) -> tuple[TraceExpression, Fraction]:
    """The contribution of one pairing permutation to a Haar moment.

    Returns ``(Tr_{γπ⁻¹}(M), ∏_colors Wg_N(restriction of π² to that color's
    +1 labels))``.  The trace factor is returned in normalized form with the
    dimension power folded into the coefficient: ``Tr_σ = N^{c(σ)} ∏ tr(·)``.

    ``eps`` is the sign vector of the underlying decomposition and ``colors``
    maps each label to its unitary color (omitted means a single color).
    """
    if not is_sign_compatible(pi, eps):
        raise ValueError("pairing permutation is not sign-compatible")
    sigma = gamma.compose(pi.inverse())
    trace = trace_of_permutation(sigma, M) * Fraction(N) ** sigma.cycle_count()
    square = pi_eps(pi, eps)
    weight = Fraction(1)
    plus = square.domain
    if colors is None:
        color_groups = {1: list(plus)}
    else:
        color_groups = {}
        for x in plus:
            color_groups.setdefault(colors[x], []).append(x)
    for _, group in sorted(color_groups.items()):
        restriction = square.restrict(group)
        q_c = len(group)
        weight *= get_table(q_c, N).values[restriction.cycle_type()]
    return trace, weight
