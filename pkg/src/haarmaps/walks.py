"""Weakly monotone transposition walks, their counts, and monotone Hurwitz
numbers for a triple of permutations.

A walk of length ``r`` on a label set ``I`` is a sequence of transpositions
``(τ₁, …, τ_r)`` with ``val(τ₁) ≤ … ≤ val(τ_r)``, where ``val`` is the larger
of the two swapped labels.  The walk reaches a target permutation when
``τ_r ∘ … ∘ τ₁`` equals it.  Monotone triple Hurwitz numbers additionally
require the walk, together with three given permutations, to generate a
transitive group.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .perm_core import Permutation, Transposition

__all__ = [
    "MonotoneWalk",
    "enumerate_monotone_walks",
    "count_monotone_walks",
    "is_transitive",
    "monotone_triple_hurwitz",
    "monotone_hurwitz_by_genus",
    "hurwitz_genus_to_steps",
]


@dataclass(frozen=True)
class MonotoneWalk:
    """A value-sorted sequence of transpositions on a fixed label set."""

    steps: tuple[Transposition, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(sorted(self.labels))
        object.__setattr__(self, "labels", labels)
        label_set = set(labels)
        values = [t.value for t in self.steps]
        if values != sorted(values):
            raise ValueError("walk steps are not sorted by value")
        for t in self.steps:
            if t.low not in label_set or t.high not in label_set:
                raise ValueError(f"step {t} uses labels outside {labels}")

    def __len__(self) -> int:
        return len(self.steps)

    def product(self) -> Permutation:
        """``τ_r ∘ … ∘ τ₁`` as a permutation of the label set."""
        out = Permutation.identity(self.labels)
        for t in self.steps:
            out = t.to_permutation(self.labels).compose(out)
        return out

    def as_pairs(self) -> list[list[int]]:
        return [[t.low, t.high] for t in self.steps]

    def __repr__(self) -> str:
        return f"MonotoneWalk({''.join(map(str, self.steps)) or 'empty'} on {self.labels})"


def _transpositions(labels: tuple[int, ...]) -> list[Transposition]:
    out = []
    for a_pos in range(len(labels)):
        for b_pos in range(a_pos + 1, len(labels)):
            out.append(Transposition(labels[a_pos], labels[b_pos]))
    return out


def _completable(remaining: Permutation, steps_left: int) -> bool:
    """Necessary conditions: enough steps, and matching parity."""
    need = len(remaining.domain) - remaining.cycle_count()
    return steps_left >= need and (steps_left - need) % 2 == 0


def enumerate_monotone_walks(
    target: Permutation, r: int, I: Iterable[int]
) -> list[MonotoneWalk]:
    """All monotone walks of length ``r`` on ``I`` whose product is ``target``.

    Output is lexicographic in the step sequence (steps compared as ordered
    pairs ``(low, high)``).
    """
    labels = tuple(sorted(I))
    if target.domain != labels:
        raise ValueError("target permutation must live on the label set I")
    if r < 0:
        raise ValueError("walk length must be nonnegative")
    all_steps = _transpositions(labels)
    out: list[MonotoneWalk] = []
    prefix: list[Transposition] = []

    def extend(remaining: Permutation, steps_left: int, minval: int) -> None:
        if steps_left == 0:
            if remaining.is_identity():
                out.append(MonotoneWalk(tuple(prefix), labels))
            return
        if not _completable(remaining, steps_left):
            return
        for t in all_steps:
            if t.value < minval:
                continue
            prefix.append(t)
            extend(remaining.compose(t.to_permutation(labels)), steps_left - 1, t.value)
            prefix.pop()

    extend(target, r, 0)
    return out


_count_lock = threading.Lock()
_count_memo: dict[tuple, int] = {}


def count_monotone_walks(target: Permutation, r: int, I: Iterable[int]) -> int:
    """Number of monotone walks of length ``r`` on ``I`` with product ``target``."""
    labels = tuple(sorted(I))
    if target.domain != labels:
        raise ValueError("target permutation must live on the label set I")
    if r < 0:
        raise ValueError("walk length must be nonnegative")
    all_steps = _transpositions(labels)
    step_perms = {t: t.to_permutation(labels) for t in all_steps}

    def count(remaining: Permutation, steps_left: int, minval: int) -> int:
        if steps_left == 0:
            return 1 if remaining.is_identity() else 0
        if not _completable(remaining, steps_left):
            return 0
        key = (labels, remaining.one_line(), steps_left, minval)
        with _count_lock:
            cached = _count_memo.get(key)
        if cached is not None:
            return cached
        total = 0
        for t in all_steps:
            if t.value < minval:
                continue
            total += count(remaining.compose(step_perms[t]), steps_left - 1, t.value)
        with _count_lock:
            _count_memo[key] = total
        return total

    return count(target, r, 0)


def is_transitive(generators: Sequence[Permutation], I: Iterable[int]) -> bool:
    """True iff the group generated acts transitively on ``I`` (union-find)."""
    labels = tuple(sorted(I))
    if not labels:
        raise ValueError("label set must be nonempty")
    for g in generators:
        if g.domain != labels:
            raise ValueError("generators must share the domain I")
    parent = {x: x for x in labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for g in generators:
        for x in labels:
            union(x, g(x))
    root = find(labels[0])
    return all(find(x) == root for x in labels)


# ---------------------------------------------------------------------------
# Monotone triple Hurwitz numbers
# ---------------------------------------------------------------------------


def _partition_key(parent: dict[int, int]) -> tuple[tuple[int, ...], ...]:
    blocks: dict[int, list[int]] = {}
    roots = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in parent:
        roots[x] = find(x)
    for x, r in roots.items():
        blocks.setdefault(r, []).append(x)
    return tuple(sorted(tuple(sorted(b)) for b in blocks.values()))


def _merge_partitions(labels, parts: Iterable[tuple[tuple[int, ...], ...]]) -> int:
    """Number of blocks of the join of the given partitions of ``labels``."""
    parent = {x: x for x in labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in parts:
        for block in part:
            for y in block[1:]:
                rx, ry = find(block[0]), find(y)
                if rx != ry:
                    parent[rx] = ry
    return len({find(x) for x in labels})


def _orbit_partition(perms: Sequence[Permutation], labels) -> tuple[tuple[int, ...], ...]:
    parent = {x: x for x in labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in perms:
        for x in labels:
            rx, ry = find(x), find(g(x))
            if rx != ry:
                parent[rx] = ry
    return _partition_key(parent)


def monotone_triple_hurwitz(
    rho: Permutation, gamma: Permutation, sigma: Permutation, r: int
) -> int:
    """Count monotone walks of length ``r`` with product ``ρ∘γ∘σ`` such that
    the walk steps together with ``γ, ρ, σ`` generate a transitive group.

    Counted by dynamic programming whose state is the remaining product, the
    current minimum step value, and the partition of the labels into orbits of
    the steps chosen so far; the three fixed permutations' orbits are joined
    at acceptance time.
    """
    labels = rho.domain
    if gamma.domain != labels or sigma.domain != labels:
        raise ValueError("rho, gamma, sigma must share a domain")
    if r < 0:
        raise ValueError("walk length must be nonnegative")
    target = rho.compose(gamma).compose(sigma)
    base_partition = _orbit_partition([rho, gamma, sigma], labels)
    all_steps = _transpositions(labels)
    step_perms = {t: t.to_permutation(labels) for t in all_steps}
    trivial_partition = tuple((x,) for x in labels)
    memo: dict[tuple, int] = {}

    def count(
        remaining: Permutation,
        steps_left: int,
        minval: int,
        partition: tuple[tuple[int, ...], ...],
    ) -> int:
        if steps_left == 0:
            if not remaining.is_identity():
                return 0
            blocks = _merge_partitions(labels, [base_partition, partition])
            return 1 if blocks == 1 else 0
        if not _completable(remaining, steps_left):
            return 0
        key = (remaining.one_line(), steps_left, minval, partition)
        cached = memo.get(key)
        if cached is not None:
            return cached
        total = 0
        for t in all_steps:
            if t.value < minval:
                continue
            parent = {x: x for block in partition for x in block}
            rep = {x: block[0] for block in partition for x in block}
            for x, r0 in rep.items():
                parent[x] = r0
            ra, rb = parent[t.low], parent[t.high]
            if ra != rb:
                for x in parent:
                    if parent[x] == ra:
                        parent[x] = rb
            new_partition = _partition_key(parent)
            total += count(
                remaining.compose(step_perms[t]), steps_left - 1, t.value, new_partition
            )
        memo[key] = total
        return total

    return count(target, r, 0, trivial_partition)


def hurwitz_genus_to_steps(
    rho: Permutation, gamma: Permutation, sigma: Permutation, g: int
) -> int:
    """The walk length forced by the Euler relation
    ``2 − 2g = c(γ) + c(ρ) + c(σ) − r − m`` (may be negative)."""
    m = len(rho.domain)
    return (
        gamma.cycle_count() + rho.cycle_count() + sigma.cycle_count() - m - 2 + 2 * g
    )


def monotone_hurwitz_by_genus(
    rho: Permutation, gamma: Permutation, sigma: Permutation, g: int
) -> int:
    """Genus-``g`` monotone triple Hurwitz number; 0 when the Euler-derived
    walk length is negative."""
    r = hurwitz_genus_to_steps(rho, gamma, sigma, g)
    if r < 0:
        return 0
    return monotone_triple_hurwitz(rho, gamma, sigma, r)
