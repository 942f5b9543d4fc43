"""Haar-unitary moments, joint cumulants of traces, genus-stratified
coefficients of the topological expansion, formal cumulants with a potential,
and the identity checks built on them (induction recursion, alternated-word
Hurwitz reduction, norm bounds, master-operator identities).

All identity checks work over exact :class:`~haarmaps.ncpoly.TraceExpression`
values; floating point never enters.  Dimension ``N`` appears only through
exact rational prefactors.

Conventions for degenerate arguments, used throughout the recursion checks:
the genus-0 coefficient of a single deterministic word ``w`` is ``tr(w)``
(so 1 for the empty word); positive-genus coefficients of a single
deterministic word vanish; any coefficient with at least two arguments, one
of which is deterministic, vanishes; a coefficient with zero arguments
vanishes; genus −1 coefficients vanish.
"""

from __future__ import annotations

import itertools
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .ncpoly import (
    EMPTY_WORD,
    GaussianRational,
    Letter,
    NCPolynomial,
    NCWord,
    TensorPolynomial,
    TraceExpression,
    cyclic_derivative,
    decompose,
    gamma_of_tuple,
    nc_derivative,
    reduced_laplacian,
    trace_of_permutation,
    xi_norm,
)
from .perm_core import (
    Permutation,
    SignVector,
    all_permutations,
    pi_eps,
    sign_compatible_permutations,
)
from .maps import EnumerationBudgetError
from .walks import enumerate_monotone_walks, monotone_hurwitz_by_genus
from .weingarten import WeingartenRegimeError, get_table, moment_weight

__all__ = [
    "GenusCoefficient",
    "Potential",
    "FormalCumulant",
    "TutteCheckResult",
    "MasterCheckResult",
    "moment_haar",
    "cumulants_from_moments",
    "cumulant_haar",
    "set_partitions",
    "genus_coefficient",
    "genus_value",
    "genus_partial_sum",
    "formal_cumulant",
    "canonical_word_tuples",
    "tutte_check",
    "hurwitz_reduction",
    "AlternationError",
    "alternated_parts",
    "genus_zero_functional",
    "bounds_check",
    "bound_constants",
    "formal_radius",
    "master_operator_check",
    "transport_image",
    "gradient_trick_check",
    "operator_norm_bound_check",
    "clear_caches",
]


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


def _as_words(P: Iterable) -> tuple[NCWord, ...]:
    out = []
    for p in P:
        if isinstance(p, NCWord):
            out.append(p)
        else:
            raise TypeError(f"expected NCWord, got {type(p).__name__}")
    return tuple(out)


@dataclass(frozen=True)
class _TupleData:
    """Decomposition of a tuple of words into map-sum inputs."""

    M: tuple[NCWord, ...]
    eps: SignVector
    colors: dict[int, int]
    gamma: Permutation


def _tuple_data(words: Sequence[NCWord]) -> _TupleData:
    M: list[NCWord] = []
    signs: list[int] = []
    colors: list[int] = []
    for w in words:
        dec = decompose(w)
        M.extend(dec.M)
        signs.extend(dec.eps.values())
        colors.extend(dec.colors)
    eps = SignVector.from_sequence(signs)
    color_map = {i + 1: colors[i] for i in range(len(colors))}
    gamma = gamma_of_tuple(words)
    return _TupleData(tuple(M), eps, color_map, gamma)


def _balanced_per_color(eps: SignVector, colors: Mapping[int, int]) -> bool:
    counts: dict[int, int] = {}
    for x in eps.domain:
        counts[colors[x]] = counts.get(colors[x], 0) + eps(x)
    return all(v == 0 for v in counts.values())


def _enumeration_size(eps: SignVector, colors: Mapping[int, int]) -> int:
    """Number of sign-compatible color-preserving permutations: the product
    over colors of (#plus labels)!² for balanced patterns."""
    plus: dict[int, int] = {}
    minus: dict[int, int] = {}
    for x in eps.plus_labels():
        plus[colors[x]] = plus.get(colors[x], 0) + 1
    for x in eps.minus_labels():
        minus[colors[x]] = minus.get(colors[x], 0) + 1
    if plus.keys() != minus.keys() or any(plus[c] != minus[c] for c in plus):
        return 0
    size = 1
    for c, p in plus.items():
        size *= math.factorial(p) ** 2
    return size


def _check_budget(size: int, max_work: int | None) -> None:
    if max_work is not None and size > max_work:
        raise EnumerationBudgetError(
            f"enumeration of {size} sign-compatible permutations exceeds "
            f"the work cap {max_work}"
        )


def _guard_words(words: Sequence[NCWord], max_work: int | None) -> None:
    """Apply the work cap to the outermost enumeration for a tuple of words.
    Every term spawned by the recursion checks enumerates a tuple of strictly
    smaller total degree, so this bounds the whole call tree."""
    if max_work is None:
        return
    random_part = [w for w in words if w.degree() > 0]
    if not random_part:
        return
    data = _tuple_data(random_part)
    _check_budget(_enumeration_size(data.eps, data.colors), max_work)


def moment_haar(
    P: Sequence[NCWord], N: int, *, threads: int = 1, max_work: int | None = None
) -> TraceExpression:
    """Expectation of ``Tr(P_1)···Tr(P_l)`` over independent Haar unitaries.

    Returned as an exact trace expression in the deterministic letters, with
    all dimension factors folded into rational coefficients at the given
    ``N``.  Words without unitary letters factor out as ``N·tr(P_i)``.
    Unbalanced sign patterns give the zero expression.
    """
    words = _as_words(P)
    prefactor = TraceExpression.constant(1)
    random_part: list[NCWord] = []
    for w in words:
        if w.degree() == 0:
            prefactor = prefactor * (TraceExpression.single([w], 1) * Fraction(N))
        else:
            random_part.append(w)
    if not random_part:
        return prefactor
    data = _tuple_data(random_part)
    if not _balanced_per_color(data.eps, data.colors):
        return TraceExpression.zero()
    _check_budget(_enumeration_size(data.eps, data.colors), max_work)
    # fail fast when the Weingarten regime is violated for some color
    color_plus: dict[int, int] = {}
    for x in data.eps.plus_labels():
        c = data.colors[x]
        color_plus[c] = color_plus.get(c, 0) + 1
    for c, q_c in sorted(color_plus.items()):
        get_table(q_c, N)
    pis = list(sign_compatible_permutations(data.eps, data.colors))

    def chunk_sum(chunk: list[Permutation]) -> TraceExpression:
        total = TraceExpression.zero()
        for pi in chunk:
            trace, weight = moment_weight(
                data.gamma, pi, data.M, N, eps=data.eps, colors=data.colors
            )
            total = total + trace * weight
        return total

    if threads <= 1 or len(pis) < 2:
        result = chunk_sum(pis)
    else:
        n_chunks = min(threads, len(pis))
        chunks = [pis[i::n_chunks] for i in range(n_chunks)]
        with ThreadPoolExecutor(max_workers=n_chunks) as pool:
            parts = list(pool.map(chunk_sum, chunks))
        result = TraceExpression.zero()
        for part in parts:
            result = result + part
    return prefactor * result


# ---------------------------------------------------------------------------
# Cumulants from moments
# ---------------------------------------------------------------------------


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All partitions of ``items`` (restricted-growth-string order)."""
    items = list(items)
    n = len(items)
    if n == 0:
        yield []
        return
    rgs = [0] * n

    def extend(i: int, maxval: int) -> Iterator[list[list]]:
        if i == n:
            blocks: dict[int, list] = {}
            for idx, b in enumerate(rgs):
                blocks.setdefault(b, []).append(items[idx])
            yield [blocks[b] for b in sorted(blocks)]
            return
        for b in range(maxval + 2):
            rgs[i] = b
            yield from extend(i + 1, max(maxval, b))

    yield from extend(1, 0)


def cumulants_from_moments(moment: Callable[[tuple], object], P: Sequence) -> object:
    """Joint cumulant of the entries of ``P`` from a moment functional.

    ``moment`` maps a tuple of arguments to a value in any commutative ring;
    the cumulant is defined recursively by subtracting, over every set
    partition with at least two blocks, the product of the blocks' cumulants.
    """
    P = tuple(P)
    l = len(P)
    if l == 0:
        raise ValueError("need at least one argument")
    if l > 8:
        raise ValueError("joint cumulants supported up to 8 arguments")
    memo: dict[tuple[int, ...], object] = {}

    def cum(positions: tuple[int, ...]) -> object:
        if positions in memo:
            return memo[positions]
        value = moment(tuple(P[i] for i in positions))
        for blocks in set_partitions(positions):
            if len(blocks) < 2:
                continue
            prod = None
            for b in blocks:
                c = cum(tuple(b))
                prod = c if prod is None else prod * c
            value = value - prod
        memo[positions] = value
        return value

    return cum(tuple(range(l)))


def cumulant_haar(
    P: Sequence[NCWord], N: int, *, threads: int = 1, max_work: int | None = None
) -> TraceExpression:
    """Joint cumulant of ``Tr(P_1), …, Tr(P_l)`` under Haar measure at ``N``."""
    words = _as_words(P)
    return cumulants_from_moments(
        lambda sub: moment_haar(sub, N, threads=threads, max_work=max_work), words
    )


# ---------------------------------------------------------------------------
# Genus coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenusCoefficient:
    g: int
    l: int
    value: TraceExpression


_walk_cache_lock = threading.Lock()
_walk_cache: dict[tuple, tuple[tuple[tuple[int, int], ...], ...]] = {}


def _cached_walks(
    labels: tuple[int, ...], target: Permutation, r: int
) -> tuple[tuple[tuple[int, int], ...], ...]:
    key = (labels, target.one_line(), r)
    with _walk_cache_lock:
        hit = _walk_cache.get(key)
    if hit is not None:
        return hit
    walks = tuple(
        tuple((t.low, t.high) for t in w.steps)
        for w in enumerate_monotone_walks(target, r, labels)
    )
    with _walk_cache_lock:
        _walk_cache.setdefault(key, walks)
    return walks


def _base_components(
    labels: tuple[int, ...], perms: Sequence[Permutation]
) -> dict[int, int]:
    """Label -> block id under the orbits of the given permutations."""
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
    roots = sorted({find(x) for x in labels})
    index = {root: i for i, root in enumerate(roots)}
    return {x: index[find(x)] for x in labels}


def _transitive_combo_count(
    block_of: dict[int, int],
    n_blocks: int,
    walk_lists: Sequence[Sequence[tuple[tuple[int, int], ...]]],
) -> int:
    """Number of ways to pick one walk per color so that the walks' steps
    connect all base blocks into one."""
    if n_blocks == 1:
        count = 1
        for ws in walk_lists:
            count *= len(ws)
        return count
    total = 0

    def merged_blocks(parent: list[int], steps) -> list[int]:
        parent = parent[:]

        def find(b: int) -> int:
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            return b

        for i, j in steps:
            ra, rb = find(block_of[i]), find(block_of[j])
            if ra != rb:
                parent[ra] = rb
        return parent

    def rec(idx: int, parent: list[int]) -> int:
        def find(b: int) -> int:
            while parent[b] != b:
                b = parent[b]
            return b

        if idx == len(walk_lists):
            roots = {find(b) for b in range(n_blocks)}
            return 1 if len(roots) == 1 else 0
        subtotal = 0
        for steps in walk_lists[idx]:
            subtotal += rec(idx + 1, merged_blocks(parent, steps))
        return subtotal

    total = rec(0, list(range(n_blocks)))
    return total


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _genus_sum_connected(
    g: int, words: tuple[NCWord, ...], threads: int = 1, max_work: int | None = None
) -> TraceExpression:
    """Signed sum over connected nondecreasing genus-``g`` maps whose white
    data comes from the decomposition of ``words`` (all of degree >= 1)."""
    data = _tuple_data(words)
    if not _balanced_per_color(data.eps, data.colors):
        return TraceExpression.zero()
    _check_budget(_enumeration_size(data.eps, data.colors), max_work)
    labels = data.eps.domain
    two_m = len(labels)
    half_m = two_m // 2
    l = len(words)
    rho_map = data.gamma.inverse()
    colors_sorted = tuple(sorted(set(data.colors.values())))
    plus_by_color = {
        c: tuple(x for x in data.eps.plus_labels() if data.colors[x] == c)
        for c in colors_sorted
    }
    pis = list(sign_compatible_permutations(data.eps, data.colors))

    def handle_pi(pi: Permutation) -> TraceExpression:
        phi = data.gamma.compose(pi.inverse())
        r = l + phi.cycle_count() - half_m - 2 + 2 * g
        if r < 0:
            return TraceExpression.zero()
        square = pi_eps(pi, data.eps)
        block_of = _base_components(labels, [rho_map, pi])
        n_blocks = len(set(block_of.values()))
        count = 0
        for comp in _compositions(r, len(colors_sorted)):
            walk_lists = []
            feasible = True
            for c, r_c in zip(colors_sorted, comp):
                plus_c = plus_by_color[c]
                target = square.restrict(plus_c)
                ws = _cached_walks(plus_c, target, r_c)
                if not ws:
                    feasible = False
                    break
                walk_lists.append(ws)
            if not feasible:
                continue
            count += _transitive_combo_count(block_of, n_blocks, walk_lists)
        if count == 0:
            return TraceExpression.zero()
        sign = -1 if phi.cycle_count() % 2 else 1
        return trace_of_permutation(phi, data.M) * Fraction(sign * count)

    if threads <= 1 or len(pis) < 2:
        total = TraceExpression.zero()
        for pi in pis:
            total = total + handle_pi(pi)
    else:
        n_chunks = min(threads, len(pis))
        chunks = [pis[i::n_chunks] for i in range(n_chunks)]

        def chunk_sum(chunk):
            sub = TraceExpression.zero()
            for pi in chunk:
                sub = sub + handle_pi(pi)
            return sub

        with ThreadPoolExecutor(max_workers=n_chunks) as pool:
            parts = list(pool.map(chunk_sum, chunks))
        total = TraceExpression.zero()
        for part in parts:
            total = total + part
    overall = -1 if (half_m + l) % 2 else 1
    return total * Fraction(overall)


_genus_lock = threading.Lock()
_genus_memo: dict[tuple, TraceExpression] = {}


def genus_value(
    g: int, P: Sequence[NCWord], *, threads: int = 1, max_work: int | None = None
) -> TraceExpression:
    """The order-``2g`` coefficient (an N-free trace expression) for a tuple
    of words, including the degenerate-argument conventions listed in the
    module docstring."""
    words = _as_words(P)
    if g < 0:
        return TraceExpression.zero()
    if len(words) == 0:
        return TraceExpression.zero()
    if len(words) == 1 and words[0].degree() == 0:
        if g == 0:
            return TraceExpression.single([words[0]], 1)
        return TraceExpression.zero()
    if any(w.degree() == 0 for w in words):
        return TraceExpression.zero()
    key = (g, tuple(w.letters for w in words))
    with _genus_lock:
        hit = _genus_memo.get(key)
    if hit is not None:
        return hit
    value = _genus_sum_connected(g, words, threads=threads, max_work=max_work)
    with _genus_lock:
        _genus_memo.setdefault(key, value)
    return value


def genus_coefficient(
    g: int, P: Sequence[NCWord], *, threads: int = 1, max_work: int | None = None
) -> GenusCoefficient:
    """Public wrapper returning the coefficient with its (g, l) metadata."""
    words = _as_words(P)
    if g < 0:
        raise ValueError("genus must be nonnegative")
    return GenusCoefficient(
        g, len(words), genus_value(g, words, threads=threads, max_work=max_work)
    )


def _genus_multilinear(g: int, slots: Sequence["NCPolynomial | NCWord"]) -> TraceExpression:
    """Multilinear extension of :func:`genus_value` to polynomial slots."""
    polys = [
        p if isinstance(p, NCPolynomial) else NCPolynomial.from_word(p) for p in slots
    ]
    total = TraceExpression.zero()
    for combo in itertools.product(*(p.monomials() for p in polys)):
        coeff = GaussianRational(1, 0)
        words = []
        for word, c in combo:
            coeff = coeff * c
            words.append(word)
        if coeff.is_zero():
            continue
        total = total + genus_value(g, words) * coeff
    return total


def genus_partial_sum(P: Sequence[NCWord], N: int, G: int) -> TraceExpression:
    """``Σ_{g=0}^{G} N^{−2g} ·`` genus coefficient — the truncated expansion
    of the renormalized cumulant ``N^{l−2}·cumulant``."""
    total = TraceExpression.zero()
    for g in range(G + 1):
        total = total + genus_value(g, P) * Fraction(1, N ** (2 * g))
    return total


def clear_caches() -> None:
    """Drop the walk and genus memo tables (mainly for benchmarking)."""
    with _walk_cache_lock:
        _walk_cache.clear()
    with _genus_lock:
        _genus_memo.clear()


# ---------------------------------------------------------------------------
# Formal cumulants with a potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """A formal potential ``V = Σ_t z_t·(coefficient_t)·q_t`` whose ``z_t``
    are the series variables."""

    monomials: tuple[NCWord, ...]
    coefficients: tuple[GaussianRational, ...] = ()

    def __post_init__(self):
        if not self.coefficients:
            object.__setattr__(
                self, "coefficients", tuple(GaussianRational(1, 0) for _ in self.monomials)
            )
        if len(self.coefficients) != len(self.monomials):
            raise ValueError("one coefficient per monomial required")
        for q in self.monomials:
            if q.degree() == 0:
                raise ValueError("potential monomials must have unitary degree >= 1")

    @property
    def k(self) -> int:
        return len(self.monomials)

    @property
    def nu(self) -> int:
        return max((q.degree() for q in self.monomials), default=0)


def _multi_indices(k: int, cap: int) -> list[tuple[int, ...]]:
    """All n in N^k with |n| <= cap, graded lexicographic order."""
    out = []
    for total in range(cap + 1):
        for comp in _compositions(total, k):
            out.append(comp)
    return out if k > 0 else [()]


def _multi_factorial(n: tuple[int, ...]) -> int:
    out = 1
    for x in n:
        out *= math.factorial(x)
    return out


@dataclass(frozen=True)
class FormalCumulant:
    g: int
    l: int
    z_cap: int
    coefficients: Mapping[tuple[int, ...], TraceExpression]

    def coefficient(self, n: tuple[int, ...]) -> TraceExpression:
        return self.coefficients.get(tuple(n), TraceExpression.zero())


def _series_cumulant(
    g: int, args: Sequence["NCPolynomial | NCWord"], V: Potential, z_cap: int
) -> dict[tuple[int, ...], TraceExpression]:
    """Coefficients (1/n!)·M(q-repeats, args) for all |n| <= z_cap."""
    out: dict[tuple[int, ...], TraceExpression] = {}
    for n in _multi_indices(V.k, z_cap):
        slots: list[NCPolynomial | NCWord] = []
        scale = GaussianRational(Fraction(1, _multi_factorial(n)), 0)
        for t, reps in enumerate(n):
            for _ in range(reps):
                slots.append(V.monomials[t])
                scale = scale * V.coefficients[t]
        slots.extend(args)
        out[n] = _genus_multilinear(g, slots) * scale
    return out


def _series_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for n, v in b.items():
        out[n] = out.get(n, TraceExpression.zero()) + v
    return out


def _series_neg(a: dict) -> dict:
    return {n: -v for n, v in a.items()}


def _series_mul(a: dict, b: dict, k: int, cap: int) -> dict:
    out: dict[tuple[int, ...], TraceExpression] = {}
    for n1, v1 in a.items():
        for n2, v2 in b.items():
            n = tuple(x + y for x, y in zip(n1, n2)) if k else ()
            if sum(n) > cap:
                continue
            out[n] = out.get(n, TraceExpression.zero()) + v1 * v2
    for n in _multi_indices(k, cap):
        out.setdefault(n, TraceExpression.zero())
    return out


def _series_shift(a: dict, t: int, k: int, cap: int) -> dict:
    """Multiply by the variable ``z_t``."""
    out = {n: TraceExpression.zero() for n in _multi_indices(k, cap)}
    for n, v in a.items():
        shifted = tuple(x + (1 if i == t else 0) for i, x in enumerate(n))
        if sum(shifted) <= cap:
            out[shifted] = out[shifted] + v
    return out


def formal_cumulant(
    g: int, l: int, P: Sequence[NCWord], V: Potential, z_cap: int
) -> FormalCumulant:
    """The z-truncated formal cumulant: coefficient of ``z^n`` is the genus
    coefficient of the tuple with ``n_t`` copies of ``q_t`` prepended,
    divided by ``n!``."""
    words = _as_words(P)
    if len(words) != l:
        raise ValueError("l must equal the number of arguments")
    if z_cap < 0:
        raise ValueError("z_cap must be >= 0")
    coeffs = _series_cumulant(g, words, V, z_cap)
    return FormalCumulant(g, l, z_cap, coeffs)


# ---------------------------------------------------------------------------
# The induction (Tutte-like) identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TutteCheckResult:
    lhs: object  # TraceExpression, or dict multi-index -> TraceExpression
    rhs: object
    equal: bool
    form: str


def _u_splits(word: NCWord, color: int, kind: str):
    letters = word.letters
    for pos, ltr in enumerate(letters):
        if ltr.kind == kind and ltr.index == color:
            yield NCWord(letters[:pos]), NCWord(letters[pos + 1 :])


def _check_last_word_ends_with_u(words: tuple[NCWord, ...], color: int) -> NCWord:
    last = words[-1]
    if last.is_empty() or last.letters[-1] != Letter("u", color):
        raise ValueError(
            f"the last word must end with the letter u{color} for the recursion check"
        )
    return NCWord(last.letters[:-1])


def _tutte_theorem_sides(
    g: int, words: tuple[NCWord, ...], color: int
) -> tuple[TraceExpression, TraceExpression]:
    l = len(words)
    others = words[:-1]
    w_full = words[-1]
    p_last = _check_last_word_ends_with_u(words, color)
    u = NCWord([Letter("u", color)])
    lhs = genus_value(g, words)
    rhs = TraceExpression.zero()

    def split_products(g_total: int, left_extra: NCWord, right_extra: NCWord) -> TraceExpression:
        out = TraceExpression.zero()
        idx = list(range(l - 1))
        for size in range(l):
            for I in itertools.combinations(idx, size):
                Ic = [i for i in idx if i not in I]
                left = [others[i] for i in I]
                right = [others[i] for i in Ic]
                for g1 in range(g_total + 1):
                    g2 = g_total - g1
                    out = out + genus_value(g1, left + [left_extra]) * genus_value(
                        g2, right + [right_extra]
                    )
        return out

    # splittings of the last word at a u of the color: P_l = Q·u·R
    for Q, R in _u_splits(p_last, color, "u"):
        Qu = Q.concat(u)
        Ru = R.concat(u)
        if g >= 1:
            rhs = rhs - genus_value(g - 1, list(others) + [Qu, Ru])
        rhs = rhs - split_products(g, Qu, Ru)
    # splittings of the last word at a u^-1: P_l = Q·u^-1·R
    for Q, R in _u_splits(p_last, color, "u^-1"):
        if g >= 1:
            rhs = rhs + genus_value(g - 1, list(others) + [Q, R])
        rhs = rhs + split_products(g, Q, R)
    # splittings of the other words
    for j in range(l - 1):
        rest = [others[i] for i in range(l - 1) if i != j]
        for Q, R in _u_splits(others[j], color, "u"):
            appended = R.concat(Q).concat(u).concat(w_full)
            rhs = rhs - genus_value(g, rest + [appended])
        for Q, R in _u_splits(others[j], color, "u^-1"):
            appended = R.concat(Q).concat(p_last)
            rhs = rhs + genus_value(g, rest + [appended])
    return lhs, rhs


def _tutte_corollary_sides(
    g: int, words: tuple[NCWord, ...], color: int
) -> tuple[TraceExpression, TraceExpression]:
    l = len(words)
    others = words[:-1]
    w_full = words[-1]
    derivative = nc_derivative(w_full, color)
    lhs = TraceExpression.zero()
    idx = list(range(l - 1))
    for (w1, w2), c in derivative.terms.items():
        for size in range(l):
            for I in itertools.combinations(idx, size):
                Ic = [i for i in idx if i not in I]
                left = [others[i] for i in I]
                right = [others[i] for i in Ic]
                for g1 in range(g + 1):
                    g2 = g - g1
                    lhs = lhs + (
                        genus_value(g1, left + [w1]) * genus_value(g2, right + [w2])
                    ) * c
    rhs = TraceExpression.zero()
    for (w1, w2), c in derivative.terms.items():
        if g >= 1:
            rhs = rhs - genus_value(g - 1, list(others) + [w1, w2]) * c
    for j in range(l - 1):
        rest = [others[i] for i in range(l - 1) if i != j]
        dpj = cyclic_derivative(others[j], color)
        appended = dpj * NCPolynomial.from_word(w_full)
        rhs = rhs - _genus_multilinear(g, rest + [appended])
    return lhs, rhs


def _tutte_potential_sides(
    g: int, words: tuple[NCWord, ...], color: int, V: Potential, z_cap: int
) -> tuple[dict, dict]:
    l = len(words)
    others = list(words[:-1])
    w_full = words[-1]
    k = V.k
    derivative = nc_derivative(w_full, color)
    zero = {n: TraceExpression.zero() for n in _multi_indices(k, z_cap)}
    lhs = dict(zero)
    idx = list(range(l - 1))
    for (w1, w2), c in derivative.terms.items():
        for size in range(l):
            for I in itertools.combinations(idx, size):
                Ic = [i for i in idx if i not in I]
                left = [others[i] for i in I]
                right = [others[i] for i in Ic]
                for g1 in range(g + 1):
                    g2 = g - g1
                    prod = _series_mul(
                        _series_cumulant(g1, left + [w1], V, z_cap),
                        _series_cumulant(g2, right + [w2], V, z_cap),
                        k,
                        z_cap,
                    )
                    lhs = _series_add(lhs, {n: v * c for n, v in prod.items()})
    # + M_V(P_1 … P_{l-1}, (D V)·P_l): z_t shifts the multi-index by one
    for t in range(k):
        dq = cyclic_derivative(V.monomials[t], color)
        term_poly = dq * NCPolynomial.from_word(w_full) * V.coefficients[t]
        series = {}
        for n in _multi_indices(k, z_cap):
            slots: list = []
            scale = GaussianRational(Fraction(1, _multi_factorial(n)), 0)
            for s, reps in enumerate(n):
                for _ in range(reps):
                    slots.append(V.monomials[s])
                    scale = scale * V.coefficients[s]
            slots.extend(others + [term_poly])
            series[n] = _genus_multilinear(g, slots) * scale
        lhs = _series_add(lhs, _series_shift(series, t, k, z_cap))
    rhs = dict(zero)
    for (w1, w2), c in derivative.terms.items():
        if g >= 1:
            part = _series_cumulant(g - 1, others + [w1, w2], V, z_cap)
            rhs = _series_add(rhs, {n: -(v * c) for n, v in part.items()})
    for j in range(l - 1):
        rest = [others[i] for i in range(l - 1) if i != j]
        dpj = cyclic_derivative(others[j], color)
        appended = dpj * NCPolynomial.from_word(w_full)
        part = _series_cumulant(g, rest + [appended], V, z_cap)
        rhs = _series_add(rhs, _series_neg(part))
    return lhs, rhs


def canonical_word_tuples(
    max_total_degree: int,
    max_l: int,
    *,
    n_colors: int = 1,
    require_all_colors: bool = False,
) -> list[tuple[NCWord, ...]]:
    """Word tuples realizing every unitary sign pattern up to a degree cap.

    One tuple is produced for each length ``l <= max_l``, each composition of
    each total unitary degree ``<= max_total_degree`` into ``l`` positive
    parts, each sign pattern whose final letter is an uninverted unitary, and
    (for ``n_colors > 1``) each color assignment; a fresh deterministic letter
    is inserted before every unitary letter, pairwise distinct across the
    tuple.  Trace rotations and the adjoint map every other monomial tuple
    onto this family, and substituting words (or 1) for the generic
    deterministic letters recovers arbitrary insertions, so exact identity
    checks over this family cover the general monomial case.
    """
    out: list[tuple[NCWord, ...]] = []
    for total in range(1, max_total_degree + 1):
        for l in range(1, min(max_l, total) + 1):
            for comp in _compositions(total - l, l):
                degrees = tuple(c + 1 for c in comp)
                for signs in itertools.product((1, -1), repeat=total):
                    if signs[-1] != 1:
                        continue
                    for coloring in itertools.product(
                        range(1, n_colors + 1), repeat=total
                    ):
                        if require_all_colors and len(set(coloring)) < n_colors:
                            continue
                        words = []
                        pos = 0
                        det = 1
                        for d in degrees:
                            letters: list[Letter] = []
                            for _ in range(d):
                                letters.append(Letter("a", det))
                                det += 1
                                kind = "u" if signs[pos] == 1 else "u^-1"
                                letters.append(Letter(kind, coloring[pos]))
                                pos += 1
                            words.append(NCWord(letters))
                        out.append(tuple(words))
    return out


def tutte_check(
    g: int,
    P: Sequence[NCWord],
    *,
    color: int = 1,
    form: str = "theorem",
    potential: Potential | None = None,
    z_cap: int = 1,
    max_work: int | None = None,
) -> TutteCheckResult:
    """Verify the induction identity on a tuple whose last word ends in
    ``u<color>``.

    ``form="theorem"`` compares the direct genus coefficient against the
    four groups of factorization terms; ``form="corollary"`` compares the two
    sides of the tensor-derivative formulation.  With a ``potential`` the
    z-series formulation is checked coefficient-wise up to total order
    ``z_cap`` and the sides are dictionaries keyed by multi-index.
    """
    words = _as_words(P)
    if not words:
        raise ValueError("need a nonempty tuple")
    _check_last_word_ends_with_u(words, color)
    if potential is not None:
        if max_work is not None:
            heaviest = max(potential.monomials, key=lambda q: q.degree())
            _guard_words((heaviest,) * z_cap + words, max_work)
        lhs, rhs = _tutte_potential_sides(g, words, color, potential, z_cap)
        equal = all(lhs[n] == rhs[n] for n in lhs)
        return TutteCheckResult(lhs, rhs, equal, "potential")
    _guard_words(words, max_work)
    if form == "theorem":
        lhs, rhs = _tutte_theorem_sides(g, words, color)
    elif form == "corollary":
        lhs, rhs = _tutte_corollary_sides(g, words, color)
    else:
        raise ValueError(f"unknown form {form!r}")
    return TutteCheckResult(lhs, rhs, lhs == rhs, form)


# ---------------------------------------------------------------------------
# Alternated words and the Hurwitz reduction
# ---------------------------------------------------------------------------


class AlternationError(ValueError):
    """Raised when a word is not an alternation ``B₁uC₁u⁻¹···B_muC_mu⁻¹``."""


def alternated_parts(word: NCWord) -> tuple[list[NCWord], list[NCWord], int]:
    """Split ``B₁ u C₁ u⁻¹ ··· B_m u C_m u⁻¹`` into (B-words, C-words, color)."""
    B: list[NCWord] = []
    C: list[NCWord] = []
    color: int | None = None
    run: list[Letter] = []
    state = "B"  # expecting deterministic letters then u
    for ltr in word.letters:
        if not ltr.is_unitary:
            run.append(ltr)
            continue
        if color is None:
            color = ltr.index
        if ltr.index != color:
            raise AlternationError("alternated words must use a single unitary color")
        if state == "B":
            if ltr.kind != "u":
                raise AlternationError(f"expected u{color}, found {ltr.token()}")
            B.append(NCWord(run))
            run = []
            state = "C"
        else:
            if ltr.kind != "u^-1":
                raise AlternationError(f"expected u{color}^-1, found {ltr.token()}")
            C.append(NCWord(run))
            run = []
            state = "B"
    if state != "B" or run or not B:
        raise AlternationError(
            f"word {word.format()!r} is not an alternation B u C u^-1 …"
        )
    return B, C, color


def hurwitz_reduction(
    g: int, P: Sequence[NCWord], *, max_work: int | None = None
) -> TraceExpression:
    """Genus coefficient of a tuple of alternated words via monotone triple
    Hurwitz numbers:

    ``(−1)^{m+l} Σ_{ρ,σ∈S_m} (−1)^{c(ρ)+c(σ)} tr_ρ(B) tr_σ(C) · h_g(ρ⁻¹, γ̃, σ⁻¹)``

    where ``γ̃`` is the product of consecutive cycles of lengths ``m_i`` and
    ``m = Σ m_i``.  Must agree with :func:`genus_value` on the same input.
    """
    words = _as_words(P)
    if not words:
        raise ValueError("need a nonempty tuple")
    B: list[NCWord] = []
    C: list[NCWord] = []
    block_lengths = []
    colors = set()
    for w in words:
        b, c, col = alternated_parts(w)
        B.extend(b)
        C.extend(c)
        block_lengths.append(len(b))
        colors.add(col)
    if len(colors) > 1:
        raise AlternationError("all alternated words must share one unitary color")
    m = len(B)
    l = len(words)
    _check_budget(math.factorial(m) ** 2, max_work)
    cycles = []
    start = 1
    for length in block_lengths:
        cycles.append(tuple(range(start, start + length)))
        start += length
    gamma_tilde = Permutation.from_cycles(cycles, range(1, m + 1))
    total = TraceExpression.zero()
    for rho in all_permutations(range(1, m + 1)):
        rho_inv = rho.inverse()
        tr_rho = trace_of_permutation(rho, B)
        sign_rho = rho.cycle_count()
        for sigma in all_permutations(range(1, m + 1)):
            h = monotone_hurwitz_by_genus(rho_inv, gamma_tilde, sigma.inverse(), g)
            if h == 0:
                continue
            sign = -1 if (sign_rho + sigma.cycle_count()) % 2 else 1
            total = total + (tr_rho * trace_of_permutation(sigma, C)) * Fraction(
                sign * h
            )
    overall = -1 if (m + l) % 2 else 1
    return total * Fraction(overall)


# ---------------------------------------------------------------------------
# Norm bounds (with exact rational stand-ins for the analytic constants)
# ---------------------------------------------------------------------------


def _sqrt_bounds(x: Fraction, digits: int = 15) -> tuple[Fraction, Fraction]:
    scale = 10**digits
    lo = math.isqrt((x.numerator * scale * scale) // x.denominator)
    lower = Fraction(lo, scale)
    upper = Fraction(lo + 1, scale)
    assert lower * lower <= x <= upper * upper
    return lower, upper


_PI_LOWER = Fraction(314159265358979, 10**14)  # < pi
_PI_UPPER = Fraction(314159265358980, 10**14)  # > pi
_E_LOWER = Fraction(271828182845904, 10**14)  # < e
_E_UPPER = Fraction(271828182845905, 10**14)  # > e


def _exp_bounds(t: Fraction, terms: int = 25) -> tuple[Fraction, Fraction]:
    """Exact rational bracket of e^t for 0 < t < 1 via the Taylor series."""
    assert 0 < t < 1
    partial = Fraction(0)
    term = Fraction(1)
    for i in range(terms):
        partial += term
        term = term * t / (i + 1)
    tail_bound = term / (1 - t)  # geometric bound on the remainder
    return partial, partial + tail_bound


def bound_constants(k: int, nu: int) -> dict[str, tuple[Fraction, Fraction]]:
    """Exact rational brackets for the constants of the norm bound."""
    sqrt6_lo, sqrt6_hi = _sqrt_bounds(Fraction(6))
    # fourth root of pi via two square roots of a bracket of pi
    pi4_lo = _sqrt_bounds(_sqrt_bounds(_PI_LOWER)[0])[0]
    pi4_hi = _sqrt_bounds(_sqrt_bounds(_PI_UPPER)[1])[1]
    A_lo = Fraction(2 ** (k + 3)) * sqrt6_lo * pi4_lo
    A_hi = Fraction(2 ** (k + 3)) * sqrt6_hi * pi4_hi
    B = Fraction(3 * 4 ** (k + 1))
    einv_lo = 1 / _E_UPPER
    einv_hi = 1 / _E_LOWER
    exp_lo = _exp_bounds(einv_lo)[0]
    exp_hi = _exp_bounds(einv_hi)[1]
    D_lo = Fraction(4 * k) * (4 * exp_lo) ** nu
    D_hi = Fraction(4 * k) * (4 * exp_hi) ** nu
    return {
        "A": (A_lo, A_hi),
        "B": (B, B),
        "C": (A_lo, A_hi),
        "D": (D_lo, D_hi),
    }


def _catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def bounds_check(
    g: int,
    l: int,
    n: Sequence[int],
    P: Sequence[NCWord],
    q: Sequence[NCWord],
) -> tuple[Fraction, Fraction, bool]:
    """Check the uniform norm bound on a genus coefficient with potential
    insertions.

    The left side bounds ``(1/n!)·|coefficient|`` by the triangle inequality
    (sum of coefficient moduli: every normalized trace of contractions has
    modulus at most 1).  The right side is
    ``A^{l(m+ν|n|)}·B^{−l}·C^{g(m+ν|n|)}·D^{|n|}·∏ c_{deg P_i}·∏ c_{n_j}``
    evaluated with exact rational lower bounds of the constants, so a
    ``holds`` verdict is conservative.  Here ``m`` is the total unitary
    degree of ``P`` and ``ν`` the maximal degree in ``q``.
    """
    words = _as_words(P)
    q_words = _as_words(q)
    n = tuple(int(x) for x in n)
    if len(n) != len(q_words):
        raise ValueError("multi-index length must match the number of potential terms")
    if len(words) != l:
        raise ValueError("l must equal the number of arguments")
    k = max(1, len(q_words))
    nu = max((w.degree() for w in q_words), default=1)
    slots: list[NCWord] = []
    for t, reps in enumerate(n):
        slots.extend([q_words[t]] * reps)
    slots.extend(words)
    value = genus_value(g, slots)
    lhs = value.norm_upper_bound() / _multi_factorial(n)
    consts = bound_constants(k, nu)
    A_lo = consts["A"][0]
    B = consts["B"][0]
    D_lo = consts["D"][0]
    m_total = sum(w.degree() for w in words)
    n_total = sum(n)
    exponent = m_total + nu * n_total
    rhs = (
        A_lo ** (l * exponent)
        * Fraction(1, B**l)
        * A_lo ** (g * exponent)
        * D_lo**n_total
    )
    for w in words:
        rhs *= _catalan(w.degree())
    for x in n:
        rhs *= _catalan(x)
    return lhs, rhs, lhs <= rhs


def formal_radius(k: int, nu: int) -> Fraction:
    """A guaranteed rational lower bound for the reported convergence radius
    ``min(½(4AD)⁻¹, 1/(2kν·ξ^ν))`` with ``ξ = 4A + 2^{k+2}/B``."""
    consts = bound_constants(k, nu)
    A_hi = consts["A"][1]
    B = consts["B"][0]
    D_hi = consts["D"][1]
    xi_hi = 4 * A_hi + Fraction(2 ** (k + 2)) / B
    first = Fraction(1, 2) / (4 * A_hi * D_hi)
    second = Fraction(1) / (2 * k * nu * xi_hi**nu)
    return min(first, second)


# ---------------------------------------------------------------------------
# Master operator (transport) identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MasterCheckResult:
    lhs: TraceExpression
    rhs: TraceExpression
    equal: bool


TraceFunctional = Callable[[NCWord], TraceExpression]


def genus_zero_functional(word: NCWord) -> TraceExpression:
    """The planar one-argument coefficient as a functional on words."""
    return genus_value(0, (word,))


def _second_order_image(
    word: NCWord, tau: TraceFunctional, colors: Iterable[int]
) -> dict[NCWord, TraceExpression]:
    """``(Id⊗τ + τ⊗Id)`` applied to the summed second-order operator."""
    out: dict[NCWord, TraceExpression] = {}
    for color in colors:
        lap = reduced_laplacian(word, color)
        for (w1, w2), c in lap.terms.items():
            t2 = tau(w2) * c
            if not t2.is_zero():
                out[w1] = out.get(w1, TraceExpression.zero()) + t2
            t1 = tau(w1) * c
            if not t1.is_zero():
                out[w2] = out.get(w2, TraceExpression.zero()) + t1
    return {w: v for w, v in out.items() if not v.is_zero()}


def transport_image(
    word: NCWord,
    tau: TraceFunctional,
    colors: Iterable[int] | None = None,
    *,
    project: bool = True,
) -> dict[NCWord, TraceExpression]:
    """Degree-normalized second-order image ``T̄_τ`` of a word (summed over
    the given unitary colors, defaulting to all colors present), optionally
    followed by the projection onto unitary degree ≥ 1."""
    total_deg = word.degree()
    if total_deg == 0:
        return {}
    if colors is None:
        colors = word.unitary_colors()
    image = _second_order_image(word, tau, colors)
    scale = Fraction(1, total_deg)
    out = {}
    for w, v in image.items():
        if project and w.degree() == 0:
            continue
        out[w] = v * scale
    return out


def master_operator_check(
    P1: NCWord, P2: NCWord, *, max_work: int | None = None
) -> MasterCheckResult:
    """Verify the planar second-order identity

    ``M⁰_{0,2}(P₁ ⊗ (Id + Π T̄_τ) P₂) = −M⁰_{0,1}(Σ_i (D_i P₁)(D_i P₂)/deg P₂)``

    with ``τ`` the planar one-argument functional and the operators summed
    over all unitary colors.  Exact trace-expression equality is returned;
    ``P₂`` must have unitary degree ≥ 1.
    """
    if not isinstance(P1, NCWord) or not isinstance(P2, NCWord):
        raise TypeError("master_operator_check expects words")
    if P2.degree() == 0:
        raise ValueError("the second word must have unitary degree >= 1")
    _guard_words((P1, P2), max_work)
    all_colors = sorted(set(P1.unitary_colors()) | set(P2.unitary_colors()))
    xi_image: dict[NCWord, TraceExpression] = {P2: TraceExpression.constant(1)}
    for w, v in transport_image(P2, genus_zero_functional, all_colors).items():
        xi_image[w] = xi_image.get(w, TraceExpression.zero()) + v
    lhs = TraceExpression.zero()
    for w, v in xi_image.items():
        lhs = lhs + genus_value(0, (P1, w)) * v
    pbar = NCPolynomial.zero()
    for color in all_colors:
        pbar = pbar + cyclic_derivative(P1, color) * cyclic_derivative(P2, color)
    pbar = pbar * Fraction(1, P2.degree())
    rhs = TraceExpression.zero()
    for word, c in pbar.terms.items():
        rhs = rhs + genus_value(0, (word,)) * c
    rhs = -rhs
    return MasterCheckResult(lhs, rhs, lhs == rhs)


def _cyclic_tensor_canonical(tp: TensorPolynomial) -> dict[tuple, GaussianRational]:
    """Canonical form of a tensor polynomial modulo the unitary relations and
    cyclic rotation in each leg — the quotient every bilinear form tracial in
    both variables sees."""
    out: dict[tuple, GaussianRational] = {}
    for (w1, w2), c in tp.terms.items():
        key = (
            w1.cyclic_reduce().min_rotation().letters,
            w2.cyclic_reduce().min_rotation().letters,
        )
        acc = out.get(key, GaussianRational(0, 0)) + c
        if acc.is_zero():
            out.pop(key, None)
        else:
            out[key] = acc
    return out


def gradient_trick_check(P: NCWord, color: int) -> bool:
    """Check the decomposition of the derivative of the cyclic derivative:

    ``∂_i D_i P = deg⁺_i(P)·(P⊗1) + deg⁻_i(P)·(1⊗P) + Δ_i P``

    an identity in the algebra where the unitary generators satisfy their
    relations; both sides are compared modulo word reduction and cyclic
    rotation in each tensor leg (the form in which every tracial bilinear
    pairing sees them).
    """
    lhs = nc_derivative(cyclic_derivative(P, color), color)
    rhs = TensorPolynomial.zero()
    plus = P.degree_signed(color, +1)
    minus = P.degree_signed(color, -1)
    if plus:
        rhs = rhs + TensorPolynomial.from_pair(P, EMPTY_WORD).scale(Fraction(plus))
    if minus:
        rhs = rhs + TensorPolynomial.from_pair(EMPTY_WORD, P).scale(Fraction(minus))
    rhs = rhs + reduced_laplacian(P, color)
    return _cyclic_tensor_canonical(lhs) == _cyclic_tensor_canonical(rhs)


def operator_norm_bound_check(
    tau: TraceFunctional,
    xi1,
    xi2,
    samples: Sequence["NCPolynomial | NCWord"],
    *,
    tau_norm=Fraction(1),
) -> bool:
    """Check ``‖T̄_τ P‖_{ξ₂} ≤ 2‖τ‖_{ξ₁}·ξ₁/(ξ₂−ξ₁)·‖P‖_{ξ₂}`` on samples.

    ``tau_norm`` must be an upper bound for the functional's ``ξ₁``-operator
    norm (1 for the constant-one functional).  Coefficient moduli use the
    exact surrogate |re|+|im|, an upper bound, so the left side is never
    underestimated.
    """
    xi1 = Fraction(xi1)
    xi2 = Fraction(xi2)
    if not (1 <= xi1 < xi2):
        raise ValueError("need 1 <= xi1 < xi2")
    factor = 2 * Fraction(tau_norm) * xi1 / (xi2 - xi1)
    for sample in samples:
        poly = (
            sample
            if isinstance(sample, NCPolynomial)
            else NCPolynomial.from_word(sample)
        ).reduce()
        image: dict[NCWord, TraceExpression] = {}
        for word, coeff in poly.terms.items():
            for w, v in transport_image(word, tau, project=False).items():
                w = w.reduce()
                image[w] = image.get(w, TraceExpression.zero()) + v * coeff
        lhs = Fraction(0)
        for w, v in image.items():
            lhs += v.norm_upper_bound() * xi2 ** w.degree()
        if lhs > factor * xi_norm(poly, xi2):
            return False
    return True
