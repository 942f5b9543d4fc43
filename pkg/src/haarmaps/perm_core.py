"""Permutations on finite integer label sets, sign vectors, and transpositions.

This module supplies the combinatorial backbone of the package: immutable
permutations on arbitrary finite sets of positive integers, their cycle
machinery (decomposition, counting, conjugation), sign vectors with the
associated class of sign-compatible permutations, the squared restriction of a
sign-compatible permutation to the +1 labels, and the first-return (trace)
restriction of a permutation to a subset of its domain.

Label sets are arbitrary finite subsets of the positive integers, not just
``{1, .., n}``, because several constructions restrict permutations to a label
set with holes.  Domains are stored sorted; all values are immutable and all
operations are pure functions, so everything here is safe for concurrent use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Permutation",
    "SignVector",
    "Transposition",
    "compose",
    "conjugate",
    "cycle_decomposition",
    "is_sign_compatible",
    "pi_eps",
    "trace_restrict",
    "all_permutations",
    "sign_compatible_permutations",
]


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


class Permutation:
    """An immutable bijection of a finite set of positive integers onto itself.

    Equality includes the domain: comparing permutations that live on
    different domains raises ``ValueError`` rather than returning ``False``,
    so accidental cross-domain comparisons surface as errors.
    """

    __slots__ = ("_domain", "_images", "_lookup", "_hash")

    def __init__(self, mapping: Mapping[int, int]):
        domain = tuple(sorted(mapping))
        if not all(isinstance(x, int) and x > 0 for x in domain):
            raise ValueError("domain must consist of positive integers")
        images = tuple(mapping[x] for x in domain)
        if sorted(images) != list(domain):
            raise ValueError("mapping is not a bijection of its domain")
        self._domain = domain
        self._images = images
        self._lookup = dict(zip(domain, images))
        self._hash = hash((domain, images))

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, domain: Iterable[int]) -> "Permutation":
        """The identity permutation on ``domain``."""
        return cls({x: x for x in domain})

    @classmethod
    def from_one_line(cls, images: Sequence[int], domain: Iterable[int]) -> "Permutation":
        """Build from images listed against the sorted domain."""
        dom = tuple(sorted(domain))
        if len(images) != len(dom):
            raise ValueError("one-line form length does not match domain size")
        return cls(dict(zip(dom, images)))

    @classmethod
    def from_cycles(
        cls, cycles: Iterable[Sequence[int]], domain: Iterable[int]
    ) -> "Permutation":
        """Build from a list of cycles; labels absent from the cycles are fixed."""
        mapping = {x: x for x in domain}
        for cycle in cycles:
            if len(set(cycle)) != len(cycle):
                raise ValueError(f"repeated label in cycle {tuple(cycle)}")
            for x in cycle:
                if x not in mapping:
                    raise ValueError(f"cycle label {x} outside domain")
            for a, b in zip(cycle, tuple(cycle[1:]) + (cycle[0],)):
                mapping[a] = b
        return cls(mapping)

    @classmethod
    def from_cycle_string(cls, text: str, domain: Iterable[int]) -> "Permutation":
        """Parse cycle notation such as ``"(1 3 4 6)(2 5)"``; ``"()"`` is the identity."""
        stripped = text.replace(" ", "").replace(",", "")
        body = _CYCLE_RE.sub("", stripped)
        if body:
            raise ValueError(f"invalid cycle notation: {text!r}")
        cycles = []
        for group in _CYCLE_RE.findall(text):
            tokens = [tok for tok in re.split(r"[,\s]+", group.strip()) if tok]
            if not tokens:
                continue
            try:
                cycles.append([int(tok) for tok in tokens])
            except ValueError as exc:
                raise ValueError(f"invalid cycle notation: {text!r}") from exc
        return cls.from_cycles(cycles, domain)

    # -- basic queries -----------------------------------------------------

    @property
    def domain(self) -> tuple[int, ...]:
        return self._domain

    def __call__(self, x: int) -> int:
        try:
            return self._lookup[x]
        except KeyError:
            raise KeyError(f"label {x} not in domain {self._domain}") from None

    def one_line(self) -> tuple[int, ...]:
        """Images listed against the sorted domain."""
        return self._images

    def as_dict(self) -> dict[int, int]:
        return dict(self._lookup)

    def is_identity(self) -> bool:
        return self._domain == self._images

    def __len__(self) -> int:
        return len(self._domain)

    # -- algebra -----------------------------------------------------------

    def compose(self, other: "Permutation") -> "Permutation":
        """``(self.compose(other))(x) == self(other(x))`` — apply ``other`` first."""
        if self._domain != other._domain:
            raise ValueError("cannot compose permutations on different domains")
        return Permutation({x: self._lookup[other._lookup[x]] for x in self._domain})

    def __mul__(self, other: "Permutation") -> "Permutation":
        return self.compose(other)

    def inverse(self) -> "Permutation":
        return Permutation({img: x for x, img in self._lookup.items()})

    def power(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse().power(-k)
        result = Permutation.identity(self._domain)
        base = self
        while k:
            if k & 1:
                result = base.compose(result)
            base = base.compose(base)
            k >>= 1
        return result

    def restrict(self, subset: Iterable[int]) -> "Permutation":
        """Plain restriction to an invariant subset; errors if not invariant."""
        sub = set(subset)
        if not sub <= set(self._domain):
            raise ValueError("subset not contained in domain")
        mapping = {}
        for x in sub:
            y = self._lookup[x]
            if y not in sub:
                raise ValueError(f"subset is not invariant: {x} maps to {y}")
            mapping[x] = y
        return Permutation(mapping)

    # -- cycles ------------------------------------------------------------

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Cycle decomposition: each cycle starts at its minimum, list sorted by minimum."""
        seen: set[int] = set()
        out = []
        for start in self._domain:  # sorted, so cycles come out ordered by minimum
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            y = self._lookup[start]
            while y != start:
                cycle.append(y)
                seen.add(y)
                y = self._lookup[y]
            out.append(tuple(cycle))
        return tuple(out)

    def cycle_count(self) -> int:
        """Number of cycles, fixed points included."""
        return len(self.cycles())

    def cycle_type(self) -> tuple[int, ...]:
        """Cycle lengths sorted decreasingly (a partition of the domain size)."""
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def orbit(self, x: int) -> tuple[int, ...]:
        out = [x]
        y = self._lookup[x]
        while y != x:
            out.append(y)
            y = self._lookup[y]
        return tuple(out)

    def fixed_points(self) -> tuple[int, ...]:
        return tuple(x for x in self._domain if self._lookup[x] == x)

    # -- rendering / comparison --------------------------------------------

    def to_cycle_string(self) -> str:
        """Cycle notation, e.g. ``"(1 3 4 6)(2 5)"``; identity renders as ``"()"``."""
        nontrivial = [c for c in self.cycles() if len(c) > 1]
        if not nontrivial:
            return "()"
        return "".join("(" + " ".join(str(x) for x in c) + ")" for c in nontrivial)

    def __repr__(self) -> str:
        return f"Permutation({self.to_cycle_string()} on {self._domain})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        if self._domain != other._domain:
            raise ValueError(
                "cannot compare permutations on different domains: "
                f"{self._domain} vs {other._domain}"
            )
        return self._images == other._images

    def __hash__(self) -> int:
        return self._hash


class SignVector:
    """A map from a finite label set to ``{+1, -1}``."""

    __slots__ = ("_domain", "_signs", "_lookup")

    def __init__(self, signs: Mapping[int, int]):
        domain = tuple(sorted(signs))
        values = tuple(signs[x] for x in domain)
        if not all(v in (1, -1) for v in values):
            raise ValueError("signs must be +1 or -1")
        self._domain = domain
        self._signs = values
        self._lookup = dict(zip(domain, values))

    @classmethod
    def from_sequence(
        cls, values: Sequence[int], labels: Iterable[int] | None = None
    ) -> "SignVector":
        """Signs listed against sorted ``labels`` (default ``1..len(values)``)."""
        if labels is None:
            labels = range(1, len(values) + 1)
        dom = tuple(sorted(labels))
        if len(dom) != len(values):
            raise ValueError("number of signs does not match number of labels")
        return cls(dict(zip(dom, values)))

    @classmethod
    def from_string(cls, text: str, labels: Iterable[int] | None = None) -> "SignVector":
        """Parse a compact string of ``+``/``-`` characters."""
        values = []
        for ch in text:
            if ch == "+":
                values.append(1)
            elif ch == "-":
                values.append(-1)
            else:
                raise ValueError(f"invalid sign character {ch!r}")
        return cls.from_sequence(values, labels)

    @property
    def domain(self) -> tuple[int, ...]:
        return self._domain

    def __call__(self, x: int) -> int:
        return self._lookup[x]

    def values(self) -> tuple[int, ...]:
        return self._signs

    def plus_labels(self) -> tuple[int, ...]:
        return tuple(x for x in self._domain if self._lookup[x] == 1)

    def minus_labels(self) -> tuple[int, ...]:
        return tuple(x for x in self._domain if self._lookup[x] == -1)

    def is_balanced(self) -> bool:
        return len(self.plus_labels()) == len(self.minus_labels())

    def restrict(self, subset: Iterable[int]) -> "SignVector":
        sub = set(subset)
        if not sub <= set(self._domain):
            raise ValueError("subset not contained in domain")
        return SignVector({x: self._lookup[x] for x in sub})

    def to_string(self) -> str:
        return "".join("+" if v == 1 else "-" for v in self._signs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignVector):
            return NotImplemented
        return self._domain == other._domain and self._signs == other._signs

    def __hash__(self) -> int:
        return hash((self._domain, self._signs))

    def __repr__(self) -> str:
        return f"SignVector({self.to_string()} on {self._domain})"


@dataclass(frozen=True, order=True)
class Transposition:
    """An unordered pair of distinct labels, ordered internally as ``low < high``."""

    low: int
    high: int

    def __init__(self, i: int, j: int):
        if i == j:
            raise ValueError("a transposition needs two distinct labels")
        object.__setattr__(self, "low", min(i, j))
        object.__setattr__(self, "high", max(i, j))

    @property
    def value(self) -> int:
        """The larger of the two labels."""
        return self.high

    def apply(self, x: int) -> int:
        if x == self.low:
            return self.high
        if x == self.high:
            return self.low
        return x

    def as_pair(self) -> tuple[int, int]:
        return (self.low, self.high)

    def to_permutation(self, domain: Iterable[int]) -> Permutation:
        return Permutation.from_cycles([(self.low, self.high)], domain)

    def __repr__(self) -> str:
        return f"({self.low} {self.high})"


# -- module-level operations -----------------------------------------------


def compose(a: Permutation, b: Permutation) -> Permutation:
    """Composition ``(a∘b)(x) = a(b(x))`` — ``b`` acts first."""
    return a.compose(b)


def conjugate(sigma: Permutation, g: Permutation) -> Permutation:
    """``g⁻¹ ∘ sigma ∘ g``; preserves the cycle type."""
    if sigma.domain != g.domain:
        raise ValueError("cannot conjugate permutations on different domains")
    g_inv = g.inverse()
    return g_inv.compose(sigma).compose(g)


def cycle_decomposition(sigma: Permutation) -> list[tuple[int, ...]]:
    """Cycles of ``sigma``, each from its smallest element, sorted by smallest element."""
    return list(sigma.cycles())


def is_sign_compatible(pi: Permutation, eps: SignVector) -> bool:
    """True iff ``pi`` maps the +1 labels onto the -1 labels (and conversely)."""
    if pi.domain != eps.domain:
        raise ValueError("permutation and sign vector live on different domains")
    plus = eps.plus_labels()
    minus = set(eps.minus_labels())
    if len(plus) != len(minus):
        return False
    return all(pi(x) in minus for x in plus)


def pi_eps(pi: Permutation, eps: SignVector) -> Permutation:
    """The square of a sign-compatible permutation restricted to the +1 labels."""
    if not is_sign_compatible(pi, eps):
        raise ValueError("permutation is not sign-compatible with the sign vector")
    return Permutation({x: pi(pi(x)) for x in eps.plus_labels()})


def trace_restrict(sigma: Permutation, subset: Iterable[int]) -> Permutation:
    """First-return map of ``sigma`` on ``subset``.

    Each ``x`` in ``subset`` is sent to the first point of its forward
    ``sigma``-orbit that lies in ``subset`` again; the result is a bijection
    of ``subset``.
    """
    sub = sorted(set(subset))
    if not sub:
        raise ValueError("subset must be nonempty")
    if not set(sub) <= set(sigma.domain):
        raise ValueError("subset not contained in domain")
    members = set(sub)
    mapping = {}
    for x in sub:
        y = sigma(x)
        while y not in members:
            y = sigma(y)
        mapping[x] = y
    return Permutation(mapping)


def all_permutations(labels: Iterable[int]) -> Iterator[Permutation]:
    """All permutations of ``labels`` in lexicographic one-line order."""
    import itertools

    dom = tuple(sorted(labels))
    for images in itertools.permutations(dom):
        yield Permutation.from_one_line(images, dom)


def sign_compatible_permutations(
    eps: SignVector, colors: Mapping[int, int] | None = None
) -> Iterator[Permutation]:
    """All permutations mapping the +1 labels onto the -1 labels and conversely.

    With ``colors`` given (a map label -> color), only permutations preserving
    every color class are produced.  Output is in lexicographic one-line order.
    The stream is empty when any (per-color) sign count is unbalanced.
    """
    dom = eps.domain
    if colors is not None and set(colors) != set(dom):
        raise ValueError("color map must cover exactly the sign vector's domain")

    def candidates(x: int) -> list[int]:
        want_sign = -eps(x)
        return [
            y
            for y in dom
            if eps(y) == want_sign and (colors is None or colors[y] == colors[x])
        ]

    cand = {x: candidates(x) for x in dom}
    n = len(dom)
    used: set[int] = set()
    images: list[int] = []

    def extend(i: int) -> Iterator[Permutation]:
        if i == n:
            yield Permutation(dict(zip(dom, images)))
            return
        for y in cand[dom[i]]:
            if y not in used:
                used.add(y)
                images.append(y)
                yield from extend(i + 1)
                images.pop()
                used.remove(y)

    yield from extend(0)
