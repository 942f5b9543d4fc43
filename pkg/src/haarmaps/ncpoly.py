"""Noncommutative polynomials in unitary and deterministic letters, with exact
Gaussian-rational coefficients, plus the trace-expression algebra.

The algebra has letters ``u_i`` / ``u_i^-1`` (unitary colors ``i``) and
``a_j`` / ``a_j*`` (deterministic indices ``j``).  There is **no** rewriting:
``u u^-1`` is kept as a length-2 word.  The unitary degree of a word counts
its unitary-type letters only.

Provided here:

* :class:`GaussianRational` — exact complex numbers with rational real and
  imaginary parts;
* :class:`Letter`, :class:`NCWord`, :class:`NCPolynomial` — the free algebra;
* :class:`WordDecomposition` / :func:`decompose` — the canonical splitting of
  a word into deterministic runs between unitary letters, with its sign vector
  and color map;
* :func:`nc_derivative`, :func:`cyclic_derivative`,
  :func:`reduced_laplacian` — the derivations used by the recursion checks;
* :func:`xi_norm` — weighted one-norms ``sum |coeff| * xi^deg``;
* :class:`TraceExpression` and helpers — exact linear combinations of
  products of normalized traces of cyclic words, with numeric and exact
  evaluation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .perm_core import Permutation, SignVector

__all__ = [
    "GaussianRational",
    "Letter",
    "NCWord",
    "EMPTY_WORD",
    "NCPolynomial",
    "WordDecomposition",
    "DeterministicWordError",
    "TensorPolynomial",
    "TraceExpression",
    "decompose",
    "gamma_of_tuple",
    "nc_derivative",
    "cyclic_derivative",
    "reduced_laplacian",
    "xi_norm",
    "trace_of_permutation",
    "evaluate_trace_expression",
    "parse_word",
    "format_word",
]


RationalLike = "Fraction | int | str"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class GaussianRational:
    """An exact complex number ``re + im*i`` with rational ``re`` and ``im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"cannot coerce {value!r} to GaussianRational")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse ``p/q`` or ``p/q+r/si`` (also ``-…`` and ``p/q-r/si``)."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError("empty coefficient")
        if s.endswith("i") or s.endswith("I"):
            body = s[:-1]
            # split into real part and imaginary part at the last +/- that is
            # not the leading sign
            for k in range(len(body) - 1, 0, -1):
                if body[k] in "+-":
                    re_part, im_part = body[:k], body[k:]
                    break
            else:
                re_part, im_part = "0", body
            if im_part in ("", "+"):
                im_part = "1"
            elif im_part == "-":
                im_part = "-1"
            return cls(Fraction(re_part), Fraction(im_part))
        return cls(Fraction(s), 0)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other) -> "GaussianRational":
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other) -> "GaussianRational":
        return GaussianRational.coerce(other) + (-self)

    def __mul__(self, other) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        denom = o.re * o.re + o.im * o.im
        if denom == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / denom,
            (self.im * o.re - self.re * o.im) / denom,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def norm_upper(self) -> Fraction:
        """``|re| + |im|``: an exact upper bound for the modulus."""
        return abs(self.re) + abs(self.im)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    # -- comparison / rendering ----------------------------------------------

    def __eq__(self, other) -> bool:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        im_txt = f"{self.im}i"
        if self.im >= 0:
            return f"{self.re}+{im_txt}"
        return f"{self.re}-{abs(self.im)}i"

    def __repr__(self) -> str:
        return f"GaussianRational({self})"

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_json(cls, data) -> "GaussianRational":
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return cls(_parse_rational(data[0]), _parse_rational(data[1]))
        if isinstance(data, (int, str)):
            return cls(_parse_rational(data), 0)
        raise ValueError(f"cannot read coefficient from {data!r}")


def _parse_rational(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        frac = Fraction(x).limit_denominator(10**12)
        if float(frac) != x:
            raise ValueError(f"non-exact float coefficient {x!r}")
        return frac
    if isinstance(x, str):
        return Fraction(x)
    raise ValueError(f"cannot read rational from {x!r}")


ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)


# ---------------------------------------------------------------------------
# Letters and words
# ---------------------------------------------------------------------------

_KIND_RANK = {"a": 0, "a*": 1, "u": 2, "u^-1": 3}
_LETTER_RE = re.compile(r"^(u|a)(\d+)(\^-1|\*)?$")


@dataclass(frozen=True)
class Letter:
    """A single generator: ``u_i``, ``u_i^-1``, ``a_j`` or ``a_j*``."""

    kind: str  # one of "u", "u^-1", "a", "a*"
    index: int

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown letter kind {self.kind!r}")
        if not (isinstance(self.index, int) and self.index >= 1):
            raise ValueError("letter index must be a positive integer")

    @property
    def is_unitary(self) -> bool:
        return self.kind in ("u", "u^-1")

    @property
    def sign(self) -> int:
        """+1 for ``u``, -1 for ``u^-1``; errors on deterministic letters."""
        if self.kind == "u":
            return 1
        if self.kind == "u^-1":
            return -1
        raise ValueError("deterministic letters carry no sign")

    def adjoint(self) -> "Letter":
        swap = {"u": "u^-1", "u^-1": "u", "a": "a*", "a*": "a"}
        return Letter(swap[self.kind], self.index)

    def token(self) -> str:
        if self.kind == "u":
            return f"u{self.index}"
        if self.kind == "u^-1":
            return f"u{self.index}^-1"
        if self.kind == "a":
            return f"a{self.index}"
        return f"a{self.index}*"

    @classmethod
    def from_token(cls, token: str) -> "Letter":
        m = _LETTER_RE.match(token)
        if not m:
            raise ValueError(f"invalid letter token {token!r}")
        base, idx, suffix = m.group(1), int(m.group(2)), m.group(3)
        if base == "u":
            if suffix == "^-1":
                return cls("u^-1", idx)
            if suffix is None:
                return cls("u", idx)
            raise ValueError(f"invalid letter token {token!r}")
        if suffix == "*":
            return cls("a*", idx)
        if suffix is None:
            return cls("a", idx)
        raise ValueError(f"invalid letter token {token!r}")

    def sort_key(self) -> tuple[int, int]:
        return (_KIND_RANK[self.kind], self.index)

    def __repr__(self) -> str:
        return self.token()


class NCWord:
    """An immutable word in the free algebra; the empty word is the unit."""

    __slots__ = ("letters", "_hash")

    def __init__(self, letters: Iterable[Letter] = ()):
        object.__setattr__(self, "letters", tuple(letters))
        for ltr in self.letters:
            if not isinstance(ltr, Letter):
                raise TypeError("NCWord letters must be Letter instances")
        object.__setattr__(self, "_hash", hash(self.letters))

    def __setattr__(self, name, value):
        raise AttributeError("NCWord is immutable")

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, k):
        picked = self.letters[k]
        if isinstance(picked, tuple):
            return NCWord(picked)
        return picked

    def is_empty(self) -> bool:
        return not self.letters

    def is_deterministic(self) -> bool:
        """True when the word has no unitary-type letters (degree 0)."""
        return all(not ltr.is_unitary for ltr in self.letters)

    def degree(self, color: int | None = None) -> int:
        """Unitary degree: number of ``u``/``u^-1`` letters (of one color if given)."""
        return sum(
            1
            for ltr in self.letters
            if ltr.is_unitary and (color is None or ltr.index == color)
        )

    def degree_signed(self, color: int, sign: int) -> int:
        """Number of unitary letters of ``color`` with the given exponent sign."""
        kind = "u" if sign == 1 else "u^-1"
        return sum(1 for ltr in self.letters if ltr.kind == kind and ltr.index == color)

    def unitary_colors(self) -> tuple[int, ...]:
        return tuple(sorted({ltr.index for ltr in self.letters if ltr.is_unitary}))

    def deterministic_indices(self) -> tuple[int, ...]:
        return tuple(sorted({ltr.index for ltr in self.letters if not ltr.is_unitary}))

    # -- algebra -------------------------------------------------------------

    def concat(self, other: "NCWord") -> "NCWord":
        return NCWord(self.letters + other.letters)

    __mul__ = concat

    def adjoint(self) -> "NCWord":
        return NCWord(tuple(ltr.adjoint() for ltr in reversed(self.letters)))

    def rotate(self, k: int) -> "NCWord":
        """Cyclic left rotation: move the first ``k`` letters to the end."""
        n = len(self.letters)
        if n == 0:
            return self
        k %= n
        return NCWord(self.letters[k:] + self.letters[:k])

    def rotations(self) -> list["NCWord"]:
        return [self.rotate(k) for k in range(max(1, len(self.letters)))]

    def min_rotation(self) -> "NCWord":
        """Lexicographically minimal cyclic rotation (canonical cyclic form)."""
        if len(self.letters) <= 1:
            return self
        return min(self.rotations(), key=lambda w: w.sort_key())

    def substitute(self, replacements: Mapping[int, "NCWord"]) -> "NCWord":
        """Replace each ``a_j`` by ``replacements[j]`` (and ``a_j*`` by its adjoint)."""
        out: list[Letter] = []
        for ltr in self.letters:
            if ltr.kind == "a" and ltr.index in replacements:
                out.extend(replacements[ltr.index].letters)
            elif ltr.kind == "a*" and ltr.index in replacements:
                out.extend(replacements[ltr.index].adjoint().letters)
            else:
                out.append(ltr)
        return NCWord(out)

    def reduce(self) -> "NCWord":
        """Cancel adjacent mutually inverse unitary letters (``u_c u_c⁻¹``
        and ``u_c⁻¹ u_c``) until none remain.  Deterministic letters never
        cancel.  This is the normal form in the algebra where the unitary
        generators satisfy their defining relations."""
        stack: list[Letter] = []
        for ltr in self.letters:
            if (
                stack
                and ltr.is_unitary
                and stack[-1].is_unitary
                and stack[-1].index == ltr.index
                and stack[-1].kind != ltr.kind
            ):
                stack.pop()
            else:
                stack.append(ltr)
        return NCWord(stack)

    def cyclic_reduce(self) -> "NCWord":
        """Reduce, then also cancel mutually inverse unitary letters across
        the word boundary (the normal form seen by tracial functionals)."""
        word = self.reduce()
        letters = list(word.letters)
        while (
            len(letters) >= 2
            and letters[0].is_unitary
            and letters[-1].is_unitary
            and letters[0].index == letters[-1].index
            and letters[0].kind != letters[-1].kind
        ):
            letters = letters[1:-1]
        return NCWord(letters)

    # -- rendering / ordering --------------------------------------------------

    def sort_key(self) -> tuple:
        return tuple(ltr.sort_key() for ltr in self.letters)

    def format(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(ltr.token() for ltr in self.letters)

    def __repr__(self) -> str:
        return f"NCWord({self.format()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCWord):
            return NotImplemented
        return self.letters == other.letters

    def __lt__(self, other: "NCWord") -> bool:
        return (len(self.letters), self.sort_key()) < (
            len(other.letters),
            other.sort_key(),
        )

    def __hash__(self) -> int:
        return self._hash


EMPTY_WORD = NCWord()


def parse_word(text: str) -> NCWord:
    """Parse whitespace-separated letter tokens; ``"1"`` is the empty word."""
    stripped = text.strip()
    if stripped in ("", "1"):
        return EMPTY_WORD
    letters = []
    pos = 0
    for token in stripped.split():
        try:
            letters.append(Letter.from_token(token))
        except ValueError as exc:
            raise ValueError(
                f"syntax error at position {text.index(token, pos)}: {exc}"
            ) from exc
        pos = text.index(token, pos) + len(token)
    return NCWord(letters)


def format_word(word: NCWord) -> str:
    return word.format()


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class NCPolynomial:
    """A finite linear combination of words with GaussianRational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[NCWord, GaussianRational] | None = None):
        clean: dict[NCWord, GaussianRational] = {}
        if terms:
            for word, coeff in terms.items():
                c = GaussianRational.coerce(coeff)
                if not c.is_zero():
                    clean[word] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("NCPolynomial is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> "NCPolynomial":
        return cls({})

    @classmethod
    def one(cls) -> "NCPolynomial":
        return cls({EMPTY_WORD: ONE})

    @classmethod
    def from_word(cls, word: NCWord, coeff=1) -> "NCPolynomial":
        return cls({word: GaussianRational.coerce(coeff)})

    @classmethod
    def parse(cls, text: str) -> "NCPolynomial":
        """Parse ``coeff * word + coeff * word - …``; bare words mean coeff 1."""
        tokens = text.split()
        if not tokens:
            return cls.zero()
        terms: dict[NCWord, GaussianRational] = {}
        # split the token stream into chunks at '+' / '-' separators
        chunks: list[tuple[int, list[str]]] = []
        sign = 1
        current: list[str] = []
        started = False
        for tok in tokens:
            if tok in ("+", "-") and started and current:
                chunks.append((sign, current))
                sign = 1 if tok == "+" else -1
                current = []
            elif tok in ("+", "-") and not current:
                sign *= 1 if tok == "+" else -1
                started = True
            else:
                current.append(tok)
                started = True
        if current:
            chunks.append((sign, current))
        for sgn, chunk in chunks:
            coeff = GaussianRational(sgn, 0)
            words = chunk
            if "*" in chunk:
                star = chunk.index("*")
                if star != 1:
                    raise ValueError(f"malformed term {' '.join(chunk)!r}")
                coeff = coeff * GaussianRational.parse(chunk[0])
                words = chunk[2:]
            word = parse_word(" ".join(words)) if words else EMPTY_WORD
            prev = terms.get(word, ZERO)
            terms[word] = prev + coeff
        return cls(terms)

    # -- ring operations -------------------------------------------------------

    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            out[word] = out.get(word, ZERO) + coeff
        return NCPolynomial(out)

    def __neg__(self) -> "NCPolynomial":
        return NCPolynomial({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "NCPolynomial":
        if isinstance(other, NCPolynomial):
            out: dict[NCWord, GaussianRational] = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    w = w1.concat(w2)
                    out[w] = out.get(w, ZERO) + c1 * c2
            return NCPolynomial(out)
        coeff = GaussianRational.coerce(other)
        return NCPolynomial({w: c * coeff for w, c in self.terms.items()})

    __rmul__ = __mul__

    def scale(self, coeff) -> "NCPolynomial":
        return self * GaussianRational.coerce(coeff)

    def adjoint(self) -> "NCPolynomial":
        return NCPolynomial(
            {w.adjoint(): c.conjugate() for w, c in self.terms.items()}
        )

    def substitute(self, replacements: Mapping[int, NCWord]) -> "NCPolynomial":
        out: dict[NCWord, GaussianRational] = {}
        for word, coeff in self.terms.items():
            w = word.substitute(replacements)
            out[w] = out.get(w, ZERO) + coeff
        return NCPolynomial(out)

    def reduce(self) -> "NCPolynomial":
        """Reduce every monomial (cancel inverse unitary pairs) and combine."""
        out: dict[NCWord, GaussianRational] = {}
        for word, coeff in self.terms.items():
            w = word.reduce()
            out[w] = out.get(w, ZERO) + coeff
        return NCPolynomial(out)

    # -- queries ----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> list[tuple[NCWord, GaussianRational]]:
        """Terms sorted deterministically by word."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0].sort_key()))

    def degree(self) -> int:
        """Maximal unitary degree over the monomials (0 for the zero polynomial)."""
        return max((w.degree() for w in self.terms), default=0)

    # -- rendering / JSON ---------------------------------------------------------

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for word, coeff in self.monomials():
            parts.append(f"{coeff} * {word.format()}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"NCPolynomial({self.format()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def to_json(self) -> dict:
        return {
            "terms": [
                {"coeff": coeff.to_json(), "word": [ltr.token() for ltr in word]}
                for word, coeff in self.monomials()
            ]
        }

    @classmethod
    def from_json(cls, data) -> "NCPolynomial":
        if isinstance(data, str):
            data = json.loads(data)
        terms: dict[NCWord, GaussianRational] = {}
        for entry in data.get("terms", []):
            coeff = GaussianRational.from_json(entry["coeff"])
            word = NCWord([Letter.from_token(tok) for tok in entry["word"]])
            terms[word] = terms.get(word, ZERO) + coeff
        return cls(terms)


# ---------------------------------------------------------------------------
# Canonical decomposition of a word
# ---------------------------------------------------------------------------


class DeterministicWordError(ValueError):
    """Raised when a degree-0 (deterministic-only) word is decomposed."""


@dataclass(frozen=True)
class WordDecomposition:
    """The unique splitting ``M_1 u^{ε(1)}_{t(1)} ··· M_d u^{ε(d)}_{t(d)}``.

    ``rotated`` is the cyclic rotation of the input that ends with a unitary
    letter; the splitting refers to that rotation.  ``rotation`` is the left
    rotation amount that was applied.
    """

    M: tuple[NCWord, ...]
    eps: SignVector
    colors: tuple[int, ...]
    rotated: NCWord
    rotation: int

    @property
    def d(self) -> int:
        return len(self.M)

    def color_map(self) -> dict[int, int]:
        return {k + 1: self.colors[k] for k in range(len(self.colors))}

    def reassemble(self) -> NCWord:
        """Rebuild the rotated word from the splitting."""
        letters: list[Letter] = []
        for k in range(self.d):
            letters.extend(self.M[k].letters)
            kind = "u" if self.eps(k + 1) == 1 else "u^-1"
            letters.append(Letter(kind, self.colors[k]))
        return NCWord(letters)


def rotate_to_unitary_end(word: NCWord) -> tuple[NCWord, int]:
    """The minimal left rotation of ``word`` that ends with a unitary letter."""
    if word.degree() == 0:
        raise DeterministicWordError(
            f"word {word.format()!r} has no unitary letters (degree 0)"
        )
    if word.letters[-1].is_unitary:
        return word, 0
    first_unitary = next(
        i for i, ltr in enumerate(word.letters) if ltr.is_unitary
    )
    k = first_unitary + 1
    return word.rotate(k), k


def decompose(word: NCWord) -> WordDecomposition:
    """Split a word into deterministic runs between its unitary letters.

    The word is first rotated (minimally, allowed by traciality) to end with a
    unitary letter; degree-0 words are rejected with
    :class:`DeterministicWordError`.
    """
    rotated, k = rotate_to_unitary_end(word)
    M: list[NCWord] = []
    signs: list[int] = []
    colors: list[int] = []
    run: list[Letter] = []
    for ltr in rotated.letters:
        if ltr.is_unitary:
            M.append(NCWord(run))
            run = []
            signs.append(ltr.sign)
            colors.append(ltr.index)
        else:
            run.append(ltr)
    assert not run  # the rotation guarantees a unitary final letter
    eps = SignVector.from_sequence(signs)
    return WordDecomposition(tuple(M), eps, tuple(colors), rotated, k)


def gamma_of_tuple(words: Sequence[NCWord]) -> Permutation:
    """Product of consecutive full cycles of lengths ``deg P_1, deg P_2, …``."""
    degrees = [w.degree() for w in words]
    if any(d == 0 for d in degrees):
        raise DeterministicWordError("every word in the tuple must have degree >= 1")
    total = sum(degrees)
    cycles = []
    start = 1
    for d in degrees:
        cycles.append(tuple(range(start, start + d)))
        start += d
    return Permutation.from_cycles(cycles, range(1, total + 1))


# ---------------------------------------------------------------------------
# Tensor polynomials (elements of A ⊗ A)
# ---------------------------------------------------------------------------


class TensorPolynomial:
    """A linear combination of ordered pairs of words (an element of A⊗A)."""

    __slots__ = ("terms",)

    def __init__(
        self, terms: Mapping[tuple[NCWord, NCWord], GaussianRational] | None = None
    ):
        clean: dict[tuple[NCWord, NCWord], GaussianRational] = {}
        if terms:
            for pair, coeff in terms.items():
                c = GaussianRational.coerce(coeff)
                if not c.is_zero():
                    clean[pair] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TensorPolynomial is immutable")

    @classmethod
    def zero(cls) -> "TensorPolynomial":
        return cls({})

    @classmethod
    def from_pair(cls, left: NCWord, right: NCWord, coeff=1) -> "TensorPolynomial":
        return cls({(left, right): GaussianRational.coerce(coeff)})

    def __add__(self, other: "TensorPolynomial") -> "TensorPolynomial":
        out = dict(self.terms)
        for pair, coeff in other.terms.items():
            out[pair] = out.get(pair, ZERO) + coeff
        return TensorPolynomial(out)

    def __neg__(self) -> "TensorPolynomial":
        return TensorPolynomial({p: -c for p, c in self.terms.items()})

    def __sub__(self, other: "TensorPolynomial") -> "TensorPolynomial":
        return self + (-other)

    def scale(self, coeff) -> "TensorPolynomial":
        c = GaussianRational.coerce(coeff)
        return TensorPolynomial({p: v * c for p, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def pairs(self) -> list[tuple[tuple[NCWord, NCWord], GaussianRational]]:
        return sorted(
            self.terms.items(),
            key=lambda kv: (
                len(kv[0][0]),
                kv[0][0].sort_key(),
                len(kv[0][1]),
                kv[0][1].sort_key(),
            ),
        )

    def multiply_sides(self, left: "NCPolynomial", right: "NCPolynomial") -> None:
        raise NotImplementedError  # not needed; kept out intentionally

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(
            f"{c} * ({a.format()} ⊗ {b.format()})" for (a, b), c in self.pairs()
        )
        return f"TensorPolynomial({body or '0'})"


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------


def _word_nc_derivative(word: NCWord, color: int) -> TensorPolynomial:
    out = TensorPolynomial.zero()
    letters = word.letters
    for pos, ltr in enumerate(letters):
        if not ltr.is_unitary or ltr.index != color:
            continue
        prefix = NCWord(letters[:pos])
        suffix = NCWord(letters[pos + 1 :])
        if ltr.kind == "u":
            left = prefix.concat(NCWord([ltr]))
            out = out + TensorPolynomial.from_pair(left, suffix, 1)
        else:
            right = NCWord([ltr]).concat(suffix)
            out = out + TensorPolynomial.from_pair(prefix, right, -1)
    return out


def nc_derivative(P: "NCPolynomial | NCWord", color: int) -> TensorPolynomial:
    """Free difference quotient in color ``color``:
    ``∂P = Σ_{P=QuR} Qu⊗R − Σ_{P=Qu⁻¹R} Q⊗u⁻¹R``, extended linearly."""
    if isinstance(P, NCWord):
        return _word_nc_derivative(P, color)
    out = TensorPolynomial.zero()
    for word, coeff in P.terms.items():
        out = out + _word_nc_derivative(word, color).scale(coeff)
    return out


def _word_cyclic_derivative(word: NCWord, color: int) -> NCPolynomial:
    out: dict[NCWord, GaussianRational] = {}
    letters = word.letters
    for pos, ltr in enumerate(letters):
        if not ltr.is_unitary or ltr.index != color:
            continue
        Q = letters[:pos]
        R = letters[pos + 1 :]
        if ltr.kind == "u":
            w = NCWord(R + Q + (ltr,))
            out[w] = out.get(w, ZERO) + ONE
        else:
            w = NCWord((ltr,) + R + Q)
            out[w] = out.get(w, ZERO) - ONE
    return NCPolynomial(out)


def cyclic_derivative(P: "NCPolynomial | NCWord", color: int) -> NCPolynomial:
    """Cyclic derivative in color ``color``:
    ``DP = Σ_{P=QuR} RQu − Σ_{P=Qu⁻¹R} u⁻¹RQ``, extended linearly."""
    if isinstance(P, NCWord):
        return _word_cyclic_derivative(P, color)
    out = NCPolynomial.zero()
    for word, coeff in P.terms.items():
        out = out + _word_cyclic_derivative(word, color) * coeff
    return out


def _unitary_splits(word: NCWord, color: int, kind: str):
    """Factorizations ``word = Q1 · letter · Q2`` with the given letter kind/color."""
    letters = word.letters
    for pos, ltr in enumerate(letters):
        if ltr.kind == kind and ltr.index == color:
            yield NCWord(letters[:pos]), NCWord(letters[pos + 1 :])


def reduced_laplacian(P: NCWord, color: int) -> TensorPolynomial:
    """Second-order operator pairing every two unitary letters of one color.

    For each outer split ``P = P₁·x·P₂`` with ``x`` unitary of the color, the
    rotated remainder ``P₂P₁`` is split again at every unitary letter of the
    color, producing the four sign patterns of tensor terms.
    """
    if not isinstance(P, NCWord):
        raise TypeError("reduced_laplacian expects a single word")
    u_letter = Letter("u", color)
    u_inv = Letter("u^-1", color)
    out = TensorPolynomial.zero()
    for P1, P2 in _unitary_splits(P, color, "u"):
        inner = P2.concat(P1)
        for Q1, Q2 in _unitary_splits(inner, color, "u"):
            out = out + TensorPolynomial.from_pair(
                Q1.concat(NCWord([u_letter])), Q2.concat(NCWord([u_letter])), 1
            )
        for Q1, Q2 in _unitary_splits(inner, color, "u^-1"):
            out = out + TensorPolynomial.from_pair(Q1, Q2, -1)
    for P1, P2 in _unitary_splits(P, color, "u^-1"):
        inner = P2.concat(P1)
        for Q1, Q2 in _unitary_splits(inner, color, "u"):
            out = out + TensorPolynomial.from_pair(Q1, Q2, -1)
        for Q1, Q2 in _unitary_splits(inner, color, "u^-1"):
            out = out + TensorPolynomial.from_pair(
                NCWord([u_inv]).concat(Q1), NCWord([u_inv]).concat(Q2), 1
            )
    return out


# ---------------------------------------------------------------------------
# Weighted norms
# ---------------------------------------------------------------------------


def xi_norm(P: "NCPolynomial | NCWord", xi) -> Fraction:
    """``Σ_monomials |coeff| · ξ^deg`` with the exact surrogate |re|+|im| for |coeff|."""
    xi = _as_fraction(xi)
    if xi < 1:
        raise ValueError("xi must be >= 1")
    if isinstance(P, NCWord):
        return xi ** P.degree()
    total = Fraction(0)
    for word, coeff in P.terms.items():
        total += coeff.norm_upper() * xi ** word.degree()
    return total


# ---------------------------------------------------------------------------
# Trace expressions
# ---------------------------------------------------------------------------


def _canonical_multiset(words: Iterable[NCWord]) -> tuple[NCWord, ...]:
    """Canonical key: min-rotation of each word, empty words dropped, sorted."""
    canon = [w.min_rotation() for w in words if not w.is_empty()]
    canon.sort(key=lambda w: (len(w), w.sort_key()))
    return tuple(canon)


class TraceExpression:
    """An exact linear combination of products of normalized traces.

    Keys are multisets of cyclic words (canonicalized by minimal rotation);
    the empty multiset is the constant 1.  ``tr`` is the normalized trace, so
    ``tr(1) = 1`` and empty words simply disappear from keys.
    """

    __slots__ = ("terms",)

    def __init__(
        self,
        terms: Mapping[tuple[NCWord, ...], GaussianRational] | None = None,
        *,
        _canonical: bool = False,
    ):
        clean: dict[tuple[NCWord, ...], GaussianRational] = {}
        if terms:
            for key, coeff in terms.items():
                c = GaussianRational.coerce(coeff)
                if c.is_zero():
                    continue
                k = key if _canonical else _canonical_multiset(key)
                prev = clean.get(k)
                if prev is None:
                    clean[k] = c
                else:
                    s = prev + c
                    if s.is_zero():
                        del clean[k]
                    else:
                        clean[k] = s
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TraceExpression is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> "TraceExpression":
        return cls({})

    @classmethod
    def constant(cls, coeff) -> "TraceExpression":
        return cls({(): GaussianRational.coerce(coeff)}, _canonical=True)

    @classmethod
    def single(cls, words: Iterable[NCWord], coeff=1) -> "TraceExpression":
        return cls({tuple(words): GaussianRational.coerce(coeff)})

    # -- ring operations --------------------------------------------------------

    def __add__(self, other) -> "TraceExpression":
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = TraceExpression.constant(other)
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            prev = out.get(key)
            s = coeff if prev is None else prev + coeff
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return TraceExpression(out, _canonical=True)

    __radd__ = __add__

    def __neg__(self) -> "TraceExpression":
        return TraceExpression(
            {k: -c for k, c in self.terms.items()}, _canonical=True
        )

    def __sub__(self, other) -> "TraceExpression":
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = TraceExpression.constant(other)
        return self + (-other)

    def __mul__(self, other) -> "TraceExpression":
        if isinstance(other, TraceExpression):
            out: dict[tuple[NCWord, ...], GaussianRational] = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    key = _canonical_multiset(k1 + k2)
                    prev = out.get(key, ZERO)
                    s = prev + c1 * c2
                    if s.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = s
            return TraceExpression(out, _canonical=True)
        coeff = GaussianRational.coerce(other)
        if coeff.is_zero():
            return TraceExpression.zero()
        return TraceExpression(
            {k: c * coeff for k, c in self.terms.items()}, _canonical=True
        )

    __rmul__ = __mul__

    def scale(self, coeff) -> "TraceExpression":
        return self * coeff

    def conjugate(self) -> "TraceExpression":
        """Complex conjugation: conjugate coefficients, adjoint each cyclic word."""
        out: dict[tuple[NCWord, ...], GaussianRational] = {}
        for key, coeff in self.terms.items():
            new_key = _canonical_multiset(w.adjoint() for w in key)
            out[new_key] = out.get(new_key, ZERO) + coeff.conjugate()
        return TraceExpression(out, _canonical=True)

    # -- queries ------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_part(self) -> GaussianRational:
        return self.terms.get((), ZERO)

    def norm_upper_bound(self) -> Fraction:
        """Σ over terms of |coeff| (each normalized trace has modulus ≤ 1
        whenever every substituted matrix is a contraction)."""
        return sum((c.norm_upper() for c in self.terms.values()), Fraction(0))

    def items(self) -> list[tuple[tuple[NCWord, ...], GaussianRational]]:
        return sorted(
            self.terms.items(),
            key=lambda kv: (
                len(kv[0]),
                tuple((len(w), w.sort_key()) for w in kv[0]),
            ),
        )

    # -- rendering ------------------------------------------------------------------

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key, coeff in self.items():
            factors = " ".join(f"tr({w.format()})" for w in key)
            if factors:
                parts.append(f"{coeff} * {factors}")
            else:
                parts.append(str(coeff))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"TraceExpression({self.format()!r})"

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = TraceExpression.constant(other)
        if not isinstance(other, TraceExpression):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset((k, c.re, c.im) for k, c in self.terms.items()))

    def to_json(self) -> dict:
        return {
            "terms": [
                {
                    "coeff": coeff.to_json(),
                    "traces": [[ltr.token() for ltr in w] for w in key],
                }
                for key, coeff in self.items()
            ],
            "render": self.format(),
        }

    @classmethod
    def from_json(cls, data) -> "TraceExpression":
        if isinstance(data, str):
            data = json.loads(data)
        terms: dict[tuple[NCWord, ...], GaussianRational] = {}
        for entry in data.get("terms", []):
            coeff = GaussianRational.from_json(entry["coeff"])
            words = tuple(
                NCWord([Letter.from_token(tok) for tok in toks])
                for toks in entry["traces"]
            )
            key = _canonical_multiset(words)
            terms[key] = terms.get(key, ZERO) + coeff
        return cls(terms, _canonical=True)


def trace_of_permutation(sigma: Permutation, M: Sequence[NCWord]) -> TraceExpression:
    """``∏_{cycles c of σ} tr(M_{i₁}M_{i₂}···)`` reading indices along each cycle."""
    if sigma.domain != tuple(range(1, len(M) + 1)):
        raise ValueError(
            f"permutation domain {sigma.domain} does not index a tuple of length {len(M)}"
        )
    words = []
    for cycle in sigma.cycles():
        letters: list[Letter] = []
        for idx in cycle:
            letters.extend(M[idx - 1].letters)
        words.append(NCWord(letters))
    return TraceExpression.single(words, 1)


def evaluate_trace_expression(T: TraceExpression, A: Mapping[int, "object"], N: int):
    """Numerically evaluate: substitute ``A[j]`` for ``a_j``, normalized traces.

    ``A`` maps deterministic indices to ``N×N`` arrays (anything numpy can
    multiply).  The zero expression evaluates to 0.
    """
    import numpy as np

    mats: dict[int, "np.ndarray"] = {}
    for j, mat in A.items():
        arr = np.asarray(mat, dtype=complex)
        if arr.shape != (N, N):
            raise ValueError(f"matrix for a{j} has shape {arr.shape}, expected ({N},{N})")
        mats[j] = arr
    total = 0j
    for key, coeff in T.terms.items():
        value = complex(1)
        for word in key:
            prod = np.eye(N, dtype=complex)
            for ltr in word.letters:
                if ltr.is_unitary:
                    raise ValueError(
                        "trace expression contains unitary letters; substitute first"
                    )
                if ltr.index not in mats:
                    raise ValueError(f"no matrix supplied for a{ltr.index}")
                m = mats[ltr.index]
                prod = prod @ (m.conj().T if ltr.kind == "a*" else m)
            value *= np.trace(prod) / N
        total += coeff.to_complex() * value
    return total


# -- exact evaluation (rational matrices) ------------------------------------


def _exact_matmul(A, B):
    n = len(A)
    zero = GaussianRational(0, 0)
    out = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for k in range(n):
            aik = Ai[k]
            if aik.is_zero():
                continue
            Bk = B[k]
            for j in range(n):
                if not Bk[j].is_zero():
                    row[j] = row[j] + aik * Bk[j]
    return out


def _exact_adjoint(A):
    n = len(A)
    return [[A[j][i].conjugate() for j in range(n)] for i in range(n)]


def evaluate_trace_expression_exact(
    T: TraceExpression, A: Mapping[int, Sequence[Sequence[GaussianRational]]], N: int
) -> GaussianRational:
    """Exact evaluation over GaussianRational matrices (normalized traces)."""
    mats = {}
    for j, mat in A.items():
        rows = [[GaussianRational.coerce(x) for x in row] for row in mat]
        if len(rows) != N or any(len(r) != N for r in rows):
            raise ValueError(f"matrix for a{j} is not {N}x{N}")
        mats[j] = rows
    total = GaussianRational(0, 0)
    identity = [
        [GaussianRational(1 if i == j else 0, 0) for j in range(N)] for i in range(N)
    ]
    for key, coeff in T.terms.items():
        value = GaussianRational(1, 0)
        for word in key:
            prod = identity
            for ltr in word.letters:
                if ltr.is_unitary:
                    raise ValueError(
                        "trace expression contains unitary letters; substitute first"
                    )
                m = mats[ltr.index]
                prod = _exact_matmul(prod, _exact_adjoint(m) if ltr.kind == "a*" else m)
            trace = GaussianRational(0, 0)
            for i in range(N):
                trace = trace + prod[i][i]
            value = value * (trace / GaussianRational(N, 0))
        total = total + coeff * value
    return total
