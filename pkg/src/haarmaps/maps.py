"""Maps of unitary type stored as permutational data, the embedded-structure
bijection, diagnostics (faces, genus, connectivity), enumeration, and the two
cutting surgeries.

A map is determined by a label set ``I`` of even size (the white half-edges),
a white-vertex rotation ``ρ``, a sign vector ``ε`` (outgoing/ingoing), a color
for every label, a pairing permutation ``π`` sign-compatible with ``ε``, and
one monotone walk per color whose product equals the square of ``π``
restricted to that color's ``+1`` labels.  Black vertices have degree 4 with
alternating orientations and are numbered per color in walk order.

The embedded picture (half-edge rotation ``σ̃`` and edge involution ``α``) is
materialized only for label propagation and for the bijection round-trip;
genus is always computed from the Euler relation
``2·components − 2·genus = c(ρ) + c(φ) − m − r`` with ``φ = ρ⁻¹∘π⁻¹``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .perm_core import (
    Permutation,
    SignVector,
    Transposition,
    is_sign_compatible,
    pi_eps,
    sign_compatible_permutations,
    trace_restrict,
)
from .walks import MonotoneWalk, enumerate_monotone_walks, is_transitive

__all__ = [
    "UnitaryTypeMap",
    "MapDiagnostics",
    "EmbeddedStructure",
    "build_map",
    "to_perm_data",
    "embedded_structure",
    "propagate_labels",
    "recover_perm_data",
    "diagnostics",
    "enumerate_maps",
    "cut_white",
    "cut_black",
    "relabel_map",
    "map_to_json",
    "map_from_json",
    "EnumerationBudgetError",
]


class EnumerationBudgetError(RuntimeError):
    """Raised when an enumeration would exceed the requested work cap."""


@dataclass(frozen=True)
class UnitaryTypeMap:
    """Permutational data of a map of unitary type (possibly multicolored)."""

    labels: tuple[int, ...]
    rho: Permutation
    eps: SignVector
    colors: tuple[int, ...]  # aligned with sorted labels
    pi: Permutation
    walks: Mapping[int, MonotoneWalk]  # one walk per color

    def color_of(self, label: int) -> int:
        return self.colors[self.labels.index(label)]

    def color_map(self) -> dict[int, int]:
        return dict(zip(self.labels, self.colors))

    def all_colors(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.colors)))

    def black_count(self) -> dict[int, int]:
        return {c: len(self.walks[c].steps) if c in self.walks else 0
                for c in self.all_colors()}

    def total_blacks(self) -> int:
        return sum(len(w.steps) for w in self.walks.values())

    def step_transpositions(self) -> list[Permutation]:
        out = []
        for c in sorted(self.walks):
            for t in self.walks[c].steps:
                out.append(t.to_permutation(self.labels))
        return out


@dataclass(frozen=True)
class MapDiagnostics:
    phi: Permutation
    genus: int
    connected: bool
    nondecreasing: bool
    black_count: Mapping[int, int]
    components: int


def _plus_labels_of_color(eps: SignVector, colors: Mapping[int, int], c: int):
    return tuple(x for x in eps.plus_labels() if colors[x] == c)


def build_map(
    rho: Permutation,
    eps: SignVector,
    colors: Mapping[int, int] | Sequence[int],
    pi: Permutation,
    walks: Mapping[int, "MonotoneWalk | Sequence[Sequence[int]]"],
) -> UnitaryTypeMap:
    """Validate permutational data and assemble a map.

    ``colors`` maps labels to colors (a sequence is read against the sorted
    label set); ``walks`` maps each color to its monotone walk, given either
    as a :class:`MonotoneWalk` or as a sequence of label pairs.
    """
    labels = rho.domain
    if eps.domain != labels:
        raise ValueError("eps must live on the same labels as rho")
    if pi.domain != labels:
        raise ValueError("pi must live on the same labels as rho")
    if len(labels) % 2 != 0:
        raise ValueError("the label set must have even size")
    if isinstance(colors, Mapping):
        color_map = {x: colors[x] for x in labels}
    else:
        if len(colors) != len(labels):
            raise ValueError("color sequence length must match the label count")
        color_map = dict(zip(labels, colors))
    if not is_sign_compatible(pi, eps):
        raise ValueError("pi is not sign-compatible with eps")
    for x in labels:
        if color_map[pi(x)] != color_map[x]:
            raise ValueError("pi must preserve colors")
    wanted_colors = tuple(sorted(set(color_map.values())))
    walk_objs: dict[int, MonotoneWalk] = {}
    for c in wanted_colors:
        plus_c = _plus_labels_of_color(eps, color_map, c)
        raw = walks.get(c, ())
        if isinstance(raw, MonotoneWalk):
            walk = raw
            if walk.labels != tuple(sorted(plus_c)):
                walk = MonotoneWalk(walk.steps, plus_c)
        else:
            steps = tuple(Transposition(int(i), int(j)) for i, j in raw)
            walk = MonotoneWalk(steps, plus_c)  # raises if not monotone
        target = pi_eps(pi, eps).restrict(plus_c) if plus_c else None
        if plus_c:
            if walk.product().one_line() != target.one_line():
                raise ValueError(
                    f"color-{c} walk does not compose to the squared restriction of pi"
                )
        elif walk.steps:
            raise ValueError(f"color {c} has no +1 labels but a nonempty walk")
        walk_objs[c] = walk
    extra = set(walks) - set(wanted_colors)
    if any(
        (w.steps if isinstance(w, MonotoneWalk) else tuple(w))
        for c, w in walks.items()
        if c in extra
    ):
        raise ValueError(f"walks given for colors without labels: {sorted(extra)}")
    color_seq = tuple(color_map[x] for x in labels)
    return UnitaryTypeMap(labels, rho, eps, color_seq, pi, walk_objs)


def to_perm_data(m: UnitaryTypeMap) -> dict:
    """The stored permutational data as a plain dictionary."""
    return {
        "labels": m.labels,
        "rho": m.rho,
        "eps": m.eps,
        "colors": m.color_map(),
        "pi": m.pi,
        "walks": {c: tuple(w.steps) for c, w in m.walks.items()},
    }


# ---------------------------------------------------------------------------
# Embedded structure and label propagation
# ---------------------------------------------------------------------------

HalfEdge = tuple  # ("w", label) or ("b", color, k, slot)


@dataclass(frozen=True)
class EmbeddedStructure:
    """The half-edge picture: rotation ``sigma``, edge involution ``alpha``,
    half-edge orientations, and the labels' colors."""

    half_edges: tuple[HalfEdge, ...]
    sigma: Mapping[HalfEdge, HalfEdge]
    alpha: Mapping[HalfEdge, HalfEdge]
    orientation: Mapping[HalfEdge, int]  # +1 outgoing, -1 ingoing
    label_colors: Mapping[int, int]

    def faces(self) -> list[tuple[HalfEdge, ...]]:
        """Cycles of the face permutation ``h ↦ σ̃⁻¹(α(h))``."""
        sigma_inv = {v: k for k, v in self.sigma.items()}
        nxt = {h: sigma_inv[self.alpha[h]] for h in self.half_edges}
        seen: set[HalfEdge] = set()
        out = []
        for start in self.half_edges:
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            h = nxt[start]
            while h != start:
                cyc.append(h)
                seen.add(h)
                h = nxt[h]
            out.append(tuple(cyc))
        return out


def embedded_structure(m: UnitaryTypeMap) -> EmbeddedStructure:
    """Materialize half-edges, rotation and gluing from the permutational data.

    White half-edges are ``("w", label)``; black vertex ``k`` of color ``c``
    contributes ``("b", c, k, 1..4)`` with slots 1 and 3 ingoing, 2 and 4
    outgoing, in rotation order 1→2→3→4.
    """
    color_map = m.color_map()
    half_edges: list[HalfEdge] = [("w", x) for x in m.labels]
    sigma: dict[HalfEdge, HalfEdge] = {}
    orientation: dict[HalfEdge, int] = {}
    for x in m.labels:
        sigma[("w", x)] = ("w", m.rho(x))
        orientation[("w", x)] = m.eps(x)
    alpha: dict[HalfEdge, HalfEdge] = {}

    def glue(a: HalfEdge, b: HalfEdge) -> None:
        alpha[a] = b
        alpha[b] = a

    # carrier of each +1 label: the currently unmatched outgoing half-edge
    carrier: dict[int, HalfEdge] = {x: ("w", x) for x in m.eps.plus_labels()}
    for c in sorted(m.walks):
        for k, step in enumerate(m.walks[c].steps, start=1):
            i, j = step.low, step.high
            slots = [("b", c, k, s) for s in (1, 2, 3, 4)]
            half_edges.extend(slots)
            for s, h in zip((1, 2, 3, 4), slots):
                orientation[h] = -1 if s in (1, 3) else 1
            sigma[slots[0]] = slots[1]
            sigma[slots[1]] = slots[2]
            sigma[slots[2]] = slots[3]
            sigma[slots[3]] = slots[0]
            glue(carrier[i], slots[0])
            glue(carrier[j], slots[2])
            carrier[j] = slots[1]
            carrier[i] = slots[3]
    pi_inv = m.pi.inverse()
    for x in m.eps.plus_labels():
        glue(carrier[x], ("w", pi_inv(x)))
    return EmbeddedStructure(
        tuple(half_edges), sigma, alpha, orientation, color_map
    )


def propagate_labels(m: "UnitaryTypeMap | EmbeddedStructure") -> dict[HalfEdge, int]:
    """Assign every half-edge the label of the first white half-edge reached
    by iterating ``h ↦ α(σ̃(h))``; white half-edges carry their own label."""
    emb = m if isinstance(m, EmbeddedStructure) else embedded_structure(m)
    labels: dict[HalfEdge, int] = {}
    for h in emb.half_edges:
        if h[0] == "w":
            labels[h] = h[1]
    for start in emb.half_edges:
        if start in labels:
            continue
        h = start
        trail = []
        while h[0] != "w" and h not in labels:
            trail.append(h)
            h = emb.alpha[emb.sigma[h]]
            if len(trail) > len(emb.half_edges):
                raise RuntimeError("label propagation did not terminate")
        value = labels[h] if h in labels else h[1]
        for t in trail:
            labels[t] = value
    return labels


def recover_perm_data(emb: EmbeddedStructure) -> dict:
    """Invert the embedding: rebuild (labels, rho, eps, colors, pi, walks)."""
    whites = sorted(h[1] for h in emb.half_edges if h[0] == "w")
    labels = tuple(whites)
    rho = Permutation({x: emb.sigma[("w", x)][1] for x in labels})
    eps = SignVector({x: emb.orientation[("w", x)] for x in labels})
    colors = {x: emb.label_colors[x] for x in labels}
    he_labels = propagate_labels(emb)
    # walks: black vertex (c, k) carries the transposition of its outgoing labels
    blacks: dict[int, dict[int, Transposition]] = {}
    for h in emb.half_edges:
        if h[0] == "b" and h[3] == 2:
            _, c, k, _ = h
            j_label = he_labels[h]
            i_label = he_labels[("b", c, k, 4)]
            blacks.setdefault(c, {})[k] = Transposition(i_label, j_label)
    walks: dict[int, MonotoneWalk] = {}
    plus_by_color: dict[int, list[int]] = {}
    for x in eps.plus_labels():
        plus_by_color.setdefault(colors[x], []).append(x)
    for c, plus in plus_by_color.items():
        steps = tuple(blacks.get(c, {})[k] for k in sorted(blacks.get(c, {})))
        walks[c] = MonotoneWalk(steps, tuple(plus))
    # pi on -1 labels: the label glued to the white ingoing half-edge
    mapping: dict[int, int] = {}
    for y in eps.minus_labels():
        mapping[y] = he_labels[emb.alpha[("w", y)]]
    # pi on +1 labels: walk product then the inverse of the minus part
    inv_minus = {v: k for k, v in mapping.items()}
    for c, plus in plus_by_color.items():
        prod = walks[c].product()
        for x in plus:
            mapping[x] = inv_minus[prod(x)]
    pi = Permutation(mapping)
    return {
        "labels": labels,
        "rho": rho,
        "eps": eps,
        "colors": colors,
        "pi": pi,
        "walks": {c: tuple(w.steps) for c, w in walks.items()},
    }


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def map_phi(m: UnitaryTypeMap) -> Permutation:
    """Face permutation on labels: ``φ = ρ⁻¹ ∘ π⁻¹``."""
    return m.rho.inverse().compose(m.pi.inverse())


def _component_partition(m: UnitaryTypeMap) -> list[tuple[int, ...]]:
    parent = {x: x for x in m.labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for g in (m.rho, m.pi):
        for x in m.labels:
            union(x, g(x))
    for w in m.walks.values():
        for t in w.steps:
            union(t.low, t.high)
    blocks: dict[int, list[int]] = {}
    for x in m.labels:
        blocks.setdefault(find(x), []).append(x)
    return sorted((tuple(sorted(b)) for b in blocks.values()), key=lambda b: b[0])


def diagnostics(m: UnitaryTypeMap) -> MapDiagnostics:
    """Faces, genus (Euler relation with the component count), connectivity,
    per-color monotonicity flag, and black-vertex counts."""
    phi = map_phi(m)
    components = len(_component_partition(m))
    half_m = len(m.labels) // 2
    r = m.total_blacks()
    euler = m.rho.cycle_count() + phi.cycle_count() - half_m - r
    if (2 * components - euler) % 2 != 0:
        raise RuntimeError("Euler relation produced a non-integer genus")
    genus = (2 * components - euler) // 2
    nondecreasing = True
    for w in m.walks.values():
        values = [t.value for t in w.steps]
        if values != sorted(values):
            nondecreasing = False
    return MapDiagnostics(
        phi=phi,
        genus=genus,
        connected=components == 1,
        nondecreasing=nondecreasing,
        black_count=m.black_count(),
        components=components,
    )


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _walk_space_size(eps: SignVector, color_map: Mapping[int, int]) -> int:
    """Size of the sign-compatible, color-preserving pairing class."""
    total = 1
    by_color_plus: dict[int, int] = {}
    by_color_minus: dict[int, int] = {}
    for x in eps.domain:
        if eps(x) == 1:
            by_color_plus[color_map[x]] = by_color_plus.get(color_map[x], 0) + 1
        else:
            by_color_minus[color_map[x]] = by_color_minus.get(color_map[x], 0) + 1
    if set(by_color_plus) != set(by_color_minus):
        return 0
    for c, p in by_color_plus.items():
        if by_color_minus[c] != p:
            return 0
        total *= math.factorial(p) ** 2
    return total


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``total``,
    lexicographically increasing."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _maps_for_pi(
    labels: tuple[int, ...],
    rho: Permutation,
    eps: SignVector,
    color_map: Mapping[int, int],
    pi: Permutation,
    r: int,
) -> Iterator[UnitaryTypeMap]:
    colors_sorted = tuple(sorted(set(color_map.values())))
    square = pi_eps(pi, eps)
    targets = {}
    for c in colors_sorted:
        plus_c = _plus_labels_of_color(eps, color_map, c)
        targets[c] = (plus_c, square.restrict(plus_c) if plus_c else None)
    color_seq = tuple(color_map[x] for x in labels)
    for comp in _compositions(r, len(colors_sorted)):
        walk_lists = []
        feasible = True
        for c, r_c in zip(colors_sorted, comp):
            plus_c, target = targets[c]
            if not plus_c:
                if r_c:
                    feasible = False
                    break
                walk_lists.append([MonotoneWalk((), ())])
                continue
            ws = enumerate_monotone_walks(target, r_c, plus_c)
            if not ws:
                feasible = False
                break
            walk_lists.append(ws)
        if not feasible:
            continue

        def combine(idx: int, chosen: list[MonotoneWalk]) -> Iterator[UnitaryTypeMap]:
            if idx == len(colors_sorted):
                walks = dict(zip(colors_sorted, chosen))
                yield UnitaryTypeMap(labels, rho, eps, color_seq, pi, walks)
                return
            for w in walk_lists[idx]:
                chosen.append(w)
                yield from combine(idx + 1, chosen)
                chosen.pop()

        yield from combine(0, [])


def enumerate_maps(
    I: Iterable[int],
    eps: SignVector,
    rho: Permutation,
    colors: Mapping[int, int] | Sequence[int] | None = None,
    *,
    by_r: int | None = None,
    by_genus: int | None = None,
    connected_only: bool = False,
    max_work: int | None = None,
) -> list[UnitaryTypeMap]:
    """All nondecreasing maps with the given white data.

    Exactly one of ``by_r`` (total black vertices) or ``by_genus`` must be
    given.  Pairings run in lexicographic one-line order, then walks in
    lexicographic step order; the output order is deterministic.  An
    unbalanced sign vector yields the empty list.  ``max_work`` caps the size
    of the pairing class and raises :class:`EnumerationBudgetError` beyond it.
    """
    labels = tuple(sorted(I))
    if rho.domain != labels or eps.domain != labels:
        raise ValueError("rho and eps must live on the label set I")
    if (by_r is None) == (by_genus is None):
        raise ValueError("give exactly one of by_r or by_genus")
    if colors is None:
        color_map = {x: 1 for x in labels}
    elif isinstance(colors, Mapping):
        color_map = {x: colors[x] for x in labels}
    else:
        if len(colors) != len(labels):
            raise ValueError("color sequence length must match the label count")
        color_map = dict(zip(labels, colors))
    space = _walk_space_size(eps, color_map)
    if space == 0:
        return []
    if max_work is not None and space > max_work:
        raise EnumerationBudgetError(
            f"pairing class has {space} elements, exceeding max_work={max_work}"
        )
    half_m = len(labels) // 2
    out: list[UnitaryTypeMap] = []
    for pi in sign_compatible_permutations(eps, color_map):
        if by_r is not None:
            candidate_rs = [by_r]
        else:
            phi = rho.inverse().compose(pi.inverse())
            base = rho.cycle_count() + phi.cycle_count() - half_m
            # 2C − 2g = c(ρ) + c(φ) − m − r  ⇒  r = base − 2C + 2·genus
            max_components = min(rho.cycle_count(), pi.cycle_count(), half_m)
            candidate_rs = sorted(
                {
                    base - 2 * C + 2 * by_genus
                    for C in range(1, max_components + 1)
                    if base - 2 * C + 2 * by_genus >= 0
                }
            )
        for r in candidate_rs:
            for m_obj in _maps_for_pi(labels, rho, eps, color_map, pi, r):
                diag = diagnostics(m_obj)
                if by_genus is not None and diag.genus != by_genus:
                    continue
                if connected_only and not diag.connected:
                    continue
                out.append(m_obj)
    return out


# ---------------------------------------------------------------------------
# Surgeries
# ---------------------------------------------------------------------------


def _single_color(m: UnitaryTypeMap) -> int:
    colors = m.all_colors()
    if len(colors) != 1:
        raise ValueError("cutting surgeries are implemented for single-color maps")
    return colors[0]


def _split_components(
    labels: tuple[int, ...],
    rho: Permutation,
    eps: SignVector,
    color_map: Mapping[int, int],
    pi: Permutation,
    steps: tuple[Transposition, ...],
    color: int,
) -> list[UnitaryTypeMap]:
    """Split permutational data into its connected components (any number)."""
    parent = {x: x for x in labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for g in (rho, pi):
        for x in labels:
            union(x, g(x))
    for t in steps:
        union(t.low, t.high)
    blocks: dict[int, list[int]] = {}
    for x in labels:
        blocks.setdefault(find(x), []).append(x)
    components = sorted((tuple(sorted(b)) for b in blocks.values()), key=lambda b: b[0])
    out = []
    for comp in components:
        comp_set = set(comp)
        comp_steps = tuple(t for t in steps if t.low in comp_set)
        out.append(
            build_map(
                rho.restrict(comp),
                eps.restrict(comp),
                {x: color_map[x] for x in comp},
                pi.restrict(comp),
                {color: [(t.low, t.high) for t in comp_steps]},
            )
        )
    return out


def cut_white(m: UnitaryTypeMap, j: int) -> list[UnitaryTypeMap]:
    """Contract the edge joining the maximal label to ``j = π(max)``.

    Applies when no walk step moves the maximal label (equivalently the last
    step fixes it).  Returns the connected components (one or two) of the map
    with data ``π' = π`` restricted, ``ρ' = first-return of ρ∘(j,max)``, and
    unchanged walks.
    """
    color = _single_color(m)
    top = max(m.labels)
    if m.eps(top) != 1:
        raise ValueError("the maximal label must carry sign +1 (relabel first)")
    if len(m.labels) < 4:
        raise ValueError("cut_white needs at least two edges (m >= 2)")
    walk = m.walks[color]
    if any(t.low == top or t.high == top for t in walk.steps):
        raise ValueError("a walk step moves the maximal label; use cut_black")
    if m.pi(top) != j:
        raise ValueError(f"expected j = pi(max) = {m.pi(top)}, got {j}")
    remaining = tuple(x for x in m.labels if x not in (j, top))
    t = Transposition(j, top).to_permutation(m.labels)
    rho_prime = trace_restrict(m.rho.compose(t), remaining)
    pi_prime = m.pi.restrict(remaining)
    eps_prime = m.eps.restrict(remaining)
    color_map = m.color_map()
    return _split_components(
        remaining,
        rho_prime,
        eps_prime,
        {x: color_map[x] for x in remaining},
        pi_prime,
        walk.steps,
        color,
    )


def cut_black(m: UnitaryTypeMap) -> list[UnitaryTypeMap]:
    """Remove the last black vertex, whose step must move the maximal label.

    Returns the connected components (one or two) of the map with data
    ``π' = τ_r∘π``, ``ρ' = ρ∘τ_r``, and the walk minus its last step; the face
    count is unchanged.
    """
    color = _single_color(m)
    top = max(m.labels)
    if m.eps(top) != 1:
        raise ValueError("the maximal label must carry sign +1 (relabel first)")
    walk = m.walks[color]
    if not walk.steps:
        raise ValueError("no black vertices; use cut_white")
    last = walk.steps[-1]
    if last.high != top:
        raise ValueError("the last walk step does not move the maximal label")
    t = last.to_permutation(m.labels)
    pi_prime = t.compose(m.pi)
    rho_prime = m.rho.compose(t)
    return _split_components(
        m.labels,
        rho_prime,
        m.eps,
        m.color_map(),
        pi_prime,
        walk.steps[:-1],
        color,
    )


def relabel_map(m: UnitaryTypeMap, mapping: Mapping[int, int]) -> UnitaryTypeMap:
    """Push the map through a bijection of label sets.

    The per-color walks must remain value-sorted under the new labels,
    otherwise the result is not a nondecreasing map and an error is raised.
    """
    if sorted(mapping) != sorted(m.labels):
        raise ValueError("mapping must be defined exactly on the map's labels")
    new_labels = sorted(mapping.values())
    if len(set(new_labels)) != len(new_labels):
        raise ValueError("mapping must be a bijection")
    rho = Permutation({mapping[x]: mapping[m.rho(x)] for x in m.labels})
    pi = Permutation({mapping[x]: mapping[m.pi(x)] for x in m.labels})
    eps = SignVector({mapping[x]: m.eps(x) for x in m.labels})
    color_map = {mapping[x]: c for x, c in m.color_map().items()}
    walks = {
        c: [(mapping[t.low], mapping[t.high]) for t in w.steps]
        for c, w in m.walks.items()
    }
    return build_map(rho, eps, color_map, pi, walks)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def map_to_json(m: UnitaryTypeMap) -> dict:
    return {
        "labels": list(m.labels),
        "rho": m.rho.to_cycle_string(),
        "eps": list(m.eps.values()),
        "colors": list(m.colors),
        "pi": m.pi.to_cycle_string(),
        "walks": {str(c): w.as_pairs() for c, w in sorted(m.walks.items())},
    }


def map_from_json(data: "dict | str") -> UnitaryTypeMap:
    if isinstance(data, str):
        data = json.loads(data)
    labels = tuple(sorted(int(x) for x in data["labels"]))
    rho = Permutation.from_cycle_string(data["rho"], labels)
    eps = SignVector.from_sequence([int(v) for v in data["eps"]], labels)
    colors = [int(c) for c in data["colors"]]
    pi = Permutation.from_cycle_string(data["pi"], labels)
    walks = {int(c): [(int(i), int(j)) for i, j in steps]
             for c, steps in data["walks"].items()}
    return build_map(rho, eps, colors, pi, walks)
