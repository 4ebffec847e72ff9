"""Splitting interaction sets and matching their supports.

The pipeline shape: terms that crowd each other (shared modes, or a common
neighbor term) conflict; a greedy coloring of the conflict graph splits the
interaction set into well-separated ("diffuse") classes per weight; a chosen
class is then matched internally, and the leftover Majoranas are matched
along a Hamiltonian cycle of the permitted-edge graph so that no leftover
dimer sits inside any interaction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gaussian import Matching
from .hamiltonian import MajoranaHamiltonian, sparsity_profile


class DiracError(RuntimeError):
    """The permitted graph is too thin for the cycle construction."""


def conflict_degree_bound(q: int, k: int) -> int:
    """Largest possible conflict-graph degree for a k-sparse q-local set."""
    return q * (q - 1) * (k - 1) ** 2 + q * (k - 1)


def part_bound(q: int, k: int) -> int:
    """Bound on the number of classes per weight: coloring bound plus the
    one extra class created by the support-size fix-up."""
    return conflict_degree_bound(q, k) + 2


@dataclass(frozen=True)
class ConflictGraph:
    """Terms as vertices; edges mark pairs that cannot share a diffuse set."""

    n_vertices: int
    adjacency: tuple[frozenset[int], ...]
    term_keys: tuple[tuple[int, ...], ...]

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]


def build_conflict_graph(ham: MajoranaHamiltonian) -> ConflictGraph:
    """Connect terms that overlap or are bridged by a third term."""
    n_terms = len(ham.terms)
    mode_to_terms: dict[int, list[int]] = {}
    for t_id, term in enumerate(ham.terms):
        for mode in term.indices:
            mode_to_terms.setdefault(mode, []).append(t_id)
    direct: list[set[int]] = [set() for _ in range(n_terms)]
    for members in mode_to_terms.values():
        for a in members:
            for b in members:
                if a != b:
                    direct[a].add(b)
    adjacency = [set(direct[t]) for t in range(n_terms)]
    for bridge in range(n_terms):
        around = sorted(direct[bridge])
        for i, a in enumerate(around):
            for b in around[i + 1 :]:
                adjacency[a].add(b)
                adjacency[b].add(a)
    graph = ConflictGraph(
        n_vertices=n_terms,
        adjacency=tuple(frozenset(a) for a in adjacency),
        term_keys=tuple(t.indices for t in ham.terms),
    )
    profile = sparsity_profile(ham)
    if ham.terms:
        q = max(profile.weights_present)
        bound = conflict_degree_bound(q, max(profile.max_degree, 1))
        assert graph.max_degree <= bound, (graph.max_degree, bound)
    return graph


def greedy_color(graph: ConflictGraph) -> list[int]:
    """Proper coloring with at most ``max_degree + 1`` colors.

    Vertices are processed by descending conflict degree, ties broken by
    the term's index tuple, so the result is deterministic.
    """
    order = sorted(
        range(graph.n_vertices),
        key=lambda v: (-len(graph.adjacency[v]), graph.term_keys[v]),
    )
    colors = [-1] * graph.n_vertices
    for v in order:
        taken = {colors[u] for u in graph.adjacency[v] if colors[u] >= 0}
        c = 0
        while c in taken:
            c += 1
        colors[v] = c
    assert all(c >= 0 for c in colors)
    assert max(colors, default=-1) <= graph.max_degree
    return colors


@dataclass(frozen=True)
class DiffuseCheck:
    ok: bool
    violated: int | None = None  # first failed condition: 1, 2 or 3


def is_diffuse(
    subset_ids: Sequence[int],
    ham: MajoranaHamiltonian,
    locality: int | None = None,
) -> DiffuseCheck:
    """Check the three separation conditions of a candidate subset.

    1. members have pairwise disjoint supports;
    2. no interaction of the full set touches two distinct members;
    3. the united support covers fewer than ``2*q*n/(q+1)`` Majoranas,
       ``q`` being the ambient locality (max term weight unless given).
    """
    members = [ham.terms[i] for i in subset_ids]
    support: set[int] = set()
    for term in members:
        if support & term.support:
            return DiffuseCheck(False, 1)
        support |= term.support
    member_ids = set(subset_ids)
    for t_id, term in enumerate(ham.terms):
        if t_id in member_ids:
            continue
        touched = 0
        for m in members:
            if term.support & m.support:
                touched += 1
                if touched >= 2:
                    return DiffuseCheck(False, 2)
    if ham.terms:
        q = locality if locality is not None else max(t.weight for t in ham.terms)
        if len(support) >= 2 * q * ham.n_modes / (q + 1):
            return DiffuseCheck(False, 3)
    return DiffuseCheck(True, None)


@dataclass(frozen=True)
class DiffusePartition:
    """Disjoint cover of the term set by per-weight diffuse classes.

    Keys are ``(half_weight, color)``; values are term-id tuples.  ``bound``
    is the printed class-count bound per weight; ``diffuse_flags`` records
    the per-part separation verdicts (all true above the size thresholds).
    """

    parts: dict[tuple[int, int], tuple[int, ...]]
    bound: int
    locality: int
    sparsity: int
    diffuse_flags: dict[tuple[int, int], bool] = field(default_factory=dict)

    @property
    def all_diffuse(self) -> bool:
        return all(self.diffuse_flags.values())

    def within_bound(self) -> bool:
        per_weight: dict[int, int] = {}
        for (q_half, _alpha) in self.parts:
            per_weight[q_half] = per_weight.get(q_half, 0) + 1
        return all(count <= self.bound for count in per_weight.values())

    def to_json(self) -> str:
        doc = {
            "bound": self.bound,
            "parts": {f"({qh},{a})": list(ids) for (qh, a), ids in sorted(self.parts.items())},
        }
        return json.dumps(doc, indent=1)


def diffuse_partition(
    ham: MajoranaHamiltonian,
    locality: int | None = None,
    sparsity: int | None = None,
) -> DiffusePartition:
    """Split all terms into per-weight diffuse classes.

    Greedy-color the conflict graph, split classes by exact weight, then fix
    the support-size condition: per weight at most one class can violate it,
    and halving that class by term count (in index order) restores it.
    """
    profile = sparsity_profile(ham)
    if ham.terms:
        q = locality if locality is not None else max(profile.weights_present)
        k = sparsity if sparsity is not None else max(profile.max_degree, 1)
    else:
        q = locality if locality is not None else 2
        k = sparsity if sparsity is not None else 1
    k = max(k, 1)
    bound = part_bound(q, k)

    graph = build_conflict_graph(ham)
    colors = greedy_color(graph)
    classes: dict[tuple[int, int], list[int]] = {}
    for t_id, term in enumerate(ham.terms):
        key = (term.weight // 2, colors[t_id])
        classes.setdefault(key, []).append(t_id)

    n_colors = max(colors, default=-1) + 1
    parts: dict[tuple[int, int], tuple[int, ...]] = {}
    by_weight: dict[int, list[tuple[int, int]]] = {}
    for key, ids in classes.items():
        ids.sort(key=lambda t: ham.terms[t].indices)
        parts[key] = tuple(ids)
        by_weight.setdefault(key[0], []).append(key)

    for q_half, keys in by_weight.items():
        violators = [
            key for key in keys if is_diffuse(parts[key], ham, locality=q).violated == 3
        ]
        # conditions 1-2 hold per coloring; at most one class per weight can
        # breach the support bound, and a cardinality halving repairs it
        assert len(violators) <= 1, violators
        for key in violators:
            ids = parts[key]
            keep, spill = ids[: len(ids) // 2], ids[len(ids) // 2 :]
            parts[key] = keep
            parts[(q_half, n_colors)] = spill
        if violators:
            n_colors += 1

    parts = {key: ids for key, ids in parts.items() if ids}
    flags = {key: is_diffuse(ids, ham, locality=q).ok for key, ids in parts.items()}
    return DiffusePartition(
        parts=parts, bound=bound, locality=q, sparsity=k, diffuse_flags=flags
    )


@dataclass(frozen=True)
class PermittedGraph:
    """Graph on leftover Majoranas; edges avoid co-membership in any term."""

    vertices: tuple[int, ...]
    adjacency: dict[int, frozenset[int]]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def min_degree(self) -> int:
        return min((len(self.adjacency[v]) for v in self.vertices), default=0)


def permitted_graph(ham: MajoranaHamiltonian, excluded: Iterable[int]) -> PermittedGraph:
    """Permitted-edge graph on the Majoranas outside ``excluded``."""
    verts = tuple(sorted(set(range(ham.n_majoranas)) - set(excluded)))
    vset = set(verts)
    forbidden: dict[int, set[int]] = {v: set() for v in verts}
    for term in ham.terms:
        inside = [i for i in term.indices if i in vset]
        for a in inside:
            for b in inside:
                if a != b:
                    forbidden[a].add(b)
    adjacency = {v: frozenset(vset - forbidden[v] - {v}) for v in verts}
    return PermittedGraph(vertices=verts, adjacency=adjacency)


def _close_path_to_cycle(path: list[int], graph) -> list[int]:
    """Close a maximal path into a cycle via the pigeonhole crossing pair."""
    head, tail = path[0], path[-1]
    if graph.has_edge(head, tail):
        return list(path)
    for i in range(len(path) - 1):
        if graph.has_edge(head, path[i + 1]) and graph.has_edge(path[i], tail):
            return path[: i + 1] + list(reversed(path[i + 1 :]))
    raise DiracError("Dirac condition unmet: no crossing pair on a maximal path")


def validate_cycle(cycle: Sequence[int], graph) -> None:
    assert sorted(cycle) == sorted(graph.vertices), "cycle must visit every vertex once"
    for i, v in enumerate(cycle):
        assert graph.has_edge(v, cycle[(i + 1) % len(cycle)]), "cycle uses a non-edge"


def hamiltonian_cycle_dense(graph) -> list[int]:
    """Hamiltonian cycle of a graph with min degree > |V|/2 (Dirac regime).

    Deterministic path extension with rotations: grow a path greedily at
    both ends (smallest eligible vertex first), close a maximal path into a
    cycle through a crossing pair, then absorb an outside vertex and keep
    going.  O(|V|^3) worst case.
    """
    verts = sorted(graph.vertices)
    nv = len(verts)
    if nv < 3 or graph.min_degree() <= nv / 2:
        raise DiracError("Dirac condition unmet")
    path = [verts[0]]
    in_path = {verts[0]}
    while True:
        extended = True
        while extended and len(path) < nv:
            extended = False
            for u in sorted(graph.neighbors(path[-1])):
                if u not in in_path:
                    path.append(u)
                    in_path.add(u)
                    extended = True
                    break
            if not extended:
                for u in sorted(graph.neighbors(path[0])):
                    if u not in in_path:
                        path.insert(0, u)
                        in_path.add(u)
                        extended = True
                        break
        cycle = _close_path_to_cycle(path, graph)
        if len(cycle) == nv:
            validate_cycle(cycle, graph)
            return cycle
        attach = None
        for w in verts:
            if w in in_path:
                continue
            for i, v in enumerate(cycle):
                if graph.has_edge(w, v):
                    attach = (w, i)
                    break
            if attach:
                break
        if attach is None:
            raise DiracError("Dirac condition unmet: cycle cannot be extended")
        w, i = attach
        path = [w] + cycle[i:] + cycle[:i]
        in_path = set(path)


def _backtrack_matching(vertices: list[int], graph) -> list[tuple[int, int]] | None:
    if not vertices:
        return []
    head, rest = vertices[0], vertices[1:]
    for partner in sorted(graph.neighbors(head)):
        if partner not in rest:
            continue
        remaining = [v for v in rest if v != partner]
        sub = _backtrack_matching(remaining, graph)
        if sub is not None:
            return [(head, partner)] + sub
    return None


FALLBACK_VERTEX_LIMIT = 16


def _quartic_pairings(indices: tuple[int, ...]) -> list[list[tuple[int, int]]]:
    a, b, c, d = indices
    return [
        [(a, b), (c, d)],
        [(a, c), (b, d)],
        [(a, d), (b, c)],
    ]


def diffuse_matching(
    ham: MajoranaHamiltonian,
    subset_ids: Sequence[int],
    avoid_two_mode_overlap: bool = False,
) -> tuple[Matching, bool]:
    """Perfect matching consistent with the subset, inconsistent elsewhere.

    Member supports are paired internally (consecutive index pairs); all
    leftover Majoranas are paired along a Hamiltonian cycle of the permitted
    graph.  Returns the matching and whether the exhaustive small-residual
    fallback was needed in place of the cycle construction.

    With ``avoid_two_mode_overlap``, each quartic member picks (among its
    three pairings) one minimizing coincidences with weight-2 interactions.
    """
    members = [ham.terms[i] for i in subset_ids]
    support: set[int] = set()
    for term in members:
        if support & term.support:
            raise ValueError("subset supports overlap; not a diffuse set")
        support |= term.support
    two_mode_sets = {t.indices for t in ham.terms if t.weight == 2}
    inner: list[tuple[int, int]] = []
    for term in members:
        idx = term.indices
        if avoid_two_mode_overlap and term.weight == 4:
            options = _quartic_pairings(idx)
            scored = [sum(1 for p in opt if p in two_mode_sets) for opt in options]
            inner.extend(options[scored.index(min(scored))])
        else:
            inner.extend((idx[2 * l], idx[2 * l + 1]) for l in range(term.weight // 2))

    residual = sorted(set(range(ham.n_majoranas)) - support)
    if not residual:
        return Matching(tuple(inner)), False
    graph = permitted_graph(ham, support)
    used_fallback = False
    if len(residual) == 2:
        if not graph.has_edge(residual[0], residual[1]):
            raise DiracError("Dirac condition unmet: forced residual pair is forbidden")
        outer = [(residual[0], residual[1])]
    elif len(residual) >= 3 and graph.min_degree() > len(residual) / 2:
        cycle = hamiltonian_cycle_dense(graph)
        outer = [(cycle[2 * l], cycle[2 * l + 1]) for l in range(len(cycle) // 2)]
    elif len(residual) <= FALLBACK_VERTEX_LIMIT:
        found = _backtrack_matching(residual, graph)
        if found is None:
            raise DiracError("Dirac condition unmet and no permitted matching exists")
        outer = found
        used_fallback = True
    else:
        raise DiracError("Dirac condition unmet")
    return Matching(tuple(inner) + tuple(outer)), used_fallback
