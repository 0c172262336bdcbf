"""Finite groupoids with explicit composition tables.

A groupoid is stored as a dense structure over integer element ids
``0..order-1``: unit flags, source/target/inverse maps, and a ``KxK``
partial composition table with ``-1`` marking undefined products.  All
structural axioms can then be checked by exhaustive enumeration, which is
the point of this module: constructions are cheap, verification is total.

All objects are immutable after construction and safe to share across
threads; every operation here is a pure function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

UNDEFINED = -1

# Exhaustive triple scans are O(K^3); above this order the associativity
# check falls back to a documented random sample.
EXHAUSTIVE_ORDER_LIMIT = 4096
DEFAULT_ASSOCIATIVITY_SAMPLES = 200_000


class GroupoidStructureError(ValueError):
    """Raised when input data cannot form a groupoid at all."""


class ActionLawError(ValueError):
    """Raised when a claimed group action violates an action law."""


class NotTransitiveError(ValueError):
    """Raised by operations defined only for transitive groupoids."""


def _frozen_array(values, dtype=np.int64) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteGroupoid:
    """A finite groupoid over elements ``0..order-1``.

    Attributes
    ----------
    order : number of elements K.
    units : ids of the unit elements (the subset G0).
    source, target : maps assigning each element its right/left unit.
    inverse : the two-sided inverse map.
    compose : KxK table; ``compose[j, k]`` is the id of ``j o k`` or -1.
    """

    order: int
    units: frozenset
    source: np.ndarray
    target: np.ndarray
    inverse: np.ndarray
    compose: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise GroupoidStructureError("groupoid needs at least one element")
        for attr in ("source", "target", "inverse"):
            arr = getattr(self, attr)
            if arr.shape != (self.order,):
                raise GroupoidStructureError(f"{attr} map has wrong length")
            if arr.min() < 0 or arr.max() >= self.order:
                raise GroupoidStructureError(f"{attr} map leaves the element range")
        if self.compose.shape != (self.order, self.order):
            raise GroupoidStructureError("composition table must be KxK")
        if self.compose.max() >= self.order or self.compose.min() < UNDEFINED:
            raise GroupoidStructureError("composition table entry out of range")
        if not all(0 <= u < self.order for u in self.units):
            raise GroupoidStructureError("unit id out of range")

    def __len__(self) -> int:
        return self.order

    def is_unit(self, g: int) -> bool:
        return g in self.units

    def base_space(self) -> tuple:
        """The units as an ordered base space (the outer view of G0)."""
        return tuple(sorted(self.units))

    def product(self, j: int, k: int) -> int | None:
        """Return ``j o k`` or None when the pair is not composable."""
        out = int(self.compose[j, k])
        return None if out == UNDEFINED else out

    def composable_pairs(self) -> np.ndarray:
        """All (j, k) with ``j o k`` defined, in lexicographic order."""
        return np.argwhere(self.compose != UNDEFINED)

    def composable_triples(self) -> np.ndarray:
        """All (j, k, i) with ``j o k = i``, in lexicographic (j, k) order."""
        pairs = self.composable_pairs()
        prods = self.compose[pairs[:, 0], pairs[:, 1]]
        return np.column_stack([pairs, prods])

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        triples = self.composable_triples()
        return {
            "order": self.order,
            "units": sorted(int(u) for u in self.units),
            "source": self.source.tolist(),
            "target": self.target.tolist(),
            "inverse": self.inverse.tolist(),
            "compose": [[int(j), int(k), int(i)] for j, k, i in triples],
        }

    @staticmethod
    def from_dict(data: dict) -> "FiniteGroupoid":
        order = int(data["order"])
        compose = np.full((order, order), UNDEFINED, dtype=np.int64)
        for j, k, i in data["compose"]:
            compose[j, k] = i
        return FiniteGroupoid(
            order=order,
            units=frozenset(int(u) for u in data["units"]),
            source=_frozen_array(data["source"]),
            target=_frozen_array(data["target"]),
            inverse=_frozen_array(data["inverse"]),
            compose=_frozen_array(compose),
            name=data.get("name", ""),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @staticmethod
    def load(path) -> "FiniteGroupoid":
        with open(path) as fh:
            return FiniteGroupoid.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def pair_groupoid(n: int) -> FiniteGroupoid:
    """Pair groupoid of an n-point set: elements (x, y), (x, t) o (t, y) = (x, y).

    Element (x, y) gets id ``x*n + y``; the units are the diagonal pairs.
    """
    if n < 1:
        raise GroupoidStructureError("pair groupoid needs n >= 1 base points")
    order = n * n
    ids = np.arange(order)
    x, y = divmod(ids, n)
    source = y * n + y
    target = x * n + x
    inverse = y * n + x
    compose = np.full((order, order), UNDEFINED, dtype=np.int64)
    for a in range(n):
        for t in range(n):
            for b in range(n):
                compose[a * n + t, t * n + b] = a * n + b
    return FiniteGroupoid(
        order=order,
        units=frozenset(int(i * n + i) for i in range(n)),
        source=_frozen_array(source),
        target=_frozen_array(target),
        inverse=_frozen_array(inverse),
        compose=_frozen_array(compose),
        name=f"pair({n})",
    )


def cyclic_group_table(n: int) -> np.ndarray:
    """Multiplication table of the cyclic group Z_n (identity is 0)."""
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    a = np.arange(n)
    return (a[:, None] + a[None, :]) % n


def _group_identity(table: np.ndarray) -> int:
    m = table.shape[0]
    for e in range(m):
        if np.array_equal(table[e], np.arange(m)) and np.array_equal(
            table[:, e], np.arange(m)
        ):
            return e
    raise GroupoidStructureError("table has no two-sided identity")


def _group_inverses(table: np.ndarray, e: int) -> np.ndarray:
    m = table.shape[0]
    inv = np.full(m, -1, dtype=np.int64)
    for a in range(m):
        hits = np.nonzero(table[a] == e)[0]
        if len(hits) != 1 or table[hits[0], a] != e:
            raise GroupoidStructureError(f"element {a} has no two-sided inverse")
        inv[a] = hits[0]
    return inv


def group_groupoid(table: np.ndarray, name: str = "") -> FiniteGroupoid:
    """A finite group seen as a groupoid with the single unit {e}."""
    table = np.asarray(table, dtype=np.int64)
    m = table.shape[0]
    e = _group_identity(table)
    inv = _group_inverses(table, e)
    return FiniteGroupoid(
        order=m,
        units=frozenset([int(e)]),
        source=_frozen_array(np.full(m, e)),
        target=_frozen_array(np.full(m, e)),
        inverse=_frozen_array(inv),
        compose=_frozen_array(table.copy()),
        name=name or f"group({m})",
    )


def action_groupoid(
    table: np.ndarray,
    action: Callable[[int, int], int],
    n_points: int,
    name: str = "",
) -> FiniteGroupoid:
    """Groupoid of a right group action on ``n_points`` points.

    Elements are pairs (x, g) with id ``x*|G| + g``; ``r(x,g) = (x,e)``,
    ``s(x,g) = (x^g, e)`` and ``(x,g) o (x^g, g') = (x, g g')``.

    Raises
    ------
    ActionLawError
        If the identity does not act trivially or compatibility
        ``(x^g)^h = x^(gh)`` fails; the message names the law and a witness.
    """
    table = np.asarray(table, dtype=np.int64)
    m = table.shape[0]
    e = _group_identity(table)
    inv = _group_inverses(table, e)
    for x in range(n_points):
        if action(x, e) != x:
            raise ActionLawError(f"identity law violated: point {x} moves under e")
    for x in range(n_points):
        for g in range(m):
            xg = action(x, g)
            if not (0 <= xg < n_points):
                raise ActionLawError(f"action leaves the point set at (x={x}, g={g})")
            for h in range(m):
                if action(xg, h) != action(x, int(table[g, h])):
                    raise ActionLawError(
                        "compatibility law violated at "
                        f"(x={x}, g={g}, h={h}): (x^g)^h != x^(gh)"
                    )

    order = n_points * m
    ids = np.arange(order)
    x_of, g_of = divmod(ids, m)
    target = x_of * m + e
    source = np.array([action(int(x), int(g)) * m + e for x, g in zip(x_of, g_of)])
    inverse = np.array(
        [action(int(x), int(g)) * m + int(inv[g]) for x, g in zip(x_of, g_of)]
    )
    compose = np.full((order, order), UNDEFINED, dtype=np.int64)
    for x in range(n_points):
        for g in range(m):
            xg = action(x, g)
            for h in range(m):
                compose[x * m + g, xg * m + h] = x * m + int(table[g, h])
    return FiniteGroupoid(
        order=order,
        units=frozenset(int(x * m + e) for x in range(n_points)),
        source=_frozen_array(source),
        target=_frozen_array(target),
        inverse=_frozen_array(inverse),
        compose=_frozen_array(compose),
        name=name or f"action({n_points}x{m})",
    )


def transitive_groupoid(n_units: int, table: np.ndarray, name: str = "") -> FiniteGroupoid:
    """Transitive groupoid with ``n_units`` units and isotropy group ``table``.

    Elements are triples (u, v, h): target unit u, source unit v, isotropy
    label h, composed by ``(u, v, h) o (v, w, h') = (u, w, h h')``.  Every
    finite transitive groupoid is of this form.
    """
    table = np.asarray(table, dtype=np.int64)
    m = table.shape[0]
    e = _group_identity(table)
    inv = _group_inverses(table, e)
    order = n_units * n_units * m

    def idx(u, v, h):
        return (u * n_units + v) * m + h

    ids = np.arange(order)
    uv, h_of = divmod(ids, m)
    u_of, v_of = divmod(uv, n_units)
    target = idx(u_of, u_of, e)
    source = idx(v_of, v_of, e)
    inverse = idx(v_of, u_of, inv[h_of])
    compose = np.full((order, order), UNDEFINED, dtype=np.int64)
    for u in range(n_units):
        for v in range(n_units):
            for h in range(m):
                j = idx(u, v, h)
                for w in range(n_units):
                    for h2 in range(m):
                        compose[j, idx(v, w, h2)] = idx(u, w, int(table[h, h2]))
    return FiniteGroupoid(
        order=order,
        units=frozenset(int(idx(u, u, e)) for u in range(n_units)),
        source=_frozen_array(source),
        target=_frozen_array(target),
        inverse=_frozen_array(inverse),
        compose=_frozen_array(compose),
        name=name or f"transitive({n_units},H{m})",
    )


def disjoint_union(parts: Sequence[FiniteGroupoid], name: str = "") -> FiniteGroupoid:
    """Index-shifted union of groupoids; cross-part products stay undefined."""
    if not parts:
        raise GroupoidStructureError("disjoint union of an empty list")
    order = sum(p.order for p in parts)
    source = np.empty(order, dtype=np.int64)
    target = np.empty(order, dtype=np.int64)
    inverse = np.empty(order, dtype=np.int64)
    compose = np.full((order, order), UNDEFINED, dtype=np.int64)
    units = set()
    off = 0
    for p in parts:
        sl = slice(off, off + p.order)
        source[sl] = p.source + off
        target[sl] = p.target + off
        inverse[sl] = p.inverse + off
        block = p.compose.copy()
        defined = block != UNDEFINED
        block[defined] += off
        compose[sl, sl] = block
        units.update(int(u) + off for u in p.units)
        off += p.order
    return FiniteGroupoid(
        order=order,
        units=frozenset(units),
        source=_frozen_array(source),
        target=_frozen_array(target),
        inverse=_frozen_array(inverse),
        compose=_frozen_array(compose),
        name=name or "+".join(p.name or "?" for p in parts),
    )


# ---------------------------------------------------------------------------
# axiom validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomCheck:
    passed: bool
    witness: tuple | None = None
    checked: int = 0
    sampled: bool = False


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the exhaustive structural scan, one entry per axiom.

    Witnesses are the lexicographically smallest violating tuples in the
    element-id order, so independent re-scans must reproduce them exactly.
    """

    entries: dict

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.entries.values())

    def failures(self) -> dict:
        return {k: v for k, v in self.entries.items() if not v.passed}

    def to_dict(self) -> dict:
        return {
            name: {
                "passed": c.passed,
                "witness": list(c.witness) if c.witness is not None else None,
                "checked": c.checked,
                "sampled": c.sampled,
            }
            for name, c in self.entries.items()
        }


def _first(indices) -> tuple | None:
    if len(indices) == 0:
        return None
    return tuple(int(v) for v in np.atleast_1d(indices[0]))


def validate_axioms(
    G: FiniteGroupoid,
    associativity_samples: int = DEFAULT_ASSOCIATIVITY_SAMPLES,
    rng: np.random.Generator | None = None,
) -> AxiomReport:
    """Check every groupoid axiom by exhaustive enumeration.

    Reports all violated axioms (never fails fast) with minimal witnesses:

    * ``maps_into_units`` -- source and target land in the unit set,
    * ``domain`` -- ``j o k`` defined exactly when ``source(j) = target(k)``,
    * ``a`` -- ``r(j o k) = r(j)`` and ``s(j o k) = s(k)``,
    * ``b`` -- units are their own source and target,
    * ``c`` -- ``r(g) o g = g = g o s(g)``,
    * ``d`` -- associativity on all defined triples,
    * ``e`` -- ``g o g^-1 = r(g)`` and ``g^-1 o g = s(g)``,
    * ``e_left_cancellation`` / ``e_right_cancellation``,
    * ``involution`` -- ``(g^-1)^-1 = g``.

    For orders above ``EXHAUSTIVE_ORDER_LIMIT`` the associativity entry is
    estimated from ``associativity_samples`` random triples and flagged.
    """
    K = G.order
    entries: dict[str, AxiomCheck] = {}
    unit_mask = np.zeros(K, dtype=bool)
    unit_mask[list(G.units)] = True

    bad = np.nonzero(~unit_mask[G.source] | ~unit_mask[G.target])[0]
    entries["maps_into_units"] = AxiomCheck(len(bad) == 0, _first(bad), K)

    defined = G.compose != UNDEFINED
    should = G.source[:, None] == G.target[None, :]
    bad = np.argwhere(defined != should)
    entries["domain"] = AxiomCheck(len(bad) == 0, _first(bad), K * K)

    pairs = np.argwhere(defined)
    if len(pairs):
        j, k = pairs[:, 0], pairs[:, 1]
        prods = G.compose[j, k]
        bad_idx = np.nonzero(
            (G.target[prods] != G.target[j]) | (G.source[prods] != G.source[k])
        )[0]
        entries["a"] = AxiomCheck(
            len(bad_idx) == 0,
            tuple(int(v) for v in pairs[bad_idx[0]]) if len(bad_idx) else None,
            len(pairs),
        )
    else:
        entries["a"] = AxiomCheck(True, None, 0)

    units_sorted = np.array(sorted(G.units), dtype=np.int64)
    bad_idx = np.nonzero(
        (G.source[units_sorted] != units_sorted) | (G.target[units_sorted] != units_sorted)
    )[0]
    entries["b"] = AxiomCheck(
        len(bad_idx) == 0,
        (int(units_sorted[bad_idx[0]]),) if len(bad_idx) else None,
        len(units_sorted),
    )

    ids = np.arange(K)
    left = G.compose[G.target[ids], ids]
    right = G.compose[ids, G.source[ids]]
    bad = np.nonzero((left != ids) | (right != ids))[0]
    entries["c"] = AxiomCheck(len(bad) == 0, _first(bad), K)

    entries["d"] = _check_associativity(G, associativity_samples, rng)

    gi = G.inverse[ids]
    bad = np.nonzero(
        (G.compose[ids, gi] != G.target[ids]) | (G.compose[gi, ids] != G.source[ids])
    )[0]
    entries["e"] = AxiomCheck(len(bad) == 0, _first(bad), K)

    # (g' o g) o g^-1 = g' over composable (g', g)
    witness = None
    checked = 0
    for gp in range(K):
        ks = np.nonzero(defined[gp])[0]
        checked += len(ks)
        prods = G.compose[gp, ks]
        back = G.compose[prods, G.inverse[ks]]
        bad_idx = np.nonzero(back != gp)[0]
        if len(bad_idx):
            witness = (gp, int(ks[bad_idx[0]]))
            break
    entries["e_left_cancellation"] = AxiomCheck(witness is None, witness, checked)

    # g^-1 o (g o g'') = g'' over composable (g, g'')
    witness = None
    checked = 0
    for g in range(K):
        ks = np.nonzero(defined[g])[0]
        checked += len(ks)
        prods = G.compose[g, ks]
        back = G.compose[G.inverse[g], prods]
        bad_idx = np.nonzero(back != ks)[0]
        if len(bad_idx):
            witness = (g, int(ks[bad_idx[0]]))
            break
    entries["e_right_cancellation"] = AxiomCheck(witness is None, witness, checked)

    bad = np.nonzero(G.inverse[G.inverse[ids]] != ids)[0]
    entries["involution"] = AxiomCheck(len(bad) == 0, _first(bad), K)

    return AxiomReport(entries)


def _check_associativity(G, samples, rng) -> AxiomCheck:
    defined = G.compose != UNDEFINED
    if G.order <= EXHAUSTIVE_ORDER_LIMIT:
        checked = 0
        for g1 in range(G.order):
            ks = np.nonzero(defined[g1])[0]
            for g2 in ks:
                p12 = G.compose[g1, g2]
                g3s = np.nonzero(defined[p12] | defined[g2])[0]
                checked += len(g3s)
                for g3 in g3s:
                    lhs = rhs = UNDEFINED
                    if defined[p12, g3]:
                        lhs = G.compose[p12, g3]
                    if defined[g2, g3]:
                        p23 = G.compose[g2, g3]
                        if defined[g1, p23]:
                            rhs = G.compose[g1, p23]
                        # g2 o g3 defined but g1 o (g2 o g3) missing
                        elif lhs != UNDEFINED:
                            return AxiomCheck(False, (int(g1), int(g2), int(g3)), checked)
                    if lhs != rhs:
                        return AxiomCheck(False, (int(g1), int(g2), int(g3)), checked)
        return AxiomCheck(True, None, checked)

    rng = rng or np.random.default_rng(0)
    triple = rng.integers(0, G.order, size=(samples, 3))
    for g1, g2, g3 in triple:
        lhs = rhs = UNDEFINED
        if defined[g1, g2] and defined[G.compose[g1, g2], g3]:
            lhs = G.compose[G.compose[g1, g2], g3]
        if defined[g2, g3] and defined[g1, G.compose[g2, g3]]:
            rhs = G.compose[g1, G.compose[g2, g3]]
        if lhs != rhs:
            return AxiomCheck(False, (int(g1), int(g2), int(g3)), samples, sampled=True)
    return AxiomCheck(True, None, samples, sampled=True)


# ---------------------------------------------------------------------------
# derived structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Orbit:
    members: frozenset


@dataclass(frozen=True)
class IsotropyGroup:
    base_unit: int
    members: tuple
    table: np.ndarray  # composition in member indices

    @property
    def order(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Classification:
    principal: bool
    transitive: bool


@dataclass(frozen=True)
class ConnectingSet:
    """Elements from unit u0 to unit u1; empty iff the units are disconnected."""

    elements: frozenset
    connected: bool


def _require_sane(G: FiniteGroupoid) -> None:
    unit_mask = np.zeros(G.order, dtype=bool)
    unit_mask[list(G.units)] = True
    if not (unit_mask[G.source].all() and unit_mask[G.target].all()):
        raise GroupoidStructureError("source/target do not land in the units")


def orbits(G: FiniteGroupoid) -> list[Orbit]:
    """Partition of the units by reachability through groupoid elements."""
    _require_sane(G)
    parent = {u: u for u in G.units}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in range(G.order):
        a, b = find(int(G.target[g])), find(int(G.source[g]))
        if a != b:
            parent[a] = b
    groups: dict[int, set] = {}
    for u in G.units:
        groups.setdefault(find(u), set()).add(u)
    return [Orbit(frozenset(m)) for m in sorted(groups.values(), key=min)]


def isotropy_group(G: FiniteGroupoid, unit: int) -> IsotropyGroup:
    """The group of elements with source and target both equal to ``unit``."""
    if unit not in G.units:
        raise ValueError(f"element {unit} is not a unit")
    members = tuple(
        int(g)
        for g in range(G.order)
        if G.source[g] == unit and G.target[g] == unit
    )
    pos = {g: i for i, g in enumerate(members)}
    table = np.empty((len(members), len(members)), dtype=np.int64)
    for a in members:
        for b in members:
            c = G.product(a, b)
            if c is None or c not in pos:
                raise GroupoidStructureError(
                    f"isotropy set at unit {unit} is not closed under composition"
                )
            table[pos[a], pos[b]] = pos[c]
    return IsotropyGroup(base_unit=int(unit), members=members, table=table)


def classify(G: FiniteGroupoid) -> Classification:
    """Principal iff (r, s) is injective, transitive iff it is onto G0 x G0."""
    rs = set(zip(G.target.tolist(), G.source.tolist()))
    n_units = len(G.units)
    return Classification(
        principal=len(rs) == G.order,
        transitive=len(rs) == n_units * n_units,
    )


def connecting_coset(G: FiniteGroupoid, u0: int, u1: int) -> ConnectingSet:
    """All elements with source u0 and target u1 (the coset joining two units)."""
    for u in (u0, u1):
        if u not in G.units:
            raise ValueError(f"element {u} is not a unit")
    elems = frozenset(
        int(g)
        for g in range(G.order)
        if G.source[g] == u0 and G.target[g] == u1
    )
    return ConnectingSet(elements=elems, connected=bool(elems))
