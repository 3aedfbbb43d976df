"""Concrete CRDTs and lattice composition constructs.

Base building blocks are two chains (``Nat``, ``Bool``), grow-only sets and
counters, and a positive-negative counter.  Larger states are assembled with
the usual constructs: cartesian product (``Pair``), lexicographic product
with a chain first component (``LexPair``), linear sum (``LinearSum``),
grow-only maps from keys to any lattice (``GMap``), and antichains of
maximal elements of a partial order (``MaxSet``).

Each construct carries its own decomposition rule:

=============  ========================================================
chain ``c``    ``{c}`` (empty for bottom)
set ``s``      one singleton per element
counter ``p``  one single-entry map per key
pair           first's pieces paired with bottom, plus the mirror image
lex pair       first component kept, second component decomposed
linear sum     pieces of the wrapped value, re-tagged
map ``f``      ``{k -> w}`` for every key and every piece ``w`` of ``f(k)``
max-set        one singleton antichain per member
=============  ========================================================

Two boundary cases are not covered by the composite rules and are handled
explicitly: a lex pair whose second component is bottom, and a right-tagged
sum wrapping bottom.  Both are join-irreducible on their own (no join of
strictly smaller values can reach them), so they decompose to themselves.

Map-like states are kept in normal form: entries whose value is the value
lattice's bottom are never stored, so structural equality coincides with
lattice equality and decompositions are unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .lattice import IncompatibleLattice, LatticeElement


def _sorted_members(members) -> tuple:
    return tuple(sorted(members, key=lambda m: m.encode()))


# ---------------------------------------------------------------------------
# chains


class Nat(LatticeElement):
    """Natural numbers under max; bottom is 0."""

    __slots__ = ("value",)

    def __init__(self, value: int = 0):
        if not isinstance(value, int) or value < 0:
            raise ValueError(f"Nat needs a non-negative int, got {value!r}")
        self.value = value

    def join(self, other):
        self._require_same_type(other)
        return self if self.value >= other.value else other

    def leq(self, other):
        self._require_same_type(other)
        return self.value <= other.value

    def bottom(self):
        return Nat(0)

    def is_bottom(self):
        return self.value == 0

    def decompose(self):
        return (self,) if self.value else ()

    def size_in_entries(self):
        return 1 if self.value else 0

    def encode(self):
        return str(self.value)

    def __eq__(self, other):
        return type(other) is Nat and self.value == other.value

    def __hash__(self):
        return hash(("Nat", self.value))

    def __repr__(self):
        return f"Nat({self.value})"


class Bool(LatticeElement):
    """Two-point chain false < true."""

    __slots__ = ("value",)

    def __init__(self, value: bool = False):
        self.value = bool(value)

    def join(self, other):
        self._require_same_type(other)
        return self if self.value else other

    def leq(self, other):
        self._require_same_type(other)
        return (not self.value) or other.value

    def bottom(self):
        return Bool(False)

    def is_bottom(self):
        return not self.value

    def decompose(self):
        return (self,) if self.value else ()

    def size_in_entries(self):
        return 1 if self.value else 0

    def encode(self):
        return "1" if self.value else "0"

    def __eq__(self, other):
        return type(other) is Bool and self.value == other.value

    def __hash__(self):
        return hash(("Bool", self.value))

    def __repr__(self):
        return f"Bool({self.value})"


CHAIN_TYPES = (Nat, Bool)


# ---------------------------------------------------------------------------
# grow-only set


class GSet(LatticeElement):
    """Grow-only set; join is union."""

    __slots__ = ("elements", "_hash")

    def __init__(self, elements=()):
        self.elements = frozenset(elements)
        self._hash = None

    def join(self, other):
        self._require_same_type(other)
        return GSet(self.elements | other.elements)

    def leq(self, other):
        self._require_same_type(other)
        return self.elements <= other.elements

    def bottom(self):
        return GSet()

    def is_bottom(self):
        return not self.elements

    def decompose(self):
        return _sorted_members(GSet((e,)) for e in self.elements)

    def size_in_entries(self):
        return len(self.elements)

    def encode(self):
        return ",".join(sorted(str(e) for e in self.elements))

    def value(self):
        return self.elements

    def __contains__(self, e):
        return e in self.elements

    def __eq__(self, other):
        return type(other) is GSet and self.elements == other.elements

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("GSet", self.elements))
        return self._hash

    def __repr__(self):
        return f"GSet({sorted(map(str, self.elements))})"


# ---------------------------------------------------------------------------
# counters


class GCounter(LatticeElement):
    """Grow-only counter: replica id -> increment count, joined entrywise by max.

    Zero entries are dropped at construction so the representation of each
    abstract state is unique.
    """

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Mapping[str, int] | None = None):
        self._hash = None
        clean = {}
        for k, v in (entries or {}).items():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"counter entry {k!r} must be a non-negative int")
            if v:
                clean[k] = v
        self.entries = clean

    def join(self, other):
        self._require_same_type(other)
        merged = dict(self.entries)
        for k, v in other.entries.items():
            if v > merged.get(k, 0):
                merged[k] = v
        return GCounter(merged)

    def leq(self, other):
        self._require_same_type(other)
        return all(v <= other.entries.get(k, 0) for k, v in self.entries.items())

    def bottom(self):
        return GCounter()

    def is_bottom(self):
        return not self.entries

    def decompose(self):
        return _sorted_members(GCounter({k: v}) for k, v in self.entries.items())

    def size_in_entries(self):
        return len(self.entries)

    def encode(self):
        return ",".join(f"{k}:{v}" for k, v in sorted(self.entries.items(), key=lambda kv: str(kv[0])))

    def value(self):
        return sum(self.entries.values())

    def get(self, k):
        return self.entries.get(k, 0)

    def __eq__(self, other):
        return type(other) is GCounter and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("GCounter", frozenset(self.entries.items())))
        return self._hash

    def __repr__(self):
        return f"GCounter({self.entries})"


class PNCounter(LatticeElement):
    """Counter with increments and decrements, one (inc, dec) pair per replica.

    The pair components join independently (entrywise max); the counter value
    is total increments minus total decrements.  ``(0, 0)`` entries are
    dropped at construction.
    """

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Mapping[str, tuple] | None = None):
        self._hash = None
        clean = {}
        for k, (p, n) in (entries or {}).items():
            if p < 0 or n < 0:
                raise ValueError(f"counter entry {k!r} must be non-negative")
            if p or n:
                clean[k] = (p, n)
        self.entries = clean

    def join(self, other):
        self._require_same_type(other)
        merged = dict(self.entries)
        for k, (p, n) in other.entries.items():
            mp, mn = merged.get(k, (0, 0))
            merged[k] = (max(mp, p), max(mn, n))
        return PNCounter(merged)

    def leq(self, other):
        self._require_same_type(other)
        for k, (p, n) in self.entries.items():
            op, on = other.entries.get(k, (0, 0))
            if p > op or n > on:
                return False
        return True

    def bottom(self):
        return PNCounter()

    def is_bottom(self):
        return not self.entries

    def decompose(self):
        members = []
        for k, (p, n) in self.entries.items():
            if p:
                members.append(PNCounter({k: (p, 0)}))
            if n:
                members.append(PNCounter({k: (0, n)}))
        return _sorted_members(members)

    def size_in_entries(self):
        # Each entry carries two independent tallies.
        return 2 * len(self.entries)

    def encode(self):
        return ",".join(
            f"{k}:{p}/{n}" for k, (p, n) in sorted(self.entries.items(), key=lambda kv: str(kv[0]))
        )

    def value(self):
        return sum(p for p, _ in self.entries.values()) - sum(n for _, n in self.entries.values())

    def __eq__(self, other):
        return type(other) is PNCounter and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("PNCounter", frozenset(self.entries.items())))
        return self._hash

    def __repr__(self):
        return f"PNCounter({self.entries})"


# ---------------------------------------------------------------------------
# grow-only map


class GMap(LatticeElement):
    """Grow-only map from keys to values of one lattice type.

    Parametrized by a bottom value of the value lattice; an absent key reads
    as that bottom, and entries equal to it are never stored.
    """

    __slots__ = ("value_bottom", "entries", "_size", "_hash")

    def __init__(self, value_bottom: LatticeElement, entries: Mapping | None = None):
        self.value_bottom = value_bottom
        clean = {}
        for k, v in (entries or {}).items():
            if type(v) is not type(value_bottom):
                raise IncompatibleLattice(
                    f"map value for {k!r} is {type(v).__name__}, expected {type(value_bottom).__name__}"
                )
            if not v.is_bottom():
                clean[k] = v
        self.entries = clean
        self._size = sum(v.size_in_entries() for v in clean.values())
        self._hash = None

    def _check_compatible(self, other):
        self._require_same_type(other)
        if self.value_bottom != other.value_bottom:
            raise IncompatibleLattice("maps have different value lattices")

    def join(self, other):
        self._check_compatible(other)
        merged = dict(self.entries)
        for k, v in other.entries.items():
            mine = merged.get(k)
            merged[k] = v if mine is None else mine.join(v)
        return GMap(self.value_bottom, merged)

    def leq(self, other):
        self._check_compatible(other)
        for k, v in self.entries.items():
            o = other.entries.get(k)
            if o is None or not v.leq(o):
                return False
        return True

    def bottom(self):
        return GMap(self.value_bottom)

    def is_bottom(self):
        return not self.entries

    def decompose(self):
        members = []
        for k, v in self.entries.items():
            for w in v.decompose():
                members.append(GMap(self.value_bottom, {k: w}))
        return _sorted_members(members)

    def size_in_entries(self):
        return self._size

    def encode(self):
        return ",".join(
            f"{k}:{{{v.encode()}}}"
            for k, v in sorted(self.entries.items(), key=lambda kv: str(kv[0]))
        )

    def get(self, k):
        return self.entries.get(k, self.value_bottom)

    def keys(self):
        return self.entries.keys()

    def __eq__(self, other):
        return (
            type(other) is GMap
            and self.value_bottom == other.value_bottom
            and self.entries == other.entries
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("GMap", self.value_bottom, frozenset(self.entries.items())))
        return self._hash

    def __repr__(self):
        return f"GMap({self.entries})"


# ---------------------------------------------------------------------------
# products and sums


class Pair(LatticeElement):
    """Cartesian product of two lattices, joined componentwise."""

    __slots__ = ("first", "second", "_hash")

    def __init__(self, first: LatticeElement, second: LatticeElement):
        self.first = first
        self.second = second
        self._hash = None

    def _check_compatible(self, other):
        self._require_same_type(other)
        if type(self.first) is not type(other.first) or type(self.second) is not type(other.second):
            raise IncompatibleLattice("pair components differ in type")

    def join(self, other):
        self._check_compatible(other)
        return Pair(self.first.join(other.first), self.second.join(other.second))

    def leq(self, other):
        self._check_compatible(other)
        return self.first.leq(other.first) and self.second.leq(other.second)

    def bottom(self):
        return Pair(self.first.bottom(), self.second.bottom())

    def is_bottom(self):
        return self.first.is_bottom() and self.second.is_bottom()

    def decompose(self):
        fb = self.first.bottom()
        sb = self.second.bottom()
        members = [Pair(m, sb) for m in self.first.decompose()]
        members += [Pair(fb, m) for m in self.second.decompose()]
        return _sorted_members(members)

    def size_in_entries(self):
        return self.first.size_in_entries() + self.second.size_in_entries()

    def encode(self):
        return f"({self.first.encode()}|{self.second.encode()})"

    def __eq__(self, other):
        return type(other) is Pair and self.first == other.first and self.second == other.second

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("Pair", self.first, self.second))
        return self._hash

    def __repr__(self):
        return f"Pair({self.first!r}, {self.second!r})"


class LexPair(LatticeElement):
    """Lexicographic product whose first component must be a chain.

    With a totally ordered first component any two values are comparable on
    it, the join stays simple (take the larger first component, join the
    seconds on ties) and decompositions stay unique.  Arbitrary first
    components would break uniqueness, so construction rejects them.

    Decomposition keeps the first component and decomposes the second; when
    the second is bottom the value itself is the only piece (nothing smaller
    joins up to it).
    """

    __slots__ = ("first", "second", "_hash")

    def __init__(self, first: LatticeElement, second: LatticeElement):
        self._hash = None
        if not isinstance(first, CHAIN_TYPES):
            raise IncompatibleLattice(
                f"lex pair first component must be a chain (Nat or Bool), got {type(first).__name__}"
            )
        self.first = first
        self.second = second

    def _check_compatible(self, other):
        self._require_same_type(other)
        if type(self.first) is not type(other.first) or type(self.second) is not type(other.second):
            raise IncompatibleLattice("lex pair components differ in type")

    def join(self, other):
        self._check_compatible(other)
        if self.first == other.first:
            return LexPair(self.first, self.second.join(other.second))
        if self.first.leq(other.first):
            return other
        return self

    def leq(self, other):
        self._check_compatible(other)
        if self.first == other.first:
            return self.second.leq(other.second)
        return self.first.leq(other.first)

    def bottom(self):
        return LexPair(self.first.bottom(), self.second.bottom())

    def is_bottom(self):
        return self.first.is_bottom() and self.second.is_bottom()

    def decompose(self):
        if self.second.is_bottom():
            return () if self.first.is_bottom() else (self,)
        return _sorted_members(LexPair(self.first, m) for m in self.second.decompose())

    def size_in_entries(self):
        return self.first.size_in_entries() + self.second.size_in_entries()

    def encode(self):
        return f"<{self.first.encode()}|{self.second.encode()}>"

    def __eq__(self, other):
        return type(other) is LexPair and self.first == other.first and self.second == other.second

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("LexPair", self.first, self.second))
        return self._hash

    def __repr__(self):
        return f"LexPair({self.first!r}, {self.second!r})"


class LinearSum(LatticeElement):
    """Linear sum of two lattices: every left value sits below every right one.

    Bottom is the left lattice's bottom, so right-tagged values must carry
    the left bottom along to be able to produce it.  A right-tagged bottom is
    not the global bottom and is join-irreducible, hence decomposes to
    itself.
    """

    __slots__ = ("side", "value", "left_bottom", "_hash")

    LEFT = "L"
    RIGHT = "R"

    def __init__(self, side: str, value: LatticeElement, left_bottom: LatticeElement):
        if side not in (self.LEFT, self.RIGHT):
            raise ValueError(f"side must be 'L' or 'R', got {side!r}")
        self.side = side
        self.value = value
        self.left_bottom = left_bottom
        self._hash = None

    @classmethod
    def left(cls, value: LatticeElement):
        return cls(cls.LEFT, value, value.bottom())

    @classmethod
    def right(cls, value: LatticeElement, left_bottom: LatticeElement):
        return cls(cls.RIGHT, value, left_bottom)

    def _check_compatible(self, other):
        self._require_same_type(other)
        if self.left_bottom != other.left_bottom:
            raise IncompatibleLattice("sums have different left lattices")
        if self.side == other.side and type(self.value) is not type(other.value):
            raise IncompatibleLattice("sum values differ in type")

    def join(self, other):
        self._check_compatible(other)
        if self.side == other.side:
            return LinearSum(self.side, self.value.join(other.value), self.left_bottom)
        # Mixed sides: lefts are below rights, so the right operand wins.
        return self if self.side == self.RIGHT else other

    def leq(self, other):
        self._check_compatible(other)
        if self.side == other.side:
            return self.value.leq(other.value)
        return self.side == self.LEFT

    def bottom(self):
        return LinearSum(self.LEFT, self.left_bottom, self.left_bottom)

    def is_bottom(self):
        return self.side == self.LEFT and self.value.is_bottom()

    def decompose(self):
        if self.value.is_bottom():
            return () if self.side == self.LEFT else (self,)
        return _sorted_members(
            LinearSum(self.side, m, self.left_bottom) for m in self.value.decompose()
        )

    def size_in_entries(self):
        return self.value.size_in_entries()

    def encode(self):
        return f"{self.side}:{self.value.encode()}"

    def __eq__(self, other):
        return (
            type(other) is LinearSum
            and self.side == other.side
            and self.value == other.value
            and self.left_bottom == other.left_bottom
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("LinearSum", self.side, self.value))
        return self._hash

    def __repr__(self):
        return f"LinearSum({self.side}, {self.value!r})"


# ---------------------------------------------------------------------------
# antichains over a partial order


@dataclass(frozen=True)
class PartialOrder:
    """A named partial order on plain hashable elements.

    ``contains`` guards element membership, ``order_leq`` is reflexive, and
    ``downset`` (optional) enumerates everything at-or-below an element so
    oracle tests can enumerate ideals.  Instances compare by name.
    """

    name: str
    order_leq: Callable = field(compare=False)
    contains: Callable = field(compare=False)
    downset: Callable | None = field(default=None, compare=False)


def _divides(a, b):
    return b % a == 0


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


#: Positive integers ordered by divisibility.
DIVIDES = PartialOrder(
    name="divides",
    order_leq=_divides,
    contains=lambda e: isinstance(e, int) and e >= 1,
    downset=_divisors,
)

#: Pairs of small non-negative ints, ordered componentwise.
GRID = PartialOrder(
    name="grid",
    order_leq=lambda a, b: a[0] <= b[0] and a[1] <= b[1],
    contains=lambda e: isinstance(e, tuple) and len(e) == 2,
    downset=lambda e: [(i, j) for i in range(e[0] + 1) for j in range(e[1] + 1)],
)

_ORDERS = {o.name: o for o in (DIVIDES, GRID)}


def order_by_name(name: str) -> PartialOrder:
    return _ORDERS[name]


class MaxSet(LatticeElement):
    """Antichain of maximal elements of a partial order.

    Join keeps only the maximal elements of the union, so no two stored
    members are ever comparable.  One antichain is below another when each
    of its members sits below some member of the other.
    """

    __slots__ = ("order", "elements", "_hash")

    def __init__(self, order: PartialOrder, elements=()):
        items = set()
        for e in elements:
            if not order.contains(e):
                raise ValueError(f"{e!r} is not an element of order {order.name!r}")
            items.add(e)
        keep = frozenset(
            x for x in items if not any(x != y and order.order_leq(x, y) for y in items)
        )
        self.order = order
        self.elements = keep
        self._hash = None

    def _check_compatible(self, other):
        self._require_same_type(other)
        if self.order != other.order:
            raise IncompatibleLattice("max-sets built over different orders")

    def join(self, other):
        self._check_compatible(other)
        return MaxSet(self.order, self.elements | other.elements)

    def leq(self, other):
        self._check_compatible(other)
        return all(
            any(self.order.order_leq(x, y) for y in other.elements) for x in self.elements
        )

    def bottom(self):
        return MaxSet(self.order)

    def is_bottom(self):
        return not self.elements

    def decompose(self):
        return _sorted_members(MaxSet(self.order, (e,)) for e in self.elements)

    def size_in_entries(self):
        return len(self.elements)

    def encode(self):
        return ",".join(sorted(str(e) for e in self.elements))

    def __eq__(self, other):
        return type(other) is MaxSet and self.order == other.order and self.elements == other.elements

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("MaxSet", self.order.name, self.elements))
        return self._hash

    def __repr__(self):
        return f"MaxSet({self.order.name}, {sorted(map(str, self.elements))})"


# ---------------------------------------------------------------------------
# optimal delta-mutators (callables state -> delta) and full update ops


def inc(replica_id: str) -> Callable[[GCounter], GCounter]:
    """Delta-mutator bumping one replica's tally; always ships one entry."""

    def d(p: GCounter) -> GCounter:
        return GCounter({replica_id: p.get(replica_id) + 1})

    return d


def add(element) -> Callable[[GSet], GSet]:
    """Delta-mutator adding one element; ships nothing if already present."""

    def d(s: GSet) -> GSet:
        return GSet() if element in s else GSet((element,))

    return d


def pn_inc(replica_id: str) -> Callable[[PNCounter], PNCounter]:
    def d(p: PNCounter) -> PNCounter:
        cur, _ = p.entries.get(replica_id, (0, 0))
        return PNCounter({replica_id: (cur + 1, 0)})

    return d


def pn_dec(replica_id: str) -> Callable[[PNCounter], PNCounter]:
    def d(p: PNCounter) -> PNCounter:
        _, cur = p.entries.get(replica_id, (0, 0))
        return PNCounter({replica_id: (0, cur + 1)})

    return d


def map_update(key, value_dmut: Callable) -> Callable[[GMap], GMap]:
    """Delta-mutator updating one key through a delta-mutator of the value type.

    The value delta is computed against the current value (bottom for absent
    keys); a bottom value delta propagates to a bottom map delta.
    """

    def d(f: GMap) -> GMap:
        dv = value_dmut(f.get(key))
        if dv.is_bottom():
            return f.bottom()
        return GMap(f.value_bottom, {key: dv})

    return d


def gcounter_inc(replica_id: str, p: GCounter) -> tuple[GCounter, GCounter]:
    """Increment; returns the new full state and the shipped delta."""
    d = inc(replica_id)(p)
    return p.join(d), d


def gset_add(element, s: GSet) -> tuple[GSet, GSet]:
    d = add(element)(s)
    return s.join(d), d


def pncounter_inc(replica_id: str, p: PNCounter) -> tuple[PNCounter, PNCounter]:
    d = pn_inc(replica_id)(p)
    return p.join(d), d


def pncounter_dec(replica_id: str, p: PNCounter) -> tuple[PNCounter, PNCounter]:
    d = pn_dec(replica_id)(p)
    return p.join(d), d


def gmap_update(key, value_dmut: Callable, f: GMap) -> tuple[GMap, GMap]:
    d = map_update(key, value_dmut)(f)
    return f.join(d), d


# ---------------------------------------------------------------------------
# canonical encodings: parsing (the encode side lives on each type)


def parse_gset(text: str) -> GSet:
    """Inverse of ``GSet.encode`` for string elements."""
    if text == "":
        return GSet()
    return GSet(text.split(","))


def parse_gcounter(text: str) -> GCounter:
    if text == "":
        return GCounter()
    entries = {}
    for part in text.split(","):
        k, _, v = part.partition(":")
        if not _ or k in entries:
            raise ValueError(f"bad counter entry {part!r}")
        entries[k] = int(v)
    return GCounter(entries)


def parse_pncounter(text: str) -> PNCounter:
    if text == "":
        return PNCounter()
    entries = {}
    for part in text.split(","):
        k, _, pair = part.partition(":")
        p, sep, n = pair.partition("/")
        if not _ or not sep or k in entries:
            raise ValueError(f"bad counter entry {part!r}")
        entries[k] = (int(p), int(n))
    return PNCounter(entries)


def _split_top_level(text: str) -> list[str]:
    """Split on commas that are not nested inside braces."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced braces")
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth:
        raise ValueError("unbalanced braces")
    parts.append(text[start:])
    return parts


def parse_gmap_of_gsets(text: str) -> GMap:
    """Inverse of ``GMap.encode`` for maps whose values are string sets."""
    bottom = GSet()
    if text == "":
        return GMap(bottom)
    entries = {}
    for part in _split_top_level(text):
        k, sep, enc = part.partition(":")
        if not sep or not enc.startswith("{") or not enc.endswith("}") or k in entries:
            raise ValueError(f"bad map entry {part!r}")
        entries[k] = parse_gset(enc[1:-1])
    return GMap(bottom, entries)


#: Type tags understood by the command-line decomposition tool.
PARSERS: dict[str, Callable[[str], LatticeElement]] = {
    "gset": parse_gset,
    "gcounter": parse_gcounter,
    "pncounter": parse_pncounter,
    "gmap": parse_gmap_of_gsets,
}
