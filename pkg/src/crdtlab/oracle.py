"""Brute-force lattice oracles for testing.

A ``FiniteLatticeOracle`` holds an explicit enumeration of a small lattice
and answers questions by exhaustive search: which elements are
join-irreducible (pairwise criterion), what the irredundant join
decompositions of an element are (subset search), and what the least delta
between two elements is (scan of the ideal).  Everything here is
deliberately independent of the per-type decomposition rules in
``crdtlab.crdts`` so the two can check each other.

Ideals of lex pairs and right-tagged sums are infinite (everything with a
smaller first component, or every left value, sits below), so for those the
enumerated universe is the interval from the value with its varying part
blanked out up to the value itself.  Decomposition members of such values
are the same in the full lattice and in that interval, except for the
blanked-out value itself, whose decomposition is handled structurally.
"""

from __future__ import annotations

from itertools import combinations, product

from .crdts import Bool, GCounter, GMap, GSet, LexPair, LinearSum, MaxSet, Nat, Pair, PNCounter
from .lattice import LatticeElement


class UniverseTooLarge(Exception):
    """The requested enumeration exceeded its element budget."""


# ---------------------------------------------------------------------------
# ideal enumeration, per concrete type


def _check(count, limit):
    if count > limit:
        raise UniverseTooLarge(f"ideal enumeration exceeded {limit} elements")


def _ideal_members(x, limit):
    if isinstance(x, Nat):
        _check(x.value + 1, limit)
        return [Nat(i) for i in range(x.value + 1)]
    if isinstance(x, Bool):
        return [Bool(False), Bool(True)] if x.value else [Bool(False)]
    if isinstance(x, GSet):
        elems = sorted(x.elements, key=str)
        _check(2 ** len(elems), limit)
        out = []
        for n in range(len(elems) + 1):
            out.extend(GSet(c) for c in combinations(elems, n))
        return out
    if isinstance(x, GCounter):
        keys = sorted(x.entries, key=str)
        total = 1
        for k in keys:
            total *= x.entries[k] + 1
            _check(total, limit)
        ranges = [range(x.entries[k] + 1) for k in keys]
        return [GCounter(dict(zip(keys, vals))) for vals in product(*ranges)]
    if isinstance(x, PNCounter):
        keys = sorted(x.entries, key=str)
        total = 1
        for k in keys:
            p, n = x.entries[k]
            total *= (p + 1) * (n + 1)
            _check(total, limit)
        ranges = [
            [(i, j) for i in range(x.entries[k][0] + 1) for j in range(x.entries[k][1] + 1)]
            for k in keys
        ]
        return [PNCounter(dict(zip(keys, vals))) for vals in product(*ranges)]
    if isinstance(x, GMap):
        keys = sorted(x.entries, key=str)
        per_key = []
        total = 1
        for k in keys:
            sub = _ideal_members(x.entries[k], limit)
            total *= len(sub)
            _check(total, limit)
            per_key.append(sub)
        return [
            GMap(x.value_bottom, dict(zip(keys, vals)))
            for vals in product(*per_key)
        ]
    if isinstance(x, Pair):
        firsts = _ideal_members(x.first, limit)
        seconds = _ideal_members(x.second, limit)
        _check(len(firsts) * len(seconds), limit)
        return [Pair(f, s) for f in firsts for s in seconds]
    if isinstance(x, MaxSet):
        if x.order.downset is None:
            raise UniverseTooLarge(f"order {x.order.name!r} cannot enumerate downsets")
        below = set()
        for e in x.elements:
            below.update(x.order.downset(e))
        below = sorted(below, key=str)
        _check(2 ** len(below), limit)
        out = []
        seen = set()
        for n in range(len(below) + 1):
            for c in combinations(below, n):
                if any(
                    a != b and x.order.order_leq(a, b) for a in c for b in c
                ):
                    continue  # not an antichain
                m = MaxSet(x.order, c)
                if m not in seen:
                    seen.add(m)
                    out.append(m)
        return out
    raise UniverseTooLarge(f"no ideal enumeration for {type(x).__name__}")


def enumerate_universe(x: LatticeElement, limit: int = 4096) -> list[LatticeElement]:
    """Enumerate a finite sublattice suitable for oracle checks on ``x``.

    For most types this is the full ideal below ``x``.  Lex pairs enumerate
    the interval fixing the first component; sums enumerate within the
    tagged side.  Raises ``UniverseTooLarge`` past ``limit`` elements.
    """
    if isinstance(x, LexPair):
        seconds = _ideal_members(x.second, limit)
        return [LexPair(x.first, s) for s in seconds]
    if isinstance(x, LinearSum):
        values = _ideal_members(x.value, limit)
        return [LinearSum(x.side, v, x.left_bottom) for v in values]
    return _ideal_members(x, limit)


# ---------------------------------------------------------------------------
# the oracle proper


class FiniteLatticeOracle:
    """Explicit enumeration of a small lattice with memoized joins."""

    def __init__(self, elements):
        self.elements = list(elements)
        self._index = {e: i for i, e in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise ValueError("duplicate elements in universe")
        self._join_memo: dict[tuple[int, int], int] = {}
        self.bottom = self._find_bottom()
        self._irreducible_flags = None

    @classmethod
    def for_element(cls, x: LatticeElement, limit: int = 4096) -> "FiniteLatticeOracle":
        return cls(enumerate_universe(x, limit))

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self._index

    def _find_bottom(self):
        # Bottom is the unique element below everything; joins detect it.
        for cand in self.elements:
            if all(cand.join(e) == e for e in self.elements):
                return cand
        raise ValueError("universe has no bottom element")

    def join(self, a, b):
        ia, ib = self._index[a], self._index[b]
        if ia > ib:
            ia, ib = ib, ia
        memo = self._join_memo.get((ia, ib))
        if memo is not None:
            return self.elements[memo]
        j = self.elements[ia].join(self.elements[ib])
        ij = self._index.get(j)
        if ij is None:
            raise ValueError("universe is not closed under join")
        self._join_memo[(ia, ib)] = ij
        return self.elements[ij]

    def leq(self, a, b):
        return self.join(a, b) == b

    def check_closed(self) -> bool:
        """True iff every pairwise join lands back in the universe."""
        try:
            for a in self.elements:
                for b in self.elements:
                    self.join(a, b)
        except ValueError:
            return False
        return True

    def ideal(self, x) -> "FiniteLatticeOracle":
        if x not in self._index:
            raise KeyError("element outside universe")
        return FiniteLatticeOracle([e for e in self.elements if self.leq(e, x)])

    def quotient(self, top, bottom) -> "FiniteLatticeOracle":
        """Sublattice of everything between ``bottom`` and ``top`` inclusive."""
        if not self.leq(bottom, top):
            raise ValueError("quotient bounds are not ordered")
        return FiniteLatticeOracle(
            [e for e in self.elements if self.leq(bottom, e) and self.leq(e, top)]
        )

    # -- join-irreducibility -------------------------------------------------

    def _compute_irreducibles(self):
        # Single pass over unordered pairs: any element produced by joining
        # two elements other than itself is reducible.  In a finite lattice
        # reducibility by any finite set folds down to a pair, so this is
        # exhaustive.  Bottom is the empty join and never irreducible.
        # Joins are not memoized here: the quadratic pass would swamp the
        # memo for nothing.
        elements, index = self.elements, self._index
        n = len(elements)
        flags = bytearray([1]) * n
        flags[index[self.bottom]] = 0
        for ia in range(n):
            ea = elements[ia]
            if ea is self.bottom:
                continue  # joins with bottom never produce a third element
            for ib in range(ia + 1, n):
                j = ea.join(elements[ib])
                ij = index.get(j)
                if ij is None:
                    raise ValueError("universe is not closed under join")
                if ij != ia and ij != ib:
                    flags[ij] = 0
        self._irreducible_flags = flags

    def is_join_irreducible(self, x) -> bool:
        if x not in self._index:
            raise KeyError("element outside universe")
        if self._irreducible_flags is None:
            self._compute_irreducibles()
        return self._irreducible_flags[self._index[x]]

    def join_irreducibles(self) -> list:
        if self._irreducible_flags is None:
            self._compute_irreducibles()
        return [e for i, e in enumerate(self.elements) if self._irreducible_flags[i]]

    # -- decompositions --------------------------------------------------------

    def join_of(self, parts) -> LatticeElement:
        acc = self.bottom
        for p in parts:
            acc = self.join(acc, p)
        return acc

    def maximals_decomposition(self, x) -> tuple:
        """Maximals of the join-irreducibles below ``x``, canonically sorted."""
        below = [r for r in self.join_irreducibles() if self.leq(r, x)]
        maxi = [
            r for r in below if not any(r != s and self.leq(r, s) for s in below)
        ]
        return tuple(sorted(maxi, key=lambda m: m.encode()))

    def irredundant_decompositions(self, x, max_irreducibles: int = 16) -> list[tuple]:
        """All irredundant join decompositions of ``x``, by subset search."""
        below = [r for r in self.join_irreducibles() if self.leq(r, x)]
        if len(below) > max_irreducibles:
            raise UniverseTooLarge(
                f"{len(below)} irreducibles below element, subset search refused"
            )
        found = []
        for n in range(len(below) + 1):
            for subset in combinations(below, n):
                if self.join_of(subset) != x:
                    continue
                redundant = any(
                    self.join_of(subset[:i] + subset[i + 1 :]) == x
                    for i in range(len(subset))
                )
                if not redundant:
                    found.append(tuple(sorted(subset, key=lambda m: m.encode())))
        return found

    def minimal_delta(self, a, b) -> LatticeElement:
        """Least ``c`` in the universe with ``c | b == a | b``; errors if none is least."""
        target = self.join(a, b)
        candidates = [c for c in self.elements if self.join(c, b) == target]
        least = [c for c in candidates if all(self.leq(c, other) for other in candidates)]
        if len(least) != 1:
            raise ValueError(f"{len(least)} minimal deltas found, expected exactly one")
        return least[0]
