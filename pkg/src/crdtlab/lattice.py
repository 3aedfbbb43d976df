"""Join-semilattice core.

Every replicated value in this package is an element of a join-semilattice
with a least element (bottom).  The partial order is never stored: it is
derived from the join, ``a <= b  iff  a | b == b``.  Concrete types override
``leq`` with something cheaper than materialising the join, and a property
test pins the two definitions to each other.

States decompose into *join-irreducible* pieces: elements that cannot be
produced by joining anything smaller.  ``decompose`` returns the unique
irredundant set of such pieces whose join rebuilds the state, and ``delta``
uses it to compute the smallest element that, joined onto ``b``, yields
``a | b``.  Those two functions carry all of the redundancy-removal logic
used by the synchronization protocols.
"""

from __future__ import annotations

from typing import Callable, Iterable


class IncompatibleLattice(TypeError):
    """Raised when two values of unrelated lattice types are combined."""


class VisitCounter:
    """Counts lattice entries touched by join/leq/decompose/delta.

    Deterministic stand-in for CPU time: each call charges the entry sizes
    of its operands, independent of short-circuiting, so two runs over the
    same event sequence report identical counts.
    """

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, n: int) -> None:
        self.count += n

    def reset(self) -> None:
        self.count = 0


#: Process-wide counter; the simulator resets it per run and attributes
#: per-node slices by snapshotting around event handlers.
VISITS = VisitCounter()


class LatticeElement:
    """Interface for lattice values.

    Concrete types provide:

    ``join(other)``        least upper bound (new value, operands untouched)
    ``leq(other)``         partial order test
    ``bottom()``           the least element of the *same* parametrization
    ``is_bottom()``        equality with bottom, usually O(1)
    ``decompose()``        irredundant join decomposition, canonically sorted
    ``size_in_entries()``  metric weight (see ``crdtlab.metrics``)
    ``encode()``           canonical, deterministic textual form

    Values are immutable after construction and safe to share.
    """

    __slots__ = ()

    def join(self, other):
        raise NotImplementedError

    def leq(self, other) -> bool:
        # Fallback: the order derived from join. Subclasses override.
        return self.join(other) == other

    def bottom(self):
        raise NotImplementedError

    def is_bottom(self) -> bool:
        return self == self.bottom()

    def decompose(self) -> tuple:
        raise NotImplementedError

    def size_in_entries(self) -> int:
        raise NotImplementedError

    def encode(self) -> str:
        raise NotImplementedError

    def _require_same_type(self, other) -> None:
        if type(self) is not type(other):
            raise IncompatibleLattice(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )


def join(a: LatticeElement, b: LatticeElement) -> LatticeElement:
    """Least upper bound of ``a`` and ``b`` (counted)."""
    VISITS.add(a.size_in_entries() + b.size_in_entries())
    return a.join(b)


def leq(a: LatticeElement, b: LatticeElement) -> bool:
    """True iff ``a`` is below-or-equal ``b`` in the derived order (counted)."""
    VISITS.add(a.size_in_entries() + b.size_in_entries())
    return a.leq(b)


def decompose(x: LatticeElement) -> tuple:
    """Unique irredundant join decomposition of ``x`` (counted).

    Members are join-irreducible, none is below the join of the others,
    bottom never appears, and the tuple is sorted by canonical encoding so
    output is reproducible.  ``decompose(bottom)`` is the empty tuple.
    """
    VISITS.add(x.size_in_entries())
    return x.decompose()


def join_all(parts: Iterable[LatticeElement], bottom: LatticeElement) -> LatticeElement:
    """Fold ``join`` over ``parts``, starting from ``bottom``."""
    acc = bottom
    for p in parts:
        acc = join(acc, p)
    return acc


def delta(a: LatticeElement, b: LatticeElement) -> LatticeElement:
    """Minimum element whose join with ``b`` equals ``a | b``.

    Joins exactly the decomposition members of ``a`` that are not already
    below ``b``.  Returns bottom iff ``a <= b``; any other ``c`` with
    ``c | b == a | b`` sits above the result.
    """
    a._require_same_type(b)
    fresh = [y for y in decompose(a) if not leq(y, b)]
    return join_all(fresh, a.bottom())


def derive_delta_mutator(m: Callable) -> Callable:
    """Turn a full mutator (an inflation) into its minimal delta-mutator.

    The result satisfies ``m(x) == join(x, d(x))`` and is the least delta
    doing so.
    """

    def d(x):
        return delta(m(x), x)

    return d
