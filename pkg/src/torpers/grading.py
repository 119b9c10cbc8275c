"""Degrees, the componentwise partial order and multiset bookkeeping.

A degree is a tuple of n non-negative ints.  Everything downstream is graded
by these: module pieces, generators of free resolutions, the invariants
themselves.  An invariant is a multiset of degrees, stored as a dict
degree -> multiplicity with positive values only.
"""

from __future__ import annotations

import itertools


def as_degree(v):
    """Coerce to a validated degree tuple."""
    t = tuple(int(x) for x in v)
    if any(x < 0 for x in t):
        raise ValueError("degree has a negative entry: %r" % (t,))
    return t


def leq(u, v):
    """Componentwise u <= v."""
    return len(u) == len(v) and all(a <= b for a, b in zip(u, v))


def join(degrees, n=None):
    """Componentwise maximum; the empty join is the origin (needs n)."""
    degrees = list(degrees)
    if not degrees:
        if n is None:
            raise ValueError("empty join needs an ambient dimension")
        return (0,) * n
    return tuple(max(col) for col in zip(*degrees))


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    """u - v, defined only when v <= u."""
    if not leq(v, u):
        raise ValueError("cannot subtract %r from %r" % (v, u))
    return tuple(a - b for a, b in zip(u, v))


def step(v, axis):
    """v + e_axis."""
    return tuple(a + (1 if i == axis else 0) for i, a in enumerate(v))


def grid(bound):
    """All degrees v <= bound in lexicographic order."""
    return itertools.product(*(range(b + 1) for b in bound))


def below(v):
    """All degrees u <= v in lexicographic order (same as grid)."""
    return grid(v)


# multisets of degrees ------------------------------------------------------


def multiset(pairs):
    """Build a multiset dict from (degree, multiplicity) pairs, merging repeats."""
    out = {}
    for deg, mult in pairs:
        deg = as_degree(deg)
        mult = int(mult)
        if mult < 0:
            raise ValueError("negative multiplicity for %r" % (deg,))
        if mult:
            out[deg] = out.get(deg, 0) + mult
    return out


def multiset_from_list(degrees):
    """Multiset dict from a plain list of degrees (each counted once)."""
    return multiset((d, 1) for d in degrees)


def multiset_size(ms):
    return sum(ms.values())


def multiset_to_sorted_pairs(ms):
    """Canonical serialization order: degrees sorted lexicographically."""
    return [(deg, ms[deg]) for deg in sorted(ms)]


def multiset_to_json(ms):
    """JSON-ready form: [[degree-list, multiplicity], ...] sorted by degree."""
    return [[list(deg), mult] for deg, mult in multiset_to_sorted_pairs(ms)]


def multiset_from_json(data):
    return multiset((tuple(deg), mult) for deg, mult in data)


def staircase_count(ms, v):
    """Number of multiset elements (with multiplicity) at degrees <= v.

    This is the dimension at v of the free module with one generator per
    multiset element.
    """
    return sum(mult for deg, mult in ms.items() if leq(deg, v))
