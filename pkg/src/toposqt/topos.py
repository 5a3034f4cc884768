"""Presheaf machinery over a finite poset.

Presheaves are stored extensionally: a finite point set per stage and
explicit restriction tables for every comparable pair. That makes
functoriality, naturality and subobject closure checkable exactly, and
everything serializable. Sieves at a stage are down-closed subsets of its
down-set; the subobject classifier assigns all sieves to each stage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import AmbientMismatch, InvariantViolation, NotMonotone, NotNatural


@dataclass(frozen=True)
class FinitePoset:
    """Finite partial order on opaque hashable ids."""

    elements: tuple
    relation: frozenset  # pairs (a, b) meaning a <= b

    def __post_init__(self):
        elems = set(self.elements)
        if len(elems) != len(self.elements):
            raise InvariantViolation("poset elements must be distinct")
        for a, b in self.relation:
            if a not in elems or b not in elems:
                raise InvariantViolation(f"relation pair {(a, b)} off the carrier")
        for a in self.elements:
            if (a, a) not in self.relation:
                raise InvariantViolation(f"missing reflexive pair for {a}")
        for a, b in self.relation:
            if a != b and (b, a) in self.relation:
                raise InvariantViolation(f"antisymmetry fails on {a}, {b}")
        for a, b in self.relation:
            for c in self.elements:
                if (b, c) in self.relation and (a, c) not in self.relation:
                    raise InvariantViolation(f"transitivity fails on {a} <= {b} <= {c}")

    def leq(self, a, b) -> bool:
        return (a, b) in self.relation

    def down_set(self, v) -> tuple:
        return tuple(a for a in self.elements if (a, v) in self.relation)

    def comparable_pairs(self) -> list[tuple]:
        """All (small, large) pairs with small <= large, including equal ones."""
        return [(a, b) for b in self.elements for a in self.elements if self.leq(a, b)]

    def covers(self) -> list[tuple]:
        """Hasse-diagram edges (a, b): a < b with nothing strictly between."""
        out = []
        for a, b in self.relation:
            if a == b:
                continue
            if any(c not in (a, b) and self.leq(a, c) and self.leq(c, b)
                   for c in self.elements):
                continue
            out.append((a, b))
        return sorted(out, key=repr)


def chain_poset(n: int) -> FinitePoset:
    """The linear order 0 < 1 < ... < n-1."""
    rel = frozenset((i, j) for i in range(n) for j in range(n) if i <= j)
    return FinitePoset(tuple(range(n)), rel)


@dataclass
class Presheaf:
    """Contravariant functor to finite sets, given by explicit tables.

    sets[v] is the finite point tuple at stage v; restrictions[(small, large)]
    maps points at the larger stage to points at the smaller one. The pair
    (v, v) may be omitted; lookups treat it as the identity.
    """

    poset: FinitePoset
    sets: dict
    restrictions: dict

    def stage(self, v) -> tuple:
        return self.sets[v]

    def restrict(self, point, small, large):
        if small == large:
            return point
        return self.restrictions[(small, large)][point]

    def restriction_map(self, small, large) -> dict:
        if small == large:
            return {x: x for x in self.sets[large]}
        return self.restrictions[(small, large)]


def presheaf_failures(f: Presheaf) -> list[str]:
    """Diagnostics for the presheaf laws; empty list means all squares commute."""
    out = []
    poset = f.poset
    for v in poset.elements:
        if v not in f.sets:
            out.append(f"stage {v!r} has no point set")
    for small, large in poset.comparable_pairs():
        if small == large:
            stored = f.restrictions.get((small, large))
            if stored is not None and any(stored[x] != x for x in f.sets[large]):
                out.append(f"restriction along {large!r} <= {large!r} is not identity")
            continue
        table = f.restrictions.get((small, large))
        if table is None:
            out.append(f"missing restriction table for {small!r} <= {large!r}")
            continue
        for x in f.sets[large]:
            if x not in table:
                out.append(f"restriction {small!r} <= {large!r} undefined on {x!r}")
            elif table[x] not in f.sets[small]:
                out.append(f"restriction {small!r} <= {large!r} leaves the stage set")
    # Composition r_{w<=u} = r_{w<=v} o r_{v<=u} over every chain w <= v <= u.
    for w, v in poset.comparable_pairs():
        for u in poset.elements:
            if not poset.leq(v, u):
                continue
            try:
                for x in f.sets[u]:
                    one_step = f.restrict(x, w, u)
                    two_step = f.restrict(f.restrict(x, v, u), w, v)
                    if one_step != two_step:
                        out.append(
                            f"composition fails on chain {w!r} <= {v!r} <= {u!r} at {x!r}"
                        )
                        break
            except KeyError:
                continue  # already reported as a missing table
    return out


def check_presheaf(f: Presheaf) -> bool:
    return not presheaf_failures(f)


@dataclass
class NaturalTransformation:
    """Stagewise maps between two presheaves over the same poset."""

    source: Presheaf
    target: Presheaf
    components: dict  # stage -> {source point -> target point}

    def at(self, v) -> dict:
        return self.components[v]


def naturality_failures(eta: NaturalTransformation) -> list[str]:
    out = []
    src, tgt = eta.source, eta.target
    if src.poset != tgt.poset:
        return ["source and target live over different posets"]
    for v in src.poset.elements:
        comp = eta.components.get(v)
        if comp is None:
            out.append(f"missing component at stage {v!r}")
            continue
        for x in src.sets[v]:
            if x not in comp:
                out.append(f"component at {v!r} undefined on {x!r}")
            elif comp[x] not in tgt.sets[v]:
                out.append(f"component at {v!r} maps {x!r} outside the target stage")
    for small, large in src.poset.comparable_pairs():
        if small == large:
            continue
        try:
            for x in src.sets[large]:
                down_then_map = eta.components[small][src.restrict(x, small, large)]
                map_then_down = tgt.restrict(eta.components[large][x], small, large)
                if down_then_map != map_then_down:
                    out.append(
                        f"naturality square fails for {small!r} <= {large!r} at {x!r}"
                    )
                    break
        except KeyError:
            continue
    return out


def check_naturality(eta: NaturalTransformation) -> bool:
    return not naturality_failures(eta)


def is_monic(eta: NaturalTransformation) -> bool:
    """Monic in a presheaf topos: every component injective."""
    if naturality_failures(eta):
        raise NotNatural("transformation fails naturality; monic test undefined")
    for v in eta.source.poset.elements:
        comp = eta.components[v]
        values = [comp[x] for x in eta.source.sets[v]]
        if len(set(values)) != len(values):
            return False
    return True


def compose_nat(second: NaturalTransformation, first: NaturalTransformation) -> NaturalTransformation:
    """Vertical composition second o first."""
    if first.target.sets != second.source.sets:
        raise AmbientMismatch("composition requires matching middle presheaf")
    comps = {
        v: {x: second.components[v][first.components[v][x]] for x in first.source.sets[v]}
        for v in first.source.poset.elements
    }
    return NaturalTransformation(first.source, second.target, comps)


# ---------------------------------------------------------------------------
# Sieves and the subobject classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sieve:
    """A down-closed subset of the down-set of `at`."""

    at: object
    members: frozenset

    def is_down_closed(self, poset: FinitePoset) -> bool:
        down = set(poset.down_set(self.at))
        if not set(self.members) <= down:
            return False
        return all(
            w in self.members
            for v in self.members
            for w in down
            if poset.leq(w, v)
        )

    def require_down_closed(self, poset: FinitePoset) -> "Sieve":
        if not self.is_down_closed(poset):
            raise InvariantViolation(f"sieve at {self.at!r} is not down-closed")
        return self

    @property
    def is_empty(self) -> bool:
        return not self.members


def maximal_sieve(poset: FinitePoset, at) -> Sieve:
    return Sieve(at, frozenset(poset.down_set(at)))


def all_sieves(poset: FinitePoset, at) -> list[frozenset]:
    """Every down-closed subset of the down-set of `at`, in a stable order."""
    down = poset.down_set(at)
    out = []
    for r in range(len(down) + 1):
        for combo in itertools.combinations(down, r):
            s = frozenset(combo)
            if Sieve(at, s).is_down_closed(poset):
                out.append(s)
    return sorted(out, key=lambda s: (len(s), sorted(map(repr, s))))


def sieve_meet(s: Sieve, t: Sieve) -> Sieve:
    _same_stage(s, t)
    return Sieve(s.at, s.members & t.members)


def sieve_join(s: Sieve, t: Sieve) -> Sieve:
    _same_stage(s, t)
    return Sieve(s.at, s.members | t.members)


def sieve_implies(poset: FinitePoset, s: Sieve, t: Sieve) -> Sieve:
    _same_stage(s, t)
    down = poset.down_set(s.at)
    members = frozenset(
        v for v in down
        if all(w in t.members
               for w in down
               if poset.leq(w, v) and w in s.members)
    )
    return Sieve(s.at, members)


def sieve_not(poset: FinitePoset, s: Sieve) -> Sieve:
    return sieve_implies(poset, s, Sieve(s.at, frozenset()))


def _same_stage(s: Sieve, t: Sieve):
    if s.at != t.at:
        raise AmbientMismatch(f"sieves at different stages: {s.at!r} vs {t.at!r}")


def omega(poset: FinitePoset) -> Presheaf:
    """Subobject classifier: all sieves per stage; restriction intersects down-sets."""
    sets = {v: tuple(all_sieves(poset, v)) for v in poset.elements}
    restrictions = {}
    for small, large in poset.comparable_pairs():
        if small == large:
            continue
        down_small = frozenset(poset.down_set(small))
        restrictions[(small, large)] = {s: s & down_small for s in sets[large]}
    return Presheaf(poset, sets, restrictions)


# ---------------------------------------------------------------------------
# Subobjects and Heyting structure
# ---------------------------------------------------------------------------

@dataclass
class Subobject:
    """A restriction-closed choice of subsets of an ambient presheaf.

    Stage sets are finite and discrete, so every subset is clopen; no extra
    topological condition is imposed on components.
    """

    ambient: Presheaf
    components: dict = field(default_factory=dict)  # stage -> frozenset

    def __post_init__(self):
        amb = self.ambient
        comps = {}
        for v in amb.poset.elements:
            chosen = frozenset(self.components.get(v, frozenset()))
            if not chosen <= set(amb.sets[v]):
                raise InvariantViolation(f"subobject at {v!r} leaves the ambient stage")
            comps[v] = chosen
        self.components = comps
        for small, large in amb.poset.comparable_pairs():
            if small == large:
                continue
            for x in comps[large]:
                if amb.restrict(x, small, large) not in comps[small]:
                    raise InvariantViolation(
                        f"subobject not closed under restriction {small!r} <= {large!r}"
                    )

    def at(self, v) -> frozenset:
        return self.components[v]

    @classmethod
    def _trusted(cls, ambient: Presheaf, components: dict) -> "Subobject":
        """Skip closure validation; for op results that are closed by construction."""
        out = cls.__new__(cls)
        out.ambient = ambient
        out.components = components
        return out


def sub_top(ambient: Presheaf) -> Subobject:
    return Subobject._trusted(
        ambient, {v: frozenset(ambient.sets[v]) for v in ambient.poset.elements}
    )


def sub_bottom(ambient: Presheaf) -> Subobject:
    return Subobject._trusted(
        ambient, {v: frozenset() for v in ambient.poset.elements}
    )


def _same_ambient(s: Subobject, t: Subobject):
    if s.ambient is t.ambient:
        return
    if s.ambient.sets != t.ambient.sets or s.ambient.poset != t.ambient.poset:
        raise AmbientMismatch("subobjects live in different ambient presheaves")


def sub_meet(s: Subobject, t: Subobject) -> Subobject:
    _same_ambient(s, t)
    return Subobject._trusted(s.ambient, {v: s.at(v) & t.at(v) for v in s.components})


def sub_join(s: Subobject, t: Subobject) -> Subobject:
    _same_ambient(s, t)
    return Subobject._trusted(s.ambient, {v: s.at(v) | t.at(v) for v in s.components})


def sub_implies(s: Subobject, t: Subobject) -> Subobject:
    """Heyting implication: x is in (s => t) at V iff every restriction of x
    that lands in s also lands in t."""
    _same_ambient(s, t)
    amb = s.ambient
    comps = {}
    for v in amb.poset.elements:
        chosen = []
        for x in amb.sets[v]:
            ok = True
            for w in amb.poset.down_set(v):
                rx = amb.restrict(x, w, v)
                if rx in s.at(w) and rx not in t.at(w):
                    ok = False
                    break
            if ok:
                chosen.append(x)
        comps[v] = frozenset(chosen)
    # Heyting implication lands in a restriction-closed set: membership at a
    # stage quantifies over the whole down-set, so it survives restriction.
    return Subobject._trusted(amb, comps)


def sub_not(s: Subobject) -> Subobject:
    return sub_implies(s, sub_bottom(s.ambient))


def sub_leq(s: Subobject, t: Subobject) -> bool:
    _same_ambient(s, t)
    return all(s.at(v) <= t.at(v) for v in s.components)


def sub_eq(s: Subobject, t: Subobject) -> bool:
    _same_ambient(s, t)
    return all(s.at(v) == t.at(v) for v in s.components)


def all_subobjects(ambient: Presheaf) -> list[Subobject]:
    """Exhaustive enumeration of restriction-closed subobjects (desk scale only)."""
    poset = ambient.poset
    elements = list(poset.elements)
    per_stage = [
        [frozenset(c) for r in range(len(ambient.sets[v]) + 1)
         for c in itertools.combinations(ambient.sets[v], r)]
        for v in elements
    ]
    out = []
    for choice in itertools.product(*per_stage):
        comps = dict(zip(elements, choice))
        closed = True
        for small, large in poset.comparable_pairs():
            if small == large:
                continue
            if any(ambient.restrict(x, small, large) not in comps[small]
                   for x in comps[large]):
                closed = False
                break
        if closed:
            out.append(Subobject(ambient, comps))
    return out


def characteristic_arrow(s: Subobject) -> NaturalTransformation:
    """The classifying map into Omega: x at V goes to the sieve of stages
    whose restriction of x lies in the subobject."""
    amb = s.ambient
    om = omega(amb.poset)
    comps = {}
    for v in amb.poset.elements:
        comps[v] = {
            x: frozenset(
                w for w in amb.poset.down_set(v) if amb.restrict(x, w, v) in s.at(w)
            )
            for x in amb.sets[v]
        }
    return NaturalTransformation(amb, om, comps)


def subobject_from_characteristic(eta: NaturalTransformation) -> Subobject:
    """Pull the maximal sieve back along a characteristic arrow."""
    amb = eta.source
    comps = {
        v: frozenset(
            x for x in amb.sets[v]
            if eta.components[v][x] == frozenset(amb.poset.down_set(v))
        )
        for v in amb.poset.elements
    }
    return Subobject(amb, comps)


# ---------------------------------------------------------------------------
# Inverse-image functors along monotone maps
# ---------------------------------------------------------------------------

def check_monotone(mapping: dict, domain: FinitePoset, codomain: FinitePoset) -> None:
    for v in domain.elements:
        if v not in mapping:
            raise NotMonotone(f"map undefined on {v!r}")
        if mapping[v] not in set(codomain.elements):
            raise NotMonotone(f"map sends {v!r} outside the codomain poset")
    for a, b in domain.relation:
        if not codomain.leq(mapping[a], mapping[b]):
            raise NotMonotone(f"{a!r} <= {b!r} but images are incomparable")


def inverse_image(mapping: dict, domain: FinitePoset, f: Presheaf) -> Presheaf:
    """Precompose a presheaf with a monotone map: (m*F)_v = F_{m(v)}."""
    check_monotone(mapping, domain, f.poset)
    sets = {v: f.sets[mapping[v]] for v in domain.elements}
    restrictions = {}
    for small, large in domain.comparable_pairs():
        if small == large:
            continue
        restrictions[(small, large)] = dict(
            f.restriction_map(mapping[small], mapping[large])
        )
    return Presheaf(domain, sets, restrictions)


def inverse_image_nat(
    mapping: dict, domain: FinitePoset, eta: NaturalTransformation
) -> NaturalTransformation:
    """Apply the inverse-image functor to an arrow: components reindex along m."""
    src = inverse_image(mapping, domain, eta.source)
    tgt = inverse_image(mapping, domain, eta.target)
    comps = {v: dict(eta.components[mapping[v]]) for v in domain.elements}
    return NaturalTransformation(src, tgt, comps)


def pullback_subobject(eta: NaturalTransformation, k: Subobject) -> Subobject:
    """Componentwise preimage of a subobject of the target."""
    if naturality_failures(eta):
        raise NotNatural("cannot pull a subobject back along a non-natural map")
    if k.ambient.sets != eta.target.sets:
        raise AmbientMismatch("subobject does not live in the arrow's target")
    comps = {
        v: frozenset(x for x in eta.source.sets[v] if eta.components[v][x] in k.at(v))
        for v in eta.source.poset.elements
    }
    return Subobject(eta.source, comps)


def product_presheaf(f: Presheaf, g: Presheaf) -> Presheaf:
    """Pointwise product, used as left-exactness evidence for inverse images."""
    if f.poset != g.poset:
        raise AmbientMismatch("product requires presheaves over the same poset")
    sets = {
        v: tuple(itertools.product(f.sets[v], g.sets[v])) for v in f.poset.elements
    }
    restrictions = {}
    for small, large in f.poset.comparable_pairs():
        if small == large:
            continue
        restrictions[(small, large)] = {
            (x, y): (f.restrict(x, small, large), g.restrict(y, small, large))
            for (x, y) in sets[large]
        }
    return Presheaf(f.poset, sets, restrictions)
