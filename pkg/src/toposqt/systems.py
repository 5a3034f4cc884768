"""Systems, translations, and the two monoidal products.

A system carries a finite set of function symbols (always containing the
trivial quantity I) plus a representation: a finite-dimensional Hilbert space
with hermitian matrices (quantum), a finite state set with real-valued
functions (classical), or nothing (formal). Arrows j: S1 -> S are recorded
through their translations L(j): F(S) -> F(S1); ground symbols translate
identically. The classical backend realizes translations as exact pullbacks
along state maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CompositionMismatch,
    DimensionMismatch,
    InvariantViolation,
    KindMismatch,
    UnknownSymbol,
)
from .linalg import HermitianOperator, max_abs

QUANTUM = "quantum"
CLASSICAL = "classical"
FORMAL = "formal"

GROUND_SYMBOLS = ("Sigma", "R", "1", "Omega")

TRIVIAL = "I"


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def left_comp_name(a: str, trivial: str) -> str:
    return TRIVIAL if a == trivial else f"{a}◇1"


def right_comp_name(b: str, trivial: str) -> str:
    return TRIVIAL if b == trivial else f"1◇{b}"


@dataclass
class System:
    """An object of the category of systems.

    symbols maps each function-symbol name to its representation: a hermitian
    matrix (quantum), a state -> value dict (classical), or None (formal).
    The empty system is the one with no symbols and an empty carrier.
    """

    name: str
    kind: str
    symbols: dict = field(default_factory=dict)
    dim: int | None = None
    states: tuple | None = None
    trivial_symbol: str = TRIVIAL

    def __post_init__(self):
        if self.kind not in (QUANTUM, CLASSICAL, FORMAL):
            raise KindMismatch(f"unknown system kind {self.kind!r}")
        if self.kind == QUANTUM:
            if self.dim is None or self.dim < 0:
                raise InvariantViolation("quantum system needs dim >= 0")
            for sym, mat in self.symbols.items():
                m = HermitianOperator(mat).matrix
                if m.shape[0] != self.dim:
                    raise DimensionMismatch(f"symbol {sym!r} has the wrong dimension")
                self.symbols[sym] = m
        elif self.kind == CLASSICAL:
            if self.states is None:
                raise InvariantViolation("classical system needs a state tuple")
            self.states = tuple(self.states)
            for sym, fn in self.symbols.items():
                if set(fn) != set(self.states):
                    raise InvariantViolation(
                        f"symbol {sym!r} is not a total function on the states"
                    )
                self.symbols[sym] = {s: float(x) for s, x in fn.items()}
        if self.is_empty:
            if (self.kind == QUANTUM and self.dim != 0) or (
                self.kind == CLASSICAL and self.states
            ):
                raise InvariantViolation("only the empty system may lack symbols")
            return
        if self.kind == QUANTUM and self.dim == 0:
            raise InvariantViolation("a nonempty quantum system needs dim >= 1")
        if self.kind == CLASSICAL and not self.states:
            raise InvariantViolation("a nonempty classical system needs states")
        if self.trivial_symbol not in self.symbols:
            raise InvariantViolation("every nonempty system carries the trivial quantity")
        self._check_trivial_rep()

    def _check_trivial_rep(self):
        rep = self.symbols[self.trivial_symbol]
        if self.kind == QUANTUM:
            if max_abs(rep - np.eye(self.dim)) > 1e-12:
                raise InvariantViolation("trivial quantity must be the identity operator")
        elif self.kind == CLASSICAL:
            if any(v != 1.0 for v in rep.values()):
                raise InvariantViolation("trivial quantity must be the constant 1")

    @property
    def is_empty(self) -> bool:
        return not self.symbols

    @property
    def function_symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self.symbols))

    def carrier_size(self) -> int:
        if self.kind == QUANTUM:
            return self.dim
        if self.kind == CLASSICAL:
            return len(self.states)
        return 0

    def rep(self, symbol: str):
        if symbol not in self.symbols:
            raise UnknownSymbol(f"system {self.name!r} has no symbol {symbol!r}")
        return self.symbols[symbol]


def quantum_system(name: str, dim: int, symbols: dict | None = None) -> System:
    syms = {TRIVIAL: np.eye(dim, dtype=complex)}
    syms.update(symbols or {})
    return System(name, QUANTUM, syms, dim=dim)


def classical_system(name: str, states, symbols: dict | None = None) -> System:
    states = tuple(states)
    syms = {TRIVIAL: {s: 1.0 for s in states}}
    syms.update(symbols or {})
    return System(name, CLASSICAL, syms, states=states)


def formal_system(name: str, symbol_names=()) -> System:
    syms = {TRIVIAL: None}
    syms.update({s: None for s in symbol_names})
    return System(name, FORMAL, syms)


def trivial_system(kind: str, name: str = "1") -> System:
    if kind == QUANTUM:
        return quantum_system(name, 1)
    if kind == CLASSICAL:
        return classical_system(name, ("*",))
    return formal_system(name)


def empty_system(kind: str, name: str = "0") -> System:
    if kind == QUANTUM:
        return System(name, QUANTUM, {}, dim=0)
    if kind == CLASSICAL:
        return System(name, CLASSICAL, {}, states=())
    return System(name, FORMAL, {})


def same_system(s1: System, s2: System) -> bool:
    """Structural identity of systems (names included)."""
    if (s1.name, s1.kind, s1.dim, s1.states) != (s2.name, s2.kind, s2.dim, s2.states):
        return False
    if set(s1.symbols) != set(s2.symbols):
        return False
    for sym in s1.symbols:
        a, b = s1.symbols[sym], s2.symbols[sym]
        if s1.kind == QUANTUM and max_abs(a - b) > 1e-12:
            return False
        if s1.kind == CLASSICAL and a != b:
            return False
    return True


@dataclass
class Translation:
    """Translation attached to an arrow source -> target in the category.

    symbol_map sends F(target) to F(source); state_map (classical only) is
    the state-space map from source states to target states, along which the
    pullback of quantities works.
    """

    name: str
    source: System
    target: System
    symbol_map: dict
    state_map: dict | None = None

    def __post_init__(self):
        missing = set(self.target.symbols) - set(self.symbol_map)
        if missing:
            raise InvariantViolation(f"translation not total; missing {sorted(missing)}")
        bad = [v for v in self.symbol_map.values() if v not in self.source.symbols]
        if bad:
            raise InvariantViolation(f"translation leaves F(source): {sorted(set(bad))}")
        if not self.target.is_empty:
            if self.symbol_map[self.target.trivial_symbol] != self.source.trivial_symbol:
                raise InvariantViolation("translations must preserve the trivial quantity")
        if self.source.kind == CLASSICAL and not self.source.is_empty:
            if self.state_map is None:
                raise InvariantViolation("classical translations carry a state map")
            if set(self.state_map) != set(self.source.states):
                raise InvariantViolation("state map must be total on source states")
            if any(t not in self.target.states for t in self.state_map.values()):
                raise InvariantViolation("state map must land in target states")

    def apply(self, symbol: str) -> str:
        if symbol not in self.symbol_map:
            raise UnknownSymbol(f"{symbol!r} is not a function symbol of the target")
        return self.symbol_map[symbol]

    @staticmethod
    def ground(symbol: str) -> str:
        """Ground symbols translate identically."""
        if symbol not in GROUND_SYMBOLS:
            raise UnknownSymbol(f"{symbol!r} is not a ground symbol")
        return symbol

    def is_injective(self) -> bool:
        vals = list(self.symbol_map.values())
        return len(set(vals)) == len(vals)

    def is_surjective(self) -> bool:
        return set(self.symbol_map.values()) == set(self.source.symbols)


def identity_translation(s: System) -> Translation:
    state_map = None
    if s.kind == CLASSICAL and not s.is_empty:
        state_map = {x: x for x in s.states}
    return Translation(f"id_{s.name}", s, s, {a: a for a in s.symbols}, state_map)


def compose_translations(first: Translation, second: Translation) -> Translation:
    """Translation of the composite arrow: first is j: S1 -> S2, second is
    k: S2 -> S3; the result corresponds to k o j: S1 -> S3."""
    if not same_system(first.target, second.source):
        raise CompositionMismatch(
            f"cannot compose: {first.name} targets {first.target.name!r} "
            f"but {second.name} starts at {second.source.name!r}"
        )
    symbol_map = {a: first.symbol_map[second.symbol_map[a]] for a in second.symbol_map}
    state_map = None
    if first.state_map is not None and second.state_map is not None:
        state_map = {s: second.state_map[first.state_map[s]] for s in first.state_map}
    return Translation(
        f"({second.name}∘{first.name})", first.source, second.target, symbol_map, state_map
    )


# ---------------------------------------------------------------------------
# Disjoint sums
# ---------------------------------------------------------------------------

def _tag_states(states1, states2):
    """Disjoint-union labels; raw labels are kept whenever already disjoint."""
    if not (set(states1) & set(states2)):
        return {s: s for s in states1}, {t: t for t in states2}
    return {s: f"1:{s}" for s in states1}, {t: f"2:{t}" for t in states2}


def disjoint_sum(s1: System, s2: System):
    """The system that is either s1 or s2, with injection arrows.

    Function symbols pair up, F(sum) = F(s1) x F(s2); the injections translate
    by projecting pairs. A summand with no symbols degenerates: the sum copies
    the other side, and no injection from the empty side exists (there is no
    total map from a nonempty symbol set into an empty one).
    """
    if s1.kind != s2.kind:
        raise KindMismatch(f"cannot sum {s1.kind} with {s2.kind}")
    kind = s1.kind
    name = f"({s1.name}⊔{s2.name})"
    dim = (s1.dim + s2.dim) if kind == QUANTUM else None
    if s1.is_empty or s2.is_empty:
        # Pairing against an empty symbol set degenerates: the sum copies the
        # nonempty side, and there is no injection from the empty side.
        keep = s2 if s1.is_empty else s1
        states = keep.states
        symbols = {
            a: (np.array(keep.symbols[a]) if kind == QUANTUM else keep.symbols[a])
            for a in keep.symbols
        }
        total = System(name, kind, symbols, dim=dim, states=states,
                       trivial_symbol=keep.trivial_symbol if symbols else TRIVIAL)
        if total.is_empty:
            return total, None, None
        inj = _sum_injection(total, keep, {a: a for a in keep.symbols},
                             left=not s1.is_empty)
        return (total, None, inj) if s1.is_empty else (total, inj, None)

    tag1, tag2 = ({}, {})
    states = None
    if kind == CLASSICAL:
        tag1, tag2 = _tag_states(s1.states, s2.states)
        states = tuple(tag1[s] for s in s1.states) + tuple(tag2[t] for t in s2.states)
    symbols = {
        pair_name(a, b): _sum_rep(s1, s2, a, b, tag1, tag2)
        for a in s1.symbols
        for b in s2.symbols
    }
    total = System(
        name, kind, symbols, dim=dim, states=states,
        trivial_symbol=pair_name(s1.trivial_symbol, s2.trivial_symbol),
    )
    i1 = _sum_injection(
        total, s1, {pair_name(a, b): a for a in s1.symbols for b in s2.symbols},
        left=True, tags=tag1,
    )
    i2 = _sum_injection(
        total, s2, {pair_name(a, b): b for a in s1.symbols for b in s2.symbols},
        left=False, tags=tag2,
    )
    if not i1.is_surjective() or not i2.is_surjective():
        raise InvariantViolation("sum injections must translate surjectively")
    return total, i1, i2


def _sum_rep(s1: System, s2: System, a: str, b: str, tag1: dict, tag2: dict):
    if s1.kind == QUANTUM:
        n1, n2 = s1.dim, s2.dim
        out = np.zeros((n1 + n2, n1 + n2), dtype=complex)
        out[:n1, :n1] = s1.symbols[a]
        out[n1:, n1:] = s2.symbols[b]
        return out
    if s1.kind == CLASSICAL:
        out = {tag1[s]: s1.symbols[a][s] for s in s1.states}
        out.update({tag2[t]: s2.symbols[b][t] for t in s2.states})
        return out
    return None


def _sum_injection(total: System, part: System, symbol_map: dict, left: bool, tags=None):
    state_map = None
    if part.kind == CLASSICAL and not part.is_empty:
        tags = tags if tags is not None else {s: s for s in part.states}
        state_map = dict(tags)
    name = "i1" if left else "i2"
    return Translation(f"{name}:{part.name}→{total.name}", part, total, symbol_map, state_map)


# ---------------------------------------------------------------------------
# Composites
# ---------------------------------------------------------------------------

def composite(s1: System, s2: System, extra_symbols: dict | None = None):
    """The combined system with projection arrows p1, p2.

    Each quantity of a factor injects (A1 goes to A1◇1); beyond those and any
    caller-supplied symbols, no relation between F(s1◇s2) and the factors is
    imposed. The trivial quantity of both factors collapses to the composite's
    own, which is what makes S◇1 and S isomorphic at the symbol level.
    """
    if s1.kind != s2.kind:
        raise KindMismatch(f"cannot compose {s1.kind} with {s2.kind}")
    kind = s1.kind
    name = f"({s1.name}◇{s2.name})"
    if s1.is_empty or s2.is_empty:
        comp = empty_system(kind, name)
        return comp, None, None

    symbols: dict = {}
    map1, map2 = {}, {}
    for a in s1.symbols:
        target = left_comp_name(a, s1.trivial_symbol)
        symbols[target] = _comp_rep(s1, s2, a, left=True)
        map1[a] = target
    for b in s2.symbols:
        target = right_comp_name(b, s2.trivial_symbol)
        if target in symbols and target != TRIVIAL:
            raise InvariantViolation(f"symbol name {target!r} collides across factors")
        if target not in symbols:
            symbols[target] = _comp_rep(s1, s2, b, left=False)
        map2[b] = target
    for sym, rep in (extra_symbols or {}).items():
        if sym in symbols:
            raise InvariantViolation(f"extra symbol {sym!r} collides with an injected one")
        symbols[sym] = rep
    comp = System(
        name, kind, symbols,
        dim=s1.dim * s2.dim if kind == QUANTUM else None,
        states=tuple((s, t) for s in s1.states for t in s2.states)
        if kind == CLASSICAL
        else None,
    )

    p1 = Translation(
        f"p1:{comp.name}→{s1.name}", comp, s1, map1,
        {st: st[0] for st in comp.states} if kind == CLASSICAL else None,
    )
    p2 = Translation(
        f"p2:{comp.name}→{s2.name}", comp, s2, map2,
        {st: st[1] for st in comp.states} if kind == CLASSICAL else None,
    )
    if not p1.is_injective() or not p2.is_injective():
        raise InvariantViolation("composite injections must be one-to-one")
    return comp, p1, p2


def _comp_rep(s1: System, s2: System, symbol: str, left: bool):
    if s1.kind == QUANTUM:
        if left:
            return np.kron(s1.symbols[symbol], np.eye(s2.dim, dtype=complex))
        return np.kron(np.eye(s1.dim, dtype=complex), s2.symbols[symbol])
    if s1.kind == CLASSICAL:
        if left:
            fn = s1.symbols[symbol]
            return {(s, t): fn[s] for s in s1.states for t in s2.states}
        fn = s2.symbols[symbol]
        return {(s, t): fn[t] for s in s1.states for t in s2.states}
    return None


def sum_functorial_arrow(j: Translation, s: System) -> Translation:
    """From j: S1 -> S2, the arrow S1⊔S -> S2⊔S acting as j on the left
    component and as the identity on the right."""
    s1, s2 = j.source, j.target
    sum1, i1a, i2a = disjoint_sum(s1, s)
    sum2, i1b, i2b = disjoint_sum(s2, s)
    symbol_map = {
        pair_name(a2, b): pair_name(j.symbol_map[a2], b)
        for a2 in s2.symbols
        for b in s.symbols
    }
    state_map = None
    if s1.kind == CLASSICAL:
        state_map = {}
        back1 = {v: k for k, v in i1a.state_map.items()}
        back2 = {v: k for k, v in i2a.state_map.items()}
        for x in sum1.states:
            if x in back1:
                state_map[x] = i1b.state_map[j.state_map[back1[x]]]
            else:
                state_map[x] = i2b.state_map[back2[x]]
    return Translation(f"({j.name}⊔id_{s.name})", sum1, sum2, symbol_map, state_map)


# ---------------------------------------------------------------------------
# Classical pullbacks (the Set-topos representation of translations)
# ---------------------------------------------------------------------------

def classical_pullback_quantity(f: dict, j: Translation) -> dict:
    """Pull a real-valued function on states(target) back along the state map."""
    if j.state_map is None:
        raise InvariantViolation("arrow carries no classical state map")
    return {s: f[j.state_map[s]] for s in j.source.states}


def classical_pullback_proposition(k, j: Translation) -> set:
    """Preimage of a subset of states(target) under the state map."""
    if j.state_map is None:
        raise InvariantViolation("arrow carries no classical state map")
    k = set(k)
    return {s for s in j.source.states if j.state_map[s] in k}


def classical_square_failures(j: Translation) -> list[str]:
    """Exact commutativity of representation vs translation-then-representation:
    for every symbol A of the target, rep(L(j)(A)) must equal rep(A) o sigma(j)."""
    out = []
    if j.source.kind != CLASSICAL:
        return ["square check applies to classical systems only"]
    for a in j.target.symbols:
        translated = j.source.symbols[j.symbol_map[a]]
        pulled = classical_pullback_quantity(j.target.symbols[a], j)
        if translated != pulled:
            out.append(f"square fails at symbol {a!r}")
    return out


# ---------------------------------------------------------------------------
# Axiom report
# ---------------------------------------------------------------------------

@dataclass
class SysReport:
    entries: list = field(default_factory=list)

    def record(self, label: str, ok: bool, detail: str = ""):
        self.entries.append((label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e[1]]

    def summary(self) -> str:
        good = sum(1 for _, ok, _ in self.entries if ok)
        return f"{good}/{len(self.entries)} axiom checks passed"


def _carrier_iso(a: System, b: System) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == QUANTUM:
        return a.dim == b.dim
    if a.kind == CLASSICAL:
        return len(a.states) == len(b.states)
    return True


def _f_set_bijective(a: System, b: System) -> bool:
    return len(a.symbols) == len(b.symbols)


def isomorphic(a: System, b: System) -> bool:
    """System isomorphism as implemented here: a bijection of function-symbol
    sets together with an isomorphism of carriers (equal Hilbert dimension,
    respectively equinumerous state sets)."""
    return _f_set_bijective(a, b) and _carrier_iso(a, b)


def distributivity_intertwiner(n1: int, n2: int, n: int) -> np.ndarray:
    """Permutation matrix from (H1 + H2) (x) H onto (H1 (x) H) + (H2 (x) H)."""
    size = (n1 + n2) * n
    u = np.zeros((size, size))
    for i in range(n1 + n2):
        for k in range(n):
            src = i * n + k
            dst = i * n + k if i < n1 else n1 * n + (i - n1) * n + k
            u[dst, src] = 1.0
    return u


def check_sys_axioms(bases) -> SysReport:
    """Verify unit, associativity, commutativity and distributivity at the
    representation level on all same-kind pairs and triples of base systems."""
    report = SysReport()
    bases = list(bases)
    kinds = sorted({s.kind for s in bases})
    for kind in kinds:
        group = [s for s in bases if s.kind == kind]
        one = trivial_system(kind)
        zero = empty_system(kind)
        comp11, _, _ = composite(one, one)
        report.record(f"{kind}: 1◇1 ≅ 1", isomorphic(comp11, one))
        for s in group:
            s_one, _, _ = composite(s, one)
            report.record(f"{kind}: {s.name}◇1 ≅ {s.name}", isomorphic(s_one, s))
            one_s, _, _ = composite(one, s)
            report.record(f"{kind}: 1◇{s.name} ≅ {s.name}", isomorphic(one_s, s))
            s_zero, _, _ = disjoint_sum(s, zero)
            report.record(f"{kind}: {s.name}⊔0 ≅ {s.name}", isomorphic(s_zero, s))
            s_comp_zero, _, _ = composite(s, zero)
            report.record(f"{kind}: {s.name}◇0 ≅ 0", isomorphic(s_comp_zero, zero))
        for s1 in group:
            for s2 in group:
                a, _, _ = disjoint_sum(s1, s2)
                b, _, _ = disjoint_sum(s2, s1)
                report.record(
                    f"{kind}: {s1.name}⊔{s2.name} ≅ {s2.name}⊔{s1.name}",
                    isomorphic(a, b),
                )
                c, _, _ = composite(s1, s2)
                d, _, _ = composite(s2, s1)
                report.record(
                    f"{kind}: {s1.name}◇{s2.name} ≅ {s2.name}◇{s1.name}",
                    _carrier_iso(c, d),
                )
        for s1 in group:
            for s2 in group:
                for s3 in group:
                    l12, _, _ = disjoint_sum(s1, s2)
                    left, _, _ = disjoint_sum(l12, s3)
                    r23, _, _ = disjoint_sum(s2, s3)
                    right, _, _ = disjoint_sum(s1, r23)
                    report.record(
                        f"{kind}: (⊔ assoc) {s1.name},{s2.name},{s3.name}",
                        isomorphic(left, right),
                    )
                    c12, _, _ = composite(s1, s2)
                    cleft, _, _ = composite(c12, s3)
                    c23, _, _ = composite(s2, s3)
                    cright, _, _ = composite(s1, c23)
                    report.record(
                        f"{kind}: (◇ assoc) {s1.name},{s2.name},{s3.name}",
                        _carrier_iso(cleft, cright),
                    )
                    _check_distributivity(report, kind, s1, s2, s3)
    return report


def _check_distributivity(report: SysReport, kind: str, s1: System, s2: System, s3: System):
    label = f"{kind}: ({s1.name}⊔{s2.name})◇{s3.name} ≅ ({s1.name}◇{s3.name})⊔({s2.name}◇{s3.name})"
    lsum, _, _ = disjoint_sum(s1, s2)
    left, _, _ = composite(lsum, s3)
    c13, _, _ = composite(s1, s3)
    c23, _, _ = composite(s2, s3)
    right, _, _ = disjoint_sum(c13, c23)
    if not _carrier_iso(left, right):
        report.record(label, False, "carrier sizes differ")
        return
    if kind == QUANTUM and not (s1.is_empty or s2.is_empty or s3.is_empty):
        u = distributivity_intertwiner(s1.dim, s2.dim, s3.dim)
        if max_abs(u @ u.T - np.eye(u.shape[0])) > 0:
            report.record(label, False, "intertwiner is not a permutation")
            return
        for a in s1.symbols:
            for b in s2.symbols:
                for c in s3.symbols:
                    block = np.zeros((lsum.dim, lsum.dim), dtype=complex)
                    block[: s1.dim, : s1.dim] = s1.symbols[a]
                    block[s1.dim :, s1.dim :] = s2.symbols[b]
                    lhs = np.kron(block, s3.symbols[c])
                    rhs = np.zeros_like(lhs)
                    top = np.kron(s1.symbols[a], s3.symbols[c])
                    bot = np.kron(s2.symbols[b], s3.symbols[c])
                    rhs[: top.shape[0], : top.shape[0]] = top
                    rhs[top.shape[0] :, top.shape[0] :] = bot
                    if max_abs(u @ lhs @ u.T - rhs) > 1e-12:
                        report.record(label, False, f"intertwiner fails on ({a},{b},{c})")
                        return
    if kind == CLASSICAL and not (s1.is_empty or s2.is_empty or s3.is_empty):
        # Canonical bijection ((tagged s), t) -> tagged (s, t), checked on the
        # paired symbol representations.
        tag1, tag2 = _tag_states(s1.states, s2.states)
        ctag1, ctag2 = _tag_states(c13.states, c23.states)
        for a in s1.symbols:
            for b in s2.symbols:
                big = left.symbols[left_comp_name(pair_name(a, b), lsum.trivial_symbol)]
                paired = right.symbols[
                    pair_name(
                        left_comp_name(a, s1.trivial_symbol),
                        left_comp_name(b, s2.trivial_symbol),
                    )
                ]
                for s in s1.states:
                    for t in s3.states:
                        if big[(tag1[s], t)] != paired[ctag1[(s, t)]]:
                            report.record(label, False, "state bijection fails")
                            return
                for s in s2.states:
                    for t in s3.states:
                        if big[(tag2[s], t)] != paired[ctag2[(s, t)]]:
                            report.record(label, False, "state bijection fails")
                            return
    report.record(label, True)
