"""Forcing conditions as executable data.

A condition is ``(F, depth, f)`` where ``f[xi][s]`` is an :class:`Assignment`
``(phi, eta)`` for every binary string ``s`` of length ``depth`` other than
``x_xi|depth``.  Branch maps ``phi`` are tuples: ``phi[i - 1]`` is the image
of branch ``i``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence, Union

from .cantor import Space, all_strings
from .errors import PreconditionError, ResolutionError

BranchMap = tuple


class Assignment(NamedTuple):
    phi: BranchMap
    eta: int


def constant_map(value: int, N: int) -> BranchMap:
    return (value,) * N


def is_constant(phi: Sequence[int]) -> bool:
    return len(set(phi)) <= 1


def is_parity_balanced(phi: Sequence[int]) -> bool:
    """Every fibre of ``phi`` has as many odd branches as even ones."""
    balance: dict[int, int] = {}
    for i, j in enumerate(phi, start=1):
        balance[j] = balance.get(j, 0) + (1 if i % 2 else -1)
    return not any(balance.values())


def random_balanced_map(N: int, rng: random.Random) -> BranchMap:
    """A uniformly labelled random odd/even matching; every balanced map arises this way."""
    odds = list(range(1, N + 1, 2))
    evens = list(range(2, N + 1, 2))
    rng.shuffle(evens)
    phi = [0] * N
    for o, e in zip(odds, evens):
        j = rng.randint(1, N)
        phi[o - 1] = j
        phi[e - 1] = j
    return tuple(phi)


Filler = Callable[[Space, Sequence[int], int, str], Assignment]


def default_filler(space: Space, F: Sequence[int], xi: int, s: str) -> Assignment:
    """(constant 1, xi), the filler used in the density argument."""
    return Assignment(constant_map(1, space.N), xi)


def random_filler(rng: random.Random) -> Filler:
    """Seeded filler mixing constant values with balanced maps over earlier indices."""

    def fill(space: Space, F: Sequence[int], xi: int, s: str) -> Assignment:
        earlier = [eta for eta in F if eta < xi]
        if earlier and rng.random() < 0.5:
            return Assignment(random_balanced_map(space.N, rng), rng.choice(earlier))
        return Assignment(constant_map(rng.randint(1, space.N), space.N), xi)

    return fill


@dataclass(frozen=True)
class Condition:
    F: tuple[int, ...]
    depth: int
    f: Mapping[int, Mapping[str, Assignment]]

    @classmethod
    def trivial(cls) -> "Condition":
        return cls((), 0, {})

    def __contains__(self, xi: int) -> bool:
        return xi in self.f

    def size(self) -> int:
        return sum(len(table) for table in self.f.values())


@dataclass(frozen=True)
class Violation:
    clause: str
    xi: Optional[int]
    s: Optional[str]
    detail: str


def domain(space: Space, xi: int, depth: int) -> list[str]:
    """2^depth minus x_xi|depth."""
    own = space.prefix(xi, depth)
    return [s for s in all_strings(depth) if s != own]


def validate(c: Condition, space: Space) -> list[Violation]:
    """Violations of the three numbered clauses; an empty list means valid."""
    out: list[Violation] = []
    N = space.N
    if list(c.F) != sorted(set(c.F)) or any(not 0 <= xi < space.lam for xi in c.F):
        out.append(Violation("1", None, None, f"F={c.F} is not a sorted set of indices < {space.lam}"))
    if set(c.f) != set(c.F):
        out.append(Violation("1", None, None, "assignment keys differ from F"))
    if not 0 <= c.depth <= space.M:
        out.append(Violation("2", None, None, f"depth {c.depth} outside [0, {space.M}]"))
        return out
    seen: dict[str, int] = {}
    for xi in c.F:
        pre = space.prefix(xi, c.depth)
        if pre in seen:
            out.append(Violation("2", xi, pre, f"prefix shared with index {seen[pre]}"))
        seen[pre] = xi
    members = set(c.F)
    for xi in c.F:
        table = c.f.get(xi, {})
        expected = set(domain(space, xi, c.depth))
        if set(table) != expected:
            out.append(Violation("3", xi, None, "assignment domain is not 2^depth minus x_xi|depth"))
        for s, (phi, eta) in sorted(table.items()):
            if len(phi) != N or any(not 1 <= v <= N for v in phi):
                out.append(Violation("3", xi, s, f"phi={phi} is not a map [2n] -> [2n]"))
                continue
            if eta not in members or eta > xi:
                out.append(Violation("3", xi, s, f"eta={eta} not in F and <= xi"))
            elif eta == xi and not is_constant(phi):
                out.append(Violation("3a", xi, s, f"phi={phi} is not constant"))
            elif eta < xi and not is_parity_balanced(phi):
                out.append(Violation("3b", xi, s, f"phi={phi} is not parity-balanced"))
    return out


def extends(q: Condition, p: Condition, space: Space) -> bool:
    """q <= p in the forcing order."""
    if not set(p.F) <= set(q.F) or q.depth < p.depth:
        return False
    for xi in p.F:
        fp, fq = p.f[xi], q.f[xi]
        own = space.prefix(xi, p.depth)
        for s, value in fq.items():
            t = s[: p.depth]
            if t != own and fp[t] != value:
                return False
    return True


def _extend_table(
    space: Space,
    table: Mapping[str, Assignment],
    xi: int,
    old: int,
    new: int,
    fresh: Callable[[str], Assignment],
) -> dict[str, Assignment]:
    tails = list(all_strings(new - old))
    out = {t + tail: value for t, value in table.items() for tail in tails}
    own_old = space.prefix(xi, old)
    own_new = space.prefix(xi, new)
    for tail in tails:
        s = own_old + tail
        if s != own_new:
            out[s] = fresh(s)
    return out


def deepen(p: Condition, k: int, space: Space, filler: Filler = default_filler) -> Condition:
    if k > space.M:
        raise ResolutionError(f"cannot deepen to {k}: resolution is M = {space.M}")
    if k <= p.depth:
        return p
    f = {
        xi: _extend_table(space, p.f[xi], xi, p.depth, k, lambda s, xi=xi: filler(space, p.F, xi, s))
        for xi in p.F
    }
    return Condition(p.F, k, f)


def separating_depth(space: Space, indices: Iterable[int], start: int) -> int:
    """Least depth >= start at which the codes of ``indices`` have distinct prefixes."""
    indices = list(indices)
    for d in range(start, space.M + 1):
        if len({space.prefix(xi, d) for xi in indices}) == len(indices):
            return d
    raise ResolutionError(f"indices {indices} cannot be separated at depth <= {space.M}")


def add_index(p: Condition, xi: int, space: Space, filler: Filler = default_filler) -> Condition:
    if xi in p:
        return p
    if not 0 <= xi < space.lam:
        raise PreconditionError(f"index {xi} outside [0, {space.lam})")
    d = separating_depth(space, (*p.F, xi), p.depth)
    base = deepen(p, d, space, filler)
    F = tuple(sorted((*base.F, xi)))
    f = dict(base.f)
    f[xi] = {s: filler(space, F, xi, s) for s in domain(space, xi, d)}
    return Condition(F, d, f)


def isomorphic(p1: Condition, p2: Condition, space: Space) -> Optional[dict[int, int]]:
    """The order-preserving bijection F1 -> F2 transporting p1 onto p2, if any."""
    if p1.depth != p2.depth or len(p1.F) != len(p2.F):
        return None
    e = dict(zip(p1.F, p2.F))
    n = p1.depth
    for a, b in e.items():
        if space.prefix(a, n) != space.prefix(b, n):
            return None
    for a, b in e.items():
        t1, t2 = p1.f[a], p2.f[b]
        if t1.keys() != t2.keys():
            return None
        for s, (phi, eta) in t1.items():
            if t2[s] != (phi, e[eta]):
                return None
    return e


def transport(p: Condition, e: Mapping[int, int], space: Space) -> Condition:
    """The image of p under a bijection of indices (identity off ``e``)."""
    move = lambda xi: e.get(xi, xi)  # noqa: E731
    for a, b in e.items():
        if space.prefix(a, p.depth) != space.prefix(b, p.depth):
            raise PreconditionError(f"x_{a} and x_{b} disagree below depth {p.depth}")
    F = tuple(sorted(move(xi) for xi in p.F))
    f = {
        move(xi): {s: Assignment(phi, move(eta)) for s, (phi, eta) in table.items()}
        for xi, table in p.f.items()
    }
    return Condition(F, p.depth, f)


@dataclass(frozen=True)
class DeltaSystem:
    members: tuple[int, ...]
    root: frozenset
    exact: bool


EXACT_DELTA_LIMIT = 20


def _max_packing(candidates: list[int], rests: Sequence[frozenset]) -> list[int]:
    """Lexicographically first maximum sub-list with pairwise disjoint rests."""
    best: list[int] = []

    def search(pos: int, chosen: list[int], used: frozenset) -> None:
        nonlocal best
        if len(chosen) + len(candidates) - pos <= len(best):
            return
        if pos == len(candidates):
            best = list(chosen)
            return
        i = candidates[pos]
        if not rests[i] & used:
            chosen.append(i)
            search(pos + 1, chosen, used | rests[i])
            chosen.pop()
        search(pos + 1, chosen, used)

    search(0, [], frozenset())
    return best


def _greedy_packing(candidates: list[int], rests: Sequence[frozenset]) -> list[int]:
    chosen: list[int] = []
    used: frozenset = frozenset()
    for i in candidates:
        if not rests[i] & used:
            chosen.append(i)
            used |= rests[i]
    return chosen


def delta_system(family: Sequence[Iterable[int]]) -> DeltaSystem:
    """A largest sub-family whose pairwise intersections all equal one root.

    Exact for at most ``EXACT_DELTA_LIMIT`` sets, greedy beyond (``exact`` is
    then False).  Ties go to the lexicographically smallest member tuple.
    """
    sets = [frozenset(x) for x in family]
    if len(sets) <= 1:
        return DeltaSystem(tuple(range(len(sets))), sets[0] if sets else frozenset(), True)
    exact = len(sets) <= EXACT_DELTA_LIMIT
    pack = _max_packing if exact else _greedy_packing
    best: Optional[DeltaSystem] = None
    roots = []
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            root = sets[i] & sets[j]
            if root not in roots:
                roots.append(root)
    for root in roots:
        candidates = [i for i, s in enumerate(sets) if root <= s]
        rests = [s - root for s in sets]
        chosen = tuple(pack(candidates, rests))
        if len(chosen) < 2:
            continue
        if best is None or (-len(chosen), chosen) < (-len(best.members), best.members):
            best = DeltaSystem(chosen, root, exact)
    assert best is not None
    return best


def amalgamate(
    p1: Condition,
    p2: Condition,
    eps_maps: Mapping[int, BranchMap],
    delta_maps: Mapping[int, BranchMap],
    space: Space,
    root_filler: Filler = default_filler,
) -> Condition:
    """A common extension q of two isomorphic conditions with prescribed cross values.

    For every xi in F1 \\ F2, q sends x_{e(xi)}|n_q under f_xi to
    (delta_maps[xi], xi) and x_xi|n_q under f_{e(xi)} to (eps_maps[xi], xi).
    """
    F1, F2 = set(p1.F), set(p2.F)
    root, only1, only2 = sorted(F1 & F2), sorted(F1 - F2), sorted(F2 - F1)
    for lower, upper, name in ((root, only1, "F1&F2 < F1-F2"), (only1, only2, "F1-F2 < F2-F1")):
        if lower and upper and max(lower) >= min(upper):
            raise PreconditionError(f"ordering hypothesis fails: {name}")
    if p1.depth != p2.depth:
        raise PreconditionError(f"depth hypothesis fails: n1={p1.depth} != n2={p2.depth}")
    e = isomorphic(p1, p2, space)
    if e is None:
        raise PreconditionError("isomorphism hypothesis fails: no order-preserving transport")
    if set(eps_maps) != set(only1) or set(delta_maps) != set(only1):
        raise PreconditionError("eps and delta maps must be indexed by F1 - F2")
    N = space.N
    for xi in only1:
        eps, delta = tuple(eps_maps[xi]), tuple(delta_maps[xi])
        if len(eps) != N or len(delta) != N or any(not 1 <= v <= N for v in eps + delta):
            raise PreconditionError(f"maps for index {xi} are not maps [2n] -> [2n]")
        if not is_parity_balanced(eps):
            raise PreconditionError(f"condition 3b fails: eps for index {xi} = {eps} is not parity-balanced")
        if not is_constant(delta):
            raise PreconditionError(f"condition 3a fails: delta for index {xi} = {delta} is not constant")

    n = p1.depth
    F = tuple(sorted(F1 | F2))
    nq = separating_depth(space, F, n)
    back = {b: a for a, b in e.items()}
    f: dict[int, dict[str, Assignment]] = {}
    for xi in F:
        source = p1.f[xi] if xi in F1 else p2.f[xi]
        if xi in F1 and xi not in F2:
            fresh = lambda s, xi=xi: Assignment(tuple(delta_maps[xi]), xi)  # noqa: E731
        elif xi in F1:
            fresh = lambda s, xi=xi: root_filler(space, F, xi, s)  # noqa: E731
        else:
            a = back[xi]
            fresh = lambda s, a=a: Assignment(tuple(eps_maps[a]), a)  # noqa: E731
        f[xi] = _extend_table(space, source, xi, n, nq, fresh)
    return Condition(F, nq, f)


@dataclass(frozen=True)
class Deepen:
    k: int


@dataclass(frozen=True)
class AddIndex:
    xi: int


@dataclass(frozen=True)
class RealizePattern:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    eps: tuple[BranchMap, ...]
    delta: tuple[int, ...]


@dataclass(frozen=True)
class Complete:
    pass


Step = Union[Deepen, AddIndex, RealizePattern, Complete]


@dataclass(frozen=True)
class Certificate:
    """Cross values fixed by one realized pattern, as (xi, s, assignment)."""

    step: int
    pattern: RealizePattern
    depth: int
    values: tuple[tuple[int, str, Assignment], ...]


@dataclass(frozen=True)
class Chain:
    steps: tuple[Condition, ...]
    seed: int
    script: tuple[Step, ...]
    certificates: tuple[Certificate, ...] = field(default=())

    @property
    def finest(self) -> Condition:
        return self.steps[-1]

    def is_complete(self, space: Space) -> bool:
        return self.finest.F == tuple(range(space.lam)) and self.finest.depth == space.M


def realize_pattern(p: Condition, step: RealizePattern, space: Space, filler: Filler) -> tuple[Condition, int]:
    """Amalgamate p + alpha-block with its transport onto the beta-block.

    Returns the extension and the working depth n at which the blocks were
    matched.
    """
    alpha, beta = tuple(step.alpha), tuple(step.beta)
    k = len(alpha)
    if k == 0 or len(beta) != k or len(step.eps) != k or len(step.delta) != k:
        raise PreconditionError("pattern blocks, eps rows and delta values must have one common size k >= 1")
    if list(alpha) != sorted(set(alpha)) or list(beta) != sorted(set(beta)):
        raise PreconditionError("pattern blocks must be strictly increasing")
    if set(alpha) & set(beta) or (set(alpha) | set(beta)) & set(p.F):
        raise PreconditionError("pattern blocks must be disjoint from each other and from F_p")
    if p.F and max(p.F) >= alpha[0] or alpha[-1] >= beta[0]:
        raise PreconditionError("ordering hypothesis fails: need F_p < alpha-block < beta-block")
    n = max(
        separating_depth(space, (*p.F, *alpha), p.depth),
        separating_depth(space, (*p.F, *beta), p.depth),
    )
    for a, b in zip(alpha, beta):
        if space.prefix(a, n) != space.prefix(b, n):
            raise PreconditionError(
                f"prefix agreement fails at depth {n}: x_{a}|{n} != x_{b}|{n} "
                "(isomorphism hypothesis of amalgamation)"
            )
    p1 = deepen(p, n, space, filler)
    for a in alpha:
        p1 = add_index(p1, a, space, filler)
    e = dict(zip(alpha, beta))
    p2 = transport(p1, e, space)
    const = lambda v: constant_map(v, space.N)  # noqa: E731
    q = amalgamate(
        p1,
        p2,
        {a: tuple(row) for a, row in zip(alpha, step.eps)},
        {a: const(v) for a, v in zip(alpha, step.delta)},
        space,
        root_filler=filler,
    )
    return q, n


def build_chain(
    space: Space,
    script: Sequence[Step],
    seed: int,
    fillers: str = "default",
) -> Chain:
    """Run a step script from the trivial condition.

    ``fillers="default"`` fills unconstrained values with (constant 1, xi);
    ``fillers="random"`` draws them from a generator seeded with ``seed``.
    A step that leaves the condition unchanged adds nothing to the chain.
    """
    if fillers == "default":
        filler = default_filler
    elif fillers == "random":
        filler = random_filler(random.Random(seed))
    else:
        raise ValueError(f"unknown filler mode {fillers!r}")
    steps = [Condition.trivial()]
    certificates = []
    for index, step in enumerate(script):
        p = steps[-1]
        if isinstance(step, Deepen):
            q = deepen(p, step.k, space, filler)
        elif isinstance(step, AddIndex):
            q = add_index(p, step.xi, space, filler)
        elif isinstance(step, RealizePattern):
            q, _ = realize_pattern(p, step, space, filler)
            values = []
            for a, b in zip(step.alpha, step.beta):
                sb, sa = space.prefix(b, q.depth), space.prefix(a, q.depth)
                values.append((a, sb, q.f[a][sb]))
                values.append((b, sa, q.f[b][sa]))
            certificates.append(Certificate(index, step, q.depth, tuple(values)))
        elif isinstance(step, Complete):
            q = p
            for xi in range(space.lam):
                q = add_index(q, xi, space, filler)
            q = deepen(q, space.M, space, filler)
        else:
            raise TypeError(f"unknown step {step!r}")
        if q is not p and q != p:
            steps.append(q)
    return Chain(tuple(steps), seed, tuple(script), tuple(certificates))
