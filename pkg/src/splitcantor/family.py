"""Splitting families derived from chains, and their verification."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Optional, Sequence

from .cantor import Point, Space, Split, algebra_atoms, is_union_of_atoms, refine_atoms
from .errors import IncompleteChainError, PreconditionError
from .forcing import Chain
from .measures import AtomicMeasure, SimpleFunction


@dataclass(frozen=True, eq=False)
class SplittingFamily:
    """Sets A_{xi,j}; ``sets[xi][j - 1]`` is A_{xi,j}."""

    space: Space
    sets: tuple[tuple[frozenset, ...], ...]
    provenance: Optional[Chain] = None

    def A(self, xi: int, j: int) -> frozenset:
        return self.sets[xi][j - 1]

    def member(self, y: Point, xi: int, j: int) -> bool:
        return y in self.sets[xi][j - 1]

    def branches_of(self, y: Point, xi: int) -> list[int]:
        """Every j with y in A_{xi,j} (exactly one for a genuine partition)."""
        return [j for j, A in enumerate(self.sets[xi], start=1) if y in A]

    @cached_property
    def atom_chain(self) -> list[list[frozenset]]:
        """Atoms of the subalgebra for alpha = 0..lam, each refining the previous one."""
        chain = [algebra_atoms(self.space, self.space.all_v_sets())]
        for xi in range(self.space.lam):
            chain.append(refine_atoms(chain[-1], self.sets[xi]))
        return chain

    def branch(self, y: Point, xi: int) -> int:
        found = self.branches_of(y, xi)
        if len(found) != 1:
            raise PreconditionError(f"{y} lies in {len(found)} sets of family {xi}")
        return found[0]


def family_from_branches(space: Space, table: Sequence[dict], chain: Optional[Chain] = None) -> SplittingFamily:
    sets = []
    for xi in range(space.lam):
        buckets: list[list[Point]] = [[] for _ in space.branches]
        for y, j in table[xi].items():
            buckets[j - 1].append(y)
        sets.append(tuple(frozenset(b) for b in buckets))
    return SplittingFamily(space, tuple(sets), chain)


def derive_family(space: Space, chain: Chain) -> SplittingFamily:
    """Read every A_{xi,j} off the finest condition of a complete chain.

    Branches are computed for increasing xi; a balanced value (phi, eta)
    with eta < xi reuses the already computed eta-branch of the point.
    """
    if not chain.is_complete(space):
        raise IncompleteChainError("the finest condition must have F = all indices and depth = M")
    finest = chain.finest
    table: list[dict[Point, int]] = []
    for xi in range(space.lam):
        f = finest.f[xi]
        row: dict[Point, int] = {}
        for y in space.points:
            if isinstance(y, Split) and y.xi == xi:
                row[y] = y.i
                continue
            phi, eta = f[space.code_of(y)]
            row[y] = phi[0] if eta == xi else phi[table[eta][y] - 1]
        table.append(row)
    return family_from_branches(space, table, chain)


@dataclass
class Report:
    """Failures per clause; each failure is a dict of witness data."""

    failures: dict[str, list[dict]] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def fail(self, clause: str, **witness) -> None:
        self.failures.setdefault(clause, []).append(witness)

    def count(self, clause: str, amount: int = 1) -> None:
        self.checked[clause] = self.checked.get(clause, 0) + amount
        self.failures.setdefault(clause, [])


def verify_splitting(family: SplittingFamily) -> Report:
    """Clauses (1)-(5).

    The "there is k" quantifiers of (4) and (5) are decided at k = M: the
    sets involved shrink as k grows, so a witness exists iff k = M is one.
    """
    space = family.space
    report = Report()
    for xi in range(space.lam):
        for i in space.branches:
            report.count("1")
            if not family.member(Split(xi, i), xi, i):
                report.fail("1", xi=xi, i=i)
        for y in space.points:
            found = family.branches_of(y, xi)
            report.count("2")
            report.count("3")
            if len(found) > 1:
                report.fail("2", xi=xi, point=y, branches=found)
            elif not found:
                report.fail("3", xi=xi, point=y)
    for xi in range(space.lam):
        for eta in range(space.lam):
            if eta < xi:
                # A_{eta,i} & V_{x_eta|M} = A_{eta,i} & R_eta
                fibre = space.fiber(eta)
                for i in space.branches:
                    report.count("4")
                    part = family.A(eta, i) & fibre
                    targets = {j for y in part for j in family.branches_of(y, xi)}
                    if len(targets) > 1:
                        report.fail("4", xi=xi, eta=eta, i=i, k=space.M, branches=sorted(targets))
            elif eta > xi:
                report.count("5")
                targets = {j for y in space.fiber(eta) for j in family.branches_of(y, xi)}
                if len(targets) != 1:
                    report.fail("5", xi=xi, point=space.codes[eta], k=space.M, branches=sorted(targets))
        for g in space.ground_points:
            report.count("5")
            if not family.branches_of(g, xi):
                report.fail("5", xi=xi, point=g.code, k=space.M, branches=[])
    return report


def verify_balanced(family: SplittingFamily) -> Report:
    """Clause (6): each A_{xi,j} meets R_eta in as many odd as even branches."""
    space = family.space
    report = Report()
    for xi in range(space.lam):
        for eta in range(space.lam):
            if eta == xi:
                continue
            odd = [0] * space.N
            even = [0] * space.N
            for i in space.branches:
                for j in family.branches_of(Split(eta, i), xi):
                    (odd if i % 2 else even)[j - 1] += 1
            for j in space.branches:
                report.count("6")
                if odd[j - 1] != even[j - 1]:
                    report.fail("6", xi=xi, eta=eta, j=j, odd=odd[j - 1], even=even[j - 1])
    return report


def subalgebra_generators(family: SplittingFamily, alpha: int) -> list[frozenset]:
    """All V_s (|s| <= M) and A_{xi,j} for xi < alpha."""
    gens = family.space.all_v_sets()
    for xi in range(alpha):
        gens.extend(family.sets[xi])
    return gens


def residues(family: SplittingFamily, alpha: int, k: int) -> list[frozenset]:
    """A_{alpha,i} minus V_{x_alpha|k} for every i."""
    v = family.space.v_set(family.space.prefix(alpha, k))
    return [A - v for A in family.sets[alpha]]


def residue_in_subalgebra(family: SplittingFamily, alpha: int, k: int) -> bool:
    """Whether every A_{alpha,i} minus V_{x_alpha|k} is a union of subalgebra atoms."""
    atoms = family.atom_chain[alpha]
    return all(is_union_of_atoms(r, atoms) for r in residues(family, alpha, k))


def residue_sweep(family: SplittingFamily) -> list[tuple[int, int]]:
    """Every (alpha, k) at which some residue escapes the subalgebra."""
    space = family.space
    bad = []
    for alpha, atoms in enumerate(family.atom_chain[:-1]):
        for k in range(space.M + 1):
            if not all(is_union_of_atoms(r, atoms) for r in residues(family, alpha, k)):
                bad.append((alpha, k))
    return bad


@dataclass(frozen=True)
class CanonicalTerm:
    xi: int
    prefix: str
    q: tuple[Fraction, ...]  # q[l - 1] for l = 1..2n-1


@dataclass(frozen=True)
class CanonicalForm:
    g: SimpleFunction
    terms: tuple[CanonicalTerm, ...]
    tail: Fraction
    eps: Fraction

    def value(self, y: Point, family: SplittingFamily) -> Fraction:
        total = self.g.value(y)
        for term in self.terms:
            if y in family.space.v_set(term.prefix):
                for l, q in enumerate(term.q, start=1):
                    if family.member(y, term.xi, l):
                        total += q
        return total

    def tail_bound(self, mu: AtomicMeasure, family: SplittingFamily) -> Fraction:
        space = family.space
        return sum(
            (
                max(abs(q) for q in term.q) * mu.abs_mass(space.v_set(term.prefix) - space.fiber(term.xi))
                for term in self.terms
            ),
            Fraction(0),
        )


def _constant_on(values: dict, cells) -> bool:
    for cell in cells:
        seen = {values[y] for y in cell}
        if len(seen) > 1:
            return False
    return True


def _v_terms(space: Space, values: dict[Point, Fraction]) -> SimpleFunction:
    """Write a function constant on every fibre as disjoint V_s blocks, merging equal halves."""
    by_code = {space.code_of(y): v for y, v in values.items()}
    terms: list[tuple[Fraction, frozenset]] = []

    def walk(s: str) -> Optional[Fraction]:
        if len(s) == space.M:
            return by_code[s]
        left, right = walk(s + "0"), walk(s + "1")
        if left is not None and left == right:
            return left
        for child, value in ((s + "0", left), (s + "1", right)):
            if value is not None and value != 0:
                terms.append((value, space.v_set(child)))
        return None

    top = walk("")
    if top is not None and top != 0:
        terms.append((top, space.v_set("")))
    return SimpleFunction(tuple(terms))


def canonical_form(f: SimpleFunction, mu: AtomicMeasure, eps, family: SplittingFamily) -> CanonicalForm:
    """Peel off the split structure of f, largest index first.

    Each peeled index xi contributes the differences q_l of the values of f
    on the points (x_xi, l), supported on A_{xi,l} & V_s with s = x_xi|m for
    the least m at which f is constant on every A_{xi,j} & V_s and the
    |mu|-mass of V_s outside R_xi fits the remaining budget (halved at each
    peel).  What is left is constant on every fibre and becomes g.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    space = family.space
    N = space.N
    h = f.values(space)
    atom_chain = family.atom_chain
    if not _constant_on(h, atom_chain[-1]):
        raise PreconditionError("f is not a combination of sets from the generated algebra")
    budget = eps
    terms: list[CanonicalTerm] = []
    for xi in reversed(range(space.lam)):
        top = [h[Split(xi, j)] for j in space.branches]
        q = tuple(v - top[-1] for v in top[:-1])
        cells = atom_chain[xi]
        if any(q):
            budget /= 2
            qmax = max(abs(v) for v in q)
            fibre = space.fiber(xi)

            def fits(m: int) -> bool:
                v = space.v_set(space.prefix(xi, m))
                if qmax * mu.abs_mass(v - fibre) > budget:
                    return False
                return all(len({h[y] for y in A & v}) == 1 for A in family.sets[xi])

            lo, hi = 0, space.M
            while lo < hi:
                mid = (lo + hi) // 2
                if fits(mid):
                    hi = mid
                else:
                    lo = mid + 1
            s = space.prefix(xi, lo)
            v = space.v_set(s)
            for l in range(1, N):
                for y in family.A(xi, l) & v:
                    h[y] -= q[l - 1]
            terms.append(CanonicalTerm(xi, s, q))
        if not _constant_on(h, cells):
            raise PreconditionError(f"remainder after peeling index {xi} leaves the subalgebra")
    g = _v_terms(space, h)
    form = CanonicalForm(g, tuple(terms), Fraction(0), eps)
    return CanonicalForm(g, form.terms, form.tail_bound(mu, family), eps)

