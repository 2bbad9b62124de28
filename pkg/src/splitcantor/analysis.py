"""Finite arithmetic and combinatorial kernels of the obstruction arguments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .cantor import Point, Split
from .errors import PreconditionError, ShapeError
from .family import SplittingFamily
from .forcing import BranchMap, RealizePattern, is_parity_balanced
from .measures import BiorthCandidate, CheckResult


def pair_bound(theta: Fraction, rho: Fraction, n: int) -> Fraction:
    """(2n rho - theta) / (n (2n - 2))."""
    return (2 * n * rho - theta) / (n * (2 * n - 2))


def number_lemma_pair(theta, rho, r: Sequence) -> tuple[int, int]:
    """Lexicographically first (i, j), i < j, of opposite parity with r_i + r_j below the bound.

    Indices are 1-based.
    """
    theta, rho = Fraction(theta), Fraction(rho)
    r = [Fraction(x) for x in r]
    if len(r) % 2:
        raise PreconditionError("r must have an even number 2n of entries")
    n = len(r) // 2
    if n < 2:
        raise PreconditionError("n >= 2 is required (the bound divides by n(2n-2))")
    if not theta > rho > 0:
        raise PreconditionError("theta > rho > 0 is required")
    if not abs(sum(r)) < rho:
        raise PreconditionError("|sum r_i| < rho is required")
    if not any(x > theta for x in r):
        raise PreconditionError("some r_i must exceed theta")
    if not any(x == 0 for x in r):
        raise PreconditionError("some r_i must be 0")
    bound = pair_bound(theta, rho, n)
    for i in range(1, 2 * n + 1):
        for j in range(i + 1, 2 * n + 1, 2):
            if r[i - 1] + r[j - 1] < bound:
                return i, j
    raise AssertionError(f"no qualifying pair for theta={theta}, rho={rho}, r={r}")


def parity_pairing(J, n: int) -> tuple[tuple[int, ...], dict[int, int]]:
    """Extend J to I of size n and pair I with its complement across parities."""
    J = sorted(set(J))
    if len(J) > n:
        raise PreconditionError(f"|J| = {len(J)} exceeds n = {n}")
    if any(not 1 <= j <= 2 * n for j in J):
        raise PreconditionError(f"J must lie in [1, {2 * n}]")
    I = list(J)
    for l in range(1, 2 * n + 1):
        if len(I) == n:
            break
        if l not in I:
            I.append(l)
    I.sort()
    rest = [l for l in range(1, 2 * n + 1) if l not in I]
    sigma = dict(zip([l for l in I if l % 2], [l for l in rest if l % 2 == 0]))
    sigma.update(zip([l for l in I if l % 2 == 0], [l for l in rest if l % 2]))
    return tuple(I), sigma


def build_eps(pairings: Sequence[tuple[Sequence[int], dict[int, int]]]) -> tuple[BranchMap, ...]:
    """Rows eps(i, .): identity on I_i, sigma_i^{-1} off it."""
    rows = []
    for I, sigma in pairings:
        inverse = {v: k for k, v in sigma.items()}
        N = 2 * len(I)
        rows.append(tuple(l if l in I else inverse[l] for l in range(1, N + 1)))
    return tuple(rows)


@dataclass(frozen=True)
class PatternSpec:
    blocks: tuple[tuple[int, ...], ...]
    eps: tuple[BranchMap, ...]
    delta: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.eps)

    def validate(self, N: int) -> None:
        seen: set[int] = set()
        for block in self.blocks:
            if len(block) != self.k:
                raise PreconditionError(f"block {block} does not have k = {self.k} indices")
            if seen & set(block):
                raise PreconditionError("blocks must be pairwise disjoint")
            seen |= set(block)
        if len(self.delta) != self.k or any(not 1 <= d <= N for d in self.delta):
            raise PreconditionError("delta must map [k] into [2n]")
        for row in self.eps:
            if len(row) != N or any(not 1 <= v <= N for v in row) or not is_parity_balanced(row):
                raise PreconditionError(f"eps row {row} is not a parity-balanced map [2n] -> [2n]")

    def step(self, alpha: int, beta: int) -> RealizePattern:
        return RealizePattern(tuple(self.blocks[alpha]), tuple(self.blocks[beta]), self.eps, self.delta)


def verify_pattern(family: SplittingFamily, spec: PatternSpec, alpha: int, beta: int) -> CheckResult:
    """R at each beta-index lies in A(alpha-index, delta(i)); (x_alpha-index, l) lies in A(beta-index, eps(i, l)).

    The witness is the list of failed containments.
    """
    space = family.space
    if not 0 <= alpha < beta < len(spec.blocks):
        raise PreconditionError("need alpha < beta indexing valid blocks")
    failures = []
    for i in range(spec.k):
        a, b = spec.blocks[alpha][i], spec.blocks[beta][i]
        for y in sorted(space.fiber(b)):
            if not family.member(y, a, spec.delta[i]):
                failures.append(("R-in-A", i + 1, y, (a, spec.delta[i])))
        for l in space.branches:
            target = spec.eps[i][l - 1]
            if not family.member(Split(a, l), b, target):
                failures.append(("point-in-A", i + 1, Split(a, l), (b, target)))
    return CheckResult(not failures, tuple(failures) or None)


@dataclass(frozen=True)
class Thresholds:
    a: Fraction
    b: Fraction
    c: Fraction


def obstruction_thresholds(n: int) -> Thresholds:
    scale = 2 * n * n * (2 * n - 2)
    return Thresholds(Fraction(1, 100) / scale, Fraction(99, 100), -Fraction(89, 100) / scale)


def diagonal_average_bound(n: int) -> tuple[Fraction, bool]:
    """(2n-1)(96/100)/(2n) - 3/100 and whether it is below 99/100."""
    value = (2 * n - 1) * Fraction(96, 100) / (2 * n) - Fraction(3, 100)
    return value, value < Fraction(99, 100)


@dataclass
class ObstructionReport:
    thresholds: Thresholds
    class_a: list[tuple[int, int, Fraction]] = field(default_factory=list)
    class_b: list[tuple[int, Fraction]] = field(default_factory=list)
    class_c: list[tuple[int, int, Fraction]] = field(default_factory=list)

    @property
    def fired(self) -> set[str]:
        return {name for name in "abc" if getattr(self, f"class_{name}")}


def obstruction_scan(c: BiorthCandidate, family: Optional[SplittingFamily], n: int) -> ObstructionReport:
    """Classify all pairwise integrals against the three obstruction thresholds."""
    for index, (_, mu) in enumerate(c.pairs):
        if len(mu) > 2 * n - 1:
            raise ShapeError(f"mu_{index} has {len(mu)} atoms; at most 2n-1 = {2 * n - 1} allowed")
    t = obstruction_thresholds(n)
    report = ObstructionReport(t)
    m = c.matrix()
    for alpha in range(len(c)):
        if m[alpha][alpha] < t.b:
            report.class_b.append((alpha, m[alpha][alpha]))
        for beta in range(alpha + 1, len(c)):
            forward = m[beta][alpha]  # integral of f_alpha against mu_beta
            if abs(forward) > t.a:
                report.class_a.append((alpha, beta, forward))
            backward = m[alpha][beta]  # integral of f_beta against mu_alpha
            if backward < t.c:
                report.class_c.append((alpha, beta, backward))
    return report


def refute_left_separation(entries: Sequence[tuple[Sequence[Point], Sequence[frozenset]]]) -> Optional[tuple[int, int]]:
    """First (alpha, beta), alpha < beta, with tuple_alpha inside box_beta."""
    for index, (tup, box) in enumerate(entries):
        if len(tup) != len(box) or not all(y in U for y, U in zip(tup, box)):
            raise PreconditionError(f"entry {index}: tuple is not inside its own box")
    for alpha, (tup, _) in enumerate(entries):
        for beta in range(alpha + 1, len(entries)):
            if all(y in U for y, U in zip(tup, entries[beta][1])):
                return alpha, beta
    return None


def agreement_depth(space, block_a: Sequence[int], block_b: Sequence[int]) -> int:
    """Largest m with x_a|m = x_b|m for every paired a, b."""
    depths = []
    for a, b in zip(block_a, block_b):
        ca, cb = space.codes[a], space.codes[b]
        m = 0
        while m < len(ca) and ca[m] == cb[m]:
            m += 1
        depths.append(m)
    return min(depths)


def left_separation_entries(
    family: SplittingFamily,
    spec: PatternSpec,
    coordinates: Sequence[tuple[int, int]],
    prefix_len: int,
) -> list[tuple[tuple[Point, ...], tuple[frozenset, ...]]]:
    """Entries y_alpha in K^m with boxes V_s & A_{xi,j}, one per block.

    ``coordinates[m] = (i, j)`` places (x, j) for the i-th index of each
    block (1-based i); s is that index's code cut at ``prefix_len``.  A
    witness can only appear when the blocks agree up to ``prefix_len``
    (see ``agreement_depth``).
    """
    space = family.space
    out = []
    for block in spec.blocks:
        points, box = [], []
        for i, j in coordinates:
            xi = block[i - 1]
            points.append(Split(xi, j))
            box.append(space.v_set(space.prefix(xi, prefix_len)) & family.A(xi, j))
        out.append((tuple(points), tuple(box)))
    return out


def oracle_pairs(theta, rho, r: Sequence) -> list[tuple[int, int]]:
    """All qualifying pairs, compared in integers after clearing denominators."""
    values = [Fraction(x) for x in (theta, rho, *r)]
    scale = 1
    for v in values:
        scale = math.lcm(scale, v.denominator)
    th, rh, *rs = [int(v * scale) for v in values]
    n = len(rs) // 2
    out = []
    for i in range(1, 2 * n + 1):
        for j in range(1, 2 * n + 1):
            if i < j and (i + j) % 2 == 1:
                # r_i + r_j < (2n rho - theta) / (n(2n-2))
                if (rs[i - 1] + rs[j - 1]) * n * (2 * n - 2) < 2 * n * rh - th:
                    out.append((i, j))
    return out

