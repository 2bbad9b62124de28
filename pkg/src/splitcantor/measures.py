"""Exact-rational atomic measures, simple functions and biorthogonal systems."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

from .cantor import Point, Space, Split
from .errors import ShapeError

if TYPE_CHECKING:
    from .family import SplittingFamily


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: Mapping[Point, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {p: _frac(w) for p, w in self.atoms.items() if w != 0}
        object.__setattr__(self, "atoms", cleaned)

    @classmethod
    def delta(cls, point: Point, weight=1) -> "AtomicMeasure":
        return cls({point: _frac(weight)})

    @property
    def support(self) -> frozenset:
        return frozenset(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        out = dict(self.atoms)
        for p, w in other.atoms.items():
            out[p] = out.get(p, Fraction(0)) + w
        return AtomicMeasure(out)

    def __neg__(self) -> "AtomicMeasure":
        return AtomicMeasure({p: -w for p, w in self.atoms.items()})

    def __sub__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return self + (-other)

    def __rmul__(self, c) -> "AtomicMeasure":
        c = _frac(c)
        return AtomicMeasure({p: c * w for p, w in self.atoms.items()})

    def weight(self, point: Point) -> Fraction:
        return self.atoms.get(point, Fraction(0))

    def mass(self, B: Iterable[Point]) -> Fraction:
        B = B if isinstance(B, (set, frozenset)) else set(B)
        return sum((w for p, w in self.atoms.items() if p in B), Fraction(0))

    def abs_mass(self, B: Iterable[Point]) -> Fraction:
        """|mu|(B)."""
        B = B if isinstance(B, (set, frozenset)) else set(B)
        return sum((abs(w) for p, w in self.atoms.items() if p in B), Fraction(0))

    def total_variation(self) -> Fraction:
        return sum((abs(w) for w in self.atoms.values()), Fraction(0))


@dataclass(frozen=True)
class SimpleFunction:
    """A finite rational combination of indicator functions."""

    terms: tuple[tuple[Fraction, frozenset], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((_frac(c), frozenset(B)) for c, B in self.terms if c != 0)
        )

    @classmethod
    def indicator(cls, B: Iterable[Point], coefficient=1) -> "SimpleFunction":
        return cls(((coefficient, frozenset(B)),))

    def __add__(self, other: "SimpleFunction") -> "SimpleFunction":
        return SimpleFunction(self.terms + other.terms)

    def __rmul__(self, c) -> "SimpleFunction":
        c = _frac(c)
        return SimpleFunction(tuple((c * a, B) for a, B in self.terms))

    def value(self, point: Point) -> Fraction:
        return sum((c for c, B in self.terms if point in B), Fraction(0))

    def values(self, space: Space) -> dict[Point, Fraction]:
        out = {p: Fraction(0) for p in space.points}
        for c, B in self.terms:
            for p in B:
                out[p] += c
        return out

    def sup_norm(self, space: Space) -> Fraction:
        return max((abs(v) for v in self.values(space).values()), default=Fraction(0))


def integrate(f: SimpleFunction, mu: AtomicMeasure) -> Fraction:
    return sum((f.value(p) * w for p, w in mu.atoms.items()), Fraction(0))


@dataclass(frozen=True)
class BiorthCandidate:
    pairs: tuple[tuple[SimpleFunction, AtomicMeasure], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def matrix(self) -> list[list[Fraction]]:
        """``matrix()[i][j]`` is the integral of f_j against mu_i."""
        return [[integrate(f, mu) for f, _ in self.pairs] for _, mu in self.pairs]


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def check_biorthogonal(c: BiorthCandidate) -> CheckResult:
    """Witness ``(i, j, value)``: the integral of f_j against mu_i is wrong."""
    for i, (_, mu) in enumerate(c.pairs):
        for j, (f, _) in enumerate(c.pairs):
            value = integrate(f, mu)
            if value != (1 if i == j else 0):
                return CheckResult(False, (i, j, value))
    return CheckResult(True)


def check_semibiorthogonal(c: BiorthCandidate) -> CheckResult:
    """Diagonal 1, mu_i(f_j) = 0 for j < i and >= 0 for j > i."""
    for i, (_, mu) in enumerate(c.pairs):
        for j, (f, _) in enumerate(c.pairs):
            value = integrate(f, mu)
            if (i == j and value != 1) or (j < i and value != 0) or (j > i and value < 0):
                return CheckResult(False, (i, j, value))
    return CheckResult(True)


def check_nice(c: BiorthCandidate) -> bool:
    if not check_biorthogonal(c):
        return False
    return all(sorted(mu.atoms.values()) == [-1, 1] for _, mu in c.pairs)


def property6_system(family: "SplittingFamily") -> BiorthCandidate:
    """f_xi = chi(A_{xi,2n}) with the alternating measure on R_xi."""
    space = family.space
    pairs = []
    for xi in range(space.lam):
        mu = AtomicMeasure(
            {Split(xi, i): Fraction(1 if i % 2 == 0 else -1) for i in space.branches}
        )
        pairs.append((SimpleFunction.indicator(family.A(xi, space.N)), mu))
    return BiorthCandidate(tuple(pairs))


@dataclass
class DiscreteReport:
    tuples: list[tuple[Point, ...]]
    branches: tuple[int, ...]
    inside: int = 0
    outside: int = 0
    exceptions: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.exceptions


def discrete_witness(family: "SplittingFamily") -> DiscreteReport:
    """Check the tuples ((x,1),(x,2),(x,4),...,(x,2n)) against boxes A x A x ... x A.

    ``exceptions`` lists ordered pairs (xi, eta) where tuple_eta is in U_xi
    exactly when it should not be (or is missing from its own box).
    """
    space = family.space
    if space.n < 2:
        raise ShapeError("discrete_witness needs n >= 2")
    branches = (1, *range(2, space.N + 1, 2))
    tuples = [tuple(Split(xi, j) for j in branches) for xi in range(space.lam)]
    report = DiscreteReport(tuples, branches)
    for xi in range(space.lam):
        for eta in range(space.lam):
            inside = all(family.member(y, xi, j) for y, j in zip(tuples[eta], branches))
            if inside:
                report.inside += 1
            else:
                report.outside += 1
            if inside != (xi == eta):
                report.exceptions.append((xi, eta))
    return report


@dataclass
class ExtractionReport:
    candidate: BiorthCandidate
    case: str
    group_sizes: dict[str, int]
    excluded: list[tuple[int, str]]
    separated_pair: Optional[tuple[int, int]] = None

    @property
    def nice(self) -> bool:
        return check_nice(self.candidate)


def _classify(mu: AtomicMeasure) -> str:
    weights = list(mu.atoms.values())
    if len(weights) == 2 and sum(weights) == 0:
        return "difference"
    if len(weights) <= 2:
        # one atom, or two atoms whose weights and their sum are all nonzero
        return "point-mass"
    return "three-atom"


def _pair_up(
    indices: Sequence[int], sets: Sequence[frozenset], points: Mapping[int, Point]
) -> list[tuple[SimpleFunction, AtomicMeasure]]:
    # consecutive disjoint pairs (a, b) -> (chi_{A_b}, delta_{y_b} - delta_{y_a})
    out = []
    for a, b in zip(indices[0::2], indices[1::2]):
        mu = AtomicMeasure.delta(points[b]) - AtomicMeasure.delta(points[a])
        out.append((SimpleFunction.indicator(sets[b]), mu))
    return out


def extract_nice_3supported(c: BiorthCandidate, family: "SplittingFamily") -> ExtractionReport:
    """Turn a biorthogonal system of indicators against <=3-atom fibre measures into a nice one.

    Indices are grouped by measure shape and the largest group is processed;
    smaller groups are reported in ``group_sizes``.
    """
    space = family.space
    sets: list[frozenset] = []
    fibres: list[int] = []
    for index, (f, mu) in enumerate(c.pairs):
        if len(f.terms) != 1 or f.terms[0][0] != 1:
            raise ShapeError(f"f_{index} is not an indicator function")
        owners = {p.xi for p in mu.atoms if isinstance(p, Split)}
        if not mu.atoms or len(mu.atoms) > 3 or len(owners) != 1 or not all(
            isinstance(p, Split) for p in mu.atoms
        ):
            raise ShapeError(f"mu_{index} is not supported on one fibre R_eta with at most 3 atoms")
        sets.append(f.terms[0][1])
        fibres.append(owners.pop())
    check = check_biorthogonal(c)
    if not check:
        raise ShapeError(f"input is not biorthogonal: {check.witness}")

    groups: dict[str, list[int]] = {}
    for index, (_, mu) in enumerate(c.pairs):
        groups.setdefault(_classify(mu), []).append(index)
    order = ["point-mass", "difference", "three-atom"]
    sizes = {name: len(groups.get(name, [])) for name in order}
    case = max(order, key=lambda name: (sizes[name], -order.index(name)))
    chosen = groups.get(case, [])
    excluded = [
        (i, f"shape {_classify(mu)} not in processed group")
        for i, (_, mu) in enumerate(c.pairs)
        if i not in chosen
    ]

    if case == "point-mass":
        # a support point inside A_i is outside every other A_j
        points = {}
        for i in chosen:
            mu = c.pairs[i][1]
            points[i] = min(p for p in mu.atoms if p in sets[i])
        pairs = _pair_up(chosen, sets, points)
        if len(chosen) % 2:
            excluded.append((chosen[-1], "unpaired after successor differencing"))
        return ExtractionReport(BiorthCandidate(tuple(pairs)), case, sizes, excluded)

    if case == "difference":
        # biorthogonality already forces the weights to be +1 and -1
        pairs = [c.pairs[i] for i in chosen]
        return ExtractionReport(BiorthCandidate(tuple(pairs)), case, sizes, excluded)

    zero_sum = []
    for i in chosen:
        if sum(c.pairs[i][1].atoms.values()) == 0:
            zero_sum.append(i)
        else:
            excluded.append((i, "weights do not sum to 0; removing it needs the pattern hypothesis"))
    votes: Counter = Counter()
    separated: dict[int, list[tuple[int, int]]] = {}
    for i in zero_sum:
        branches = sorted(p.i for p in c.pairs[i][1].atoms)
        inside = [b for b in branches if Split(fibres[i], b) in sets[i]]
        outside = [b for b in branches if b not in inside]
        separated[i] = [(a, b) for a in inside for b in outside]
        votes.update(separated[i])
    if not votes:
        return ExtractionReport(BiorthCandidate(()), case, sizes, excluded)
    best = max(sorted(votes), key=lambda pair: votes[pair])
    pairs = []
    for i in zero_sum:
        if best not in separated[i]:
            excluded.append((i, f"A_i does not separate branches {best}"))
            continue
        eta = fibres[i]
        nu = AtomicMeasure.delta(Split(eta, best[0])) - AtomicMeasure.delta(Split(eta, best[1]))
        pairs.append((c.pairs[i][0], nu))
    return ExtractionReport(BiorthCandidate(tuple(pairs)), case, sizes, excluded, best)
