import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitcantor.cantor import Ground, Split, space_from_codes
from splitcantor.errors import ShapeError
from splitcantor.family import SplittingFamily
from splitcantor.generators import random_fraction, random_measure, random_simple_function, twin_family
from splitcantor.measures import (
    AtomicMeasure,
    BiorthCandidate,
    SimpleFunction,
    check_biorthogonal,
    check_nice,
    check_semibiorthogonal,
    discrete_witness,
    extract_nice_3supported,
    integrate,
    property6_system,
)


def alternating(xi, n):
    return AtomicMeasure({Split(xi, i): 1 if i % 2 == 0 else -1 for i in range(1, 2 * n + 1)})


def test_integrate_examples(small_family):
    B = frozenset({Ground("0000000"), Split(1, 2)})
    assert integrate(SimpleFunction.indicator(B), AtomicMeasure()) == 0
    assert integrate(SimpleFunction.indicator(B), AtomicMeasure.delta(Split(1, 2))) == 1
    f = SimpleFunction.indicator(small_family.A(3, 4))
    assert integrate(f, alternating(3, 2)) == 1


def test_property6_system_examples(small_family):
    c = property6_system(small_family)
    m = c.matrix()
    lam = small_family.space.lam
    assert all(m[i][j] == (1 if i == j else 0) for i in range(lam) for j in range(lam))
    assert all(mu.support == small_family.space.fiber(xi) for xi, (_, mu) in enumerate(c.pairs))
    assert check_biorthogonal(c).ok


def test_biorthogonal_checker_examples(small_family):
    f = SimpleFunction.indicator(small_family.A(0, 1))
    mu = AtomicMeasure.delta(Split(0, 1))
    assert check_biorthogonal(BiorthCandidate(((f, mu),))).ok
    result = check_biorthogonal(BiorthCandidate(((f, mu), (f, mu))))
    assert not result and result.witness == (0, 1, 1)


def test_semibiorthogonal_examples(small_family):
    assert check_semibiorthogonal(property6_system(small_family)).ok
    assert check_semibiorthogonal(BiorthCandidate(())).ok
    y, z = Split(0, 1), Split(1, 1)
    f0 = SimpleFunction.indicator({y})
    f1 = SimpleFunction(((1, {z}), (Fraction(-1, 16), {y})))
    c = BiorthCandidate(((f0, AtomicMeasure.delta(y)), (f1, AtomicMeasure.delta(z))))
    result = check_semibiorthogonal(c)
    assert not result and result.witness == (0, 1, Fraction(-1, 16))


def test_nice_examples(small_family):
    A = small_family.A(0, 1)
    mu = AtomicMeasure.delta(Split(0, 1)) - AtomicMeasure.delta(Split(0, 2))
    assert check_nice(BiorthCandidate(((SimpleFunction.indicator(A), mu),)))
    assert not check_nice(property6_system(small_family))
    f = SimpleFunction.indicator(A, Fraction(1, 2))
    assert not check_nice(BiorthCandidate(((f, 2 * mu),)))


def test_discrete_witness_counts(small_family):
    report = discrete_witness(small_family)
    assert report.ok
    assert (report.inside, report.outside) == (8, 56)
    assert report.branches == (1, 2, 4)
    assert report.tuples[3] == (Split(3, 1), Split(3, 2), Split(3, 4))


def test_discrete_witness_flags_bad_family(small_family):
    space = small_family.space
    # put all of R_0 into A_{1,1} and then copy (x_0, 2) and (x_0, 4) so tuple_0 lands in U_1
    rows = [list(r) for r in small_family.sets]
    fibre = space.fiber(0)
    rows[1] = [A - fibre for A in rows[1]]
    rows[1][0] |= {Split(0, 1), Split(0, 3)}
    rows[1][1] |= {Split(0, 2)}
    rows[1][3] |= {Split(0, 4)}
    broken = SplittingFamily(space, tuple(tuple(r) for r in rows))
    assert (1, 0) in discrete_witness(broken).exceptions


def _dummy(space):
    # extraction reads only the space from its family argument
    return SplittingFamily(space, ())


def test_extraction_point_masses():
    space = space_from_codes(2, ["000", "011", "101", "110"])
    pairs = tuple((SimpleFunction.indicator(space.fiber(i)), AtomicMeasure.delta(Split(i, 1))) for i in range(4))
    report = extract_nice_3supported(BiorthCandidate(pairs), _dummy(space))
    assert report.case == "point-mass"
    expected = [
        (SimpleFunction.indicator(space.fiber(b)), AtomicMeasure.delta(Split(b, 1)) - AtomicMeasure.delta(Split(a, 1)))
        for a, b in ((0, 1), (2, 3))
    ]
    assert list(report.candidate.pairs) == expected
    assert report.nice


def test_extraction_differences_unchanged():
    space = space_from_codes(2, ["00", "11"])
    pairs = tuple(
        (SimpleFunction.indicator({Split(i, 1)}), AtomicMeasure.delta(Split(i, 1)) - AtomicMeasure.delta(Split(i, 2)))
        for i in range(2)
    )
    report = extract_nice_3supported(BiorthCandidate(pairs), _dummy(space))
    assert report.case == "difference" and report.candidate.pairs == pairs and report.nice


def test_extraction_three_atoms():
    space = space_from_codes(2, ["000", "011", "101", "110"])
    pairs = []
    for i in range(4):
        mu = AtomicMeasure({Split(i, 1): 1, Split(i, 2): 1, Split(i, 3): -2})
        pairs.append((SimpleFunction.indicator({Split(i, 1)}), mu))
    # one more with nonzero weight sum is reported, not used
    lopsided = AtomicMeasure({Split(3, 1): 1, Split(3, 2): 1, Split(3, 3): 1})
    report = extract_nice_3supported(BiorthCandidate(tuple(pairs)), _dummy(space))
    assert report.case == "three-atom" and report.separated_pair == (1, 2)
    assert len(report.candidate) == 4 and report.nice
    assert all(mu.atoms == {Split(i, 1): 1, Split(i, 2): -1} for i, (_, mu) in enumerate(report.candidate.pairs))
    pairs[3] = (pairs[3][0], lopsided)
    report = extract_nice_3supported(BiorthCandidate(tuple(pairs)), _dummy(space))
    assert [i for i, _ in report.excluded] == [3] and len(report.candidate) == 3 and report.nice


def test_extraction_shape_errors():
    space = space_from_codes(2, ["00", "11"])
    f = SimpleFunction.indicator({Split(0, 1)})
    with pytest.raises(ShapeError):
        extract_nice_3supported(BiorthCandidate(((2 * f, AtomicMeasure.delta(Split(0, 1), Fraction(1, 2))),)), _dummy(space))
    two_fibres = AtomicMeasure({Split(0, 1): 1, Split(1, 1): 1})
    with pytest.raises(ShapeError):
        extract_nice_3supported(BiorthCandidate(((f, two_fibres),)), _dummy(space))
    with pytest.raises(ShapeError):
        extract_nice_3supported(BiorthCandidate(((f, AtomicMeasure.delta(Split(0, 2))),)), _dummy(space))


@st.composite
def three_supported_systems(draw):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    m = rng.randint(1, 6)
    space = space_from_codes(2, [format(v, "03b") for v in range(m)])
    measures, sets = [], []
    for i in range(m):
        atoms = rng.sample(range(1, 5), rng.randint(1, 3))
        weights = [Fraction(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in atoms]
        if len(atoms) == 3 and rng.random() < 0.6:
            weights[2] = -weights[0] - weights[1] or Fraction(1)
        inside = [a for a in atoms if rng.random() < 0.5] or atoms[:1]
        mass = sum(w for a, w in zip(atoms, weights) if a in inside)
        if mass == 0:
            inside = atoms[:1]
            mass = weights[0]
        measures.append(AtomicMeasure({Split(i, a): w / mass for a, w in zip(atoms, weights)}))
        sets.append({Split(i, a) for a in inside} | {Split(i, a) for a in range(1, 5) if a not in atoms and rng.random() < 0.5})
    # whole fibres of zero-sum measures may be added anywhere without breaking biorthogonality
    for i in range(m):
        for j in range(m):
            if i != j and sum(measures[j].atoms.values()) == 0 and rng.random() < 0.3:
                sets[i] |= space.fiber(j)
    pairs = tuple((SimpleFunction.indicator(A), mu) for A, mu in zip(sets, measures))
    return space, BiorthCandidate(pairs)


@given(three_supported_systems())
def test_extraction_output_is_nice(arg):
    space, c = arg
    assert check_biorthogonal(c).ok
    report = extract_nice_3supported(c, _dummy(space))
    assert report.nice
    assert sum(report.group_sizes.values()) == len(c)


@given(st.integers(0, 2**32 - 1))
def test_integration_is_bilinear(seed):
    rng = random.Random(seed)
    family, _, _ = twin_family(2, 4, 4, 1, 1, seed % 1000)
    f, g = random_simple_function(family, rng), random_simple_function(family, rng)
    mu, nu = random_measure(family.space, rng), random_measure(family.space, rng)
    a, b = random_fraction(rng), random_fraction(rng)
    assert integrate(a * f + b * g, mu) == a * integrate(f, mu) + b * integrate(g, mu)
    assert integrate(f, mu + nu) == integrate(f, mu) + integrate(f, nu)
    assert integrate(f, a * mu) == a * integrate(f, mu)


def test_measure_bookkeeping():
    y, z = Split(0, 1), Split(0, 2)
    mu = AtomicMeasure({y: Fraction(1, 2), z: Fraction(-3, 4), Split(0, 3): 0})
    assert len(mu) == 2 and mu.support == {y, z}
    assert mu.total_variation() == Fraction(5, 4)
    assert mu.abs_mass({z}) == Fraction(3, 4) and mu.mass({y, z}) == Fraction(-1, 4)
    assert (mu - mu).atoms == {}
