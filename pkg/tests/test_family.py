import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitcantor.cantor import Ground, Split, algebra_atoms, in_generated_algebra, space_from_codes
from splitcantor.errors import IncompleteChainError, PreconditionError
from splitcantor.family import (
    SplittingFamily,
    canonical_form,
    derive_family,
    residue_in_subalgebra,
    residue_sweep,
    residues,
    subalgebra_generators,
    verify_balanced,
    verify_splitting,
)
from splitcantor.forcing import AddIndex, build_chain, is_constant
from splitcantor.generators import random_measure, random_simple_function, twin_family
from splitcantor.measures import AtomicMeasure, SimpleFunction, integrate


def replace_sets(family, xi, sets):
    rows = list(family.sets)
    rows[xi] = tuple(frozenset(s) for s in sets)
    return SplittingFamily(family.space, tuple(rows))


def test_incomplete_chain_rejected():
    space = space_from_codes(2, ["00", "11"])
    chain = build_chain(space, [AddIndex(0)], seed=0)
    with pytest.raises(IncompleteChainError):
        derive_family(space, chain)


def test_split_points_sit_in_their_own_branch(small_family):
    space = small_family.space
    for xi in range(space.lam):
        for i in space.branches:
            assert small_family.branches_of(Split(xi, i), xi) == [i]


def basic_lemma_holds(family, condition):
    """Constant values put V_t in one set; balanced values move A_eta-pieces of V_t."""
    space = family.space
    for xi in condition.F:
        for t, (phi, eta) in condition.f[xi].items():
            V = space.v_set(t)
            if eta == xi:
                if not V <= family.A(xi, phi[0]):
                    return False
            else:
                for i in space.branches:
                    if not V & family.A(eta, i) <= family.A(xi, phi[i - 1]):
                        return False
    return True


def test_basic_lemma_on_finest_and_coarser_conditions(small_family):
    for condition in small_family.provenance.steps:
        assert basic_lemma_holds(small_family, condition)


def test_constant_value_covers_its_cone(small_family):
    space = small_family.space
    finest = small_family.provenance.finest
    found = 0
    for xi in finest.F:
        for s, (phi, eta) in finest.f[xi].items():
            if eta == xi:
                assert is_constant(phi)
                assert space.v_set(s) <= small_family.A(xi, phi[0])
                found += 1
    assert found


def test_derived_families_pass_all_clauses(small_family, family_n3):
    for family in (small_family, family_n3):
        assert verify_splitting(family).ok
        assert verify_balanced(family).ok


def test_overlap_reported_as_clause_2(small_family):
    A = list(small_family.sets[3])
    extra = next(iter(A[1]))
    A[0] = A[0] | {extra}
    report = verify_splitting(replace_sets(small_family, 3, A))
    assert not report.ok
    assert any(w["point"] == extra and w["xi"] == 3 for w in report.failures["2"])


def test_ground_points_always_satisfy_clause_5(small_family):
    report = verify_splitting(small_family)
    assert report.checked["5"] >= small_family.space.lam * len(small_family.space.ground_points)
    assert not report.failures["5"]


def test_whole_fibre_inside_one_set_is_balanced():
    space = space_from_codes(2, ["00", "11"])
    sets = []
    for xi in range(2):
        other = 1 - xi
        rest = space.everything - space.fiber(xi)
        row = [frozenset({Split(xi, j)}) for j in space.branches]
        row[0] = row[0] | rest  # R_other lies entirely in A_{xi,1}
        sets.append(tuple(row))
    family = SplittingFamily(space, tuple(sets))
    assert verify_balanced(family).ok


def test_single_odd_point_unbalances():
    space = space_from_codes(2, ["00", "11"])
    rows = []
    for xi in range(2):
        row = [frozenset({Split(xi, j)}) for j in space.branches]
        row[0] = row[0] | (space.everything - space.fiber(xi))
        rows.append(row)
    rows[1][0] = rows[1][0] - {Split(0, 1)}
    rows[1][1] = rows[1][1] | {Split(0, 1)}
    family = SplittingFamily(space, tuple(tuple(r) for r in rows))
    report = verify_balanced(family)
    assert {"xi": 1, "eta": 0, "j": 2, "odd": 1, "even": 0} in report.failures["6"]


def test_residue_examples(small_family):
    space = small_family.space
    assert all(residue_in_subalgebra(small_family, 0, k) for k in range(space.M + 1))
    assert residue_in_subalgebra(small_family, 3, space.M)
    assert residue_sweep(small_family) == []


def test_residue_fails_for_set_splitting_later_fibre(small_family):
    space = small_family.space
    alpha, beta = 2, 5
    A = list(small_family.sets[alpha])
    moved = Split(beta, 1)
    owner = small_family.branch(moved, alpha)
    target = 2 if owner != 2 else 3
    A[owner - 1] = A[owner - 1] - {moved}
    A[target - 1] = A[target - 1] | {moved}
    broken = replace_sets(small_family, alpha, A)
    assert not residue_in_subalgebra(broken, alpha, space.M)


def test_canonical_form_of_v_indicator(small_family):
    space = small_family.space
    f = SimpleFunction.indicator(space.v_set("01"))
    form = canonical_form(f, AtomicMeasure(), Fraction(1, 10), small_family)
    assert form.terms == ()
    assert form.g.values(space) == f.values(space)


def test_canonical_form_of_split_indicator_zero_measure(small_family):
    space = small_family.space
    f = SimpleFunction.indicator(small_family.A(4, 1))
    form = canonical_form(f, AtomicMeasure(), Fraction(1, 10), small_family)
    assert 4 in [t.xi for t in form.terms]
    assert all(t.xi <= 4 for t in form.terms)
    assert form.tail == 0
    assert all(form.value(y, small_family) == f.value(y) for y in space.points)


def test_canonical_form_moves_past_nearby_ground_point(small_family):
    space = small_family.space

    def neighbour(xi):
        code = space.codes[xi]
        return code[:-1] + ("1" if code[-1] == "0" else "0")

    # a ground point agreeing with x_xi on all but the last bit
    xi = next(xi for xi in range(space.lam) if neighbour(xi) not in space.index_of_code)
    near = Ground(neighbour(xi))
    f = SimpleFunction.indicator(small_family.A(xi, 1))
    mu = AtomicMeasure.delta(near)
    form = canonical_form(f, mu, Fraction(1, 10), small_family)
    term = next(t for t in form.terms if t.xi == xi)
    assert len(term.prefix) == space.M
    assert form.tail == 0


def test_full_algebra_separates_points(small_family):
    # so every f is expressible and only eps can be rejected
    assert all(len(atom) == 1 for atom in small_family.atom_chain[-1])
    f = SimpleFunction.indicator({Split(0, 1), Ground(next(g.code for g in small_family.space.ground_points))})
    canonical_form(f, AtomicMeasure(), 1, small_family)
    with pytest.raises(PreconditionError):
        canonical_form(f, AtomicMeasure(), 0, small_family)


@given(st.integers(0, 2**32 - 1))
def test_random_chains_give_balanced_splitting_families(seed):
    rng = random.Random(seed)
    n = rng.choice((2, 3))
    family, _, _ = twin_family(n, rng.randint(2, 6), rng.randint(5, 6), 1, 2, seed)
    assert verify_splitting(family).ok
    assert verify_balanced(family).ok


@given(st.integers(0, 2**32 - 1))
def test_canonical_form_reconstructs_and_bounds_tail(seed):
    rng = random.Random(seed)
    family, _, _ = twin_family(2, 6, 5, 1, 2, seed)
    f = random_simple_function(family, rng)
    mu = random_measure(family.space, rng)
    eps = Fraction(1, rng.choice((1, 3, 50, 1000)))
    form = canonical_form(f, mu, eps, family)
    space = family.space
    assert all(form.value(y, family) == f.value(y) for y in space.points)
    assert form.tail <= eps
    assert len({t.xi for t in form.terms}) == len(form.terms)
    for t in form.terms:
        assert t.prefix == space.prefix(t.xi, len(t.prefix))
    # the integral splits along g, the fibre part and the tail part
    fibre_part = tail_part = Fraction(0)
    for t in form.terms:
        V, R = space.v_set(t.prefix), space.fiber(t.xi)
        for l, q in enumerate(t.q, start=1):
            A = family.A(t.xi, l) & V
            fibre_part += q * mu.mass(A & R)
            tail_part += q * mu.mass(A - R)
    assert integrate(f, mu) == integrate(form.g, mu) + fibre_part + tail_part


def test_atom_chain_matches_direct_atoms(small_family):
    space = small_family.space
    for alpha in (0, 3, space.lam):
        direct = algebra_atoms(space, subalgebra_generators(small_family, alpha))
        assert set(small_family.atom_chain[alpha]) == set(direct)
    for alpha in range(space.lam):
        for k in (0, space.M):
            residue_ok = all(
                in_generated_algebra(space, r, subalgebra_generators(small_family, alpha))
                for r in residues(small_family, alpha, k)
            )
            assert residue_in_subalgebra(small_family, alpha, k) == residue_ok
