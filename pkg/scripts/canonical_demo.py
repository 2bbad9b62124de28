"""Decompose a random step function over a small family for decreasing eps.

The measure puts mass 2^-d on a ground point that leaves each code at depth d,
so tighter eps forces longer prefixes in the peeled terms.
"""
import argparse
import random
from fractions import Fraction

from splitcantor.cantor import Ground
from splitcantor.family import canonical_form
from splitcantor.generators import random_simple_function, twin_family
from splitcantor.measures import AtomicMeasure


def near_code_measure(space) -> AtomicMeasure:
    codes = set(space.codes)
    atoms = {}
    for code in space.codes:
        for d in range(space.M):
            flipped = code[:d] + ("1" if code[d] == "0" else "0")
            y = flipped + "0" * (space.M - d - 1)
            if y not in codes:
                atoms[Ground(y)] = atoms.get(Ground(y), Fraction(0)) + Fraction(1, 2 ** (d + 1))
    return AtomicMeasure(atoms)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--terms", type=int, default=5)
    args = parser.parse_args()

    family, _, _ = twin_family(args.n, 8, 7, 1, 3, seed=args.seed)
    rng = random.Random(args.seed)
    f = random_simple_function(family, rng, terms=args.terms)
    mu = near_code_measure(family.space)
    print(f"|mu| = {mu.abs_mass(family.space.points)}")
    for denominator in (1, 4, 16, 64, 256):
        eps = Fraction(1, denominator)
        form = canonical_form(f, mu, eps, family)
        exact = all(form.value(y, family) == f.value(y) for y in family.space.points)
        peeled = ", ".join(f"xi={t.xi} |s|={len(t.prefix)}" for t in form.terms) or "none"
        print(f"eps={eps}: exact={exact} tail={form.tail}  [{peeled}]")


if __name__ == "__main__":
    main()
