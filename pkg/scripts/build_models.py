"""Build the twin-block models for several n and report axioms, biorthogonality and timing.

    python3 scripts/build_models.py --lam 32 --M 12 --n 2 3
"""
import argparse
import time

from splitcantor.experiment import ExperimentConfig, prepare
from splitcantor.family import verify_balanced, verify_splitting
from splitcantor.measures import check_biorthogonal, discrete_witness, property6_system


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--lam", type=int, default=32)
    parser.add_argument("--M", type=int, default=12)
    parser.add_argument("--block-size", type=int, default=2)
    parser.add_argument("--prefix-len", type=int, default=4)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    print(f"{'n':>3} {'points':>7} {'build':>7} {'split':>6} {'bal':>5} {'biorth':>7} {'discrete':>9}")
    for n in args.n:
        config = ExperimentConfig(
            n=n, lam=args.lam, M=args.M, seed=args.seed,
            block_size=args.block_size, prefix_len=args.prefix_len,
        )
        config.validate()
        start = time.perf_counter()
        setup = prepare(config)
        built = time.perf_counter() - start
        family = setup.family
        splitting = verify_splitting(family).ok
        balanced = verify_balanced(family).ok
        biorth = check_biorthogonal(property6_system(family)).ok
        disc = discrete_witness(family)
        print(
            f"{n:>3} {len(setup.space):>7} {built:>6.2f}s {str(splitting):>6} {str(balanced):>5} "
            f"{str(biorth):>7} {disc.inside:>4}/{disc.inside + disc.outside:<4}"
        )


if __name__ == "__main__":
    main()
