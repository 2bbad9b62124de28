"""Fuzz the pair lemma and tabulate the instances per n and the (i, j) pairs it picks."""
import argparse
from collections import Counter

from splitcantor.experiment import fuzz_number_lemma


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    parser.add_argument("--parallel", action="store_true")
    args = parser.parse_args()

    summary = fuzz_number_lemma(args.count, args.seed, tuple(args.n), parallel=args.parallel)
    print(f"instances {summary['instances']}  failures {summary['failure_count']}  "
          f"discarded draws {summary['discarded']}")
    print("per n:", ", ".join(f"n={n}: {c}" for n, c in summary["per_n"].items()))
    counts = Counter(summary["pair_distribution"])
    total = sum(counts.values())
    for pair, c in counts.most_common(8):
        print(f"  ({pair})  {c:>6}  {100 * c / total:5.1f}%")
    for failure in summary["failures"][:5]:
        print("failure:", failure)


if __name__ == "__main__":
    main()
