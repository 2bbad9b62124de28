"""Seeded generation of codes, conditions, functions and fuzz instances."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analysis import build_eps, parity_pairing
from .cantor import Space, SpaceConfig, Split, make_space
from .errors import ConfigError
from .family import SplittingFamily, derive_family
from .forcing import (
    Assignment,
    Complete,
    Condition,
    RealizePattern,
    build_chain,
    constant_map,
    domain,
    random_balanced_map,
    transport,
)
from .measures import AtomicMeasure, SimpleFunction


def _bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def random_codes(lam: int, M: int, rng: random.Random) -> tuple[str, ...]:
    if lam > 2**M:
        raise ConfigError(f"lambda={lam} exceeds 2^M={2 ** M}")
    return tuple(_bits(v, M) for v in rng.sample(range(2**M), lam))


@dataclass(frozen=True)
class TwinGroup:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    shared: int  # twins agree on exactly this many leading bits


def twin_block_codes(
    lam: int, M: int, block_size: int, prefix_len: int, rng: random.Random
) -> tuple[tuple[str, ...], list[TwinGroup]]:
    """Codes laid out as groups (alpha-block, beta-block) of consecutive indices.

    The i-th indices of the two blocks of group g agree on their first
    ``prefix_len + g`` bits and differ right after; different twin pairs
    already differ within the first ``prefix_len`` bits.  Indices left over
    after the last full group get unconstrained codes.
    """
    k = block_size
    if k < 1:
        raise ConfigError("block_size must be >= 1")
    groups = lam // (2 * k)
    pairs = groups * k
    if groups == 0:
        raise ConfigError(f"lambda={lam} is too small for one twin group of block size {k}")
    if 2**prefix_len < pairs:
        raise ConfigError(f"prefix_len={prefix_len} cannot separate {pairs} twin pairs")
    if prefix_len + groups > M:
        raise ConfigError(
            f"twin prefix lengths {prefix_len}..{prefix_len + groups - 1} need M >= {prefix_len + groups}"
        )
    heads = [_bits(v, prefix_len) for v in rng.sample(range(2**prefix_len), pairs)]
    codes: list[str] = [""] * lam
    layout = []
    taken: set[str] = set()
    for g in range(groups):
        base = 2 * k * g
        alpha = tuple(range(base, base + k))
        beta = tuple(range(base + k, base + 2 * k))
        shared = prefix_len + g
        for i in range(k):
            head = heads[g * k + i]
            middle = "".join(rng.choice("01") for _ in range(shared - prefix_len))
            bit = rng.choice("01")
            other = "1" if bit == "0" else "0"
            tails = ["".join(rng.choice("01") for _ in range(M - shared - 1)) for _ in range(2)]
            a = head + middle + bit + tails[0]
            b = head + middle + other + tails[1]
            codes[alpha[i]], codes[beta[i]] = a, b
            taken.update((a, b))
        layout.append(TwinGroup(alpha, beta, shared))
    free = [v for v in range(2**M) if _bits(v, M) not in taken]
    for xi, v in zip(range(2 * pairs, lam), rng.sample(free, lam - 2 * pairs)):
        codes[xi] = _bits(v, M)
    return tuple(codes), layout


def random_pattern_maps(
    n: int, k: int, rng: random.Random
) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...], list[tuple[int, int]]]:
    """eps rows from random parity pairings, random constants, and n coordinates (i, j) with j in I_i."""
    coords = [(m % k + 1, rng.randint(1, 2 * n)) for m in range(n)]
    pairings = []
    for i in range(1, k + 1):
        J = {j for ii, j in coords if ii == i}
        pairings.append(parity_pairing(J, n))
    eps = build_eps(pairings)
    delta = tuple(rng.randint(1, 2 * n) for _ in range(k))
    return eps, delta, coords


def twin_pattern_steps(n: int, layout: Sequence[TwinGroup], rng: random.Random) -> list[RealizePattern]:
    steps = []
    for group in layout:
        eps, delta, _ = random_pattern_maps(n, len(group.alpha), rng)
        steps.append(RealizePattern(group.alpha, group.beta, eps, delta))
    return steps


def twin_family(
    n: int, lam: int, M: int, block_size: int, prefix_len: int, seed: int, fillers: str = "random"
) -> tuple[SplittingFamily, list[TwinGroup], tuple]:
    """Family from a chain realizing one random pattern per twin group, then completing."""
    rng = random.Random(seed)
    codes, layout = twin_block_codes(lam, M, block_size, prefix_len, rng)
    space = make_space(SpaceConfig(n=n, M=M, codes=codes))
    script = (*twin_pattern_steps(n, layout, rng), Complete())
    chain = build_chain(space, script, seed, fillers)
    return derive_family(space, chain), layout, script


def random_assignment(space: Space, F: Sequence[int], xi: int, rng: random.Random) -> Assignment:
    earlier = [eta for eta in F if eta < xi]
    if earlier and rng.random() < 0.5:
        return Assignment(random_balanced_map(space.N, rng), rng.choice(earlier))
    return Assignment(constant_map(rng.randint(1, space.N), space.N), xi)


def random_condition(space: Space, F: Sequence[int], depth: int, rng: random.Random) -> Condition:
    """A valid condition on F at the given depth with random values."""
    F = tuple(sorted(F))
    f = {xi: {s: random_assignment(space, F, xi, rng) for s in domain(space, xi, depth)} for xi in F}
    return Condition(F, depth, f)


@dataclass(frozen=True)
class AmalgamationInstance:
    space: Space
    p1: Condition
    p2: Condition
    eps: dict
    delta: dict


def random_isomorphic_pair(rng: random.Random) -> AmalgamationInstance:
    """Two isomorphic conditions on root + alpha-block and root + beta-block."""
    n = rng.choice((2, 3))
    r = rng.randint(0, 2)
    k = rng.randint(1, 2)
    root = list(range(r))
    alpha = list(range(r, r + k))
    beta = list(range(r + k, r + 2 * k))
    need = r + k
    depth = max(need - 1, 0).bit_length() + rng.randint(0, 1)
    M = depth + rng.randint(1, 3)
    heads = [_bits(v, depth) for v in rng.sample(range(2**depth), need)]
    codes = [""] * (r + 2 * k)
    for xi in root:
        codes[xi] = heads[xi] + _bits(rng.randrange(2 ** (M - depth)), M - depth)
    for a, b in zip(alpha, beta):
        tails = rng.sample(range(2 ** (M - depth)), 2)
        codes[a] = heads[a] + _bits(tails[0], M - depth)
        codes[b] = heads[a] + _bits(tails[1], M - depth)
    space = make_space(SpaceConfig(n=n, M=M, codes=tuple(codes)))
    p1 = random_condition(space, root + alpha, depth, rng)
    p2 = transport(p1, dict(zip(alpha, beta)), space)
    eps = {a: random_balanced_map(space.N, rng) for a in alpha}
    delta = {a: constant_map(rng.randint(1, space.N), space.N) for a in alpha}
    return AmalgamationInstance(space, p1, p2, eps, delta)


def random_fraction(rng: random.Random, bound: int = 5, denominator: int = 12) -> Fraction:
    return Fraction(rng.randint(-bound * denominator, bound * denominator), rng.randint(1, denominator))


def random_simple_function(family, rng: random.Random, terms: int = 4) -> SimpleFunction:
    """Random combination of V_s, A_{xi,j} and A_{xi,j} & V_s indicators."""
    space = family.space
    out = []
    for _ in range(terms):
        kind = rng.randrange(3)
        s = "".join(rng.choice("01") for _ in range(rng.randint(0, space.M)))
        if kind == 0:
            B = space.v_set(s)
        else:
            B = family.A(rng.randrange(space.lam), rng.randint(1, space.N))
            if kind == 2:
                B = B & space.v_set(s)
        out.append((random_fraction(rng), B))
    return SimpleFunction(tuple(out))


def random_measure(space: Space, rng: random.Random, atoms: int = 6) -> AtomicMeasure:
    """Random atoms, biased towards points near the split codes."""
    chosen: dict = {}
    for _ in range(atoms):
        if rng.random() < 0.5:
            y = Split(rng.randrange(space.lam), rng.randint(1, space.N))
        else:
            y = rng.choice(space.ground_points)
        chosen[y] = random_fraction(rng)
    return AtomicMeasure(chosen)


@dataclass(frozen=True)
class NumberLemmaInstance:
    theta: Fraction
    rho: Fraction
    r: tuple[Fraction, ...]
    discarded: int


def number_lemma_instance(rng: random.Random, n: int) -> NumberLemmaInstance:
    """Random (theta, rho, r) meeting the pair lemma's hypotheses.

    One coordinate is set to nearly cancel the others; draws whose sum still
    misses (-rho, rho) are discarded and redrawn.
    """
    discarded = 0
    N = 2 * n
    while True:
        rho = Fraction(rng.randint(1, 100), 100)
        theta = rho + Fraction(rng.randint(1, 200), 100)
        i0, i1, ib = rng.sample(range(N), 3)
        r = [Fraction(rng.randint(-300, 300), 100) for _ in range(N)]
        r[i0] = theta + Fraction(rng.randint(1, 100), 100)
        r[i1] = Fraction(0)
        r[ib] = Fraction(0)
        r[ib] = -sum(r) + Fraction(rng.randint(-120, 120), 100) * rho
        if abs(sum(r)) < rho:
            return NumberLemmaInstance(theta, rho, tuple(r), discarded)
        discarded += 1
