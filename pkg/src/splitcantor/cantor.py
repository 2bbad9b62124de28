"""Finite truncation of the unordered 2n-split Cantor set.

Binary codes are plain ``str`` objects over ``"01"``; a code of length ``M``
stands for a point of the Cantor set.  Every subset of the (finite) point set
is clopen, so clopen sets are just ``frozenset`` objects of points.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import ConfigError, ResolutionError


class Ground(NamedTuple):
    """A point of 2^M that is not one of the split codes."""

    code: str


class Split(NamedTuple):
    """The point (x_xi, i); branches are numbered 1..2n."""

    xi: int
    i: int


Point = Union[Ground, Split]
ClopenSet = frozenset


def is_prefix(s: str, t: str) -> bool:
    return t.startswith(s)


def all_strings(length: int) -> Iterable[str]:
    """All binary strings of the given length, in lexicographic order."""
    for bits in itertools.product("01", repeat=length):
        yield "".join(bits)


@dataclass(frozen=True)
class SpaceConfig:
    n: int
    M: int
    codes: tuple[str, ...]

    @property
    def lam(self) -> int:
        return len(self.codes)

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.M < 1:
            raise ConfigError(f"M must be positive, got {self.M}")
        if self.lam < 1:
            raise ConfigError("at least one split code is required")
        if self.M < math.ceil(math.log2(self.lam)):
            raise ConfigError(
                f"M={self.M} is too small for {self.lam} distinct codes "
                f"(need M >= ceil(log2 lambda))"
            )
        seen: dict[str, int] = {}
        for xi, code in enumerate(self.codes):
            if len(code) != self.M or set(code) - {"0", "1"}:
                raise ConfigError(f"code {xi} ({code!r}) is not a binary string of length {self.M}")
            if code in seen:
                raise ConfigError(f"duplicate code {code!r} at indices {seen[code]} and {xi}")
            seen[code] = xi


@dataclass(frozen=True, eq=False)
class Space:
    """The point set (2^M minus the codes) plus each code split into 2n points."""

    config: SpaceConfig
    _v_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def N(self) -> int:
        return 2 * self.config.n

    @property
    def M(self) -> int:
        return self.config.M

    @property
    def lam(self) -> int:
        return self.config.lam

    @property
    def codes(self) -> tuple[str, ...]:
        return self.config.codes

    @property
    def branches(self) -> range:
        return range(1, self.N + 1)

    @cached_property
    def index_of_code(self) -> dict[str, int]:
        return {code: xi for xi, code in enumerate(self.codes)}

    @cached_property
    def ground_points(self) -> tuple[Ground, ...]:
        taken = self.index_of_code
        return tuple(Ground(c) for c in all_strings(self.M) if c not in taken)

    @cached_property
    def split_points(self) -> tuple[Split, ...]:
        return tuple(Split(xi, i) for xi in range(self.lam) for i in self.branches)

    @cached_property
    def points(self) -> tuple[Point, ...]:
        return self.ground_points + self.split_points

    @cached_property
    def everything(self) -> frozenset:
        return frozenset(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def code_of(self, point: Point) -> str:
        if isinstance(point, Split):
            return self.codes[point.xi]
        return point.code

    def prefix(self, xi: int, k: int) -> str:
        """x_xi|k."""
        return self.codes[xi][:k]

    def fiber(self, xi: int) -> frozenset:
        """R_xi = {(x_xi, 1), ..., (x_xi, 2n)}."""
        return frozenset(Split(xi, i) for i in self.branches)

    def v_set(self, s: str) -> frozenset:
        if len(s) > self.M:
            raise ResolutionError(f"|s| = {len(s)} exceeds the resolution M = {self.M}")
        cached = self._v_cache.get(s)
        if cached is not None:
            return cached
        members: list[Point] = []
        for tail in all_strings(self.M - len(s)):
            code = s + tail
            xi = self.index_of_code.get(code)
            if xi is None:
                members.append(Ground(code))
            else:
                members.extend(Split(xi, i) for i in self.branches)
        result = frozenset(members)
        self._v_cache[s] = result
        return result

    def all_v_sets(self) -> list[frozenset]:
        """V_s for every s with |s| <= M, shortest strings first."""
        return [self.v_set(s) for k in range(self.M + 1) for s in all_strings(k)]

    def describe(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "M": self.M,
            "codes": list(self.codes),
            "points": len(self.points),
        }


def make_space(config: SpaceConfig) -> Space:
    config.validate()
    return Space(config)


def space_from_codes(n: int, codes: Sequence[str]) -> Space:
    if not codes:
        raise ConfigError("at least one split code is required")
    return make_space(SpaceConfig(n=n, M=len(codes[0]), codes=tuple(codes)))


def algebra_atoms(space: Space, generators: Sequence[frozenset]) -> list[frozenset]:
    """Atoms of the Boolean subalgebra generated by ``generators``.

    Each point is labelled by the set of generators containing it; points with
    equal labels form one atom.  That is the common refinement of the
    partitions {B, K \\ B}, computed in time linear in the total generator size.
    """
    labels: dict[Point, list[int]] = {p: [] for p in space.points}
    for index, gen in enumerate(generators):
        for p in gen:
            labels[p].append(index)
    cells: dict[tuple[int, ...], list[Point]] = {}
    for p in space.points:
        cells.setdefault(tuple(labels[p]), []).append(p)
    return [frozenset(members) for members in cells.values()]


def refine_atoms(atoms: Iterable[frozenset], generators: Iterable[frozenset]) -> list[frozenset]:
    """Split every atom along each extra generator."""
    cells = list(atoms)
    for gen in generators:
        nxt = []
        for cell in cells:
            inside = cell & gen
            if inside and len(inside) != len(cell):
                nxt.extend((inside, cell - inside))
            else:
                nxt.append(cell)
        cells = nxt
    return cells


def is_union_of_atoms(candidate: frozenset, atoms: Iterable[frozenset]) -> bool:
    for atom in atoms:
        inside = len(atom & candidate)
        if inside and inside != len(atom):
            return False
    return True


def in_generated_algebra(space: Space, candidate: frozenset, generators: Sequence[frozenset]) -> bool:
    return is_union_of_atoms(candidate, algebra_atoms(space, generators))
