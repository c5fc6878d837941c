"""Systematic Reed-Solomon code over GF(2^m) and its punctured variants.

Position ``i`` of a codeword is evaluated at ``x**i`` (the field generator
raised to ``i``).  The first ``k`` positions carry the data symbols verbatim;
the remaining ``n - k`` are evaluations of the unique polynomial of degree
< k through them.  Any ``k`` positions determine the whole word (MDS), so a
code restricted to a position set ``keep`` has distance ``len(keep) - k + 1``.

Absent symbols are represented by ``None`` and never belong to a codeword.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence

from .gf import GF2m

Codeword = tuple[int, ...]
PartialWord = Mapping[int, "int | None"]


def evaluation_points(field: GF2m, n: int) -> tuple[int, ...]:
    """Powers of the generator, then zero if they run out before ``n``."""
    if n > field.order:
        raise ValueError(f"n={n} exceeds field size 2^{field.m}")
    points = []
    seen = set()
    p = 1
    while len(points) < n and p not in seen:
        seen.add(p)
        points.append(p)
        p = field.mul(p, 2 if field.m > 1 else 1)
    if len(points) < n:
        points.append(0)
    if len(points) < n:
        raise ValueError(
            f"x has order {len(seen)} modulo {field.poly:#x}; too few points for n={n}"
        )
    return tuple(points)


class CodeSpec:
    """The (n, k) systematic MDS code; distance n - k + 1."""

    def __init__(self, field: GF2m, n: int, k: int):
        if not 1 <= k < n:
            raise ValueError(f"need 1 <= k < n, got n={n}, k={k}")
        self.field = field
        self.n = n
        self.k = k
        self.points = evaluation_points(field, n)

    @classmethod
    def for_network(cls, n: int, t: int, m: int) -> "CodeSpec":
        """The (n, n-2t) code with distance 2t+1 used by a network of n nodes."""
        if t < 1:
            raise ValueError("t must be at least 1")
        if n <= 3 * t:
            raise ValueError(f"need n > 3t, got n={n}, t={t}")
        return cls(GF2m(m), n, n - 2 * t)

    @property
    def distance(self) -> int:
        return self.n - self.k + 1

    def __repr__(self) -> str:
        return f"CodeSpec(n={self.n}, k={self.k}, m={self.field.m})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CodeSpec) and (self.field, self.n, self.k) == (
            other.field,
            other.n,
            other.k,
        )

    def __hash__(self) -> int:
        return hash((self.field, self.n, self.k))

    def _lagrange(self, src: tuple[int, ...], dst: tuple[int, ...]):
        return _lagrange_matrix(self.field, self.points, src, dst)

    def interpolate(self, known: Mapping[int, int], targets: Iterable[int]) -> list[int]:
        """Evaluate at ``targets`` the degree < k polynomial through ``known``.

        ``known`` must hold exactly k positions.
        """
        src = tuple(sorted(known))
        if len(src) != self.k:
            raise ValueError(f"need exactly {self.k} known positions, got {len(src)}")
        dst = tuple(targets)
        coeffs = self._lagrange(src, dst)
        mul = self.field.mul
        values = [known[s] for s in src]
        out = []
        for row in coeffs:
            acc = 0
            for c, v in zip(row, values):
                if c and v:
                    acc ^= mul(c, v)
            out.append(acc)
        return out

    def encode(self, data: Sequence[int]) -> Codeword:
        if len(data) != self.k:
            raise ValueError(f"expected {self.k} data symbols, got {len(data)}")
        for d in data:
            self.field.check(d)
        parity = self.interpolate(dict(enumerate(data)), range(self.k, self.n))
        return tuple(data) + tuple(parity)

    def is_codeword(self, word: Sequence[int | None]) -> bool:
        if len(word) != self.n:
            raise ValueError(f"expected {self.n} symbols, got {len(word)}")
        if any(s is None for s in word):
            return False
        return tuple(word) == self.encode(word[: self.k])

    def puncture(self, keep: Iterable[int]) -> "PuncturedCode":
        return PuncturedCode(self, keep)

    def codewords(self) -> Iterator[Codeword]:
        for data in product(range(self.field.order), repeat=self.k):
            yield self.encode(data)


@lru_cache(maxsize=4096)
def _lagrange_matrix(field: GF2m, points: tuple[int, ...], src: tuple[int, ...], dst: tuple[int, ...]):
    xs = [points[s] for s in src]
    rows = []
    for d in dst:
        if d in src:
            rows.append(tuple(1 if s == d else 0 for s in src))
            continue
        xd = points[d]
        row = []
        for i, xi in enumerate(xs):
            num = 1
            den = 1
            for j, xj in enumerate(xs):
                if i != j:
                    num = field.mul(num, xd ^ xj)
                    den = field.mul(den, xi ^ xj)
            row.append(field.div(num, den))
        rows.append(tuple(row))
    return tuple(rows)


class PuncturedCode:
    """Codewords of ``spec`` restricted to the positions in ``keep``."""

    def __init__(self, spec: CodeSpec, keep: Iterable[int]):
        keep = tuple(sorted(set(keep)))
        if any(not 0 <= p < spec.n for p in keep):
            raise ValueError(f"positions {keep} out of range for n={spec.n}")
        if len(keep) < spec.k:
            raise ValueError(f"need at least k={spec.k} positions, got {len(keep)}")
        self.spec = spec
        self.keep = keep

    @property
    def n(self) -> int:
        return len(self.keep)

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def distance(self) -> int:
        return self.n - self.k + 1

    def __repr__(self) -> str:
        return f"PuncturedCode({self.spec!r}, keep={self.keep})"

    def _check_positions(self, word: PartialWord) -> None:
        if tuple(sorted(word)) != self.keep:
            raise ValueError(f"word positions {sorted(word)} != {list(self.keep)}")

    def contains(self, word: PartialWord) -> bool:
        self._check_positions(word)
        if any(word[p] is None for p in self.keep):
            return False
        info = self.keep[: self.k]
        rest = self.keep[self.k :]
        predicted = self.spec.interpolate({p: word[p] for p in info}, rest)
        return all(word[p] == v for p, v in zip(rest, predicted))

    def decode(self, word: PartialWord) -> tuple[int, ...]:
        """Data symbols of the unique codeword agreeing with ``word``."""
        if not self.contains(word):
            raise ValueError("not a word of the punctured code")
        info = self.keep[: self.k]
        return tuple(self.spec.interpolate({p: word[p] for p in info}, range(self.k)))

    def codewords(self) -> Iterator[Codeword]:
        for cw in self.spec.codewords():
            yield tuple(cw[p] for p in self.keep)


def encode(data: Sequence[int], spec: CodeSpec) -> Codeword:
    return spec.encode(data)


def is_codeword(word: Sequence[int | None], spec: CodeSpec) -> bool:
    return spec.is_codeword(word)


def puncture(spec: CodeSpec, keep: Iterable[int]) -> PuncturedCode:
    return PuncturedCode(spec, keep)


def min_distance_exhaustive(code: CodeSpec | PuncturedCode, limit: int = 10**6) -> int:
    """Minimum Hamming distance over all pairs of distinct codewords.

    Test oracle: enumerates all q**k words, so only for small instances.
    """
    q = code.spec.field.order if isinstance(code, PuncturedCode) else code.field.order
    if q ** code.k > limit:
        raise ValueError(f"{q}**{code.k} codewords exceeds exhaustive limit {limit}")
    words = list(code.codewords())
    best = code.n
    for a, b in combinations(words, 2):
        d = sum(x != y for x, y in zip(a, b))
        if d < best:
            best = d
    return best
