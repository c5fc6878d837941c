"""Per-generation consensus protocol on D-bit values.

One generation, from the point of view of the non-isolated ("active") nodes:

1. every node encodes its D bits into a codeword of the (n0, n0 - 2*t0) code
   and sends its own position's symbol to every peer it trusts;
2. every node records which received symbols match its own codeword;
3. match vectors are agreed on with Byzantine broadcast;
4. the lexicographically smallest set X of n - t pairwise-matching nodes is
   found; without one, everybody decides the all-zeros default;
5. each node y outside X gets the symbols at positions outside X from a helper
   in X it trusts and checks the assembled word against the code;
6. nodes outside X broadcast whether that check failed.  With no alarm, X
   members keep their own value and the others decode theirs; otherwise every
   node broadcasts its claims (value, symbols sent and received) and the
   generation falls back to agreeing on the plurality claimed value while the
   claims are cross-checked to extract new disputes.

Symbol positions are permanent node ids.  After isolations the active nodes
use the mother code punctured to their positions, which is again MDS with
distance 2t' + 1 for the reduced t'.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

from .diagnosis import DiagnosisGraph, ProtocolError, accuse_all, apply_dispute, trusts
from .rs import CodeSpec, PuncturedCode

DEFAULT_PATH = "default"
NORMAL_PATH = "normal"
FALLBACK_PATH = "fallback"


@dataclass(frozen=True)
class Params:
    n: int
    t: int
    m: int
    L: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be at least 1")
        if self.n <= 3 * self.t:
            raise ValueError(f"need n > 3t, got n={self.n}, t={self.t}")
        if self.m < 1 or (1 << self.m) < self.n:
            raise ValueError(f"symbol width m={self.m} too small: need 2^m >= n={self.n}")
        if self.L <= 0 or self.L % self.D:
            raise ValueError(
                f"L={self.L} must be a positive multiple of D={self.D}; pad the input"
            )

    @property
    def k(self) -> int:
        return self.n - 2 * self.t

    @property
    def D(self) -> int:
        return self.k * self.m

    @property
    def generations(self) -> int:
        return self.L // self.D

    def code(self) -> CodeSpec:
        return CodeSpec.for_network(self.n, self.t, self.m)


def chunk_to_symbols(chunk: int, k: int, m: int) -> tuple[int, ...]:
    mask = (1 << m) - 1
    return tuple((chunk >> (m * (k - 1 - i))) & mask for i in range(k))


def symbols_to_chunk(symbols: Iterable[int], m: int) -> int:
    out = 0
    for s in symbols:
        out = (out << m) | s
    return out


def split_value(value: int, params: Params) -> list[int]:
    """Cut an L-bit value into D-bit chunks, most significant first."""
    mask = (1 << params.D) - 1
    g = params.generations
    return [(value >> (params.D * (g - 1 - i))) & mask for i in range(g)]


def join_chunks(chunks: Iterable[int], D: int) -> int:
    out = 0
    for c in chunks:
        out = (out << D) | c
    return out


# -- steps 1 and 2 ---------------------------------------------------------


def step1_disseminate(chunk: int, code: CodeSpec, me: int, g: DiagnosisGraph):
    """Encode ``chunk``; return the codeword and the symbol for each trusted peer."""
    cw = code.encode(chunk_to_symbols(chunk, code.k, code.field.m))
    out = {j: cw[me] for j in g.active if trusts(g, me, j)}
    return cw, out


def step2_match(received: Mapping[int, int | None], codeword, me: int, g: DiagnosisGraph) -> dict[int, bool]:
    return {
        j: trusts(g, me, j) and received.get(j) is not None and received[j] == codeword[j]
        for j in g.active
        if j != me
    }


def match_to_payload(vector: Mapping[int, bool], me: int, active) -> int:
    bits = 0
    for j in active:
        if j != me:
            bits = (bits << 1) | int(bool(vector.get(j, False)))
    return bits


def payload_to_match(bits: int, me: int, active) -> dict[int, bool]:
    peers = [j for j in active if j != me]
    w = len(peers)
    return {j: bool((bits >> (w - 1 - i)) & 1) for i, j in enumerate(peers)}


class MatchMatrix:
    """Agreed match vectors; entries for untrusted pairs are forced FALSE."""

    def __init__(self, vectors: Mapping[int, Mapping[int, bool]], g: DiagnosisGraph):
        self.active = g.active
        self._m = {}
        for i in self.active:
            row = vectors.get(i, {})
            for j in self.active:
                if i == j:
                    self._m[i, j] = True
                else:
                    self._m[i, j] = bool(row.get(j, False)) and trusts(g, i, j)

    def __getitem__(self, ij: tuple[int, int]) -> bool:
        return self._m[ij]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MatchMatrix) and self._m == other._m

    def consistent(self, j: int, k: int) -> bool:
        return self._m[j, k] and self._m[k, j]

    def to_rows(self) -> dict[int, list[int]]:
        return {i: [j for j in self.active if j != i and self._m[i, j]] for i in self.active}


# -- step 4 ----------------------------------------------------------------


def find_consistent_set(M: MatchMatrix, t: int) -> tuple[int, ...] | None:
    """Lexicographically smallest (n - t)-subset that is pairwise consistent."""
    active = M.active
    size = len(active) - t
    for cand in combinations(active, size):
        if all(M.consistent(a, b) for a, b in combinations(cand, 2)):
            return cand
    return None


def complement(X: Iterable[int], active: Iterable[int]) -> tuple[int, ...]:
    xs = set(X)
    return tuple(i for i in active if i not in xs)


# -- step 5 ----------------------------------------------------------------


def choose_helper(y: int, X: Iterable[int], g: DiagnosisGraph) -> int:
    for z in sorted(X):
        if trusts(g, z, y):
            return z
    raise ProtocolError(f"no member of X trusts node {y}; it should have been isolated")


def helper_symbols(codeword, xbar: Iterable[int]) -> dict[int, int]:
    return {q: codeword[q] for q in xbar}


def check_positions(y: int, X, xbar, g: DiagnosisGraph) -> tuple[int, ...]:
    """Positions y assembles: X members it trusts, plus every position outside X."""
    return tuple(sorted([j for j in X if trusts(g, y, j)] + list(xbar)))


@dataclass
class AssembledWord:
    word: dict[int, int | None]
    detected: bool
    chunk: int | None


def step5_serve_and_check(
    y: int,
    received: Mapping[int, int | None],
    helper: Mapping[int, int | None] | None,
    X,
    xbar,
    code: CodeSpec,
    g: DiagnosisGraph,
) -> AssembledWord:
    """Assemble F_y from step-1 receptions and the helper's symbols, then check it."""
    helper = helper or {}
    positions = check_positions(y, X, xbar, g)
    xs = set(X)
    word = {p: (received.get(p) if p in xs else helper.get(p)) for p in positions}
    punct = PuncturedCode(code, positions)
    if punct.contains(word):
        return AssembledWord(word, False, symbols_to_chunk(punct.decode(word), code.field.m))
    return AssembledWord(word, True, None)


# -- step 6 and the fallback -------------------------------------------------


@dataclass
class Claims:
    """What a node says, during fallback, it held, sent and received this generation."""

    value: int
    sent: dict[int, int | None] = field(default_factory=dict)
    received: dict[int, int | None] = field(default_factory=dict)
    helper_sent: dict[int, dict[int, int | None]] = field(default_factory=dict)
    helper_received: dict[int, int | None] = field(default_factory=dict)

    def copy(self) -> "Claims":
        return Claims(
            self.value,
            dict(self.sent),
            dict(self.received),
            {y: dict(v) for y, v in self.helper_sent.items()},
            dict(self.helper_received),
        )


@dataclass(frozen=True)
class GenerationContext:
    """Public, agreed state of one generation."""

    code: CodeSpec
    graph: DiagnosisGraph
    t: int
    X: tuple[int, ...]
    xbar: tuple[int, ...]
    helpers: Mapping[int, int]

    @property
    def active(self) -> tuple[int, ...]:
        return self.graph.active

    @property
    def D(self) -> int:
        return self.code.k * self.code.field.m


class ClaimLayout:
    """Fixed bit layout of a node's claims, derived from public state only.

    Each symbol slot is one presence bit followed by m symbol bits.
    """

    def __init__(self, node: int, ctx: GenerationContext):
        g = ctx.graph
        self.m = ctx.code.field.m
        self.D = ctx.D
        peers = [j for j in ctx.active if trusts(g, node, j)]
        served = sorted(y for y, z in ctx.helpers.items() if z == node)
        self.slots: list[tuple[str, int, int]] = []
        self.slots += [("sent", j, -1) for j in peers]
        self.slots += [("received", j, -1) for j in peers]
        self.slots += [("helper_sent", y, q) for y in served for q in ctx.xbar]
        if node in ctx.helpers:
            self.slots += [("helper_received", q, -1) for q in ctx.xbar]

    @property
    def width(self) -> int:
        return self.D + len(self.slots) * (self.m + 1)

    def _get(self, c: Claims, slot):
        kind, a, b = slot
        if kind == "helper_sent":
            return c.helper_sent.get(a, {}).get(b)
        return getattr(c, kind).get(a)

    def pack(self, c: Claims) -> int:
        bits = c.value & ((1 << self.D) - 1)
        top = 1 << self.m
        for slot in self.slots:
            sym = self._get(c, slot)
            ok = sym is not None and 0 <= sym < top
            bits = (bits << (self.m + 1)) | ((top | sym) if ok else 0)
        return bits

    def unpack(self, bits: int) -> Claims:
        c = Claims(0)
        w = self.m + 1
        mask = (1 << w) - 1
        top = 1 << self.m
        for idx, (kind, a, b) in enumerate(reversed(self.slots)):
            raw = (bits >> (w * idx)) & mask
            sym = raw & (top - 1) if raw & top else None
            if kind == "helper_sent":
                c.helper_sent.setdefault(a, {})[b] = sym
            else:
                getattr(c, kind)[a] = sym
        c.value = bits >> (w * len(self.slots))
        return c


@dataclass(frozen=True)
class Finding:
    check: str
    action: str  # "dispute" or "accuse_all"
    nodes: tuple[int, ...]


def fallback_checks(
    claims: Mapping[int, Claims],
    M: MatchMatrix,
    announcements: Mapping[int, int],
    ctx: GenerationContext,
) -> list[Finding]:
    """Cross-check broadcast claims; every finding names a provably faulty party.

    (a) a node's claimed sent symbols disagree with the codeword of its claimed value;
    (b) a sender's and a receiver's claims about a step-1 symbol disagree;
    (c) a helper's and its client's claims about helper symbols disagree;
    (d) an agreed match M[k][j] is TRUE but k's claimed reception differs from j's claim;
    (e) an alarm (or its absence) contradicts the announcer's own claimed word;
    (f) an agreed match bit contradicts the node's own claimed reception and value.
    """
    code, g = ctx.code, ctx.graph
    m = code.field.m
    out: list[Finding] = []
    codewords = {
        i: code.encode(chunk_to_symbols(c.value, code.k, m)) for i, c in claims.items()
    }

    for j, c in claims.items():
        cw = codewords[j]
        bad = any(c.sent.get(k) != cw[j] for k in ctx.active if trusts(g, j, k))
        for y, syms in c.helper_sent.items():
            if ctx.helpers.get(y) == j and any(syms.get(q) != cw[q] for q in ctx.xbar):
                bad = True
        if bad:
            out.append(Finding("a", "accuse_all", (j,)))

    for j in ctx.active:
        for k in ctx.active:
            if j != k and trusts(g, j, k):
                if claims[j].sent.get(k) != claims[k].received.get(j):
                    out.append(Finding("b", "dispute", (j, k)))

    for y, z in ctx.helpers.items():
        sent = claims[z].helper_sent.get(y, {})
        got = claims[y].helper_received
        if any(sent.get(q) != got.get(q) for q in ctx.xbar):
            out.append(Finding("c", "dispute", (z, y)))

    for k in ctx.active:
        for j in ctx.active:
            if j == k or not M[k, j]:
                continue
            if claims[k].received.get(j) != claims[j].sent.get(k):
                out.append(Finding("d", "dispute", (k, j)))

    for y in ctx.xbar:
        c = claims[y]
        positions = check_positions(y, ctx.X, ctx.xbar, g)
        xs = set(ctx.X)
        word = {p: (c.received.get(p) if p in xs else c.helper_received.get(p)) for p in positions}
        valid = PuncturedCode(code, positions).contains(word)
        if valid == bool(announcements.get(y, 0)):
            out.append(Finding("e", "accuse_all", (y,)))

    for k in ctx.active:
        cw = codewords[k]
        for j in ctx.active:
            if j == k or not trusts(g, k, j):
                continue
            r = claims[k].received.get(j)
            if M[k, j] != (r is not None and r == cw[j]):
                out.append(Finding("f", "accuse_all", (k,)))
                break
    return out


def apply_findings(g: DiagnosisGraph, findings: Iterable[Finding]) -> DiagnosisGraph:
    for f in findings:
        if f.action == "accuse_all":
            g = accuse_all(g, f.nodes[0])
        else:
            g = apply_dispute(g, *f.nodes)
    return g


def fallback_value(claims: Mapping[int, Claims]) -> int:
    """Plurality of the claimed values; ties go to the numerically smallest."""
    counts = Counter(c.value for c in claims.values())
    return min(counts, key=lambda v: (-counts[v], v))


@dataclass
class GenerationOutcome:
    generation: int
    path: str
    decided: dict[int, int]
    X: tuple[int, ...] | None = None
    helpers: dict[int, int] = field(default_factory=dict)
    announcements: dict[int, int] = field(default_factory=dict)
    bits: dict[str, int] = field(default_factory=dict)
    findings: list[Finding] = field(default_factory=list)
    graph_before: DiagnosisGraph | None = None
    graph_after: DiagnosisGraph | None = None


def step6_decide(announcements: Mapping[int, int]) -> str:
    return FALLBACK_PATH if any(announcements.values()) else NORMAL_PATH
