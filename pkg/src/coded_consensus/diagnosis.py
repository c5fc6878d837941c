"""Diagnosis graph: trust edges, accusations, and isolation of provably faulty nodes.

A dispute between two nodes means at least one of them is faulty; both stop
trusting each other and each accuses the other.  A node accused by at least
``t' + 1`` non-isolated nodes (``t'`` the current reduced fault bound) cannot
be fault-free and is isolated.  Isolating a node shrinks ``n`` and ``t`` by one.

Graphs are immutable; every update returns a new graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)


class ProtocolError(RuntimeError):
    """An internal invariant the protocol guarantees was violated."""


@dataclass(frozen=True)
class DiagnosisGraph:
    n0: int
    t0: int
    disputes: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    accusations: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    isolated: frozenset[int] = field(default_factory=frozenset)

    @property
    def nodes(self) -> range:
        return range(self.n0)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n0) if i not in self.isolated)

    def accusers(self, target: int) -> set[int]:
        return {a for a, b in self.accusations if b == target and a not in self.isolated}

    def _check(self, *nodes: int) -> None:
        for v in nodes:
            if not 0 <= v < self.n0:
                raise ValueError(f"node {v} out of range")

    def _with(self, disputes=None, accusations=None) -> "DiagnosisGraph":
        g = DiagnosisGraph(
            self.n0,
            self.t0,
            self.disputes if disputes is None else frozenset(disputes),
            self.accusations if accusations is None else frozenset(accusations),
            self.isolated,
        )
        return g._isolate()

    def _isolate(self) -> "DiagnosisGraph":
        isolated = set(self.isolated)
        changed = True
        while changed:
            changed = False
            t_now = self.t0 - len(isolated)
            for y in range(self.n0):
                if y in isolated:
                    continue
                count = sum(
                    1 for a, b in self.accusations if b == y and a not in isolated
                )
                if count >= t_now + 1:
                    isolated.add(y)
                    changed = True
                    break
        if len(isolated) > self.t0:
            raise ProtocolError(
                f"{len(isolated)} nodes isolated but at most {self.t0} can be faulty"
            )
        if isolated == self.isolated:
            return self
        return DiagnosisGraph(self.n0, self.t0, self.disputes, self.accusations, frozenset(isolated))

    def to_dict(self) -> dict:
        return {
            "isolated": sorted(self.isolated),
            "disputes": sorted([list(p) for p in self.disputes]),
            "accusations": sorted([list(p) for p in self.accusations]),
        }


def fresh_graph(n0: int, t0: int) -> DiagnosisGraph:
    return DiagnosisGraph(n0, t0)


def trusts(g: DiagnosisGraph, i: int, j: int) -> bool:
    if i == j or i in g.isolated or j in g.isolated:
        return False
    return (min(i, j), max(i, j)) not in g.disputes


def apply_dispute(g: DiagnosisGraph, i: int, j: int) -> DiagnosisGraph:
    g._check(i, j)
    if i == j:
        raise ValueError("a node cannot dispute itself")
    if i in g.isolated or j in g.isolated:
        log.info("ignoring dispute (%d, %d) involving an isolated node", i, j)
        return g
    pair = (min(i, j), max(i, j))
    if pair in g.disputes:
        return g
    return g._with(
        disputes=g.disputes | {pair},
        accusations=g.accusations | {(i, j), (j, i)},
    )


def accuse_all(g: DiagnosisGraph, target: int) -> DiagnosisGraph:
    g._check(target)
    if target in g.isolated:
        log.info("ignoring accusation of already isolated node %d", target)
        return g
    new = {(k, target) for k in g.active if k != target}
    g2 = g._with(accusations=g.accusations | new)
    if target not in g2.isolated:
        raise ProtocolError(f"unanimous accusation failed to isolate node {target}")
    return g2


def reduced_params(g: DiagnosisGraph) -> tuple[int, int]:
    k = len(g.isolated)
    n, t = g.n0 - k, g.t0 - k
    if t < 0:
        raise ProtocolError("more nodes isolated than can be faulty")
    return n, t
