"""Scripted Byzantine behavior for faulty nodes.

A script is an ordered list of directives.  Each directive applies to one
protocol phase and to all generations or a listed subset.  Faulty nodes with
no matching directive follow the protocol.  Hooks receive the honest output
and return what the faulty node actually sends, so a script can only deviate
where the protocol emits a message.

Directive kinds::

    corrupt-symbol           step1     target, value
    silent                   any       steps
    lie-match                step3     targets
    equivocate-match-vector  step3     -
    false-alarm              step6     -
    suppress-alarm           step6     -
    bad-helper               step5     target, position, value
    lie-in-fallback          fallback  value, sent, received, helper_sent, helper_received, cover
    byzantine-in-bitcast     bitcast   strategy, phases, role

Symbol/value specs: an int, ``"flip"`` (xor 1, always different),
``"random"`` (seeded), or ``"absent"`` (omit).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable

from .bitcast import Behavior, Path
from .core import Claims

PHASES = ("step1", "step3", "step5", "step6", "fallback")
KINDS = {
    "corrupt-symbol": "step1",
    "silent": None,
    "lie-match": "step3",
    "equivocate-match-vector": "step3",
    "false-alarm": "step6",
    "suppress-alarm": "step6",
    "bad-helper": "step5",
    "lie-in-fallback": "fallback",
    "byzantine-in-bitcast": None,
}
STRATEGIES = ("flip", "zero", "ones", "random", "split", "silent")


@dataclass(frozen=True)
class Directive:
    kind: str
    generations: frozenset[int] | None = None  # None means every generation
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown directive kind {self.kind!r}")
        steps = self.params.get("steps", self.params.get("phases", "all"))
        if steps != "all":
            for s in steps:
                if s not in PHASES:
                    raise ValueError(f"unknown step {s!r} in {self.kind} directive")
        strategy = self.params.get("strategy")
        if self.kind == "byzantine-in-bitcast" and strategy not in STRATEGIES:
            raise ValueError(f"unknown bitcast strategy {strategy!r}")

    def active_in(self, gen: int) -> bool:
        return self.generations is None or gen in self.generations

    def covers(self, phase: str) -> bool:
        steps = self.params.get("steps", self.params.get("phases", "all"))
        return steps == "all" or phase in steps

    def to_dict(self) -> dict:
        d = {"kind": self.kind, **self.params}
        d["generations"] = "all" if self.generations is None else sorted(self.generations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Directive":
        d = dict(d)
        kind = d.pop("kind")
        gens = d.pop("generations", "all")
        return cls(kind, None if gens == "all" else frozenset(int(g) for g in gens), d)


def _targets(spec, candidates: Iterable[int]) -> set[int]:
    if spec is None or spec == "all":
        return set(candidates)
    if isinstance(spec, int):
        return {spec}
    return {int(x) for x in spec}


class FaultyNode:
    """Hook implementations for one faulty node."""

    def __init__(self, node: int, directives: list[Directive], seed: int, m: int):
        self.node = node
        self.directives = directives
        self.m = m
        self.rng = random.Random(seed * 1_000_003 + node)

    def _active(self, gen: int, kind: str):
        return [d for d in self.directives if d.kind == kind and d.active_in(gen)]

    def _silent(self, gen: int, phase: str) -> bool:
        return any(d.covers(phase) for d in self._active(gen, "silent"))

    def _value(self, spec, honest, bits: int):
        if spec is None or spec == "honest":
            return honest
        if spec == "absent":
            return None
        if spec == "flip":
            return (honest ^ 1) if honest is not None else 1
        if spec == "random":
            return self.rng.getrandbits(bits)
        return int(spec) & ((1 << bits) - 1)

    def step1(self, gen: int, honest: dict[int, int]) -> dict[int, int | None]:
        if self._silent(gen, "step1"):
            return {j: None for j in honest}
        out = dict(honest)
        for d in self._active(gen, "corrupt-symbol"):
            for j in _targets(d.params.get("target"), honest):
                if j in out:
                    out[j] = self._value(d.params.get("value", "flip"), out[j], self.m)
        return out

    def match(self, gen: int, honest: dict[int, bool]) -> dict[int, bool]:
        out = dict(honest)
        for d in self._active(gen, "lie-match"):
            for j in _targets(d.params.get("targets"), honest):
                if j in out:
                    out[j] = not out[j]
        return out

    def helper(self, gen: int, y: int, honest: dict[int, int]) -> dict[int, int | None]:
        if self._silent(gen, "step5"):
            return {q: None for q in honest}
        out = dict(honest)
        for d in self._active(gen, "bad-helper"):
            if y not in _targets(d.params.get("target"), [y]):
                continue
            for q in _targets(d.params.get("position"), honest):
                if q in out:
                    out[q] = self._value(d.params.get("value", "flip"), out[q], self.m)
        return out

    def announce(self, gen: int, honest: int) -> int:
        bit = honest
        if self._active(gen, "false-alarm"):
            bit = 1
        if self._active(gen, "suppress-alarm"):
            bit = 0
        return bit

    def claims(self, gen: int, actual: Claims, protocol: Claims, D: int) -> Claims:
        """Fallback claims: the truth by default, or with ``cover`` what the
        protocol would have had it send."""
        lies = self._active(gen, "lie-in-fallback")
        if any(d.params.get("cover") for d in lies):
            c = actual.copy()
            c.sent = dict(protocol.sent)
            c.helper_sent = {y: dict(v) for y, v in protocol.helper_sent.items()}
        else:
            c = actual.copy()
        for d in lies:
            p = d.params
            if "value" in p:
                c.value = self._value(p["value"], c.value, D)
            for name in ("sent", "received", "helper_received"):
                table = getattr(c, name)
                for key, spec in (p.get(name) or {}).items():
                    for j in _targets("all" if key == "all" else int(key), list(table)):
                        table[j] = self._value(spec, table.get(j), self.m)
            for key, spec in (p.get("helper_sent") or {}).items():
                for y in _targets("all" if key == "all" else int(key), list(c.helper_sent)):
                    syms = c.helper_sent.get(y, {})
                    for q in syms:
                        syms[q] = self._value(spec, syms[q], self.m)
        return c

    def bitcast(self, gen: int, phase: str, source: int, width: int) -> Behavior | None:
        """Behavior of this node inside one broadcast instance, or None if honest."""
        mask = (1 << width) - 1
        is_source = source == self.node
        if self._silent(gen, phase):
            return lambda rnd, path, to, honest: None
        equivocate = is_source and phase == "step3" and self._active(gen, "equivocate-match-vector")
        strategies = [
            d.params["strategy"]
            for d in self._active(gen, "byzantine-in-bitcast")
            if d.covers(phase)
            and d.params.get("role", "both") in (("source", "both") if is_source else ("relay", "both"))
        ]
        if not equivocate and not strategies:
            return None
        rng = self.rng

        def behave(rnd: int, path: Path, to: int, honest: int):
            value = honest
            if equivocate and rnd == 1:
                value = honest if to % 2 == 0 else honest ^ mask
            for s in strategies:
                if s == "silent":
                    return None
                if s == "flip":
                    value ^= mask
                elif s == "zero":
                    value = 0
                elif s == "ones":
                    value = mask
                elif s == "random":
                    value = rng.getrandbits(width)
                elif s == "split":
                    value = value if to % 2 == 0 else value ^ mask
            return value

        return behave


@dataclass
class AdversaryScript:
    """Directives per faulty node."""

    directives: dict[int, list[Directive]] = field(default_factory=dict)

    def for_node(self, node: int) -> list[Directive]:
        return self.directives.get(node, [])

    def to_dict(self) -> dict:
        return {str(k): [d.to_dict() for d in v] for k, v in sorted(self.directives.items())}

    @classmethod
    def from_dict(cls, d: dict[Any, list[dict]] | None) -> "AdversaryScript":
        d = d or {}
        return cls({int(k): [Directive.from_dict(x) for x in v] for k, v in d.items()})


def random_script(rng: random.Random, faulty: Iterable[int], n: int, generations: int,
                  max_directives: int = 4) -> AdversaryScript:
    """Draw a random adversary script for the given faulty nodes."""
    out: dict[int, list[Directive]] = {}
    nodes = list(range(n))
    for f in faulty:
        ds = []
        for _ in range(rng.randint(1, max_directives)):
            kind = rng.choice(sorted(KINDS))
            gens = None
            if rng.random() < 0.5:
                gens = frozenset(g for g in range(generations) if rng.random() < 0.5)
            others = [j for j in nodes if j != f]
            value = rng.choice(["flip", "random", "absent"])
            if kind == "corrupt-symbol":
                params = {"target": rng.choice(others + ["all"]), "value": value}
            elif kind == "silent":
                params = {"steps": rng.choice(["all", sorted(rng.sample(PHASES, rng.randint(1, 3)))])}
            elif kind == "lie-match":
                params = {"targets": sorted(rng.sample(others, rng.randint(1, len(others))))}
            elif kind == "bad-helper":
                params = {"target": rng.choice(others + ["all"]),
                          "position": rng.choice(nodes + ["all"]), "value": value}
            elif kind == "lie-in-fallback":
                field_ = rng.choice(["value", "sent", "received", "helper_sent", "helper_received", "cover"])
                if field_ == "cover":
                    params = {"cover": True}
                elif field_ == "value":
                    params = {"value": rng.choice(["flip", "random"])}
                else:
                    params = {field_: {rng.choice(others + ["all"]): value}}
            elif kind == "byzantine-in-bitcast":
                params = {"strategy": rng.choice(STRATEGIES),
                          "phases": rng.choice(["all", sorted(rng.sample(["step3", "step6", "fallback"], rng.randint(1, 3)))]),
                          "role": rng.choice(["source", "relay", "both"])}
            else:
                params = {}
            ds.append(Directive(kind, gens, params))
        out[f] = ds
    return AdversaryScript(out)
