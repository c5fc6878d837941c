"""Single-source Byzantine broadcast by exponential information gathering.

The source sends its payload to every other participant; for ``t`` further
rounds every participant relays what it heard along each label path to all
participants not yet on that path.  Each receiver then reduces its tree
bottom-up by strict majority.  Correct whenever ``n > 3t``.

Payloads are non-negative ints of a fixed bit width.  A message that is
missing or out of range is read as the all-zeros payload, and majority ties
also resolve to zero.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Mapping

Path = tuple[int, ...]
# (round, path being relayed, recipient, honest value) -> value to send, or None to omit
Behavior = Callable[[int, Path, int, int], "int | None"]

DEFAULT = 0


@dataclass(frozen=True)
class BroadcastInstance:
    source: int
    width: int
    participants: tuple[int, ...]
    t: int
    label: str = ""

    def __post_init__(self):
        if self.source not in self.participants:
            raise ValueError(f"source {self.source} is not a participant")
        if len(set(self.participants)) != len(self.participants):
            raise ValueError("duplicate participants")
        if len(self.participants) <= 3 * self.t:
            raise ValueError(f"need n > 3t, got n={len(self.participants)}, t={self.t}")
        if self.width < 1:
            raise ValueError("payload width must be positive")

    @property
    def rounds(self) -> int:
        return self.t + 1


@dataclass(frozen=True)
class Envelope:
    label: str
    round: int
    sender: int
    path: Path
    recipient: int
    payload: int
    bits: int


@dataclass
class BroadcastResult:
    outputs: dict[int, int]
    bits: int = 0
    messages: int = 0
    envelopes: list[Envelope] = field(default_factory=list)


def _sanitize(value, width: int) -> int:
    if value is None or not isinstance(value, int) or not 0 <= value < (1 << width):
        return DEFAULT
    return value


def majority(values) -> int:
    """Strict majority of ``values``; the default payload when there is none."""
    counts = Counter(values)
    value, count = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
    return value if 2 * count > len(values) else DEFAULT


def resolve(tree: Mapping[Path, int], node: int, participants, t: int) -> int:
    """Reduce ``node``'s EIG tree to a decision.

    ``tree`` maps label paths (starting at the source) to the values ``node``
    stored for them; missing entries count as the default payload.
    """
    others = [p for p in participants if p != node]
    source = next(iter(tree))[0] if tree else None
    if source is None:
        return DEFAULT

    def res(path: Path) -> int:
        stored = tree.get(path, DEFAULT)
        if len(path) == t + 1:
            return stored
        values = [stored]
        for p in others:
            if p not in path:
                values.append(res(path + (p,)))
        return majority(values)

    return res((source,))


def bcast_run(
    instance: BroadcastInstance,
    source_value: int,
    behaviors: Mapping[int, Behavior] | None = None,
    trace: bool = False,
) -> BroadcastResult:
    """Run one broadcast instance and return every participant's decision.

    ``behaviors`` supplies message hooks for faulty participants; nodes absent
    from it follow the protocol.  Bits are counted for every message actually
    sent (omitted messages cost nothing).
    """
    behaviors = behaviors or {}
    width = instance.width
    parts = instance.participants
    src = instance.source
    source_value = _sanitize(source_value, width)
    trees: dict[int, dict[Path, int]] = {p: {} for p in parts if p != src}
    result = BroadcastResult(outputs={})

    def send(rnd: int, sender: int, path: Path, recipient: int, honest: int):
        hook = behaviors.get(sender)
        value = honest if hook is None else hook(rnd, path, recipient, honest)
        if value is None:
            return
        result.messages += 1
        result.bits += width
        if trace:
            result.envelopes.append(
                Envelope(instance.label, rnd, sender, path, recipient, value, width)
            )
        trees[recipient][path + (sender,) if rnd > 1 else path] = _sanitize(value, width)

    for p in parts:
        if p != src:
            send(1, src, (src,), p, source_value)

    lieutenants = [p for p in parts if p != src]
    for rnd in range(2, instance.rounds + 1):
        # paths of length rnd - 1: the source followed by rnd - 2 distinct lieutenants
        for tail in permutations(lieutenants, rnd - 2):
            path = (src,) + tail
            for sender in lieutenants:
                if sender in path:
                    continue
                stored = trees[sender].get(path, DEFAULT)
                for recipient in lieutenants:
                    if recipient != sender and recipient not in path:
                        send(rnd, sender, path, recipient, stored)

    result.outputs[src] = source_value
    for p in lieutenants:
        result.outputs[p] = resolve(trees[p], p, parts, instance.t) if trees[p] else DEFAULT
    return result


def bits_per_bit(n: int, t: int) -> int:
    """Measured cost B: bits sent to broadcast a single bit fault-free."""
    inst = BroadcastInstance(source=0, width=1, participants=tuple(range(n)), t=t)
    return bcast_run(inst, 1).bits
