"""Oracle suites behind ``coded-consensus selftest``."""

from __future__ import annotations

from itertools import combinations, product

from .bitcast import BroadcastInstance, bcast_run
from .gf import GF2m
from .library import library_scenarios
from .rs import CodeSpec, min_distance_exhaustive
from .simnet import run_scenario, scenario_from_dict


def _code_distances() -> tuple[bool, str]:
    for m in (3, 4):
        code = CodeSpec(GF2m(m), 4, 2)
        if min_distance_exhaustive(code) != 3:
            return False, f"GF(2^{m}) distance"
        for z in (1, 2):
            for drop in combinations(range(4), z):
                keep = [p for p in range(4) if p not in drop]
                if min_distance_exhaustive(code.puncture(keep)) < 3 - z:
                    return False, f"GF(2^{m}) punctured {keep}"
    return True, ""


def faulty_tables(parts, faulty):
    """Every strategy of one faulty node at n=4, t=1.

    The node sends at most one message per recipient in an instance (round 1
    as source, round 2 as relay), so a strategy is a map recipient ->
    {0, 1, absent}.
    """
    recipients = [p for p in parts if p != faulty]
    for values in product((0, 1, None), repeat=len(recipients)):
        table = dict(zip(recipients, values))
        yield lambda rnd, path, to, honest, table=table: table[to]


def _bitcast_exhaustive() -> tuple[bool, str]:
    parts = (0, 1, 2, 3)
    count = 0
    for source, faulty in product(parts, parts):
        others = [p for p in parts if p != faulty]
        for value in (0, 1):
            for hook in faulty_tables(parts, faulty):
                res = bcast_run(BroadcastInstance(source, 1, parts, 1), value, {faulty: hook})
                outs = {res.outputs[p] for p in others}
                if len(outs) != 1:
                    return False, f"disagreement source={source} faulty={faulty}"
                if source != faulty and outs != {value}:
                    return False, f"validity source={source} faulty={faulty}"
                count += 1
    return True, f"{count} executions"


def _library() -> tuple[bool, str]:
    bad = [sc.name for sc in library_scenarios() if run_scenario(sc).violations]
    return not bad, ", ".join(bad[:3])


def _fast_path_counts() -> tuple[bool, str]:
    res = run_scenario(scenario_from_dict({"n": 4, "t": 1, "m": 4, "generations": 1}))
    bits = res.outcomes[0].bits
    ok = bits["step1"] == 48 and bits["step5"] == 4
    return ok, f"step1={bits['step1']} step5={bits['step5']}"


def run_selftests() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in (
        ("code distance (4,2) over GF(8), GF(16) and puncturings", _code_distances),
        ("bitcast n=4 t=1 exhaustive 1-bit misbehavior", _bitcast_exhaustive),
        ("scenario library n=4 t=1", _library),
        ("fast-path bit counts n=4 t=1 D=8", _fast_path_counts),
    ):
        ok, detail = fn()
        out.append((name, ok, detail))
    return out
