"""Named adversary scripts and canned scenarios used by selftest and sweeps."""

from __future__ import annotations

from .adversary import AdversaryScript, Directive
from .simnet import Scenario, make_inputs

ALL = None


def _d(kind: str, gens=ALL, **params) -> Directive:
    return Directive(kind, gens, params)


def script_library(n: int, f: int) -> dict[str, list[Directive]]:
    """Directive lists for a single faulty node ``f`` in an ``n``-node network."""
    nxt = (f + 1) % n
    return {
        "honest-behavior": [],
        "corrupt-one": [_d("corrupt-symbol", target=nxt, value="flip")],
        "corrupt-all": [_d("corrupt-symbol", target="all", value="random")],
        "silent": [_d("silent", steps="all")],
        "lie-match": [_d("lie-match", targets="all")],
        "equivocate-match": [_d("equivocate-match-vector")],
        "false-alarm": [_d("false-alarm")],
        "bad-helper": [_d("bad-helper", target="all", position="all", value="flip")],
        "lie-in-fallback": [
            _d("corrupt-symbol", target=nxt, value="flip"),
            _d("lie-in-fallback", value="flip", received={"all": "flip"}),
        ],
        "bitcast-split": [_d("byzantine-in-bitcast", strategy="split", phases="all", role="both")],
        "bitcast-flip-relay": [_d("byzantine-in-bitcast", strategy="flip", phases="all", role="relay")],
        "kitchen-sink": [
            _d("corrupt-symbol", target=nxt, value="flip"),
            _d("false-alarm"),
            _d("bad-helper", target="all", position="all", value="random"),
            _d("lie-in-fallback", sent={"all": "flip"}),
            _d("byzantine-in-bitcast", strategy="random", phases=["step3"], role="relay"),
        ],
    }


def persistent_adversary(n: int, faulty, generations: int) -> AdversaryScript:
    """Each faulty node corrupts its symbol to one fault-free peer per
    generation (highest ids first, the likeliest to fall outside the
    consistent set), covers its tracks in the fallback so that each incident
    costs it a single dispute, and raises false alarms whenever it can.
    """
    faulty = sorted(faulty)
    honest = [i for i in range(n) if i not in faulty][::-1]
    out = {}
    for idx, f in enumerate(faulty):
        ds = [_d("false-alarm"), _d("lie-in-fallback", cover=True)]
        for g in range(generations):
            target = honest[(g + idx) % len(honest)]
            ds.append(_d("corrupt-symbol", frozenset({g}), target=target, value="flip"))
        out[f] = ds
    return AdversaryScript(out)


def library_scenarios(n: int = 4, t: int = 1, m: int = 4, generations: int = 4, seed: int = 0):
    """Every library script at every faulty identity, with common and split inputs."""
    L = generations * (n - 2 * t) * m
    out = []
    for f in range(n):
        for name, ds in script_library(n, f).items():
            for mode in ("common", "split"):
                spec = {"common": "random"}
                if mode == "split":
                    spec = {"common": "random", "overrides": {(f + 2) % n: "random"}}
                out.append(Scenario(
                    n, t, m, L, make_inputs(spec, n, L, seed), (f,),
                    AdversaryScript({f: ds}), seed, f"{name}/f{f}/{mode}", spec,
                ))
    return out
