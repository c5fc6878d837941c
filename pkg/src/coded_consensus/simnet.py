"""Deterministic lock-step simulator for the consensus protocol.

Round schedule per generation (t' = current reduced fault bound):

    step 1 (symbols)          1 round
    step 3 (match vectors)    t' + 1 rounds, one broadcast instance per node
    step 5 (helper symbols)   1 round
    step 6 (alarms)           t' + 1 rounds
    fallback (claims)         t' + 1 rounds, only after an alarm

Fault-free nodes run exactly the operations in ``core``; faulty nodes run the
same operations and then pass every outgoing message through their script
hooks.  The simulator knows the ground truth and checks the agreement
properties and the protocol invariants after every generation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from typing import Any, Iterable

import yaml

from . import core
from .adversary import AdversaryScript, FaultyNode
from .bitcast import BroadcastInstance, Envelope, bcast_run, bits_per_bit
from .core import (
    ClaimLayout,
    Claims,
    GenerationContext,
    MatchMatrix,
    Params,
)
from .diagnosis import DiagnosisGraph, ProtocolError, fresh_graph, reduced_params, trusts
from .metrics import ComplexityReport

log = logging.getLogger(__name__)

CATEGORIES = ("step1", "step3", "step5", "step6", "fallback")


@dataclass
class Scenario:
    n: int
    t: int
    m: int
    L: int
    inputs: dict[int, int]
    faulty: tuple[int, ...] = ()
    script: AdversaryScript = field(default_factory=AdversaryScript)
    seed: int = 0
    name: str = "scenario"
    input_spec: dict = field(default_factory=dict)

    @property
    def params(self) -> Params:
        return Params(self.n, self.t, self.m, self.L)

    @property
    def honest(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.faulty)

    def validate(self) -> None:
        self.params  # raises on bad n, t, m, L
        if len(set(self.faulty)) > self.t:
            raise ValueError(f"{len(set(self.faulty))} faulty nodes exceed t={self.t}")
        if any(not 0 <= f < self.n for f in self.faulty):
            raise ValueError("faulty node id out of range")
        if sorted(self.inputs) != list(range(self.n)):
            raise ValueError("need exactly one input per node")
        for i, v in self.inputs.items():
            if not 0 <= v < (1 << self.L):
                raise ValueError(f"input of node {i} is not an {self.L}-bit value")
        for node in self.script.directives:
            if node not in self.faulty:
                raise ValueError(f"directives given for fault-free node {node}")


def make_inputs(spec: dict, n: int, L: int, seed: int) -> dict[int, int]:
    """Build per-node inputs from a spec like ``{"common": "random", "overrides": {2: "zeros"}}``."""
    rng = random.Random(seed)

    def one(s) -> int:
        if s == "random":
            return rng.getrandbits(L)
        if s == "zeros":
            return 0
        if s == "ones":
            return (1 << L) - 1
        if isinstance(s, int):
            return s
        v = int(str(s), 16)
        if v >= 1 << L:
            raise ValueError(f"input {s} longer than L={L} bits")
        return v

    common = one(spec.get("common", "random"))
    values = {i: common for i in range(n)}
    for k, s in (spec.get("overrides") or {}).items():
        values[int(k)] = one(s)
    return values


def scenario_from_dict(d: dict, name: str = "scenario") -> Scenario:
    n, t, m = int(d["n"]), int(d["t"]), int(d["m"])
    D = (n - 2 * t) * m
    L = int(d["L"]) if "L" in d else int(d.get("generations", 1)) * D
    seed = int(d.get("seed", 0))
    input_spec = d.get("inputs") or {"common": "random"}
    sc = Scenario(
        n=n,
        t=t,
        m=m,
        L=L,
        inputs=make_inputs(input_spec, n, L, seed),
        faulty=tuple(int(f) for f in d.get("faulty", ())),
        script=AdversaryScript.from_dict(d.get("directives")),
        seed=seed,
        name=str(d.get("name", name)),
        input_spec=input_spec,
    )
    sc.validate()
    return sc


def load_scenario(path: str | FsPath) -> Scenario:
    path = FsPath(path)
    with open(path) as fh:
        d = yaml.safe_load(fh)
    return scenario_from_dict(d, name=path.stem)


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "name": sc.name,
        "n": sc.n,
        "t": sc.t,
        "m": sc.m,
        "L": sc.L,
        "seed": sc.seed,
        "faulty": list(sc.faulty),
        "inputs": {"overrides": {i: format(v, "x") for i, v in sc.inputs.items()}},
        "directives": sc.script.to_dict(),
    }


def with_symbol_width(sc: Scenario, m: int) -> Scenario:
    """Same scenario at a different symbol width, keeping the generation count."""
    gens = sc.params.generations
    L = gens * (sc.n - 2 * sc.t) * m
    spec = sc.input_spec or {"common": "random"}
    out = replace(sc, m=m, L=L, inputs=make_inputs(spec, sc.n, L, sc.seed))
    out.validate()
    return out


@dataclass
class RunResult:
    scenario: Scenario
    decisions: dict[int, int]
    outcomes: list[core.GenerationOutcome]
    log: list[dict]
    report: ComplexityReport
    graphs: list[DiagnosisGraph]
    violations: list[str]
    envelopes: list = field(default_factory=list)

    @property
    def fallbacks(self) -> int:
        return sum(o.path == core.FALLBACK_PATH for o in self.outcomes)

    @property
    def ok(self) -> bool:
        return not self.violations

    def log_bytes(self) -> bytes:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.log).encode()


def _digest(value: int, bits: int) -> str:
    return hashlib.sha256(value.to_bytes((bits + 7) // 8, "big")).hexdigest()[:16]


class Simulation:
    def __init__(self, sc: Scenario, trace: bool = False):
        sc.validate()
        self.sc = sc
        self.params = sc.params
        self.code = self.params.code()
        self.honest = sc.honest
        self.faulty = set(sc.faulty)
        self.adv = {f: FaultyNode(f, sc.script.for_node(f), sc.seed, sc.m) for f in sc.faulty}
        self.graph = fresh_graph(sc.n, sc.t)
        self.chunks = {i: core.split_value(v, self.params) for i, v in sc.inputs.items()}
        self.trace = trace
        self.envelopes = []
        self.round = 0
        self.violations: list[str] = []
        self._deviated = False

    # -- helpers ----------------------------------------------------------

    def _hook(self, node: int, honest, altered):
        if altered != honest:
            self._deviated = True
        return altered

    def _agree(self, gen: int, phase: str, payloads: dict[int, tuple[int, int]], t: int):
        """Broadcast each source's payload; return agreed views and bits used.

        ``payloads`` maps source -> (value, width).  The returned view is the
        one held by every fault-free node (asserted identical).
        """
        active = self.graph.active
        view: dict[int, int] = {}
        bits = 0
        for src, (value, width) in payloads.items():
            inst = BroadcastInstance(src, width, active, t, label=f"g{gen}/{phase}/{src}")
            behaviors = {}
            for f in self.faulty & set(active):
                b = self.adv[f].bitcast(gen, phase, src, width)
                if b is not None:
                    behaviors[f] = self._watch(b)
            res = bcast_run(inst, value, behaviors, trace=self.trace)
            if self.trace:
                self.envelopes.extend(res.envelopes)
            bits += res.bits
            outs = {res.outputs[h] for h in self.honest if h in res.outputs}
            if len(outs) != 1:
                raise ProtocolError(f"broadcast {inst.label} ended in disagreement: {outs}")
            view[src] = outs.pop()
            if src in self.honest and view[src] != value:
                raise ProtocolError(f"broadcast {inst.label} violated validity")
        self.round += t + 1
        return view, bits

    def _p2p(self, label, sender, recipient, payload, width):
        if self.trace:
            self.envelopes.append(Envelope(label, self.round + 1, sender, (sender,), recipient, payload, width))

    def _watch(self, behavior):
        def wrapped(rnd, path, to, honest):
            out = behavior(rnd, path, to, honest)
            if out != honest:
                self._deviated = True
            return out

        return wrapped

    # -- one generation ----------------------------------------------------

    def generation(self, gen: int) -> core.GenerationOutcome:
        g = self.graph
        n, t = reduced_params(g)
        active = g.active
        code = self.code
        bits = dict.fromkeys(CATEGORIES, 0)
        self._deviated = False
        out = core.GenerationOutcome(gen, core.NORMAL_PATH, {}, graph_before=g)
        round_start = self.round

        # step 1
        codewords, inbox = {}, {i: {} for i in active}
        for i in active:
            cw, msgs = core.step1_disseminate(self.chunks[i][gen], code, i, g)
            codewords[i] = cw
            if i in self.faulty:
                msgs = self._hook(i, msgs, self.adv[i].step1(gen, msgs))
            for j, sym in msgs.items():
                if sym is None or not trusts(g, i, j):
                    continue
                bits["step1"] += code.field.m
                inbox[j][i] = sym
                self._p2p(f"g{gen}/step1", i, j, sym, code.field.m)
        self.round += 1

        # steps 2-3
        payloads = {}
        for i in active:
            vec = core.step2_match(inbox[i], codewords[i], i, g)
            if i in self.faulty:
                vec = self._hook(i, vec, self.adv[i].match(gen, vec))
            payloads[i] = (core.match_to_payload(vec, i, active), max(len(active) - 1, 1))
        view, bits["step3"] = self._agree(gen, "step3", payloads, t)
        M = MatchMatrix({i: core.payload_to_match(view[i], i, active) for i in active}, g)

        # step 4
        X = core.find_consistent_set(M, t)
        if X is None:
            out.path = core.DEFAULT_PATH
            out.decided = {h: 0 for h in self.honest}
            return self._finish(gen, out, bits, round_start, M)
        xbar = core.complement(X, active)
        out.X = X
        helpers = {y: core.choose_helper(y, X, g) for y in xbar}
        out.helpers = helpers

        # step 5
        helper_in: dict[int, dict] = {y: {} for y in xbar}
        sent_help: dict[int, dict[int, dict]] = {}
        for y, z in helpers.items():
            syms = core.helper_symbols(codewords[z], xbar)
            if z in self.faulty:
                syms = self._hook(z, syms, self.adv[z].helper(gen, y, syms))
            sent_help.setdefault(z, {})[y] = syms
            for q, s in syms.items():
                if s is not None:
                    bits["step5"] += code.field.m
                    helper_in[y][q] = s
                    self._p2p(f"g{gen}/step5/{q}", z, y, s, code.field.m)
        self.round += 1
        assembled = {
            y: core.step5_serve_and_check(y, inbox[y], helper_in[y], X, xbar, code, g) for y in xbar
        }
        deviated_before_alarm = self._deviated

        # step 6
        payloads = {}
        for y in xbar:
            bit = int(assembled[y].detected)
            if y in self.faulty:
                bit = self._hook(y, bit, self.adv[y].announce(gen, bit))
            payloads[y] = (bit, 1)
        announcements, bits["step6"] = self._agree(gen, "step6", payloads, t)
        out.announcements = announcements
        for y in xbar:
            if y in self.honest and assembled[y].detected and not deviated_before_alarm:
                self.violations.append(f"g{gen}: node {y} detected a failure nobody caused")
        self._check_claim1(gen, X, xbar, assembled)

        if core.step6_decide(announcements) == core.NORMAL_PATH:
            for h in self.honest:
                if h in X:
                    out.decided[h] = self.chunks[h][gen]
                else:
                    if assembled[h].detected:
                        raise ProtocolError(f"g{gen}: {h} detected but no alarm was agreed")
                    out.decided[h] = assembled[h].chunk
            return self._finish(gen, out, bits, round_start, M)

        # fallback
        out.path = core.FALLBACK_PATH
        ctx = GenerationContext(code, g, t, X, xbar, helpers)
        payloads = {}
        layouts = {i: ClaimLayout(i, ctx) for i in active}
        for i in active:
            c = Claims(
                value=self.chunks[i][gen],
                sent={j: codewords[i][i] for j in active if trusts(g, i, j)},
                received={j: inbox[i].get(j) for j in active if trusts(g, i, j)},
                helper_sent={y: core.helper_symbols(codewords[i], xbar) for y, z in helpers.items() if z == i},
                helper_received={q: helper_in[i].get(q) for q in xbar} if i in helpers else {},
            )
            if i in self.faulty:
                actual = c.copy()
                actual.sent = {j: inbox[j].get(i) for j in c.sent}
                actual.helper_sent = {y: dict(s) for y, s in sent_help.get(i, {}).items()}
                c = self.adv[i].claims(gen, actual, c, self.params.D)
            payloads[i] = (layouts[i].pack(c), layouts[i].width)
        view, bits["fallback"] = self._agree(gen, "fallback", payloads, t)
        claims = {i: layouts[i].unpack(view[i]) for i in active}
        findings = core.fallback_checks(claims, M, announcements, ctx)
        out.findings = findings
        for f in findings:
            if not any(v in self.faulty for v in f.nodes):
                raise ProtocolError(f"g{gen}: finding {f} names only fault-free nodes")
        self.graph = core.apply_findings(g, findings)
        if self.graph == g:
            raise ProtocolError(f"g{gen}: fallback produced no new dispute")
        value = core.fallback_value(claims)
        out.decided = {h: value for h in self.honest}
        return self._finish(gen, out, bits, round_start, M)

    def _check_claim1(self, gen, X, xbar, assembled):
        vals = {self.chunks[i][gen] for i in X if i in self.honest}
        if len(vals) > 1:
            self.violations.append(f"g{gen}: fault-free members of X hold different values")
            return
        if not vals:
            return
        (v,) = vals
        for y in xbar:
            if y in self.honest and not assembled[y].detected and assembled[y].chunk != v:
                self.violations.append(f"g{gen}: node {y} decoded a valid word with a foreign value")

    def _finish(self, gen, out, bits, round_start, M) -> core.GenerationOutcome:
        out.bits = bits
        out.graph_after = self.graph
        before, after = out.graph_before, self.graph
        n, t = reduced_params(before)
        vals = set(out.decided.values())
        self.record = {
            "generation": gen,
            "round": round_start,
            "n": n,
            "t": t,
            "active": list(before.active),
            "match": {str(k): v for k, v in M.to_rows().items()},
            "X": list(out.X) if out.X is not None else "none",
            "helpers": {str(y): z for y, z in sorted(out.helpers.items())},
            "detections": {str(y): b for y, b in sorted(out.announcements.items())},
            "path": out.path,
            "decided": _digest(min(vals), self.params.D) if len(vals) == 1 else "DISAGREE",
            "bits": dict(bits),
            "findings": [[f.check, f.action, list(f.nodes)] for f in out.findings],
            "diagnosis_delta": {
                "disputes": sorted([list(p) for p in after.disputes - before.disputes]),
                "isolated": sorted(after.isolated - before.isolated),
            },
        }
        return out


def _check_run(sc: Scenario, sim: Simulation, outcomes, graphs, decisions) -> list[str]:
    v = list(sim.violations)
    honest = sc.honest
    faulty = set(sc.faulty)
    p = sc.params
    if any(len(outcomes) != p.generations or h not in decisions for h in honest):
        v.append("termination: not every fault-free node decided L bits")
    if len({decisions.get(h) for h in honest}) > 1:
        v.append("consistency: fault-free nodes decided different values")
    common = {sc.inputs[h] for h in honest}
    if len(common) == 1 and decisions.get(honest[0]) != common.pop():
        v.append("validity: common fault-free input was not decided")
    for o in outcomes:
        if len({o.decided[h] for h in honest}) > 1:
            v.append(f"g{o.generation}: fault-free nodes disagree")
    prev = None
    for g in graphs:
        if not g.isolated <= faulty:
            v.append(f"isolation soundness: fault-free node isolated ({sorted(g.isolated - faulty)})")
        for a, b in g.disputes:
            if a not in faulty and b not in faulty:
                v.append(f"fault-free nodes {a} and {b} in dispute")
        if prev is not None and not (prev.accusations <= g.accusations and prev.isolated <= g.isolated):
            v.append("diagnosis state shrank")
        prev = g
    for o in outcomes:
        if o.path == core.FALLBACK_PATH:
            before, after = o.graph_before, o.graph_after
            grew = any(
                len({a for a, b in after.accusations if b == f}) > len({a for a, b in before.accusations if b == f})
                for f in faulty
            )
            if not grew:
                v.append(f"g{o.generation}: fallback did not add an accusation against a faulty node")
    t0 = sc.t
    if sum(o.path == core.FALLBACK_PATH for o in outcomes) > (t0 + 1) * t0:
        v.append("more than (t+1)t fallbacks")
    return sorted(set(v), key=v.index)


def run_scenario(sc: Scenario, trace: bool = False) -> RunResult:
    """Run every generation of ``sc`` and check the agreement properties."""
    sim = Simulation(sc, trace=trace)
    p = sc.params
    outcomes, records, graphs = [], [], [sim.graph]
    for gen in range(p.generations):
        o = sim.generation(gen)
        outcomes.append(o)
        records.append(sim.record)
        graphs.append(sim.graph)
    decisions = {h: core.join_chunks((o.decided[h] for o in outcomes), p.D) for h in sc.honest}
    report = ComplexityReport.from_outcomes(
        sc.n, sc.t, p.D, p.L, outcomes, measured_B={
            (n, t): bits_per_bit(n, t) for n, t in {reduced_params(o.graph_before) for o in outcomes}
        },
    )
    violations = _check_run(sc, sim, outcomes, graphs, decisions)
    result = RunResult(sc, decisions, outcomes, records, report, graphs, violations)
    if trace:
        result.envelopes = sim.envelopes
    return result


def run_consensus(inputs: dict[int, int], scenario: Scenario) -> RunResult:
    """Run consensus on ``inputs`` under the network and adversary of ``scenario``."""
    return run_scenario(replace(scenario, inputs=dict(inputs)))


def sweep(scenarios: Iterable[Scenario]) -> list[dict[str, Any]]:
    """Run every scenario; a scenario that errors becomes a failing row."""
    from .metrics import compare, predict, summary_row

    rows = []
    for sc in scenarios:
        try:
            res = run_scenario(sc)
        except Exception as exc:  # keep sweeping
            log.error("scenario %s failed: %s", sc.name, exc)
            rows.append({"scenario": sc.name, "n": sc.n, "t": sc.t, "verdict": f"error: {exc}"})
            continue
        rows.append(summary_row(res))
    return rows
