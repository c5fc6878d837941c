import pytest

from coded_consensus.adversary import AdversaryScript, Directive
from coded_consensus.simnet import Scenario, make_inputs

ACCEPTANCE_LINES: list[str] = []


def scripted(n, t, m, generations, faulty=(), directives=None, inputs=None, seed=0, name="t"):
    L = generations * (n - 2 * t) * m
    spec = inputs or {"common": "random"}
    script = AdversaryScript({
        f: [Directive(d.pop("kind"), d.pop("generations", None), d) for d in map(dict, ds)]
        for f, ds in (directives or {}).items()
    })
    return Scenario(n, t, m, L, make_inputs(spec, n, L, seed), tuple(faulty), script, seed, name, spec)


@pytest.fixture
def make_scenario():
    return scripted


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
