import json
from pathlib import Path

import pytest

from scppkit.frontend import parse_source
from scppkit.pipeline import generate_from_source
from scppkit.statespace import TAU

FIXTURES = Path(__file__).parent / "fixtures"
ORACLE = FIXTURES / "oracle"

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def read_fixture(name):
    return (FIXTURES / name).read_text()


def oracle_names():
    return sorted(p.stem for p in ORACLE.glob("*.moo"))


def load_oracle(name):
    src = (ORACLE / f"{name}.moo").read_text()
    script = json.loads((ORACLE / f"{name}.json").read_text())
    return src, script


def project_from_script(script):
    """Project document that replays the script through the top interface."""
    proj = {k: v for k, v in script.items() if k != "calls"}
    proj["source"] = "<inline>"
    proj["instances"] = {p: {"kind": "transformed", **inst} for p, inst in script.get("instances", {}).items()}
    proj["topInterface"] = {"script": script["calls"]}
    return proj


def single_path_labels(lts):
    """Visible labels along the unique maximal path; fails on branching or cycles."""
    succ = lts.successors()
    s, seen, out = lts.initial, set(), []
    while succ[s]:
        assert len(succ[s]) == 1, f"state {s} branches: {succ[s]}"
        assert s not in seen, f"cycle through state {s}"
        seen.add(s)
        lbl, s = succ[s][0]
        if lbl != TAU:
            out.append(lbl)
    return out


def generate_oracle(name, keep_configs=False):
    src, script = load_oracle(name)
    return generate_from_source(project_from_script(script), src, name, keep_configs)


@pytest.fixture
def suspension_models():
    from scppkit.transformer import transform_program

    return transform_program(parse_source(read_fixture("suspension.moo")))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
