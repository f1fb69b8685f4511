"""Explicit labeled transition systems, Aldebaran I/O, hiding and renaming."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

TAU = "tau"


class AutFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Lts:
    n_states: int
    initial: int
    transitions: tuple  # sorted (src, label, dst) triples

    def __post_init__(self):
        if not 0 <= self.initial < max(self.n_states, 1):
            raise ValueError(f"initial state {self.initial} out of range")
        for s, _, d in self.transitions:
            if not (0 <= s < self.n_states and 0 <= d < self.n_states):
                raise ValueError(f"transition ({s}, {d}) out of range")
        object.__setattr__(self, "transitions", tuple(sorted(set(self.transitions))))

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def labels(self) -> set:
        return {lbl for _, lbl, _ in self.transitions}

    def successors(self) -> list:
        out = [[] for _ in range(self.n_states)]
        for s, lbl, d in self.transitions:
            out[s].append((lbl, d))
        return out

    def out_labels(self, state: int) -> list:
        return [lbl for s, lbl, _ in self.transitions if s == state]


def export_aut(lts: Lts) -> str:
    lines = [f"des ({lts.initial},{lts.n_transitions},{lts.n_states})"]
    for s, lbl, d in lts.transitions:
        lines.append(f'({s},"{lbl}",{d})')
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*")
_LINE = re.compile(r'\s*\(\s*(\d+)\s*,\s*(?:"(.*)"|([^,"]*?))\s*,\s*(\d+)\s*\)\s*')


def import_aut(text: str) -> Lts:
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise AutFormatError("line 1: missing des header")
    lineno, head = lines[0]
    m = _HEADER.fullmatch(head)
    if not m:
        raise AutFormatError(f"line {lineno}: malformed header {head!r}")
    initial, n_trans, n_states = map(int, m.groups())
    trans = []
    for lineno, ln in lines[1:]:
        m = _LINE.fullmatch(ln)
        if not m:
            raise AutFormatError(f"line {lineno}: malformed transition {ln!r}")
        label = m.group(2) if m.group(2) is not None else m.group(3).strip()
        trans.append((int(m.group(1)), label, int(m.group(4))))
    if len(trans) != n_trans:
        raise AutFormatError(f"header announces {n_trans} transitions, found {len(trans)}")
    try:
        return Lts(n_states, initial, tuple(trans))
    except ValueError as e:
        raise AutFormatError(str(e)) from None


def hide_actions(lts: Lts, patterns) -> Lts:
    """Replace labels fully matching any pattern (regex) by tau."""
    regs = [re.compile(p) for p in patterns]
    if not regs:
        return lts
    hidden = tuple((s, TAU if any(r.fullmatch(lbl) for r in regs) else lbl, d) for s, lbl, d in lts.transitions)
    return Lts(lts.n_states, lts.initial, hidden)


def rename_actions(lts: Lts, rules) -> Lts:
    """Rewrite labels with the first (pattern, replacement) whose regex fully matches."""
    regs = [(re.compile(p), r) for p, r in rules]
    if not regs:
        return lts

    def ren(lbl):
        for reg, repl in regs:
            m = reg.fullmatch(lbl)
            if m:
                return m.expand(repl)
        return lbl

    return Lts(lts.n_states, lts.initial, tuple((s, ren(lbl), d) for s, lbl, d in lts.transitions))


def reachable(lts: Lts) -> Lts:
    """Restrict to states reachable from the initial one, renumbered in BFS order."""
    succ = lts.successors()
    order = {lts.initial: 0}
    queue = [lts.initial]
    for s in queue:
        for _, d in sorted(succ[s]):
            if d not in order:
                order[d] = len(order)
                queue.append(d)
    trans = tuple((order[s], lbl, order[d]) for s, lbl, d in lts.transitions if s in order)
    return Lts(len(order), 0, trans)


def dump_structured(lts: Lts, parse_label=None) -> str:
    """JSON document with states, initial state and transitions.

    ``parse_label`` may turn a label string into a structured record; by
    default labels are split into name and argument text.
    """
    def record(lbl):
        if parse_label is not None:
            return parse_label(lbl)
        m = re.fullmatch(r"([A-Za-z_]\w*)\((.*)\)", lbl)
        return {"action": m.group(1), "payload": m.group(2)} if m else {"action": lbl, "payload": None}

    doc = {
        "states": lts.n_states,
        "initial": lts.initial,
        "transitions": [{"from": s, "label": lbl, "action": record(lbl), "to": d}
                        for s, lbl, d in lts.transitions],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
