"""Breadth-first exploration of a composition into an explicit LTS.

A configuration holds the top interface state plus one state per process.
Under run-to-completion at most one element is active at a time: a
processing transformed process, or a stub/FSM owing the answer to a call.
When nothing is active the top interface may act.  Top and bottom halves of
an action only occur together, as a single communication label.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Optional

from .. import scpp as S
from ..engine import (DEFAULT_MAX_FRAMES, EngineError, ProcessState, resume_load, resume_return,
                      resume_throw, step_processing, step_stable)
from ..environment import (ConfigError, Custom, Responding, Stub, Transformed, fsm_step, stub_step,
                           top_call, top_interface_step)
from ..scpp import TAU, Action, ActionKind, Polarity
from .lts import Lts


@dataclass(frozen=True)
class Limits:
    max_states: int = 1_000_000
    max_transitions: int = 5_000_000
    max_depth: Optional[int] = None
    max_frames: int = DEFAULT_MAX_FRAMES

    def __post_init__(self):
        for name in ("max_states", "max_transitions", "max_frames"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_depth is not None and self.max_depth <= 0:
            raise ValueError("max_depth must be positive")


class ExplorationError(Exception):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.message = message
        self.trace = list(trace)

    def __str__(self):
        if not self.trace:
            return self.message
        return self.message + "\ntrace:\n" + "\n".join("  " + t for t in self.trace)


class LimitExceeded(ExplorationError):
    pass


# top interface states
@dataclass(frozen=True, order=True)
class TopState:
    mode: str  # "idle", "wait" or "halt"
    index: int = 0  # next script position (always 0 without a script)
    func: Optional[str] = None


@dataclass(frozen=True)
class Config:
    top: TopState
    procs: tuple

    def state_of(self, comp, proc):
        return self.procs[comp.proc_ids.index(proc)]


def _comm(label: Action) -> Action:
    return label.with_polarity(Polarity.COMM)


class Explorer:
    def __init__(self, comp, limits: Limits | None = None):
        self.comp = comp
        self.limits = limits or Limits()
        self.ids = comp.proc_ids
        self.pos = {p: i for i, p in enumerate(self.ids)}

    # -- helpers

    def initial(self) -> Config:
        return Config(TopState("idle"), self.comp.initial_states())

    def _set(self, cfg: Config, idx: int, st, top=None) -> Config:
        procs = cfg.procs[:idx] + (st,) + cfg.procs[idx + 1:]
        return Config(cfg.top if top is None else top, procs)

    def _idx(self, proc: str) -> int:
        if proc not in self.pos:
            raise EngineError(f"communication with undeclared process '{proc}'")
        return self.pos[proc]

    # -- matching a top-side request with its receiver

    def accept(self, cfg: Config, req: Action) -> list:
        """Receiver reactions to ``req`` as (comm label, config) pairs."""
        j = self._idx(req.proc)
        kind = self.comp.processes[req.proc]
        st = cfg.procs[j]
        c = self.comp
        if isinstance(kind, Transformed):
            if not st.stable:
                return []
            return [(_comm(lbl), self._set(cfg, j, new)) for lbl, new in step_stable(kind.model, st, req)]
        if isinstance(st, Responding):
            return []
        if isinstance(kind, Stub):
            answers = stub_step(kind.spec, req, c.categories, c.enums)
            if req.kind == ActionKind.CALL:
                lbl = S.call_action(Polarity.COMM, req.proc, req.func, req.args, req.lras)
                return [(lbl, self._set(cfg, j, Responding(req.func, req.lras, tuple((a, None) for a in answers))))]
            return [(_comm(a), cfg) for a in answers]
        out = []
        for ans, nxt in fsm_step(kind.fsm, st, req):
            if req.kind == ActionKind.CALL:
                lbl = S.call_action(Polarity.COMM, req.proc, req.func, req.args, req.lras)
                out.append((lbl, self._set(cfg, j, Responding(req.func, req.lras, ((ans, nxt),)))))
            else:
                out.append((_comm(ans), self._set(cfg, j, nxt)))
        return out

    def deliver(self, cfg: Config, responder: str, label: Action) -> list:
        """Hand a bottom-side return/throw to whoever waits on the responder."""
        for i, st in enumerate(cfg.procs):
            if isinstance(st, ProcessState) and st.pending is not None \
                    and st.pending.kind == ActionKind.CALL and st.pending.proc == responder:
                if label.kind == ActionKind.RETURN:
                    new = resume_return(st, label.value, label.lras)
                else:
                    new = resume_throw(st, label.lras)
                return [(_comm(label), self._set(cfg, i, new))]
        top = cfg.top
        if top.mode != "wait" or responder != self.comp.target:
            raise EngineError(f"answer {S.render_action(label)} has no waiting caller")
        fs = self.comp.top.functions.get(top.func)
        if label.kind == ActionKind.THROW and fs is not None and fs.throws_terminates:
            nxt = TopState("halt", top.index + 1)
        else:
            nxt = TopState("idle", top.index + 1 if self.comp.top.script is not None else 0)
        return [(_comm(label), replace(cfg, top=nxt))]

    # -- successor relation

    def successors(self, cfg: Config) -> list:
        for i, st in enumerate(cfg.procs):
            if isinstance(st, ProcessState) and st.frames and st.pending is None:
                return self._process_step(cfg, i)
        for i, st in enumerate(cfg.procs):
            if isinstance(st, Responding):
                out = []
                for ans, nxt in st.answers:
                    base = self._set(cfg, i, nxt)
                    out += self.deliver(base, self.ids[i], ans)
                return out
        if cfg.top.mode == "idle":
            return self._top_step(cfg)
        return []

    def _process_step(self, cfg: Config, i: int) -> list:
        model = self.comp.processes[self.ids[i]].model
        out = []
        for label, new in step_processing(model, cfg.procs[i], self.limits.max_frames):
            nxt = self._set(cfg, i, new)
            if label == TAU:
                out.append((TAU, nxt))
            elif label.polarity == Polarity.BOTTOM:
                out += self.deliver(nxt, self.ids[i], label)
            elif label.kind == ActionKind.LOAD:
                for comm, c2 in self.accept(nxt, label):
                    st = c2.procs[i]
                    out.append((comm, self._set(c2, i, resume_load(st, comm.value))))
            else:
                out += self.accept(nxt, label)
        return out

    def _top_step(self, cfg: Config) -> list:
        c = self.comp
        target = cfg.state_of(c, c.target)
        model = c.processes[c.target].model
        if c.top.script is not None:
            if cfg.top.index >= len(c.top.script):
                return []
            f, vs = c.top.script[cfg.top.index]
            if f not in model.get_prog:
                raise ConfigError(f"script calls '{f}', which is not defined on {model.class_name}")
            offers = [top_call(c.target, f, vs, model.param_refs(f))]
        else:
            offers = top_interface_step(c.top, model, target.globals, c.categories, c.enums)
        out = []
        for req in offers:
            for comm, nxt in self.accept(cfg, req):
                if req.kind == ActionKind.CALL:
                    nxt = replace(nxt, top=TopState("wait", cfg.top.index, req.func))
                out.append((comm, nxt))
        return out


@dataclass
class Exploration:
    lts: Lts
    configs: list  # configuration of each LTS state, when kept


def explore_system(comp, limits: Limits | None = None, keep_configs: bool = False) -> Exploration:
    ex = Explorer(comp, limits)
    lim = ex.limits
    init = ex.initial()
    index = {init: 0}
    configs = [init]
    parent = [None]  # (parent state, label) for error traces
    depth = [0]
    trans = []
    queue = deque([0])

    def trace_to(n):
        out = []
        while parent[n] is not None:
            n, lbl = parent[n]
            out.append(lbl)
        return out[::-1]

    while queue:
        n = queue.popleft()
        cfg = configs[n]
        try:
            succ = ex.successors(cfg)
        except (EngineError, ConfigError) as e:
            raise ExplorationError(str(e), trace_to(n)) from None
        rendered = sorted(((S.render_action(lbl), c2) for lbl, c2 in succ), key=lambda t: t[0])
        for lbl, c2 in rendered:
            m = index.get(c2)
            if m is None:
                if len(configs) >= lim.max_states:
                    raise LimitExceeded(f"state limit {lim.max_states} exceeded "
                                        f"(partial: {len(configs)} states, {len(trans)} transitions)",
                                        trace_to(n) + [lbl])
                if lim.max_depth is not None and depth[n] + 1 > lim.max_depth:
                    raise LimitExceeded(f"depth limit {lim.max_depth} exceeded", trace_to(n) + [lbl])
                m = len(configs)
                index[c2] = m
                configs.append(c2)
                parent.append((n, lbl))
                depth.append(depth[n] + 1)
                queue.append(m)
            trans.append((n, lbl, m))
            if len(trans) > lim.max_transitions:
                raise LimitExceeded(f"transition limit {lim.max_transitions} exceeded "
                                    f"(partial: {len(configs)} states)", trace_to(n) + [lbl])
    lts = Lts(len(configs), 0, tuple(trans))
    return Exploration(lts, configs if keep_configs else [])


def explore(comp, limits: Limits | None = None) -> Lts:
    return explore_system(comp, limits).lts
