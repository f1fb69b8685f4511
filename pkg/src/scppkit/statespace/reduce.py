"""Strong and branching bisimulation minimization by signature refinement."""
from __future__ import annotations

from .lts import TAU, Lts, reachable


def _tarjan(n, edges) -> list:
    """SCCs of a graph given as adjacency lists, sinks first (iterative)."""
    index = [0] * n
    low = [0] * n
    seen = [False] * n
    on_stack = [False] * n
    stack, out = [], []
    counter = 1
    for root in range(n):
        if seen[root]:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                seen[v] = True
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            adj = edges[v]
            while i < len(adj):
                w = adj[i]
                i += 1
                if not seen[w]:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


def _renumber(sigs) -> list:
    ids = {}
    return [ids.setdefault(s, len(ids)) for s in sigs]


def strong_partition(lts: Lts) -> list:
    succ = lts.successors()
    block = [0] * lts.n_states
    count = 1
    while True:
        sigs = [(block[s], frozenset((a, block[d]) for a, d in succ[s])) for s in range(lts.n_states)]
        block = _renumber(sigs)
        new = max(block, default=-1) + 1
        if new == count:
            return block
        count = new


def branching_partition(lts: Lts) -> list:
    n = lts.n_states
    succ = lts.successors()
    block = [0] * n
    count = 1
    while True:
        inert = [[d for a, d in succ[s] if a == TAU and block[d] == block[s]] for s in range(n)]
        sig = [None] * n
        for comp in _tarjan(n, inert):
            acc = set()
            members = set(comp)
            for s in comp:
                for a, d in succ[s]:
                    if a == TAU and block[d] == block[s]:
                        if d not in members:
                            acc |= sig[d]
                    else:
                        acc.add((a, block[d]))
            frozen = frozenset(acc)
            for s in comp:
                sig[s] = frozen
        block = _renumber([(block[s], sig[s]) for s in range(n)])
        new = max(block, default=-1) + 1
        if new == count:
            return block
        count = new


def quotient(lts: Lts, block: list, drop_inert_tau: bool, keep_tau_loops: bool = False) -> Lts:
    trans = set()
    for s, a, d in lts.transitions:
        bs, bd = block[s], block[d]
        if a == TAU and bs == bd and drop_inert_tau and not keep_tau_loops:
            continue
        trans.add((bs, a, bd))
    n = max(block, default=0) + 1
    return reachable(Lts(n, block[lts.initial] if lts.n_states else 0, tuple(trans)))


def minimize_strong_bisim(lts: Lts) -> Lts:
    return quotient(lts, strong_partition(lts), drop_inert_tau=False)


def minimize_branching_bisim(lts: Lts, keep_tau_loops: bool = False) -> Lts:
    return quotient(lts, branching_partition(lts), drop_inert_tau=True, keep_tau_loops=keep_tau_loops)


def minimize(lts: Lts, relation: str, keep_tau_loops: bool = False) -> Lts:
    if relation == "strong":
        return minimize_strong_bisim(lts)
    if relation == "branching":
        return minimize_branching_bisim(lts, keep_tau_loops)
    raise ValueError(f"unknown relation '{relation}'")
