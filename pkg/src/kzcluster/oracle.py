"""Ground-truth computations for desk-scale verification.

Everything here recomputes from scratch (exact Dijkstra runs, subset
enumeration) and never relies on the incrementally maintained state, so it can
serve as the independent side of differential tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import EmptyCenters, InstanceTooLarge, InvalidK, InvalidSwap
from .graph import Graph, multi_source_dijkstra
from .state import BOT, ClusterState, _tau_of


def exact_cost(g: Graph, centers, z: float) -> float:
    """Sum over vertices of dist(v, C)**z, via one multi-source Dijkstra."""
    cs = sorted(set(centers))
    if not cs:
        raise EmptyCenters("exact_cost requires a nonempty center set")
    run = multi_source_dijkstra(g, [(c, 0.0) for c in cs])
    return math.fsum(d ** z for d in run.distance)


def brute_force_opt(g: Graph, k: int, z: float, cap: int = 10 ** 6) -> tuple[tuple[int, ...], float]:
    """Exhaustive optimum over all size-k center sets.

    Ties resolve to the lexicographically smallest subset (combinations are
    enumerated in lexicographic order and only strict improvements replace the
    incumbent).
    """
    if not (1 <= k <= g.n):
        raise InvalidK(f"k must lie in [1, {g.n}], got {k}")
    if math.comb(g.n, k) > cap:
        raise InstanceTooLarge(f"C({g.n},{k}) subsets exceed cap {cap}")
    apd = g.all_pairs_distances()
    best_set: tuple[int, ...] | None = None
    best_cost = math.inf
    for combo in combinations(range(g.n), k):
        rows = [apd[c] for c in combo]
        cost = math.fsum(min(row[v] for row in rows) ** z for v in range(g.n))
        if cost < best_cost:
            best_cost = cost
            best_set = combo
    assert best_set is not None
    return best_set, best_cost


def swap_distoid_cost(g: Graph, snapshot: tuple[set[int], list[int], list[float]],
                      p: int, q: int, z: float, eps: float) -> float:
    """Objective surrogate for the (p, q)-swap on a state snapshot.

    snapshot is (C, c[.], d[.]).  For vertices assigned to q the surrogate is
    2^(2 eps) * dist(v, C + p - q); otherwise min(d[v], 2^(2 eps) * dist(v, p)).
    Distances are exact Dijkstra runs.
    """
    C, assign, dist_arr = snapshot
    if p in C or q not in C:
        raise InvalidSwap(f"need p not in C and q in C, got p={p}, q={q}")
    swapped = sorted((C - {q}) | {p})
    d_swapped = multi_source_dijkstra(g, [(c, 0.0) for c in swapped]).distance
    d_p = multi_source_dijkstra(g, [(p, 0.0)]).distance
    factor = 2.0 ** (2.0 * eps)
    total = []
    for v in range(g.n):
        if assign[v] == q:
            val = factor * d_swapped[v]
        else:
            val = min(dist_arr[v], factor * d_p[v])
        total.append(val ** z)
    return math.fsum(total)


def is_super_effective_noncenter(state: ClusterState, p: int) -> tuple[bool, int | None]:
    """Does some center q make the (p, q)-swap distoid beat (1 - eps*volume[q])*cost_z?

    Returns (True, q) for the first qualifying q in ascending id, else
    (False, None).  Oracle-side only; the maintained structure never computes
    swap distoids.
    """
    if p in state.C:
        return False, None
    snapshot = (set(state.C), list(state.c), list(state.d))
    eps = state.params.eps
    z = state.params.z
    cost = state.cost_z
    for q in state.centers():
        distoid = swap_distoid_cost(state.g, snapshot, p, q, z, eps)
        if distoid <= (1.0 - eps * state.volume(q)) * cost:
            return True, q
    return False, None


def potential(state: ClusterState) -> tuple[float, float]:
    """Degree-weighted log-sum of subclustering distances, and its cap.

    Phi = sum over (J, v) of deg(v) * log2(1 + d_J[v]);
    Phi_max = 2 m |J| * log2(1 + d_bar).
    """
    g = state.g
    phi = math.fsum(
        g.degree[v] * math.log2(1.0 + state.dJ[j][v])
        for j in range(state.nj)
        for v in range(g.n)
    )
    phi_max = 2.0 * g.m * state.nj * math.log2(1.0 + state.params.d_bar)
    return phi, phi_max


# ---------------------------------------------------------------------------
# full consistency audit


@dataclass
class ConsistencyReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def note(self, msg: str) -> None:
        self.violations.append(msg)


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def check_state_consistency(g: Graph, state: ClusterState,
                            rtol: float = 1e-9) -> ConsistencyReport:
    """Recompute every maintained field from scratch and diff it.

    Checks invariants A1-A4 per index, B (merged minimizer with the
    BOT-avoiding tie rule), C/D (tree sums and cost), E (loss formula),
    F (volume formula), G/H (group membership and ordering), plus the
    lemma-level bounds d_J[v] <= min(d_bar, 2^(2 eps) dist(v, C_J)),
    dist(v,C) <= d[v] <= 2^(2 eps) dist(v,C), and
    cost(V,C) <= cost_z <= 2^(2 eps z) cost(V,C).
    Violations are returned as data, not raised.
    """
    rep = ConsistencyReport()
    n = g.n
    z = state.params.z
    eps = state.params.eps
    d_bar = state.params.d_bar
    relax = state.params.relax
    apd = g.all_pairs_distances()
    slack = 1.0 + rtol

    if not state.C:
        rep.note("center set is empty")
        return rep
    for j in range(state.nj):
        expect_cj = {c for c in state.C if state.cover.contains(j, c)}
        if state.CJ[j] != expect_cj:
            rep.note(f"C_J[{j}] != C ∩ J: {sorted(state.CJ[j])} vs {sorted(expect_cj)}")
        cj = state.cJ[j]
        dj = state.dJ[j]
        if state.CJ[j]:
            for c in state.CJ[j]:  # A1
                if cj[c] != c or dj[c] != 0.0:
                    rep.note(f"A1 violated at (J={j}, c={c}): ({cj[c]}, {dj[c]})")
            for u in range(n):  # A2
                for v, w in g.adjacency[u]:
                    if dj[u] > relax * (dj[v] + w) * slack:
                        rep.note(f"A2 violated on edge ({u},{v}) in J={j}")
            dist_cj = [min(apd[c][v] for c in state.CJ[j]) for v in range(n)]
            for v in range(n):  # A3 + Lemma bound on subclusterings
                if cj[v] not in state.CJ[j]:
                    rep.note(f"A3 violated at (J={j}, v={v}): c_J={cj[v]} not in C_J")
                    continue
                if apd[cj[v]][v] > dj[v] * slack:
                    rep.note(f"A3 violated at (J={j}, v={v}): dist {apd[cj[v]][v]} > d_J {dj[v]}")
                bound = min(d_bar, (2.0 ** (2 * eps)) * dist_cj[v])
                if dj[v] > bound * slack:
                    rep.note(f"subclustering bound violated at (J={j}, v={v}): "
                             f"d_J {dj[v]} > {bound}")
        else:
            for v in range(n):  # A4
                if cj[v] != BOT or dj[v] != d_bar:
                    rep.note(f"A4 violated at (J={j}, v={v}): ({cj[v]}, {dj[v]})")
        # subcluster member sets are bookkeeping for delete; audit them too
        for c, mem in state._members[j].items():
            expect = {v for v in range(n) if cj[v] == c}
            if mem != expect:
                rep.note(f"member set stale at (J={j}, c={c})")

    # B: merged minimizer with tie rule (value, prefer non-BOT, smaller id),
    # recomputed here with its own comparison loop
    for v in range(n):
        best_c, best_d = BOT, math.inf
        for j in range(state.nj):
            cj_v, dj_v = state.cJ[j][v], state.dJ[j][v]
            if dj_v < best_d:
                best_c, best_d = cj_v, dj_v
            elif dj_v == best_d:
                if best_c == BOT and cj_v != BOT:
                    best_c = cj_v
                elif cj_v != BOT and best_c != BOT and cj_v < best_c:
                    best_c = cj_v
        if state.c[v] != best_c or state.d[v] != best_d:
            rep.note(f"B violated at v={v}: ({state.c[v]}, {state.d[v]}) "
                     f"vs minimizer ({best_c}, {best_d})")

    # C/D: tree leaves, internal sums, root = cost_z
    tree = state.tree
    for v in range(n):
        if tree.get(v) != state.d[v] ** z:
            rep.note(f"C violated: leaf {v} is {tree.get(v)}, expected {state.d[v] ** z}")
    for i in range(1, tree.base):
        if tree.nodes[i] != tree.nodes[2 * i] + tree.nodes[2 * i + 1]:
            rep.note(f"C violated: internal node {i} is not the sum of its children")
    fresh_cost = math.fsum(state.d[v] ** z for v in range(n))
    if not _close(state.cost_z, fresh_cost, rtol):
        rep.note(f"D violated: cost_z {state.cost_z} vs fresh sum {fresh_cost}")

    # E: loss accumulators vs from-scratch recomputation
    loss_fresh: dict[int, float] = {c: 0.0 for c in state.C}
    for v in range(n):
        cv = state.c[v]
        if cv in loss_fresh:
            term = state._excluded_min_pow(v, cv) - state.d[v] ** z
            loss_fresh[cv] += term
    for c in state.C:
        if state._loss_inf[c]:
            rep.note(f"E violated: loss[{c}] carries +inf at an operation boundary")
        elif not _close(state._loss_sum[c], loss_fresh[c], rtol):
            rep.note(f"E violated: loss[{c}] = {state._loss_sum[c]} vs {loss_fresh[c]}")
        if loss_fresh[c] < -rtol * max(1.0, state.cost_z):
            rep.note(f"E violated: recomputed loss[{c}] negative: {loss_fresh[c]}")

    # F: volume numerators, exactly (integer bookkeeping)
    vol_fresh = [0] * n
    for j in range(state.nj):
        for v in range(n):
            c = state.cJ[j][v]
            if c >= 0:
                vol_fresh[c] += g.degree[v]
    for c in range(n):
        if state.volume_num[c] != vol_fresh[c]:
            rep.note(f"F violated: volume_num[{c}] = {state.volume_num[c]} vs {vol_fresh[c]}")
    total = sum(vol_fresh[c] for c in state.C)
    if not (len(state.C) <= total <= state.vol_denom):
        rep.note(f"volume sum rule violated: {total} not in [|C|, 2m|J|]")
    if all(state.CJ[j] for j in range(state.nj)) and total != state.vol_denom:
        rep.note(f"volume sum should be exactly 1 with all C_J nonempty, got {total}/{state.vol_denom}")

    # G/H: group membership by exact integer band, ordering keys match loss
    t = state.params.group_count
    for c in state.C:
        if state.volume_num[c] <= 0:
            rep.note(f"G violated: center {c} has nonpositive volume")
            continue
        tau = _tau_of(state.volume_num[c], state.vol_denom)
        if not (1 <= tau <= t):
            rep.note(f"G violated: tau {tau} outside [1, {t}] for center {c}")
        if state._group_of[c] != tau:
            rep.note(f"G violated: center {c} grouped at {state._group_of[c]}, expected {tau}")
        if (state._group_key[c], c) not in state.groups[state._group_of[c]]:
            rep.note(f"H violated: center {c} missing from its group structure")
        if state._group_key[c] != state._raw_loss(c):
            rep.note(f"H violated: group key for {c} is stale")
    grouped = {c for tau in range(1, t + 1) for _, c in state.groups[tau]}
    if grouped != state.C:
        rep.note(f"G violated: grouped centers {sorted(grouped)} != C {state.centers()}")

    # lemma-level clustering and cost bounds
    dist_c = [min(apd[c][v] for c in state.C) for v in range(n)]
    factor = 2.0 ** (2 * eps)
    for v in range(n):
        if not (dist_c[v] <= state.d[v] * slack and state.d[v] <= factor * dist_c[v] * slack):
            rep.note(f"clustering bound violated at v={v}: dist {dist_c[v]}, d {state.d[v]}")
    true_cost = math.fsum(dv ** z for dv in dist_c)
    if not (true_cost <= state.cost_z * slack
            and state.cost_z <= (2.0 ** (2 * eps * z)) * true_cost * slack):
        rep.note(f"cost bound violated: true {true_cost}, estimator {state.cost_z}")
    return rep
