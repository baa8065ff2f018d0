"""1-swap local search with scored swap selection.

Each iteration samples ``s`` candidate noncenters proportionally to their
``d[v]**z`` mass and probes each one: insert it into a scratch replica, then
scan the volume bands for a deletable center whose predicted post-swap cost
clears the acceptance threshold

    (cost_z' + loss_z'[c_del]) / cost_z  <=  1 - (eps/2) * volume'[c_del].

The first probe to find such a pair (in schedule order) wins; its swap is
committed to the base state and replayed onto every replica.  A round with
all-failing probes terminates the search.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cover import build_cover
from .errors import AlreadyCenter, EpsilonOutOfRange, IterationCapExceeded
from .graph import Graph
from .oracle import check_state_consistency, exact_cost, potential
from .preprocess import coarse_solution
from .state import ClusterState, StateParams, initialize


# ---------------------------------------------------------------------------
# approximation ratio


def alpha_z(z: float, eps: float) -> float:
    """Target approximation ratio of the local search.

    Closed form for z = 1; otherwise a golden-section minimization over the
    feasible ray of the ratio formula (relative tolerance 1e-9).
    """
    if not (0.0 <= eps <= 1.0 / (10.0 * z)):
        raise EpsilonOutOfRange(f"eps must lie in [0, 1/(10z)] = [0, {1/(10*z)}], got {eps}")
    if z == 1.0:
        num = 2.0 ** (2.0 + 2.0 * eps) + 2.0 ** (1.0 + 4.0 * eps)
        den = 3.0 - eps - 2.0 ** (1.0 + 2.0 * eps) * (1.0 + eps)
        return num / den

    a_coef = 2.0 ** (1.0 + z + 2.0 * eps * z)
    b_coef = 2.0 ** ((1.0 + 4.0 * eps) * z)
    c_coef = 2.0 ** (1.0 + 2.0 * eps * z)
    heart = (3.0 - eps) / c_coef - eps
    lam_min = 1.0 / (heart ** (1.0 / (z - 1.0)) - 1.0)

    def f(lam: float) -> float:
        den = 3.0 - eps - c_coef * ((1.0 + 1.0 / lam) ** (z - 1.0) + eps)
        if den <= 0.0:
            return math.inf
        return (a_coef * (1.0 + lam) ** (z - 1.0) + b_coef) / den

    # geometric scan for a bracket around the minimum
    grid = [lam_min + (lam_min + 1.0) * 1e-9 * 1.6 ** i for i in range(140)]
    vals = [f(x) for x in grid]
    i = min(range(len(grid)), key=vals.__getitem__)
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > 1e-9 * (abs(a) + abs(b)):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return min(f1, f2)


def compute_s(eps: float, z: float, n: int, m: int, cover_size: int,
              safety_exponent: float = 2.0) -> int:
    """Smallest probe count making (iteration bound) * (1 - eps^4z)^s <= n^-c0.

    s = ceil(eps^-4z * (ln(8 z eps^-1 m |J| ln n) + c0 * ln n)).
    """
    ell_bar = 8.0 * z / eps * m * cover_size * math.log(n)
    s = math.ceil(eps ** (-4.0 * z) * (math.log(ell_bar) + safety_exponent * math.log(n)))
    return max(1, s)


def iteration_bound(params: StateParams, m: int, n: int) -> int:
    """Cap on positive iterations: ceil(8 z eps^-1 m |J| ln n)."""
    return math.ceil(8.0 * params.z / params.eps * m * params.cover_size * math.log(n))


def volume_bound(params: StateParams, n: int) -> float:
    """Cap on the summed deleted volume: 4 z eps^-1 ln n."""
    return 4.0 * params.z / params.eps * math.log(n)


# ---------------------------------------------------------------------------
# probing


@dataclass(frozen=True)
class SwapCandidate:
    c_ins: int
    c_del: int
    predicted_ratio: float
    predicted_volume: float


def test_effectiveness_steps(base_cost: float, probe: ClusterState, c_ins: int):
    """Resumable probe: yields once per entry modification or group test.

    Opens a transaction, inserts c_ins, then scans groups tau = 1..t for the
    cheapest deletable center; returns a SwapCandidate on the first group
    whose minimizer clears the threshold, or None if every group fails.
    The probe is rolled back to its entry state on every exit path.
    """
    if c_ins in probe.C:
        raise AlreadyCenter(f"probe candidate {c_ins} is already a center")
    eps = probe.params.eps
    token = probe.transaction()
    try:
        for _ in probe.insert_steps(c_ins):
            yield
        for tau in range(1, probe.params.group_count + 1):
            got = probe.group_min_loss(tau, exclude=c_ins)
            if got is not None:
                c_del, _ = got
                loss = probe.loss_z(c_del)
                vol = probe.volume(c_del)
                ratio = (probe.cost_z + loss) / base_cost
                if ratio <= 1.0 - (eps / 2.0) * vol:
                    return SwapCandidate(c_ins, c_del, ratio, vol)
            yield
        return None
    finally:
        probe.rollback(token)


def test_effectiveness(base_cost: float, probe: ClusterState, c_ins: int):
    """Run a probe to completion; SwapCandidate on success, None on failure."""
    gen = test_effectiveness_steps(base_cost, probe, c_ins)
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


# ---------------------------------------------------------------------------
# the driver


@dataclass
class RunStats:
    positive_iterations: int = 0
    volume_sum: float = 0.0
    cost_trajectory: list[float] = field(default_factory=list)
    samples_drawn: int = 0
    probes_run: int = 0
    wall_clock: float = 0.0
    entry_mods: int = 0
    insert_reassignments: int = 0
    delete_reassignments: int = 0
    swaps: list[tuple[float, float, float]] = field(default_factory=list)  # (pre, post, vol')
    iteration_cap: int = 0
    volume_cap: float = 0.0
    potential_initial: float = 0.0
    potential_final: float = 0.0
    spanner_events: list[str] = field(default_factory=list)
    audit_violations: list[str] = field(default_factory=list)


@dataclass
class Solution:
    centers: list[int]
    assignment: list[int]
    exact_cost: float
    estimated_cost: float
    alpha_target: float


def run_local_search(g: Graph, k: int, params: StateParams, s: int,
                     scheduler: str = "sequential", rng=None,
                     max_iters: int | None = None,
                     replication: str = "auto",
                     audit: bool = False,
                     on_iteration=None) -> tuple[Solution, RunStats]:
    """Full pipeline from a coarse initial solution to a terminal center set.

    scheduler: "sequential" runs probes to completion in sample order;
    "round_robin" advances all probes one step at a time, the winner being the
    first to return a pair in schedule order (ties to the smaller index).
    replication: "copies" keeps s full replicas synchronized by replaying each
    committed swap (faithful but memory-heavy); "shared" drives one scratch
    replica through transactions (sequential only); "auto" picks per scheduler.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if scheduler not in ("sequential", "round_robin"):
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if replication == "auto":
        replication = "shared" if scheduler == "sequential" else "copies"
    if replication == "shared" and scheduler != "sequential":
        raise ValueError("shared replication requires the sequential scheduler")

    t0 = time.perf_counter()
    cover = build_cover(g.n)
    assert cover.size == params.cover_size, "params built for a different cover"
    c_init = coarse_solution(g, k)
    base = initialize(g, cover, params, c_init)
    if max_iters is None:
        max_iters = iteration_bound(params, g.m, g.n)

    n_probes = s if replication == "copies" else 1
    probes = [base.clone() for _ in range(n_probes)]

    stats = RunStats()
    stats.iteration_cap = max_iters
    stats.volume_cap = volume_bound(params, g.n)
    stats.potential_initial = potential(base)[0]
    stats.cost_trajectory.append(base.cost_z)
    if audit:
        stats.audit_violations.extend(check_state_consistency(g, base).violations)

    while True:
        if base.cost_z == 0.0:
            break
        cands = [base.sample_noncenter(rng) for _ in range(s)]
        stats.samples_drawn += s
        winner: SwapCandidate | None = None

        if scheduler == "sequential":
            for sigma in range(s):
                probe = probes[sigma] if replication == "copies" else probes[0]
                got = test_effectiveness(base.cost_z, probe, cands[sigma])
                stats.probes_run += 1
                if got is not None:
                    winner = got
                    break
        else:
            gens = [test_effectiveness_steps(base.cost_z, probes[sigma], cands[sigma])
                    for sigma in range(s)]
            active = list(range(s))
            while active:
                still = []
                for sigma in active:
                    try:
                        next(gens[sigma])
                        still.append(sigma)
                    except StopIteration as stop:
                        if stop.value is not None:
                            winner = stop.value
                            break
                if winner is not None:
                    for gen in gens:
                        gen.close()  # rolls back any still-open probe
                    break
                active = still
            stats.probes_run += s

        if winner is None:
            break

        stats.positive_iterations += 1
        if stats.positive_iterations > max_iters:
            raise IterationCapExceeded(
                f"positive iterations exceeded the bound {max_iters}; "
                "this indicates an implementation bug")
        pre = base.cost_z
        base.insert(winner.c_ins)
        vol = base.volume(winner.c_del)
        base.delete(winner.c_del)
        stats.volume_sum += vol
        stats.swaps.append((pre, base.cost_z, vol))
        stats.cost_trajectory.append(base.cost_z)
        if audit:
            stats.audit_violations.extend(check_state_consistency(g, base).violations)
        for probe in probes:
            probe.insert(winner.c_ins)
            probe.delete(winner.c_del)
        if on_iteration is not None:
            on_iteration(base, probes)

    stats.potential_final = potential(base)[0]
    stats.entry_mods = base.entry_mods
    stats.insert_reassignments = base.insert_mods
    stats.delete_reassignments = base.delete_mods
    stats.wall_clock = time.perf_counter() - t0
    centers = base.centers()
    sol = Solution(
        centers=centers,
        assignment=list(base.c),
        exact_cost=exact_cost(g, centers, params.z),
        estimated_cost=base.cost_z,
        alpha_target=alpha_z(params.z, params.eps),
    )
    return sol, stats
