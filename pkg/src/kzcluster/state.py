"""Dynamic clustering state: approximate nearest-center maintenance under swaps.

The state keeps, for every cover index J, a subclustering ``(c_J[v], d_J[v])``
of all vertices against the center subset ``C_J = C ∩ J``, plus everything
derived from it: the merged per-vertex clustering ``(c[v], d[v])``, a binary
sum tree over ``d[v]**z`` whose root is the objective estimator, per-center
deletion estimators (``loss_z``, ``volume``), and a grouping of centers into
``t`` volume bands, each an ordered structure keyed by ``loss_z`` for min
queries.

Maintained invariants (checked from scratch by
:func:`kzcluster.oracle.check_state_consistency`):

  A1  (c_J[c], d_J[c]) = (c, 0) for every c in C_J
  A2  d_J[u] <= relax * (d_J[v] + w(u,v)) on every edge, relax = 2^(eps/beta)
  A3  c_J[v] in C_J and dist(v, c_J[v]) <= d_J[v]   (nonempty C_J)
  A4  (c_J[v], d_J[v]) = (BOT, d_bar) everywhere     (empty C_J)
  B   (c[v], d[v]) minimizes d_J[v] over J, ties prefer non-BOT then lower id
  C/D cost_z = tree root = sum of d[v]**z
  E   loss_z[c] = sum over the c-cluster of (min_{J not owning c} d_J[v]**z - d[v]**z)
  F   volume[c] = sum of deg(v) over entries with c_J[v] = c, over 2m|J|
  G/H c in group tau iff floor(-log2(volume[c]) + 1) = tau; groups ordered by loss

Every single-entry subclustering write triggers an O(log n) synchronization of
all derived content, and every primitive mutation is pushed onto an undo log so
that open transactions can be rolled back byte-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappush, heappop

from sortedcontainers import SortedList

from .cover import IsolationCover, build_cover
from .errors import (
    AlreadyCenter,
    EmptyCenters,
    EpsilonOutOfRange,
    NotACenter,
    TokenOrderViolation,
    WouldEmptyCenters,
    ZeroCost,
)
from .graph import Graph, multi_source_dijkstra
from .sumtree import SumTree

BOT = -1
INF = math.inf


@dataclass(frozen=True)
class StateParams:
    """Numeric knobs shared by a state and the local search driving it."""

    z: float
    eps: float
    beta: int
    w_bar: float        # max edge weight
    d_bar: float        # 2^eps * beta * w_bar, distance cap used for empty indexes
    relax: float        # 2^(eps/beta), the edge relaxation factor
    cover_size: int
    group_count: int    # t = floor(log2(2m|J|)) + 1

    @staticmethod
    def for_graph(g: Graph, cover: IsolationCover, z: float, eps: float,
                  beta: int | None = None) -> "StateParams":
        if z < 1:
            raise ValueError(f"z must be >= 1, got {z}")
        if not (0 < eps <= 1.0 / (10.0 * z)):
            raise EpsilonOutOfRange(f"eps must lie in (0, 1/(10z)] = (0, {1/(10*z)}], got {eps}")
        if beta is None:
            beta = g.n - 1  # any connected graph is (n-1, eps)-hop-bounded
        if beta < 1:
            raise ValueError(f"beta must be >= 1, got {beta}")
        w_bar = g.max_weight
        d_bar = (2.0 ** eps) * beta * w_bar
        relax = math.exp(eps * math.log(2.0) / beta)
        t = (2 * g.m * cover.size).bit_length()  # floor(log2(2m|J|)) + 1
        return StateParams(z=float(z), eps=float(eps), beta=int(beta), w_bar=w_bar,
                           d_bar=d_bar, relax=relax, cover_size=cover.size, group_count=t)


class Token:
    """Opaque LIFO transaction token."""

    __slots__ = ("mark", "serial")

    def __init__(self, mark: int, serial: int):
        self.mark = mark
        self.serial = serial


def _tau_of(num: int, denom: int) -> int:
    """floor(log2(denom/num)) + 1 for integers denom >= num >= 1, exactly."""
    t0 = denom.bit_length() - num.bit_length()
    if not (num << t0) <= denom:
        t0 -= 1
    return t0 + 1


class ClusterState:
    """The full dynamic structure; construct through :func:`initialize`.

    A state is single-owner: drive it from one worker at a time and hand it
    off only at operation boundaries.  Independent replicas (see
    :meth:`clone`) may run on distinct workers.
    """

    def __init__(self, g: Graph, cover: IsolationCover, params: StateParams):
        self.g = g
        self.cover = cover
        self.params = params
        n = g.n
        nj = cover.size
        self.n = n
        self.nj = nj
        self.vol_denom = 2 * g.m * nj

        self.C: set[int] = set()
        self.CJ: list[set[int]] = [set() for _ in range(nj)]
        self.cJ: list[list[int]] = [[BOT] * n for _ in range(nj)]
        self.dJ: list[list[float]] = [[params.d_bar] * n for _ in range(nj)]
        # per-index subcluster member sets, center -> set of vertices
        self._members: list[dict[int, set[int]]] = [{} for _ in range(nj)]

        self.c: list[int] = [BOT] * n
        self.d: list[float] = [params.d_bar] * n
        self.tree = SumTree([0.0] * n)

        # loss accumulators: finite part + count of +inf contributions
        self._loss_sum: list[float] = [0.0] * n
        self._loss_inf: list[int] = [0] * n
        self._term: list[float] = [0.0] * n  # v's contribution to loss[c[v]]
        self.volume_num: list[int] = [0] * n

        t = params.group_count
        self.groups: list[SortedList] = [SortedList() for _ in range(t + 1)]
        self._group_of: list[int] = [0] * n   # 0 = ungrouped
        self._group_key: list[float] = [0.0] * n

        self._undo: list[tuple] = []
        self._tokens: list[Token] = []
        self._serial = 0

        self.entry_mods = 0          # total subclustering entry writes
        self.insert_mods = 0         # entry writes performed by inserts
        self.delete_mods = 0         # entry writes performed by deletes
        self.instrument = False
        self.last_delete_touched: dict[int, dict[str, set[int]]] = {}

    # -- scalar views -------------------------------------------------------

    @property
    def cost_z(self) -> float:
        return self.tree.root

    def loss_z(self, c: int) -> float:
        """Deletion loss estimator; tiny float residue is clamped to zero."""
        raw = INF if self._loss_inf[c] else self._loss_sum[c]
        if abs(raw) < 1e-12 * self.cost_z:
            return 0.0
        return raw

    def volume(self, c: int) -> float:
        return self.volume_num[c] / self.vol_denom

    def centers(self) -> list[int]:
        return sorted(self.C)

    # -- transactions ---------------------------------------------------------

    def transaction(self) -> Token:
        self._serial += 1
        tok = Token(len(self._undo), self._serial)
        self._tokens.append(tok)
        return tok

    def rollback(self, token: Token) -> None:
        if not self._tokens or self._tokens[-1] is not token:
            raise TokenOrderViolation("rollback token is not the innermost open transaction")
        self._tokens.pop()
        undo = self._undo
        while len(undo) > token.mark:
            rec = undo.pop()
            kind = rec[0]
            if kind == "e":
                _, j, v, oc, od = rec
                nc = self.cJ[j][v]
                if nc != oc:
                    if nc >= 0:
                        self._members[j][nc].discard(v)
                    if oc >= 0:
                        self._members[j].setdefault(oc, set()).add(v)
                self.cJ[j][v] = oc
                self.dJ[j][v] = od
            elif kind == "m":
                _, v, oc, od = rec
                self.c[v] = oc
                self.d[v] = od
            elif kind == "leaf":
                _, v, ov = rec
                self.tree.set(v, ov)
            elif kind == "term":
                _, v, ot = rec
                self._term[v] = ot
            elif kind == "loss":
                _, cc, os_, oi = rec
                self._loss_sum[cc] = os_
                self._loss_inf[cc] = oi
            elif kind == "vol":
                _, cc, on = rec
                self.volume_num[cc] = on
            elif kind == "g":
                _, cc, ot, ok = rec
                ct = self._group_of[cc]
                if ct:
                    self.groups[ct].remove((self._group_key[cc], cc))
                if ot:
                    self.groups[ot].add((ok, cc))
                self._group_of[cc] = ot
                self._group_key[cc] = ok
            elif kind == "c+":
                self.C.discard(rec[1])
            elif kind == "c-":
                self.C.add(rec[1])
            elif kind == "cj+":
                self.CJ[rec[1]].discard(rec[2])
            elif kind == "cj-":
                self.CJ[rec[1]].add(rec[2])
            else:  # pragma: no cover
                raise AssertionError(f"unknown undo record {kind}")

    def _maybe_trim_undo(self) -> None:
        if not self._tokens:
            self._undo.clear()

    # -- derived-content synchronization -------------------------------------

    def _merged_min(self, v: int) -> tuple[int, float]:
        """Invariant B minimizer: value, then non-BOT, then smaller center id."""
        n = self.n
        best_c = BOT
        best = (INF, 2, n + 1)
        for j in range(self.nj):
            dv = self.dJ[j][v]
            cv = self.cJ[j][v]
            key = (dv, 0, cv) if cv >= 0 else (dv, 1, n)
            if key < best:
                best = key
                best_c = cv
        return best_c, best[0]

    def _excluded_min_pow(self, v: int, c: int) -> float:
        """min over indexes J not containing c of d_J[v], raised to z."""
        contains = self.cover._contains
        dj = self.dJ
        best = INF
        for j in range(self.nj):
            if contains[j][c]:
                continue
            dv = dj[j][v]
            if dv < best:
                best = dv
        return best ** self.params.z

    def _loss_add(self, c: int, term: float) -> None:
        self._undo.append(("loss", c, self._loss_sum[c], self._loss_inf[c]))
        if term == INF:
            self._loss_inf[c] += 1
        else:
            self._loss_sum[c] += term

    def _loss_sub(self, c: int, term: float) -> None:
        self._undo.append(("loss", c, self._loss_sum[c], self._loss_inf[c]))
        if term == INF:
            self._loss_inf[c] -= 1
        else:
            self._loss_sum[c] -= term

    def _raw_loss(self, c: int) -> float:
        return INF if self._loss_inf[c] else self._loss_sum[c]

    def _regroup(self, c: int) -> None:
        """Re-slot center c into its volume band keyed by current loss."""
        if c in self.C and self.volume_num[c] > 0:
            new_tau = _tau_of(self.volume_num[c], self.vol_denom)
            new_key = self._raw_loss(c)
        else:
            new_tau = 0
            new_key = 0.0
        old_tau = self._group_of[c]
        old_key = self._group_key[c]
        if new_tau == old_tau and (new_tau == 0 or new_key == old_key):
            return
        self._undo.append(("g", c, old_tau, old_key))
        if old_tau:
            self.groups[old_tau].remove((old_key, c))
        if new_tau:
            self.groups[new_tau].add((new_key, c))
        self._group_of[c] = new_tau
        self._group_key[c] = new_key

    def _write_entry(self, j: int, v: int, new_c: int, new_d: float) -> None:
        """Single subclustering entry write plus full O(log n) synchronization."""
        old_c = self.cJ[j][v]
        old_d = self.dJ[j][v]
        if old_c == new_c and old_d == new_d:
            return
        self.entry_mods += 1
        self._undo.append(("e", j, v, old_c, old_d))
        self.cJ[j][v] = new_c
        self.dJ[j][v] = new_d
        if old_c != new_c:
            if old_c >= 0:
                self._members[j][old_c].discard(v)
            if new_c >= 0:
                self._members[j].setdefault(new_c, set()).add(v)

        affected: list[int] = []
        deg = self.g.degree[v]
        if old_c != new_c:
            if old_c >= 0:
                self._undo.append(("vol", old_c, self.volume_num[old_c]))
                self.volume_num[old_c] -= deg
                affected.append(old_c)
            if new_c >= 0:
                self._undo.append(("vol", new_c, self.volume_num[new_c]))
                self.volume_num[new_c] += deg
                affected.append(new_c)

        # merged clustering at v
        old_cv = self.c[v]
        old_dv = self.d[v]
        new_cv, new_dv = self._merged_min(v)
        if new_cv != old_cv or new_dv != old_dv:
            self._undo.append(("m", v, old_cv, old_dv))
            self.c[v] = new_cv
            self.d[v] = new_dv

        # sum-tree leaf
        if new_dv != old_dv:
            old_leaf = self.tree.get(v)
            self._undo.append(("leaf", v, old_leaf))
            self.tree.set(v, new_dv ** self.params.z)
        leaf_v = self.tree.get(v)

        # deletion loss estimator at old and new owning centers
        old_term = self._term[v]
        new_term = (self._excluded_min_pow(v, new_cv) - leaf_v) if new_cv >= 0 else 0.0
        if new_cv != old_cv or new_term != old_term:
            if old_cv >= 0:
                self._loss_sub(old_cv, old_term)
                affected.append(old_cv)
            if new_cv >= 0:
                self._loss_add(new_cv, new_term)
                affected.append(new_cv)
            self._undo.append(("term", v, old_term))
            self._term[v] = new_term

        seen: set[int] = set()
        for cc in affected:
            if cc not in seen:
                seen.add(cc)
                self._regroup(cc)

    def _reset_loss_acc(self, c: int) -> None:
        """Clear the float residue in a (non-)center's loss accumulator."""
        if self._loss_sum[c] != 0.0 or self._loss_inf[c] != 0:
            self._undo.append(("loss", c, self._loss_sum[c], self._loss_inf[c]))
            self._loss_sum[c] = 0.0
            self._loss_inf[c] = 0

    # -- operations -----------------------------------------------------------

    def insert(self, c_ins: int) -> None:
        for _ in self.insert_steps(c_ins):
            pass
        self._maybe_trim_undo()

    def insert_steps(self, c_ins: int):
        """Generator form of insert; yields once per entry modification.

        Depth-first propagation per cover index containing c_ins: set the new
        center's own entry to (c_ins, 0), then recursively pull in every
        neighbor u whose entry violates d_J[u] <= relax * (d_J[v] + w(u,v)).
        """
        if c_ins in self.C:
            raise AlreadyCenter(f"vertex {c_ins} is already a center")
        self._reset_loss_acc(c_ins)
        mods_at_entry = self.entry_mods
        relax = self.params.relax
        adjacency = self.g.adjacency
        for j in self.cover.membership(c_ins):
            dj = self.dJ[j]
            self._write_entry(j, c_ins, c_ins, 0.0)
            yield
            # explicit-stack depth-first recursion, neighbors in adjacency order
            frames: list[tuple[int, int]] = [(c_ins, 0)]
            while frames:
                v, i = frames.pop()
                nbrs = adjacency[v]
                while i < len(nbrs):
                    u, w = nbrs[i]
                    i += 1
                    if dj[u] > relax * (dj[v] + w):
                        self._write_entry(j, u, c_ins, dj[v] + w)
                        yield
                        frames.append((v, i))
                        frames.append((u, 0))
                        break
            self._undo.append(("cj+", j, c_ins))
            self.CJ[j].add(c_ins)
        self._undo.append(("c+", c_ins))
        self.C.add(c_ins)
        self._regroup(c_ins)
        self.insert_mods += self.entry_mods - mods_at_entry

    def delete(self, c_del: int) -> None:
        """Remove a center; per index, reassign its subcluster via adapted Dijkstra.

        For each index J owning c_del, the subcluster U_J is erased to
        (BOT, +inf); a priority queue over U_J and its outer boundary then
        settles vertices in d_J order, writing relax * (d_J[v*] + w) distances.
        If C_J == {c_del}, the whole index resets to (BOT, d_bar) instead.
        """
        if c_del not in self.C:
            raise NotACenter(f"vertex {c_del} is not a center")
        if len(self.C) == 1:
            raise WouldEmptyCenters("cannot delete the last center")
        mods_at_entry = self.entry_mods
        relax = self.params.relax
        adjacency = self.g.adjacency
        if self.instrument:
            self.last_delete_touched = {}
        for j in self.cover.membership(c_del):
            dj = self.dJ[j]
            cj = self.cJ[j]
            members = sorted(self._members[j].get(c_del, ()))
            touched: set[int] | None = set(members) if self.instrument else None
            if len(self.CJ[j]) == 1:
                # c_del was the only center of this index: reset wholesale
                for v in range(self.n):
                    self._write_entry(j, v, BOT, self.params.d_bar)
                if self.instrument:
                    touched = set(range(self.n))
                    self.last_delete_touched[j] = {
                        "touched": touched, "subcluster": set(range(self.n)),
                        "boundary": set()}
            else:
                in_u = set(members)
                for v in members:
                    self._write_entry(j, v, BOT, INF)
                boundary: set[int] = set()
                for v in members:
                    for u, _ in adjacency[v]:
                        if u not in in_u:
                            boundary.add(u)
                heap: list[tuple[float, int, int]] = []
                for v in in_u | boundary:
                    heappush(heap, (dj[v], 1 if cj[v] < 0 else 0, v))
                popped: set[int] = set()
                while heap:
                    dv, bot, v = heappop(heap)
                    if v in popped or dv != dj[v] or bot != (1 if cj[v] < 0 else 0):
                        continue
                    popped.add(v)
                    if touched is not None:
                        touched.add(v)
                    for u, w in adjacency[v]:
                        if u in in_u and dj[u] > relax * (dj[v] + w):
                            if touched is not None:
                                touched.add(u)
                            self._write_entry(j, u, cj[v], relax * (dj[v] + w))
                            heappush(heap, (dj[u], 0, u))
                if self.instrument:
                    self.last_delete_touched[j] = {
                        "touched": touched, "subcluster": in_u, "boundary": boundary}
            self._undo.append(("cj-", j, c_del))
            self.CJ[j].discard(c_del)
        self._undo.append(("c-", c_del))
        self.C.discard(c_del)
        self._reset_loss_acc(c_del)
        self._regroup(c_del)
        self.delete_mods += self.entry_mods - mods_at_entry
        self._maybe_trim_undo()

    def sample_noncenter(self, rng) -> int:
        """Sample a vertex with probability d[v]**z / cost_z (never a center)."""
        if self.cost_z <= 0.0:
            raise ZeroCost("cannot sample from a zero-cost state")
        return self.tree.sample(rng)

    def group_min_loss(self, tau: int, exclude: int | None = None):
        """Min-loss center of group tau, skipping `exclude`; None if exhausted."""
        group = self.groups[tau]
        if not group:
            return None
        key, c = group[0]
        if c != exclude:
            return c, key
        if len(group) > 1:
            key, c = group[1]
            return c, key
        return None

    # -- replication / inspection ---------------------------------------------

    def clone(self) -> "ClusterState":
        """Deep copy sharing the immutable graph and cover."""
        other = ClusterState.__new__(ClusterState)
        other.g = self.g
        other.cover = self.cover
        other.params = self.params
        other.n = self.n
        other.nj = self.nj
        other.vol_denom = self.vol_denom
        other.C = set(self.C)
        other.CJ = [set(s) for s in self.CJ]
        other.cJ = [list(row) for row in self.cJ]
        other.dJ = [list(row) for row in self.dJ]
        other._members = [{c: set(s) for c, s in mj.items()} for mj in self._members]
        other.c = list(self.c)
        other.d = list(self.d)
        other.tree = self.tree.clone()
        other._loss_sum = list(self._loss_sum)
        other._loss_inf = list(self._loss_inf)
        other._term = list(self._term)
        other.volume_num = list(self.volume_num)
        other.groups = [SortedList(g) for g in self.groups]
        other._group_of = list(self._group_of)
        other._group_key = list(self._group_key)
        other._undo = []
        other._tokens = []
        other._serial = 0
        other.entry_mods = self.entry_mods
        other.insert_mods = self.insert_mods
        other.delete_mods = self.delete_mods
        other.instrument = False
        other.last_delete_touched = {}
        return other

    def dump(self) -> dict:
        """Canonical JSON-able snapshot of every maintained field."""
        return {
            "C": self.centers(),
            "CJ": [sorted(s) for s in self.CJ],
            "cJ": [list(row) for row in self.cJ],
            "dJ": [list(row) for row in self.dJ],
            "c": list(self.c),
            "d": list(self.d),
            "cost_z": self.cost_z,
            "loss_z": {str(c): self._raw_loss(c) for c in self.centers()},
            "volume_num": {str(c): self.volume_num[c] for c in self.centers()},
            "volume_denom": self.vol_denom,
            "groups": {
                str(tau): [[key, c] for key, c in self.groups[tau]]
                for tau in range(1, self.params.group_count + 1)
            },
        }


def initialize(g: Graph, cover: IsolationCover, params: StateParams,
               c_init) -> ClusterState:
    """Build a state for the given center set with exact per-index Dijkstra runs.

    Nonempty center subsets get exact nearest centers and distances (so the
    objective estimator equals the true objective); empty subsets are set to
    (BOT, d_bar).  All derived content is built in bulk.
    """
    centers = sorted(set(c_init))
    if not centers:
        raise EmptyCenters("initialize requires a nonempty center set")
    state = ClusterState(g, cover, params)
    state.C = set(centers)
    n = g.n
    z = params.z
    for j in range(cover.size):
        cj_centers = sorted(c for c in centers if cover.contains(j, c))
        state.CJ[j] = set(cj_centers)
        if cj_centers:
            run = multi_source_dijkstra(g, [(c, 0.0) for c in cj_centers])
            state.cJ[j] = list(run.label)
            state.dJ[j] = list(run.distance)
        else:
            state.cJ[j] = [BOT] * n
            state.dJ[j] = [params.d_bar] * n
        mj: dict[int, set[int]] = {}
        for v in range(n):
            cv = state.cJ[j][v]
            if cv >= 0:
                mj.setdefault(cv, set()).add(v)
        state._members[j] = mj

    for v in range(n):
        cv, dv = state._merged_min(v)
        state.c[v] = cv
        state.d[v] = dv
    state.tree = SumTree([state.d[v] ** z for v in range(n)])

    for v in range(n):
        term = state._excluded_min_pow(v, state.c[v]) - state.tree.get(v)
        state._term[v] = term
        state._loss_sum[state.c[v]] += term
    deg = g.degree
    for j in range(cover.size):
        for c, mem in state._members[j].items():
            for v in mem:
                state.volume_num[c] += deg[v]
    for c in centers:
        state._regroup(c)
    state._undo.clear()
    return state


def make_state(g: Graph, k_centers, z: float, eps: float,
               beta: int | None = None) -> ClusterState:
    """Convenience wrapper: build cover + params + initialize in one call."""
    cover = build_cover(g.n)
    params = StateParams.for_graph(g, cover, z, eps, beta)
    return initialize(g, cover, params, k_centers)
