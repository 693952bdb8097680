"""Rounding schemes and the pivot algorithms that consume them.

A scheme is a named triple of piecewise functions (f_plus, f_minus,
f_neutral) mapping an LP edge length in [0, 1] to a cut probability.
The randomized pivot algorithm repeatedly picks a uniform pivot among
active vertices and keeps each active u with probability 1 - p_uw; the
weighted variant first flips one coin per pair to choose which function
supplies p_uv; the derandomized variant rounds every p_uv to 0/1
greedily against the step surplus and then picks the best pivot, which
turns the expected guarantee into a deterministic one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .instance import COMPLETE, KPARTITE, WEIGHTED, Clustering, Instance
from .lp import LpSolution, lp_objective
from .rng import SplitMix64

EDGE_PLUS = "+"
EDGE_MINUS = "-"
EDGE_NEUTRAL = "0"


class IneligibleSchemeError(ValueError):
    """Scheme lacks the shape a routine requires (e.g. no f_neutral)."""


# ---------------------------------------------------------------------------
# piecewise functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    """One piece of a piecewise function on [lo, hi].

    kind:
      * "constant": params = (value,)
      * "linear":   params = (intercept, slope)
      * "power":    params = (anchor, scale, exponent) -> ((x-anchor)/scale)**e

    closed_left says whether the piece owns its left endpoint; interior
    breakpoints belong to exactly one side, which matters at jumps.
    """

    lo: float
    hi: float
    kind: str
    params: tuple
    closed_left: bool = True

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            return np.full_like(x, self.params[0])
        if self.kind == "linear":
            b, a = self.params
            return b + a * x
        if self.kind == "power":
            anchor, scale, expo = self.params
            base = np.clip((x - anchor) / scale, 0.0, None)
            return base**expo
        raise ValueError(f"unknown piece kind {self.kind!r}")


class PiecewiseFn:
    """Piecewise function on [0, 1], vectorized, with owned breakpoints."""

    def __init__(self, pieces: list[Piece]):
        if not pieces:
            raise ValueError("need at least one piece")
        if abs(pieces[0].lo) > 1e-12 or abs(pieces[-1].hi - 1.0) > 1e-12:
            raise ValueError("pieces must cover [0, 1]")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise ValueError("pieces must tile [0, 1] without gaps")
        self.pieces = pieces

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        done = np.zeros(x.shape, dtype=bool)
        for i, p in enumerate(self.pieces):
            left_ok = x >= p.lo if p.closed_left else x > p.lo
            last = i == len(self.pieces) - 1
            next_owns_boundary = (not last) and self.pieces[i + 1].closed_left
            right_ok = x < p.hi if next_owns_boundary else x <= p.hi
            mask = left_ok & right_ok & ~done
            if mask.any():
                out[mask] = p(x[mask])
                done |= mask
        if not done.all():
            raise ValueError("argument outside [0, 1]")
        return float(out[0]) if scalar else out

    def breakpoints(self) -> list[float]:
        pts = [self.pieces[0].lo] + [p.hi for p in self.pieces]
        return sorted(set(pts))

    def interior_breakpoints(self) -> list[float]:
        return [b for b in self.breakpoints() if 1e-12 < b < 1 - 1e-12]

    def to_json_obj(self):
        return [
            {"from": p.lo, "to": p.hi, "kind": p.kind, "params": list(p.params),
             "closed_left": p.closed_left}
            for p in self.pieces
        ]

    @staticmethod
    def from_json_obj(obj) -> "PiecewiseFn":
        pieces = []
        for e in obj:
            kind = e["kind"]
            params = tuple(e.get("params", ()))
            if kind == "quadratic":  # ((x-anchor)/scale)^2 shorthand
                kind, params = "power", (params[0], params[1], 2.0)
            elif kind == "sqrt":
                kind, params = "power", (0.0, 1.0, 0.5)
            pieces.append(
                Piece(float(e["from"]), float(e["to"]), kind, params,
                      bool(e.get("closed_left", True)))
            )
        return PiecewiseFn(pieces)


def identity_fn() -> PiecewiseFn:
    return PiecewiseFn([Piece(0.0, 1.0, "linear", (0.0, 1.0))])


def sqrt_fn() -> PiecewiseFn:
    return PiecewiseFn([Piece(0.0, 1.0, "power", (0.0, 1.0, 0.5))])


def step_fn(threshold: float) -> PiecewiseFn:
    """0 below threshold, 1 from threshold on (threshold owned by the 1-piece)."""
    return PiecewiseFn(
        [
            Piece(0.0, threshold, "constant", (0.0,)),
            Piece(threshold, 1.0, "constant", (1.0,), closed_left=True),
        ]
    )


@dataclass
class RoundingScheme:
    """Named (f_plus, f_minus, f_neutral) triple; f_neutral may be absent."""

    name: str
    f_plus: PiecewiseFn
    f_minus: PiecewiseFn
    f_neutral: PiecewiseFn | None = None

    def fn(self, edge_type: str) -> PiecewiseFn:
        if edge_type == EDGE_PLUS:
            return self.f_plus
        if edge_type == EDGE_MINUS:
            return self.f_minus
        if edge_type == EDGE_NEUTRAL:
            if self.f_neutral is None:
                raise IneligibleSchemeError(
                    f"scheme {self.name!r} has no neutral-edge function"
                )
            return self.f_neutral
        raise ValueError(f"unknown edge type {edge_type!r}")

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "f_plus": self.f_plus.to_json_obj(),
            "f_minus": self.f_minus.to_json_obj(),
            "f_neutral": self.f_neutral.to_json_obj() if self.f_neutral else None,
        }
        return json.dumps(doc, indent=1)

    @staticmethod
    def from_json(text: str) -> "RoundingScheme":
        doc = json.loads(text)
        return RoundingScheme(
            name=doc["name"],
            f_plus=PiecewiseFn.from_json_obj(doc["f_plus"]),
            f_minus=PiecewiseFn.from_json_obj(doc["f_minus"]),
            f_neutral=(
                PiecewiseFn.from_json_obj(doc["f_neutral"])
                if doc.get("f_neutral")
                else None
            ),
        )


def eval_scheme(scheme: RoundingScheme, edge_type: str, x: float):
    """Cut probability for an edge of the given type at LP length x."""
    xv = np.asarray(x, dtype=np.float64)
    if np.any(xv < -1e-12) or np.any(xv > 1 + 1e-12):
        raise ValueError("length outside [0, 1]")
    return scheme.fn(edge_type)(np.clip(xv, 0.0, 1.0))


# -- shipped schemes --------------------------------------------------------

_A206, _B206 = 0.19, 0.5095
# cap point of min(c*x^2, 1) for c = 4 - 2*sqrt(2)
_C150 = 4.0 - 2.0 * math.sqrt(2.0)
_X150 = 1.0 / math.sqrt(_C150)


def _scheme_acn_linear() -> RoundingScheme:
    return RoundingScheme("acn_linear", identity_fn(), identity_fn())


def _scheme_complete206() -> RoundingScheme:
    f_plus = PiecewiseFn(
        [
            Piece(0.0, _A206, "constant", (0.0,)),
            Piece(_A206, _B206, "power", (_A206, _B206 - _A206, 2.0)),
            Piece(_B206, 1.0, "constant", (1.0,), closed_left=False),
        ]
    )
    return RoundingScheme("complete206", f_plus, identity_fn())


def _scheme_kpartite3() -> RoundingScheme:
    f_neutral = PiecewiseFn(
        [
            Piece(0.0, 2.0 / 3.0, "linear", (0.0, 1.5)),
            Piece(2.0 / 3.0, 1.0, "constant", (1.0,), closed_left=False),
        ]
    )
    return RoundingScheme("kpartite3", step_fn(1.0 / 3.0), identity_fn(), f_neutral)


def _scheme_weighted_ti_150() -> RoundingScheme:
    f_plus = PiecewiseFn(
        [
            Piece(0.0, _X150, "power", (0.0, _X150, 2.0)),
            Piece(_X150, 1.0, "constant", (1.0,), closed_left=False),
        ]
    )
    return RoundingScheme("weighted_ti_150", f_plus, sqrt_fn())


def _scheme_weighted_ti_153() -> RoundingScheme:
    f_plus = PiecewiseFn([Piece(0.0, 1.0, "power", (0.0, 1.0, 2.0))])
    return RoundingScheme("weighted_ti_153", f_plus, sqrt_fn())


SCHEMES = {
    s.name: s
    for s in (
        _scheme_acn_linear(),
        _scheme_complete206(),
        _scheme_kpartite3(),
        _scheme_weighted_ti_150(),
        _scheme_weighted_ti_153(),
    )
}


def get_scheme(name: str) -> RoundingScheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise KeyError(
            f"unknown scheme {name!r}; known: {sorted(SCHEMES)}"
        ) from None


# ---------------------------------------------------------------------------
# probability matrices
# ---------------------------------------------------------------------------


def probability_matrix(inst: Instance, x: LpSolution, scheme: RoundingScheme) -> np.ndarray:
    """p_uv for every pair of a labeled instance; zero diagonal."""
    if inst.kind == WEIGHTED:
        raise ValueError("weighted instances sample per-pair coins; see pivot_round_weighted")
    if inst.kind == KPARTITE and scheme.f_neutral is None:
        raise IneligibleSchemeError(
            f"scheme {scheme.name!r} has no neutral-edge function for k-partite input"
        )
    n = inst.n
    xm = np.clip(x.matrix, 0.0, 1.0)
    p = np.zeros((n, n))
    for sym, mat in ((1, scheme.f_plus), (-1, scheme.f_minus)):
        mask = inst.labels == sym
        if mask.any():
            p[mask] = mat(xm[mask])
    if inst.kind == KPARTITE:
        mask = (inst.labels == 0) & ~np.eye(n, dtype=bool)
        if mask.any():
            p[mask] = scheme.f_neutral(xm[mask])
    np.fill_diagonal(p, 0.0)
    return p


def weighted_probability_matrix(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, rng: SplitMix64
) -> np.ndarray:
    """Coin-flip matrix: p_uv = f_plus(x_uv) w.p. lam_plus, else f_minus(x_uv).

    One coin per pair, drawn before any pivoting, in ascending pair order.
    """
    if inst.kind != WEIGHTED:
        raise ValueError("only weighted instances flip label coins")
    n = inst.n
    xm = np.clip(x.matrix, 0.0, 1.0)
    p = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            f = scheme.f_plus if rng.uniform() < inst.lam_plus[u, v] else scheme.f_minus
            p[u, v] = p[v, u] = float(f(xm[u, v]))
    return p


# ---------------------------------------------------------------------------
# randomized pivot rounding
# ---------------------------------------------------------------------------


@dataclass
class PivotTrace:
    steps: list = field(default_factory=list)  # (pivot, sorted cluster members)

    def check(self, n: int) -> None:
        seen: set[int] = set()
        for pivot, members in self.steps:
            ms = set(members)
            if pivot not in ms:
                raise AssertionError("pivot left its own cluster")
            if ms & seen:
                raise AssertionError("clusters overlap")
            seen |= ms
        if seen != set(range(n)):
            raise AssertionError("clusters do not cover the vertex set")


def _pivot_loop(p: np.ndarray, rng: SplitMix64) -> tuple[Clustering, PivotTrace]:
    n = p.shape[0]
    active = list(range(n))
    assignment = np.full(n, -1, dtype=np.int64)
    trace = PivotTrace()
    cid = 0
    while active:
        w = active[rng.randint(len(active))]
        cluster = []
        survivors = []
        for u in active:  # ascending id: one coin per active vertex
            if rng.uniform() < 1.0 - p[u, w]:
                cluster.append(u)
            else:
                survivors.append(u)
        assignment[cluster] = cid
        trace.steps.append((w, cluster))
        active = survivors
        cid += 1
    return Clustering(assignment), trace


def pivot_round(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, seed: int
) -> tuple[Clustering, PivotTrace]:
    """One run of the randomized pivot algorithm on a labeled instance."""
    p = probability_matrix(inst, x, scheme)
    return _pivot_loop(p, SplitMix64(seed))


def pivot_round_weighted(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, seed: int
) -> Clustering:
    """Coin-flip variant for weighted instances (one label coin per pair)."""
    rng = SplitMix64(seed)
    p = weighted_probability_matrix(inst, x, scheme, rng)
    clustering, _trace = _pivot_loop(p, rng)
    return clustering


def round_instance(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, seed: int
) -> Clustering:
    """Dispatch on instance class: labeled pivot or weighted coin-flip."""
    if inst.kind == WEIGHTED:
        return pivot_round_weighted(inst, x, scheme, seed)
    return pivot_round(inst, x, scheme, seed)[0]


# ---------------------------------------------------------------------------
# step surplus machinery (shared by derandomization and the exact checks)
# ---------------------------------------------------------------------------


def pair_model(inst: Instance, x: LpSolution):
    """(W+, W-, L) with self-loops where the class calls for them.

    W+/W- are per-pair positive/negative mass, L the per-pair objective
    cost of removal (W+ x + W- (1-x)). Complete-type classes get a unit
    positive self-loop on the diagonal of W+ (its L entry is 0), which
    the step-surplus sums rely on; the k-partite diagonal stays neutral.
    """
    wp, wm = inst.pair_weights()
    xm = np.clip(x.matrix, 0.0, 1.0)
    L = wp * xm + wm * (1.0 - xm)
    np.fill_diagonal(L, 0.0)
    if inst.kind in (COMPLETE, WEIGHTED):
        wp = wp.copy()
        np.fill_diagonal(wp, 1.0)
    return wp, wm, L


def _pivot_surplus(wp, wm, L, p, alpha: float, w: int, active: np.ndarray):
    """alpha * sum e.lp_w - sum e.cost_w over ordered active pairs (diag included)."""
    pw = p[active, w]
    q = 1.0 - pw
    WP = wp[np.ix_(active, active)]
    WM = wm[np.ix_(active, active)]
    LL = L[np.ix_(active, active)]
    cost = 2.0 * (pw @ WP @ q) + q @ WM @ q
    lp = LL.sum() - pw @ LL @ pw
    return alpha * lp - cost


def step_surplus_sum(inst: Instance, x: LpSolution, p: np.ndarray, alpha: float,
                     active=None) -> float:
    """Sum over active pivots of the per-pivot surplus (ordered-pair form).

    This is the quantity the greedy 0/1 rounding must never decrease:
    nonnegative at the scheme's probabilities whenever the scheme/alpha
    pair is certified for the class.
    """
    wp, wm, L = pair_model(inst, x)
    act = np.arange(inst.n) if active is None else np.asarray(sorted(active))
    return float(sum(_pivot_surplus(wp, wm, L, p, alpha, w, act) for w in act))


def greedy_round_probabilities(wp, wm, L, p: np.ndarray, alpha: float,
                               active: np.ndarray) -> np.ndarray:
    """Round each p_uv to 0 or 1, never decreasing the step surplus.

    Pairs are visited in ascending lexicographic order; ties go to 0.
    Only the two pivot terms touching the pair depend on it, so each
    candidate is scored by those terms alone.
    """
    p = p.copy()
    for ui in range(len(active)):
        for vi in range(ui + 1, len(active)):
            u, v = int(active[ui]), int(active[vi])
            scores = []
            for val in (0.0, 1.0):
                p[u, v] = p[v, u] = val
                scores.append(
                    _pivot_surplus(wp, wm, L, p, alpha, u, active)
                    + _pivot_surplus(wp, wm, L, p, alpha, v, active)
                )
            best = 1.0 if scores[1] > scores[0] else 0.0
            p[u, v] = p[v, u] = best
    return p


def derandomize_round(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, alpha: float
) -> Clustering:
    """Deterministic pivot rounding with cost at most alpha * LP(x).

    Per step: set probabilities from the scheme, greedily round them all
    to 0/1 (the step surplus is convex in each variable, so endpoint
    choices never decrease it), then take the pivot whose conditional
    surplus is largest. Membership is then deterministic.
    """
    n = inst.n
    if inst.kind == WEIGHTED:
        # mixture probabilities: lam_plus f_plus + lam_minus f_minus
        xm = np.clip(x.matrix, 0.0, 1.0)
        base = inst.lam_plus * scheme.f_plus(xm) + (1.0 - inst.lam_plus) * scheme.f_minus(xm)
        np.fill_diagonal(base, 0.0)
    else:
        base = probability_matrix(inst, x, scheme)
    wp, wm, L = pair_model(inst, x)

    active = np.arange(n)
    assignment = np.full(n, -1, dtype=np.int64)
    cid = 0
    while active.size:
        p = greedy_round_probabilities(wp, wm, L, base.copy(), alpha, active)
        best_w, best_val = -1, -math.inf
        for w in active:
            pw = p[active, w]
            q = 1.0 - pw
            WP = wp[np.ix_(active, active)].copy()
            np.fill_diagonal(WP, 0.0)  # true conditional expectations: no self-loops
            WM = wm[np.ix_(active, active)]
            LL = L[np.ix_(active, active)]
            cost = pw @ WP @ q + 0.5 * (q @ WM @ q)
            lp = 0.5 * (LL.sum() - pw @ LL @ pw)
            val = alpha * lp - cost
            if val > best_val + 1e-15:
                best_w, best_val = int(w), float(val)
        cluster = active[p[active, best_w] == 0.0]
        assignment[cluster] = cid
        active = active[p[active, best_w] != 0.0]
        cid += 1
    return Clustering(assignment)


# ---------------------------------------------------------------------------
# Monte-Carlo ratio estimation
# ---------------------------------------------------------------------------


@dataclass
class MonteCarloStats:
    trials: int
    mean: float
    stddev: float
    min: float
    max: float
    lp: float
    ratio: float  # mean / lp, 1.0 when both are zero

    @property
    def sem(self) -> float:
        return self.stddev / math.sqrt(self.trials) if self.trials else 0.0


def monte_carlo_ratio(
    inst: Instance, x: LpSolution, scheme: RoundingScheme, trials: int, seed: int
) -> MonteCarloStats:
    """Empirical cost of repeated randomized rounding against the LP value.

    Per-trial seeds come from the master stream, so any single trial can
    be replayed in isolation.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from .instance import clustering_cost

    master = SplitMix64(seed)
    costs = np.empty(trials)
    for t in range(trials):
        c = round_instance(inst, x, scheme, master.next_u64())
        costs[t] = clustering_cost(inst, c)
    lp = lp_objective(inst, x)
    mean = float(costs.mean())
    if lp > 0:
        ratio = mean / lp
    else:
        ratio = 1.0 if mean == 0 else math.inf
    return MonteCarloStats(
        trials=trials,
        mean=mean,
        stddev=float(costs.std(ddof=1)) if trials > 1 else 0.0,
        min=float(costs.min()),
        max=float(costs.max()),
        lp=lp,
        ratio=ratio,
    )
