"""Problem instances, clusterings, generators, and (de)serialization.

An instance is a complete graph on vertices 0..n-1 whose pairs carry one
of three kinds of data, per graph class:

* ``complete``   - every pair labeled "+" or "-";
* ``kpartite``   - pairs inside a part are neutral, cross-part pairs are
                   labeled "+" or "-";
* ``weighted``   - every pair carries (lam_plus, lam_minus) with
                   lam_plus + lam_minus = 1, optionally with lam_minus
                   satisfying the triangle inequality (``ti`` flag).

Labeled classes store an int8 matrix (+1 / -1 / 0 for neutral); the
weighted class stores the lam_plus matrix. Instances are immutable after
construction by convention and safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

COMPLETE = "complete"
KPARTITE = "kpartite"
WEIGHTED = "weighted"

_CLASSES = (COMPLETE, KPARTITE, WEIGHTED)

WEIGHT_SUM_TOL = 1e-9

# Guard for weighted_to_unweighted: N * n beyond this is refused.
MAX_BLOWUP_VERTICES = 20_000


class FormatError(ValueError):
    """Malformed instance text (bad header, bad line, broken invariant)."""


def pair_iter(n: int):
    """Yield unordered pairs (u, v) with u < v in lexicographic order."""
    for u in range(n):
        for v in range(u + 1, n):
            yield u, v


@dataclass(eq=False)
class Instance:
    kind: str
    n: int
    labels: np.ndarray | None = None      # int8 (n, n), labeled classes
    lam_plus: np.ndarray | None = None    # float64 (n, n), weighted class
    parts: np.ndarray | None = None       # int (n,), kpartite class
    ti: bool = False                      # weighted triangle-inequality flag

    def __post_init__(self):
        if self.kind not in _CLASSES:
            raise ValueError(f"unknown graph class {self.kind!r}")
        self.validate()

    # -- construction -------------------------------------------------

    @staticmethod
    def complete(labels: np.ndarray) -> "Instance":
        labels = np.asarray(labels, dtype=np.int8)
        return Instance(COMPLETE, labels.shape[0], labels=labels)

    @staticmethod
    def kpartite(labels: np.ndarray, parts) -> "Instance":
        labels = np.asarray(labels, dtype=np.int8)
        parts = np.asarray(parts, dtype=np.int64)
        return Instance(KPARTITE, labels.shape[0], labels=labels, parts=parts)

    @staticmethod
    def weighted(lam_plus: np.ndarray, ti: bool = False) -> "Instance":
        lam_plus = np.asarray(lam_plus, dtype=np.float64)
        return Instance(WEIGHTED, lam_plus.shape[0], lam_plus=lam_plus, ti=ti)

    # -- invariants ----------------------------------------------------

    def validate(self) -> None:
        n = self.n
        if self.kind in (COMPLETE, KPARTITE):
            a = self.labels
            if a is None or a.shape != (n, n):
                raise ValueError("labeled instance needs an (n, n) label matrix")
            if not np.array_equal(a, a.T):
                raise ValueError("label matrix must be symmetric")
            if np.any(np.diag(a) != 0):
                raise ValueError("diagonal must be neutral")
            off = ~np.eye(n, dtype=bool)
            if self.kind == COMPLETE:
                if np.any(a[off] == 0):
                    raise ValueError("complete instance has a neutral pair")
            else:
                if self.parts is None or self.parts.shape != (n,):
                    raise ValueError("k-partite instance needs a part assignment")
                same = self.parts[:, None] == self.parts[None, :]
                if np.any((a == 0) & off & ~same):
                    raise ValueError("cross-part pair is neutral")
                if np.any((a != 0) & same & off):
                    raise ValueError("intra-part pair is labeled")
        else:
            w = self.lam_plus
            if w is None or w.shape != (n, n):
                raise ValueError("weighted instance needs an (n, n) weight matrix")
            if not np.array_equal(w, w.T):
                raise ValueError("weight matrix must be symmetric")
            if np.any(w < -WEIGHT_SUM_TOL) or np.any(w > 1 + WEIGHT_SUM_TOL):
                raise ValueError("lam_plus outside [0, 1]")
            if self.ti:
                lm = 1.0 - w
                np.fill_diagonal(lm, 0.0)
                worst = _worst_metric_violation(lm)
                if worst > 1e-9:
                    raise ValueError(f"lam_minus violates triangle inequality by {worst:.3g}")

    # -- views ---------------------------------------------------------

    def pair_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(W+, W-) matrices: per-pair positive / negative mass, zero diagonal.

        Labeled pairs contribute 1 on their own side; neutral pairs 0; a
        weighted pair contributes (lam_plus, 1 - lam_plus).
        """
        if self.kind == WEIGHTED:
            wp = self.lam_plus.astype(np.float64).copy()
            wm = 1.0 - wp
        else:
            wp = (self.labels == 1).astype(np.float64)
            wm = (self.labels == -1).astype(np.float64)
        np.fill_diagonal(wp, 0.0)
        np.fill_diagonal(wm, 0.0)
        return wp, wm

    def total_pair_mass(self) -> float:
        wp, wm = self.pair_weights()
        return float(np.triu(wp + wm, 1).sum())

    def edge_kind(self, u: int, v: int) -> str:
        """'+', '-' or '0' for labeled classes."""
        if self.kind == WEIGHTED:
            raise ValueError("weighted pairs carry weights, not labels")
        s = int(self.labels[u, v])
        return {1: "+", -1: "-", 0: "0"}[s]


def _worst_metric_violation(d: np.ndarray) -> float:
    """max over triples of d[u,w] - d[u,v] - d[v,w]."""
    n = d.shape[0]
    worst = -math.inf
    for v in range(n):
        slack = d - d[:, v][:, None] - d[v, :][None, :]
        np.fill_diagonal(slack, -math.inf)
        slack[v, :] = -math.inf
        slack[:, v] = -math.inf
        m = slack.max() if n > 1 else -math.inf
        worst = max(worst, float(m))
    return worst if worst > -math.inf else 0.0


class Clustering:
    """A partition of 0..n-1, stored canonically.

    Cluster ids are renumbered by first occurrence, so two clusterings
    are equal iff they induce the same partition.
    """

    __slots__ = ("assignment",)

    def __init__(self, assignment):
        a = np.asarray(assignment, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignment must be a flat vector")
        self.assignment = _canonicalize(a)

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    @property
    def num_clusters(self) -> int:
        return int(self.assignment.max()) + 1 if self.n else 0

    @staticmethod
    def from_blocks(blocks, n: int) -> "Clustering":
        a = np.full(n, -1, dtype=np.int64)
        for cid, block in enumerate(blocks):
            for v in block:
                if a[v] != -1:
                    raise ValueError(f"vertex {v} in two blocks")
                a[v] = cid
        if np.any(a < 0):
            raise ValueError("blocks do not cover all vertices")
        return Clustering(a)

    @staticmethod
    def single_cluster(n: int) -> "Clustering":
        return Clustering(np.zeros(n, dtype=np.int64))

    @staticmethod
    def singletons(n: int) -> "Clustering":
        return Clustering(np.arange(n, dtype=np.int64))

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_clusters)]
        for v, c in enumerate(self.assignment):
            out[c].append(v)
        return out

    def __eq__(self, other):
        return isinstance(other, Clustering) and np.array_equal(
            self.assignment, other.assignment
        )

    def __hash__(self):
        return hash(self.assignment.tobytes())

    def __repr__(self):
        return f"Clustering({self.assignment.tolist()})"


def _canonicalize(a: np.ndarray) -> np.ndarray:
    seen: dict[int, int] = {}
    out = np.empty_like(a)
    for i, c in enumerate(a):
        c = int(c)
        if c not in seen:
            seen[c] = len(seen)
        out[i] = seen[c]
    return out


def clustering_cost(inst: Instance, c: Clustering) -> float:
    """Total disagreement mass of a clustering.

    Labeled classes count "+" pairs cut plus "-" pairs kept together;
    the weighted class charges lam_plus on cut pairs and lam_minus on
    uncut pairs. Neutral pairs are free.
    """
    if c.n != inst.n:
        raise ValueError(f"clustering covers {c.n} vertices, instance has {inst.n}")
    a = c.assignment
    same = a[:, None] == a[None, :]
    wp, wm = inst.pair_weights()
    cut_cost = wp[~same].sum() / 2.0
    keep_cost = wm[same].sum() / 2.0  # diagonal of wm is zero
    return float(cut_cost + keep_cost)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def gen_complete_random(n: int, plus_prob: float, seed: int) -> Instance:
    """Complete instance with each pair independently '+' with plus_prob."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= plus_prob <= 1.0:
        raise ValueError("plus_prob must be in [0, 1]")
    rng = SplitMix64(seed)
    labels = np.zeros((n, n), dtype=np.int8)
    for u, v in pair_iter(n):
        s = 1 if rng.uniform() < plus_prob else -1
        labels[u, v] = labels[v, u] = s
    return Instance.complete(labels)


def gen_kpartite_random(part_sizes, plus_prob: float, seed: int) -> Instance:
    """K-partite instance: intra-part pairs neutral, cross pairs random."""
    sizes = list(part_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("part sizes must all be >= 1")
    parts = np.repeat(np.arange(len(sizes)), sizes)
    n = int(parts.shape[0])
    rng = SplitMix64(seed)
    labels = np.zeros((n, n), dtype=np.int8)
    for u, v in pair_iter(n):
        if parts[u] != parts[v]:
            s = 1 if rng.uniform() < plus_prob else -1
            labels[u, v] = labels[v, u] = s
    return Instance.kpartite(labels, parts)


def gen_planted(n: int, k: int, corruption: float, seed: int) -> tuple[Instance, Clustering]:
    """Near-balanced planted clustering with labels flipped at rate corruption.

    Returns (instance, ground-truth clustering).
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not 0.0 <= corruption <= 1.0:
        raise ValueError("corruption must be in [0, 1]")
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    truth = np.repeat(np.arange(k), sizes)
    rng = SplitMix64(seed)
    labels = np.zeros((n, n), dtype=np.int8)
    for u, v in pair_iter(n):
        s = 1 if truth[u] == truth[v] else -1
        if rng.uniform() < corruption:
            s = -s
        labels[u, v] = labels[v, u] = s
    return Instance.complete(labels), Clustering(truth)


def gen_weighted_random(n: int, seed: int) -> Instance:
    """Weighted-complete instance with lam_plus uniform on [0, 1] per pair."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = SplitMix64(seed)
    w = np.zeros((n, n), dtype=np.float64)
    for u, v in pair_iter(n):
        w[u, v] = w[v, u] = rng.uniform()
    return Instance.weighted(w, ti=False)


def gen_gap_triangle_ineq(n: int) -> Instance:
    """Two-sided weighted instance whose LP relaxation undershoots OPT.

    2n vertices split into two sides; lam_minus is 1/3 across the split
    and 2/3 within a side (so lam_minus is a metric), lam_plus = 1 - lam_minus.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 2 * n
    side = np.arange(total) < n
    cross = side[:, None] != side[None, :]
    lam_minus = np.where(cross, 1.0 / 3.0, 2.0 / 3.0)
    np.fill_diagonal(lam_minus, 0.0)
    lam_plus = 1.0 - lam_minus
    np.fill_diagonal(lam_plus, 0.0)
    return Instance.weighted(lam_plus, ti=True)


def gap_kpartite_lp_point(n1: int, n2: int, edges):
    """Bipartite-graph gap construction and its fractional solution.

    The caller supplies a bipartite graph (edges as (i, j) with i < n1,
    j < n2). Cross pairs that are edges become "+", cross non-edges "-",
    within-side pairs neutral. The returned fractional point is 1/3 on
    "+", 1 on "-", 2/3 on neutral pairs; its objective is |E|/3 and it is
    verified feasible before returning.

    Returns (Instance, LpSolution).
    """
    from .lp import LpSolution, validate_solution

    if n1 < 1 or n2 < 1:
        raise ValueError("both sides must be nonempty")
    n = n1 + n2
    adj = np.zeros((n1, n2), dtype=bool)
    for i, j in edges:
        if not (0 <= i < n1 and 0 <= j < n2):
            raise ValueError(f"edge ({i}, {j}) out of range")
        if adj[i, j]:
            raise ValueError(f"duplicate edge ({i}, {j})")
        adj[i, j] = True

    parts = np.concatenate([np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)])
    labels = np.zeros((n, n), dtype=np.int8)
    x = np.full((n, n), 2.0 / 3.0)
    np.fill_diagonal(x, 0.0)
    for i in range(n1):
        for j in range(n2):
            u, v = i, n1 + j
            s = 1 if adj[i, j] else -1
            labels[u, v] = labels[v, u] = s
            val = 1.0 / 3.0 if adj[i, j] else 1.0
            x[u, v] = x[v, u] = val

    inst = Instance.kpartite(labels, parts)
    sol = LpSolution.from_matrix(x)
    report = validate_solution(sol)
    if not report.feasible(1e-9):
        raise ValueError(f"constructed point infeasible: {report}")
    return inst, sol


def weighted_to_unweighted(inst: Instance, N: int, seed: int):
    """Blow each vertex up into N copies and sample labels from the weights.

    Copies of the same vertex get "+" edges; a cross pair (u_i, v_j) is
    "+" with probability lam_plus[u, v]. Returns (labeled instance, map)
    where map[blowup vertex] = original vertex.
    """
    if inst.kind != WEIGHTED:
        raise ValueError("blowup takes a weighted instance")
    if N < 1:
        raise ValueError("N must be >= 1")
    n = inst.n
    total = n * N
    if total > MAX_BLOWUP_VERTICES:
        raise ValueError(f"blowup would have {total} vertices (max {MAX_BLOWUP_VERTICES})")
    rng = SplitMix64(seed)
    labels = np.zeros((total, total), dtype=np.int8)
    vmap = np.repeat(np.arange(n), N)
    for u in range(n):
        lo, hi = u * N, (u + 1) * N
        labels[lo:hi, lo:hi] = 1
    for u, v in pair_iter(n):
        lp = inst.lam_plus[u, v]
        for i in range(N):
            for j in range(N):
                s = 1 if rng.uniform() < lp else -1
                a, b = u * N + i, v * N + j
                labels[a, b] = labels[b, a] = s
    np.fill_diagonal(labels, 0)
    return Instance.complete(labels), vmap


def lift_clustering(c: Clustering, vmap: np.ndarray, seed: int) -> Clustering:
    """Project a blowup clustering back to the original vertices.

    Each original vertex adopts the cluster of one of its copies, picked
    uniformly from the seeded stream.
    """
    vmap = np.asarray(vmap)
    if c.n != vmap.shape[0]:
        raise ValueError("clustering does not cover the blowup graph")
    n_orig = int(vmap.max()) + 1
    rng = SplitMix64(seed)
    out = np.empty(n_orig, dtype=np.int64)
    for u in range(n_orig):
        copies = np.flatnonzero(vmap == u)
        pick = copies[rng.randint(len(copies))]
        out[u] = c.assignment[pick]
    return Clustering(out)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_LABEL_TO_CHAR = {1: "+", -1: "-", 0: "0"}
_CHAR_TO_LABEL = {"+": 1, "-": -1, "0": 0}


def serialize_instance(inst: Instance, fmt: str = "edgelist") -> str:
    if fmt == "edgelist":
        return _to_edgelist(inst)
    if fmt == "json":
        return _to_json(inst)
    raise ValueError(f"unknown format {fmt!r}")


def parse_instance(text: str) -> Instance:
    """Parse either format; JSON is detected by a leading '{'."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _from_json(text)
    return _from_edgelist(text)


def _to_edgelist(inst: Instance) -> str:
    head = ["cc", inst.kind, str(inst.n)]
    if inst.kind == KPARTITE:
        head += [str(int(p)) for p in inst.parts]
    if inst.kind == WEIGHTED and inst.ti:
        head.append("ti")
    lines = [" ".join(head)]
    for u, v in pair_iter(inst.n):
        if inst.kind == WEIGHTED:
            lines.append(f"{u} {v} {float(inst.lam_plus[u, v])!r}")
        else:
            lines.append(f"{u} {v} {_LABEL_TO_CHAR[int(inst.labels[u, v])]}")
    return "\n".join(lines) + "\n"


def _from_edgelist(text: str) -> Instance:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise FormatError("empty instance text")
    head = rows[0].split()
    if len(head) < 3 or head[0] != "cc":
        raise FormatError(f"bad header {rows[0]!r}")
    kind = head[1]
    if kind not in _CLASSES:
        raise FormatError(f"unknown class {kind!r}")
    try:
        n = int(head[2])
    except ValueError as e:
        raise FormatError(f"bad vertex count {head[2]!r}") from e
    if n < 1:
        raise FormatError("vertex count must be >= 1")

    parts = None
    ti = False
    extra = head[3:]
    if kind == KPARTITE:
        if len(extra) != n:
            raise FormatError(f"k-partite header needs {n} part ids, got {len(extra)}")
        try:
            parts = np.array([int(t) for t in extra], dtype=np.int64)
        except ValueError as e:
            raise FormatError("bad part id in header") from e
    elif kind == WEIGHTED:
        if extra == ["ti"]:
            ti = True
        elif extra:
            raise FormatError(f"unexpected header tokens {extra}")
    elif extra:
        raise FormatError(f"unexpected header tokens {extra}")

    labels = np.zeros((n, n), dtype=np.int8)
    lam = np.zeros((n, n), dtype=np.float64)
    seen = np.zeros((n, n), dtype=bool)
    for line in rows[1:]:
        toks = line.split()
        if len(toks) != 3:
            raise FormatError(f"bad pair line {line!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError as e:
            raise FormatError(f"bad vertex id in {line!r}") from e
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise FormatError(f"pair ({u}, {v}) out of range")
        if u > v:
            u, v = v, u
        if seen[u, v]:
            raise FormatError(f"duplicate pair ({u}, {v})")
        seen[u, v] = True
        if kind == WEIGHTED:
            try:
                w = float(toks[2])
            except ValueError as e:
                raise FormatError(f"bad weight in {line!r}") from e
            lam[u, v] = lam[v, u] = w
        else:
            if toks[2] not in _CHAR_TO_LABEL:
                raise FormatError(f"bad label {toks[2]!r}")
            s = _CHAR_TO_LABEL[toks[2]]
            labels[u, v] = labels[v, u] = s

    missing = ~seen & (np.triu(np.ones((n, n), dtype=bool), 1))
    if np.any(missing):
        u, v = np.argwhere(missing)[0]
        raise FormatError(f"pair ({u}, {v}) missing: all pairs must be explicit")

    try:
        if kind == COMPLETE:
            return Instance.complete(labels)
        if kind == KPARTITE:
            return Instance.kpartite(labels, parts)
        return Instance.weighted(lam, ti=ti)
    except ValueError as e:
        raise FormatError(str(e)) from e


def _to_json(inst: Instance) -> str:
    edges = []
    for u, v in pair_iter(inst.n):
        if inst.kind == WEIGHTED:
            edges.append({"u": u, "v": v, "lplus": float(inst.lam_plus[u, v])})
        else:
            edges.append({"u": u, "v": v, "label": _LABEL_TO_CHAR[int(inst.labels[u, v])]})
    doc = {"class": inst.kind, "n": inst.n, "edges": edges, "flags": {"ti": inst.ti}}
    if inst.kind == KPARTITE:
        doc["parts"] = [int(p) for p in inst.parts]
    return json.dumps(doc, indent=1)


def _from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"bad JSON: {e}") from e
    try:
        kind = doc["class"]
        n = int(doc["n"])
        raw_edges = doc["edges"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"missing or bad field: {e}") from e
    if kind not in _CLASSES:
        raise FormatError(f"unknown class {kind!r}")
    if n < 1:
        raise FormatError("vertex count must be >= 1")
    ti = bool(doc.get("flags", {}).get("ti", False))

    labels = np.zeros((n, n), dtype=np.int8)
    lam = np.zeros((n, n), dtype=np.float64)
    seen = np.zeros((n, n), dtype=bool)
    for e in raw_edges:
        try:
            u, v = int(e["u"]), int(e["v"])
        except (KeyError, TypeError, ValueError) as err:
            raise FormatError(f"bad edge entry {e!r}") from err
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise FormatError(f"pair ({u}, {v}) out of range")
        if u > v:
            u, v = v, u
        if seen[u, v]:
            raise FormatError(f"duplicate pair ({u}, {v})")
        seen[u, v] = True
        if kind == WEIGHTED:
            lp = e.get("lplus", e.get("lp"))
            if lp is None:
                raise FormatError(f"weighted edge {e!r} lacks lplus")
            lp = float(lp)
            if "lminus" in e and abs(lp + float(e["lminus"]) - 1.0) > WEIGHT_SUM_TOL:
                raise FormatError(
                    f"pair ({u}, {v}): lplus + lminus = {lp + float(e['lminus'])!r} != 1"
                )
            lam[u, v] = lam[v, u] = lp
        else:
            if e.get("label") not in _CHAR_TO_LABEL:
                raise FormatError(f"bad label in {e!r}")
            s = _CHAR_TO_LABEL[e["label"]]
            labels[u, v] = labels[v, u] = s

    missing = ~seen & np.triu(np.ones((n, n), dtype=bool), 1)
    if np.any(missing):
        u, v = np.argwhere(missing)[0]
        raise FormatError(f"pair ({u}, {v}) missing: all pairs must be explicit")

    try:
        if kind == COMPLETE:
            return Instance.complete(labels)
        if kind == KPARTITE:
            parts = doc.get("parts")
            if parts is None or len(parts) != n:
                raise FormatError("k-partite JSON needs a parts array of length n")
            return Instance.kpartite(labels, np.asarray(parts, dtype=np.int64))
        return Instance.weighted(lam, ti=ti)
    except FormatError:
        raise
    except ValueError as e:
        raise FormatError(str(e)) from e
