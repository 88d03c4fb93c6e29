"""Truncated regular-vine copulas.

A d-dimensional regular vine arranges d(d-1)/2 bivariate copulas into d-1
nested trees.  Tree 1 spans the variables themselves; each deeper tree spans
the edges of the one before it, and an edge may only join two edges that
share a node (the proximity condition).  Every edge carries a *conditioned*
pair and a *conditioning* set; the copula on an edge couples the conditional
CDFs of its conditioned pair given its conditioning set.  Conditional CDFs
are produced by h-function transforms of the copulas one tree down, so
fitting proceeds tree by tree.

Structure selection is greedy maximum spanning tree on absolute Kendall's
tau, the standard sequential heuristic.  Ties break lexicographically on
node indices, and node indices themselves are assigned canonically, so the
whole construction is deterministic with no RNG.

Truncation at level t replaces every copula in trees deeper than t with the
independence copula.  Those trees are still materialized (their structure is
needed to invert the model) but contribute nothing to the density.

Sampling uses the inverse-Rosenblatt construction directly on the edge
lists.  A sampling order is found by peeling: the top tree's single edge
always exposes a variable that appears in exactly one conditioned pair of
every tree below, so variables can be eliminated one at a time.  Conditional
CDFs and quantiles are then evaluated by memoized recursion through the
stored edges; the same recursion evaluates the log-density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import (
    InvalidInputError,
    InvalidSpecError,
    NumericFailureError,
    check_matrix,
    check_random_state,
)
from .pair_copula import (
    DEFAULT_FAMILY_LIBRARY,
    CopulaFamily,
    PairCopulaSpec,
    empirical_kendall_tau,
    fit_pair_copula,
    h_function,
    inverse_h_function,
    log_density,
    transpose_spec,
)

__all__ = ["VineEdge", "VineCopula", "default_truncation"]


def default_truncation(d: int) -> int:
    """Default truncation level: min(3, d - 1)."""
    return min(3, d - 1)


@dataclass(frozen=True)
class VineEdge:
    """One edge of a vine tree.

    ``conditioned`` is an ascending variable pair (j, k); ``conditioning``
    the frozen set D of conditioning variables.  ``spec`` couples
    F(j | D) (first copula argument) with F(k | D) (second argument).
    ``tau`` records the selection weight (sample tau of those margins).
    """

    conditioned: tuple
    conditioning: frozenset
    spec: PairCopulaSpec
    tau: float = 0.0

    def to_dict(self) -> dict:
        return {
            "conditioned": list(self.conditioned),
            "conditioning": sorted(self.conditioning),
            "tau": self.tau,
            "spec": self.spec.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VineEdge":
        conditioned = tuple(int(x) for x in d["conditioned"])
        if len(conditioned) != 2 or conditioned[0] >= conditioned[1]:
            raise InvalidSpecError(f"conditioned pair must be two ascending indices, got {conditioned}")
        return cls(
            conditioned=conditioned,
            conditioning=frozenset(int(x) for x in d.get("conditioning", ())),
            spec=PairCopulaSpec.from_dict(d["spec"]),
            tau=float(d.get("tau", 0.0)),
        )


class _Node:
    """Working node during sequential construction: its variable set, the
    endpoints it descends from, and the conditional margins it exposes."""

    __slots__ = ("uset", "margins")

    def __init__(self, uset, margins):
        self.uset = uset
        self.margins = margins  # var -> F(var | uset - {var}) array


def _kruskal_max_tree(n_nodes, candidates):
    """Max spanning tree via Kruskal with union-find.

    ``candidates`` is a list of (weight, i, j, payload); ties break by
    (i, j).  Returns accepted candidates.  Raises if the candidate graph
    does not connect all nodes.
    """
    parent = list(range(n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    accepted = []
    for weight, i, j, payload in sorted(candidates, key=lambda c: (-c[0], c[1], c[2])):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            accepted.append((weight, i, j, payload))
            if len(accepted) == n_nodes - 1:
                break
    if len(accepted) != n_nodes - 1:
        raise InvalidSpecError("tree candidates do not connect all nodes")
    return accepted


class VineCopula(BaseEstimator):
    """Truncated regular-vine copula on pseudo-observations.

    Parameters
    ----------
    truncation_level : int or None
        Deepest tree that carries fitted copulas; ``None`` means
        min(3, d - 1).  Deeper trees are independence.
    family_library : sequence
        Candidate bivariate families for each edge.

    Attributes
    ----------
    d_ : int
    n_obs_ : int
    truncation_level_ : int
    trees_ : list of list of VineEdge
        All d - 1 trees; trees past ``truncation_level_`` hold independence
        edges only.
    flags_ : tuple of str
    """

    def __init__(self, truncation_level=None, family_library=DEFAULT_FAMILY_LIBRARY):
        self.truncation_level = truncation_level
        self.family_library = family_library

    # -- fitting ------------------------------------------------------------

    def fit(self, U, y=None):
        U = check_matrix(U, "U")
        n, d = U.shape
        if d < 2:
            raise InvalidInputError(f"vine requires at least 2 columns, got {d}")
        if n < 10:
            raise InvalidInputError(f"vine requires at least 10 rows, got {n}")
        if U.min() < 0.0 or U.max() > 1.0:
            raise InvalidInputError("U must contain values in [0, 1]")
        U = np.clip(U, 1e-10, 1.0 - 1e-10)

        trunc = self._resolve_truncation(d)
        nodes = [_Node(frozenset({i}), {i: U[:, i]}) for i in range(d)]
        trees = []
        flags = []

        for level in range(1, d):
            fit_level = level <= trunc
            candidates = []
            for i in range(len(nodes)):
                for j in range(i + 1, len(nodes)):
                    pair = self._pair_margins(nodes[i], nodes[j])
                    if pair is None:
                        continue
                    x, y_, mx, my, cond_set = pair
                    tau, degen = empirical_kendall_tau(mx, my)
                    if degen:
                        flags.append(f"degenerate_tau_tree{level}")
                    candidates.append((abs(tau), i, j, (x, y_, mx, my, cond_set, tau)))
            accepted = _kruskal_max_tree(len(nodes), candidates)
            # canonical node indices for the next tree: sort accepted edges by
            # conditioned pair then conditioning set
            accepted.sort(key=lambda c: (c[3][0], c[3][1], tuple(sorted(c[3][4]))))

            edges = []
            next_nodes = []
            for _, i, j, (x, y_, mx, my, cond_set, tau) in accepted:
                if fit_level:
                    spec = fit_pair_copula(mx, my, self.family_library)
                else:
                    spec = PairCopulaSpec(CopulaFamily.INDEPENDENCE, 0, (), 0.0, 0.0, n)
                edge = VineEdge((x, y_), cond_set, spec, tau)
                edges.append(edge)
                for fl in spec.flags:
                    flags.append(f"tree{level}_edge{x}-{y_}:{fl}")
                uset = nodes[i].uset | nodes[j].uset
                margins = {
                    x: h_function(spec, mx, my),
                    y_: h_function(transpose_spec(spec), my, mx),
                }
                next_nodes.append(_Node(uset, margins))
            trees.append(edges)
            nodes = next_nodes

        self.d_ = d
        self.n_obs_ = n
        self.truncation_level_ = trunc
        self.trees_ = trees
        self.flags_ = tuple(dict.fromkeys(flags))
        self._reset_lookup()
        return self

    def _resolve_truncation(self, d: int) -> int:
        if self.truncation_level is None:
            return default_truncation(d)
        t = int(self.truncation_level)
        if t < 1:
            raise InvalidInputError(f"truncation_level must be >= 1, got {t}")
        return min(t, d - 1)

    @staticmethod
    def _pair_margins(a: _Node, b: _Node):
        """Conditioned pair and margins for a candidate edge, or None if the
        pair violates the proximity condition."""
        inter = a.uset & b.uset
        if len(inter) != len(a.uset) - 1:
            return None
        (x,) = tuple(a.uset - b.uset)
        (y,) = tuple(b.uset - a.uset)
        mx, my = a.margins[x], b.margins[y]
        if x > y:
            x, y, mx, my = y, x, my, mx
        return x, y, mx, my, frozenset(inter)

    # -- classmethods -------------------------------------------------------

    @classmethod
    def independent(cls, d: int, n_obs: int = 0, flags=()) -> "VineCopula":
        """An all-independence vine on a path structure (no fitting)."""
        if d < 2:
            raise InvalidInputError(f"vine requires at least 2 variables, got {d}")
        model = cls(truncation_level=1)
        trees = []
        for level in range(1, d):
            edges = []
            for i in range(d - level):
                spec = PairCopulaSpec(CopulaFamily.INDEPENDENCE, 0, (), 0.0, 0.0, n_obs)
                edges.append(VineEdge((i, i + level), frozenset(range(i + 1, i + level)), spec))
            trees.append(edges)
        model.d_ = d
        model.n_obs_ = n_obs
        model.truncation_level_ = 1
        model.trees_ = trees
        model.flags_ = tuple(flags)
        model._reset_lookup()
        return model

    # -- evaluation ---------------------------------------------------------

    def log_density(self, U):
        """Row-wise log density of the vine at pseudo-observations U."""
        self._check_fitted()
        U = check_matrix(U, "U")
        if U.shape[1] != self.d_:
            raise InvalidInputError(f"U has {U.shape[1]} columns, model has {self.d_}")
        if U.min() < 0.0 or U.max() > 1.0:
            raise InvalidInputError("U must contain values in [0, 1]")
        U = np.clip(U, 1e-10, 1.0 - 1e-10)

        cache = {(i, frozenset()): U[:, i] for i in range(self.d_)}
        total = np.zeros(U.shape[0])
        for edges in self.trees_[: self.truncation_level_]:
            for e in edges:
                a = self._cond_cdf(e.conditioned[0], e.conditioning, cache)
                b = self._cond_cdf(e.conditioned[1], e.conditioning, cache)
                total += log_density(e.spec, a, b)
        return total

    def sample(self, n: int, random_state=None):
        """Draw n rows by inverse-Rosenblatt transform of iid uniforms."""
        self._check_fitted()
        if n < 1:
            raise InvalidInputError(f"n must be >= 1, got {n}")
        rng = check_random_state(random_state)
        w = np.clip(rng.random((n, self.d_)), 1e-10, 1.0 - 1.0e-10)
        order = self._sampling_order()
        cache = {}
        out = np.empty((n, self.d_))
        for pos, v in enumerate(order):
            u = self._cond_quantile(w[:, pos], v, frozenset(order[:pos]), cache)
            cache[(v, frozenset())] = u
            out[:, v] = u
        return out

    # -- recursion through the edge lists ------------------------------------

    def _reset_lookup(self):
        # (variable, frozenset of known vars) -> edge of tree len(set)
        lookup = {}
        for edges in self.trees_:
            for e in edges:
                j, k = e.conditioned
                lookup[(j, e.conditioning | {k})] = e
                lookup[(k, e.conditioning | {j})] = e
        self._edge_lookup = lookup
        self._order_cache = None

    def _edge_for(self, v, known):
        try:
            return self._edge_lookup[(v, known)]
        except KeyError:
            raise InvalidSpecError(
                f"no edge conditions variable {v} on set {sorted(known)}; structure is not a regular vine"
            ) from None

    def _cond_cdf(self, v, known, cache):
        key = (v, known)
        if key in cache:
            return cache[key]
        e = self._edge_for(v, known)
        a = self._cond_cdf(e.conditioned[0], e.conditioning, cache)
        b = self._cond_cdf(e.conditioned[1], e.conditioning, cache)
        if v == e.conditioned[0]:
            out = h_function(e.spec, a, b)
        else:
            out = h_function(transpose_spec(e.spec), b, a)
        cache[key] = out
        return out

    def _cond_quantile(self, p, v, known, cache):
        if not known:
            return p
        e = self._edge_for(v, known)
        s = e.conditioned[1] if v == e.conditioned[0] else e.conditioned[0]
        m_s = self._cond_cdf(s, e.conditioning, cache)
        try:
            if v == e.conditioned[0]:
                q = inverse_h_function(e.spec, p, m_s)
            else:
                q = inverse_h_function(transpose_spec(e.spec), p, m_s)
        except NumericFailureError as exc:
            raise NumericFailureError(
                f"edge {e.conditioned}|{sorted(e.conditioning)}: {exc}"
            ) from None
        return self._cond_quantile(q, v, e.conditioning, cache)

    def _sampling_order(self):
        if self._order_cache is not None:
            return self._order_cache
        d = self.d_
        levels = [list(t) for t in self.trees_]
        peeled = []
        for level in range(d - 1, 0, -1):
            (top,) = levels[level - 1]
            chosen = None
            for x in sorted(top.conditioned):
                ok = True
                for l in range(level):
                    hits = sum(1 for e in levels[l] if x in e.conditioned)
                    buried = any(x in e.conditioning for e in levels[l])
                    if hits != 1 or buried:
                        ok = False
                        break
                if ok:
                    chosen = x
                    break
            if chosen is None:
                raise InvalidSpecError("structure is not peelable; not a regular vine")
            peeled.append(chosen)
            for l in range(level):
                levels[l] = [e for e in levels[l] if chosen not in e.conditioned]
        (first,) = set(range(d)) - set(peeled)
        order = [first] + peeled[::-1]
        self._order_cache = order
        return order

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "d": self.d_,
            "n_obs": self.n_obs_,
            "truncation_level": self.truncation_level_,
            "flags": list(self.flags_),
            "trees": [[e.to_dict() for e in edges] for edges in self.trees_],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "VineCopula":
        try:
            d = int(payload["d"])
            trees_raw = payload["trees"]
        except (KeyError, TypeError) as exc:
            raise InvalidSpecError(f"malformed vine payload: {exc}") from None
        if d < 2:
            raise InvalidSpecError(f"vine payload must have d >= 2, got {d}")
        if len(trees_raw) != d - 1:
            raise InvalidSpecError(f"expected {d - 1} trees, got {len(trees_raw)}")
        trees = []
        for level, edges_raw in enumerate(trees_raw, start=1):
            if len(edges_raw) != d - level:
                raise InvalidSpecError(
                    f"tree {level} must have {d - level} edges, got {len(edges_raw)}"
                )
            edges = []
            for e_raw in edges_raw:
                e = VineEdge.from_dict(e_raw)
                if len(e.conditioning) != level - 1:
                    raise InvalidSpecError(
                        f"tree {level} edge {e.conditioned} has conditioning size "
                        f"{len(e.conditioning)}, expected {level - 1}"
                    )
                vars_used = set(e.conditioned) | e.conditioning
                if len(vars_used) != level + 1 or not vars_used <= set(range(d)):
                    raise InvalidSpecError(f"tree {level} edge references invalid variables")
                edges.append(e)
            trees.append(edges)
        model = cls(truncation_level=int(payload.get("truncation_level", d - 1)))
        model.d_ = d
        model.n_obs_ = int(payload.get("n_obs", 0))
        model.truncation_level_ = int(payload.get("truncation_level", d - 1))
        model.trees_ = trees
        model.flags_ = tuple(payload.get("flags", ()))
        model._reset_lookup()
        model._sampling_order()  # validates peelability eagerly
        return model

    def _check_fitted(self):
        if not hasattr(self, "trees_"):
            raise InvalidInputError("vine is not fitted; call fit() first")
