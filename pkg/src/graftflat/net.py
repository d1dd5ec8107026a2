"""Shared machinery for net-based distance oracles.

A net consists of nodes sampled on gluing circles, with edges carrying exact
distances inside a single piece.  All-pairs shortest paths are computed once;
a query point connects to the nodes of the pieces containing it, so

    d(p, q) <= min(direct(p, q), min_{x, y} d(p, x) + D[x, y] + d(y, q)).

The right-hand side is the reported upper bound.  Snapping a true geodesic to
the net costs at most two half-spacings at each circle it crosses, which gives
the contract lower = upper - 4 * netStep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .errors import BudgetExceeded

DEFAULT_MAX_NODES = 4000


def check_budget(n_nodes: int, max_nodes: int) -> None:
    if n_nodes > max_nodes:
        raise BudgetExceeded(f"net needs {n_nodes} nodes, cap is {max_nodes}")


@dataclass(frozen=True)
class Attachment:
    """Distances from a query point to the net nodes of the pieces containing it."""

    nodes: np.ndarray
    dists: np.ndarray


class DistanceNet:
    """Base class: subclasses fill ``weights`` and implement attachments and direct distances."""

    net_step: float

    def _solve(self, weights: np.ndarray) -> None:
        graph = csgraph_from_dense(weights, null_value=np.inf)
        self.weights = weights
        self.apsp, self.pred = shortest_path(graph, method="D", return_predecessors=True)

    @property
    def n_nodes(self) -> int:
        return self.apsp.shape[0]

    def attach(self, points: list) -> list[Attachment]:  # pragma: no cover - abstract
        raise NotImplementedError

    def direct(self, p, q) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def _via(self, ap: Attachment, aq: Attachment) -> tuple[float, int, int]:
        block = self.apsp[np.ix_(ap.nodes, aq.nodes)] + ap.dists[:, None] + aq.dists[None, :]
        k = int(np.argmin(block))
        a, b = divmod(k, block.shape[1])
        return float(block[a, b]), int(ap.nodes[a]), int(aq.nodes[b])

    def distance_pairs(self, ps: list, qs: list) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) bounds for each pair (ps[k], qs[k])."""
        att = self.attach(list(ps) + list(qs))
        n = len(ps)
        upper = np.empty(n)
        for k in range(n):
            via, _, _ = self._via(att[k], att[n + k])
            upper[k] = min(via, self.direct(ps[k], qs[k]))
        return np.maximum(upper - 4.0 * self.net_step, 0.0), upper

    def distance(self, p, q) -> tuple[float, float]:
        lo, up = self.distance_pairs([p], [q])
        return float(lo[0]), float(up[0])

    def node_path(self, a: int, b: int) -> list[int]:
        path = [b]
        while path[-1] != a:
            prev = int(self.pred[a, path[-1]])
            if prev < 0:
                raise ValueError("nodes are not connected")
            path.append(prev)
        return path[::-1]

    def geodesic_nodes(self, p, q) -> list[int] | None:
        """Node sequence of the minimizing net path, or None when the direct route wins."""
        ap, aq = self.attach([p, q])
        via, a, b = self._via(ap, aq)
        if self.direct(p, q) <= via:
            return None
        return self.node_path(a, b)

    def distances_to_set(self, ys: list, zs: list) -> np.ndarray:
        """Upper bound on the distance from each y to the finite set zs."""
        az = self.attach(list(zs))
        field = np.full(self.n_nodes, np.inf)
        for a in az:
            field = np.minimum(field, (self.apsp[a.nodes] + a.dists[:, None]).min(axis=0))
        ay = self.attach(list(ys))
        out = np.empty(len(ys))
        for k, a in enumerate(ay):
            via = float((a.dists + field[a.nodes]).min())
            direct = min(self.direct(ys[k], z) for z in zs)
            out[k] = min(via, direct)
        return out
