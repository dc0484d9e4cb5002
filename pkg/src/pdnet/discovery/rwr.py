"""Random walk with restart on the paper-dataset bipartite graph."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import NotFound
from ..model import PaperDatasetNetwork

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RwrParams:
    restart_prob: float = 0.15
    tolerance: float = 1e-10
    max_iters: int = 10_000
    top_k: int = 5

    def __post_init__(self) -> None:
        if not 0.0 < self.restart_prob < 1.0:
            raise ValueError("restart_prob must lie in (0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1 or self.top_k < 0:
            raise ValueError("max_iters must be >= 1 and top_k >= 0")


@dataclass(frozen=True)
class WalkGraph:
    """Node order and column-stochastic transition matrix.

    Paper nodes come first, then dataset nodes, each sorted by id.  Column j
    spreads node j's mass uniformly over its distinct neighbours.
    """

    nodes: tuple[str, ...]
    kinds: tuple[str, ...]
    index: dict[str, int]
    transition: sp.csc_matrix
    degree: np.ndarray

    @classmethod
    def of(cls, net: PaperDatasetNetwork) -> WalkGraph:
        nodes = [f"paper:{p}" for p in sorted(net.papers)] + [f"dataset:{e}" for e in sorted(net.entities)]
        kinds = tuple(n.split(":", 1)[0] for n in nodes)
        index = {n: i for i, n in enumerate(nodes)}
        pairs = sorted({(index[f"paper:{e.paper_id}"], index[f"dataset:{e.entity_id}"]) for e in net.edges})
        n = len(nodes)
        if pairs:
            rows, cols = np.array(pairs, dtype=np.int64).T
            adj = sp.coo_matrix(
                (np.ones(2 * len(pairs)), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))), shape=(n, n)
            ).tocsc()
        else:
            adj = sp.csc_matrix((n, n))
        degree = np.asarray(adj.sum(axis=0)).ravel()
        inv = np.divide(1.0, degree, out=np.zeros(n), where=degree > 0)
        transition = (adj @ sp.diags(inv)).tocsc()
        return cls(tuple(nodes), kinds, index, transition, degree)


def rwr_scores(graph: WalkGraph, seed: int, params: RwrParams) -> np.ndarray:
    """Power iteration for p = (1-c) W p + c e_seed.

    Mass sitting on nodes without neighbours is sent back to the seed so the
    walk stays stochastic.
    """
    c = params.restart_prob
    n = len(graph.nodes)
    restart = np.zeros(n)
    restart[seed] = 1.0
    dangling = graph.degree == 0
    p = restart.copy()
    for it in range(1, params.max_iters + 1):
        walked = graph.transition @ p
        walked[seed] += p[dangling].sum()
        nxt = (1.0 - c) * walked + c * restart
        delta = np.abs(nxt - p).max()
        p = nxt
        if delta <= params.tolerance:
            log.debug("rwr converged after %d iterations", it)
            return p
    log.warning("rwr did not converge within %d iterations (last delta %.3g)", params.max_iters, delta)
    return p


def similar_datasets(
    net: PaperDatasetNetwork, seed: str, params: RwrParams = RwrParams(), graph: WalkGraph | None = None
) -> list[tuple[str, float]]:
    """Top-k datasets by RWR score from ``seed``, excluding the seed itself.

    Ties break by entity id.  Unreachable datasets (score 0) are not listed.
    """
    if seed not in net.entities:
        raise NotFound(f"unknown dataset entity {seed!r}")
    graph = graph or WalkGraph.of(net)
    s = graph.index[f"dataset:{seed}"]
    if graph.degree[s] == 0:
        return []
    scores = rwr_scores(graph, s, params)
    ranked = [
        (graph.nodes[i].split(":", 1)[1], float(scores[i]))
        for i in range(len(graph.nodes))
        if graph.kinds[i] == "dataset" and i != s and scores[i] > 0
    ]
    ranked.sort(key=lambda t: (-t[1], t[0]))
    return ranked[: params.top_k]
