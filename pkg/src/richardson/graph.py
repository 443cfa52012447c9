"""Immutable bounded-degree graphs with dense vertex and edge ids."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np


class GraphError(ValueError):
    pass


class GraphBuilder:
    """Single-owner builder; call :meth:`freeze` to obtain a :class:`Graph`."""

    def __init__(self):
        self._labels: list[Optional[str]] = []
        self._eu: list[int] = []
        self._ev: list[int] = []
        self._pairs: set[tuple[int, int]] = set()
        self._frozen = False

    @property
    def num_vertices(self) -> int:
        return len(self._labels)

    @property
    def num_edges(self) -> int:
        return len(self._eu)

    def _check_open(self):
        if self._frozen:
            raise GraphError("builder frozen")

    def _check_vertex(self, v: int):
        if not (0 <= v < len(self._labels)):
            raise GraphError(f"no such vertex: {v}")

    def add_vertex(self, label: Optional[str] = None) -> int:
        self._check_open()
        self._labels.append(label)
        return len(self._labels) - 1

    def add_edge(self, u: int, w: int) -> int:
        self._check_open()
        self._check_vertex(u)
        self._check_vertex(w)
        if u == w:
            raise GraphError("self-loop")
        key = (u, w) if u < w else (w, u)
        if key in self._pairs:
            raise GraphError(f"duplicate edge <{u},{w}>")
        self._pairs.add(key)
        self._eu.append(u)
        self._ev.append(w)
        return len(self._eu) - 1

    def add_path(self, start: int, length: int, label: Optional[str] = None) -> int:
        """Chain ``length`` new vertices off ``start``; return the last one."""
        self._check_open()
        self._check_vertex(start)
        if length < 1:
            raise GraphError("path length must be >= 1")
        prev = start
        for j in range(1, length + 1):
            cur = self.add_vertex(f"{label}:{j}" if label else None)
            self.add_edge(prev, cur)
            prev = cur
        return prev

    def add_bridge(self, u: int, w: int, length: int, label: Optional[str] = None) -> list[int]:
        """Join ``u`` and ``w`` by a path of ``length`` edges; return the interior vertices."""
        self._check_open()
        self._check_vertex(u)
        self._check_vertex(w)
        if u == w:
            raise GraphError("self-bridge")
        if length < 1:
            raise GraphError("bridge length must be >= 1")
        interior = []
        prev = u
        for j in range(1, length):
            cur = self.add_vertex(f"{label}:{j}" if label else None)
            self.add_edge(prev, cur)
            interior.append(cur)
            prev = cur
        self.add_edge(prev, w)
        return interior

    def freeze(self) -> "Graph":
        self._check_open()
        self._frozen = True
        return Graph.from_edges(self.num_vertices, self._eu, self._ev, self._labels)


@dataclass(frozen=True, eq=False)
class Graph:
    """CSR adjacency; ``adj_vertex[indptr[v]:indptr[v+1]]`` are the neighbours of ``v``."""

    num_vertices: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    indptr: np.ndarray
    adj_vertex: np.ndarray
    adj_edge: np.ndarray
    labels: tuple = field(default=())
    max_degree: int = 0

    @classmethod
    def from_edges(cls, num_vertices: int, eu: Iterable[int], ev: Iterable[int],
                   labels: Optional[Iterable[Optional[str]]] = None) -> "Graph":
        eu = np.asarray(list(eu), dtype=np.int64)
        ev = np.asarray(list(ev), dtype=np.int64)
        m = len(eu)
        if m and (eu.min() < 0 or ev.min() < 0 or max(eu.max(), ev.max()) >= num_vertices):
            raise GraphError("edge endpoint out of range")
        if np.any(eu == ev):
            raise GraphError("self-loop")
        src = np.concatenate([eu, ev])
        dst = np.concatenate([ev, eu])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        # stable sort keeps each vertex's neighbours in edge-id order
        order = np.argsort(src, kind="stable")
        deg = np.bincount(src, minlength=num_vertices)
        indptr = np.zeros(num_vertices + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        labels = tuple(labels) if labels is not None else (None,) * num_vertices
        g = cls(num_vertices, eu, ev, indptr, dst[order].astype(np.int64), eid[order].astype(np.int64),
                labels, int(deg.max()) if num_vertices else 0)
        for a in (eu, ev, indptr, g.adj_vertex, g.adj_edge):
            a.setflags(write=False)
        return g

    @property
    def num_edges(self) -> int:
        return len(self.edge_u)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> list[tuple[int, int]]:
        """(neighbour, edge id) pairs of ``v``."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.adj_vertex[lo:hi].tolist(), self.adj_edge[lo:hi].tolist()))

    def endpoints(self, e: int) -> tuple[int, int]:
        return int(self.edge_u[e]), int(self.edge_v[e])

    def label(self, v: int) -> str:
        return self.labels[v] or ""

    def dump(self) -> str:
        lines = [f"vertices={self.num_vertices} edges={self.num_edges}"]
        lines += [f"{u} {w} {e}" for e, (u, w) in enumerate(zip(self.edge_u.tolist(), self.edge_v.tolist()))]
        return "\n".join(lines) + "\n"


def boundary_edges(g: Graph, A: Iterable[int]) -> set[int]:
    """Edges with exactly one endpoint in ``A``."""
    mask = np.zeros(g.num_vertices, dtype=bool)
    mask[list(A)] = True
    hit = mask[g.edge_u] != mask[g.edge_v]
    return set(np.flatnonzero(hit).tolist())


def is_connected(g: Graph) -> bool:
    if g.num_vertices == 0:
        return True
    indptr = g.indptr.tolist()
    adj = g.adj_vertex.tolist()
    seen = [False] * g.num_vertices
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for w in adj[indptr[v]:indptr[v + 1]]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == g.num_vertices
