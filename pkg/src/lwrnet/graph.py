"""Directed networks in which every node observes at most one neighbor.

A node's *parent* is the neighbor whose belief it reads, so edges point
parent -> child. Every weakly connected component is either a rooted tree
(a single parentless root) or a directed circle with trees hanging off it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class Network:
    parent: tuple

    def __post_init__(self):
        parent = tuple(None if p is None else int(p) for p in self.parent)
        n = len(parent)
        for i, p in enumerate(parent):
            if p is None:
                continue
            if p == i:
                raise ValueError(f"node {i}: self-loops are not allowed")
            if not 0 <= p < n:
                raise ValueError(f"node {i}: parent {p} out of range [0, {n})")
        object.__setattr__(self, "parent", parent)

    @property
    def n(self) -> int:
        return len(self.parent)

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "Network":
        """Build from ``(j, i)`` pairs meaning *i observes j*."""
        parent: list[Optional[int]] = [None] * n
        for j, i in edges:
            if parent[i] is not None:
                raise ValueError(f"node {i} would have in-degree 2 ({parent[i]} and {j})")
            parent[i] = j
        return cls(tuple(parent))

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for i, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(i)
        return kids


@dataclass(frozen=True)
class Component:
    nodes: tuple
    kind: str  # "isolated", "tree", "circle" or "hybrid"
    circle: tuple  # parent -> child order, starting at the smallest node; empty for trees

    @property
    def has_circle(self) -> bool:
        return bool(self.circle)


@dataclass(frozen=True)
class Shape:
    components: tuple
    depth: tuple
    anchor: tuple  # root or circle node where each node's parent chain ends
    component_of: tuple

    @property
    def circles(self) -> list[tuple]:
        return [c.circle for c in self.components if c.has_circle]

    @property
    def kind(self) -> str:
        return "single-circle" if self.circles else "forest"

    @property
    def circle_nodes(self) -> tuple:
        """The circle of the network; empty for forests.

        Raises if several components each carry a circle; use ``components`` then.
        """
        circles = self.circles
        if len(circles) > 1:
            raise ValueError("network has more than one circle; inspect components instead")
        return circles[0] if circles else ()

    def circle_of(self, i: int) -> tuple:
        return self.components[self.component_of[i]].circle

    def on_circle(self, i: int) -> bool:
        return self.depth[i] == 0 and i in self.circle_of(i)


def _find_circles(net: Network) -> list[list[int]]:
    # colour: 0 unvisited, 1 on current walk, 2 finished
    colour = [0] * net.n
    circles = []
    for start in range(net.n):
        walk = []
        node = start
        while node is not None and colour[node] == 0:
            colour[node] = 1
            walk.append(node)
            node = net.parent[node]
        if node is not None and colour[node] == 1:
            # walked back into the current walk: the tail from `node` is a circle
            cyc = walk[walk.index(node):]
            circles.append(cyc)
        for w in walk:
            colour[w] = 2
    return circles


def _child_order(cycle_parent_walk: list[int]) -> tuple:
    # walks follow parent pointers (child -> parent); reverse for parent -> child
    order = list(reversed(cycle_parent_walk))
    k = order.index(min(order))
    return tuple(order[k:] + order[:k])


def classify(net: Network) -> Shape:
    """Split ``net`` into weakly connected components and locate circles and depths."""
    n = net.n
    circles = [_child_order(c) for c in _find_circles(net)]
    on_circle = {v for c in circles for v in c}

    depth: list[Optional[int]] = [None] * n
    anchor: list[Optional[int]] = [None] * n
    for i in range(n):
        if i in on_circle or net.parent[i] is None:
            depth[i] = 0
            anchor[i] = i
    for i in range(n):
        if depth[i] is not None:
            continue
        chain = []
        node = i
        while depth[node] is None:
            chain.append(node)
            node = net.parent[node]
        for node_in_chain in reversed(chain):
            p = net.parent[node_in_chain]
            depth[node_in_chain] = depth[p] + 1
            anchor[node_in_chain] = anchor[p]

    # components are grouped by the anchor's root/circle
    key_of = {}
    for c in circles:
        for v in c:
            key_of[v] = c[0]
    groups: dict[int, list[int]] = {}
    for i in range(n):
        a = anchor[i]
        groups.setdefault(key_of.get(a, a), []).append(i)

    components = []
    circle_by_key = {c[0]: c for c in circles}
    for key in sorted(groups, key=lambda k: min(groups[k])):
        nodes = tuple(sorted(groups[key]))
        circle = circle_by_key.get(key, ())
        if circle:
            kind = "circle" if len(nodes) == len(circle) else "hybrid"
        else:
            kind = "isolated" if len(nodes) == 1 else "tree"
        components.append(Component(nodes, kind, circle))

    component_of = [0] * n
    for idx, comp in enumerate(components):
        for v in comp.nodes:
            component_of[v] = idx
    return Shape(tuple(components), tuple(depth), tuple(anchor), tuple(component_of))


def reachable_ancestors(net: Network, i: int) -> set[int]:
    """Node ``i`` plus every node whose signals reach ``i`` through parent links."""
    if not 0 <= i < net.n:
        raise IndexError(f"node {i} out of range [0, {net.n})")
    seen = {i}
    node = net.parent[i]
    while node is not None and node not in seen:
        seen.add(node)
        node = net.parent[node]
    return seen


def circle_order_from(net: Network, shape: Shape, i: int) -> tuple:
    """Circle nodes in the order signals travel to ``i``, ending with ``i``."""
    circle = shape.circle_of(i) if 0 <= i < net.n else ()
    if i not in circle:
        raise ValueError(f"node {i} is not on a circle")
    k = circle.index(i)
    return circle[k + 1:] + circle[:k + 1]
