"""SE(2) pose graph: keyframe nodes, odometry/loop edges, LM optimization.

Edge residual: r = [R(-theta_i)(t_j - t_i) - t_ij, wrap(theta_j - theta_i
- theta_ij)], weighted by the edge's 3x3 information matrix.  Node 0 is the
gauge and never moves.  Accepted Levenberg-Marquardt steps never increase
the total weighted error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.types import PlanarPose, wrap_angle

MAX_LM_ITERATIONS = 100
STEP_NORM_TOL = 1e-8


class NotConnected(Exception):
    pass


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    measurement: PlanarPose
    information: np.ndarray
    kind: str = "odometry"  # "odometry" | "loop"

    def __post_init__(self):
        info = np.asarray(self.information, np.float64)
        if info.shape != (3, 3):
            raise ValueError("information must be 3x3")
        sym = 0.5 * (info + info.T)
        if np.linalg.eigvalsh(sym).min() <= 0:
            raise ValueError("information must be symmetric positive definite")
        object.__setattr__(self, "information", sym)


@dataclass
class PoseGraph:
    nodes: dict[int, PlanarPose] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)

    def add_node(self, node_id: int, pose: PlanarPose) -> None:
        self.nodes[node_id] = pose

    def add_edge(self, edge: Edge) -> None:
        if edge.i not in self.nodes or edge.j not in self.nodes:
            raise KeyError("edge endpoints must be existing nodes")
        self.edges.append(edge)

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        ids = set(self.nodes)
        adj: dict[int, set[int]] = {i: set() for i in ids}
        for e in self.edges:
            adj[e.i].add(e.j)
            adj[e.j].add(e.i)
        seen = set()
        stack = [next(iter(ids))]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(adj[u] - seen)
        return seen == ids

    def total_error(self) -> float:
        return sum(
            float(r @ e.information @ r) for e, r in zip(self.edges, self._residuals())
        )

    def _residuals(self):
        out = []
        for e in self.edges:
            pi, pj = self.nodes[e.i], self.nodes[e.j]
            c, s = math.cos(pi.theta), math.sin(pi.theta)
            dx, dy = pj.x - pi.x, pj.y - pi.y
            out.append(
                np.array(
                    [
                        c * dx + s * dy - e.measurement.x,
                        -s * dx + c * dy - e.measurement.y,
                        wrap_angle(pj.theta - pi.theta - e.measurement.theta),
                    ]
                )
            )
        return out

    def dump(self, path) -> None:
        """g2o-style line format: VERTEX_SE2 / EDGE_SE2 records."""
        with open(path, "w") as f:
            for nid in sorted(self.nodes):
                p = self.nodes[nid]
                f.write(f"VERTEX_SE2 {nid} {p.x:.9f} {p.y:.9f} {p.theta:.9f}\n")
            for e in self.edges:
                m = e.measurement
                info = e.information
                upper = (
                    info[0, 0], info[0, 1], info[0, 2],
                    info[1, 1], info[1, 2], info[2, 2],
                )
                vals = " ".join(f"{v:.9f}" for v in upper)
                f.write(
                    f"EDGE_SE2 {e.i} {e.j} {m.x:.9f} {m.y:.9f} {m.theta:.9f} {vals}\n"
                )

    @staticmethod
    def parse(path) -> "PoseGraph":
        g = PoseGraph()
        with open(path) as f:
            for line in f:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "VERTEX_SE2":
                    g.add_node(int(parts[1]), PlanarPose(*map(float, parts[2:5])))
                elif parts[0] == "EDGE_SE2":
                    i, j = int(parts[1]), int(parts[2])
                    m = PlanarPose(*map(float, parts[3:6]))
                    u = list(map(float, parts[6:12]))
                    info = np.array(
                        [
                            [u[0], u[1], u[2]],
                            [u[1], u[3], u[4]],
                            [u[2], u[4], u[5]],
                        ]
                    )
                    g.add_edge(Edge(i=i, j=j, measurement=m, information=info))
        return g


def _edge_jacobians(pi: PlanarPose, pj: PlanarPose):
    """d(residual)/d(xi, yi, thi) and d/d(xj, yj, thj)."""
    c, s = math.cos(pi.theta), math.sin(pi.theta)
    dx, dy = pj.x - pi.x, pj.y - pi.y
    Ji = np.array(
        [
            [-c, -s, -s * dx + c * dy],
            [s, -c, -c * dx - s * dy],
            [0.0, 0.0, -1.0],
        ]
    )
    Jj = np.array(
        [
            [c, s, 0.0],
            [-s, c, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return Ji, Jj


def optimize_graph(
    g: PoseGraph,
    max_iterations: int = MAX_LM_ITERATIONS,
    step_tol: float = STEP_NORM_TOL,
) -> PoseGraph:
    """Levenberg-Marquardt over all node poses with node 0 held fixed.

    Returns a new graph; the input is untouched.  The total weighted error
    is non-increasing across accepted steps by construction.
    """
    if not g.is_connected():
        raise NotConnected("pose graph is not connected")
    ids = sorted(g.nodes)
    if len(ids) <= 1 or not g.edges:
        return PoseGraph(nodes=dict(g.nodes), edges=list(g.edges))

    gauge = ids[0]
    free = [i for i in ids if i != gauge]
    index = {nid: k for k, nid in enumerate(free)}
    poses = dict(g.nodes)

    def build(poses_now):
        dim = 3 * len(free)
        Hm = np.zeros((dim, dim))
        b = np.zeros(dim)
        err = 0.0
        for e in g.edges:
            pi, pj = poses_now[e.i], poses_now[e.j]
            c, s = math.cos(pi.theta), math.sin(pi.theta)
            dx, dy = pj.x - pi.x, pj.y - pi.y
            r = np.array(
                [
                    c * dx + s * dy - e.measurement.x,
                    -s * dx + c * dy - e.measurement.y,
                    wrap_angle(pj.theta - pi.theta - e.measurement.theta),
                ]
            )
            err += float(r @ e.information @ r)
            Ji, Jj = _edge_jacobians(pi, pj)
            blocks = []
            if e.i != gauge:
                blocks.append((index[e.i], Ji))
            if e.j != gauge:
                blocks.append((index[e.j], Jj))
            for ka, Ja in blocks:
                b[3 * ka : 3 * ka + 3] += Ja.T @ e.information @ r
                for kb, Jb in blocks:
                    Hm[3 * ka : 3 * ka + 3, 3 * kb : 3 * kb + 3] += (
                        Ja.T @ e.information @ Jb
                    )
        return Hm, b, err

    lam = 1e-6
    Hm, b, err = build(poses)
    for _ in range(max_iterations):
        try:
            step = np.linalg.solve(Hm + lam * np.diag(np.diag(Hm)) + 1e-12 * np.eye(len(b)), -b)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        cand = dict(poses)
        for nid, k in index.items():
            p = poses[nid]
            cand[nid] = PlanarPose(
                p.x + step[3 * k], p.y + step[3 * k + 1], wrap_angle(p.theta + step[3 * k + 2])
            )
        H2, b2, err2 = build(cand)
        if err2 <= err:
            poses = cand
            Hm, b, err = H2, b2, err2
            lam = max(lam * 0.5, 1e-9)
            if np.abs(step).max() < step_tol:
                break
        else:
            lam *= 10.0
            if lam > 1e8:
                break
    return PoseGraph(nodes=poses, edges=list(g.edges))
