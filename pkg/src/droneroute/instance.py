"""Problem instances: travel-time matrices and assumption profiles.

Node indexing is ``0`` for the start depot, ``1..n`` for customers and
``n + 1`` for the return depot (written ``0'`` in reports).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np


class ProblemKind(str, enum.Enum):
    TSPD = "TSPD"
    FSTSP = "FSTSP"


@dataclass(frozen=True)
class AssumptionProfile:
    problem_kind: ProblemKind = ProblemKind.TSPD
    endurance: float = math.inf
    launch_setup: float = 0.0
    retrieval: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "problem_kind", ProblemKind(self.problem_kind))
        if self.endurance < 0 or self.launch_setup < 0 or self.retrieval < 0:
            raise ValueError("endurance and service times must be nonnegative")
        if self.problem_kind is ProblemKind.TSPD and (self.launch_setup or self.retrieval):
            raise ValueError("TSPD profiles have no launch/retrieval times")

    @classmethod
    def tspd(cls, endurance: float = math.inf) -> "AssumptionProfile":
        return cls(ProblemKind.TSPD, endurance)

    @classmethod
    def fstsp(cls, endurance: float = math.inf, launch_setup: float = 1.0,
              retrieval: float = 1.0) -> "AssumptionProfile":
        return cls(ProblemKind.FSTSP, endurance, launch_setup, retrieval)

    @property
    def is_fstsp(self) -> bool:
        return self.problem_kind is ProblemKind.FSTSP

    @property
    def allow_land_at_launch_node(self) -> bool:
        return not self.is_fstsp

    @property
    def stationary_truck_rendezvous(self) -> bool:
        return not self.is_fstsp

    @property
    def limited_range(self) -> bool:
        return math.isfinite(self.endurance)

    def to_dict(self) -> dict:
        return {
            "problem_kind": self.problem_kind.value,
            "endurance": None if math.isinf(self.endurance) else self.endurance,
            "launch_setup": self.launch_setup,
            "retrieval": self.retrieval,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssumptionProfile":
        e = d.get("endurance")
        return cls(ProblemKind(d.get("problem_kind", "TSPD")),
                   math.inf if e is None else float(e),
                   float(d.get("launch_setup", 0.0)),
                   float(d.get("retrieval", 0.0)))


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable TSPD/FSTSP instance.

    ``truck_time`` and ``drone_time`` are ``(n+2) x (n+2)`` arrays; they need
    not be symmetric or metric.
    """

    truck_time: np.ndarray
    drone_time: np.ndarray
    profile: AssumptionProfile = field(default_factory=AssumptionProfile)
    drone_eligible: Optional[np.ndarray] = None
    alpha: float = 1.0
    name: str = "instance"
    coords: Optional[np.ndarray] = None

    def __post_init__(self):
        tt = np.array(self.truck_time, dtype=float)
        dt = np.array(self.drone_time, dtype=float)
        if tt.ndim != 2 or tt.shape[0] != tt.shape[1] or tt.shape[0] < 3:
            raise ValueError("truck_time must be a square matrix over {0, 1..n, 0'}")
        if dt.shape != tt.shape:
            raise ValueError("drone_time must have the same shape as truck_time")
        for label, m in (("truck_time", tt), ("drone_time", dt)):
            if np.isnan(m).any() or (m < 0).any():
                raise ValueError(f"{label} contains NaN or negative entries")
            if np.any(np.diag(m) != 0):
                raise ValueError(f"{label} must have a zero diagonal")
        n = tt.shape[0] - 2
        if not (math.isfinite(tt[0, n + 1]) and math.isfinite(dt[0, n + 1])):
            raise ValueError("depot-to-depot times must be finite")
        elig = np.ones(n + 2, dtype=bool) if self.drone_eligible is None \
            else np.asarray(self.drone_eligible, dtype=bool).copy()
        if elig.shape == (n,):
            elig = np.concatenate([[False], elig, [False]])
        if elig.shape != (n + 2,):
            raise ValueError("drone_eligible must have length n or n+2")
        elig[0] = elig[n + 1] = False
        tt.setflags(write=False)
        dt.setflags(write=False)
        elig.setflags(write=False)
        object.__setattr__(self, "truck_time", tt)
        object.__setattr__(self, "drone_time", dt)
        object.__setattr__(self, "drone_eligible", elig)
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.truck_time.shape[0] - 2

    @property
    def end_depot(self) -> int:
        return self.n + 1

    # plain nested lists index much faster than ndarrays in scalar loops
    @cached_property
    def T(self) -> list:
        return self.truck_time.tolist()

    @cached_property
    def D(self) -> list:
        return self.drone_time.tolist()

    @cached_property
    def eligible(self) -> list:
        return self.drone_eligible.tolist()

    def truck_leg_time(self, path: Sequence[int]) -> float:
        """Truck time along ``path``, visiting every node in order."""
        if len(path) < 1:
            raise ValueError("path must contain at least one node")
        for v in path:
            if not 0 <= v <= self.n + 1:
                raise IndexError(f"invalid node index {v}")
        T = self.T
        return float(sum(T[a][b] for a, b in zip(path, path[1:])))

    def operation_time(self, i: int, chain: Sequence[int], k: int,
                       relaunch_at_k: bool = False, truck_path: Optional[Sequence[int]] = None) -> float:
        """Duration of the drone operation ``<i, chain, k>``.

        ``truck_path`` is the truck's node sequence from ``i`` to ``k``; when
        omitted the truck drives ``i -> k`` directly.
        """
        if len(chain) == 0:
            raise ValueError("drone chain must be non-empty")
        truck = self.truck_leg_time(truck_path if truck_path is not None else [i, k])
        D = self.D
        hops = [i, *chain, k]
        drone = sum(D[a][b] for a, b in zip(hops, hops[1:]))
        p = self.profile
        if p.is_fstsp:
            return max(truck + p.retrieval + (p.launch_setup if relaunch_at_k else 0.0),
                       drone + p.retrieval)
        return max(truck, drone)

    def with_profile(self, profile: AssumptionProfile) -> "Instance":
        return Instance(self.truck_time, self.drone_time, profile, self.drone_eligible,
                        self.alpha, self.name, self.coords)

    def nearest(self, metric: str = "truck") -> list:
        """Customers sorted by closeness to each node (rows indexed by node)."""
        m = self.truck_time if metric == "truck" else self.drone_time
        n = self.n
        sub = m[: n + 1, 1 : n + 1] + m[1 : n + 1, : n + 1].T
        order = np.argsort(sub, axis=1, kind="stable") + 1
        out = []
        for v in range(n + 1):
            row = [int(c) for c in order[v] if c != v]
            out.append(row)
        return out


def from_coordinates(coords, alpha: float = 1.0, profile: Optional[AssumptionProfile] = None,
                     truck_metric: str = "euclidean", drone_metric: str = "euclidean",
                     truck_speed: float = 1.0, drone_eligible=None, name: str = "instance") -> Instance:
    """Build an instance from depot + customer coordinates.

    ``coords[0]`` is the depot; the return depot reuses its location.
    Truck times are ``distance / truck_speed`` and drone times
    ``distance / (alpha * truck_speed)``.
    """
    xy = np.asarray(coords, dtype=float)
    pts = np.vstack([xy, xy[:1]])
    diff = pts[:, None, :] - pts[None, :, :]
    dist = {
        "euclidean": np.sqrt((diff ** 2).sum(-1)),
        "manhattan": np.abs(diff).sum(-1),
    }
    tt = dist[truck_metric] / truck_speed
    dt = dist[drone_metric] / (truck_speed * alpha)
    return Instance(tt, dt, profile or AssumptionProfile.tspd(), drone_eligible,
                    alpha, name, xy)


def worked_example() -> Instance:
    """Five-customer network of the worked TSP vs TSPD example.

    Arc labels give truck times on the TSP tour 0-1-2-3-4-5-0 and the truck
    shortcuts 0-2, 2-4, 4-0; the remaining truck entries are the shortest-path
    closure of those arcs.  Drone times are half the truck times (alpha = 2),
    which reproduces every drone label of the example.
    """
    n = 5
    arcs = {(0, 1): 7, (1, 2): 6, (2, 3): 8, (3, 4): 6, (4, 5): 7, (5, 0): 5,
            (0, 2): 10, (2, 4): 6, (4, 0): 8}
    w = np.full((n + 1, n + 1), np.inf)
    np.fill_diagonal(w, 0.0)
    for (a, b), t in arcs.items():
        w[a, b] = w[b, a] = t
    for k in range(n + 1):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    full = np.zeros((n + 2, n + 2))
    idx = list(range(n + 1)) + [0]
    full[:, :] = w[np.ix_(idx, idx)]
    return Instance(full, full / 2.0, AssumptionProfile.tspd(), None, 2.0, "worked-example")
