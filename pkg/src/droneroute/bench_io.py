"""Instance files, instance generation and result tables.

Native format: JSON lines, one instance per line, with explicit matrices so
that a write/read round trip is bit-exact.  Agatz and Murray files are read
through adapters.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .instance import AssumptionProfile, Instance, from_coordinates

PathLike = Union[str, Path]


class ParseError(ValueError):
    def __init__(self, path, line: Optional[int], msg: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")
        self.path, self.line = path, line


# ---------------------------------------------------------------- native JSONL

def instance_to_dict(inst: Instance) -> dict:
    d = {
        "name": inst.name,
        "alpha": inst.alpha,
        "profile": inst.profile.to_dict(),
        "truck_time": inst.truck_time.tolist(),
        "drone_time": inst.drone_time.tolist(),
        "drone_eligible": inst.drone_eligible[1:-1].tolist(),
    }
    if inst.coords is not None:
        d["coords"] = inst.coords.tolist()
    return d


def instance_from_dict(d: dict) -> Instance:
    prof = AssumptionProfile.from_dict(d.get("profile", {}))
    if "truck_time" in d:
        return Instance(np.array(d["truck_time"], dtype=float), np.array(d["drone_time"], dtype=float),
                        prof, d.get("drone_eligible"), float(d.get("alpha", 1.0)),
                        d.get("name", "instance"), d.get("coords"))
    if "coords" not in d:
        raise ValueError("instance needs either matrices or coordinates")
    return from_coordinates(d["coords"], float(d.get("alpha", 1.0)), prof,
                            d.get("truck_metric", "euclidean"), d.get("drone_metric", "euclidean"),
                            float(d.get("truck_speed", 1.0)), d.get("drone_eligible"),
                            d.get("name", "instance"))


def write_instances(instances: Iterable[Instance], path: PathLike) -> None:
    with open(path, "w") as fh:
        for inst in instances:
            fh.write(json.dumps(instance_to_dict(inst)) + "\n")


def read_instances(path: PathLike) -> List[Instance]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(instance_from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(path, lineno, str(exc)) from exc
    return out


# ---------------------------------------------------------------- Agatz et al. files

_HEADER = re.compile(r"/\*(.*)\*/")


def parse_agatz(path: PathLike, range_pct: Optional[float] = None) -> Instance:
    """Read a TSPD benchmark file with ``/*...*/`` section headers.

    Sections: truck speed, drone speed, number of nodes (depot included),
    the depot line and one ``x y name`` line per customer.  ``range_pct``
    limits the drone's flight to that percentage of the largest pairwise
    distance; ``None`` or values of 200 and above mean unlimited range.
    """
    sections: dict = {}
    current = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            m = _HEADER.fullmatch(line)
            if m:
                current = m.group(1).strip().lower()
                sections[current] = []
                continue
            if current is None:
                raise ParseError(path, lineno, "data before the first section header")
            sections[current].append((lineno, line))

    def pick(*keys):
        for k, v in sections.items():
            if all(w in k for w in keys):
                return v
        raise ParseError(path, None, f"missing section containing {' '.join(keys)!r}")

    def number(rows, what):
        lineno, text = rows[0]
        try:
            return float(text.split()[0])
        except (ValueError, IndexError):
            raise ParseError(path, lineno, f"bad {what}: {text!r}") from None

    v_truck = number(pick("speed", "truck"), "truck speed")
    v_drone = number(pick("speed", "drone"), "drone speed")
    n_nodes = int(number(pick("number", "nodes"), "node count"))
    pts = []
    for lineno, text in pick("depot") + pick("locations"):
        parts = text.split()
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            raise ParseError(path, lineno, f"bad coordinate line: {text!r}") from None
    if len(pts) != n_nodes:
        raise ParseError(path, None, f"expected {n_nodes} nodes, found {len(pts)}")
    if not all(math.isfinite(c) for p in pts for c in p):
        raise ParseError(path, None, "non-finite coordinate")
    if v_truck <= 0 or v_drone <= 0:
        raise ParseError(path, None, "speeds must be positive")
    xy = np.array(pts)
    e = math.inf
    if range_pct is not None and range_pct < 200:
        diff = xy[:, None, :] - xy[None, :, :]
        dmax = float(np.sqrt((diff ** 2).sum(-1)).max())
        e = range_pct / 100.0 * dmax / v_drone
    return from_coordinates(xy, v_drone / v_truck, AssumptionProfile.tspd(e), truck_speed=v_truck,
                            name=Path(path).stem)


def write_agatz(inst: Instance, path: PathLike, truck_speed: float = 1.0) -> None:
    if inst.coords is None:
        raise ValueError("only coordinate-based instances can be written in this format")
    lines = ["/*The speed of the Truck*/", repr(float(truck_speed)),
             "/*The speed of the Drone*/", repr(float(truck_speed * inst.alpha)),
             "/*Number of Nodes*/", str(inst.n + 1),
             "/*The Depot*/", f"{float(inst.coords[0, 0])!r} {float(inst.coords[0, 1])!r} depot",
             "/*The Locations (x_coor y_coor name)*/"]
    lines += [f"{x!r} {y!r} loc{i}" for i, (x, y) in enumerate(inst.coords[1:].tolist(), 1)]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- Murray and Chu style sets

MURRAY_TRUCK_MPH = 25.0


def parse_murray(path: PathLike, drone_mph: float = 25.0, endurance_min: float = 20.0,
                 launch_min: float = 1.0, retrieval_min: float = 1.0) -> Instance:
    """Read an FSTSP instance directory.

    ``nodes.csv`` holds ``id,x,y,eligible`` rows in miles (depot first, an
    optional header line is skipped).  Optional ``tau.csv`` and
    ``tauprime.csv`` give truck and drone times in minutes and override the
    computed ones (Manhattan at 25 mph for the truck, Euclidean at
    ``drone_mph`` for the drone).
    """
    root = Path(path)
    nodes_file = root / "nodes.csv" if root.is_dir() else root
    rows = []
    with open(nodes_file) as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith(("%", "#")):
                continue
            try:
                nid, x, y = int(rec[0]), float(rec[1]), float(rec[2])
                elig = bool(int(rec[3])) if len(rec) > 3 and rec[3].strip() else True
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise ParseError(nodes_file, lineno, f"bad node row {rec!r}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError(nodes_file, lineno, "non-finite coordinate")
            rows.append((nid, x, y, elig))
    if len(rows) < 2:
        raise ParseError(nodes_file, None, "need a depot and at least one customer")
    xy = np.array([(x, y) for _, x, y, _ in rows])
    elig = [e for _, _, _, e in rows[1:]]
    prof = AssumptionProfile.fstsp(endurance_min, launch_min, retrieval_min)
    inst = from_coordinates(xy, drone_mph / MURRAY_TRUCK_MPH, prof, "manhattan", "euclidean",
                            MURRAY_TRUCK_MPH / 60.0, elig, root.name if root.is_dir() else root.stem)
    if root.is_dir():
        tt, dt = inst.truck_time, inst.drone_time
        n2 = inst.n + 2
        for fname, which in (("tau.csv", "truck"), ("tauprime.csv", "drone")):
            f = root / fname
            if not f.exists():
                continue
            m = np.loadtxt(f, delimiter=",", ndmin=2)
            if m.shape == (n2 - 1, n2 - 1):
                idx = list(range(n2 - 1)) + [0]
                m = m[np.ix_(idx, idx)]
            if m.shape != (n2, n2):
                raise ParseError(f, None, f"matrix shape {m.shape} does not fit {n2 - 2} customers")
            if np.isnan(m).any() or (m < 0).any():
                raise ParseError(f, None, "NaN or negative travel time")
            if which == "truck":
                tt = m
            else:
                dt = m
        inst = Instance(tt, dt, prof, inst.drone_eligible, inst.alpha, inst.name, inst.coords)
    return inst


def write_murray(inst: Instance, path: PathLike) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y", "eligible"])
        for i, (x, y) in enumerate(inst.coords.tolist()):
            w.writerow([i, repr(x), repr(y), int(bool(inst.drone_eligible[i])) if i else 0])


# ---------------------------------------------------------------- generator

KINDS = ("uniform", "single_center", "double_center")


def generate_instance(kind: str, n: int, alpha: float = 2.0, seed: int = 0,
                      profile: Optional[AssumptionProfile] = None,
                      eligible_frac: float = 1.0) -> Instance:
    """Random Euclidean instance.

    Customers: ``uniform`` draws from [0,100]^2; ``single_center`` puts them
    around (50, 50) with a uniform angle and a normally distributed radius
    (sd 25); ``double_center`` does the same around (25, 50) and (75, 50).
    The depot is drawn from [0,1]^2, the lower left corner.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    rng = np.random.default_rng(seed)
    depot = rng.uniform(0.0, 1.0, 2)
    if kind == "uniform":
        cust = rng.uniform(0.0, 100.0, (n, 2))
    else:
        centers = np.array([[50.0, 50.0]]) if kind == "single_center" else np.array([[25.0, 50.0], [75.0, 50.0]])
        which = rng.integers(0, len(centers), n)
        ang = rng.uniform(0.0, 2 * math.pi, n)
        rad = np.abs(rng.normal(0.0, 25.0, n))
        cust = centers[which] + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    elig = None
    if eligible_frac < 1.0:
        k = int(round(eligible_frac * n))
        elig = np.zeros(n, dtype=bool)
        elig[rng.permutation(n)[:k]] = True
    return from_coordinates(np.vstack([depot, cust]), alpha, profile or AssumptionProfile.tspd(),
                            drone_eligible=elig, name=f"{kind}-n{n}-s{seed}")


def load_instance(path: PathLike, **kw) -> List[Instance]:
    """Dispatch on file shape: ``.jsonl``/``.json`` native, directories and
    ``nodes.csv`` as Murray sets, anything else as an Agatz file."""
    p = Path(path)
    if p.is_dir() or p.name == "nodes.csv":
        return [parse_murray(p, **{k: v for k, v in kw.items() if k in
                                   ("drone_mph", "endurance_min", "launch_min", "retrieval_min")})]
    if p.suffix in (".jsonl", ".json"):
        return read_instances(p)
    return [parse_agatz(p, kw.get("range_pct"))]


# ---------------------------------------------------------------- reports

@dataclass
class RunRecord:
    instance: str
    variant: str
    seeds: List[int]
    costs: List[float]
    times: List[float]
    iterations: List[int]
    baseline: Optional[float] = None
    trace_path: Optional[str] = None
    best_genes: Optional[str] = None

    def __post_init__(self):
        if not self.costs or len(self.costs) != len(self.times):
            raise ValueError("need one time per cost and at least one run")

    @property
    def best(self) -> float:
        return min(self.costs)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.costs)

    @property
    def time(self) -> float:
        return statistics.fmean(self.times)

    @property
    def gap(self) -> Optional[float]:
        return gap(self.best, self.baseline) if self.baseline else None


def gap(z: float, ref: float) -> float:
    """Percentage gap of ``z`` relative to ``ref``."""
    return (z - ref) / ref * 100.0


REPORT_COLUMNS = ("instance", "variant", "runs", "best", "mean", "time", "gap")


def _rows(records: Sequence[RunRecord]):
    for r in records:
        yield [r.instance, r.variant, str(len(r.costs)), f"{r.best:.2f}", f"{r.mean:.2f}",
               f"{r.time:.2f}", "" if r.gap is None else f"{r.gap:+.2f}"]
    if records:
        gaps = [r.gap for r in records if r.gap is not None]
        yield ["AVERAGE", "", str(sum(len(r.costs) for r in records)),
               f"{statistics.fmean(r.best for r in records):.2f}",
               f"{statistics.fmean(r.mean for r in records):.2f}",
               f"{statistics.fmean(r.time for r in records):.2f}",
               f"{statistics.fmean(gaps):+.2f}" if gaps else ""]


def render_report(records: Sequence[RunRecord], fmt: str = "csv") -> str:
    rows = list(_rows(records))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "table":
        table = [list(REPORT_COLUMNS)] + rows
        widths = [max(len(r[i]) for r in table) for i in range(len(REPORT_COLUMNS))]
        lines = ["  ".join(c.rjust(w) if i >= 2 else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
                 for r in table]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(records: Sequence[RunRecord], path: PathLike, fmt: str = "csv") -> None:
    text = render_report(records, fmt)
    Path(path).write_text(text)


def write_trace(trace: Sequence[dict], path: PathLike) -> None:
    with open(path, "w") as fh:
        for rec in trace:
            fh.write(json.dumps(rec) + "\n")


def read_trace(path: PathLike) -> List[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
