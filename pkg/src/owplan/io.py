"""JSON/CSV file formats and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from . import __version__
from .bounds import ConnectivityCertificate, HiddenSetCertificate
from .errors import ValidationError
from .geometry import Layout, Point
from .planner_mcc import CoverageReport, Deployment


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj: Any) -> None:
    _atomic_write(path, dumps(obj))


def read_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def write_csv(path, header: list[str], rows: Iterable[Iterable[Any]]) -> None:
    lines = []

    class _Sink:
        def write(self, s):
            lines.append(s)

    w = csv.writer(_Sink(), lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    _atomic_write(path, "".join(lines))


# --------------------------------------------------------------------------
# layouts
# --------------------------------------------------------------------------


def layout_to_json(L: Layout) -> dict:
    return {"name": L.name, "vertices": [[v.x, v.y] for v in L.vertices]}


def layout_from_json(data: dict) -> Layout:
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValidationError("layout JSON needs a 'vertices' list")
    try:
        verts = [(float(x), float(y)) for x, y in data["vertices"]]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad vertex list: {exc}") from exc
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        return Layout.from_coords(verts, str(data.get("name", "layout")))


def load_layout(path) -> Layout:
    return layout_from_json(read_json(path))


def save_layout(path, L: Layout) -> None:
    write_json(path, layout_to_json(L))


# --------------------------------------------------------------------------
# deployments and certificates
# --------------------------------------------------------------------------


def deployment_to_json(d: Deployment) -> dict:
    out = {"method": d.method, "r": d.r, "layout": d.layout_name,
           "aps": [[p.x, p.y] for p in d.aps], "sources": list(d.sources)}
    if d.coverage is not None:
        out["coverage"] = d.coverage.to_json()
    for k, v in sorted(d.extra.items()):
        out[k] = v
    return out


def deployment_from_json(data: dict) -> Deployment:
    try:
        d = Deployment([tuple(map(float, p)) for p in data["aps"]], data["method"], float(data["r"]),
                       data.get("layout", ""), list(data.get("sources") or []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad deployment JSON: {exc}") from exc
    cov = data.get("coverage")
    if cov:
        from .geometry import Region
        d.coverage = CoverageReport(bool(cov["covered"]), float(cov["outage_area"]), Region(),
                                    float(cov["outage_fraction"]))
    known = {"method", "r", "layout", "aps", "sources", "coverage"}
    d.extra = {k: v for k, v in data.items() if k not in known}
    return d


def load_deployment(path) -> Deployment:
    return deployment_from_json(read_json(path))


def hidden_certificate_from_json(data: dict) -> HiddenSetCertificate:
    return HiddenSetCertificate(tuple(Point(*map(float, p)) for p in data["points"]),
                                tuple(int(i) for i in data.get("node_ids", ())))


def connectivity_certificate_from_json(data: dict) -> ConnectivityCertificate:
    return ConnectivityCertificate(tuple(Point(*map(float, p)) for p in data["points"]),
                                   tuple(int(b) for b in data["b"]))


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    inputs: dict[str, str]
    config: dict[str, Any]
    seeds: list[int] = field(default_factory=list)
    version: str = __version__
    timestamp: str = ""

    def __post_init__(self):
        if not self.timestamp:
            # SOURCE_DATE_EPOCH pins the stamp for reproducible reruns
            epoch = os.environ.get("SOURCE_DATE_EPOCH")
            t = int(epoch) if epoch and epoch.isdigit() else int(time.time())
            self.timestamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_json(self) -> dict:
        out = asdict(self)
        out["config_hash"] = self.config_hash
        return out

    def write_beside(self, out_path) -> Path:
        p = Path(str(out_path) + ".manifest.json")
        write_json(p, self.to_json())
        return p

    @classmethod
    def for_inputs(cls, command: str, paths: dict[str, str | None], config: dict, seeds=()) -> "RunManifest":
        inputs = {k: f"{v}#sha256={file_digest(v)}" for k, v in sorted(paths.items()) if v}
        return cls(command, inputs, config, list(seeds))
