"""Serialization of regions, tables and run metadata for the CLI and HTTP service."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import pandas as pd

from relaying import __version__
from relaying.errors import InvalidArgumentError
from relaying.rate_region import RatePair, RateRegion

FLOAT_FORMAT = "%.17g"
REGION_COLUMNS = ["r_a", "r_b"]


def metadata(command: str, parameters: Mapping[str, Any]) -> Dict[str, Any]:
    """Reproducibility block: tool version and every resolved parameter."""
    return {"tool": "relaying", "version": __version__, "command": command, "parameters": dict(parameters)}


def region_to_frame(region: RateRegion) -> pd.DataFrame:
    return pd.DataFrame(region.points(), columns=REGION_COLUMNS)


def region_to_csv(region: RateRegion) -> str:
    return region_to_frame(region).to_csv(index=False, float_format=FLOAT_FORMAT)


def region_from_csv(text: str) -> RateRegion:
    df = pd.read_csv(io.StringIO(text), float_precision="round_trip")
    if list(df.columns) != REGION_COLUMNS:
        raise InvalidArgumentError(f"region CSV needs columns {REGION_COLUMNS}, got {list(df.columns)}",
                                   parameter="region")
    return RateRegion(tuple(RatePair(float(a), float(b)) for a, b in df.itertuples(index=False)))


def region_payload(region: RateRegion) -> Dict[str, Any]:
    return {"vertices": [list(p) for p in region.points()], "area": region.area()}


def region_to_json(region: RateRegion, meta: Optional[Mapping[str, Any]] = None) -> str:
    payload = region_payload(region)
    if meta is not None:
        payload = {"metadata": dict(meta), **payload}
    return json.dumps(payload, indent=2)


def region_from_json(text: str) -> RateRegion:
    """Bare `[[r_a, r_b], ...]` array or the `{"vertices": ...}` payload."""
    payload = json.loads(text)
    vertices = payload.get("vertices") if isinstance(payload, dict) else payload
    if not isinstance(vertices, list):
        raise InvalidArgumentError("region JSON has no vertices list", parameter="region")
    try:
        points = [(float(a), float(b)) for a, b in vertices]
    except (TypeError, ValueError):
        raise InvalidArgumentError("region vertices must be [r_a, r_b] pairs", parameter="region") from None
    if isinstance(payload, list):
        # external arrays may use any vertex order
        return RateRegion.from_points(points)
    return RateRegion(tuple(RatePair(a, b) for a, b in points))


def table_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format=FLOAT_FORMAT)


def table_to_json(df: pd.DataFrame, meta: Optional[Mapping[str, Any]] = None) -> str:
    records: List[Dict[str, Any]] = df.astype(object).where(df.notna(), None).to_dict(orient="records")
    payload: Dict[str, Any] = {"rows": records}
    if meta is not None:
        payload = {"metadata": dict(meta), **payload}
    return json.dumps(payload, indent=2)


def to_json(payload: Mapping[str, Any], meta: Optional[Mapping[str, Any]] = None) -> str:
    if meta is not None:
        payload = {"metadata": dict(meta), **payload}
    return json.dumps(payload, indent=2)


def write_atomic(path: str | Path, text: str) -> None:
    """Write next to the destination, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
