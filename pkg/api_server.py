import logging
from typing import List, Optional, Tuple

from fastapi import FastAPI, Header, HTTPException
from pydantic import BaseModel, Field, ValidationError

from relaying import __version__, config
from relaying.channel_model import ChannelGains, Protocol, gaussian_mi_table
from relaying.errors import InvalidArgumentError, RelayBoundsError
from relaying.lp_optimizer import optimize_schedule, optimized_region
from relaying.protocol_bounds import BoundKind, PhaseSchedule, fixed_delta_region
from relaying.rate_region import exists_point_outside
from utils.output_utils import region_payload

logger = logging.getLogger("relaying.api")

# ---------- FastAPI ----------
app = FastAPI(title="Relay Bounds API", version=__version__)


class GainsDb(BaseModel):
    p_db: float
    g_ab_db: float
    g_ar_db: float
    g_br_db: float

    def linear(self) -> ChannelGains:
        return ChannelGains.from_db(self.p_db, self.g_ab_db, self.g_ar_db, self.g_br_db)


class RegionRequest(BaseModel):
    gains: GainsDb
    protocol: Protocol
    bound: str = "inner"
    delta: Optional[List[float]] = None   # omitted -> optimized over all schedules
    mu_grid_size: Optional[int] = None


class RegionResponse(BaseModel):
    vertices: List[Tuple[float, float]]
    area: float


class OptimizeRequest(BaseModel):
    gains: GainsDb
    protocol: Protocol
    bound: str = "inner"
    mu: float = Field(default=0.5, ge=0, le=1)


class OptimizeResponse(BaseModel):
    durations: List[float]
    r_a: float
    r_b: float
    value: float
    sum_rate: float


class CompareRequest(BaseModel):
    gains: GainsDb
    a: str = "hbc:inner"
    b: str = "tdbc:outer"
    mu_grid_size: Optional[int] = None
    tol: float = 1e-9


class CompareResponse(BaseModel):
    contained: bool
    witness: Optional[Tuple[float, float]] = None


def _check_key(x_api_key: Optional[str]) -> None:
    if x_api_key != config.API_KEY:
        raise HTTPException(status_code=401, detail="Invalid API key")


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, (InvalidArgumentError, ValidationError)):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=409, detail=str(exc))


def _protocol_bound(text: str) -> Tuple[Protocol, BoundKind]:
    name, _, bound = text.partition(":")
    try:
        proto = Protocol(name.strip().lower())
    except ValueError:
        raise InvalidArgumentError(f"unknown protocol {name!r}", parameter="protocol") from None
    return proto, BoundKind.parse(bound or "inner")


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/region", response_model=RegionResponse)
def region(req: RegionRequest, x_api_key: Optional[str] = Header(None)):
    _check_key(x_api_key)
    try:
        bound = BoundKind.parse(req.bound)
        mi = gaussian_mi_table(req.gains.linear(), req.protocol)
        if req.delta is None:
            result = optimized_region(req.protocol, bound, mi, req.mu_grid_size)
        else:
            sched = PhaseSchedule(protocol=req.protocol, durations=tuple(req.delta))
            result = fixed_delta_region(req.protocol, bound, mi, sched)
    except (RelayBoundsError, ValidationError) as exc:
        raise _http_error(exc)
    return RegionResponse(**region_payload(result))


@app.post("/optimize", response_model=OptimizeResponse)
def optimize(req: OptimizeRequest, x_api_key: Optional[str] = Header(None)):
    _check_key(x_api_key)
    try:
        mi = gaussian_mi_table(req.gains.linear(), req.protocol)
        optimum = optimize_schedule(req.protocol, BoundKind.parse(req.bound), mi, req.mu)
    except (RelayBoundsError, ValidationError) as exc:
        raise _http_error(exc)
    return OptimizeResponse(
        durations=list(optimum.schedule.durations),
        r_a=optimum.rates.r_a,
        r_b=optimum.rates.r_b,
        value=optimum.value,
        sum_rate=optimum.sum_rate,
    )


@app.post("/compare", response_model=CompareResponse)
def compare(req: CompareRequest, x_api_key: Optional[str] = Header(None)):
    _check_key(x_api_key)
    try:
        gains = req.gains.linear()
        regions = []
        for text in (req.a, req.b):
            proto, bound = _protocol_bound(text)
            regions.append(optimized_region(proto, bound, gaussian_mi_table(gains, proto), req.mu_grid_size))
        witness = exists_point_outside(regions[0], regions[1], req.tol)
    except (RelayBoundsError, ValidationError) as exc:
        raise _http_error(exc)
    logger.info("compare %s vs %s -> %s", req.a, req.b, witness)
    return CompareResponse(contained=witness is None, witness=None if witness is None else witness.as_tuple())
