"""HTTP session service for live guided examinations.

A session holds the running state matrix for one examination. The examiner
submits per-point features (or a probability raster, which is reduced to
features server-side); the service replies with the model's greedy advice:
either the next point to auscultate or a declaration with the merged alarm
flag. Sessions are in-memory, expire after an idle timeout, and are
reproducible by replaying their recorded history from a zero state.

Inference only: the service never mutates model parameters. A single lock
serializes session mutations, which more than satisfies the
one-writer-per-session requirement at this scale.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .env import AUSCULTATION_LIMIT, apply_observation, flatten_state, new_state
from .errors import AuscultError
from .metrics import ALARM, merge_to_alarm
from .qnet import QNetworkParams, forward
from .raster import N_FEATURES, extract_features, raster_from_document

STATUS_ACTIVE = "active"
STATUS_DECLARED = "declared"
STATUS_LIMIT = "limit_reached"
STATUS_EXPIRED = "expired"

DEFAULT_IDLE_TIMEOUT = 1800.0


class ServiceError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


def _not_found(what: str) -> ServiceError:
    return ServiceError(404, "not-found", what)


def compute_advice(params: QNetworkParams, state: np.ndarray) -> dict:
    """Greedy advice on the current state, with the Q-value snapshot."""
    q = forward(params, flatten_state(state))
    action = int(np.argmax(q))
    q_list = [float(v) for v in q]
    if action < AUSCULTATION_LIMIT:
        return {"type": "auscultate", "point": action + 1, "q_values": q_list}
    label = action - AUSCULTATION_LIMIT
    return {"type": "declare", "label": label,
            "alarm": merge_to_alarm(label) == ALARM, "q_values": q_list}


@dataclass
class Session:
    session_id: str
    model_id: str
    state: np.ndarray
    history: list[dict] = field(default_factory=list)
    status: str = STATUS_ACTIVE
    advice: dict | None = None
    last_touched: float = 0.0

    @property
    def auscultation_count(self) -> int:
        return int(round(self.state[:, -1].sum()))

    def as_document(self) -> dict:
        return {
            "session_id": self.session_id,
            "model_id": self.model_id,
            "status": self.status,
            "state": [[float(v) for v in row] for row in self.state],
            "auscultation_count": self.auscultation_count,
            "history": list(self.history),
            "advice": self.advice,
        }


class GuideService:
    """In-memory session store bound to one or more read-only models."""

    def __init__(self, models: dict[str, QNetworkParams], *,
                 metadata: dict[str, dict] | None = None,
                 idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
                 clock=time.monotonic):
        if not models:
            raise ValueError("need at least one model")
        self.models = dict(models)
        self.metadata = metadata or {}
        self.idle_timeout = idle_timeout
        self.clock = clock
        self.default_model_id = next(iter(self.models))
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- store upkeep ------------------------------------------------------

    def _sweep(self) -> None:
        now = self.clock()
        for sid in [sid for sid, s in self._sessions.items()
                    if now - s.last_touched > self.idle_timeout]:
            self._sessions[sid].status = STATUS_EXPIRED
            del self._sessions[sid]

    def _get(self, session_id: str) -> Session:
        self._sweep()
        session = self._sessions.get(session_id)
        if session is None:
            raise _not_found(f"no session {session_id}")
        session.last_touched = self.clock()
        return session

    # -- operations --------------------------------------------------------

    def list_models(self) -> list[dict]:
        return [{"model_id": mid,
                 "layer_sizes": list(params.layer_sizes),
                 "metadata": self.metadata.get(mid, {})}
                for mid, params in self.models.items()]

    def create_session(self, model_id: str | None = None) -> Session:
        model_id = model_id or self.default_model_id
        if model_id not in self.models:
            raise ServiceError(404, "unknown-model", f"no model {model_id}")
        with self._lock:
            self._sweep()
            session = Session(
                session_id=uuid.uuid4().hex,
                model_id=model_id,
                state=new_state(),
                last_touched=self.clock(),
            )
            self._refresh_advice(session)
            self._sessions[session.session_id] = session
            return session

    def _refresh_advice(self, session: Session) -> None:
        advice = compute_advice(self.models[session.model_id], session.state)
        session.advice = advice
        if advice["type"] == "declare":
            session.status = STATUS_DECLARED
            session.history.append({"type": "declaration",
                                    "label": advice["label"],
                                    "alarm": advice["alarm"],
                                    "q_values": advice["q_values"]})

    def submit_observation(self, session_id: str, point: int,
                           features) -> tuple[Session, str | None]:
        """Record one observation; returns the session and an advisory
        warning when the submitted point differs from the advised one."""
        features = [float(v) for v in features]
        if not 1 <= point <= AUSCULTATION_LIMIT:
            raise ServiceError(400, "invalid-point",
                               f"point must be 1..{AUSCULTATION_LIMIT}, got {point}")
        if len(features) != N_FEATURES or any(
                not 0.0 <= v <= 1.0 for v in features):
            raise ServiceError(400, "invalid-features",
                               f"need {N_FEATURES} values in [0, 1]")
        with self._lock:
            session = self._get(session_id)
            if session.status != STATUS_ACTIVE:
                raise ServiceError(409, "session-not-active",
                                   f"session is {session.status}")
            advised = session.advice["point"] if session.advice else None
            warning = None
            if advised is not None and advised != point:
                warning = (f"submitted point {point} differs from advised "
                           f"point {advised}")
            apply_observation(session.state, point, np.array(features))
            session.history.append({"type": "observation", "point": point,
                                    "features": features, "advised": advised,
                                    "deviated": warning is not None})
            if session.auscultation_count >= AUSCULTATION_LIMIT:
                session.status = STATUS_LIMIT
                session.advice = None
            else:
                self._refresh_advice(session)
            return session, warning

    def submit_raster(self, session_id: str, point: int,
                      raster_document: dict) -> tuple[Session, str | None]:
        raster = raster_from_document(raster_document)
        features = extract_features(raster).as_vector()
        return self.submit_observation(session_id, point, features)

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            return self._get(session_id)

    def close_session(self, session_id: str) -> None:
        with self._lock:
            self._sweep()
            if session_id not in self._sessions:
                raise _not_found(f"no session {session_id}")
            del self._sessions[session_id]


# -- HTTP layer -------------------------------------------------------------


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str | None = None


class ObservationBody(BaseModel):
    point: int
    features: list[float]


class RasterBody(BaseModel):
    point: int
    raster: dict[str, Any]


def create_app(service: GuideService) -> FastAPI:
    app = FastAPI(title="auscultation guide")

    @app.exception_handler(ServiceError)
    async def service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(AuscultError)
    async def domain_error(request: Request, exc: AuscultError):
        return JSONResponse(status_code=400,
                            content={"code": "invalid-raster", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "invalid-request", "message": str(exc)})

    @app.get("/v1/models")
    async def list_models():
        return {"models": service.list_models()}

    @app.post("/v1/sessions", status_code=201)
    async def create_session(body: CreateSessionBody | None = None):
        session = service.create_session(body.model_id if body else None)
        return {"session_id": session.session_id, "status": session.status,
                "advice": session.advice}

    @app.post("/v1/sessions/{session_id}/observations")
    async def submit_observation(session_id: str, body: ObservationBody):
        session, warning = service.submit_observation(session_id, body.point,
                                                      body.features)
        return {"advice": session.advice, "status": session.status,
                "warning": warning}

    @app.post("/v1/sessions/{session_id}/rasters")
    async def submit_raster(session_id: str, body: RasterBody):
        session, warning = service.submit_raster(session_id, body.point,
                                                 body.raster)
        return {"advice": session.advice, "status": session.status,
                "warning": warning}

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        return service.get_session(session_id).as_document()

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    async def close_session(session_id: str):
        service.close_session(session_id)

    return app
