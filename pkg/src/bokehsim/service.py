"""HTTP preview service: session-scoped uploads and parameterized bokeh renders."""

import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, File, HTTPException, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel, Field

from bokehsim.defocus import defocus_magnitude, signed_defocus
from bokehsim.fusion import FusionConfig
from bokehsim.imagecore import ImageIOError, PlanarImage, decode_image, encode_image
from bokehsim.render import PipelineConfig, RenderSession, refocus

SESSION_CAP = 16
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class RenderRequest(BaseModel):
    """Render parameters; bounds are enforced at parse time."""

    focal: float = Field(ge=0.0, le=1.0)
    blur_scale: float = Field(default=1.0, gt=0.0, le=4.0)
    preview: bool = False


@dataclass(eq=False)
class SessionEntry:
    """One uploaded session plus the lock serializing its renders."""

    session: RenderSession
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe store of open sessions with least-recently-used eviction."""

    def __init__(self, cap=SESSION_CAP):
        self._cap = cap
        self._lock = threading.Lock()
        self._entries = OrderedDict()

    def add(self, session):
        token = uuid.uuid4().hex
        with self._lock:
            self._entries[token] = SessionEntry(session=session)
            while len(self._entries) > self._cap:
                self._entries.popitem(last=False)
        return token

    def get(self, token):
        with self._lock:
            entry = self._entries.get(token)
            if entry is not None:
                self._entries.move_to_end(token)
            return entry

    def __len__(self):
        with self._lock:
            return len(self._entries)


def _decode_upload(data, channels, name):
    if data[:2] in (b"Pf", b"PF"):
        img = decode_image(data, "pfm")
    elif data[:8] == _PNG_MAGIC:
        img = decode_image(data, "rgb8" if channels == 3 else "gray16")
    else:
        raise ImageIOError("%s: unrecognized image format" % name)
    if img.channels != channels:
        raise ImageIOError(
            "%s: expected %d channels, got %d" % (name, channels, img.channels)
        )
    return img


def _require_session(store, token):
    entry = store.get(token)
    if entry is None:
        raise HTTPException(status_code=404, detail="unknown session")
    return entry


def create_app():
    """Build the preview service application."""
    app = FastAPI(title="bokehsim preview service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    app.state.store = store

    @app.post("/sessions", status_code=201)
    def create_session(image: UploadFile = File(...), disparity: UploadFile = File(...)):
        try:
            img = _decode_upload(image.file.read(), 3, "image")
            disp = _decode_upload(disparity.file.read(), 1, "disparity")
        except ImageIOError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if (img.height, img.width) != (disp.height, disp.width):
            raise HTTPException(
                status_code=422,
                detail="image is %dx%d but disparity is %dx%d"
                % (img.width, img.height, disp.width, disp.height),
            )
        try:
            session = RenderSession.open(img, disp)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        token = store.add(session)
        return {"id": token, "width": img.width, "height": img.height}

    @app.post("/sessions/{token}/render")
    def render_session(token: str, request: RenderRequest):
        entry = _require_session(store, token)
        method = "feathered" if request.preview else "poisson_optimized"
        cfg = PipelineConfig(fusion=FusionConfig(method=method))
        with entry.lock:
            result = refocus(
                entry.session, request.focal, blur_scale=request.blur_scale, cfg=cfg
            )
        return Response(content=encode_image(result.bokeh, "rgb8"), media_type="image/png")

    @app.get("/sessions/{token}/defocus")
    def defocus_view(token: str, focal: float = Query(ge=0.0, le=1.0)):
        entry = _require_session(store, token)
        session = entry.session
        magnitude = defocus_magnitude(signed_defocus(session.disparity, focal))
        plane = session._crop(magnitude.data)
        png = encode_image(PlanarImage(np.clip(plane, 0.0, 1.0)[:, :, None]), "gray16")
        return Response(content=png, media_type="image/png")

    return app
