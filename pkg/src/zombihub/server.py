"""The hub process: HTTP(S) asset delivery plus the websocket routing endpoint.

One port serves both: plain GETs are answered from the asset root and the
loaded surface specs, and /ws upgrades to the wire protocol. All routing and
state live in HubCore and run on the single asyncio loop, so publishes and
joins are totally ordered without locks.
"""

from __future__ import annotations

import asyncio
import http
import json
import mimetypes
import ssl
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from .hubcore import (
    DEFAULT_HEARTBEAT_MS,
    DEFAULT_IDLE_TIMEOUT_MS,
    DEFAULT_SESSION_CAP,
    HubCore,
)
from .surfaces import SurfaceSpec, load_spec_file

PACKAGE_ASSETS = Path(__file__).parent / "assets"
PACKAGE_SURFACES = Path(__file__).parent / "surfaces_data"


class ConfigError(Exception):
    pass


@dataclass
class HubConfig:
    host: str = "0.0.0.0"
    port: int = 8000
    cert_path: Optional[Path] = None   # both set => TLS on
    key_path: Optional[Path] = None
    static_root: Path = PACKAGE_ASSETS
    surface_paths: tuple = ()
    heartbeat_ms: int = DEFAULT_HEARTBEAT_MS
    idle_timeout_ms: int = DEFAULT_IDLE_TIMEOUT_MS
    session_cap: int = DEFAULT_SESSION_CAP
    osc_config_path: Optional[Path] = None
    osc_host: Optional[str] = None
    osc_port: Optional[int] = None

    def validate(self) -> None:
        if not (1 <= self.port <= 65535):
            raise ConfigError(f"port {self.port} outside [1,65535]")
        if self.idle_timeout_ms <= self.heartbeat_ms:
            raise ConfigError("idle timeout must exceed heartbeat interval")
        if (self.cert_path is None) != (self.key_path is None):
            raise ConfigError("tls needs both cert and key")
        if self.cert_path is not None:
            for p in (self.cert_path, self.key_path):
                if not Path(p).is_file():
                    raise ConfigError(f"bad certificate material: {p}")
        if not Path(self.static_root).is_dir():
            raise ConfigError(f"missing asset root: {self.static_root}")

    @property
    def tls(self) -> bool:
        return self.cert_path is not None

    @classmethod
    def from_file(cls, path) -> "HubConfig":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}")
        kwargs = {}
        for key in ("host", "port", "heartbeat_ms", "idle_timeout_ms", "session_cap",
                    "osc_host", "osc_port"):
            if key in obj:
                kwargs[key] = obj[key]
        for key in ("cert_path", "key_path", "static_root", "osc_config_path"):
            if key in obj:
                kwargs[key] = Path(obj[key])
        if "surface_paths" in obj:
            kwargs["surface_paths"] = tuple(Path(p) for p in obj["surface_paths"])
        return cls(**kwargs)


def load_bundled_surfaces() -> Dict[str, SurfaceSpec]:
    specs = {}
    for path in sorted(PACKAGE_SURFACES.glob("*.json")):
        spec = load_spec_file(path)
        specs[spec.name] = spec
    return specs


def _now_ms() -> float:
    return time.monotonic() * 1000.0


class HubServer:
    """Owns the HubCore, the websocket server and the periodic tasks."""

    def __init__(self, config: HubConfig, on_publish=None):
        config.validate()
        self.config = config
        self.surfaces = load_bundled_surfaces()
        for path in config.surface_paths:
            spec = load_spec_file(path)
            self.surfaces[spec.name] = spec
        self.core = HubCore(
            surfaces=self.surfaces,
            session_cap=config.session_cap,
            heartbeat_ms=config.heartbeat_ms,
            idle_timeout_ms=config.idle_timeout_ms,
            send=self._send,
            close=self._close,
            on_publish=on_publish,
        )
        self._queues: Dict[object, asyncio.Queue] = {}
        self._server = None
        self._tasks = []

    # send/close are called synchronously from the core on the event loop;
    # per-connection queues keep the outbound order strictly FIFO.
    def _send(self, conn, frame: str) -> None:
        q = self._queues.get(conn)
        if q is not None:
            q.put_nowait(frame)

    def _close(self, conn) -> None:
        q = self._queues.get(conn)
        if q is not None:
            q.put_nowait(None)

    async def _writer(self, ws, q: asyncio.Queue) -> None:
        try:
            while True:
                frame = await q.get()
                if frame is None:
                    await ws.close()
                    return
                await ws.send(frame)
        except ConnectionClosed:
            pass

    async def _handler(self, ws) -> None:
        q = asyncio.Queue()
        self._queues[ws] = q
        writer = asyncio.create_task(self._writer(ws, q))
        self.core.on_connect(ws, _now_ms())
        try:
            async for message in ws:
                self.core.on_frame(ws, message, _now_ms())
        except ConnectionClosed:
            pass
        finally:
            self.core.on_disconnect(ws, _now_ms())
            self._queues.pop(ws, None)
            writer.cancel()

    # --- plain HTTP ---------------------------------------------------------

    def _http_response(self, status: int, body: bytes, content_type: str) -> Response:
        headers = Headers([
            ("Content-Type", content_type),
            ("Content-Length", str(len(body))),
            ("Cache-Control", "no-cache"),
        ])
        return Response(status, http.HTTPStatus(status).phrase, headers, body)

    def _serve_static(self, path: str) -> Response:
        if path in ("/", "/index.html"):
            rel = "index.html"
        elif path.startswith("/client/"):
            rel = path[len("/client/"):]
        else:
            rel = path.lstrip("/")
        root = Path(self.config.static_root).resolve()
        target = (root / rel).resolve()
        if root not in target.parents and target != root:
            return self._http_response(404, b"not found", "text/plain")
        if not target.is_file():
            return self._http_response(404, b"not found", "text/plain")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        return self._http_response(200, target.read_bytes(), ctype)

    def _process_request(self, connection, request):
        path = request.path.split("?", 1)[0]
        if path == "/ws":
            return None  # proceed with the websocket upgrade
        if path.startswith("/surfaces/"):
            name = path[len("/surfaces/"):]
            spec = self.surfaces.get(name)
            if spec is None:
                return self._http_response(404, b"unknown surface", "text/plain")
            body = json.dumps({
                "name": spec.name,
                "requires": sorted(spec.requires),
                "controls": [{
                    "id": c.id, "kind": c.kind, "rows": c.rows, "cols": c.cols,
                    "instruments": c.instruments, "steps": c.steps,
                    "axes": list(c.axes), "label": c.label,
                } for c in spec.controls],
            }).encode()
            return self._http_response(200, body, "application/json")
        if path == "/surfaces":
            body = json.dumps(sorted(self.surfaces)).encode()
            return self._http_response(200, body, "application/json")
        return self._serve_static(path)

    # --- periodic tasks -----------------------------------------------------

    async def _heartbeat_loop(self) -> None:
        while True:
            await asyncio.sleep(self.config.heartbeat_ms / 1000.0)
            self.core.heartbeat_tick(_now_ms())

    async def _clock_loop(self) -> None:
        while True:
            next_fire = self.core.clock_tick(_now_ms())
            if next_fire is None:
                await asyncio.sleep(0.05)
            else:
                await asyncio.sleep(max(0.001, (next_fire - _now_ms()) / 1000.0))

    # --- lifecycle ----------------------------------------------------------

    async def start(self) -> None:
        """Bind and serve; the hub is ready when this returns."""
        ssl_context = None
        if self.config.tls:
            ssl_context = ssl.SSLContext(ssl.PROTOCOL_TLS_SERVER)
            try:
                ssl_context.load_cert_chain(self.config.cert_path, self.config.key_path)
            except ssl.SSLError as exc:
                raise ConfigError(f"bad certificate: {exc}")
        try:
            self._server = await serve(
                self._handler, self.config.host, self.config.port,
                process_request=self._process_request,
                ssl=ssl_context, max_size=64 * 1024,
                ping_interval=None,  # protocol-level pings, not RFC6455 pings
            )
        except OSError as exc:
            raise ConfigError(f"cannot bind {self.config.host}:{self.config.port}: {exc}")
        self._tasks = [
            asyncio.create_task(self._heartbeat_loop()),
            asyncio.create_task(self._clock_loop()),
        ]

    async def stop(self) -> None:
        for t in self._tasks:
            t.cancel()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        await self.start()
        try:
            await asyncio.Future()
        finally:
            await self.stop()
