"""Live guidance service: one WebSocket connection drives one session.

The wire format is length-delimited JSON text messages (WebSocket frames),
identical in content to the offline frame-log documents, so interactive
runs replay through the same tooling.  The server tick is client-driven:
every pose_update produces exactly one guidance_frame, which keeps
interactive sessions deterministic and testable.

Message envelope (both directions):

    {"kind": str, "session": str, "seq": int, "payload": {...}}

Client kinds: hello, pose_update, env_edit.  Server kinds: scenario_sync,
guidance_frame, replan_notice, error.  Server sequence numbers increase by
one per message sent on that connection; guidance_frame payloads echo the
triggering pose_update's seq as ``pose_seq``.

Replan jobs run on a worker pool shared by all connections; results are
routed back only to the owning session and integrated inside its next tick.
"""

from __future__ import annotations

import asyncio
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
import websockets

from .promp import GuideMixture
from .scenarios import Scenario, scenario_to_dict
from .session import Session, SessionConfig, ThreadReplanner, preset_session_config

DEFAULT_PORT = 8765


class GuidanceService:
    """Per-connection sessions over a shared scenario, mixture and config."""

    def __init__(
        self,
        scenario: Scenario,
        mixture: GuideMixture,
        session_config: SessionConfig | None = None,
        replan_workers: int = 2,
    ) -> None:
        self.scenario = scenario
        self.mixture = mixture
        self.session_config = (
            session_config if session_config is not None else preset_session_config(scenario)
        )
        self._pool = ThreadPoolExecutor(max_workers=replan_workers)

    async def handle(self, websocket) -> None:
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            self.scenario,
            self.mixture,
            self.session_config,
            replanner=ThreadReplanner(self._pool),
        )
        seq = 0

        async def send(kind: str, payload: dict) -> None:
            nonlocal seq
            await websocket.send(
                json.dumps({"kind": kind, "session": session_id, "seq": seq, "payload": payload})
            )
            seq += 1

        try:
            async for raw in websocket:
                try:
                    message = json.loads(raw)
                    kind = message["kind"]
                    payload = message.get("payload", {})
                except (json.JSONDecodeError, TypeError, KeyError) as exc:
                    await send("error", {"message": f"malformed message: {exc}"})
                    continue
                try:
                    if kind == "hello":
                        await send("scenario_sync", self._sync_payload(session))
                    elif kind == "pose_update":
                        await self._on_pose(session, message, payload, send)
                    elif kind == "env_edit":
                        session.apply_env_edit(payload)
                    else:
                        await send("error", {"message": f"unknown kind {kind!r}"})
                except Exception as exc:  # keep the session alive on bad input
                    await send("error", {"message": str(exc)})
        except websockets.ConnectionClosed:
            pass

    def _sync_payload(self, session: Session) -> dict:
        return {
            "scenario": scenario_to_dict(session.scenario),
            "guides": session.guide_geometry(),
            "guides_version": session.guides_version,
            "params": {
                "tau_max": session.config.guidance.tau_max,
                "k_damp": session.config.guidance.k_damp,
                "control_rate": session.config.guidance.control_rate,
                "delta_nu": session.config.filter_params.delta_nu,
                "p_progress": session.config.filter_params.p_progress,
            },
        }

    async def _on_pose(self, session: Session, message: dict, payload: dict, send) -> None:
        pose = np.asarray(payload.get("pose", []), dtype=float)
        velocity = np.asarray(
            payload.get("velocity", np.zeros(session.scenario.n)), dtype=float
        )
        if pose.shape != (session.scenario.n,):
            await send("error", {"message": f"pose must have {session.scenario.n} entries"})
            pose = np.full(session.scenario.n, np.nan)
            velocity = np.zeros(session.scenario.n)
        frame = session.step(pose, velocity)
        integrated = [e for e in frame.events if e["kind"] == "integrate"]
        if integrated:
            await send(
                "replan_notice",
                {
                    "trigger": integrated[0].get("trigger"),
                    "guides": session.guide_geometry(),
                    "guides_version": session.guides_version,
                },
            )
        doc = frame.to_dict()
        doc["pose_seq"] = message.get("seq")
        await send("guidance_frame", doc)


async def serve(
    scenario: Scenario,
    mixture: GuideMixture,
    session_config: SessionConfig | None = None,
    host: str = "127.0.0.1",
    port: int | None = None,
):
    """Start the WebSocket server; returns the server object (async context)."""
    service = GuidanceService(scenario, mixture, session_config)
    if port is None:
        port = int(os.environ.get("GUIDEMIX_PORT", DEFAULT_PORT))
    return await websockets.serve(service.handle, host, port)


def serve_forever(
    scenario: Scenario,
    mixture: GuideMixture,
    session_config: SessionConfig | None = None,
    host: str = "127.0.0.1",
    port: int | None = None,
    ui_dir: str | None = None,
) -> None:
    """Blocking entry point used by the CLI; optionally serves the UI dir."""
    if port is None:
        port = int(os.environ.get("GUIDEMIX_PORT", DEFAULT_PORT))
    if ui_dir:
        http_port = port + 1
        handler = partial(SimpleHTTPRequestHandler, directory=str(Path(ui_dir).resolve()))
        httpd = ThreadingHTTPServer((host, http_port), handler)
        threading.Thread(target=httpd.serve_forever, daemon=True).start()
        print(f"serving UI from {ui_dir} at http://{host}:{http_port}/", flush=True)

    async def run() -> None:
        server = await serve(scenario, mixture, session_config, host, port)
        print(f"guidance service listening on ws://{host}:{port}/", flush=True)
        await asyncio.Future()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
