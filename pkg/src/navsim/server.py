"""Live session server: one sim loop, one operator, any number of observers.

The simulation task is the single writer of sim state. Client commands land
on a queue drained once per tick; snapshots fan out through bounded
per-client buffers that drop the oldest frame rather than stall the loop on
a slow consumer.
"""

from __future__ import annotations

import asyncio
import contextlib
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import SimConfig
from .protocol import (
    ProtocolError,
    dumps,
    error_message,
    parse_client_message,
    snapshot_message,
    welcome_message,
)
from .sim import Simulator

CLIENT_BUFFER = 8
OPERATOR_COMMANDS = ("set_goal", "reset", "pause", "resume")


class Session:
    """Connection registry plus the command queue the sim loop drains."""

    def __init__(self, sim: Simulator):
        self.sim = sim
        self.queues: dict[WebSocket, asyncio.Queue] = {}
        self.operator: Optional[WebSocket] = None
        self.commands: asyncio.Queue = asyncio.Queue()
        self.paused = False

    def claim_role(self, ws: WebSocket, wanted: str) -> tuple[str, bool]:
        """Returns (granted role, whether an operator request was denied)."""
        if wanted == "operator":
            if self.operator is None:
                self.operator = ws
                return "operator", False
            return "observer", True
        return "observer", False

    def attach(self, ws: WebSocket) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_BUFFER)
        self.queues[ws] = queue
        return queue

    def detach(self, ws: WebSocket) -> None:
        self.queues.pop(ws, None)
        if self.operator is ws:
            self.operator = None  # the role becomes claimable again

    def offer(self, ws: WebSocket, text: str) -> None:
        queue = self.queues.get(ws)
        if queue is None:
            return
        while queue.full():  # drop-oldest keeps the stream fresh
            queue.get_nowait()
        queue.put_nowait(text)

    def broadcast(self, text: str) -> None:
        for ws in list(self.queues):
            self.offer(ws, text)

    def apply_command(self, ws: WebSocket, msg: dict) -> None:
        kind = msg["type"]
        if kind == "set_goal":
            ok, reason = self.sim.set_goal(float(msg["x"]), float(msg["y"]))
            if not ok:
                self.offer(ws, dumps(error_message("goal rejected", reason)))
        elif kind == "reset":
            self.sim.reset()
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False


async def sim_loop(session: Session, tick_rate: float) -> None:
    period = 1.0 / tick_rate
    loop = asyncio.get_running_loop()
    next_due = loop.time()
    while True:
        while not session.commands.empty():
            ws, msg = session.commands.get_nowait()
            session.apply_command(ws, msg)
        if not session.paused:
            snapshot = session.sim.step()
            session.broadcast(dumps(snapshot_message(snapshot)))
        next_due += period
        delay = next_due - loop.time()
        if delay <= 0:  # fell behind wall clock: skip ahead, never burst
            next_due = loop.time()
            delay = 0.0
        await asyncio.sleep(delay)


async def _writer(ws: WebSocket, queue: asyncio.Queue) -> None:
    while True:
        await ws.send_text(await queue.get())


def build_app(cfg: SimConfig, debug_truth: bool = False) -> FastAPI:
    sim = Simulator(cfg, debug_truth=debug_truth)
    session = Session(sim)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(sim_loop(session, cfg.tick_rate))
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        role = None
        writer = None
        try:
            # the first message must claim a role
            while role is None:
                try:
                    msg = parse_client_message(await ws.receive_text())
                except ProtocolError as exc:
                    await ws.send_text(dumps(error_message(exc.code, exc.message)))
                    continue
                if msg["type"] != "hello":
                    await ws.send_text(
                        dumps(error_message("bad message", "expected hello first"))
                    )
                    continue
                role, denied = session.claim_role(ws, msg["role"])
                if denied:
                    await ws.send_text(
                        dumps(error_message("operator taken", "another operator is connected"))
                    )
                await ws.send_text(dumps(welcome_message(role, sim.grid)))

            queue = session.attach(ws)
            writer = asyncio.create_task(_writer(ws, queue))
            while True:
                try:
                    msg = parse_client_message(await ws.receive_text())
                except ProtocolError as exc:
                    session.offer(ws, dumps(error_message(exc.code, exc.message)))
                    continue
                if msg["type"] == "hello":
                    session.offer(ws, dumps(error_message("bad message", "already joined")))
                elif msg["type"] in OPERATOR_COMMANDS and session.operator is not ws:
                    session.offer(ws, dumps(error_message("observer role", "view-only session")))
                else:
                    session.commands.put_nowait((ws, msg))
        except WebSocketDisconnect:
            pass
        finally:
            if writer is not None:
                writer.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await writer
            session.detach(ws)

    static_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve(cfg: SimConfig, host: str, port: int, debug_truth: bool = False) -> None:
    import uvicorn

    uvicorn.run(build_app(cfg, debug_truth=debug_truth), host=host, port=port)
