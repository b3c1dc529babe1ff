"""Network transports for blind-trial sessions.

Two transports speak the same newline/WS-frame JSON protocol:
  - WebSocket at /ws (primary), one session per connection;
  - plain TCP with newline-delimited JSON (fallback), one session per
    connection, on a separate port.

Each connection owns its session and processes inbound messages in arrival
order.  Outbound streaming is decoupled from simulation advancement through
a bounded queue that drops the oldest *frame* messages under backpressure
but never drops acks, reveals, or errors.
"""

from __future__ import annotations

import asyncio
import collections
import json
import logging

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from tellurion.config import ScenarioConfig
from tellurion.session import Session, start_session

log = logging.getLogger("tellurion.server")

FRAME_QUEUE_LIMIT = 32


class OutboundQueue:
    """Bounded buffer: frames are droppable, control messages are not."""

    def __init__(self):
        self._items: collections.deque = collections.deque()
        self._event = asyncio.Event()

    def put(self, msg: dict) -> None:
        if msg["type"] == "frame":
            frames = sum(1 for m in self._items if m["type"] == "frame")
            if frames >= FRAME_QUEUE_LIMIT:
                for i, m in enumerate(self._items):
                    if m["type"] == "frame":
                        del self._items[i]
                        break
        self._items.append(msg)
        self._event.set()

    async def get(self) -> dict:
        while not self._items:
            self._event.clear()
            await self._event.wait()
        return self._items.popleft()


class SessionRunner:
    """Drives one session: tick loop plus inbound dispatch."""

    def __init__(self, config: ScenarioConfig, seed: int, tick_ms: float):
        self.session: Session = start_session(config, seed)
        self.tick_s = tick_ms / 1000.0
        self.outbound = OutboundQueue()
        self._stopped = asyncio.Event()

    def stop(self) -> None:
        self._stopped.set()

    async def tick_loop(self) -> None:
        while not self._stopped.is_set():
            if self.session.phase == "running" and not self.session.failed:
                for msg in self.session.advance():
                    self.outbound.put(msg)
            try:
                await asyncio.wait_for(self._stopped.wait(), timeout=self.tick_s)
            except asyncio.TimeoutError:
                pass

    def handle_line(self, line: str) -> None:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            self.outbound.put({"type": "error", "msg": "invalid JSON"})
            return
        reply = self.session.handle_message(msg)
        if reply is not None:
            self.outbound.put(reply)


def create_app(config: ScenarioConfig, seed: int, tick_ms: float) -> FastAPI:
    """WebSocket transport: one independent session per connection.

    A per-connection seed can be forced with ?seed=N; otherwise connections
    get seed, seed+1, ... in accept order.
    """
    app = FastAPI(title="tellurion blind-trial server")
    counter = {"n": 0}

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        s = ws.query_params.get("seed")
        conn_seed = int(s) if s is not None else seed + counter["n"]
        counter["n"] += 1
        runner = SessionRunner(config, conn_seed, tick_ms)
        ticker = asyncio.create_task(runner.tick_loop())

        async def sender():
            while True:
                msg = await runner.outbound.get()
                await ws.send_text(json.dumps(msg))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                line = await ws.receive_text()
                runner.handle_line(line)
        except WebSocketDisconnect:
            pass
        finally:
            runner.stop()
            send_task.cancel()
            ticker.cancel()

    return app


async def serve_tcp(
    config: ScenarioConfig, seed: int, tick_ms: float, host: str, port: int
):
    """Newline-delimited JSON fallback transport."""
    counter = {"n": 0}

    async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        conn_seed = seed + counter["n"]
        counter["n"] += 1
        runner = SessionRunner(config, conn_seed, tick_ms)
        ticker = asyncio.create_task(runner.tick_loop())

        async def sender():
            while True:
                msg = await runner.outbound.get()
                writer.write((json.dumps(msg) + "\n").encode("utf-8"))
                await writer.drain()

        send_task = asyncio.create_task(sender())
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                runner.handle_line(line.decode("utf-8").strip())
        except (ConnectionResetError, asyncio.CancelledError):
            pass
        finally:
            runner.stop()
            send_task.cancel()
            ticker.cancel()
            writer.close()

    server = await asyncio.start_server(handle, host, port)
    async with server:
        await server.serve_forever()


def run_server(
    config: ScenarioConfig,
    port: int,
    seed: int,
    tick_ms: float,
    host: str = "127.0.0.1",
    tcp_port: int | None = None,
):
    """Run WebSocket (port) and TCP fallback (tcp_port, default port+1)."""
    import uvicorn

    if tcp_port is None:
        tcp_port = port + 1
    app = create_app(config, seed, tick_ms)

    async def main():
        tcp = asyncio.create_task(serve_tcp(config, seed, tick_ms, host, tcp_port))
        server = uvicorn.Server(
            uvicorn.Config(app, host=host, port=port, log_level="warning")
        )
        await asyncio.gather(server.serve(), tcp)

    asyncio.run(main())
