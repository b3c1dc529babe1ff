import asyncio
import json

import pytest
from fastapi.testclient import TestClient

from tellurion.server import (
    FRAME_QUEUE_LIMIT,
    OutboundQueue,
    SessionRunner,
    create_app,
    serve_tcp,
)

from conftest import fast_config


class TestOutboundQueue:
    def _drain(self, q):
        out = []
        while q._items:
            out.append(q._items.popleft())
        return out

    def test_fifo_order(self):
        q = OutboundQueue()
        q.put({"type": "state", "t": 0})
        q.put({"type": "ack", "force_id": 1})
        assert [m["type"] for m in self._drain(q)] == ["state", "ack"]

    def test_drops_oldest_frame_under_backpressure(self):
        q = OutboundQueue()
        for k in range(FRAME_QUEUE_LIMIT + 5):
            q.put({"type": "frame", "t": k})
        frames = self._drain(q)
        assert len(frames) == FRAME_QUEUE_LIMIT
        assert frames[0]["t"] == 5  # oldest five were evicted
        assert frames[-1]["t"] == FRAME_QUEUE_LIMIT + 4

    def test_control_messages_never_dropped(self):
        q = OutboundQueue()
        q.put({"type": "ack", "force_id": 1})
        for k in range(FRAME_QUEUE_LIMIT + 10):
            q.put({"type": "frame", "t": k})
        q.put({"type": "reveal", "hidden": "real"})
        types = [m["type"] for m in self._drain(q)]
        assert types.count("ack") == 1
        assert types.count("reveal") == 1
        assert types.count("frame") == FRAME_QUEUE_LIMIT


class TestSessionRunner:
    def test_invalid_json_yields_error(self):
        runner = SessionRunner(fast_config(), seed=1, tick_ms=50)
        runner.handle_line("{oops")
        msg = runner.outbound._items.popleft()
        assert msg["type"] == "error"

    def test_valid_line_dispatched(self):
        runner = SessionRunner(fast_config(), seed=1, tick_ms=50)
        runner.handle_line(json.dumps({"type": "guess", "value": "real"}))
        msg = runner.outbound._items.popleft()
        assert msg["type"] == "reveal"

    def test_ping_produces_no_reply(self):
        runner = SessionRunner(fast_config(), seed=1, tick_ms=50)
        runner.handle_line(json.dumps({"type": "ping"}))
        assert not runner.outbound._items


def _recv_until(ws, wanted, limit=200):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == wanted:
            return msg
    raise AssertionError(f"no {wanted!r} message within {limit} frames")


class TestWebSocket:
    @pytest.fixture()
    def client(self):
        app = create_app(fast_config(), seed=1, tick_ms=5)
        with TestClient(app) as c:
            yield c

    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"ok": True}

    def test_streams_states_and_frames(self, client):
        with client.websocket_connect("/ws?seed=1") as ws:
            state = _recv_until(ws, "state")
            assert {b["name"] for b in state["bodies"]} == {"sun", "earth", "moon"}
            frame = _recv_until(ws, "frame")
            assert frame["R"] == 32 and frame["C"] == 32
            assert len(frame["data"]) > 0

    def test_force_then_guess_round_trip(self, client):
        with client.websocket_connect("/ws?seed=1") as ws:
            _recv_until(ws, "state")
            ws.send_text(json.dumps(
                {"type": "apply_force", "body": "moon", "dp": [0, 1e-6, 0]}
            ))
            ack = _recv_until(ws, "ack")
            assert ack["force_id"] == 1
            ws.send_text(json.dumps({"type": "guess", "value": "real"}))
            reveal = _recv_until(ws, "reveal")
            assert reveal["hidden"] == "real"
            assert reveal["correct"] is True

    def test_no_hidden_leak_before_reveal(self, client):
        with client.websocket_connect("/ws?seed=0") as ws:  # hidden: simulation
            seen = [json.loads(ws.receive_text()) for _ in range(12)]
            for msg in seen:
                assert msg["type"] in ("state", "frame")
                assert "hidden" not in json.dumps(msg)

    def test_bad_seed_query_falls_back_per_connection(self, client):
        # two unseeded connections draw consecutive seeds: ids must differ
        with client.websocket_connect("/ws") as a, client.websocket_connect("/ws") as b:
            ma = json.loads(a.receive_text())
            mb = json.loads(b.receive_text())
            assert ma["type"] in ("state", "frame")
            assert mb["type"] in ("state", "frame")


class TestTcpTransport:
    def test_newline_json_round_trip(self):
        async def scenario():
            server = await asyncio.start_server(lambda r, w: None, "127.0.0.1", 0)
            port = server.sockets[0].getsockname()[1]
            server.close()
            await server.wait_closed()

            task = asyncio.create_task(
                serve_tcp(fast_config(), seed=1, tick_ms=5, host="127.0.0.1", port=port)
            )
            await asyncio.sleep(0.1)
            reader, writer = await asyncio.open_connection("127.0.0.1", port)
            try:
                state = None
                for _ in range(50):
                    msg = json.loads(await asyncio.wait_for(reader.readline(), 5))
                    if msg["type"] == "state":
                        state = msg
                        break
                assert state is not None
                writer.write(
                    (json.dumps({"type": "apply_force", "body": "moon",
                                 "dp": [0, 1e-6, 0]}) + "\n").encode()
                )
                await writer.drain()
                ack = None
                for _ in range(100):
                    msg = json.loads(await asyncio.wait_for(reader.readline(), 5))
                    if msg["type"] == "ack":
                        ack = msg
                        break
                assert ack and ack["force_id"] == 1
                writer.write(
                    (json.dumps({"type": "guess", "value": "real"}) + "\n").encode()
                )
                await writer.drain()
                reveal = None
                for _ in range(100):
                    msg = json.loads(await asyncio.wait_for(reader.readline(), 5))
                    if msg["type"] == "reveal":
                        reveal = msg
                        break
                assert reveal and reveal["hidden"] == "real" and reveal["correct"]
            finally:
                writer.close()
                task.cancel()

        asyncio.run(scenario())
