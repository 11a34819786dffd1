"""Shared fixtures, chiefly a loopback RESP server backed by MemoryStore.

The server speaks just enough RESP2 for the supported commands: inbound
requests are arrays of bulk strings (the same shape MultiBulk decodes),
replies are encoded with resp.encode_reply.  It serves one command per
request in lockstep, which is exactly the Backend contract.
"""

from __future__ import annotations

import socket
import socketserver
import threading

import pytest

from redtype.resp import ReplyDecoder, encode_reply
from redtype.store import MemoryStore, MultiBulk, SimpleStatus


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        decoder = ReplyDecoder()
        store: MemoryStore = self.server.store  # type: ignore[attr-defined]
        lock: threading.Lock = self.server.lock  # type: ignore[attr-defined]
        while True:
            request = decoder.poll()
            if request is None:
                try:
                    data = self.request.recv(4096)
                except ConnectionError:
                    return
                if not data:
                    return
                decoder.feed(data)
                continue
            # A command array decodes as MultiBulk; anything else is a
            # client bug worth failing loudly on.
            assert isinstance(request, MultiBulk), request
            argv = list(request.items)
            if argv and argv[0].upper() == b"RESET":
                with lock:
                    store.reset()
                reply = SimpleStatus("OK")
            else:
                with lock:
                    reply = store.execute(argv)
            self.request.sendall(encode_reply(reply))


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr):
        super().__init__(addr, _Handler)
        self.store = MemoryStore()
        self.lock = threading.Lock()


@pytest.fixture(scope="session")
def resp_server():
    """(host, port, store) of a live loopback server."""
    server = _Server(("127.0.0.1", 0))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield host, port, server.store
    server.shutdown()
    server.server_close()


@pytest.fixture
def free_port() -> int:
    """A port that was just released, so nothing is listening on it."""
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port
