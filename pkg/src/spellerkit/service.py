"""Live session service: the trial loop behind a socket protocol.

One session per connection, JSON messages. Two transports share the same
protocol handler: newline-delimited JSON over plain TCP (headless clients,
tests) and WebSocket plus static assets over HTTP (the browser UI).

Client -> server message types:
    start            {item?: int, mode?: "none"|"trie"|"llm", p?: float}
    select           {key: int}                    apply the key directly
    simulate_decode  {key: int}    intended key goes through the accuracy-p
                                   error model before being applied
    set_mode         {mode: str}
    quit             {}

Server -> client: layout, state (buffer, suggestions, degraded, finalized,
trial, intended_key, decoded_key), error. Connection-scoped errors are
reported in-band and never take the service down.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import signal
import socket
import socketserver
import struct
import threading
from configparser import ConfigParser
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .dialogue import load_bundled_dataset, load_dataset
from .errors import SpellerError
from .keyboard import N_KEYS, build_layout
from .session import SpellerSession, suggestion_dict
from .suggest import LlmConfig, LlmSuggester, TrieSuggester, load_lexicon_tsv

logger = logging.getLogger(__name__)

_LAYOUT = build_layout()


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765  # TCP JSON-lines transport; 0 = pick a free port
    http_port: int | None = None  # WebSocket + static assets; None = disabled
    suggester: str = "trie"  # none | trie | llm
    decode_p: float = 0.8
    seed: int = 0
    lexicon_path: Path | None = None
    dataset_path: Path | None = None
    static_root: Path | None = None
    llm: LlmConfig = field(default_factory=LlmConfig)

    @classmethod
    def from_ini(cls, path: str | Path) -> "ServiceConfig":
        parser = ConfigParser()
        parser.read(path)
        cfg = cls()
        svc = parser["service"] if parser.has_section("service") else {}
        cfg.host = svc.get("host", cfg.host)
        cfg.port = int(svc.get("port", cfg.port))
        if svc.get("http_port"):
            cfg.http_port = int(svc["http_port"])
        cfg.suggester = svc.get("suggester", cfg.suggester)
        cfg.decode_p = float(svc.get("decode_p", cfg.decode_p))
        cfg.seed = int(svc.get("seed", cfg.seed))
        for key, attr in (("lexicon", "lexicon_path"), ("dataset", "dataset_path"),
                          ("static_root", "static_root")):
            if svc.get(key):
                setattr(cfg, attr, Path(svc[key]))
        if parser.has_section("llm"):
            llm = parser["llm"]
            cfg.llm = LlmConfig(
                endpoint=llm.get("endpoint", cfg.llm.endpoint),
                model=llm.get("model", cfg.llm.model),
                timeout=float(llm.get("timeout", cfg.llm.timeout)),
                max_retries=int(llm.get("max_retries", cfg.llm.max_retries)),
                temperature=float(llm.get("temperature", cfg.llm.temperature)),
            )
        return cfg


class SessionProtocol:
    """Transport-agnostic handler: one speller session per instance."""

    def __init__(self, config: ServiceConfig, shared):
        self.config = config
        self.shared = shared
        self.session: SpellerSession | None = None
        conn_id = shared.next_connection_id()
        self.rng = np.random.default_rng((config.seed, conn_id))
        self.decode_p = config.decode_p
        self.mode = config.suggester
        self.closing = False

    def _suggester(self):
        if self.mode == "none":
            return None
        if self.mode == "llm":
            return LlmSuggester(self.config.llm, fallback=self.shared.trie)
        return self.shared.trie

    def _state_msg(self, intended=None, decoded=None) -> dict:
        s = self.session
        return {
            "type": "state",
            "buffer": s.state.buffer,
            "suggestions": suggestion_dict(s.suggestions),
            "degraded": s.suggestions.degraded,
            "finalized": s.state.finalized,
            "trial": len([e for e in s.events if e.kind == "trial_started"]),
            "intended_key": intended,
            "decoded_key": decoded,
        }

    def handle(self, msg: dict) -> list[dict]:
        try:
            return self._dispatch(msg)
        except SpellerError as exc:
            return [{"type": "error", "message": str(exc)}]
        except (KeyError, TypeError, ValueError) as exc:
            return [{"type": "error", "message": f"bad message: {exc}"}]

    def _dispatch(self, msg: dict) -> list[dict]:
        kind = msg.get("type")
        if kind == "start":
            if "mode" in msg:
                self.mode = msg["mode"]
            if "p" in msg:
                self.decode_p = float(msg["p"])
            context, category = (), ""
            if msg.get("item") is not None:
                item = self.shared.items[int(msg["item"])]
                context, category = item.context, item.category
            self.session = SpellerSession(
                suggester=self._suggester(), dialogue_context=context,
                category=category,
            )
            self.session.start()
            return [
                {"type": "layout", "layout": json.loads(_LAYOUT.to_json())},
                {"type": "context", "turns": [list(t) for t in context],
                 "category": category},
                self._state_msg(),
            ]
        if kind == "quit":
            self.closing = True
            return []
        if self.session is None:
            return [{"type": "error", "message": "no session; send start first"}]
        if kind == "select":
            key = int(msg["key"])
            self.session.run_trial(key)
            return [self._state_msg(intended=key, decoded=key)]
        if kind == "simulate_decode":
            intended = int(msg["key"])
            if not 1 <= intended <= N_KEYS:
                raise ValueError(f"key {intended} out of range")
            decoded = intended
            if self.rng.random() >= self.decode_p:
                other = int(self.rng.integers(1, N_KEYS))
                decoded = other if other < intended else other + 1
            try:
                self.session.run_trial(decoded)
            except SpellerError as exc:
                # decoded key was refused (empty slot, finalized): still a trial
                return [{"type": "error", "message": str(exc),
                         "intended_key": intended, "decoded_key": decoded},
                        self._state_msg(intended=intended, decoded=decoded)]
            return [self._state_msg(intended=intended, decoded=decoded)]
        if kind == "set_mode":
            self.mode = str(msg["mode"])
            if self.session is not None:
                self.session.suggester = self._suggester()
                self.session.suggestions = self.session.fetch_suggestions()
                return [self._state_msg()]
            return []
        return [{"type": "error", "message": f"unknown message type {kind!r}"}]


class _SharedState:
    """Resources shared by all sessions; immutable after startup aside from
    the connection counter."""

    def __init__(self, config: ServiceConfig):
        lex_path = config.lexicon_path or (
            Path(__file__).parent / "data" / "wordfreq.tsv"
        )
        self.trie = TrieSuggester(load_lexicon_tsv(lex_path))
        self.items = (load_dataset(config.dataset_path)
                      if config.dataset_path else load_bundled_dataset())
        self._conn_counter = 0
        self._lock = threading.Lock()

    def next_connection_id(self) -> int:
        with self._lock:
            self._conn_counter += 1
            return self._conn_counter


class _TcpHandler(socketserver.StreamRequestHandler):
    disable_nagle_algorithm = True

    def handle(self):
        server: SpellerTcpServer = self.server  # type: ignore[assignment]
        proto = SessionProtocol(server.config, server.shared)
        for line in self.rfile:
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as exc:
                replies = [{"type": "error", "message": f"invalid JSON: {exc}"}]
            else:
                replies = proto.handle(msg)
            try:
                for reply in replies:
                    self.wfile.write((json.dumps(reply) + "\n").encode())
                self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                return
            if proto.closing:
                return


class SpellerTcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: ServiceConfig, shared: _SharedState):
        super().__init__((config.host, config.port), _TcpHandler)
        self.config = config
        self.shared = shared


_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def _ws_accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def _ws_read_message(rfile) -> str | None:
    """One text message (final frames only); None on close or EOF."""
    while True:
        head = rfile.read(2)
        if len(head) < 2:
            return None
        fin_opcode, mask_len = head
        opcode = fin_opcode & 0x0F
        masked = bool(mask_len & 0x80)
        length = mask_len & 0x7F
        if length == 126:
            length = struct.unpack(">H", rfile.read(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", rfile.read(8))[0]
        mask = rfile.read(4) if masked else b"\x00" * 4
        payload = rfile.read(length)
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            return None
        if opcode == 0x9:  # ping: callers answer with pong via _ws_send
            continue
        if opcode in (0x1, 0x2):
            return payload.decode("utf-8", errors="replace")
        # continuation/pong frames are ignored


def _ws_send(wfile, text: str) -> None:
    payload = text.encode()
    header = bytearray([0x81])
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 1 << 16:
        header.append(126)
        header += struct.pack(">H", n)
    else:
        header.append(127)
        header += struct.pack(">Q", n)
    wfile.write(bytes(header) + payload)
    wfile.flush()


_CONTENT_TYPES = {
    ".html": "text/html", ".js": "text/javascript", ".css": "text/css",
    ".map": "application/json", ".json": "application/json",
    ".svg": "image/svg+xml", ".png": "image/png", ".ico": "image/x-icon",
}


class _HttpHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True

    def log_message(self, fmt, *args):  # route through logging, not stderr
        logger.debug("http: " + fmt, *args)

    def do_GET(self):
        server: SpellerHttpServer = self.server  # type: ignore[assignment]
        if self.path.split("?")[0] == "/ws":
            self._serve_websocket(server)
            return
        self._serve_static(server)

    def _serve_websocket(self, server):
        key = self.headers.get("Sec-WebSocket-Key")
        if self.headers.get("Upgrade", "").lower() != "websocket" or not key:
            self.send_error(400, "expected websocket upgrade")
            return
        self.send_response(101, "Switching Protocols")
        self.send_header("Upgrade", "websocket")
        self.send_header("Connection", "Upgrade")
        self.send_header("Sec-WebSocket-Accept", _ws_accept_key(key))
        self.end_headers()

        proto = SessionProtocol(server.config, server.shared)
        try:
            while True:
                raw = _ws_read_message(self.rfile)
                if raw is None:
                    return
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as exc:
                    replies = [{"type": "error", "message": f"invalid JSON: {exc}"}]
                else:
                    replies = proto.handle(msg)
                for reply in replies:
                    _ws_send(self.wfile, json.dumps(reply))
                if proto.closing:
                    return
        except (BrokenPipeError, ConnectionResetError, OSError):
            return

    def _serve_static(self, server):
        root = server.config.static_root
        if root is None:
            self.send_error(404, "no static root configured")
            return
        rel = self.path.split("?")[0].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self.send_error(404)
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type",
                         _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class SpellerHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: ServiceConfig, shared: _SharedState):
        super().__init__((config.host, config.http_port), _HttpHandler)
        self.config = config
        self.shared = shared


class SpellerService:
    """TCP transport always; HTTP/WebSocket when http_port is configured."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.shared = _SharedState(config)
        self.tcp = SpellerTcpServer(config, self.shared)
        self.config.port = self.tcp.server_address[1]
        self.http = None
        if config.http_port is not None:
            self.http = SpellerHttpServer(config, self.shared)
            self.config.http_port = self.http.server_address[1]
        self._threads: list[threading.Thread] = []

    def start(self):
        for srv in filter(None, (self.tcp, self.http)):
            thread = threading.Thread(target=srv.serve_forever, daemon=True)
            thread.start()
            self._threads.append(thread)
        logger.info("session service on tcp://%s:%d%s", self.config.host,
                    self.config.port,
                    f" http://{self.config.host}:{self.config.http_port}"
                    if self.http else "")

    def stop(self):
        for srv in filter(None, (self.tcp, self.http)):
            srv.shutdown()
            srv.server_close()
        for thread in self._threads:
            thread.join(timeout=2)


def serve_sessions(config: ServiceConfig) -> None:
    """Run until SIGINT/SIGTERM."""
    service = SpellerService(config)
    service.start()
    done = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: done.set())
    print(f"speller service listening on tcp {config.host}:{config.port}"
          + (f", http {config.host}:{config.http_port}" if service.http else ""),
          flush=True)
    try:
        done.wait()
    finally:
        service.stop()


def connect_lines(host: str, port: int, timeout: float = 5.0) -> "LineClient":
    return LineClient(host, port, timeout)


class LineClient:
    """Tiny JSON-lines client used by tests and tooling."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.rfile = self.sock.makefile("r", encoding="utf-8")

    def send(self, msg: dict) -> None:
        self.sock.sendall((json.dumps(msg) + "\n").encode())

    def recv(self) -> dict:
        line = self.rfile.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line)

    def roundtrip(self, msg: dict, n_replies: int = 1) -> list[dict]:
        self.send(msg)
        return [self.recv() for _ in range(n_replies)]

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass
