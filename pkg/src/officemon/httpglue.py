"""Minimal threaded HTTP binding shared by the ingestion and console
services.

Routes are (method, path regex, handler) triples; a handler returns
(status, body) and may read the request body and query string. One
process and a thread pool per request is ample at desk scale; anything
bigger is a deployment concern, not ours.
"""

from __future__ import annotations

import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Match
from urllib.parse import parse_qs, urlsplit

log = logging.getLogger(__name__)

Handler = Callable[[Match, str, dict], tuple[int, str]]


class _RequestHandler(BaseHTTPRequestHandler):
    server_version = "officemon"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # route access logs to logging
        log.debug("%s %s", self.address_string(), fmt % args)

    def _dispatch(self, method: str) -> None:
        parsed = urlsplit(self.path)
        query = parse_qs(parsed.query)
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length).decode("utf-8") if length else ""
        for route_method, pattern, handler in self.server.routes:  # type: ignore[attr-defined]
            if route_method != method:
                continue
            match = pattern.fullmatch(parsed.path)
            if match is None:
                continue
            try:
                status, payload = handler(match, body, query)
            except Exception:
                log.exception("handler error for %s %s", method, self.path)
                status, payload = 500, "internal error"
            self._respond(status, payload)
            return
        self._respond(404, "no such endpoint")

    def _respond(self, status: int, payload: str) -> None:
        data = payload.encode("utf-8")
        self.send_response(status)
        ctype = "application/json" if payload[:1] in ("{", "[") else "text/plain"
        self.send_header("Content-Type", f"{ctype}; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Role")

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()


def build_server(host: str, port: int,
                 routes: list[tuple[str, str, Handler]]) -> ThreadingHTTPServer:
    """Create (but do not start) a threaded server for the given routes."""
    server = ThreadingHTTPServer((host, port), _RequestHandler)
    server.routes = [(m, re.compile(p), h) for m, p, h in routes]  # type: ignore[attr-defined]
    return server


def start_in_thread(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
