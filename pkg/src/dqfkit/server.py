"""Read-only HTTP server for bundles, reports, and the explorer UI.

The bundle and report files are read once at startup and served verbatim
(byte-for-byte, with a stable content hash as the ETag), so what the
viewer sees is exactly what the engine wrote.
"""
from __future__ import annotations

import errno
import hashlib
import mimetypes
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .model import DQFError

DEFAULT_PORT = 8437


class _Content:
    """Immutable payloads shared by all request threads."""

    def __init__(self, bundle: bytes, report: bytes | None, ui_dir: Path | None):
        self.bundle = bundle
        self.report = report
        self.ui_dir = ui_dir
        self.bundle_etag = '"%s"' % hashlib.sha256(bundle).hexdigest()
        self.report_etag = (
            '"%s"' % hashlib.sha256(report).hexdigest() if report is not None else None
        )


def _make_handler(content: _Content):
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):  # noqa: N802 (http.server API)
            path = self.path.split("?", 1)[0]
            if path == "/api/health":
                self._send(200, b"ok", "text/plain")
            elif path == "/api/bundle":
                self._send_cached(content.bundle, content.bundle_etag)
            elif path == "/api/report":
                if content.report is None:
                    self._send(404, b"no report loaded", "text/plain")
                else:
                    self._send_cached(content.report, content.report_etag)
            else:
                self._send_static(path)

        def _send_cached(self, body: bytes, etag: str):
            if self.headers.get("If-None-Match") == etag:
                self.send_response(304)
                self.send_header("ETag", etag)
                self.end_headers()
                return
            self._send(200, body, "application/json", etag=etag)

        def _send_static(self, path: str):
            if content.ui_dir is None:
                self._send(404, b"not found", "text/plain")
                return
            rel = path.lstrip("/") or "index.html"
            target = (content.ui_dir / rel).resolve()
            try:
                target.relative_to(content.ui_dir.resolve())
            except ValueError:
                self._send(404, b"not found", "text/plain")
                return
            if not target.is_file():
                self._send(404, b"not found", "text/plain")
                return
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self._send(200, target.read_bytes(), ctype)

        def _send(self, status: int, body: bytes, ctype: str, etag: str | None = None):
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            if etag:
                self.send_header("ETag", etag)
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):  # quiet by default
            pass

    return Handler


def create_server(
    bundle_path: str | Path,
    report_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
) -> ThreadingHTTPServer:
    """Bind the server (port 0 picks a free port); caller runs serve_forever."""
    bundle_path = Path(bundle_path)
    if not bundle_path.exists():
        raise DQFError(f"bundle not found: {bundle_path}")
    bundle = bundle_path.read_bytes()
    report = None
    if report_path is not None:
        report_path = Path(report_path)
        if not report_path.exists():
            raise DQFError(f"report not found: {report_path}")
        report = report_path.read_bytes()
    ui = Path(ui_dir) if ui_dir is not None else None
    if ui is not None and not ui.is_dir():
        raise DQFError(f"UI directory not found: {ui}")
    content = _Content(bundle, report, ui)
    try:
        return ThreadingHTTPServer((host, port), _make_handler(content))
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            print(f"port {port} is already in use", file=sys.stderr)
            raise SystemExit(1) from None
        raise


def run_server(*args, **kwargs) -> None:
    httpd = create_server(*args, **kwargs)
    host, port = httpd.server_address[:2]
    print(f"serving on http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
