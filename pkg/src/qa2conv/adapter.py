"""Newline-delimited JSON adapter protocol for external model sidecars.

One request per line on the sidecar's stdin (or a TCP stream), one response
per line back. Requests carry monotonically increasing ids; a response must
echo the id of the request it answers. One request in flight at a time.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import socket
import subprocess
import time

from .errors import AdapterProtocolError, AdapterTimeout, AdapterTransportError

REQUEST_KINDS = ("generate_candidates", "extract_triples", "rewrite")


class _LineChannel:
    """Byte stream with deadline-aware line reads."""

    def read_line(self, deadline: float) -> bytes:
        raise NotImplementedError

    def write_line(self, data: bytes) -> None:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError


class _SubprocessChannel(_LineChannel):
    def __init__(self, cmd: str):
        try:
            self.proc = subprocess.Popen(
                shlex.split(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as e:
            raise AdapterTransportError(f"cannot launch sidecar {cmd!r}: {e}") from e
        self._buf = b""

    def write_line(self, data: bytes) -> None:
        if self.proc.poll() is not None:
            raise AdapterTransportError("sidecar process has exited")
        try:
            self.proc.stdin.write(data + b"\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise AdapterTransportError(f"sidecar stdin closed: {e}") from e

    def read_line(self, deadline: float) -> bytes:
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AdapterTimeout("sidecar response timed out")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise AdapterTimeout("sidecar response timed out")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise AdapterTransportError("sidecar closed its stdout mid-request")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def close(self) -> None:
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


class _TcpChannel(_LineChannel):
    def __init__(self, address: str):
        host, _, port = address.rpartition(":")
        try:
            self.sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=10)
        except (OSError, ValueError) as e:
            raise AdapterTransportError(f"cannot connect to {address}: {e}") from e
        self._buf = b""

    def write_line(self, data: bytes) -> None:
        try:
            self.sock.sendall(data + b"\n")
        except OSError as e:
            raise AdapterTransportError(f"send failed: {e}") from e

    def read_line(self, deadline: float) -> bytes:
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AdapterTimeout("sidecar response timed out")
            self.sock.settimeout(remaining)
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise AdapterTimeout("sidecar response timed out") from None
            except OSError as e:
                raise AdapterTransportError(f"recv failed: {e}") from e
            if not chunk:
                raise AdapterTransportError("sidecar closed the connection mid-request")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class AdapterClient:
    """Serial request/response client over one sidecar connection."""

    def __init__(self, cmd: str | None = None, address: str | None = None, timeout: float = 60.0):
        if (cmd is None) == (address is None):
            raise ValueError("exactly one of cmd / address must be given")
        self.timeout = timeout
        self._next_id = 0
        self._channel: _LineChannel = (
            _SubprocessChannel(cmd) if cmd is not None else _TcpChannel(address)
        )

    def call(self, kind: str, payload: dict) -> dict:
        if kind not in REQUEST_KINDS:
            raise ValueError(f"unknown request kind {kind!r}")
        self._next_id += 1
        request_id = self._next_id
        line = json.dumps(
            {"id": request_id, "kind": kind, "payload": payload}, ensure_ascii=False
        ).encode("utf-8")
        self._channel.write_line(line)
        deadline = time.monotonic() + self.timeout
        raw = self._channel.read_line(deadline)
        try:
            response = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise AdapterProtocolError(f"malformed response line: {e}") from e
        if not isinstance(response, dict) or response.get("id") != request_id:
            raise AdapterProtocolError(
                f"response id {response.get('id')!r} does not match request id {request_id}"
            )
        if response.get("error") is not None:
            raise AdapterProtocolError(f"sidecar error: {response['error']}")
        payload_out = response.get("payload")
        if not isinstance(payload_out, dict):
            raise AdapterProtocolError("response payload missing or not an object")
        return payload_out

    def close(self) -> None:
        self._channel.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
