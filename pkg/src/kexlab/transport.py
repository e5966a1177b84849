"""Message transport: in-memory framed channels with read-only taps.

The default transport is an in-memory FIFO carrying the exact frame bytes
of :mod:`kexlab.wire`; a thin socket adapter carries the identical frames
over a real stream socket, demonstrating that the format is a genuine wire
protocol. Taps receive a copy of every frame and can never write back.
"""

from __future__ import annotations

import socket
import struct
from collections import deque
from typing import Iterable


class Wiretap:
    """Passive copy of every frame that crossed the tapped channels."""

    def __init__(self):
        self.frames: list[bytes] = []

    def observe(self, frame: bytes) -> None:
        self.frames.append(frame)


class FrameChannel:
    """One-directional FIFO of frames; order is always preserved."""

    def __init__(self, taps: Iterable[Wiretap] = ()):
        self._queue: deque[bytes] = deque()
        self._taps = tuple(taps)

    def send(self, frame: bytes) -> None:
        for tap in self._taps:
            tap.observe(frame)
        self._queue.append(frame)

    def recv(self) -> bytes:
        if not self._queue:
            raise IndexError("channel is empty")
        return self._queue.popleft()

    def pending(self) -> int:
        return len(self._queue)

    def __iter__(self):
        while self._queue:
            yield self._queue.popleft()


class Duplex:
    """A pair of directed channels between two endpoints, both tapped."""

    def __init__(self, taps: Iterable[Wiretap] = ()):
        self.a_to_b = FrameChannel(taps)
        self.b_to_a = FrameChannel(taps)


_LEN = struct.Struct(">I")


class SocketFrameChannel:
    """The same frames over a connected stream socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send(self, frame: bytes) -> None:
        self._sock.sendall(frame)

    def _read_exactly(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining:
            chunk = self._sock.recv(remaining)
            if not chunk:
                raise ConnectionError("peer closed mid-frame")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def recv(self) -> bytes:
        header = self._read_exactly(5)
        (payload_len,) = _LEN.unpack_from(header, 0)
        return header + self._read_exactly(payload_len)
