"""Framed request/response protocol over a stream socket.

Frame: u32 big-endian length of (type || body), u8 message type, body.
Search bodies are bare datamodel encodings.  Owner-originated bodies
(UPDATE, REVOKE, REGISTER_DICT) are wrapped as

    u64 seq || HMAC-SHA256(channel_key, type || seq || payload) || payload

and the server only accepts strictly increasing sequence numbers, which
rejects both forged and replayed owner frames.
"""

from __future__ import annotations

import enum
import hmac
import io
import logging
import socket
import socketserver
import struct
from typing import BinaryIO, Callable

from masse import codec
from masse.datamodel import (
    ClientDictionary,
    CtokenSupplement,
    RevocationMessage,
    SearchReply,
    SearchToken,
    StatusReply,
    UpdateMessage,
)
from masse.errors import DesyncError, FormatError, MasseError, ProtocolError

log = logging.getLogger(__name__)

MAX_FRAME = 64 * 1024 * 1024
MAC_LEN = 32


class MsgType(enum.IntEnum):
    SEARCH_REQ = 1
    SEARCH_RESP = 2
    UPDATE = 3
    REVOKE = 4
    REGISTER_DICT = 5
    STATUS = 6


class Status(enum.IntEnum):
    OK = 0
    BAD_REQUEST = 1
    UNAUTHENTICATED = 2
    REPLAYED = 3
    DESYNC = 4
    INTERNAL = 5


OWNER_TYPES = {
    UpdateMessage: MsgType.UPDATE,
    RevocationMessage: MsgType.REVOKE,
    ClientDictionary: MsgType.REGISTER_DICT,
    CtokenSupplement: MsgType.REGISTER_DICT,
}


def encode_frame(mtype: MsgType, body: bytes) -> bytes:
    if len(body) + 1 > MAX_FRAME:
        raise ProtocolError("frame too large")
    return struct.pack(">IB", len(body) + 1, mtype) + body


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = stream.read(n)
    if buf is None or len(buf) != n:
        raise ProtocolError("connection closed mid-frame")
    return buf


def read_frame(stream: BinaryIO) -> tuple[MsgType, bytes] | None:
    """Next frame from ``stream``; None on a clean end of stream."""
    head = stream.read(4)
    if not head:
        return None
    if len(head) != 4:
        raise ProtocolError("connection closed mid-frame")
    (size,) = struct.unpack(">I", head)
    if size < 1 or size > MAX_FRAME:
        raise ProtocolError(f"bad frame length {size}")
    data = _read_exact(stream, size)
    try:
        return MsgType(data[0]), data[1:]
    except ValueError as exc:
        raise ProtocolError(f"unknown message type {data[0]}") from exc


def decode_frame(frame: bytes) -> tuple[MsgType, bytes]:
    got = read_frame(io.BytesIO(frame))
    if got is None:
        raise ProtocolError("empty frame")
    return got


def _mac(key: bytes, mtype: int, seq: int, payload: bytes) -> bytes:
    return hmac.digest(key, bytes([mtype]) + struct.pack(">Q", seq) + payload, "sha256")


def owner_frame(channel_key: bytes, seq: int, msg) -> bytes:
    """Authenticated frame for an owner-originated message."""
    mtype = OWNER_TYPES[type(msg)]
    payload = codec.serialize(msg)
    body = struct.pack(">Q", seq) + _mac(channel_key, mtype, seq, payload) + payload
    return encode_frame(mtype, body)


def open_owner_body(channel_key: bytes, mtype: MsgType, body: bytes) -> tuple[int, bytes]:
    if len(body) < 8 + MAC_LEN:
        raise ProtocolError("owner frame too short")
    (seq,) = struct.unpack(">Q", body[:8])
    tag, payload = body[8 : 8 + MAC_LEN], body[8 + MAC_LEN :]
    if not hmac.compare_digest(tag, _mac(channel_key, mtype, seq, payload)):
        raise PermissionError("owner frame failed authentication")
    return seq, payload


def status_frame(code: Status, message: str = "") -> bytes:
    return encode_frame(MsgType.STATUS, codec.serialize(StatusReply(code, message)))


class Dispatcher:
    """Turns one request frame into one response frame against a ServerStore."""

    def __init__(self, store, channel_key: bytes, on_change: Callable[[], None] | None = None):
        self.store = store
        self.channel_key = channel_key
        self.on_change = on_change

    def handle(self, mtype: MsgType, body: bytes) -> bytes:
        try:
            if mtype is MsgType.SEARCH_REQ:
                return self._search(body)
            if mtype in (MsgType.UPDATE, MsgType.REVOKE, MsgType.REGISTER_DICT):
                return self._owner(mtype, body)
            return status_frame(Status.BAD_REQUEST, f"unexpected message type {mtype.name}")
        except PermissionError as exc:
            log.warning("rejected owner frame: %s", exc)
            return status_frame(Status.UNAUTHENTICATED, str(exc))
        except DesyncError as exc:
            return status_frame(Status.DESYNC, str(exc))
        except (FormatError, ProtocolError, MasseError) as exc:
            return status_frame(Status.BAD_REQUEST, str(exc))
        except Exception:  # keep serving other clients
            log.exception("internal error handling %s", mtype.name)
            return status_frame(Status.INTERNAL, "internal error")

    def _search(self, body: bytes) -> bytes:
        token = codec.deserialize(body, self.store.pp, expect=SearchToken)
        outcome = self.store.search(token)
        # denial and unknown keyword look the same from outside
        reply = SearchReply(Status.OK, tuple(outcome.results))
        return encode_frame(MsgType.SEARCH_RESP, codec.serialize(reply))

    def _owner(self, mtype: MsgType, body: bytes) -> bytes:
        seq, payload = open_owner_body(self.channel_key, mtype, body)
        store = self.store
        msg = codec.deserialize(payload, store.pp)
        if OWNER_TYPES.get(type(msg)) is not mtype:
            raise ProtocolError(f"{type(msg).__name__} sent as {mtype.name}")
        with store.lock.write():
            if seq <= store.last_owner_seq:
                return status_frame(Status.REPLAYED, f"sequence {seq} already seen")
            store.last_owner_seq = seq
        apply_owner_message(store, msg)
        if self.on_change is not None:
            self.on_change()
        return status_frame(Status.OK)


def apply_owner_message(store, msg) -> None:
    if isinstance(msg, UpdateMessage):
        store.apply_update(msg)
    elif isinstance(msg, RevocationMessage):
        store.apply_revocation(msg)
    elif isinstance(msg, ClientDictionary):
        store.register(msg)
    elif isinstance(msg, CtokenSupplement):
        store.apply_supplement(msg)
    else:
        raise ProtocolError(f"not an owner message: {type(msg).__name__}")


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        dispatcher: Dispatcher = self.server.dispatcher
        while True:
            try:
                frame = read_frame(self.rfile)
            except ProtocolError as exc:
                log.warning("dropping connection from %s: %s", self.client_address, exc)
                try:
                    self.wfile.write(status_frame(Status.BAD_REQUEST, str(exc)))
                except OSError:
                    pass
                return
            if frame is None:
                return
            self.wfile.write(dispatcher.handle(*frame))
            self.wfile.flush()


class MasseServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], dispatcher: Dispatcher):
        super().__init__(address, _Handler)
        self.dispatcher = dispatcher


def parse_address(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


class RemoteServer:
    """Blocking client connection."""

    def __init__(self, address: str | tuple[str, int], timeout: float = 60.0):
        if isinstance(address, str):
            address = parse_address(address)
        self._sock = socket.create_connection(address, timeout=timeout)
        self._file = self._sock.makefile("rwb")

    def close(self) -> None:
        self._file.close()
        self._sock.close()

    def __enter__(self) -> RemoteServer:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def roundtrip(self, frame: bytes) -> tuple[MsgType, bytes]:
        self._file.write(frame)
        self._file.flush()
        got = read_frame(self._file)
        if got is None:
            raise ProtocolError("server closed the connection")
        return got

    def search(self, token: SearchToken) -> SearchReply:
        mtype, body = self.roundtrip(encode_frame(MsgType.SEARCH_REQ, codec.serialize(token)))
        if mtype is MsgType.STATUS:
            st = codec.deserialize(body, expect=StatusReply)
            raise ProtocolError(f"server error {Status(st.code).name}: {st.message}")
        return codec.deserialize(body, expect=SearchReply)

    def send_owner_frame(self, frame: bytes) -> StatusReply:
        mtype, body = self.roundtrip(frame)
        if mtype is not MsgType.STATUS:
            raise ProtocolError(f"unexpected reply {mtype.name}")
        return codec.deserialize(body, expect=StatusReply)
