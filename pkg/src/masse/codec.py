"""Binary encoding of the datamodel.

Layout: ``b"MSSE" | u16 version | u8 type tag | fields``.  Fields follow in
declaration order; variable-length items carry a u32 length, scalars are
fixed 32-byte big-endian, group elements use their compressed encoding.
Decoding validates every group element (curve and subgroup membership).
"""

from __future__ import annotations

import enum
import struct
from typing import Any, Callable

from masse.crypto.params import CURVES, PublicParams, setup_params
from masse.datamodel import (
    ClientCredentials,
    ClientDictionary,
    ClientKey,
    CtokenSupplement,
    EncryptedDatabase,
    KeyTables,
    PlainDatabase,
    RevocationMessage,
    RevocationScope,
    SearchReply,
    SearchToken,
    StatusReply,
    TsetEntry,
    UpdateMessage,
    UpdateOp,
)
from masse.errors import FormatError

MAGIC = b"MSSE"
VERSION = 1
SCALAR_BYTES = 32
MAX_ITEMS = 1 << 26


class Tag(enum.IntEnum):
    PLAIN_DB = 1
    EDB = 2
    KEY_TABLES = 3
    CLIENT_DICT = 4
    CREDENTIALS = 5
    SEARCH_TOKEN = 6
    UPDATE = 7
    REVOCATION = 8
    SUPPLEMENT = 9
    SEARCH_REPLY = 10
    STATUS = 11
    SERVER_STORE = 12
    OWNER_STATE = 13
    CLIENT_KEY = 14


class Writer:
    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> None:
        self._parts.append(data)

    def u8(self, v: int) -> None:
        self._parts.append(struct.pack(">B", v))

    def u16(self, v: int) -> None:
        self._parts.append(struct.pack(">H", v))

    def u32(self, v: int) -> None:
        self._parts.append(struct.pack(">I", v))

    def u64(self, v: int) -> None:
        self._parts.append(struct.pack(">Q", v))

    def blob(self, data: bytes) -> None:
        self.u32(len(data))
        self._parts.append(bytes(data))

    def text(self, s: str) -> None:
        self.blob(s.encode())

    def scalar(self, v: int) -> None:
        self._parts.append(v.to_bytes(SCALAR_BYTES, "big"))

    def elem(self, e) -> None:
        self.blob(e.to_binary())

    def opt_elem(self, e) -> None:
        self.u8(e is not None)
        if e is not None:
            self.elem(e)

    def blobs(self, items) -> None:
        items = sorted(items)
        self.u32(len(items))
        for b in items:
            self.blob(b)

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    """Cursor over an encoding.  ``pp`` may be bound late by a security-bits field."""

    def __init__(self, data: bytes, pp: PublicParams | None = None) -> None:
        self._buf = memoryview(bytes(data))
        self._pos = 0
        self.pp = pp

    def _take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._buf):
            raise FormatError("truncated encoding")
        out = bytes(self._buf[self._pos : self._pos + n])
        self._pos += n
        return out

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def count(self) -> int:
        n = self.u32()
        if n > MAX_ITEMS:
            raise FormatError("item count too large")
        return n

    def blob(self) -> bytes:
        return self._take(self.u32())

    def text(self) -> str:
        try:
            return self.blob().decode()
        except UnicodeDecodeError as exc:
            raise FormatError("invalid UTF-8 text") from exc

    def scalar(self) -> int:
        return int.from_bytes(self._take(SCALAR_BYTES), "big")

    def bind_params(self, security_bits: int) -> None:
        if security_bits not in CURVES:
            raise FormatError(f"unknown security parameter {security_bits}")
        pp = setup_params(security_bits)
        if self.pp is not None and self.pp != pp:
            raise FormatError(
                f"encoding is for lambda={security_bits}, expected {self.pp.security_bits}"
            )
        self.pp = pp

    def _params(self) -> PublicParams:
        if self.pp is None:
            raise FormatError("public parameters needed to decode group elements")
        return self.pp

    def g1(self):
        return self._params().decode_g1(self.blob())

    def g2(self):
        return self._params().decode_g2(self.blob())

    def opt_g1(self):
        return self.g1() if self.flag() else None

    def flag(self) -> bool:
        v = self.u8()
        if v > 1:
            raise FormatError("invalid boolean")
        return bool(v)

    def blobs(self) -> list[bytes]:
        return [self.blob() for _ in range(self.count())]

    def finish(self) -> None:
        if self._pos != len(self._buf):
            raise FormatError("trailing bytes after encoding")


_ENCODERS: dict[type, tuple[Tag, Callable[[Writer, Any], None]]] = {}
_DECODERS: dict[Tag, Callable[[Reader], Any]] = {}


def register(tag: Tag, cls: type, write: Callable[[Writer, Any], None], read: Callable[[Reader], Any]) -> None:
    _ENCODERS[cls] = (tag, write)
    _DECODERS[tag] = read


def serialize(obj) -> bytes:
    try:
        tag, write = _ENCODERS[type(obj)]
    except KeyError:
        raise TypeError(f"no encoding for {type(obj).__name__}") from None
    w = Writer()
    w.raw(MAGIC)
    w.u16(VERSION)
    w.u8(tag)
    write(w, obj)
    return w.getvalue()


def peek_tag(data: bytes) -> Tag:
    r = Reader(data)
    if r.raw(4) != MAGIC:
        raise FormatError("not a MASSE encoding (bad magic)")
    version = r.u16()
    if version != VERSION:
        raise FormatError(f"unsupported encoding version {version}")
    try:
        return Tag(r.u8())
    except ValueError as exc:
        raise FormatError("unknown type tag") from exc


def deserialize(data: bytes, pp: PublicParams | None = None, expect: type | None = None):
    """Decode one object; ``expect`` pins the type so a swapped file is rejected."""
    tag = peek_tag(data)
    if tag not in _DECODERS:
        raise FormatError(f"no decoder registered for {tag.name}")
    if expect is not None and _ENCODERS.get(expect, (None,))[0] != tag:
        raise FormatError(f"expected {expect.__name__}, found {tag.name}")
    r = Reader(data, pp)
    r.raw(7)
    obj = _DECODERS[tag](r)
    r.finish()
    return obj


# --- per-type field layouts -------------------------------------------------


def write_plain_db(w: Writer, db: PlainDatabase) -> None:
    w.u32(len(db.pairs))
    for doc, kw in sorted(db.pairs):
        w.blob(doc)
        w.blob(kw)
    w.u32(len(db.attr_of_kw))
    for kw in sorted(db.attr_of_kw):
        w.blob(kw)
        w.blobs(db.attr_of_kw[kw])


def read_plain_db(r: Reader) -> PlainDatabase:
    pairs = frozenset((r.blob(), r.blob()) for _ in range(r.count()))
    attrs = {}
    for _ in range(r.count()):
        kw = r.blob()
        attrs[kw] = frozenset(r.blobs())
    return PlainDatabase(pairs, attrs)


def write_edb(w: Writer, edb: EncryptedDatabase) -> None:
    w.u16(edb.security_bits)
    w.u32(len(edb.tset))
    for label in sorted(edb.tset):
        e, y = edb.tset[label]
        w.blob(label)
        w.blob(e)
        w.scalar(y)
    w.blobs(edb.xset)
    w.u32(len(edb.cset))
    for ctag in sorted(edb.cset):
        w.blob(ctag)
        w.blob(edb.cset[ctag])


def read_edb(r: Reader) -> EncryptedDatabase:
    bits = r.u16()
    r.bind_params(bits)
    tset = {}
    for _ in range(r.count()):
        label = r.blob()
        tset[label] = TsetEntry(r.blob(), r.scalar())
    xset = set(r.blobs())
    cset = {}
    for _ in range(r.count()):
        ctag = r.blob()
        cset[ctag] = r.blob()
    return EncryptedDatabase(bits, tset, xset, cset)


def write_key_tables(w: Writer, kt: KeyTables) -> None:
    w.u32(len(kt.count))
    for kw in sorted(kt.count):
        w.blob(kw)
        w.blob(kt.s_h[kw])
        w.blob(kt.s_v[kw])
        w.u32(kt.count[kw])


def read_key_tables(r: Reader) -> KeyTables:
    kt = KeyTables()
    for _ in range(r.count()):
        kw = r.blob()
        kt.s_h[kw] = r.blob()
        kt.s_v[kw] = r.blob()
        kt.count[kw] = r.u32()
    return kt


def write_client_dict(w: Writer, d: ClientDictionary) -> None:
    w.elem(d.client_pk)
    w.elem(d.sigma)
    w.blobs(d.ctoken)


def read_client_dict(r: Reader) -> ClientDictionary:
    return ClientDictionary(r.g1(), r.g1(), set(r.blobs()))


def write_credentials(w: Writer, c: ClientCredentials) -> None:
    w.u16(c.security_bits)
    w.blob(c.k_x)
    w.blob(c.k_z)
    w.u32(len(c.per_kw))
    for kw in sorted(c.per_kw):
        h, v = c.per_kw[kw]
        w.blob(kw)
        w.blob(h)
        w.blob(v)
        w.u32(c.freq_hint.get(kw, 0))
    w.elem(c.owner_pk)
    w.elem(c.client_pk)
    w.u8(c.client_sk is not None)
    if c.client_sk is not None:
        w.scalar(c.client_sk)


def read_credentials(r: Reader) -> ClientCredentials:
    bits = r.u16()
    r.bind_params(bits)
    k_x, k_z = r.blob(), r.blob()
    per_kw, freq = {}, {}
    for _ in range(r.count()):
        kw = r.blob()
        per_kw[kw] = (r.blob(), r.blob())
        freq[kw] = r.u32()
    owner_pk = r.g2()
    client_pk = r.g1()
    sk = r.scalar() if r.flag() else None
    dh = owner_pk**sk if sk is not None else None
    return ClientCredentials(bits, k_x, k_z, per_kw, owner_pk, client_pk, sk, freq, dh)


def write_token(w: Writer, t: SearchToken) -> None:
    w.elem(t.client_pk)
    w.elem(t.wtag1)
    w.elem(t.a_xtoken)
    w.elem(t.dh)
    w.blob(t.f_h1w1)
    w.u32(len(t.xtokens))
    for x in t.xtokens:
        w.elem(x)


def read_token(r: Reader) -> SearchToken:
    pk, wtag1, a, dh = r.g1(), r.g1(), r.g1(), r.g2()
    f = r.blob()
    xtokens = tuple(r.g1() for _ in range(r.count()))
    return SearchToken(pk, wtag1, a, dh, f, xtokens)


def write_update(w: Writer, m: UpdateMessage) -> None:
    w.u8(m.op)
    w.blob(m.label)
    w.elem(m.xtag)
    w.u8(m.entry is not None)
    if m.entry is not None:
        w.blob(m.entry.e)
        w.scalar(m.entry.y)


def read_update(r: Reader) -> UpdateMessage:
    try:
        op = UpdateOp(r.u8())
    except ValueError as exc:
        raise FormatError("unknown update operation") from exc
    label = r.blob()
    xtag = r.g1()
    entry = TsetEntry(r.blob(), r.scalar()) if r.flag() else None
    return UpdateMessage(op, label, xtag, entry)


def write_revocation(w: Writer, m: RevocationMessage) -> None:
    w.elem(m.client_pk)
    w.u8(m.scope)
    w.opt_elem(m.sigma)
    w.blobs(m.removed)


def read_revocation(r: Reader) -> RevocationMessage:
    pk = r.g1()
    try:
        scope = RevocationScope(r.u8())
    except ValueError as exc:
        raise FormatError("unknown revocation scope") from exc
    sigma = r.opt_g1()
    return RevocationMessage(pk, scope, sigma, frozenset(r.blobs()))


def write_supplement(w: Writer, m: CtokenSupplement) -> None:
    w.elem(m.client_pk)
    w.blobs(m.added)


def read_supplement(r: Reader) -> CtokenSupplement:
    return CtokenSupplement(r.g1(), frozenset(r.blobs()))


def write_reply(w: Writer, m: SearchReply) -> None:
    w.u8(m.status)
    w.u32(len(m.results))
    for e in m.results:
        w.blob(e)


def read_reply(r: Reader) -> SearchReply:
    status = r.u8()
    return SearchReply(status, tuple(r.blob() for _ in range(r.count())))


def write_status(w: Writer, m: StatusReply) -> None:
    w.u8(m.code)
    w.text(m.message)


def read_status(r: Reader) -> StatusReply:
    return StatusReply(r.u8(), r.text())


def write_client_key(w: Writer, k: ClientKey) -> None:
    w.u16(k.security_bits)
    w.elem(k.pk)
    w.u8(k.sk is not None)
    if k.sk is not None:
        w.scalar(k.sk)


def read_client_key(r: Reader) -> ClientKey:
    bits = r.u16()
    r.bind_params(bits)
    pk = r.g1()
    return ClientKey(bits, pk, r.scalar() if r.flag() else None)


register(Tag.PLAIN_DB, PlainDatabase, write_plain_db, read_plain_db)
register(Tag.EDB, EncryptedDatabase, write_edb, read_edb)
register(Tag.KEY_TABLES, KeyTables, write_key_tables, read_key_tables)
register(Tag.CLIENT_DICT, ClientDictionary, write_client_dict, read_client_dict)
register(Tag.CREDENTIALS, ClientCredentials, write_credentials, read_credentials)
register(Tag.SEARCH_TOKEN, SearchToken, write_token, read_token)
register(Tag.UPDATE, UpdateMessage, write_update, read_update)
register(Tag.REVOCATION, RevocationMessage, write_revocation, read_revocation)
register(Tag.SUPPLEMENT, CtokenSupplement, write_supplement, read_supplement)
register(Tag.SEARCH_REPLY, SearchReply, write_reply, read_reply)
register(Tag.STATUS, StatusReply, write_status, read_status)
register(Tag.CLIENT_KEY, ClientKey, write_client_key, read_client_key)
