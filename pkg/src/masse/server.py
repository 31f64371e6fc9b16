"""Server: holds the EDB and client dictionaries, verifies tokens, runs search."""

from __future__ import annotations

import enum
import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field

from masse import codec
from masse.crypto.params import PublicParams, setup_params
from masse.crypto.primitives import hash_H, xor_bytes
from masse.datamodel import (
    ClientDictionary,
    CtokenSupplement,
    EncryptedDatabase,
    RevocationMessage,
    RevocationScope,
    SearchToken,
    UpdateMessage,
    UpdateOp,
)
from masse.errors import DesyncError, ProtocolError, RegistrationError
from masse.owner import tset_label

log = logging.getLogger(__name__)
audit = logging.getLogger("masse.audit")

MAX_COUNTER = 2**32 - 1


class Verdict(enum.Enum):
    OK = "ok"
    NO_DICTIONARY = "no dictionary"
    ACCESS_DENIED = "access denied"
    UNKNOWN_CTAG = "unknown ctag"


@dataclass
class SearchOutcome:
    verdict: Verdict
    results: list[bytes] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.OK


class RWLock:
    """Many concurrent readers or one writer; waiting writers block new readers."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._waiting_writers = 0

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer or self._waiting_writers:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            self._waiting_writers += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._waiting_writers -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class ServerStore:
    def __init__(
        self,
        edb: EncryptedDatabase,
        dicts: dict[bytes, ClientDictionary] | None = None,
        tombstones: set[bytes] | None = None,
        last_owner_seq: int = 0,
    ) -> None:
        self.pp: PublicParams = setup_params(edb.security_bits)
        self.edb = edb
        self.dicts = dicts if dicts is not None else {}
        self.tombstones = tombstones if tombstones is not None else set()
        self.last_owner_seq = last_owner_seq
        self.lock = RWLock()
        self._g2 = self.pp.g2

    # -- search ---------------------------------------------------------

    def search(self, token: SearchToken) -> SearchOutcome:
        pp = self.pp
        pk = pp.encode(token.client_pk)
        with self.lock.read():
            d = self.dicts.get(pk)
            if d is None:
                return self._reject(Verdict.NO_DICTIONARY, pk)
            if pp.pair(d.sigma, self._g2) != pp.pair(token.a_xtoken * token.wtag1, token.dh):
                return self._reject(Verdict.ACCESS_DENIED, pk)
            theta = self.edb.cset.get(hash_H(pp.encode(token.wtag1)))
            if theta is None:
                return self._reject(Verdict.UNKNOWN_CTAG, pk)
            if len(token.f_h1w1) != len(theta):
                raise ProtocolError("token F(h1, w1) has the wrong length")
            stag = xor_bytes(theta, token.f_h1w1)
            results = self._scan(stag, token.xtokens, d.ctoken)
        audit.info("search ok client=%s n=%d results=%d", pk[:8].hex(), token.n, len(results))
        return SearchOutcome(Verdict.OK, results)

    def _scan(self, stag: bytes, xtokens, ctoken: set[bytes]) -> list[bytes]:
        tset, xset, tomb = self.edb.tset, self.edb.xset, self.tombstones
        encode = self.pp.encode
        out = []
        for c in range(1, MAX_COUNTER + 1):
            label = tset_label(stag, c)
            entry = tset.get(label)
            if entry is None:
                if label in tomb:
                    continue
                break
            for xt in xtokens:
                tag = encode(xt**entry.y)
                if tag not in xset or hash_H(tag) not in ctoken:
                    break
            else:
                out.append(entry.e)
        return out

    def _reject(self, verdict: Verdict, pk: bytes) -> SearchOutcome:
        audit.warning("search rejected client=%s reason=%s", pk[:8].hex(), verdict.value)
        return SearchOutcome(verdict)

    # -- owner-originated mutations ---------------------------------------

    def register(self, d: ClientDictionary) -> None:
        if d.sigma == self.pp.g1_identity():
            raise RegistrationError("dictionary signature is the identity")
        pk = self.pp.encode(d.client_pk)
        with self.lock.write():
            if pk in self.dicts:
                raise RegistrationError("client already has a dictionary")
            self.dicts[pk] = ClientDictionary(d.client_pk, d.sigma, set(d.ctoken))
        audit.info("registered client=%s ctoken=%d", pk[:8].hex(), len(d.ctoken))

    def apply_supplement(self, msg: CtokenSupplement) -> None:
        pk = self.pp.encode(msg.client_pk)
        with self.lock.write():
            d = self.dicts.get(pk)
            if d is None:
                log.warning("supplement for unknown client %s ignored", pk[:8].hex())
                return
            d.ctoken |= msg.added

    def apply_update(self, msg: UpdateMessage) -> None:
        xtag = self.pp.encode(msg.xtag)
        tset = self.edb.tset
        with self.lock.write():
            if msg.op is UpdateOp.ADD:
                if msg.entry is None:
                    raise ProtocolError("add message without a Tset entry")
                if msg.label not in tset:
                    raise DesyncError("add targets a label that holds no dummy entry")
                tset[msg.label] = msg.entry
                self.edb.xset.add(xtag)
                return
            if tset.pop(msg.label, None) is None:
                log.warning("delete of a label with no Tset entry; tombstoned anyway")
            self.tombstones.add(msg.label)
            if xtag in self.edb.xset:
                self.edb.xset.remove(xtag)
            else:
                log.warning("delete of an xtag not present in Xset")

    def apply_revocation(self, msg: RevocationMessage) -> None:
        pk = self.pp.encode(msg.client_pk)
        with self.lock.write():
            d = self.dicts.get(pk)
            if d is None:
                log.warning("revocation for unknown client %s ignored", pk[:8].hex())
                return
            if msg.scope is RevocationScope.FULL:
                del self.dicts[pk]
            else:
                if msg.sigma is None:
                    raise ProtocolError("keyword revocation without a replacement signature")
                d.sigma = msg.sigma
                d.ctoken -= msg.removed
        audit.info("revoked client=%s scope=%s", pk[:8].hex(), msg.scope.name)

    def snapshot(self) -> bytes:
        with self.lock.read():
            return codec.serialize(self)

    def summary(self) -> dict:
        with self.lock.read():
            return {
                "lambda": self.pp.security_bits,
                "curve": self.pp.curve,
                "tset": len(self.edb.tset),
                "xset": len(self.edb.xset),
                "cset": len(self.edb.cset),
                "clients": len(self.dicts),
                "tombstones": len(self.tombstones),
                "last_owner_seq": self.last_owner_seq,
            }


def _write_store(w: codec.Writer, s: ServerStore) -> None:
    codec.write_edb(w, s.edb)
    w.u32(len(s.dicts))
    for pk in sorted(s.dicts):
        codec.write_client_dict(w, s.dicts[pk])
    w.blobs(s.tombstones)
    w.u64(s.last_owner_seq)


def _read_store(r: codec.Reader) -> ServerStore:
    edb = codec.read_edb(r)
    dicts = {}
    for _ in range(r.count()):
        d = codec.read_client_dict(r)
        dicts[r.pp.encode(d.client_pk)] = d
    tomb = set(r.blobs())
    return ServerStore(edb, dicts, tomb, r.u64())


codec.register(codec.Tag.SERVER_STORE, ServerStore, _write_store, _read_store)


def load_store(data: bytes) -> ServerStore:
    """Accept either a full store snapshot or a bare EDB."""
    tag = codec.peek_tag(data)
    if tag is codec.Tag.EDB:
        return ServerStore(codec.deserialize(data))
    return codec.deserialize(data, expect=ServerStore)


# free-function forms of the store methods
def search(store: ServerStore, token: SearchToken) -> SearchOutcome:
    return store.search(token)


def apply_update(store: ServerStore, msg: UpdateMessage) -> None:
    store.apply_update(msg)


def apply_revocation(store: ServerStore, msg: RevocationMessage) -> None:
    store.apply_revocation(msg)
