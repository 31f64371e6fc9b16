"""Data owner: keys, encrypted-database construction, registration, updates, revocation."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Iterable

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from masse import codec
from masse.crypto.params import PublicParams
from masse.crypto.primitives import hash_H, sym_encrypt, xor_bytes
from masse.datamodel import (
    ATTR_BLOCK,
    ClientCredentials,
    ClientDictionary,
    CtokenSupplement,
    EncryptedDatabase,
    KeyTables,
    PlainDatabase,
    RevocationMessage,
    RevocationScope,
    TsetEntry,
    UpdateMessage,
    UpdateOp,
    dummy_id,
    validate_doc_id,
)
from masse.errors import (
    CapacityError,
    FormatError,
    MasseError,
    NotFoundError,
    RegistrationError,
)

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 16
MAX_COUNTER = 2**32 - 1


# --- derivations shared by setup, registration and updates -----------------


def attribute_block(attrs: Iterable[bytes]) -> bytes:
    """XOR of the attributes, each zero-padded to a 32-byte block."""
    acc = bytes(ATTR_BLOCK)
    for a in attrs:
        if len(a) > ATTR_BLOCK:
            raise ValueError(f"attribute longer than {ATTR_BLOCK} bytes: {a!r}")
        acc = xor_bytes(acc, a.ljust(ATTR_BLOCK, b"\x00"))
    return acc


def keyword_keys(pp: PublicParams, k1: bytes, attrs: Iterable[bytes]) -> tuple[bytes, bytes]:
    """(h, v) for a keyword from its attribute set.

    Keywords with identical attribute sets get identical (h, v).
    """
    l = pp.F(k1, attribute_block(attrs), b"l")
    h = pp.F(k1, l, b"h")
    return h, pp.F(k1, h, b"v")


def counter_bytes(c: int) -> bytes:
    return c.to_bytes(4, "big")


def tset_label(stag: bytes, c: int) -> bytes:
    return hash_H(stag + counter_bytes(c))


def wtag_exponent(pp: PublicParams, v: bytes, keyword: bytes) -> int:
    return pp.Fp(v, keyword, b"wtag")


@dataclass(frozen=True)
class MasterKeys:
    k1: bytes
    k2: bytes
    k_t: bytes
    k_x: bytes
    k_z: bytes


@dataclass
class RegisteredClient:
    attrs: frozenset[bytes]
    keywords: frozenset[bytes]  # W̄_C
    gamma: int


@dataclass
class OwnerState:
    pp: PublicParams
    keys: MasterKeys
    sk_o: int
    pk_o: object
    channel_key: bytes  # authenticates owner frames to the server
    alpha: int = DEFAULT_ALPHA
    attr_of_kw: dict[bytes, frozenset[bytes]] = field(default_factory=dict)
    kw_index: dict[bytes, int] = field(default_factory=dict)
    key_tables: KeyTables = field(default_factory=KeyTables)
    locator: dict[bytes, dict[bytes, int]] = field(default_factory=dict)  # w -> doc -> c
    next_free_slot: dict[bytes, int] = field(default_factory=dict)
    # every document ever paired with a keyword, so granular revocation can
    # strip Ctoken hashes for pairs added after registration too
    history: dict[bytes, set[bytes]] = field(default_factory=dict)
    registered: dict[bytes, RegisteredClient] = field(default_factory=dict)
    out_seq: int = 0

    @property
    def is_setup(self) -> bool:
        return bool(self.key_tables.count)

    @property
    def kw_of_attr(self) -> dict[bytes, frozenset[bytes]]:
        out: dict[bytes, set[bytes]] = {}
        for kw, attrs in self.attr_of_kw.items():
            for a in attrs:
                out.setdefault(a, set()).add(kw)
        return {a: frozenset(k) for a, k in out.items()}

    def docs(self, keyword: bytes) -> list[bytes]:
        return sorted(self.locator.get(keyword, ()))

    def real_count(self, keyword: bytes) -> int:
        return len(self.locator.get(keyword, ()))

    def plain_database(self) -> PlainDatabase:
        """Current plaintext view (setup contents with updates applied)."""
        pairs = frozenset((d, w) for w, docs in self.locator.items() for d in docs)
        live = {w for (_, w) in pairs}
        return PlainDatabase(pairs, {w: a for w, a in self.attr_of_kw.items() if w in live})

    def next_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq

    # per-keyword derived values -------------------------------------------

    def stag(self, keyword: bytes) -> bytes:
        return self.pp.F(self.keys.k_t, keyword, b"stag")

    def xtrap(self, keyword: bytes) -> int:
        return self.pp.Fp(self.keys.k_x, keyword, b"xtrap")

    def z(self, keyword: bytes) -> int:
        return self.pp.Fp(self.keys.k_z, keyword, b"z")

    def x(self, doc: bytes) -> int:
        return self.pp.Fp(self.keys.k2, doc, b"x")

    def entry(self, keyword: bytes, doc: bytes, z_inv: int | None = None) -> tuple[TsetEntry, object]:
        """Tset entry (e, y) and xtag for one (keyword, doc) pair."""
        pp = self.pp
        if z_inv is None:
            z_inv = pow(self.z(keyword), -1, pp.order)
        x = self.x(doc)
        e = sym_encrypt(self.key_tables.s_v[keyword], doc)
        xtag = pp.g1 ** (self.xtrap(keyword) * x % pp.order)
        return TsetEntry(e, x * z_inv % pp.order), xtag

    def ctoken_hash(self, keyword: bytes, doc: bytes, xtrap: int | None = None) -> bytes:
        if xtrap is None:
            xtrap = self.xtrap(keyword)
        pp = self.pp
        return hash_H(pp.encode(pp.g1 ** (xtrap * self.x(doc) % pp.order)))

    def keyword_gamma(self, keyword: bytes) -> int:
        return wtag_exponent(self.pp, self.key_tables.s_v[keyword], keyword)


def keygen_owner(pp: PublicParams, alpha: int = DEFAULT_ALPHA) -> OwnerState:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    kb = pp.key_bytes
    keys = MasterKeys(*(os.urandom(kb) for _ in range(5)))
    sk_o = pp.random_scalar()
    return OwnerState(pp, keys, sk_o, pp.g2**sk_o, os.urandom(32), alpha)


def edb_setup(
    db: PlainDatabase, state: OwnerState, alpha: int | None = None
) -> tuple[EncryptedDatabase, KeyTables, dict[bytes, int]]:
    """Build (Tset, Xset, Cset) and populate the owner's tables.

    Real entries take counters 1..|DB(w)|, dummies the next ``alpha``
    counters.  Returns the EDB, the key tables and Count.
    """
    db.validate()
    if state.is_setup:
        raise MasseError("owner state already holds an encrypted database; use a fresh state")
    if alpha is not None:
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        state.alpha = alpha
    pp, keys, a = state.pp, state.keys, state.alpha
    if any(len(docs) + a + 1 > MAX_COUNTER for docs in db.index.values()):
        raise CapacityError("keyword has more entries than the 32-bit counter allows")
    edb = EncryptedDatabase(pp.security_bits)
    kt = state.key_tables
    state.attr_of_kw = dict(db.attr_of_kw)

    for j, (w, docs) in enumerate(db.index.items()):
        state.kw_index[w] = j
        h, v = keyword_keys(pp, keys.k1, db.attr_of_kw[w])
        kt.s_h[w], kt.s_v[w] = h, v
        ctag = hash_H(pp.encode(pp.g1 ** wtag_exponent(pp, v, w)))
        stag = state.stag(w)
        if ctag in edb.cset:
            raise MasseError("ctag collision during setup")
        edb.cset[ctag] = xor_bytes(stag, pp.F(h, w, b"theta"))

        z_inv = pow(state.z(w), -1, pp.order)
        padded = list(docs) + [dummy_id(j, s) for s in range(a)]
        slots = state.locator[w] = {}
        for c, ind in enumerate(padded, start=1):
            entry, xtag = state.entry(w, ind, z_inv)
            label = tset_label(stag, c)
            if label in edb.tset:
                raise MasseError("Tset label collision during setup")
            edb.tset[label] = entry
            edb.xset.add(pp.encode(xtag))
            if c <= len(docs):
                slots[ind] = c
        kt.count[w] = len(padded) + 1
        state.next_free_slot[w] = len(docs) + 1
        state.history[w] = set(docs)
    log.info("setup: D=%d N=%d alpha=%d |Tset|=%d", len(db.index), len(db), a, len(edb.tset))
    return edb, kt, dict(kt.count)


def _client_key(pp: PublicParams, client_pk) -> bytes:
    if client_pk == pp.g1_identity():
        raise RegistrationError("client public key is the identity")
    return pp.encode(client_pk)


def issue_credentials(state: OwnerState, client_pk) -> ClientCredentials:
    """keys_C for a registered client's current keyword set (no secret key attached)."""
    pp = state.pp
    reg = state.registered.get(_client_key(pp, client_pk))
    if reg is None:
        raise NotFoundError("client is not registered")
    kt = state.key_tables
    return ClientCredentials(
        security_bits=pp.security_bits,
        k_x=state.keys.k_x,
        k_z=state.keys.k_z,
        per_kw={w: (kt.s_h[w], kt.s_v[w]) for w in sorted(reg.keywords)},
        owner_pk=state.pk_o,
        client_pk=client_pk,
        freq_hint={w: state.real_count(w) for w in sorted(reg.keywords)},
    )


def _ctoken_for(state: OwnerState, keywords: Iterable[bytes]) -> set[bytes]:
    out = set()
    for w in keywords:
        xtrap = state.xtrap(w)
        for d in state.docs(w):
            out.add(state.ctoken_hash(w, d, xtrap))
    return out


def register_client(
    state: OwnerState, attrs: Iterable[bytes], client_pk
) -> tuple[ClientDictionary, ClientCredentials]:
    pp = state.pp
    if not state.is_setup:
        raise RegistrationError("run setup before registering clients")
    key = _client_key(pp, client_pk)
    if key in state.registered:
        raise RegistrationError("client is already registered")
    attrs = frozenset(attrs)
    kw_of_attr = state.kw_of_attr
    unknown = sorted(a for a in attrs if a not in kw_of_attr)
    if unknown:
        raise RegistrationError(f"unknown attributes: {unknown!r}")
    keywords = frozenset().union(*(kw_of_attr[a] for a in attrs))
    if not keywords:
        raise RegistrationError("attribute set authorizes no keywords")
    gamma = sum(state.keyword_gamma(w) for w in keywords) % pp.order
    if gamma == 0:
        raise RegistrationError("degenerate accumulator; re-key the client")
    sigma = client_pk ** (gamma * state.sk_o % pp.order)
    d = ClientDictionary(client_pk, sigma, _ctoken_for(state, keywords))
    state.registered[key] = RegisteredClient(attrs, keywords, gamma)
    log.info("registered client: %d keywords, %d ctoken entries", len(keywords), len(d.ctoken))
    return d, issue_credentials(state, client_pk)


def make_ctoken_supplement(state: OwnerState, client_pk) -> CtokenSupplement:
    """Hashes for every current authorized pair; the server merges them additively."""
    reg = state.registered.get(_client_key(state.pp, client_pk))
    if reg is None:
        raise NotFoundError("client is not registered")
    return CtokenSupplement(client_pk, frozenset(_ctoken_for(state, reg.keywords)))


def make_update(state: OwnerState, op: UpdateOp | str, keyword: bytes, doc_id: bytes) -> UpdateMessage:
    op = UpdateOp[op.upper()] if isinstance(op, str) else UpdateOp(op)
    if keyword not in state.key_tables.count:
        raise NotFoundError(f"unknown keyword {keyword!r}")
    validate_doc_id(doc_id)
    pp = state.pp
    stag = state.stag(keyword)

    if op is UpdateOp.ADD:
        if doc_id in state.locator[keyword]:
            raise MasseError(f"pair ({keyword!r}, {doc_id!r}) already present")
        c = state.next_free_slot[keyword]
        if c >= state.key_tables.count[keyword]:
            raise CapacityError(
                f"no dummy slots left for {keyword!r}; rebuild the database with a larger alpha"
            )
        entry, xtag = state.entry(keyword, doc_id)
        state.next_free_slot[keyword] = c + 1
        state.locator[keyword][doc_id] = c
        state.history[keyword].add(doc_id)
        return UpdateMessage(op, tset_label(stag, c), xtag, entry)

    c = state.locator[keyword].pop(doc_id, None)
    if c is None:
        raise NotFoundError(f"pair ({keyword!r}, {doc_id!r}) not present")
    xtag = pp.g1 ** (state.xtrap(keyword) * state.x(doc_id) % pp.order)
    return UpdateMessage(op, tset_label(stag, c), xtag)


def make_revocation(state: OwnerState, client_pk, keyword: bytes | None = None) -> RevocationMessage:
    pp = state.pp
    key = _client_key(pp, client_pk)
    reg = state.registered.get(key)
    if reg is None:
        raise NotFoundError("client is not registered")
    if keyword is not None and keyword not in reg.keywords:
        raise NotFoundError(f"keyword {keyword!r} is not authorized for this client")
    if keyword is None or reg.keywords == {keyword}:
        # revoking the last keyword leaves nothing to accumulate: same as full revocation
        del state.registered[key]
        return RevocationMessage(client_pk, RevocationScope.FULL)
    gamma = (reg.gamma - state.keyword_gamma(keyword)) % pp.order
    xtrap = state.xtrap(keyword)
    removed = frozenset(state.ctoken_hash(keyword, d, xtrap) for d in state.history[keyword])
    state.registered[key] = replace(reg, keywords=reg.keywords - {keyword}, gamma=gamma)
    sigma = client_pk ** (gamma * state.sk_o % pp.order)
    return RevocationMessage(client_pk, RevocationScope.KEYWORD, sigma, removed)


# --- persistence -----------------------------------------------------------


def _write_state(w: codec.Writer, s: OwnerState) -> None:
    w.u16(s.pp.security_bits)
    for k in (s.keys.k1, s.keys.k2, s.keys.k_t, s.keys.k_x, s.keys.k_z, s.channel_key):
        w.blob(k)
    w.scalar(s.sk_o)
    w.u32(s.alpha)
    w.u64(s.out_seq)
    w.u32(len(s.attr_of_kw))
    for kw in sorted(s.attr_of_kw):
        w.blob(kw)
        w.u32(s.kw_index.get(kw, 0))
        w.blobs(s.attr_of_kw[kw])
        w.u32(s.next_free_slot.get(kw, 0))
        w.blobs(s.history.get(kw, ()))
    codec.write_key_tables(w, s.key_tables)
    pairs = sorted((kw, doc, c) for kw, docs in s.locator.items() for doc, c in docs.items())
    w.u32(len(pairs))
    for kw, doc, c in pairs:
        w.blob(kw)
        w.blob(doc)
        w.u32(c)
    w.u32(len(s.registered))
    for pk in sorted(s.registered):
        reg = s.registered[pk]
        w.blob(pk)
        w.blobs(reg.attrs)
        w.blobs(reg.keywords)
        w.scalar(reg.gamma)


def _read_state(r: codec.Reader) -> OwnerState:
    r.bind_params(r.u16())
    pp = r.pp
    k1, k2, k_t, k_x, k_z, chan = (r.blob() for _ in range(6))
    sk_o = r.scalar()
    s = OwnerState(pp, MasterKeys(k1, k2, k_t, k_x, k_z), sk_o, pp.g2**sk_o, chan, r.u32())
    s.out_seq = r.u64()
    for _ in range(r.count()):
        kw = r.blob()
        s.kw_index[kw] = r.u32()
        s.attr_of_kw[kw] = frozenset(r.blobs())
        s.next_free_slot[kw] = r.u32()
        s.history[kw] = set(r.blobs())
        s.locator[kw] = {}
    s.key_tables = codec.read_key_tables(r)
    for _ in range(r.count()):
        kw, doc = r.blob(), r.blob()
        s.locator.setdefault(kw, {})[doc] = r.u32()
    for _ in range(r.count()):
        pk = r.blob()
        pp.decode_g1(pk)
        s.registered[pk] = RegisteredClient(frozenset(r.blobs()), frozenset(r.blobs()), r.scalar())
    return s


codec.register(codec.Tag.OWNER_STATE, OwnerState, _write_state, _read_state)

_SEAL_MAGIC = b"MSOW"
_SCRYPT_N = 2**14


def _kdf(passphrase: str, salt: bytes) -> bytes:
    return Scrypt(salt=salt, length=32, n=_SCRYPT_N, r=8, p=1).derive(passphrase.encode())


def seal_state(state: OwnerState, passphrase: str) -> bytes:
    """Owner state encrypted under a scrypt-derived AES-GCM key."""
    salt, nonce = os.urandom(16), os.urandom(12)
    body = AESGCM(_kdf(passphrase, salt)).encrypt(nonce, codec.serialize(state), _SEAL_MAGIC)
    return _SEAL_MAGIC + salt + nonce + body


def unseal_state(blob: bytes, passphrase: str) -> OwnerState:
    if blob[:4] != _SEAL_MAGIC or len(blob) < 4 + 16 + 12 + 16:
        raise FormatError("not a sealed owner state file")
    salt, nonce, body = blob[4:20], blob[20:32], blob[32:]
    try:
        plain = AESGCM(_kdf(passphrase, salt)).decrypt(nonce, body, _SEAL_MAGIC)
    except InvalidTag as exc:
        raise FormatError("wrong passphrase or corrupted state file") from exc
    return codec.deserialize(plain, expect=OwnerState)
