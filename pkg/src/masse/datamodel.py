"""Value types shared by the owner, client and server.

Group elements are stored as backend objects (see ``PublicParams``);
scalars as plain ints in [1, p-1]; labels, tags and keys as bytes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

from masse.crypto.primitives import MAX_ID_LEN

ATTR_BLOCK = 32
DUMMY_PREFIX = b"\xff"


def dummy_id(keyword_index: int, slot: int) -> bytes:
    """Identifier of a padding entry; real identifiers never start with 0xFF."""
    return DUMMY_PREFIX + keyword_index.to_bytes(4, "big") + slot.to_bytes(4, "big")


def is_dummy_id(doc_id: bytes) -> bool:
    return doc_id.startswith(DUMMY_PREFIX)


def validate_doc_id(doc: bytes) -> None:
    if not doc or len(doc) > MAX_ID_LEN:
        raise ValueError(f"document identifier must be 1..{MAX_ID_LEN} bytes: {doc!r}")
    if is_dummy_id(doc):
        raise ValueError(f"identifier {doc!r} uses the reserved 0xFF prefix")


@dataclass(frozen=True)
class PlainDatabase:
    """The owner's plaintext view: (doc_id, keyword) pairs and keyword attributes."""

    pairs: frozenset[tuple[bytes, bytes]]
    attr_of_kw: Mapping[bytes, frozenset[bytes]]

    @classmethod
    def from_index(
        cls,
        index: Mapping[bytes, Iterable[bytes]],
        attr_of_kw: Mapping[bytes, Iterable[bytes]],
    ) -> PlainDatabase:
        pairs = frozenset((doc, kw) for kw, docs in index.items() for doc in docs)
        return cls(pairs, {kw: frozenset(a) for kw, a in attr_of_kw.items()})

    @cached_property
    def index(self) -> dict[bytes, tuple[bytes, ...]]:
        """DB(w) for every keyword, identifiers sorted for deterministic counters."""
        out: dict[bytes, list[bytes]] = {}
        for doc, kw in self.pairs:
            out.setdefault(kw, []).append(doc)
        return {kw: tuple(sorted(docs)) for kw, docs in sorted(out.items())}

    @property
    def keywords(self) -> tuple[bytes, ...]:
        return tuple(self.index)

    @cached_property
    def kw_of_attr(self) -> dict[bytes, frozenset[bytes]]:
        out: dict[bytes, set[bytes]] = {}
        for kw, attrs in self.attr_of_kw.items():
            for a in attrs:
                out.setdefault(a, set()).add(kw)
        return {a: frozenset(kws) for a, kws in sorted(out.items())}

    def docs(self, keyword: bytes) -> tuple[bytes, ...]:
        return self.index.get(keyword, ())

    def __len__(self) -> int:
        return len(self.pairs)

    def validate(self) -> None:
        for doc, kw in self.pairs:
            validate_doc_id(doc)
            if not kw:
                raise ValueError("empty keyword")
        for kw in self.index:
            if not self.attr_of_kw.get(kw):
                raise ValueError(f"keyword {kw!r} has no attributes")
        for kw, attrs in self.attr_of_kw.items():
            if kw not in self.index:
                raise ValueError(f"keyword {kw!r} has attributes but no documents")
            for a in attrs:
                if not a or len(a) > ATTR_BLOCK:
                    raise ValueError(f"attribute must be 1..{ATTR_BLOCK} bytes: {a!r}")

    def with_pair(self, doc: bytes, keyword: bytes) -> PlainDatabase:
        return PlainDatabase(self.pairs | {(doc, keyword)}, self.attr_of_kw)

    def without_pair(self, doc: bytes, keyword: bytes) -> PlainDatabase:
        # keyword metadata is kept so the keyword stays searchable after its last doc goes
        return PlainDatabase(self.pairs - {(doc, keyword)}, self.attr_of_kw)


class TsetEntry(NamedTuple):
    e: bytes
    y: int


@dataclass
class EncryptedDatabase:
    """Server-held index: Tset (label -> (e, y)), Xset (xtag encodings), Cset (ctag -> theta)."""

    security_bits: int
    tset: dict[bytes, TsetEntry] = field(default_factory=dict)
    xset: set[bytes] = field(default_factory=set)
    cset: dict[bytes, bytes] = field(default_factory=dict)


@dataclass
class KeyTables:
    s_h: dict[bytes, bytes] = field(default_factory=dict)
    s_v: dict[bytes, bytes] = field(default_factory=dict)
    # one past the last counter written at setup (real + dummy entries + 1)
    count: dict[bytes, int] = field(default_factory=dict)


@dataclass
class ClientDictionary:
    """D_C: the owner's signature on the client's accumulator plus its Ctoken hash set."""

    client_pk: object
    sigma: object
    ctoken: set[bytes] = field(default_factory=set)


@dataclass(frozen=True)
class ClientCredentials:
    """keys_C as issued by the owner; ``client_sk`` is attached by the client itself."""

    security_bits: int
    k_x: bytes
    k_z: bytes
    per_kw: Mapping[bytes, tuple[bytes, bytes]]  # keyword -> (h, v)
    owner_pk: object
    client_pk: object
    client_sk: int | None = None
    # real document counts at issuance, used only to pick the pivot
    freq_hint: Mapping[bytes, int] = field(default_factory=dict)
    # pk_O^sk_C, query-independent; filled in when the secret key is attached
    dh: object | None = field(default=None, compare=False, repr=False)

    @property
    def keywords(self) -> frozenset[bytes]:
        return frozenset(self.per_kw)


@dataclass(frozen=True)
class ClientKey:
    """A client keypair on disk; ``sk`` is None in the public half."""

    security_bits: int
    pk: object
    sk: int | None = None

    def public(self) -> ClientKey:
        return ClientKey(self.security_bits, self.pk)


@dataclass(frozen=True)
class SearchToken:
    client_pk: object
    wtag1: object
    a_xtoken: object
    dh: object
    f_h1w1: bytes
    xtokens: tuple = ()

    @property
    def n(self) -> int:
        return len(self.xtokens) + 1


class UpdateOp(enum.IntEnum):
    ADD = 1
    DEL = 2


@dataclass(frozen=True)
class UpdateMessage:
    op: UpdateOp
    label: bytes
    xtag: object
    entry: TsetEntry | None = None


class RevocationScope(enum.IntEnum):
    FULL = 1
    KEYWORD = 2


@dataclass(frozen=True)
class RevocationMessage:
    client_pk: object
    scope: RevocationScope
    sigma: object | None = None
    removed: frozenset[bytes] = frozenset()


@dataclass(frozen=True)
class CtokenSupplement:
    """Additive Ctoken delta for documents added after a client registered."""

    client_pk: object
    added: frozenset[bytes]


@dataclass(frozen=True)
class SearchReply:
    status: int
    results: tuple[bytes, ...] = ()


@dataclass(frozen=True)
class StatusReply:
    code: int
    message: str = ""
