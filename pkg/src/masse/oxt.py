"""Single-client OXT, the comparison baseline.

Unlike MASSE, the blinding factor z is per (keyword, counter), so the
owner must produce an xtoken for every pivot entry and every x-term.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

from masse.crypto.params import PublicParams
from masse.crypto.primitives import sym_decrypt, sym_encrypt
from masse.datamodel import PlainDatabase, TsetEntry
from masse.errors import FormatError
from masse.owner import counter_bytes


@dataclass(frozen=True)
class OxtKeys:
    k_s: bytes
    k_i: bytes
    k_t: bytes
    k_z: bytes
    k_x: bytes


@dataclass
class OxtDatabase:
    tset: dict[bytes, list[TsetEntry]] = field(default_factory=dict)  # stag -> entries
    xset: set[bytes] = field(default_factory=set)


@dataclass(frozen=True)
class OxtToken:
    stag: bytes
    xtokens: tuple[tuple, ...]  # xtokens[c-1][j-2]


def oxt_keygen(pp: PublicParams) -> OxtKeys:
    return OxtKeys(*(os.urandom(pp.key_bytes) for _ in range(5)))


def _stag(pp: PublicParams, keys: OxtKeys, w: bytes) -> bytes:
    return pp.F(keys.k_t, w, b"stag")


def _z(pp: PublicParams, keys: OxtKeys, w: bytes, c: int) -> int:
    return pp.Fp(keys.k_z, w + counter_bytes(c), b"z")


def oxt_setup(pp: PublicParams, db: PlainDatabase, keys: OxtKeys) -> OxtDatabase:
    db.validate()
    p = pp.order
    out = OxtDatabase()
    for w, docs in db.index.items():
        k_e = pp.F(keys.k_s, w, b"ke")
        xtrap = pp.Fp(keys.k_x, w, b"xtrap")
        entries = []
        for c, ind in enumerate(docs, start=1):
            xind = pp.Fp(keys.k_i, ind, b"xind")
            y = xind * pow(_z(pp, keys, w, c), -1, p) % p
            entries.append(TsetEntry(sym_encrypt(k_e, ind), y))
            out.xset.add(pp.encode(pp.g1 ** (xtrap * xind % p)))
        out.tset[_stag(pp, keys, w)] = entries
    return out


def oxt_token(pp: PublicParams, keys: OxtKeys, q: Sequence[bytes], pivot_count: int) -> OxtToken:
    """(n-1) * pivot_count exponentiations."""
    p = pp.order
    w1 = q[0]
    xtraps = [pp.Fp(keys.k_x, w, b"xtrap") for w in q[1:]]
    rows = []
    for c in range(1, pivot_count + 1):
        z = _z(pp, keys, w1, c)
        rows.append(tuple(pp.g1 ** (z * xt % p) for xt in xtraps))
    return OxtToken(_stag(pp, keys, w1), tuple(rows))


def oxt_server_search(pp: PublicParams, db: OxtDatabase, token: OxtToken) -> list[bytes]:
    out = []
    encode = pp.encode
    for entry, row in zip(db.tset.get(token.stag, ()), token.xtokens):
        if all(encode(xt**entry.y) in db.xset for xt in row):
            out.append(entry.e)
    return out


def oxt_search(pp: PublicParams, db: OxtDatabase, keys: OxtKeys, q: Sequence[bytes]) -> list[bytes]:
    """Full interactive search: the server reports |Tset[stag]|, the owner derives xtokens."""
    if not q:
        raise ValueError("query needs at least one keyword")
    count = len(db.tset.get(_stag(pp, keys, q[0]), ()))
    return oxt_server_search(pp, db, oxt_token(pp, keys, q, count))


def oxt_decrypt(pp: PublicParams, keys: OxtKeys, pivot: bytes, results: Sequence[bytes]) -> set[bytes]:
    k_e = pp.F(keys.k_s, pivot, b"ke")
    out = set()
    for e in results:
        try:
            out.add(sym_decrypt(k_e, e))
        except FormatError:
            continue
    return out
