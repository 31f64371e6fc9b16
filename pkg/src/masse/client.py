"""Client: keypair, search tokens, result decryption."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from masse.crypto.params import PublicParams, setup_params
from masse.crypto.primitives import sym_decrypt
from masse.datamodel import ClientCredentials, SearchToken, is_dummy_id
from masse.errors import AuthorizationError, FormatError
from masse.owner import wtag_exponent

log = logging.getLogger(__name__)


def keygen_client(pp: PublicParams) -> tuple[int, object]:
    sk = pp.random_scalar()
    return sk, pp.g1**sk


def attach_secret(creds: ClientCredentials, client_sk: int) -> ClientCredentials:
    """Bind issued credentials to the client's secret key and cache dh = pk_O^sk_C."""
    pp = setup_params(creds.security_bits)
    if pp.g1**client_sk != creds.client_pk:
        raise AuthorizationError("secret key does not match the credentials' public key")
    return replace(creds, client_sk=client_sk, dh=creds.owner_pk**client_sk)


@dataclass(frozen=True)
class QuerySpec:
    """Conjunctive query; ``keywords[0]`` is the pivot."""

    keywords: tuple[bytes, ...]

    def __post_init__(self):
        object.__setattr__(self, "keywords", tuple(self.keywords))
        if not self.keywords:
            raise ValueError("query needs at least one keyword")
        if len(set(self.keywords)) != len(self.keywords):
            raise ValueError("query keywords must be distinct")

    @property
    def pivot(self) -> bytes:
        return self.keywords[0]

    @property
    def n(self) -> int:
        return len(self.keywords)

    @classmethod
    def plan(cls, keywords: Iterable[bytes], creds: ClientCredentials | None = None) -> QuerySpec:
        """Order keywords so the least frequent one (per the credential hints) is the pivot."""
        kws = list(keywords)
        hints = creds.freq_hint if creds is not None else {}
        if kws and all(w in hints for w in kws):
            pivot = min(kws, key=lambda w: (hints[w], kws.index(w)))
            kws.remove(pivot)
            kws.insert(0, pivot)
        return cls(tuple(kws))


def token_gen(q: QuerySpec | Sequence[bytes], creds: ClientCredentials, *, unchecked: bool = False) -> SearchToken:
    """Search token for ``q``.

    ``unchecked`` skips the client-side authorization check; it exists so
    tests can push out-of-policy tokens at the server.
    """
    if not isinstance(q, QuerySpec):
        q = QuerySpec(tuple(q))
    if creds.client_sk is None:
        raise AuthorizationError("credentials have no secret key attached")
    missing = [w for w in q.keywords if w not in creds.per_kw]
    if missing and not unchecked:
        raise AuthorizationError(f"keywords outside the authorized set: {missing!r}")
    pp = setup_params(creds.security_bits)
    p = pp.order
    w1 = q.pivot
    h1, v1 = creds.per_kw.get(w1) or (bytes(pp.key_bytes), bytes(pp.key_bytes))

    wtag1 = pp.g1 ** wtag_exponent(pp, v1, w1)
    acc = sum(wtag_exponent(pp, v, w) for w, (_, v) in creds.per_kw.items() if w != w1) % p
    z1 = pp.Fp(creds.k_z, w1, b"z")
    xtokens = tuple(
        pp.g1 ** (pp.Fp(creds.k_x, w, b"xtrap") * z1 % p) for w in q.keywords[1:]
    )
    return SearchToken(
        client_pk=creds.client_pk,
        wtag1=wtag1,
        a_xtoken=pp.g1**acc,
        dh=creds.dh if creds.dh is not None else creds.owner_pk**creds.client_sk,
        f_h1w1=pp.F(h1, w1, b"theta"),
        xtokens=xtokens,
    )


@dataclass
class DecryptStats:
    returned: int = 0
    dummies: int = 0
    undecryptable: int = 0


def decrypt_results(
    results: Iterable[bytes],
    creds: ClientCredentials,
    pivot: bytes,
    stats: DecryptStats | None = None,
) -> set[bytes]:
    """Decrypt under v_1, dropping padding entries and anything that fails the framing check."""
    if pivot not in creds.per_kw:
        raise AuthorizationError(f"pivot {pivot!r} is not in the credentials")
    stats = stats if stats is not None else DecryptStats()
    v1 = creds.per_kw[pivot][1]
    out = set()
    for e in results:
        stats.returned += 1
        try:
            ind = sym_decrypt(v1, e)
        except FormatError:
            stats.undecryptable += 1
            continue
        if is_dummy_id(ind):
            stats.dummies += 1
            continue
        out.add(ind)
    if stats.undecryptable:
        log.warning("%d result(s) failed to decrypt under the pivot key", stats.undecryptable)
    return out


def drop_keyword(creds: ClientCredentials, keyword: bytes) -> ClientCredentials:
    """Local view after a granular revocation: the keyword's (h, v) are forgotten."""
    per_kw = {w: hv for w, hv in creds.per_kw.items() if w != keyword}
    hints = {w: c for w, c in creds.freq_hint.items() if w != keyword}
    return replace(creds, per_kw=per_kw, freq_hint=hints)
