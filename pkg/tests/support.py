"""Shared helpers for the test suite: small corpora, a one-client world, the plaintext oracle."""

import random

from masse import client, owner
from masse.datamodel import PlainDatabase
from masse.server import ServerStore

# filled by the acceptance suite, echoed at the end of the run
CRITERIA: dict[int, tuple[bool, str]] = {}


def small_db() -> PlainDatabase:
    return PlainDatabase.from_index(
        {
            b"alpha": [b"d1", b"d2", b"d3", b"d5"],
            b"beta": [b"d2", b"d3", b"d4"],
            b"gamma": [b"d3", b"d5", b"d6"],
            b"delta": [b"d1"],
        },
        {
            b"alpha": [b"hr"],
            b"beta": [b"hr", b"finance"],
            b"gamma": [b"finance"],
            b"delta": [b"legal"],
        },
    )


def random_db(rng: random.Random, keywords: int, docs: int, max_per_kw: int | None = None) -> PlainDatabase:
    universe = [b"doc%03d" % i for i in range(docs)]
    attrs = [b"attr%d" % i for i in range(6)]
    index, amap = {}, {}
    for j in range(keywords):
        k = rng.randint(1, max_per_kw or docs)
        index[b"w%02d" % j] = rng.sample(universe, k)
        amap[b"w%02d" % j] = rng.sample(attrs, rng.randint(1, 3))
    return PlainDatabase.from_index(index, amap)


class World:
    """Owner, server and one client over a database."""

    def __init__(self, pp, db: PlainDatabase, alpha: int = 2, attrs=None):
        self.pp = pp
        self.db = db
        self.state = owner.keygen_owner(pp, alpha)
        self.edb, _, _ = owner.edb_setup(db, self.state)
        self.store = ServerStore(self.edb)
        self.sk, self.pk = client.keygen_client(pp)
        attrs = db.kw_of_attr.keys() if attrs is None else attrs
        d, creds = owner.register_client(self.state, attrs, self.pk)
        self.store.register(d)
        self.creds = client.attach_secret(creds, self.sk)

    def new_client(self, attrs):
        sk, pk = client.keygen_client(self.pp)
        d, creds = owner.register_client(self.state, attrs, pk)
        self.store.register(d)
        return client.attach_secret(creds, sk)

    def query(self, q, creds=None):
        creds = creds or self.creds
        out = self.store.search(client.token_gen(q, creds))
        return out, client.decrypt_results(out.results, creds, q[0])

    def ids(self, q, creds=None) -> set[bytes]:
        return self.query(q, creds)[1]

    def refresh(self, creds=None):
        creds = creds or self.creds
        self.store.apply_supplement(owner.make_ctoken_supplement(self.state, creds.client_pk))


def oracle(db: PlainDatabase, q) -> set[bytes]:
    return set.intersection(*(set(db.docs(w)) for w in q))
