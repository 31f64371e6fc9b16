"""Synthetic corpora and the MASSE-vs-OXT timing harness.

Phases: ``setup`` (EDB construction), ``token`` (search-token generation)
and ``search``.  For OXT, ``search`` is the whole interactive search,
owner-side xtoken derivation included, because OXT has no client-held
token: the owner must derive one xtoken per pivot entry for every query.
"""

from __future__ import annotations

import csv
import io
import logging
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from masse import client, owner, oxt
from masse.crypto.params import PublicParams, setup_params
from masse.datamodel import PlainDatabase
from masse.server import ServerStore

log = logging.getLogger(__name__)

CSV_FIELDS = ("scheme", "phase", "D", "P", "n", "mean_ms", "stddev_ms")
GATE_KEYWORDS = 10
GATE_DOCS = 20


class CorrectnessGateError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    keywords: tuple[int, ...] = tuple(range(50, 501, 50))  # D sweep for setup
    docs_per_keyword: int = 200
    attrs_per_keyword: int = 4
    alpha: int = owner.DEFAULT_ALPHA
    token_sizes: tuple[int, ...] = tuple(range(50, 501, 50))
    query_sizes: tuple[int, ...] = tuple(range(10, 101, 10))
    search_keywords: int = 200
    search_docs: int = 150
    repetitions: int = 10
    seed: int = 0
    security_bits: int = 128
    phases: tuple[str, ...] = ("setup", "token", "search")

    def __post_init__(self):
        counts = [self.docs_per_keyword, self.attrs_per_keyword, self.search_keywords, self.search_docs]
        if self.repetitions < 1 or min(counts) < 1 or self.alpha < 0:
            raise ValueError("repetitions and counts must be >= 1, alpha >= 0")
        for sweep in (self.keywords, self.token_sizes, self.query_sizes):
            if not sweep or min(sweep) < 1:
                raise ValueError("sweeps must be non-empty and positive")
        unknown = set(self.phases) - {"setup", "token", "search"}
        if unknown:
            raise ValueError(f"unknown phases: {sorted(unknown)}")


@dataclass(frozen=True)
class Row:
    scheme: str
    phase: str
    D: int
    P: int
    n: int
    mean_ms: float
    stddev_ms: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in CSV_FIELDS}


def gen_corpus(
    keywords: int,
    docs_per_keyword: int,
    *,
    attrs_per_keyword: int = 4,
    seed: int = 0,
    universe: int | None = None,
) -> PlainDatabase:
    """D keywords, each in exactly P documents drawn from a universe of 2P (default).

    Each keyword gets ``attrs_per_keyword`` attributes drawn uniformly from
    a pool of 4x that size.
    """
    rng = random.Random(seed)
    universe = universe or 2 * docs_per_keyword
    if docs_per_keyword > universe:
        raise ValueError("docs_per_keyword exceeds the document universe")
    pool = [b"attr%03d" % i for i in range(4 * attrs_per_keyword)]
    index, attrs = {}, {}
    for j in range(keywords):
        w = b"kw%05d" % j
        index[w] = [b"doc%06d" % d for d in rng.sample(range(universe), docs_per_keyword)]
        attrs[w] = rng.sample(pool, attrs_per_keyword)
    return PlainDatabase.from_index(index, attrs)


def corpus_for(cfg: BenchConfig, keywords: int, docs: int, salt: int = 0) -> PlainDatabase:
    return gen_corpus(keywords, docs, attrs_per_keyword=cfg.attrs_per_keyword, seed=cfg.seed * 1_000_003 + salt)


@dataclass
class Deployment:
    """One corpus set up under both schemes with a single fully authorized client."""

    pp: PublicParams
    db: PlainDatabase
    state: owner.OwnerState
    store: ServerStore
    creds: object
    oxt_keys: oxt.OxtKeys
    oxt_db: oxt.OxtDatabase | None = None


def deploy(pp: PublicParams, db: PlainDatabase, alpha: int, *, with_oxt: bool = True) -> Deployment:
    state = owner.keygen_owner(pp, alpha)
    edb, _, _ = owner.edb_setup(db, state)
    store = ServerStore(edb)
    sk, pk = client.keygen_client(pp)
    d, creds = owner.register_client(state, db.kw_of_attr.keys(), pk)
    store.register(d)
    keys = oxt.oxt_keygen(pp)
    odb = oxt.oxt_setup(pp, db, keys) if with_oxt else None
    return Deployment(pp, db, state, store, client.attach_secret(creds, sk), keys, odb)


def masse_query(dep: Deployment, q: Sequence[bytes]) -> set[bytes]:
    spec = client.QuerySpec.plan(q, dep.creds)
    out = dep.store.search(client.token_gen(spec, dep.creds))
    return client.decrypt_results(out.results, dep.creds, spec.pivot)


def oxt_query(dep: Deployment, q: Sequence[bytes]) -> set[bytes]:
    res = oxt.oxt_search(dep.pp, dep.oxt_db, dep.oxt_keys, list(q))
    return oxt.oxt_decrypt(dep.pp, dep.oxt_keys, q[0], res)


def plaintext_answer(db: PlainDatabase, q: Iterable[bytes]) -> set[bytes]:
    sets = [set(db.docs(w)) for w in q]
    return set.intersection(*sets) if sets else set()


def random_query(rng: random.Random, keywords: Sequence[bytes], n: int) -> list[bytes]:
    return rng.sample(list(keywords), n)


def correctness_gate(cfg: BenchConfig, queries: int = 30) -> int:
    """Mismatches between MASSE, OXT and the plaintext oracle on a small corpus."""
    pp = setup_params(cfg.security_bits)
    db = corpus_for(cfg, GATE_KEYWORDS, GATE_DOCS, salt=7)
    dep = deploy(pp, db, min(cfg.alpha, 4))
    rng = random.Random(cfg.seed)
    bad = 0
    for _ in range(queries):
        q = random_query(rng, db.keywords, rng.randint(1, 4))
        expected = plaintext_answer(db, q)
        got_m, got_o = masse_query(dep, q), oxt_query(dep, q)
        if got_m != expected or got_o != expected:
            bad += 1
            log.error("gate mismatch for %r: oracle=%d masse=%d oxt=%d", q, len(expected), len(got_m), len(got_o))
    return bad


def measure(fn: Callable[[], object], reps: int, warmup: int = 1) -> tuple[float, float]:
    """(mean, stddev) in milliseconds over ``reps`` timed calls after ``warmup`` untimed ones."""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return statistics.fmean(samples), (statistics.stdev(samples) if reps > 1 else 0.0)


def bench_setup(cfg: BenchConfig, D: int, P: int, warmup: int = 1) -> list[Row]:
    pp = setup_params(cfg.security_bits)
    db = corpus_for(cfg, D, P)

    def run_masse():
        owner.edb_setup(db, owner.keygen_owner(pp, cfg.alpha))

    keys = oxt.oxt_keygen(pp)
    m = measure(run_masse, cfg.repetitions, warmup)
    o = measure(lambda: oxt.oxt_setup(pp, db, keys), cfg.repetitions, warmup)
    return [Row("masse", "setup", D, P, 0, *m), Row("oxt", "setup", D, P, 0, *o)]


def bench_tokens(cfg: BenchConfig, D: int, P: int, sizes: Sequence[int], dep: Deployment | None = None) -> list[Row]:
    pp = setup_params(cfg.security_bits)
    if dep is None:
        dep = deploy(pp, corpus_for(cfg, D, P), cfg.alpha, with_oxt=False)
    rng = random.Random(cfg.seed + 1)
    rows = []
    for n in sizes:
        q = random_query(rng, dep.db.keywords, n)
        spec = client.QuerySpec.plan(q, dep.creds)
        count = len(dep.db.docs(spec.pivot))
        m = measure(lambda: client.token_gen(spec, dep.creds), cfg.repetitions)
        o = measure(lambda: oxt.oxt_token(pp, dep.oxt_keys, spec.keywords, count), cfg.repetitions)
        rows += [Row("masse", "token", D, P, n, *m), Row("oxt", "token", D, P, n, *o)]
    return rows


def bench_search(cfg: BenchConfig, D: int, P: int, sizes: Sequence[int], dep: Deployment | None = None) -> list[Row]:
    pp = setup_params(cfg.security_bits)
    if dep is None:
        dep = deploy(pp, corpus_for(cfg, D, P, salt=2), cfg.alpha)
    rng = random.Random(cfg.seed + 2)
    rows = []
    for n in sizes:
        q = random_query(rng, dep.db.keywords, n)
        spec = client.QuerySpec.plan(q, dep.creds)
        token = client.token_gen(spec, dep.creds)
        m = measure(lambda: dep.store.search(token), cfg.repetitions)
        o = measure(lambda: oxt.oxt_search(pp, dep.oxt_db, dep.oxt_keys, spec.keywords), cfg.repetitions)
        rows += [Row("masse", "search", D, P, n, *m), Row("oxt", "search", D, P, n, *o)]
    return rows


def run_suite(cfg: BenchConfig, progress: Callable[[str], None] | None = None) -> list[Row]:
    say = progress or (lambda msg: log.info(msg))
    bad = correctness_gate(cfg)
    if bad:
        raise CorrectnessGateError(f"{bad} gate queries disagreed with the plaintext oracle")
    say("correctness gate passed")
    rows: list[Row] = []
    if "setup" in cfg.phases:
        for i, D in enumerate(cfg.keywords):
            say(f"setup D={D} P={cfg.docs_per_keyword}")
            rows += bench_setup(cfg, D, cfg.docs_per_keyword, warmup=1 if i == 0 else 0)
    if "token" in cfg.phases:
        D = max(cfg.token_sizes)
        say(f"token D={D} P={cfg.docs_per_keyword}")
        rows += bench_tokens(cfg, D, cfg.docs_per_keyword, cfg.token_sizes)
    if "search" in cfg.phases:
        D = max(cfg.search_keywords, max(cfg.query_sizes))
        say(f"search D={D} P={cfg.search_docs}")
        rows += bench_search(cfg, D, cfg.search_docs, cfg.query_sizes)
    return rows


def rows_to_csv(rows: Iterable[Row], out: io.TextIOBase | None = None) -> str:
    buf = out if out is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        d = r.as_dict()
        d["mean_ms"] = f"{r.mean_ms:.3f}"
        d["stddev_ms"] = f"{r.stddev_ms:.3f}"
        writer.writerow(d)
    return buf.getvalue() if out is None else ""


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares (slope, intercept, R^2)."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    return slope, intercept, (1.0 - ss_res / ss_tot) if ss_tot else 1.0
