"""``masse`` command line: owner, client, server and bench verbs."""

from __future__ import annotations

import argparse
import base64
import getpass
import json
import logging
import os
import sys
from pathlib import Path

from masse import bench, client, codec, owner, protocol
from masse.crypto.params import CURVES, setup_params
from masse.datamodel import (
    ClientCredentials,
    ClientKey,
    PlainDatabase,
    RevocationScope,
    SearchReply,
    StatusReply,
)
from masse.errors import MasseError
from masse.server import ServerStore, load_store

log = logging.getLogger("masse.cli")

EXIT_ERROR = 1
EXIT_GATE = 3


def parse_range(text: str) -> tuple[int, ...]:
    """``"50..500"`` -> 50, 100, ..., 500 (the start doubles as the step); ``"5,10,20"`` and ``"7"`` too."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            if lo < 1 or hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1, lo))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, a,b,c or a single integer, got {text!r}") from None


def _csv_bytes(text: str) -> list[bytes]:
    return [x.strip().encode() for x in text.split(",") if x.strip()]


def _read(path: str | Path) -> bytes:
    return Path(path).read_bytes()


def _write(path: str | Path, data: bytes) -> None:
    tmp = Path(f"{path}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _passphrase(args) -> str:
    value = os.environ.get(args.passphrase_env)
    if value is None:
        if not sys.stdin.isatty():
            raise MasseError(f"set {args.passphrase_env} or run interactively to supply the state passphrase")
        value = getpass.getpass("owner state passphrase: ")
    return value


def load_plain_db(path: str) -> PlainDatabase:
    """JSON: ``{"index": {kw: [doc, ...]}, "attrs": {kw: [attr, ...]}}`` (UTF-8 strings)."""
    raw = json.loads(Path(path).read_text())
    enc = lambda xs: [x.encode() for x in xs]  # noqa: E731
    return PlainDatabase.from_index(
        {k.encode(): enc(v) for k, v in raw["index"].items()},
        {k.encode(): enc(v) for k, v in raw["attrs"].items()},
    )


# --- owner -----------------------------------------------------------------


def _load_owner(args) -> owner.OwnerState:
    return owner.unseal_state(_read(args.state), _passphrase(args))


def _save_owner(args, state: owner.OwnerState) -> None:
    _write(args.state, owner.seal_state(state, _passphrase(args)))


def _emit_owner(args, state: owner.OwnerState, msg) -> None:
    frame = protocol.owner_frame(state.channel_key, state.next_seq(), msg)
    if args.frame_out:
        _write(args.frame_out, frame)
        print(f"wrote {args.frame_out}")
    if args.server:
        with protocol.RemoteServer(args.server) as conn:
            st = conn.send_owner_frame(frame)
        if st.code != protocol.Status.OK:
            raise MasseError(f"server refused message: {protocol.Status(st.code).name} {st.message}")
        print(f"server accepted {type(msg).__name__}")
    if not args.frame_out and not args.server:
        raise MasseError("nowhere to send the message: give --frame-out and/or --server")


def _client_pk(path: str, pp):
    key = codec.deserialize(_read(path), pp, expect=ClientKey)
    return key.pk


def cmd_owner_setup(args) -> int:
    pp = setup_params(args.security)
    db = load_plain_db(args.db)
    state = owner.keygen_owner(pp, args.alpha)
    edb, _, _ = owner.edb_setup(db, state)
    _write(args.edb_out, codec.serialize(edb))
    _write(args.channel_key_out, state.channel_key)
    _save_owner(args, state)
    print(f"setup: D={len(db.keywords)} N={len(db)} alpha={state.alpha} |Tset|={len(edb.tset)} curve={pp.curve}")
    return 0


def cmd_owner_register(args) -> int:
    state = _load_owner(args)
    pk = _client_pk(args.pk, state.pp)
    d, creds = owner.register_client(state, _csv_bytes(args.attrs), pk)
    _write(args.creds_out, codec.serialize(creds))
    _emit_owner(args, state, d)
    _save_owner(args, state)
    print(f"registered client for {len(creds.per_kw)} keyword(s)")
    return 0


def cmd_owner_update(args) -> int:
    state = _load_owner(args)
    msg = owner.make_update(state, args.op, args.keyword.encode(), args.doc.encode())
    _emit_owner(args, state, msg)
    _save_owner(args, state)
    return 0


def cmd_owner_revoke(args) -> int:
    state = _load_owner(args)
    pk = _client_pk(args.pk, state.pp)
    kw = args.keyword.encode() if args.keyword else None
    msg = owner.make_revocation(state, pk, kw)
    _emit_owner(args, state, msg)
    if args.creds_out and msg.scope is RevocationScope.KEYWORD:
        _write(args.creds_out, codec.serialize(owner.issue_credentials(state, pk)))
    _save_owner(args, state)
    return 0


def cmd_owner_supplement(args) -> int:
    state = _load_owner(args)
    msg = owner.make_ctoken_supplement(state, _client_pk(args.pk, state.pp))
    _emit_owner(args, state, msg)
    _save_owner(args, state)
    return 0


# --- client ----------------------------------------------------------------


def cmd_client_keygen(args) -> int:
    pp = setup_params(args.security)
    sk, pk = client.keygen_client(pp)
    _write(args.key_out, codec.serialize(ClientKey(pp.security_bits, pk, sk)))
    _write(args.pub_out, codec.serialize(ClientKey(pp.security_bits, pk)))
    print(f"wrote {args.key_out} and {args.pub_out}")
    return 0


def _load_creds(args) -> ClientCredentials:
    creds = codec.deserialize(_read(args.creds), expect=ClientCredentials)
    key = codec.deserialize(_read(args.key), expect=ClientKey)
    if key.sk is None:
        raise MasseError(f"{args.key} holds no secret key")
    return client.attach_secret(creds, key.sk)


def _print_ids(ids) -> None:
    for ind in sorted(ids):
        print(ind.decode(errors="backslashreplace"))


def cmd_client_query(args) -> int:
    creds = _load_creds(args)
    keywords = _csv_bytes(args.keywords)
    spec = client.QuerySpec(tuple(keywords)) if args.no_plan else client.QuerySpec.plan(keywords, creds)
    token = client.token_gen(spec, creds)
    body = codec.serialize(token)
    if args.out:
        _write(args.out, protocol.encode_frame(protocol.MsgType.SEARCH_REQ, body))
        print(f"wrote {args.out} (pivot {spec.pivot.decode(errors='replace')})")
        return 0
    if args.server:
        with protocol.RemoteServer(args.server) as conn:
            results = conn.search(token).results
    elif args.http:
        import httpx

        r = httpx.post(args.http.rstrip("/") + "/search", json={"token": base64.b64encode(body).decode()}, timeout=120)
        r.raise_for_status()
        results = [base64.b64decode(e) for e in r.json()["results"]]
    else:
        raise MasseError("give --server, --http or --out")
    _print_ids(client.decrypt_results(results, creds, spec.pivot))
    return 0


def cmd_client_decrypt(args) -> int:
    creds = _load_creds(args)
    data = _read(args.results)
    if data[:4] != codec.MAGIC:
        mtype, data = protocol.decode_frame(data)
        if mtype is not protocol.MsgType.SEARCH_RESP:
            raise MasseError(f"{args.results} is a {mtype.name} frame, not a search response")
    reply = codec.deserialize(data, expect=SearchReply)
    _print_ids(client.decrypt_results(reply.results, creds, args.pivot.encode()))
    return 0


# --- server ----------------------------------------------------------------


def _server_store(path: str) -> ServerStore:
    return load_store(_read(path))


def cmd_server_load(args) -> int:
    store = _server_store(args.edb)
    key = _read(args.channel_key)
    dispatcher = protocol.Dispatcher(store, key)
    for path in args.frames:
        mtype, body = protocol.decode_frame(_read(path))
        _, reply = protocol.decode_frame(dispatcher.handle(mtype, body))
        st = codec.deserialize(reply, expect=StatusReply)
        status = protocol.Status(st.code)
        print(f"{path}: {status.name} {st.message}".rstrip())
        if status is not protocol.Status.OK:
            return EXIT_ERROR
    _write(args.store, store.snapshot())
    return 0


def cmd_server_dump(args) -> int:
    print(json.dumps(_server_store(args.store).summary(), indent=2))
    return 0


def cmd_server_answer(args) -> int:
    store = _server_store(args.store)
    mtype, body = protocol.decode_frame(_read(args.token))
    reply = protocol.Dispatcher(store, b"").handle(mtype, body)
    _write(args.out, reply)
    return 0


def _persist_hook(store: ServerStore, path: str | None):
    if not path:
        return None
    return lambda: _write(path, store.snapshot())


def cmd_server_serve(args) -> int:
    store = _server_store(args.edb)
    dispatcher = protocol.Dispatcher(store, _read(args.channel_key), _persist_hook(store, args.persist))
    with protocol.MasseServer(protocol.parse_address(args.listen), dispatcher) as srv:
        host, port = srv.server_address[:2]
        print(f"serving {store.pp.curve} store on {host}:{port}", flush=True)
        try:
            srv.serve_forever()
        except KeyboardInterrupt:
            pass
    return 0


def cmd_server_serve_http(args) -> int:
    import uvicorn

    from masse.service import create_app

    store = _server_store(args.edb)
    app = create_app(store, _read(args.channel_key), _persist_hook(store, args.persist))
    host, port = protocol.parse_address(args.listen)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


# --- bench -----------------------------------------------------------------


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(
        keywords=args.keywords,
        docs_per_keyword=args.docs,
        attrs_per_keyword=args.attrs,
        alpha=args.alpha,
        token_sizes=args.tokens or args.keywords,
        query_sizes=args.queries,
        search_keywords=args.search_keywords,
        search_docs=args.search_docs,
        repetitions=args.reps,
        seed=args.seed,
        security_bits=args.security,
        phases=tuple(args.phases.split(",")),
    )
    try:
        rows = bench.run_suite(cfg, progress=lambda m: print(m, file=sys.stderr, flush=True))
    except bench.CorrectnessGateError as exc:
        print(f"correctness gate failed: {exc}", file=sys.stderr)
        return EXIT_GATE
    if args.out == "-":
        bench.rows_to_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.rows_to_csv(rows, fh)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


# --- parser ----------------------------------------------------------------


def _add_security(p) -> None:
    p.add_argument("--lambda", dest="security", type=int, default=128, choices=sorted(CURVES),
                   help="security parameter: 128 = BLS12-381, 256 = Fp256BN (slow, pure Python)")


def _add_owner_common(p, emits: bool = True) -> None:
    p.add_argument("--state", required=True, help="sealed owner state file")
    p.add_argument("--passphrase-env", default="MASSE_PASSPHRASE",
                   help="environment variable holding the state passphrase (default: %(default)s)")
    if emits:
        p.add_argument("--frame-out", help="write the authenticated owner frame here")
        p.add_argument("--server", help="send the frame to a running server (host:port)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="masse", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    top = ap.add_subparsers(dest="group", required=True)

    og = top.add_parser("owner", help="data-owner operations").add_subparsers(dest="verb", required=True)
    p = og.add_parser("setup", help="build the encrypted database from a JSON plaintext database")
    _add_owner_common(p, emits=False)
    _add_security(p)
    p.add_argument("--db", required=True)
    p.add_argument("--alpha", type=int, default=owner.DEFAULT_ALPHA, help="dummy slots per keyword")
    p.add_argument("--edb-out", required=True)
    p.add_argument("--channel-key-out", required=True, help="owner/server channel key (give it to the server)")
    p.set_defaults(fn=cmd_owner_setup)

    p = og.add_parser("register", help="register a client for a set of attributes")
    _add_owner_common(p)
    p.add_argument("--pk", required=True, help="client public key file")
    p.add_argument("--attrs", required=True, help="comma-separated attributes")
    p.add_argument("--creds-out", required=True)
    p.set_defaults(fn=cmd_owner_register)

    p = og.add_parser("update", help="add or delete one (keyword, document) pair")
    _add_owner_common(p)
    p.add_argument("--op", required=True, choices=("add", "del"))
    p.add_argument("--keyword", required=True)
    p.add_argument("--doc", required=True)
    p.set_defaults(fn=cmd_owner_update)

    p = og.add_parser("revoke", help="revoke a client entirely or for one keyword")
    _add_owner_common(p)
    p.add_argument("--pk", required=True)
    p.add_argument("--keyword")
    p.add_argument("--creds-out", help="write re-issued credentials after a keyword revocation")
    p.set_defaults(fn=cmd_owner_revoke)

    p = og.add_parser("supplement", help="push Ctoken entries for pairs added since registration")
    _add_owner_common(p)
    p.add_argument("--pk", required=True)
    p.set_defaults(fn=cmd_owner_supplement)

    cg = top.add_parser("client", help="client operations").add_subparsers(dest="verb", required=True)
    p = cg.add_parser("keygen")
    _add_security(p)
    p.add_argument("--key-out", required=True)
    p.add_argument("--pub-out", required=True)
    p.set_defaults(fn=cmd_client_keygen)

    for name, fn, help_ in (("query", cmd_client_query, "build a search token and run or save it"),
                            ("decrypt", cmd_client_decrypt, "decrypt a saved search response")):
        p = cg.add_parser(name, help=help_)
        p.add_argument("--creds", required=True)
        p.add_argument("--key", required=True)
        p.set_defaults(fn=fn)
        if name == "query":
            p.add_argument("--keywords", required=True, help="comma-separated w1,w2,...")
            p.add_argument("--no-plan", action="store_true", help="use the first keyword as pivot as given")
            dest = p.add_mutually_exclusive_group()
            dest.add_argument("--server", help="host:port of a socket server")
            dest.add_argument("--http", help="base URL of an HTTP server")
            dest.add_argument("--out", help="write a SEARCH_REQ frame instead of searching")
        else:
            p.add_argument("--results", required=True, help="SEARCH_RESP frame or SearchReply encoding")
            p.add_argument("--pivot", required=True)

    sg = top.add_parser("server", help="server operations").add_subparsers(dest="verb", required=True)
    p = sg.add_parser("load", help="create a store from an EDB (or store) and apply owner frames")
    p.add_argument("--edb", required=True, help="EDB or existing store file")
    p.add_argument("--channel-key", required=True)
    p.add_argument("--store", required=True, help="output store file")
    p.add_argument("frames", nargs="*")
    p.set_defaults(fn=cmd_server_load)

    p = sg.add_parser("dump", help="print store statistics as JSON")
    p.add_argument("--store", required=True)
    p.set_defaults(fn=cmd_server_dump)

    p = sg.add_parser("answer", help="answer a saved SEARCH_REQ frame offline")
    p.add_argument("--store", required=True)
    p.add_argument("--token", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_server_answer)

    for name, fn in (("serve", cmd_server_serve), ("serve-http", cmd_server_serve_http)):
        p = sg.add_parser(name)
        p.add_argument("--listen", required=True, help="host:port")
        p.add_argument("--edb", required=True, help="EDB or store file")
        p.add_argument("--channel-key", required=True)
        p.add_argument("--persist", help="rewrite this store file after every owner message")
        p.set_defaults(fn=fn)

    p = top.add_parser("bench", help="MASSE vs OXT timing sweeps, CSV output")
    p.add_argument("--keywords", type=parse_range, default=parse_range("50..500"), help="setup D sweep")
    p.add_argument("--docs", type=int, default=200, help="documents per keyword for setup/token sweeps")
    p.add_argument("--tokens", type=parse_range, help="token-generation n sweep (default: --keywords)")
    p.add_argument("--queries", type=parse_range, default=parse_range("10..100"), help="search n sweep")
    p.add_argument("--search-keywords", type=int, default=200)
    p.add_argument("--search-docs", type=int, default=150)
    p.add_argument("--attrs", type=int, default=4, help="attributes per keyword")
    p.add_argument("--alpha", type=int, default=owner.DEFAULT_ALPHA)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phases", default="setup,token,search")
    p.add_argument("--out", default="results.csv", help="CSV path or - for stdout")
    _add_security(p)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except (MasseError, ValueError, OSError) as exc:
        print(f"masse: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
