import argparse
import csv
import json
import threading

import pytest

from masse import cli, protocol
from masse.server import load_store


@pytest.fixture
def env(tmp_path, monkeypatch):
    monkeypatch.setenv("MASSE_PASSPHRASE", "pw")
    db = {
        "index": {"alpha": ["d1", "d2", "d3"], "beta": ["d2", "d3", "d4"], "delta": ["d1"]},
        "attrs": {"alpha": ["hr"], "beta": ["hr"], "delta": ["legal"]},
    }
    (tmp_path / "db.json").write_text(json.dumps(db))
    return tmp_path


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


def query_offline(t, capsys, creds, keywords, pivot_args=()):
    assert run("client", "query", "--creds", t / creds, "--key", t / "c.key", "--keywords", keywords,
               "--out", t / "tok.frame", *pivot_args) == 0
    assert run("server", "answer", "--store", t / "store", "--token", t / "tok.frame", "--out", t / "resp") == 0
    capsys.readouterr()
    pivot = keywords.split(",")[0] if pivot_args else None
    if pivot is None:
        # planned pivot: least frequent keyword
        pivot = min(keywords.split(","), key=lambda w: {"alpha": 3, "beta": 3, "delta": 1}[w])
    assert run("client", "decrypt", "--creds", t / creds, "--key", t / "c.key", "--results", t / "resp",
               "--pivot", pivot) == 0
    return capsys.readouterr().out.split()


def test_offline_flow(env, capsys):
    t = env
    owner = ["--state", t / "owner.state"]
    assert run("owner", "setup", *owner, "--db", t / "db.json", "--alpha", 2,
               "--edb-out", t / "edb", "--channel-key-out", t / "chan") == 0
    assert run("client", "keygen", "--key-out", t / "c.key", "--pub-out", t / "c.pub") == 0
    assert run("owner", "register", *owner, "--pk", t / "c.pub", "--attrs", "hr,legal",
               "--creds-out", t / "c.creds", "--frame-out", t / "reg.frame") == 0
    assert run("server", "load", "--edb", t / "edb", "--channel-key", t / "chan", "--store", t / "store",
               t / "reg.frame") == 0
    assert query_offline(t, capsys, "c.creds", "alpha,beta", ["--no-plan"]) == ["d2", "d3"]
    assert query_offline(t, capsys, "c.creds", "alpha,delta") == ["d1"]

    assert run("owner", "update", *owner, "--op", "add", "--keyword", "beta", "--doc", "d9",
               "--frame-out", t / "u1.frame") == 0
    assert run("owner", "update", *owner, "--op", "del", "--keyword", "alpha", "--doc", "d2",
               "--frame-out", t / "u2.frame") == 0
    assert run("server", "load", "--edb", t / "store", "--channel-key", t / "chan", "--store", t / "store",
               t / "u1.frame", t / "u2.frame") == 0
    assert query_offline(t, capsys, "c.creds", "beta", ["--no-plan"]) == ["d2", "d3", "d4", "d9"]
    assert query_offline(t, capsys, "c.creds", "alpha", ["--no-plan"]) == ["d1", "d3"]
    # replaying an applied frame is refused
    assert run("server", "load", "--edb", t / "store", "--channel-key", t / "chan", "--store", t / "x",
               t / "u1.frame") == cli.EXIT_ERROR

    assert run("owner", "revoke", *owner, "--pk", t / "c.pub", "--keyword", "alpha",
               "--creds-out", t / "c2.creds", "--frame-out", t / "rv.frame") == 0
    assert run("server", "load", "--edb", t / "store", "--channel-key", t / "chan", "--store", t / "store",
               t / "rv.frame") == 0
    assert query_offline(t, capsys, "c2.creds", "beta,delta", ["--no-plan"]) == []
    assert query_offline(t, capsys, "c2.creds", "delta", ["--no-plan"]) == ["d1"]
    # the old credentials can still build an alpha token, but the server denies it
    assert query_offline(t, capsys, "c.creds", "alpha", ["--no-plan"]) == []

    assert run("server", "dump", "--store", t / "store") == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["clients"] == 1 and summary["tombstones"] == 1 and summary["last_owner_seq"] == 4


def test_errors_exit_nonzero(env, capsys):
    t = env
    assert run("owner", "update", "--state", t / "missing", "--op", "add", "--keyword", "a", "--doc", "b",
               "--frame-out", t / "f") == cli.EXIT_ERROR
    assert "error" in capsys.readouterr().err
    assert run("owner", "setup", "--state", t / "s", "--db", t / "db.json", "--edb-out", t / "e",
               "--channel-key-out", t / "k") == 0
    assert run("owner", "update", "--state", t / "s", "--op", "add", "--keyword", "beta", "--doc", "z") == cli.EXIT_ERROR


def test_socket_server_flow(env, capsys):
    t = env
    owner = ["--state", t / "owner.state"]
    run("owner", "setup", *owner, "--db", t / "db.json", "--edb-out", t / "edb", "--channel-key-out", t / "chan")
    run("client", "keygen", "--key-out", t / "c.key", "--pub-out", t / "c.pub")
    store = load_store((t / "edb").read_bytes())
    srv = protocol.MasseServer(("127.0.0.1", 0), protocol.Dispatcher(store, (t / "chan").read_bytes()))
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    addr = "127.0.0.1:%d" % srv.server_address[1]
    try:
        assert run("owner", "register", *owner, "--pk", t / "c.pub", "--attrs", "hr",
                   "--creds-out", t / "c.creds", "--server", addr) == 0
        capsys.readouterr()
        assert run("client", "query", "--creds", t / "c.creds", "--key", t / "c.key",
                   "--keywords", "beta,alpha", "--server", addr) == 0
        assert capsys.readouterr().out.split() == ["d2", "d3"]
    finally:
        srv.shutdown()
        srv.server_close()


def test_parse_range():
    assert cli.parse_range("50..200") == (50, 100, 150, 200)
    assert cli.parse_range("5,10,20") == (5, 10, 20)
    assert cli.parse_range("7") == (7,)
    for bad in ("x", "10..5", "0..3"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_range(bad)


def test_tiny_bench(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert run("bench", "--keywords", "4,8", "--docs", 6, "--tokens", "2,4", "--queries", "2,3",
               "--search-keywords", 6, "--search-docs", 5, "--reps", 2, "--alpha", 1, "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == list(cli.bench.CSV_FIELDS)
    assert {(r["scheme"], r["phase"]) for r in rows} == {
        (s, p) for s in ("masse", "oxt") for p in ("setup", "token", "search")
    }
    assert len(rows) == 2 * (2 + 2 + 2)
    assert all(float(r["mean_ms"]) > 0 for r in rows)
