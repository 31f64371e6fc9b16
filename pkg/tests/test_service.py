import base64

import pytest
from fastapi.testclient import TestClient

from masse import client, codec, owner
from masse.protocol import owner_frame
from masse.service import create_app


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode()


@pytest.fixture
def http(world):
    changes = []
    app = create_app(world.store, world.state.channel_key, on_change=lambda: changes.append(1))
    return world, TestClient(app), changes


def test_status(http):
    world, c, _ = http
    body = c.get("/status").json()
    assert body["security_bits"] == 128 and body["clients"] == 1 and body["cset"] == 4


def test_search(http):
    world, c, _ = http
    tok = client.token_gen([b"gamma", b"alpha"], world.creds)
    r = c.post("/search", json={"token": b64(codec.serialize(tok))})
    assert r.status_code == 200
    results = [base64.b64decode(e) for e in r.json()["results"]]
    assert client.decrypt_results(results, world.creds, b"gamma") == {b"d3", b"d5"}
    assert c.post("/search", json={"token": "!!"}).status_code == 400
    assert c.post("/search", json={"token": b64(b"MSSE junk")}).status_code == 400


def test_owner_frames(http):
    world, c, changes = http
    st = world.state
    frame = owner_frame(st.channel_key, st.next_seq(), owner.make_update(st, "del", b"alpha", b"d1"))
    r = c.post("/owner", json={"frame": b64(frame)})
    assert r.status_code == 200 and r.json()["status"] == "OK" and changes == [1]
    assert c.post("/owner", json={"frame": b64(frame)}).status_code == 409
    bad = owner_frame(b"x" * 32, 50, owner.make_update(st, "del", b"alpha", b"d2"))
    assert c.post("/owner", json={"frame": b64(bad)}).status_code == 401
    assert c.post("/owner", json={"frame": b64(b"\x00\x00\x00\x01\x01")}).status_code == 400
    assert world.ids([b"alpha"]) == {b"d2", b"d3", b"d5"}
