import pytest

from masse import client, owner
from masse.crypto import hash_H
from masse.datamodel import PlainDatabase, RevocationScope, UpdateOp
from masse.errors import CapacityError, MasseError, NotFoundError, RegistrationError
from support import small_db


def five_docs() -> PlainDatabase:
    return PlainDatabase.from_index(
        {b"w": [b"d%d" % i for i in range(5)], b"u": [b"d0"]},
        {b"w": [b"a1"], b"u": [b"a2"]},
    )


def test_owner_keypair_pairing_oracle(pp):
    st = owner.keygen_owner(pp)
    assert pp.pair(pp.g1, st.pk_o) == pp.pair(pp.g1 ** st.sk_o, pp.g2)
    assert len(st.keys.k1) == pp.key_bytes == 16


def test_count_and_slots(pp):
    db = PlainDatabase.from_index({b"a": [b"1"], b"b": [b"1", b"2"]}, {b"a": [b"x"], b"b": [b"x"]})
    st = owner.keygen_owner(pp, alpha=1)
    edb, kt, count = owner.edb_setup(db, st)
    assert count == {b"a": 3, b"b": 4}
    assert len(edb.tset) == 3 + 2
    assert st.next_free_slot == {b"a": 2, b"b": 3}


def test_alpha_zero_pads_nothing(pp):
    st = owner.keygen_owner(pp, alpha=0)
    edb, _, count = owner.edb_setup(small_db(), st)
    assert len(edb.tset) == len(small_db())
    assert count[b"delta"] == 2


def test_setup_determinism_over_same_keys(pp):
    st = owner.keygen_owner(pp, 2)
    edb1, _, _ = owner.edb_setup(small_db(), st)
    st2 = owner.keygen_owner(pp, 2)
    st2.keys, st2.sk_o = st.keys, st.sk_o
    edb2, _, _ = owner.edb_setup(small_db(), st2)
    assert set(edb1.tset) == set(edb2.tset)
    assert set(edb1.cset) == set(edb2.cset)
    assert edb1.xset == edb2.xset
    assert all(edb1.tset[k].e != edb2.tset[k].e for k in edb1.tset)
    assert all(edb1.tset[k].y == edb2.tset[k].y for k in edb1.tset)


def test_setup_refuses_second_run(pp):
    st = owner.keygen_owner(pp)
    owner.edb_setup(small_db(), st)
    with pytest.raises(MasseError):
        owner.edb_setup(small_db(), st)


def test_keyword_keys_depend_only_on_attribute_set(pp):
    k1 = bytes(16)
    assert owner.keyword_keys(pp, k1, [b"a", b"b"]) == owner.keyword_keys(pp, k1, [b"b", b"a"])
    assert owner.keyword_keys(pp, k1, [b"a"]) != owner.keyword_keys(pp, k1, [b"b"])


def test_registration_dedups_keywords_and_accumulates(world):
    pp, st = world.pp, world.state
    sk, pk = client.keygen_client(pp)
    d, creds = owner.register_client(st, [b"hr", b"finance"], pk)
    assert set(creds.keywords) == {b"alpha", b"beta", b"gamma"}
    gamma = sum(st.keyword_gamma(w) for w in creds.keywords) % pp.order
    assert st.registered[pp.encode(pk)].gamma == gamma
    assert d.sigma == pk ** (gamma * st.sk_o % pp.order)
    # verification identity for the issued credentials
    assert pp.pair(d.sigma, pp.g2) == pp.pair(pp.g1 ** gamma, st.pk_o ** sk)
    expected = {
        hash_H(pp.encode(pp.g1 ** (st.xtrap(w) * st.x(doc) % pp.order)))
        for w in creds.keywords
        for doc in small_db().docs(w)
    }
    assert d.ctoken == expected
    assert creds.freq_hint == {b"alpha": 4, b"beta": 3, b"gamma": 3}


@pytest.mark.parametrize("attrs", [[], [b"nope"], [b"hr", b"nope"]])
def test_registration_rejects_bad_attribute_sets(world, attrs):
    _, pk = client.keygen_client(world.pp)
    with pytest.raises(RegistrationError):
        owner.register_client(world.state, attrs, pk)


def test_registration_rejects_repeat_and_identity(world):
    with pytest.raises(RegistrationError):
        owner.register_client(world.state, [b"hr"], world.pk)
    with pytest.raises(RegistrationError):
        owner.register_client(world.state, [b"hr"], world.pp.g1_identity())


def test_registration_needs_setup(pp):
    _, pk = client.keygen_client(pp)
    with pytest.raises(RegistrationError):
        owner.register_client(owner.keygen_owner(pp), [b"hr"], pk)


def test_add_consumes_dummy_slots_in_order(pp):
    st = owner.keygen_owner(pp, alpha=3)
    edb, _, count = owner.edb_setup(five_docs(), st)
    assert count[b"w"] == 9
    stag = st.stag(b"w")
    for c, doc in zip((6, 7, 8), (b"n1", b"n2", b"n3")):
        msg = owner.make_update(st, "add", b"w", doc)
        assert msg.op is UpdateOp.ADD
        assert msg.label == owner.tset_label(stag, c) and msg.label in edb.tset
        assert st.locator[b"w"][doc] == c
    with pytest.raises(CapacityError):
        owner.make_update(st, "add", b"w", b"n4")


def test_add_duplicate_and_delete_absent(pp):
    st = owner.keygen_owner(pp, 2)
    owner.edb_setup(five_docs(), st)
    with pytest.raises(MasseError):
        owner.make_update(st, "add", b"w", b"d1")
    with pytest.raises(NotFoundError):
        owner.make_update(st, "del", b"w", b"zz")
    with pytest.raises(NotFoundError):
        owner.make_update(st, UpdateOp.ADD, b"nokw", b"zz")


def test_delete_frees_nothing(pp):
    st = owner.keygen_owner(pp, 1)
    owner.edb_setup(five_docs(), st)
    msg = owner.make_update(st, "del", b"w", b"d2")
    assert msg.label == owner.tset_label(st.stag(b"w"), 3) and msg.entry is None
    assert msg.xtag == pp.g1 ** (st.xtrap(b"w") * st.x(b"d2") % pp.order)
    owner.make_update(st, "add", b"w", b"n1")  # the single dummy slot
    with pytest.raises(CapacityError):
        owner.make_update(st, "add", b"w", b"d2")  # a tombstoned slot is not reused
    assert st.plain_database().docs(b"w") == (b"d0", b"d1", b"d3", b"d4", b"n1")


def test_keyword_revocations_drive_gamma_to_zero(world):
    pp, st = world.pp, world.state
    key = pp.encode(world.pk)
    kws = sorted(st.registered[key].keywords)
    for w in kws[:-1]:
        before = st.registered[key].gamma
        msg = owner.make_revocation(st, world.pk, w)
        assert msg.scope is RevocationScope.KEYWORD
        after = st.registered[key].gamma
        assert (before - after) % pp.order == st.keyword_gamma(w)
        assert msg.sigma == world.pk ** (after * st.sk_o % pp.order)
    assert (st.registered[key].gamma - st.keyword_gamma(kws[-1])) % pp.order == 0
    last = owner.make_revocation(st, world.pk, kws[-1])
    assert last.scope is RevocationScope.FULL and key not in st.registered


def test_revocation_errors(world):
    _, pk = client.keygen_client(world.pp)
    with pytest.raises(NotFoundError):
        owner.make_revocation(world.state, pk)
    c = world.new_client([b"legal"])
    with pytest.raises(NotFoundError):
        owner.make_revocation(world.state, c.client_pk, b"alpha")


def test_revocation_removes_hashes_for_added_documents(world):
    msg = owner.make_update(world.state, "add", b"alpha", b"late")
    world.store.apply_update(msg)
    rev = owner.make_revocation(world.state, world.pk, b"alpha")
    assert world.state.ctoken_hash(b"alpha", b"late") in rev.removed


def test_state_seal_roundtrip(world):
    owner.make_update(world.state, "add", b"beta", b"x9")
    blob = owner.seal_state(world.state, "correct horse")
    back = owner.unseal_state(blob, "correct horse")
    for f in ("keys", "sk_o", "channel_key", "alpha", "attr_of_kw", "locator", "next_free_slot", "history", "registered"):
        assert getattr(back, f) == getattr(world.state, f), f
    assert back.key_tables.count == world.state.key_tables.count
    with pytest.raises(MasseError):
        owner.unseal_state(blob, "wrong")
    with pytest.raises(MasseError):
        owner.unseal_state(blob[:-1] + bytes([blob[-1] ^ 1]), "correct horse")
