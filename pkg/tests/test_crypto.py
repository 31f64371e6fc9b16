import hashlib
import hmac
import os
import random

import pytest
from scipy import stats

from masse.crypto import hash_H, prf_F, prf_Fp, setup_params, sym_decrypt, sym_encrypt
from masse.crypto import fp256bn
from masse.errors import ConfigurationError, FormatError

# BLS12-381 constants as published with the curve
BLS_R = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
BLS_G1_X = "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac586c55e83ff97a1aeffb3af00adb22c6bb"
BLS_G2_X0 = "024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02b4510b647ae3d1770bac0326a805bbefd48056c8c121bdb8"
BLS_G2_X1 = "13e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049334cf11213945d57e5ac7d055d042b7e"

# frozen from a bare hmac/hashlib computation of the same framing
KAT_KEY = bytes(range(32))
KAT_F_STAG_32 = "ebd0a560d974a8e3c4a49b3f19fecd41fe97a235f45dd6d6cccd875afdbfbb09"
KAT_F_STAG_16 = "8dcc2f834b16f72c1ec67787db25e22d"
KAT_FP_Z = 0x5D0BC0EA470EF280DE97D27E1EEEE9E389A2259A24DF45EC5A824C336213020


def _is_probable_prime(n: int) -> bool:
    rng = random.Random(1)
    d, s = n - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    for _ in range(20):
        x = pow(rng.randrange(2, n - 1), d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@pytest.mark.parametrize("bits", [128, 256])
def test_params_order_prime_and_large_enough(bits):
    pp = setup_params(bits)
    assert _is_probable_prime(pp.order)
    assert pp.order.bit_length() >= bits


def test_lambda_256_has_256_bit_order():
    pp = setup_params(256)
    assert pp.order.bit_length() == 256
    assert pp.curve == "Fp256BN"


def test_setup_params_deterministic():
    a, b = setup_params(256), setup_params(256)
    assert a == b and a.g1 == b.g1 and a.g2 == b.g2 and a.order == b.order


def test_unsupported_lambda():
    with pytest.raises(ConfigurationError):
        setup_params(100)


def test_bls12_381_published_constants(pp):
    assert pp.order == BLS_R
    g1 = pp.encode(pp.g1)
    assert g1[0] in (2, 3) and g1[1:].hex() == BLS_G1_X
    g2 = pp.encode(pp.g2)
    assert g2[1:49].hex() == BLS_G2_X0 and g2[49:].hex() == BLS_G2_X1


def test_prf_known_answers():
    assert prf_F(KAT_KEY, b"keyword", domain=b"stag").hex() == KAT_F_STAG_32
    assert prf_F(KAT_KEY[:16], b"keyword", domain=b"stag").hex() == KAT_F_STAG_16
    assert prf_Fp(KAT_KEY, b"keyword", BLS_R, domain=b"z") == KAT_FP_Z


def test_prf_matches_bare_hmac():
    key, msg = os.urandom(32), os.urandom(40)
    expected = hmac.new(key, b"\x01x" + msg, hashlib.sha256).digest()
    assert prf_F(key, msg, domain=b"x") == expected


def test_prf_deterministic_and_domain_separated():
    key = os.urandom(32)
    assert prf_F(key, b"m", domain=b"h") == prf_F(key, b"m", domain=b"h")
    assert prf_F(key, b"m", domain=b"h") != prf_F(key, b"m", domain=b"v")


def test_prf_output_length_tracks_key():
    assert len(prf_F(os.urandom(16), b"m")) == 16
    assert len(prf_F(os.urandom(32), b"m")) == 32
    with pytest.raises(ValueError):
        prf_F(os.urandom(20), b"m")


def test_prf_no_collisions_across_messages_and_keys():
    rng = random.Random(5)
    k1, k2 = os.urandom(32), os.urandom(32)
    seen_m, seen_k = set(), 0
    for i in range(10_000):
        m = rng.randbytes(16) + i.to_bytes(4, "big")
        seen_m.add(prf_F(k1, m))
        seen_k += prf_F(k1, m) == prf_F(k2, m)
    assert len(seen_m) == 10_000
    assert seen_k == 0


def test_fp_range_and_uniformity(pp):
    key = os.urandom(32)
    buckets = [0] * 16
    for i in range(10_000):
        v = prf_Fp(key, i.to_bytes(4, "big"), pp.order)
        assert 1 <= v <= pp.order - 1
        buckets[v * 16 // pp.order] += 1
    assert stats.chisquare(buckets).pvalue > 0.001


def test_hash_deterministic_and_collision_free():
    assert hash_H(b"x") == hash_H(b"x")
    assert len({hash_H(i.to_bytes(8, "big")) for i in range(100_000)}) == 100_000


def test_hash_of_equal_elements_equal(pp):
    a = pp.g1 ** 7
    b = (pp.g1 ** 3) * (pp.g1 ** 4)
    assert hash_H(pp.encode(a)) == hash_H(pp.encode(b))


def test_sym_roundtrip_and_randomized():
    key = os.urandom(32)
    c1, c2 = sym_encrypt(key, b"ind_0042"), sym_encrypt(key, b"ind_0042")
    assert c1 != c2
    assert sym_decrypt(key, c1) == b"ind_0042"
    assert sym_decrypt(key[:16] + key[:16], sym_encrypt(key[:16] + key[:16], b"")) == b""


def test_sym_wrong_key_never_accepted():
    key = os.urandom(16)
    ct = sym_encrypt(key, b"ind_0042")
    false_accepts = 0
    for _ in range(1000):
        try:
            sym_decrypt(os.urandom(16), ct)
            false_accepts += 1
        except FormatError:
            pass
    assert false_accepts == 0


def test_sym_rejects_long_ids_and_bad_lengths():
    with pytest.raises(ValueError):
        sym_encrypt(os.urandom(16), b"x" * 65)
    with pytest.raises(FormatError):
        sym_decrypt(os.urandom(16), b"short")


def test_pairing_bilinear_random_exponents(pp):
    base = pp.pair(pp.g1, pp.g2)
    assert base != pp.pair(pp.g1 ** 0, pp.g2)  # non-degenerate
    rng = random.Random(11)
    for _ in range(100):
        a, b = rng.randrange(1, pp.order), rng.randrange(1, pp.order)
        assert pp.pair(pp.g1 ** a, pp.g2 ** b) == base ** (a * b % pp.order)


def test_pairing_left_linear(pp):
    a, b = pp.random_scalar(), pp.random_scalar()
    lhs = pp.pair(pp.g1 ** a * pp.g1 ** b, pp.g2)
    assert lhs == pp.pair(pp.g1 ** a, pp.g2) * pp.pair(pp.g1 ** b, pp.g2)


def test_fp256bn_pairing_bilinear(pp256):
    base = pp256.pair(pp256.g1, pp256.g2)
    assert not base.is_neutral_element()
    for _ in range(3):
        a, b = pp256.random_scalar(), pp256.random_scalar()
        assert pp256.pair(pp256.g1 ** a, pp256.g2 ** b) == base ** (a * b % pp256.order)


def test_fp256bn_generators_have_prime_order():
    g1, g2 = fp256bn.g1_generator(), fp256bn.g2_generator()
    assert g1.on_curve() and g2.on_curve()
    assert (g1 ** (fp256bn.R - 1)) * g1 == fp256bn.g1_identity()


def test_accumulator_pairing_identity(pp):
    # e(pk_C^(gamma*sk_O), g2) == e(g1^gamma, g2^(sk_O*sk_C))
    for _ in range(100):
        gamma, sk_o, sk_c = (pp.random_scalar() for _ in range(3))
        sigma = (pp.g1 ** sk_c) ** (gamma * sk_o % pp.order)
        assert pp.pair(sigma, pp.g2) == pp.pair(pp.g1 ** gamma, (pp.g2 ** sk_o) ** sk_c)


def test_scalar_field_axioms(pp):
    p, rng = pp.order, random.Random(3)
    for _ in range(1000):
        a, b, c = (rng.randrange(1, p) for _ in range(3))
        assert (a * (b + c)) % p == (a * b + a * c) % p
        assert a * pow(a, -1, p) % p == 1


@pytest.mark.parametrize("bits", [128, 256])
def test_group_encoding_roundtrip(bits):
    pp = setup_params(bits)
    x = pp.g1 ** pp.random_scalar()
    y = pp.g2 ** pp.random_scalar()
    assert pp.decode_g1(pp.encode(x)) == x
    assert pp.decode_g2(pp.encode(y)) == y
    assert pp.encode(pp.decode_g1(pp.encode(x))) == pp.encode(x)
    ident = pp.g1_identity()
    assert pp.decode_g1(pp.encode(ident)) == ident


@pytest.mark.parametrize("bits", [128, 256])
def test_group_decoding_rejects_garbage(bits):
    pp = setup_params(bits)
    good = pp.encode(pp.g1 ** 5)
    bad = [b"", b"\x05" + good[1:], good[:-1], b"\x02" + b"\xff" * (len(good) - 1)]
    # flip x until it leaves the curve
    for i in range(1, 50):
        cand = good[:-1] + bytes([(good[-1] + i) % 256])
        try:
            pp.decode_g1(cand)
        except FormatError:
            bad.append(cand)
            break
    for b in bad:
        with pytest.raises(FormatError):
            pp.decode_g1(b)
    with pytest.raises(FormatError):
        pp.decode_g2(good)
