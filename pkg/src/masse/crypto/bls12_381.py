"""BLS12-381 groups backed by RELIC through petrelic.

RELIC reports malformed encodings by printing to stderr and returning a
garbage point instead of raising, so encodings are checked here before
they reach it.  ``is_valid`` performs the subgroup check.
"""

from __future__ import annotations

from petrelic.multiplicative.pairing import G1, G2, G1Element, G2Element

Q = 0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB
R = int(G1.order())
FIELD_BYTES = 48
_LEGENDRE = (Q - 1) // 2


class EncodingError(ValueError):
    pass


def _is_square(v: int) -> bool:
    return v == 0 or pow(v, _LEGENDRE, Q) == 1


def _check_prefix(data: bytes, size: int) -> None:
    if len(data) != 1 + size or data[0] not in (2, 3):
        raise EncodingError("bad point encoding")


def decode_g1(data: bytes) -> G1Element:
    if data == b"\x00":
        return G1.neutral_element()
    _check_prefix(data, FIELD_BYTES)
    x = int.from_bytes(data[1:], "big")
    if x >= Q or not _is_square((x * x * x + 4) % Q):
        raise EncodingError("G1 point not on curve")
    elem = G1Element.from_binary(data)
    if not elem.is_valid():
        raise EncodingError("G1 point outside the order-r subgroup")
    return elem


def decode_g2(data: bytes) -> G2Element:
    if data == b"\x00":
        return G2.neutral_element()
    _check_prefix(data, 2 * FIELD_BYTES)
    x0 = int.from_bytes(data[1 : 1 + FIELD_BYTES], "big")
    x1 = int.from_bytes(data[1 + FIELD_BYTES :], "big")
    if x0 >= Q or x1 >= Q:
        raise EncodingError("G2 coordinate out of range")
    # x^3 + 4(1 + i); an Fp2 element is a square iff its norm is a square in Fp
    s0 = (x0 * x0 - x1 * x1) % Q
    s1 = 2 * x0 * x1 % Q
    c0 = (s0 * x0 - s1 * x1 + 4) % Q
    c1 = (s0 * x1 + s1 * x0 + 4) % Q
    if not _is_square((c0 * c0 + c1 * c1) % Q):
        raise EncodingError("G2 point not on twist")
    elem = G2Element.from_binary(data)
    if not elem.is_valid():
        raise EncodingError("G2 point outside the order-r subgroup")
    return elem


def pairing(a, b):
    return a.pair(b)


def g1_generator():
    return G1.generator()


def g2_generator():
    return G2.generator()


def g1_identity():
    return G1.neutral_element()
