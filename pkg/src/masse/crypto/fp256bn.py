"""Pure-Python Type III pairing over the Fp256BN curve (ISO/IEC 15946-5).

Fp256BN is a Barreto-Naehrig curve ``y^2 = x^3 + 3`` over a 256-bit prime
field whose group order ``r`` is itself a 256-bit prime, which makes it the
configuration used for a 256-bit security parameter.  G2 lives on the
M-type sextic twist ``y^2 = x^3 + 3*xi`` with ``xi = 1 + i``.

The pairing is the reduced Tate pairing computed with a Miller loop over
``r``; G2 points are untwisted into E(Fp12) for line evaluation.  Nothing
here is constant time, and it is roughly two orders of magnitude slower
than the RELIC-backed BLS12-381 configuration.
"""

from __future__ import annotations

import secrets

P = 0xFFFFFFFFFFFCF0CD46E5F25EEE71A49F0CDC65FB12980A82D3292DDBAED33013
R = 0xFFFFFFFFFFFCF0CD46E5F25EEE71A49E0CDC65FB1299921AF62D536CD10B500D
BN_U = -0x6882F5C030B0A801
CURVE_B = 3
TWIST_B = (3, 3)  # 3 * (1 + i)
G2_COFACTOR = 2 * P - R

_G1_GEN = (1, 2)
_G2_GEN = (
    (
        0xFE0C3350B4C96C2028560F577C28913ACE1C539A12BF843CD22616B689C09EFB,
        0x4EA66057738AC054DB5AE1C637D813B924DD78E287D03589D269ED34A37E6A2B,
    ),
    (
        0x702046E7C542A3B376770D75124E3E51EFCB24758D615848E909B481BEDC27FF,
        0x0554E3BCD388C29042EEA649297EB29F8B4CBE80821A98B3E01281114AAD049B,
    ),
)

FIELD_BYTES = 32
_SQRT_EXP = (P + 1) // 4
_HALF = pow(2, -1, P)


class EncodingError(ValueError):
    """Raised when bytes do not describe a valid group element."""


# -- base and quadratic extension fields -----------------------------------


def _fp_sqrt(a: int) -> int | None:
    s = pow(a, _SQRT_EXP, P)
    return s if s * s % P == a % P else None


class _Fp:
    zero = 0
    one = 1

    @staticmethod
    def add(a, b):
        return (a + b) % P

    @staticmethod
    def sub(a, b):
        return (a - b) % P

    @staticmethod
    def mul(a, b):
        return a * b % P

    @staticmethod
    def sqr(a):
        return a * a % P

    @staticmethod
    def small(a, k):
        return a * k % P

    @staticmethod
    def neg(a):
        return -a % P

    @staticmethod
    def inv(a):
        return pow(a, -1, P)

    @staticmethod
    def is_zero(a):
        return a == 0


class _Fp2:
    """Elements are pairs ``(c0, c1)`` meaning ``c0 + c1*i`` with ``i^2 = -1``."""

    zero = (0, 0)
    one = (1, 0)

    @staticmethod
    def add(a, b):
        return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)

    @staticmethod
    def sub(a, b):
        return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)

    @staticmethod
    def mul(a, b):
        a0, a1 = a
        b0, b1 = b
        t0 = a0 * b0
        t1 = a1 * b1
        return ((t0 - t1) % P, ((a0 + a1) * (b0 + b1) - t0 - t1) % P)

    @staticmethod
    def sqr(a):
        a0, a1 = a
        return ((a0 + a1) * (a0 - a1) % P, 2 * a0 * a1 % P)

    @staticmethod
    def small(a, k):
        return (a[0] * k % P, a[1] * k % P)

    @staticmethod
    def neg(a):
        return (-a[0] % P, -a[1] % P)

    @staticmethod
    def inv(a):
        n = pow(a[0] * a[0] + a[1] * a[1], -1, P)
        return (a[0] * n % P, -a[1] * n % P)

    @staticmethod
    def is_zero(a):
        return a[0] == 0 and a[1] == 0


def _fp2_sqrt(a: tuple[int, int]) -> tuple[int, int] | None:
    a0, a1 = a
    if a1 == 0:
        s = _fp_sqrt(a0)
        if s is not None:
            return (s, 0)
        s = _fp_sqrt(-a0 % P)
        return None if s is None else (0, s)
    g = _fp_sqrt((a0 * a0 + a1 * a1) % P)
    if g is None:
        return None
    d = (a0 + g) * _HALF % P
    x0 = _fp_sqrt(d)
    if x0 is None:
        x0 = _fp_sqrt((a0 - g) * _HALF % P)
        if x0 is None:
            return None
    x1 = a1 * pow(2 * x0, -1, P) % P
    root = (x0, x1)
    return root if _Fp2.sqr(root) == (a0 % P, a1 % P) else None


# -- degree-12 extension for the target group -----------------------------
#
# Fp12 = Fp[w] / (w^12 - 2 w^6 + 2), i.e. w^6 = xi = 1 + i.


class Fp12:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = tuple(coeffs)

    @classmethod
    def one(cls) -> Fp12:
        return cls((1,) + (0,) * 11)

    @classmethod
    def from_fp2(cls, a: tuple[int, int]) -> Fp12:
        # i = w^6 - 1
        c = [0] * 12
        c[0] = (a[0] - a[1]) % P
        c[6] = a[1]
        return cls(c)

    def __mul__(self, other: Fp12) -> Fp12:
        a = self.c
        b = other.c
        t = [0] * 23
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    t[i + j] += ai * bj
        for k in range(22, 11, -1):
            v = t[k]
            if v:
                t[k - 6] += 2 * v
                t[k - 12] -= 2 * v
        return Fp12([x % P for x in t[:12]])

    def scale(self, k: int) -> Fp12:
        return Fp12([x * k % P for x in self.c])

    def __add__(self, other: Fp12) -> Fp12:
        return Fp12([(x + y) % P for x, y in zip(self.c, other.c)])

    def __sub__(self, other: Fp12) -> Fp12:
        return Fp12([(x - y) % P for x, y in zip(self.c, other.c)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Fp12) and self.c == other.c

    def __hash__(self) -> int:
        return hash(self.c)

    def __pow__(self, e: int) -> Fp12:
        result = Fp12.one()
        base = self
        for bit in bin(e)[2:]:
            result = result * result
            if bit == "1":
                result = result * base
        return result

    def inverse(self) -> Fp12:
        # extended Euclid over Fp[w]
        lm, hm = [1] + [0] * 12, [0] * 13
        low = list(self.c) + [0]
        high = [2, 0, 0, 0, 0, 0, P - 2, 0, 0, 0, 0, 0, 1]
        while _deg(low):
            q = _poly_div(high, low)
            q += [0] * (13 - len(q))
            nm = list(hm)
            new = list(high)
            for i in range(13):
                li, lo = lm[i], low[i]
                if li or lo:
                    for j in range(13 - i):
                        nm[i + j] -= li * q[j]
                        new[i + j] -= lo * q[j]
            nm = [x % P for x in nm]
            new = [x % P for x in new]
            lm, low, hm, high = nm, new, lm, low
        if low[0] == 0:
            raise ZeroDivisionError("Fp12 inverse of zero")
        k = pow(low[0], -1, P)
        return Fp12([x * k % P for x in lm[:12]])

    def frobenius(self, power: int) -> Fp12:
        images = _FROB[power]
        out = [0] * 12
        for ci, img in zip(self.c, images):
            if ci:
                for k, v in enumerate(img.c):
                    out[k] += ci * v
        return Fp12([x % P for x in out])

    def to_bytes(self) -> bytes:
        return b"".join(x.to_bytes(FIELD_BYTES, "big") for x in self.c)

    def is_one(self) -> bool:
        return self.c == Fp12.one().c


def _deg(poly) -> int:
    d = len(poly) - 1
    while d and poly[d] == 0:
        d -= 1
    return d


def _poly_div(a, b):
    dega, degb = _deg(a), _deg(b)
    temp = list(a)
    out = [0] * len(a)
    inv_lead = pow(b[degb], -1, P)
    for i in range(dega - degb, -1, -1):
        q = temp[degb + i] * inv_lead % P
        out[i] += q
        for c in range(degb + 1):
            temp[c + i] -= b[c] * q
    return [x % P for x in out[: _deg(out) + 1]]


def _w_power(k: int) -> Fp12:
    c = [0] * 12
    c[1] = 1
    return Fp12(c) ** k


def _frobenius_images(k: int) -> list[Fp12]:
    # (w^i)^(p^k) = (w^(p^k))^i; coefficients in Fp are fixed by Frobenius
    base = _w_power(P**k)
    images = [Fp12.one()]
    for _ in range(11):
        images.append(images[-1] * base)
    return images


_W = _w_power(1)
_FROB = {k: _frobenius_images(k) for k in (1, 2, 6)}
_W2_INV = (_W * _W).inverse()
_W3_INV = (_W * _W * _W).inverse()
_HARD_EXP = (P**4 - P**2 + 1) // R


def final_exponentiation(f: Fp12) -> Fp12:
    f = f.frobenius(6) * f.inverse()
    f = f.frobenius(2) * f
    return f**_HARD_EXP


# -- elliptic curve groups -------------------------------------------------


def _jac_double(F, pt):
    x, y, z = pt
    if F.is_zero(y):
        return None
    a = F.sqr(x)
    b = F.sqr(y)
    c = F.sqr(b)
    d = F.small(F.sub(F.sub(F.sqr(F.add(x, b)), a), c), 2)
    e = F.small(a, 3)
    x3 = F.sub(F.sqr(e), F.small(d, 2))
    y3 = F.sub(F.mul(e, F.sub(d, x3)), F.small(c, 8))
    z3 = F.small(F.mul(y, z), 2)
    return (x3, y3, z3)


def _jac_add_affine(F, pt, q):
    """Mixed addition of a Jacobian point and an affine point."""
    if pt is None:
        return (q[0], q[1], F.one)
    x1, y1, z1 = pt
    z1z1 = F.sqr(z1)
    u2 = F.mul(q[0], z1z1)
    s2 = F.mul(q[1], F.mul(z1, z1z1))
    h = F.sub(u2, x1)
    rr = F.sub(s2, y1)
    if F.is_zero(h):
        if F.is_zero(rr):
            return _jac_double(F, pt)
        return None
    hh = F.sqr(h)
    hhh = F.mul(h, hh)
    v = F.mul(x1, hh)
    x3 = F.sub(F.sub(F.sqr(rr), hhh), F.small(v, 2))
    y3 = F.sub(F.mul(rr, F.sub(v, x3)), F.mul(y1, hhh))
    z3 = F.mul(z1, h)
    return (x3, y3, z3)


def _to_affine(F, pt):
    if pt is None:
        return None
    x, y, z = pt
    zi = F.inv(z)
    zi2 = F.sqr(zi)
    return (F.mul(x, zi2), F.mul(y, F.mul(zi, zi2)))


def _affine_add(F, p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if F.is_zero(F.add(y1, y2)):
            return None
        lam = F.mul(F.small(F.sqr(x1), 3), F.inv(F.small(y1, 2)))
    else:
        lam = F.mul(F.sub(y2, y1), F.inv(F.sub(x2, x1)))
    x3 = F.sub(F.sub(F.sqr(lam), x1), x2)
    return (x3, F.sub(F.mul(lam, F.sub(x1, x3)), y1))


def _scalar_mul(F, pt, k: int):
    k %= R
    if pt is None or k == 0:
        return None
    acc = None
    for bit in bin(k)[2:]:
        if acc is not None:
            acc = _jac_double(F, acc)
        if bit == "1":
            acc = _jac_add_affine(F, acc, pt)
    return _to_affine(F, acc)


class _Point:
    """Affine point in multiplicative notation; ``None`` coordinates = identity."""

    __slots__ = ("xy",)
    _F = None
    _b = None

    def __init__(self, xy):
        self.xy = xy

    def __mul__(self, other):
        return type(self)(_affine_add(self._F, self.xy, other.xy))

    def __pow__(self, k: int):
        return type(self)(_scalar_mul(self._F, self.xy, int(k)))

    def inverse(self):
        if self.xy is None:
            return self
        return type(self)((self.xy[0], self._F.neg(self.xy[1])))

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and self.xy == other.xy

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.xy))

    def is_neutral_element(self) -> bool:
        return self.xy is None

    def on_curve(self) -> bool:
        if self.xy is None:
            return True
        F = self._F
        x, y = self.xy
        return F.sqr(y) == F.add(F.mul(F.sqr(x), x), self._b)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_binary().hex()})"


class G1Point(_Point):
    __slots__ = ()
    _F = _Fp
    _b = CURVE_B

    def to_binary(self) -> bytes:
        if self.xy is None:
            return b"\x00"
        x, y = self.xy
        return bytes([2 | (y & 1)]) + x.to_bytes(FIELD_BYTES, "big")

    @classmethod
    def from_binary(cls, data: bytes) -> G1Point:
        if data == b"\x00":
            return cls(None)
        if len(data) != 1 + FIELD_BYTES or data[0] not in (2, 3):
            raise EncodingError("bad G1 encoding")
        x = int.from_bytes(data[1:], "big")
        if x >= P:
            raise EncodingError("G1 x-coordinate out of range")
        y = _fp_sqrt((x * x * x + CURVE_B) % P)
        if y is None:
            raise EncodingError("G1 point not on curve")
        if (y & 1) != (data[0] & 1):
            y = P - y
        # cofactor is 1: on-curve points are in the order-r group
        return cls((x, y))


class G2Point(_Point):
    __slots__ = ()
    _F = _Fp2
    _b = TWIST_B

    def to_binary(self) -> bytes:
        if self.xy is None:
            return b"\x00"
        (x0, x1), y = self.xy
        return (
            bytes([2 | _fp2_sign(y)])
            + x0.to_bytes(FIELD_BYTES, "big")
            + x1.to_bytes(FIELD_BYTES, "big")
        )

    @classmethod
    def from_binary(cls, data: bytes) -> G2Point:
        if data == b"\x00":
            return cls(None)
        if len(data) != 1 + 2 * FIELD_BYTES or data[0] not in (2, 3):
            raise EncodingError("bad G2 encoding")
        x = (
            int.from_bytes(data[1 : 1 + FIELD_BYTES], "big"),
            int.from_bytes(data[1 + FIELD_BYTES :], "big"),
        )
        if x[0] >= P or x[1] >= P:
            raise EncodingError("G2 x-coordinate out of range")
        y = _fp2_sqrt(_Fp2.add(_Fp2.mul(_Fp2.sqr(x), x), TWIST_B))
        if y is None:
            raise EncodingError("G2 point not on twist")
        if _fp2_sign(y) != (data[0] & 1):
            y = _Fp2.neg(y)
        pt = cls((x, y))
        if _scalar_mul_raw(_Fp2, pt.xy, R) is not None:
            raise EncodingError("G2 point outside the order-r subgroup")
        return pt


def _scalar_mul_raw(F, pt, k: int):
    """Scalar multiplication without reducing ``k`` mod r (subgroup checks)."""
    acc = None
    for bit in bin(k)[2:]:
        if acc is not None:
            acc = _jac_double(F, acc)
        if bit == "1":
            acc = _jac_add_affine(F, acc, pt)
    return _to_affine(F, acc)


def _fp2_sign(y: tuple[int, int]) -> int:
    return (y[1] & 1) if y[1] else (y[0] & 1)


class GTElement:
    __slots__ = ("value",)

    def __init__(self, value: Fp12):
        self.value = value

    def __mul__(self, other: GTElement) -> GTElement:
        return GTElement(self.value * other.value)

    def __pow__(self, k: int) -> GTElement:
        return GTElement(self.value ** (int(k) % R))

    def __eq__(self, other) -> bool:
        return isinstance(other, GTElement) and self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def is_neutral_element(self) -> bool:
        return self.value.is_one()

    def to_binary(self) -> bytes:
        return self.value.to_bytes()


# -- pairing ------------------------------------------------------------------


def _untwist(q) -> tuple[Fp12, Fp12]:
    x, y = q
    return Fp12.from_fp2(x) * _W2_INV, Fp12.from_fp2(y) * _W3_INV


def _line(t, lam: int, xq: Fp12, yq: Fp12) -> Fp12:
    # yq - yt - lam * (xq - xt)
    const = (lam * t[0] - t[1]) % P
    out = list((yq - xq.scale(lam)).c)
    out[0] = (out[0] + const) % P
    return Fp12(out)


def pairing(p: G1Point, q: G2Point) -> GTElement:
    if p.xy is None or q.xy is None:
        return GTElement(Fp12.one())
    xq, yq = _untwist(q.xy)
    px, py = p.xy
    f = Fp12.one()
    t = p.xy
    for bit in bin(R)[3:]:
        tx, ty = t
        lam = 3 * tx * tx * pow(2 * ty, -1, P) % P
        f = f * f * _line(t, lam, xq, yq)
        x3 = (lam * lam - 2 * tx) % P
        t = (x3, (lam * (tx - x3) - ty) % P)
        if bit == "1":
            tx, ty = t
            if tx == px:
                # t == -p: vertical line, eliminated by the final exponentiation
                t = None
                continue
            lam = (py - ty) * pow(px - tx, -1, P) % P
            f = f * _line(t, lam, xq, yq)
            x3 = (lam * lam - tx - px) % P
            t = (x3, (lam * (tx - x3) - ty) % P)
    return GTElement(final_exponentiation(f))


def g1_generator() -> G1Point:
    return G1Point(_G1_GEN)


def g2_generator() -> G2Point:
    return G2Point(_G2_GEN)


def random_scalar() -> int:
    return secrets.randbelow(R - 1) + 1


def g1_identity() -> G1Point:
    return G1Point(None)


def decode_g1(data: bytes) -> G1Point:
    return G1Point.from_binary(data)


def decode_g2(data: bytes) -> G2Point:
    return G2Point.from_binary(data)
