"""Public parameters: the pairing groups plus the symmetric primitive choices."""

from __future__ import annotations

import os
import secrets
from dataclasses import dataclass, field
from functools import lru_cache
from types import ModuleType

from masse.errors import ConfigurationError, FormatError

from . import primitives

# security parameter -> (curve name, backend module path)
CURVES = {
    128: "BLS12-381",
    256: "Fp256BN",
}


def _load_backend(curve: str) -> ModuleType:
    if curve == "BLS12-381":
        from . import bls12_381

        return bls12_381
    from . import fp256bn

    return fp256bn


@dataclass(frozen=True, eq=False)
class PublicParams:
    """``pp``: groups G1, G2, GT of prime order with generators and a pairing.

    Group elements are used in multiplicative notation: ``a * b`` is the
    group operation and ``a ** k`` exponentiation by an integer.
    """

    security_bits: int
    curve: str
    order: int
    g1: object
    g2: object
    backend: ModuleType = field(repr=False)
    hash_name: str = "SHA-256"
    prf_name: str = "HMAC-SHA256"
    cipher_name: str = "AES-CTR"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PublicParams)
            and self.security_bits == other.security_bits
            and self.curve == other.curve
        )

    def __hash__(self) -> int:
        return hash((self.security_bits, self.curve))

    @property
    def key_bytes(self) -> int:
        return self.security_bits // 8

    def pair(self, a, b):
        return self.backend.pairing(a, b)

    def g1_identity(self):
        return self.backend.g1_identity()

    def random_scalar(self) -> int:
        return secrets.randbelow(self.order - 1) + 1

    def random_key(self) -> bytes:
        return os.urandom(self.key_bytes)

    def F(self, key: bytes, msg: bytes, domain: bytes) -> bytes:
        return primitives.prf_F(key, msg, domain=domain)

    def Fp(self, key: bytes, msg: bytes, domain: bytes) -> int:
        return primitives.prf_Fp(key, msg, self.order, domain=domain)

    @staticmethod
    def encode(elem) -> bytes:
        """Canonical compressed encoding; all hashes of group elements go through this."""
        return elem.to_binary()

    def decode_g1(self, data: bytes):
        try:
            return self.backend.decode_g1(bytes(data))
        except ValueError as exc:
            raise FormatError(str(exc)) from exc

    def decode_g2(self, data: bytes):
        try:
            return self.backend.decode_g2(bytes(data))
        except ValueError as exc:
            raise FormatError(str(exc)) from exc


@lru_cache(maxsize=None)
def setup_params(security_bits: int = 128) -> PublicParams:
    """Return the fixed curve configuration for a security parameter (128 or 256)."""
    if security_bits not in CURVES:
        raise ConfigurationError(
            f"unsupported security parameter {security_bits}; choose one of {sorted(CURVES)}"
        )
    curve = CURVES[security_bits]
    backend = _load_backend(curve)
    return PublicParams(
        security_bits=security_bits,
        curve=curve,
        order=backend.R,
        g1=backend.g1_generator(),
        g2=backend.g2_generator(),
        backend=backend,
    )
