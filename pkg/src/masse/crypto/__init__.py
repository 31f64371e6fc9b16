"""Pairing groups, PRFs, hashing and symmetric encryption."""

from .params import CURVES, PublicParams, setup_params
from .primitives import hash_H, prf_F, prf_Fp, sym_decrypt, sym_encrypt, xor_bytes

__all__ = [
    "CURVES",
    "PublicParams",
    "setup_params",
    "hash_H",
    "prf_F",
    "prf_Fp",
    "sym_decrypt",
    "sym_encrypt",
    "xor_bytes",
]
