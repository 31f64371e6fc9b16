"""Hash, PRFs and the identifier cipher.

Both PRFs are HMAC-SHA256.  Every call site passes a short domain label
("stag", "xtrap", "z", ...) that is framed in front of the message, so the
same key never yields related outputs in two different roles.
"""

from __future__ import annotations

import hashlib
import hmac
import os

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from masse.errors import FormatError

KEY_SIZES = (16, 32)
MAX_ID_LEN = 64
NONCE_LEN = 16
_MAGIC = b"MSE1"
_BLOCK_LEN = len(_MAGIC) + 1 + MAX_ID_LEN
CIPHERTEXT_LEN = NONCE_LEN + _BLOCK_LEN


def _check_key(key: bytes) -> None:
    if len(key) not in KEY_SIZES:
        raise ValueError(f"PRF key must be 16 or 32 bytes, got {len(key)}")


def _frame(domain: bytes, msg: bytes) -> bytes:
    if len(domain) > 255:
        raise ValueError("domain label too long")
    return bytes([len(domain)]) + domain + msg


def prf_F(key: bytes, msg: bytes, *, domain: bytes = b"") -> bytes:
    """Keyed PRF with output as long as the key (lambda bits in, lambda bits out)."""
    _check_key(key)
    return hmac.digest(key, _frame(domain, msg), "sha256")[: len(key)]


def prf_Fp(key: bytes, msg: bytes, order: int, *, domain: bytes = b"") -> int:
    """PRF into Z_p^*: 512 bits of HMAC output reduced mod ``order``, retrying on zero."""
    _check_key(key)
    framed = _frame(domain, msg)
    ctr = 0
    while True:
        wide = hmac.digest(key, framed + bytes([ctr]), "sha256") + hmac.digest(
            key, framed + bytes([ctr + 1]), "sha256"
        )
        value = int.from_bytes(wide, "big") % order
        if value:
            return value
        ctr += 2


def hash_H(msg: bytes) -> bytes:
    return hashlib.sha256(msg).digest()


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor of unequal-length strings")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def sym_encrypt(key: bytes, plaintext: bytes) -> bytes:
    """AES-CTR under a fresh random nonce.

    The identifier is framed as magic || length || zero-padded body so that
    every ciphertext has the same size and a wrong-key decryption is caught.
    """
    _check_key(key)
    if len(plaintext) > MAX_ID_LEN:
        raise ValueError(f"identifier longer than {MAX_ID_LEN} bytes")
    block = _MAGIC + bytes([len(plaintext)]) + plaintext.ljust(MAX_ID_LEN, b"\x00")
    nonce = os.urandom(NONCE_LEN)
    enc = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
    return nonce + enc.update(block) + enc.finalize()


def sym_decrypt(key: bytes, ciphertext: bytes) -> bytes:
    _check_key(key)
    if len(ciphertext) != CIPHERTEXT_LEN:
        raise FormatError("ciphertext has the wrong length")
    nonce, body = ciphertext[:NONCE_LEN], ciphertext[NONCE_LEN:]
    dec = Cipher(algorithms.AES(key), modes.CTR(nonce)).decryptor()
    block = dec.update(body) + dec.finalize()
    size = block[len(_MAGIC)]
    padding = block[len(_MAGIC) + 1 + size :]
    if block[: len(_MAGIC)] != _MAGIC or size > MAX_ID_LEN or padding.strip(b"\x00"):
        raise FormatError("ciphertext does not decrypt under this key")
    return block[len(_MAGIC) + 1 : len(_MAGIC) + 1 + size]
