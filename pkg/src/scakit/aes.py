"""AES-128 reference cipher exposing the last-round intermediates.

Blocks are flat arrays of 16 bytes in FIPS-197 wire order: byte ``i``
sits at row ``i % 4``, column ``i // 4`` of the state matrix.  On top of
plain encryption this module exposes the value held by the state
register just before the final-round overwrite, the ShiftRows byte
permutation, and the toggle/Hamming-distance helpers that the power
model and the CPA hypothesis generator are built from.
"""

import numpy as np

SBOX = np.array([
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
], dtype=np.uint8)

INV_SBOX = np.array([
    0x52, 0x09, 0x6a, 0xd5, 0x30, 0x36, 0xa5, 0x38, 0xbf, 0x40, 0xa3, 0x9e, 0x81, 0xf3, 0xd7, 0xfb,
    0x7c, 0xe3, 0x39, 0x82, 0x9b, 0x2f, 0xff, 0x87, 0x34, 0x8e, 0x43, 0x44, 0xc4, 0xde, 0xe9, 0xcb,
    0x54, 0x7b, 0x94, 0x32, 0xa6, 0xc2, 0x23, 0x3d, 0xee, 0x4c, 0x95, 0x0b, 0x42, 0xfa, 0xc3, 0x4e,
    0x08, 0x2e, 0xa1, 0x66, 0x28, 0xd9, 0x24, 0xb2, 0x76, 0x5b, 0xa2, 0x49, 0x6d, 0x8b, 0xd1, 0x25,
    0x72, 0xf8, 0xf6, 0x64, 0x86, 0x68, 0x98, 0x16, 0xd4, 0xa4, 0x5c, 0xcc, 0x5d, 0x65, 0xb6, 0x92,
    0x6c, 0x70, 0x48, 0x50, 0xfd, 0xed, 0xb9, 0xda, 0x5e, 0x15, 0x46, 0x57, 0xa7, 0x8d, 0x9d, 0x84,
    0x90, 0xd8, 0xab, 0x00, 0x8c, 0xbc, 0xd3, 0x0a, 0xf7, 0xe4, 0x58, 0x05, 0xb8, 0xb3, 0x45, 0x06,
    0xd0, 0x2c, 0x1e, 0x8f, 0xca, 0x3f, 0x0f, 0x02, 0xc1, 0xaf, 0xbd, 0x03, 0x01, 0x13, 0x8a, 0x6b,
    0x3a, 0x91, 0x11, 0x41, 0x4f, 0x67, 0xdc, 0xea, 0x97, 0xf2, 0xcf, 0xce, 0xf0, 0xb4, 0xe6, 0x73,
    0x96, 0xac, 0x74, 0x22, 0xe7, 0xad, 0x35, 0x85, 0xe2, 0xf9, 0x37, 0xe8, 0x1c, 0x75, 0xdf, 0x6e,
    0x47, 0xf1, 0x1a, 0x71, 0x1d, 0x29, 0xc5, 0x89, 0x6f, 0xb7, 0x62, 0x0e, 0xaa, 0x18, 0xbe, 0x1b,
    0xfc, 0x56, 0x3e, 0x4b, 0xc6, 0xd2, 0x79, 0x20, 0x9a, 0xdb, 0xc0, 0xfe, 0x78, 0xcd, 0x5a, 0xf4,
    0x1f, 0xdd, 0xa8, 0x33, 0x88, 0x07, 0xc7, 0x31, 0xb1, 0x12, 0x10, 0x59, 0x27, 0x80, 0xec, 0x5f,
    0x60, 0x51, 0x7f, 0xa9, 0x19, 0xb5, 0x4a, 0x0d, 0x2d, 0xe5, 0x7a, 0x9f, 0x93, 0xc9, 0x9c, 0xef,
    0xa0, 0xe0, 0x3b, 0x4d, 0xae, 0x2a, 0xf5, 0xb0, 0xc8, 0xeb, 0xbb, 0x3c, 0x83, 0x53, 0x99, 0x61,
    0x17, 0x2b, 0x04, 0x7e, 0xba, 0x77, 0xd6, 0x26, 0xe1, 0x69, 0x14, 0x63, 0x55, 0x21, 0x0c, 0x7d,
], dtype=np.uint8)

RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)

# ShiftRows as a byte-position permutation of the flat state:
# SR_FORWARD[p] is where the byte at position p lands, SR_INVERSE[q] is
# where the byte now at position q came from.
SR_FORWARD = np.array([0, 13, 10, 7, 4, 1, 14, 11, 8, 5, 2, 15, 12, 9, 6, 3])
SR_INVERSE = np.array([0, 5, 10, 15, 4, 9, 14, 3, 8, 13, 2, 7, 12, 1, 6, 11])

HW_TABLE = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)


def as_block(value) -> np.ndarray:
    """Coerce bytes / hex string / 16-int sequence to a (16,) uint8 array."""
    if isinstance(value, str):
        value = bytes.fromhex(value)
    block = np.asarray(bytearray(value) if isinstance(value, (bytes, bytearray)) else value,
                       dtype=np.uint8)
    if block.shape != (16,):
        raise ValueError(f"block must have exactly 16 bytes, got shape {block.shape}")
    return block


def block_hex(block) -> str:
    """Lowercase hex string of a 16-byte block."""
    return bytes(as_block(block)).hex()


def expand_key(key) -> np.ndarray:
    """FIPS-197 key expansion.

    Returns an (11, 16) uint8 array of round keys; row 0 is the cipher
    key itself and row 10 is the key mixed into the final round.
    """
    words = list(as_block(key).reshape(4, 4))
    for i in range(4, 44):
        temp = words[i - 1]
        if i % 4 == 0:
            temp = SBOX[np.roll(temp, -1)].copy()
            temp[0] ^= RCON[i // 4 - 1]
        words.append(words[i - 4] ^ temp)
    return np.concatenate(words).reshape(11, 16)


def last_round_key(key) -> np.ndarray:
    """Round-10 key, the value recovered by the last-round attack."""
    return expand_key(key)[10]


def invert_key_schedule(round10_key) -> np.ndarray:
    """Recover the cipher key from the round-10 key by running the
    expansion backwards."""
    words = [None] * 44
    words[40:44] = list(as_block(round10_key).reshape(4, 4))
    for i in range(43, 3, -1):
        temp = words[i - 1]
        if i % 4 == 0:
            temp = SBOX[np.roll(temp, -1)].copy()
            temp[0] ^= RCON[i // 4 - 1]
        words[i - 4] = words[i] ^ temp
    return np.concatenate(words[0:4])


def _xtime(col):
    doubled = (col.astype(np.int32) << 1) ^ np.where(col & 0x80, 0x1B, 0)
    return (doubled & 0xFF).astype(np.uint8)


def _mix_columns(states):
    out = np.empty_like(states)
    for c in range(0, 16, 4):
        s0, s1, s2, s3 = (states[:, c + i] for i in range(4))
        t = s0 ^ s1 ^ s2 ^ s3
        out[:, c + 0] = s0 ^ t ^ _xtime(s0 ^ s1)
        out[:, c + 1] = s1 ^ t ^ _xtime(s1 ^ s2)
        out[:, c + 2] = s2 ^ t ^ _xtime(s2 ^ s3)
        out[:, c + 3] = s3 ^ t ^ _xtime(s3 ^ s0)
    return out


def _encrypt_states(round_keys, states):
    """Run the cipher on an (n, 16) batch; returns (round-9 output, ciphertext)."""
    s = states ^ round_keys[0]
    for r in range(1, 10):
        s = _mix_columns(SBOX[s][:, SR_INVERSE]) ^ round_keys[r]
    round9 = s
    ct = SBOX[s][:, SR_INVERSE] ^ round_keys[10]
    return round9, ct


def encrypt_block(key, plaintext) -> np.ndarray:
    """AES-128 encryption of a single 16-byte block."""
    return _encrypt_states(expand_key(key), as_block(plaintext)[None, :])[1][0]


def encrypt_batch(key, plaintexts) -> np.ndarray:
    """AES-128 encryption of an (n, 16) array of blocks under one key."""
    pts = _as_batch(plaintexts)
    return _encrypt_states(expand_key(key), pts)[1]


def last_round_states(key, plaintext):
    """State register content before the final-round overwrite, and the
    ciphertext that overwrites it.

    XOR of the two is the true per-bit toggle mask of the overwrite.
    """
    round9, ct = _encrypt_states(expand_key(key), as_block(plaintext)[None, :])
    return round9[0], ct[0]


def last_round_states_batch(key, plaintexts):
    """Batch form of :func:`last_round_states` over an (n, 16) array."""
    return _encrypt_states(expand_key(key), _as_batch(plaintexts))


def _as_batch(blocks):
    arr = np.asarray(blocks, dtype=np.uint8)
    if arr.ndim != 2 or arr.shape[1] != 16:
        raise ValueError(f"expected an (n, 16) byte array, got shape {arr.shape}")
    return arr


def _check_byte_index(byte_index):
    if not 0 <= byte_index <= 15:
        raise ValueError(f"byte_index must be in 0..15, got {byte_index}")


def _check_guess(key_guess):
    if not 0 <= key_guess <= 255:
        raise ValueError(f"key_guess must be in 0..255, got {key_guess}")


def last_round_transitions(ct, key_guess, byte_index) -> int:
    """Predicted toggle byte of the final-round register overwrite.

    Under guess ``key_guess`` for the round-10 key byte at position
    ``SR_FORWARD[byte_index]``, the state byte at ``byte_index`` went from
    ``INV_SBOX[ct[SR_FORWARD[byte_index]] ^ key_guess]`` to ``ct[byte_index]``;
    the return value is the XOR of the two.
    """
    _check_byte_index(byte_index)
    _check_guess(key_guess)
    ct = as_block(ct)
    prior = INV_SBOX[ct[SR_FORWARD[byte_index]] ^ key_guess]
    return int(prior ^ ct[byte_index])


def hamming_weight(v) -> int:
    """Population count of an 8-bit value."""
    return int(HW_TABLE[v])


def hypothetical_power(ct, key_guess, byte_index) -> int:
    """Model value for CPA: Hamming distance of the predicted overwrite,
    i.e. the Hamming weight of :func:`last_round_transitions`."""
    return hamming_weight(last_round_transitions(ct, key_guess, byte_index))


def hypothesis_matrix(ciphertexts, byte_index) -> np.ndarray:
    """Model values for all 256 key guesses at once.

    Returns an (n_traces, 256) uint8 array where column ``k`` holds
    :func:`hypothetical_power` under guess ``k``.
    """
    _check_byte_index(byte_index)
    cts = _as_batch(ciphertexts)
    guesses = np.arange(256, dtype=np.uint8)
    prior = INV_SBOX[cts[:, SR_FORWARD[byte_index], None] ^ guesses[None, :]]
    return HW_TABLE[prior ^ cts[:, byte_index, None]]


def correct_last_round_guess(key, byte_index) -> int:
    """The guess value that is correct when attacking ``byte_index``:
    the round-10 key byte at the post-ShiftRows position."""
    _check_byte_index(byte_index)
    return int(last_round_key(key)[SR_FORWARD[byte_index]])
