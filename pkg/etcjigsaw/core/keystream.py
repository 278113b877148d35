# keystream.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Deterministic 64 bit keystreams for key expansion and key derivation.

The generator is counter based so any language reproduces the same
expansions.  In pseudocode, with all arithmetic modulo 2**64:

    next(stream):
        stream.counter = stream.counter + 1
        z = stream.seed + stream.counter * 0x9E3779B97F4A7C15
        z = (z xor (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z xor (z >> 27)) * 0x94D049BB133111EB
        return z xor (z >> 31)

    uniform(stream, bound):
        limit = 2**64 - (2**64 mod bound)
        repeat z = next(stream) until z < limit
        return z mod bound

    permutation(stream, n):
        p = [0, 1, ..., n - 1]
        for i = n - 1 down to 1:
            j = uniform(stream, i + 1)
            swap p[i] and p[j]
        return p

The generator is not a cryptographic one: the attack measured by this
package never searches the key space.

"""
import hashlib

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


class KeystreamError(Exception):
    """Raise when a keystream is asked for an impossible value."""


def mix64(value):
    """Return the 64 bit finalizing mix of value."""
    value = ((value ^ (value >> 30)) * _MIX_1) & MASK64
    value = ((value ^ (value >> 27)) * _MIX_2) & MASK64
    return value ^ (value >> 31)


class Keystream:
    """Counter based stream of 64 bit values derived from a seed."""

    def __init__(self, seed):
        """Set seed and reset the counter."""
        if not 0 <= seed <= MASK64:
            raise KeystreamError(
                "".join(("Seed ", str(seed), " is not an unsigned 64 bit"))
            )
        self.seed = seed
        self.counter = 0

    def next_u64(self):
        """Return next 64 bit value in stream."""
        self.counter += 1
        return mix64((self.seed + self.counter * _GAMMA) & MASK64)

    def uniform(self, bound):
        """Return value uniform on range(bound) by rejection sampling."""
        if bound < 1:
            raise KeystreamError("Bound must be at least 1")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def bit(self):
        """Return 0 or 1 with probability 0.5 each."""
        return self.uniform(2)

    def permutation(self, n):
        """Return Fisher-Yates permutation of range(n) as a list."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.uniform(i + 1)
            order[i], order[j] = order[j], order[i]
        return order


def derive_seeds(count, *path):
    """Return count 64 bit seeds derived from the items in path.

    The seeds are the first 8 * count bytes of the SHA-256 digest of the
    items joined by '/', read as big-endian integers.  The harness uses
    (master seed, image id, key index) as path so any cell of an
    experiment can be run on its own.

    """
    if not 0 < count <= 4:
        raise KeystreamError("One to four seeds fit in a SHA-256 digest")
    digest = hashlib.sha256(
        "/".join(str(item) for item in path).encode("utf-8")
    ).digest()
    return tuple(
        int.from_bytes(digest[8 * item : 8 * item + 8], "big")
        for item in range(count)
    )
