"""Small helpers for vertex and rank sets packed into python ints."""


def bit(i):
    return 1 << i


def full_mask(n):
    return (1 << n) - 1


def interval_mask(lo, hi, n):
    """Bits lo..hi inclusive, clipped to [0, n-1]; 0 when the range is empty."""
    lo = max(lo, 0)
    hi = min(hi, n - 1)
    if lo > hi:
        return 0
    return ((1 << (hi + 1)) - 1) ^ ((1 << lo) - 1)


def popcount(mask):
    return bin(mask).count("1")


def lowest(mask):
    return (mask & -mask).bit_length() - 1


def highest(mask):
    return mask.bit_length() - 1


def is_singleton(mask):
    return mask != 0 and mask & (mask - 1) == 0


def iter_bits(mask):
    """Set bits of mask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(members):
    mask = 0
    for i in members:
        mask |= 1 << i
    return mask


def to_set(mask):
    return frozenset(iter_bits(mask))
