"""Bit strings as ASCII ``0``/``1`` text, indexed from 1 at the left.

Enumerations everywhere in the package identify a bit string of length ``n``
with the integer whose binary expansion (most significant bit first) it is,
so ``"011"`` is 3 and the lexicographic order of strings matches numeric order.
"""

from __future__ import annotations

from typing import Iterator

BitString = str


def check(x: str) -> str:
    if any(ch not in "01" for ch in x):
        raise ValueError(f"not a bit string: {x!r}")
    return x


def bit(x: BitString, i: int) -> int:
    """``x[i]`` with 1-based indexing; ``bit(x, -1)`` is the last bit."""
    if i == 0 or abs(i) > len(x):
        raise IndexError(f"bit index {i} out of range for length {len(x)}")
    return int(x[i - 1] if i > 0 else x[i])


def sub(x: BitString, i: int, j: int) -> BitString:
    """``x[i..j]`` inclusive, empty when ``i > j``."""
    if i > j:
        return ""
    if i < 1 or j > len(x):
        raise IndexError(f"slice {i}..{j} out of range for length {len(x)}")
    return x[i - 1 : j]


def to_int(x: BitString) -> int:
    return int(x, 2) if x else 0


def from_int(v: int, n: int) -> BitString:
    if n == 0:
        return ""
    return format(v, f"0{n}b")


def all_strings(n: int) -> Iterator[BitString]:
    """All of ``{0,1}^n`` in lexicographic order (all-zeros first)."""
    for v in range(1 << n):
        yield from_int(v, n)


def complement(x: BitString) -> BitString:
    return x.translate(str.maketrans("01", "10"))
