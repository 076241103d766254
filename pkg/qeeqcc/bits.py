"""Bit-twiddling helpers shared by the Pauli and determinant code."""


from typing import Iterable

import numpy as np


_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def popcount(value: int, /) -> int:
    """Returns the number of set bits of a non-negative integer."""
    return bin(value).count("1")


def popcount_array(values: np.ndarray, /) -> np.ndarray:
    """Returns the element-wise number of set bits of an integer array."""
    v = np.asarray(values).astype(np.uint64)
    v = v - ((v >> np.uint64(1)) & _M1)
    v = (v & _M2) + ((v >> np.uint64(2)) & _M2)
    v = (v + (v >> np.uint64(4))) & _M4
    return ((v * _H01) >> np.uint64(56)).astype(np.int64)


def parity_array(values: np.ndarray, /) -> np.ndarray:
    """Returns the element-wise parity (0 or 1) of an integer array."""
    return popcount_array(values) & 1


def set_bits(value: int, /) -> list[int]:
    """Returns the positions of the set bits, ascending."""
    positions = []
    position = 0
    while value:
        if value & 1:
            positions.append(position)
        value >>= 1
        position += 1
    return positions


def bits_from_positions(positions: Iterable[int], /) -> int:
    """Returns the integer whose set bits are the given positions."""
    value = 0
    for position in positions:
        value |= 1 << position
    return value


def bit_string(value: int, width: int, /) -> str:
    """Returns the bits of `value` as text with bit 0 leftmost."""
    return "".join("1" if (value >> j) & 1 else "0" for j in range(width))
