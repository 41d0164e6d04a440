"""Independent reference models shared by the unit and acceptance tests."""

import cmath
import math
import numpy as np


def index_of(n_qubits, assign):
    """Basis index (qubit 0 most significant) with ``assign[q] = bit``."""
    idx = 0
    for q, bit in assign.items():
        if bit:
            idx |= 1 << (n_qubits - 1 - q)
    return idx


def write_reg(assign, reg, value):
    """Little-endian: reg[0] holds the lowest bit of ``value``."""
    for i, q in enumerate(reg):
        assign[q] = (value >> i) & 1


def dft(k, inverse=False):
    n = 2**k
    sgn = -1 if inverse else 1
    return np.array([[cmath.exp(sgn * 2j * math.pi * x * y / n) for x in range(n)] for y in range(n)]) / math.sqrt(n)


def adder_expected(p, sign, mag, add):
    """Acc register after adding: (p+1)-bit magnitudes add modulo 2, sign kept."""
    return sign, (mag + add) % (1 << (p + 1))
