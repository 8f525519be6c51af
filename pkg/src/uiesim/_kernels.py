"""In-place bitset kernels for the fast engine."""
import numba
import numpy as np


@numba.njit(cache=True)
def or_into_rows(bits, rows, msg):
    for i in range(rows.shape[0]):
        r = rows[i]
        for w in range(msg.shape[0]):
            bits[r, w] |= msg[w]


@numba.njit(cache=True)
def union_is_full(bits, n_rows, seed_row, full):
    acc = seed_row.copy()
    words = full.shape[0]
    for r in range(n_rows):
        for w in range(words):
            acc[w] |= bits[r, w]
        if r % 16 == 15 or r == n_rows - 1:
            done = True
            for w in range(words):
                if acc[w] != full[w]:
                    done = False
                    break
            if done:
                return True
    for w in range(words):
        if acc[w] != full[w]:
            return False
    return True
