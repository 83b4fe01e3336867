"""Dense GF(p) row-reduction kernels.

Two interchangeable implementations of reduced row echelon form over a prime
field on int64 arrays: a numba ``@njit`` kernel and a pure-numpy fallback.
The backend is chosen by the ``LIEFREEDOM_KERNEL`` environment variable
(``numba`` or ``numpy``); by default numba is used when it imports cleanly.
Both are exact: all arithmetic is integer arithmetic mod p, and p is capped
so products fit in int64.
"""

from __future__ import annotations

import os

import numpy as np

# products (p-1)^2 plus one addition must stay inside int64
MAX_DENSE_PRIME = 2**31 - 1


def _rref_mod_numpy(a, p):
    """Reduced row echelon form of ``a`` mod p.  Mutates and returns ``a``."""
    rows, cols = a.shape
    piv_r = 0
    pivots = []
    for c in range(cols):
        if piv_r == rows:
            break
        nz = np.nonzero(a[piv_r:, c])[0]
        if nz.size == 0:
            continue
        r = piv_r + int(nz[0])
        if r != piv_r:
            a[[piv_r, r]] = a[[r, piv_r]]
        inv = pow(int(a[piv_r, c]), p - 2, p)
        a[piv_r] = (a[piv_r] * inv) % p
        col = a[:, c].copy()
        col[piv_r] = 0
        mask = col != 0
        if mask.any():
            a[mask] = (a[mask] - np.outer(col[mask], a[piv_r])) % p
        pivots.append(c)
        piv_r += 1
    return a, pivots


def _make_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def _rref_mod_numba(a, p):  # pragma: no cover - exercised via wrapper
        rows, cols = a.shape
        piv_cols = np.empty(min(rows, cols), dtype=np.int64)
        piv_r = 0
        for c in range(cols):
            if piv_r == rows:
                break
            sel = -1
            for r in range(piv_r, rows):
                if a[r, c] % p != 0:
                    sel = r
                    break
            if sel < 0:
                continue
            if sel != piv_r:
                for j in range(cols):
                    tmp = a[sel, j]
                    a[sel, j] = a[piv_r, j]
                    a[piv_r, j] = tmp
            # modular inverse by square-and-multiply
            base = a[piv_r, c] % p
            e = p - 2
            inv = 1
            while e > 0:
                if e & 1:
                    inv = (inv * base) % p
                base = (base * base) % p
                e >>= 1
            for j in range(cols):
                a[piv_r, j] = (a[piv_r, j] * inv) % p
            for r in range(rows):
                if r == piv_r:
                    continue
                f = a[r, c] % p
                if f != 0:
                    for j in range(cols):
                        a[r, j] = (a[r, j] - f * a[piv_r, j]) % p
            piv_cols[piv_r] = c
            piv_r += 1
        return piv_cols[:piv_r]

    def wrapper(a, p):
        piv = _rref_mod_numba(a, p)
        return a, [int(c) for c in piv]

    return wrapper


def _select_backend():
    choice = os.environ.get("LIEFREEDOM_KERNEL", "").strip().lower()
    if choice == "numpy":
        return "numpy", _rref_mod_numpy
    try:
        kernel = _make_numba_kernel()
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", _rref_mod_numpy
    return "numba", kernel


_BACKEND_NAME, _KERNEL = _select_backend()


def active_backend():
    return _BACKEND_NAME


def rref_mod(matrix, p):
    """RREF of an integer matrix mod p via the selected dense backend.

    ``matrix`` is any 2-d array-like of ints; returns (int64 array, pivot
    column list).  Falls back to the caller's sparse path for oversized p.
    """
    if p > MAX_DENSE_PRIME:
        raise ValueError(f"prime {p} too large for the dense int64 kernels")
    a = np.array(matrix, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    return _KERNEL(a, p)
