"""Escape-time kernels for whole grids of starting points.

Two interchangeable implementations share one predicate (documented in
:mod:`expray.dynamics`): a numba kernel looping per point, and a vectorized
numpy kernel that advances all still-active points one step at a time.
``escape_codes`` dispatches on :data:`expray._jit.HAVE_NUMBA`.

Result codes: ``n >= 0`` escaping, detected at index n; ``BOUNDED``;
``INDETERMINATE``.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _jit

BOUNDED = -1
INDETERMINATE = -2

# Re z above this cannot be pushed through exp.
OVERFLOW_GUARD = 700.0
# Beyond this modulus Im z no longer resolves its strip, so iteration stops.
PRECISION_HORIZON = 1e12


@_jit.njit(cache=True, nogil=True)
def _escape_one(kr, ki, zr, zi, budget, r_esc, l_confirm, gamma):
    kabs = math.sqrt(kr * kr + ki * ki)
    run = 0
    late_max = 0.0
    half = budget // 2
    h2 = PRECISION_HORIZON * PRECISION_HORIZON
    for n in range(budget + 1):
        a2 = zr * zr + zi * zi
        horizon = zr > OVERFLOW_GUARD or a2 > h2
        if n >= 1 and zr > r_esc:
            need = l_confirm if l_confirm < n else n
            if run >= l_confirm or (horizon and run >= need):
                if horizon or math.cos(zi) >= gamma:
                    return n
        if horizon:
            return INDETERMINATE
        if n >= half and a2 > late_max:
            late_max = a2
        if n == budget:
            break
        e = math.exp(zr)
        nr = e * math.cos(zi) + kr
        ni = e * math.sin(zi) + ki
        if nr >= gamma * math.expm1(zr) - kabs - 1.0:
            run += 1
        else:
            run = 0
        zr = nr
        zi = ni
    if late_max <= r_esc * r_esc:
        return BOUNDED
    return INDETERMINATE


if _jit.HAVE_NUMBA:
    from numba import prange

    @_jit.njit(parallel=True, cache=True)
    def _escape_grid_numba(kr, ki, zr, zi, budget, r_esc, l_confirm, gamma):
        n = zr.shape[0]
        out = np.empty(n, dtype=np.int64)
        for i in prange(n):
            out[i] = _escape_one(kr[i], ki[i], zr[i], zi[i], budget, r_esc,
                                 l_confirm, gamma)
        return out


def _escape_grid_numpy(kr, ki, zr, zi, budget, r_esc, l_confirm, gamma):
    # |z|^2 of points just past the overflow guard may itself overflow to inf,
    # which the horizon test handles correctly.
    with np.errstate(over="ignore"):
        return _escape_grid_numpy_body(kr, ki, zr, zi, budget, r_esc, l_confirm, gamma)


def _escape_grid_numpy_body(kr, ki, zr, zi, budget, r_esc, l_confirm, gamma):
    n = zr.shape[0]
    out = np.full(n, INDETERMINATE, dtype=np.int64)
    kr = kr.copy()
    ki = ki.copy()
    zr = zr.copy()
    zi = zi.copy()
    kabs = np.sqrt(kr * kr + ki * ki)
    run = np.zeros(n, dtype=np.int64)
    late_max = np.zeros(n)
    idx = np.arange(n)
    half = budget // 2
    h2 = PRECISION_HORIZON * PRECISION_HORIZON
    for step in range(budget + 1):
        if idx.size == 0:
            break
        a2 = zr * zr + zi * zi
        horizon = (zr > OVERFLOW_GUARD) | (a2 > h2)
        if step >= 1:
            need = min(l_confirm, step)
            cand = (zr > r_esc) & ((run >= l_confirm) | (horizon & (run >= need)))
            cand &= horizon | (np.cos(zi) >= gamma)
        else:
            cand = np.zeros(idx.size, dtype=bool)
        out[idx[cand]] = step
        stop = cand | horizon
        # horizon without detection stays INDETERMINATE (the fill value)
        if step >= half:
            np.maximum(late_max, np.where(stop, 0.0, a2), out=late_max)
        keep = ~stop
        if step == budget:
            fin = idx[keep]
            out[fin] = np.where(late_max[keep] <= r_esc * r_esc, BOUNDED, INDETERMINATE)
            break
        idx, kr, ki, zr, zi, kabs, run, late_max = (
            idx[keep], kr[keep], ki[keep], zr[keep], zi[keep], kabs[keep],
            run[keep], late_max[keep])
        e = np.exp(zr)
        nr = e * np.cos(zi) + kr
        ni = e * np.sin(zi) + ki
        ok = nr >= gamma * np.expm1(zr) - kabs - 1.0
        run = np.where(ok, run + 1, 0)
        zr, zi = nr, ni
    return out


def _as_flat(a, n):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        a = np.full(n, complex(a))
    return np.ascontiguousarray(a.ravel())


def escape_codes(kappa, z0, budget, r_esc, l_confirm, gamma, threads=None,
                 use_numba=None):
    """Escape codes for every (kappa, z0) pair; either argument may be scalar.

    The output shape follows the broadcast of the inputs.  Work is split into
    contiguous chunks whose results are written back at fixed offsets, so the
    thread count never changes the output.
    """
    shape = np.broadcast_shapes(np.shape(kappa), np.shape(z0))
    n = int(np.prod(shape)) if shape else 1
    k = _as_flat(np.broadcast_to(kappa, shape), n)
    z = _as_flat(np.broadcast_to(z0, shape), n)
    args = (int(budget), float(r_esc), int(l_confirm), float(gamma))
    if use_numba is None:
        use_numba = _jit.HAVE_NUMBA
    if use_numba and not _jit.HAVE_NUMBA:
        raise RuntimeError("numba kernels requested but numba is disabled or missing")
    workers = _jit.thread_count(threads)

    if use_numba:
        import numba
        prev = numba.get_num_threads()
        numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))
        try:
            out = _escape_grid_numba(k.real.copy(), k.imag.copy(), z.real.copy(),
                                     z.imag.copy(), *args)
        finally:
            numba.set_num_threads(prev)
        return out.reshape(shape)

    def run_chunk(sl):
        return sl, _escape_grid_numpy(k.real[sl], k.imag[sl], z.real[sl], z.imag[sl], *args)

    out = np.empty(n, dtype=np.int64)
    chunks = [slice(i, min(n, i + max(1, -(-n // workers))))
              for i in range(0, n, max(1, -(-n // workers)))]
    if workers == 1 or len(chunks) == 1:
        results = map(run_chunk, chunks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, chunks))
    for sl, codes in results:
        out[sl] = codes
    return out.reshape(shape)


def escape_one(kappa, z0, budget, r_esc, l_confirm, gamma):
    """Scalar form of the kernel predicate (interpreted unless numba is on)."""
    kappa = complex(kappa)
    z0 = complex(z0)
    return int(_escape_one(kappa.real, kappa.imag, z0.real, z0.imag, int(budget),
                           float(r_esc), int(l_confirm), float(gamma)))
