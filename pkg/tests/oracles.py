"""Brute-force reference implementations, written independently of histq.

They use scipy's matrix exponential and Hermitian eigensolver instead of the
package's spectral calculus, and spell products out as explicit loops.
"""

import numpy as np
from scipy.linalg import eigh, expm


def propagator(h, t_to, t_from):
    return expm(-1j * (t_to - t_from) * np.asarray(h, dtype=complex))


def mpow(m, p):
    m = np.asarray(m, dtype=complex)
    w, v = eigh(0.5 * (m + m.conj().T))
    # rank-deficient inputs (projectors) need exact zeros, not tiny negatives
    w = np.where(np.abs(w) < 1e-13, 0.0, w)
    out = (v * np.clip(w, 0, None) ** p) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def class_op(h, t0, entries, dim):
    """``entries``: list of (time, effect matrix), any order."""
    entries = sorted(entries, key=lambda x: x[0])
    c = np.eye(dim, dtype=complex)
    if not entries:
        return c
    prev = t0
    for t, e in entries:
        c = mpow(e, 0.5) @ propagator(h, t, prev) @ c
        prev = t
    return propagator(h, t0, prev) @ c


def dfun(rho, c_u, c_v):
    return np.trace(c_u @ rho @ c_v.conj().T)


def alpha_sum(a, b, alpha):
    return mpow(mpow(a, 1 / alpha) + mpow(b, 1 / alpha), alpha)


def alpha_diff(b, a, alpha):
    return mpow(mpow(b, 1 / alpha) - mpow(a, 1 / alpha), alpha)


def is_leq(a, b, tol=1e-9):
    return np.linalg.eigvalsh(b - a).min() >= -tol


# random generators --------------------------------------------------------

def unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def hermitian(rng, n, scale=1.0):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (z + z.conj().T)


def with_spectrum(rng, values):
    u = unitary(rng, len(values))
    return (u * np.asarray(values)) @ u.conj().T


def effect(rng, n, lo=0.0, hi=1.0):
    return with_spectrum(rng, rng.uniform(lo, hi, size=n))


def state(rng, n, rank=None):
    rank = rank or n
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = z @ z.conj().T
    return m / np.trace(m).real


def pure(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_projectors(u):
    return [np.outer(u[:, i], u[:, i].conj()) for i in range(u.shape[1])]
