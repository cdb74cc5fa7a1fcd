"""Random states, unitaries and instruments, plus seeded stream helpers."""

import numpy as np


def rng_for(seed, index):
    """Generator whose stream depends only on ``(seed, index)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def haar_state(dim, rng):
    """Haar-random pure state: normalized vector of i.i.d. complex Gaussians."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def ginibre(rows, cols, rng):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(dim, rng):
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    q, r = np.linalg.qr(ginibre(dim, dim, rng))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_orthonormal_basis(dim, rng):
    """List of ``dim`` orthonormal vectors (columns of a random unitary)."""
    u = random_unitary(dim, rng)
    return [u[:, k].copy() for k in range(dim)]


def inverse_sqrt_psd(s):
    w, v = np.linalg.eigh(s)
    return (v / np.sqrt(w)) @ v.conj().T


def random_kraus(dim, num_outcomes, rng):
    """Random Kraus operators ``A_x = G_x S^(-1/2)`` with ``S = sum_x G_x^dag G_x``."""
    gs = [ginibre(dim, dim, rng) for _ in range(num_outcomes)]
    s = sum(g.conj().T @ g for g in gs)
    root = inverse_sqrt_psd(s)
    return [g @ root for g in gs]
