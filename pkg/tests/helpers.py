"""Random instance generators shared by the test modules."""

import numpy as np

from steerkit.core_states import KetVector, SchmidtSpectrum


def random_spectrum(rng, n):
    return SchmidtSpectrum.from_weights(rng.dirichlet(np.ones(n)))


def random_ket(rng, n, real=False):
    z = rng.standard_normal(n)
    if not real:
        z = z + 1j * rng.standard_normal(n)
    return KetVector.normalized(z)


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def degenerate_spectrum(rng, n_min, n_mid, n_max):
    """Spectrum with exactly equal entries in the lowest and highest classes."""
    lo, hi = np.sort(rng.uniform(0.05, 1.0, 2))
    mids = rng.uniform(lo, hi, n_mid) if n_mid else np.array([])
    w = np.concatenate([np.full(n_min, lo), mids, np.full(n_max, hi)])
    return SchmidtSpectrum.from_weights(w)
