import numpy as np


def random_pd(rng, n, cond=1e4):
    """Random symmetric PD matrix with eigenvalues log-uniform over ``cond``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.exp(rng.uniform(-0.5, 0.5, n) * np.log(cond))
    A = (q * eig) @ q.T
    return 0.5 * (A + A.T)
