"""Random histq objects for tests, built from the oracle generators."""

import numpy as np

import oracles as orc
from histq.effects import Effect
from histq.histories import HomogeneousHistory


def random_history(rng, dim, n_times, projectors=False):
    times = np.sort(rng.choice(np.linspace(-2, 3, 51), size=n_times, replace=False))
    entries = []
    for t in times:
        if projectors:
            u = orc.unitary(rng, dim)
            k = rng.integers(1, dim)
            entries.append((t, Effect(u[:, :k] @ u[:, :k].conj().T)))
        else:
            entries.append((t, Effect(orc.effect(rng, dim, 0.05, 1.0))))
    return HomogeneousHistory(dim, tuple(entries))
