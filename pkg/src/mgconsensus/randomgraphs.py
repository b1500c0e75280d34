"""Random connected networks and coupled models for property checks."""
from __future__ import annotations

import numpy as np

from .graph import CommLink, CommNetwork, ElectricalNetwork, Line, comm_from_electrical
from .model import FIRST_ORDER, CoupledModel
from .spectral import COMMUTING, D_IDENTITY, NEITHER


def random_edges(rng, n, p_extra=0.3):
    """Random spanning tree plus Erdos-Renyi extras; pairs are randomly oriented."""
    pairs = set()
    for k in range(1, n):
        pairs.add(frozenset((k, int(rng.integers(0, k)))))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p_extra:
                pairs.add(frozenset((a, b)))
    out = []
    for pr in sorted(pairs, key=sorted):
        a, b = sorted(pr)
        out.append((a, b) if rng.random() < 0.5 else (b, a))
    return out


def random_electrical(rng, n, p_extra=0.3, r_range=(0.02, 0.5)) -> ElectricalNetwork:
    lines = [Line(a, b, float(rng.uniform(*r_range))) for a, b in random_edges(rng, n, p_extra)]
    return ElectricalNetwork(tuple(range(n)), lines)


def random_comm(rng, n, p_extra=0.3, a_range=(0.5, 20.0), k_i=1.0) -> CommNetwork:
    links = [CommLink(a, b, float(rng.uniform(*a_range))) for a, b in random_edges(rng, n, p_extra)]
    return CommNetwork(tuple(range(n)), links, k_i)


def random_model(rng, n, regime=COMMUTING, mode=FIRST_ORDER, omega_c=None, mu=None, d_range=(0.05, 1.0)):
    el = random_electrical(rng, n)
    if regime == D_IDENTITY:
        comm = random_comm(rng, n)
        d = np.ones(n)
    elif regime == COMMUTING:
        comm = comm_from_electrical(el, float(rng.uniform(0.2, 5.0)) if mu is None else mu)
        d = rng.uniform(*d_range, size=n)
    elif regime == NEITHER:
        comm = random_comm(rng, n)
        d = rng.uniform(*d_range, size=n)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    kw = {"mode": mode}
    if omega_c is not None:
        kw["omega_c"] = omega_c
    return CoupledModel(el, comm, d, **kw)
