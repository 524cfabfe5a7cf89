"""Random (simplex, affine function, kernel) instances for quadrature tests."""
import math
from fractions import Fraction

import numpy as np

from toricvol.polytope import Simplex
from toricvol.quadrature import AffineFunction, Kernel

SPREADS = (0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1e-1)


def _nodes(rng, r, kernel_tag, confluent):
    if kernel_tag == "exp":
        base = rng.uniform(-4.0, 4.0)
        scale = rng.uniform(0.1, 6.0)
    else:
        # positive nodes with max/min below about 9
        base = rng.uniform(0.3, 3.0)
        scale = base * rng.uniform(0.05, 0.8)
    if not confluent:
        nodes = base + scale * rng.uniform(-1, 1, r + 1)
    else:
        # one or two tight clusters, possibly exactly repeated nodes
        nodes = np.empty(r + 1)
        centres = base + scale * rng.uniform(-1, 1, 2)
        for j in range(r + 1):
            c = centres[rng.integers(2)] if rng.random() < 0.5 else centres[0]
            nodes[j] = c + rng.choice(SPREADS) * rng.uniform(-1, 1)
    return nodes


def random_instance(rng, confluent=False):
    """Return ``(simplex, affine, kernel)`` with a full-dimensional simplex."""
    r = int(rng.integers(1, 4))
    tag = ("exp", "invpower", "monomial")[int(rng.integers(3))]
    if tag == "exp":
        kernel = Kernel.exp()
    elif tag == "invpower":
        kernel = Kernel.inv_power(int(rng.integers(1, 9)))
    else:
        kernel = Kernel.monomial(int(rng.integers(0, 7)))
    while True:
        V = rng.uniform(-1.5, 1.5, (r + 1, r))
        E = V[1:] - V[0]
        if abs(np.linalg.det(E)) > 0.05:
            break
    nodes = _nodes(rng, r, tag, confluent)
    M = np.column_stack([V, np.ones(r + 1)])
    sol = np.linalg.solve(M, nodes)
    f = AffineFunction.make(sol[:r], sol[r])
    verts = tuple(tuple(Fraction(float(x)) for x in v) for v in V)
    weight = Fraction(abs(float(np.linalg.det(E)))) / math.factorial(r)
    return Simplex(r, verts, weight), f, kernel


def instance_list(n, seed, confluent_fraction=0.4):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, confluent=rng.random() < confluent_fraction) for _ in range(n)]
