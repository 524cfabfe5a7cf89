"""Compare the compiled kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best wall time over ``--repeat`` runs for both
backends and the speed-up.  Both backends are checked to agree first.
"""
import argparse
import sys
import timeit
from contextlib import contextmanager

import numpy as np

from toricvol import _backend, _core_py, catalog
from toricvol.ckem import blowup_polytope, find_critical_points, log_eh_derivatives
from toricvol.polytope import polytope_from_dict
from toricvol.quadrature import Kernel

try:
    from toricvol import _core
except ImportError:
    _core = None


@contextmanager
def using(impl):
    saved = _backend.divdiff, _backend.simplex_moments
    _backend.divdiff, _backend.simplex_moments = impl.divdiff, impl.simplex_moments
    try:
        yield
    finally:
        _backend.divdiff, _backend.simplex_moments = saved


def cases():
    rng = np.random.default_rng(0)
    node_sets = [rng.uniform(0.5, 2.0, 4).tolist() for _ in range(200)]
    node_sets += [[1.0, 1.0 + 1e-9, 1.0 - 1e-9, 1.5] for _ in range(50)]
    cube = polytope_from_dict(catalog.load_document("cube3"))
    cv, cw = cube.interior_arrays
    P = blowup_polytope(0.6)
    x = np.array([-0.3, 0.1, 0.9])

    def divdiff():
        for nodes in node_sets:
            _backend.divdiff(_backend.INVPOWER, 6, nodes)

    def moments():
        _backend.simplex_moments(cv, cw, np.array([0.1, -0.2, 0.05]), 2.0, _backend.INVPOWER, 8, 2)

    def eh():
        log_eh_derivatives(P, x, 2)

    def finder():
        find_critical_points(P, n_starts=10, seed=0)

    return [("divdiff x250 (k=6)", divdiff), ("moments order 2, cube", moments),
            ("log-EH value+grad+Hessian", eh), ("critical points, 10 starts", finder)]


def best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10**5:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        return 1
    nodes = [0.7, 0.7 + 1e-10, 1.3, 2.2]
    assert abs(_core.divdiff(1, 5, nodes)[0] - _core_py.divdiff(1, 5, nodes)[0]) < 1e-13
    print("%-30s %12s %12s %9s" % ("case", "compiled", "python", "speed-up"))
    for name, fn in cases():
        with using(_core):
            t_c = best(fn, args.repeat)
        with using(_core_py):
            t_p = best(fn, args.repeat)
        print("%-30s %10.3gms %10.3gms %8.1fx" % (name, 1e3 * t_c, 1e3 * t_p, t_p / t_c))
    return 0


if __name__ == "__main__":
    sys.exit(main())
