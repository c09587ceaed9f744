"""Compare the compiled and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from qharmony import kernels
from qharmony.music import DEFAULT_NOTES, chromatic_kk, chromatic_notes, make_pairs
from qharmony.prefmatrix import build_matrix


def _cases():
    yield "default 49", DEFAULT_NOTES, None
    for n in (12, 16):
        yield f"chromatic {n * n}", chromatic_notes(n), chromatic_kk()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'kernel':<10} {'case':<16}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for label, notes, kk in _cases():
        pairs = make_pairs(notes)
        args_c = ([p.interval_st for p in pairs], [p.n1.midi for p in pairs], [p.n2.midi for p in pairs], 0.4)
        A = build_matrix(notes, kk=kk, pad=False).active
        for kernel, call in (("coupling", lambda m: m.coupling_matrix(*args_c)),
                             ("jacobi", lambda m: m.jacobi_eigh(A, 1e-10))):
            times = {}
            for name, mod in impls.items():
                times[name] = min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{kernel:<10} {label:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
                  + f"{speed:>9.1f}x")
        if "cython" in impls:
            w1 = impls["cython"].jacobi_eigh(A, 1e-10)[0]
            w2 = impls["python"].jacobi_eigh(A, 1e-10)[0]
            assert np.max(np.abs(w1 - w2)) < 1e-9


if __name__ == "__main__":
    main()
