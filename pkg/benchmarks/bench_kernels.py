"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --n 256 --repeat 5

Both backends are checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from bonnetforge.kernels import backends


def cases(n, rng):
    p = rng.normal(size=(n, n, 4))
    q = rng.normal(size=(n, n, 4))
    au = rng.normal(size=(n, n, 4))
    av = rng.normal(size=(n, n, 4))
    # a smooth unit field with random signs, the input propagate_signs expects
    u = np.linspace(0, 1, n)
    U, V = np.meshgrid(u, u, indexing="ij")
    lam = np.stack([np.cos(U + V), np.sin(U), np.sin(V), 0.3 + 0 * U], -1)
    lam /= np.linalg.norm(lam, axis=-1, keepdims=True)
    lam *= rng.choice([-1.0, 1.0], size=(n, n, 1))
    h = 1.0 / (n - 1)
    return {
        "qmul": lambda k: k.qmul(p, q),
        "sandwich": lambda k: k.sandwich(p, q),
        "integrate_paths": lambda k: k.integrate_paths(au, av, h, h, n // 2, n // 2),
        "propagate_signs": lambda k: k.propagate_signs(lam, n // 2, n // 2),
    }


def check(results):
    ref = results["python"]
    for name, out in results.items():
        a = out if isinstance(out, tuple) else (out,)
        b = ref if isinstance(ref, tuple) else (ref,)
        for x, y in zip(a, b):
            if not np.allclose(x, y, rtol=1e-13, atol=1e-13):
                raise SystemExit(f"backend {name} disagrees with python")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256, help="grid size (n x n)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    found = backends()
    if "cython" not in found:
        print("compiled backend not built; timing the python fallback only")
    rng = np.random.default_rng(0)
    table = cases(args.n, rng)

    print(f"grid {args.n}x{args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in found) + "     speedup")
    for name, fn in table.items():
        check({b: fn(k) for b, k in found.items()})
        best = {}
        for b, k in found.items():
            number = 1 if name == "propagate_signs" else 3
            best[b] = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat)) / number
        row = "".join(f"{best[b] * 1e3:>10.2f}ms" for b in found)
        speed = f"{best['python'] / best['cython']:>10.1f}x" if "cython" in best else ""
        print(f"{name:<18}{row}{speed}")


if __name__ == "__main__":
    main()
