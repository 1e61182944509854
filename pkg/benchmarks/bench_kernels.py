"""Compare the compiled and pure-Python enumeration kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Each row times one kernel call per backend (best of N) and checks that
both backends return the same result.
"""

import argparse
import time

from liftcorr import kernels
from liftcorr.correspondence import Universe, build_identity, build_product, verify
from liftcorr.modality import IdentityMod
from liftcorr.pseudometric import Pseudometric
from liftcorr.quantale import BoolQuantale, ChainQuantale, PowersetQuantale

KERNELS = ("enumerate_pseudometric_tables", "enumerate_morphism_tables", "is_pseudometric_table")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def use(impl):
    for name in KERNELS:
        setattr(kernels, name, getattr(impl, name))


def cases():
    for Q, n in ((ChainQuantale(4, 1), 4), (ChainQuantale(8, 1), 4), (PowersetQuantale("abc"), 3),
                 (BoolQuantale(), 8)):
        t = Q.index_tables()
        yield (f"pseudometrics {Q.describe()} n={n}",
               lambda impl, t=t, n=n: impl.enumerate_pseudometric_tables(n, t.size, t.top, t.leq, t.tensor))
        # the discrete metric constrains nothing, so every map is a morphism
        d = Pseudometric.discrete(Q, [f"x{i}" for i in range(n)])
        yield (f"morphisms {Q.describe()} n={n}",
               lambda impl, t=t, n=n, d=d: impl.enumerate_morphism_tables(n, d.table(), t.size, t.leq, t.euclid))

    def delta(impl):
        use(impl)
        i = build_identity(IdentityMod(), ChainQuantale(2, 1))
        return verify(build_product([i, i]), Universe(ChainQuantale(2, 1), sizes=(1, 2, 3))).to_json()

    yield "verify Id x Id, chain(2,1), |X|<=3", delta


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    impls = kernels.backends()
    saved = {name: getattr(kernels, name) for name in KERNELS}
    names = sorted(impls)
    print(f"{'case':44} " + " ".join(f"{n:>10}" for n in names) + "    speedup")
    try:
        for label, run in cases():
            row, outs = {}, []
            for n in names:
                row[n], out = best_of(lambda: run(impls[n]), args.repeat)
                outs.append(out)
            assert all(o == outs[0] for o in outs), f"backends disagree on {label}"
            speed = row["python"] / row["cython"] if "cython" in row and row["cython"] else float("nan")
            print(f"{label:44} " + " ".join(f"{row[n] * 1000:9.1f}ms" for n in names) + f"  {speed:8.1f}x")
    finally:
        for name, f in saved.items():
            setattr(kernels, name, f)
    if "cython" not in impls:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
