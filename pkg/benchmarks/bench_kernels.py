"""Compare the compiled and pure-Python fixpoint kernels.

    python benchmarks/bench_kernels.py [--states 200000] [--repeat 3]

Runs every kernel on a random sparse graph and on the 3-judge DCP model,
checks that both backends agree, and prints the best-of-N timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from judgebench import _kernels
from judgebench.kripke import KripkeModel, _csr, build_model


def random_graph(n: int, out_degree: int, seed: int):
    rng = np.random.default_rng(seed)
    src = np.repeat(np.arange(n, dtype=np.int64), out_degree)
    dst = rng.integers(0, n, size=src.size, dtype=np.int64)
    succ = _csr(n, src, dst)
    pred = _csr(n, dst, src)
    phi = (rng.random(n) < 0.7).astype(np.uint8)
    psi = (rng.random(n) < 0.05).astype(np.uint8)
    obs = rng.integers(0, max(1, n // 8), size=n, dtype=np.int64)
    return succ, pred, phi, psi, obs


def model_inputs(m: KripkeModel):
    phi = (~m.atom_mask("v=0")).astype(np.uint8)
    psi = m.atom_mask("v=1").astype(np.uint8)
    return (m.succ_indptr, m.succ_indices), (m.pred_indptr, m.pred_indices), phi, psi, m.obs[0]


def calls(inputs):
    (si, sx), (pi, px), phi, psi, obs = inputs
    n_cls = int(obs.max()) + 1
    init = np.arange(min(16, si.size - 1), dtype=np.int64)
    return {
        "ex_image": lambda k: k.ex_image(si, sx, psi),
        "eu_fixpoint": lambda k: k.eu_fixpoint(pi, px, phi, psi),
        "eg_fixpoint": lambda k: k.eg_fixpoint(si, sx, pi, px, phi),
        "class_forall": lambda k: k.class_forall(obs, n_cls, phi),
        "reachable": lambda k: k.reachable(si, sx, init),
    }


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=200_000)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the Python fallback is available")
    workloads = {
        f"random({args.states})": random_graph(args.states, args.degree, seed=7),
        "dcp_sum n=1": model_inputs(build_model("dcp_sum", 1)),
    }
    header = f"{'workload':<18} {'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for wname, inputs in workloads.items():
        for kname, fn in calls(inputs).items():
            outs = {b: fn(mod) for b, mod in backends.items()}
            ref = outs["python"]
            for b, out in outs.items():
                if not np.array_equal(np.asarray(out), np.asarray(ref)):
                    raise SystemExit(f"backend {b} disagrees on {kname} / {wname}")
            times = {b: best_of(lambda mod=mod: fn(mod), args.repeat) for b, mod in backends.items()}
            speed = times["python"] / times["cython"] if "cython" in times and times["cython"] > 0 else float("nan")
            print(f"{wname:<18} {kname:<14}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
