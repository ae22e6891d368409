"""Compare the compiled and pure-numpy kernel backends.

Times the three training hot spots (triple scoring, sparse gradient
accumulation, row-wise adagrad) on batches shaped like real training steps:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --entities 50000 --d 128 --repeats 50
"""

import argparse
import time

import numpy as np

from hopqa._kernels import BACKEND, get_backend


def _model_arrays(rng, n_ent, n_rel, d):
    scale = 1.0 / np.sqrt(d)
    return (
        rng.normal(scale=scale, size=(n_ent, d)),
        rng.normal(scale=scale, size=(n_ent, d)),
        rng.normal(scale=scale, size=(n_rel, d)),
        rng.normal(scale=scale, size=(n_rel, d)),
    )


def _batch(rng, n_ent, n_rel, batch_size, negatives):
    n = batch_size * (1 + negatives)
    h = rng.integers(n_ent, size=n)
    r = rng.integers(n_rel, size=n)
    t = rng.integers(n_ent, size=n)
    coef = rng.normal(size=n) / n
    return h, r, t, coef


def _best_of(repeats, fn):
    best = np.inf
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_backend(backend, args, rng):
    ent_re, ent_im, rel_re, rel_im = _model_arrays(
        rng, args.entities, args.relations, args.d
    )
    h, r, t, coef = _batch(rng, args.entities, args.relations,
                           args.batch_size, args.negatives)

    timings = {}
    timings["batch_scores"] = _best_of(
        args.repeats,
        lambda: backend.batch_scores(ent_re, ent_im, rel_re, rel_im, h, r, t),
    )

    ent_rows, ent_inv = np.unique(np.concatenate([h, t]), return_inverse=True)
    rel_rows, rel_inv = np.unique(r, return_inverse=True)
    ent_inv = ent_inv.astype(np.int64)
    rel_inv = rel_inv.astype(np.int64)
    g_ent_re = np.zeros((len(ent_rows), args.d))
    g_ent_im = np.zeros((len(ent_rows), args.d))
    g_rel_re = np.zeros((len(rel_rows), args.d))
    g_rel_im = np.zeros((len(rel_rows), args.d))

    def run_grads():
        g_ent_re[:] = 0.0
        g_ent_im[:] = 0.0
        g_rel_re[:] = 0.0
        g_rel_im[:] = 0.0
        backend.accumulate_grads(
            ent_re, ent_im, rel_re, rel_im, h, r, t, coef,
            ent_inv[: len(h)], rel_inv, ent_inv[len(h):],
            g_ent_re, g_ent_im, g_rel_re, g_rel_im,
        )

    timings["accumulate_grads"] = _best_of(args.repeats, run_grads)

    table = ent_re.copy()
    accum = np.zeros(args.entities)
    timings["adagrad_update"] = _best_of(
        args.repeats,
        lambda: backend.adagrad_update(table, accum, ent_rows, g_ent_re, 0.1, 1e-8),
    )
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--entities", type=int, default=20000)
    parser.add_argument("--relations", type=int, default=12)
    parser.add_argument("--d", type=int, default=64)
    parser.add_argument("--batch-size", type=int, default=256)
    parser.add_argument("--negatives", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"default backend: {BACKEND}")
    print(f"entities={args.entities} relations={args.relations} d={args.d} "
          f"triples/batch={args.batch_size * (1 + args.negatives)} "
          f"(best of {args.repeats})\n")

    results = {}
    for name in ("pure", "cython"):
        try:
            backend = get_backend(name)
        except (ImportError, ValueError) as exc:
            print(f"{name}: unavailable ({exc})")
            continue
        results[name] = bench_backend(backend, args, np.random.default_rng(args.seed))

    ops = ("batch_scores", "accumulate_grads", "adagrad_update")
    header = f"{'op':<18}" + "".join(f"{name + ' (ms)':>14}" for name in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for op in ops:
        row = f"{op:<18}"
        for name in results:
            row += f"{results[name][op] * 1e3:>14.3f}"
        if len(results) == 2:
            row += f"{results['pure'][op] / results['cython'][op]:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
