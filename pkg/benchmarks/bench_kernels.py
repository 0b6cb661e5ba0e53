"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times forward-backward and Viterbi on a long two-label chain, and one
skip-gram update pass, under each available backend.
"""

import argparse
import timeit

import numpy as np

from rumourseq import kernels


def chain_cases(n):
    rng = np.random.default_rng(0)
    unary = rng.normal(size=(n, 2))
    trans = rng.normal(size=(2, 2))
    return {
        f"forward+backward n={n}": lambda: (kernels.forward(unary, trans), kernels.backward(unary, trans)),
        f"viterbi n={n}": lambda: kernels.viterbi_forward(unary, trans),
    }


def sgns_case(vocab, dim, pairs, negatives):
    rng = np.random.default_rng(0)
    w_in = rng.uniform(-0.5 / dim, 0.5 / dim, size=(vocab, dim))
    w_out = np.zeros((vocab, dim))
    centers = rng.integers(0, vocab, pairs)
    contexts = rng.integers(0, vocab, pairs)
    neg = rng.integers(0, vocab, (pairs, negatives))
    rates = np.linspace(0.025, 0.0001, pairs)

    def run():
        kernels.sgns_update(w_in.copy(), w_out.copy(), centers, contexts, neg, rates)

    return {f"sgns pairs={pairs} d={dim}": run}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--chain", type=int, default=2000, help="chain length")
    ap.add_argument("--pairs", type=int, default=20000, help="skip-gram pairs per pass")
    args = ap.parse_args(argv)

    cases = {**chain_cases(args.chain), **sgns_case(5000, 300, args.pairs, 5)}
    backends = kernels.available_backends()
    before = kernels.backend_name()
    timings = {}
    for backend in backends:
        kernels.use_backend(backend)
        for name, fn in cases.items():
            fn()  # warm up
            timings[name, backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    kernels.use_backend(before)

    header = f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends)
    if "compiled" in backends:
        header += f"{'speedup':>10}"
    print(header)
    for name in cases:
        row = f"{name:<28}" + "".join(f"{timings[name, b] * 1e3:>10.2f}ms" for b in backends)
        if "compiled" in backends:
            row += f"{timings[name, 'python'] / timings[name, 'compiled']:>9.1f}x"
        print(row)
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend was timed")


if __name__ == "__main__":
    main()
