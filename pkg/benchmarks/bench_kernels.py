"""Numba vs numpy gate kernels, plus an end-to-end timing per backend.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--max-qubits 20]

Kernel timings call both backends in-process. The end-to-end run starts a
fresh interpreter per backend so the QENSEMBLE_DISABLE_NUMBA flag is read
at import, exactly as a user would set it.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qensemble import _kernels

END_TO_END = """
import time, numpy as np
from qensemble import _kernels
from qensemble.encoding import Dataset, encode_training_set, unit_normalize
from qensemble.ensemble import EnsembleConfig, run_train_mode
rng = np.random.default_rng(0)
enc = encode_training_set(Dataset(rng.normal(size=(64, 4)), rng.choice([-1, 1], 64)))
xs = [unit_normalize(v) for v in rng.normal(size=(20, 4))]
run_train_mode(EnsembleConfig(3), enc, xs[:1])  # warm-up / jit
t = time.perf_counter()
run_train_mode(EnsembleConfig(3), enc, xs)
print(_kernels.BACKEND, time.perf_counter() - t)
"""


def time_kernel(fn, amps, args, repeat):
    fn(amps, *args)  # warm-up (compiles numba, fills the numpy index cache)
    t = time.perf_counter()
    for _ in range(repeat):
        fn(amps, *args)
    return (time.perf_counter() - t) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--max-qubits", type=int, default=20)
    args = ap.parse_args()

    if "numba" not in _kernels.BACKENDS:
        sys.exit("numba is unavailable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'qubits':>6} {'gate':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in range(8, args.max_qubits + 1, 4):
        amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        cmask = 1 << (n - 1)
        cases = {"X": (0, (2, cmask)), "H": (1, (3, cmask)), "SWAP": (2, (1, n // 2, cmask))}
        for gate, (slot, gate_args) in cases.items():
            t_np = time_kernel(_kernels.BACKENDS["numpy"][slot], amps.copy(), gate_args, args.repeat)
            t_nb = time_kernel(_kernels.BACKENDS["numba"][slot], amps.copy(), gate_args, args.repeat)
            print(f"{n:>6} {gate:>6} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>8.1f}x")

    print("\nend-to-end: train mode, 64 points x 4 features, d=3, 20 samples")
    for flag in ("1", "0"):
        env = dict(os.environ, QENSEMBLE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"  {backend:<6} {float(seconds):.3f}s")


if __name__ == "__main__":
    main()
