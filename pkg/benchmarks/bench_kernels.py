"""Compare the compiled and pure-numpy Pauli kernels.

Times one Hamiltonian matvec ``H v`` (the Lanczos inner loop of the ED
oracle) and a Pauli-string expectation on the doubled cluster model, and
checks that both backends agree.

    python3 benchmarks/bench_kernels.py --L 4 5 6 --repeat 5
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from dwaspt import kernels
from dwaspt.lattice import PauliString
from dwaspt.models import build_doubled_hamiltonian


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(L: int, repeat: int, seed: int = 0) -> dict:
    h = build_doubled_hamiltonian(L, 0.6)
    n = h.n_sites
    masks = [t.masks(n) for t in h.nonzero_terms()]
    xs = np.array([m[0] for m in masks], dtype=np.uint64)
    zs = np.array([m[1] for m in masks], dtype=np.uint64)
    phs = np.array([m[2] for m in masks]).real
    v = np.random.default_rng(seed).standard_normal(2**n)
    string = PauliString(tuple((i, "X" if i % 2 else "Z") for i in range(n)))
    x, z, ph = string.masks(n)
    row = {"L": L, "n_sites": n, "dim": 2**n, "n_terms": len(masks)}
    results = {}
    for name in ("python", "cython"):
        try:
            kernels.backend_module(name)
        except ImportError:
            row[name] = None
            continue
        results[name] = kernels.apply_pauli_sum(v, xs, zs, phs, backend=name)
        row[name] = {
            "matvec_s": _best(lambda: kernels.apply_pauli_sum(v, xs, zs, phs, backend=name), repeat),
            "expectation_s": _best(lambda: kernels.pauli_expectation(v, x, z, ph, backend=name), repeat),
        }
    if len(results) == 2:
        row["max_abs_diff"] = float(np.max(np.abs(results["python"] - results["cython"])))
        row["matvec_speedup"] = row["python"]["matvec_s"] / row["cython"]["matvec_s"]
    return row


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--L", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print raw JSON instead of a table")
    args = ap.parse_args(argv)
    rows = [bench(L, args.repeat) for L in args.L]
    if args.json:
        print(json.dumps(rows, indent=1))
        return 0
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'L':>3} {'dim':>9} {'terms':>6} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>9}")
    for r in rows:
        py = r["python"]["matvec_s"] * 1e3
        cy = r["cython"]["matvec_s"] * 1e3 if r["cython"] else float("nan")
        print(f"{r['L']:>3} {r['dim']:>9} {r['n_terms']:>6} {py:>10.2f} {cy:>10.2f} "
              f"{r.get('matvec_speedup', float('nan')):>8.1f} {r.get('max_abs_diff', float('nan')):>9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
