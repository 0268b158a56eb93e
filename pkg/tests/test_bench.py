import importlib.util
from pathlib import Path

import pytest

from dwaspt import kernels


def _load_bench():
    path = Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_benchmark_backends_agree(capsys):
    bench = _load_bench()
    row = bench.bench(3, repeat=1)
    assert row["python"]["matvec_s"] > 0
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    assert row["max_abs_diff"] == 0.0
    assert bench.main(["--L", "2", "--repeat", "1"]) == 0
    assert "speedup" in capsys.readouterr().out
