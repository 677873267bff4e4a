import numpy as np
import pytest

from sbmanon import _kernels
from sbmanon._accel import USE_JIT
from sbmanon.attacks import random_seed_pairs
from sbmanon.synth import SampleParams, SbmParams, sample_correlated_pair

pytestmark = pytest.mark.skipif(not USE_JIT, reason="numba backend disabled")


def run_pgm(kernel, pair, seeds, r, constrained):
    n = pair.sbm.n
    m12 = np.full(n, -1, dtype=np.int64)
    m21 = np.full(n, -1, dtype=np.int64)
    m12[seeds[:, 0]] = seeds[:, 1]
    m21[seeds[:, 1]] = seeds[:, 0]
    ip1, ix1 = pair.g1.csr
    ip2, ix2 = pair.anonymized.csr
    order = kernel(ip1, ix1, ip2, ix2, pair.labeling.labels, pair.anonymized_labeling.labels,
                   constrained, seeds[:, 0].copy(), r, m12, m21)
    return m12, m21, order


@pytest.mark.parametrize("r,constrained", [(2, False), (3, True), (4, True)])
def test_pgm_backends_agree(r, constrained):
    pair = sample_correlated_pair(SbmParams(n=600, C=2, a=15, b=4), SampleParams(0.7, 0.7), r)
    seeds = random_seed_pairs(pair.pi, 30, r)
    fast = run_pgm(_kernels._pgm_jit, pair, seeds, r, constrained)
    slow = run_pgm(_kernels._pgm_numpy, pair, seeds, r, constrained)
    pure = run_pgm(_kernels._pgm_py, pair, seeds, r, constrained)
    for a, b, c in zip(fast, slow, pure):
        assert np.array_equal(a, b) and np.array_equal(a, c)


def test_louvain_backends_agree():
    pair = sample_correlated_pair(SbmParams(n=500, C=2, a=20, b=2), SampleParams(), 1)
    g = pair.ground
    ip, ix = g.csr
    w = np.ones(len(ix))
    deg = np.diff(ip).astype(np.float64)
    order = np.random.default_rng(0).permutation(g.n).astype(np.int64)
    out = []
    for kernel in (_kernels._louvain_move_jit, _kernels._louvain_move_py):
        comm = np.arange(g.n, dtype=np.int64)
        moved = kernel(ip, ix, w, deg, order, comm, 2.0 * g.m, 1000)
        out.append((moved, comm))
    assert out[0][0] == out[1][0]
    assert np.array_equal(out[0][1], out[1][1])


def test_env_flag_selects_fallback(tmp_path):
    import os
    import subprocess
    import sys

    script = (
        "import numpy as np\n"
        "from sbmanon import _kernels, backend\n"
        "from sbmanon.attacks import PgmParams, pgm_attack, random_seed_pairs\n"
        "from sbmanon.community import detect_communities\n"
        "from sbmanon.synth import SampleParams, SbmParams, sample_correlated_pair\n"
        "pair = sample_correlated_pair(SbmParams(n=400, C=2, a=15, b=3), SampleParams(.8, .8), 2)\n"
        "res = pgm_attack(pair.g1, pair.anonymized, random_seed_pairs(pair.pi, 20, 1), PgmParams(3))\n"
        "part = detect_communities(pair.ground, 4)\n"
        "print(backend(), _kernels.pgm_percolate.__name__)\n"
        "np.save(sys.argv[1], np.concatenate([res.mapping, part.labeling.labels]))\n"
    )
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, SBMANON_DISABLE_JIT=flag)
        path = tmp_path / f"out{flag}.npy"
        proc = subprocess.run([sys.executable, "-c", "import sys\n" + script, str(path)],
                              env=env, capture_output=True, text=True, check=True)
        outs[flag] = (proc.stdout.split(), np.load(path))
    assert outs["0"][0][0] == "numba" and outs["1"][0] == ["numpy", "_pgm_numpy"]
    assert np.array_equal(outs["0"][1], outs["1"][1])
