"""Both kernel backends must agree bit-for-bit on every operation."""

import numpy as np
import pytest

from hopqa._kernels import BACKEND, get_backend

pure = get_backend("pure")
try:
    compiled = get_backend("cython")
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def _random_problem(seed, n_ent=23, n_rel=5, d=8, batch=64):
    rng = np.random.default_rng(seed)
    tables = tuple(rng.normal(size=shape) for shape in
                   [(n_ent, d), (n_ent, d), (n_rel, d), (n_rel, d)])
    h = rng.integers(0, n_ent, batch)
    r = rng.integers(0, n_rel, batch)
    t = rng.integers(0, n_ent, batch)
    return tables, h, r, t, rng


def test_backend_reports_a_known_name():
    assert BACKEND in ("pure", "cython")


def test_pure_scores_match_manual_expansion():
    (ent_re, ent_im, rel_re, rel_im), h, r, t, _ = _random_problem(0)
    scores = pure.batch_scores(ent_re, ent_im, rel_re, rel_im, h, r, t)
    for i in range(len(h)):
        hc = ent_re[h[i]] + 1j * ent_im[h[i]]
        rc = rel_re[r[i]] + 1j * rel_im[r[i]]
        tc = ent_re[t[i]] + 1j * ent_im[t[i]]
        expected = np.real(np.sum(hc * rc * np.conj(tc)))
        assert abs(scores[i] - expected) <= 1e-12 * max(1.0, abs(expected))


@needs_compiled
def test_compiled_scores_match_pure():
    (ent_re, ent_im, rel_re, rel_im), h, r, t, _ = _random_problem(1)
    a = pure.batch_scores(ent_re, ent_im, rel_re, rel_im, h, r, t)
    b = compiled.batch_scores(ent_re, ent_im, rel_re, rel_im, h, r, t)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


def _run_accumulate(backend, seed):
    (ent_re, ent_im, rel_re, rel_im), h, r, t, rng = _random_problem(seed)
    n_ent, d = ent_re.shape
    n_rel = rel_re.shape[0]
    coef = rng.normal(size=len(h))
    ent_slots = rng.integers(0, 7, n_ent)
    rel_slots = rng.integers(0, 3, n_rel)
    g_ent_re = np.zeros((7, d))
    g_ent_im = np.zeros((7, d))
    g_rel_re = np.zeros((3, d))
    g_rel_im = np.zeros((3, d))
    backend.accumulate_grads(
        ent_re, ent_im, rel_re, rel_im, h, r, t, coef,
        ent_slots[h], rel_slots[r], ent_slots[t],
        g_ent_re, g_ent_im, g_rel_re, g_rel_im,
    )
    return g_ent_re, g_ent_im, g_rel_re, g_rel_im


@needs_compiled
def test_compiled_gradient_accumulation_matches_pure():
    for seed in (2, 3, 4):
        for a, b in zip(_run_accumulate(pure, seed), _run_accumulate(compiled, seed)):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_adagrad_update_matches_formula():
    # Rows are unique by contract (the trainer passes np.unique output).
    rng = np.random.default_rng(5)
    for backend in filter(None, (pure, compiled)):
        table = rng.normal(size=(6, 4))
        accum = np.abs(rng.normal(size=6))
        rows = np.array([0, 2, 3, 5])
        grads = rng.normal(size=(4, 4))

        expected_table = table.copy()
        expected_accum = accum.copy()
        for i, row in enumerate(rows):
            expected_accum[row] += np.mean(grads[i] ** 2)
            expected_table[row] -= 0.1 * grads[i] / (np.sqrt(expected_accum[row]) + 1e-8)

        got_table = table.copy()
        got_accum = accum.copy()
        backend.adagrad_update(got_table, got_accum, rows, grads, 0.1, 1e-8)
        np.testing.assert_allclose(got_table, expected_table, rtol=1e-12)
        np.testing.assert_allclose(got_accum, expected_accum, rtol=1e-12)


@needs_compiled
def test_compiled_adagrad_matches_pure():
    rng = np.random.default_rng(6)
    table = rng.normal(size=(9, 5))
    accum = np.abs(rng.normal(size=9))
    rows = np.array([1, 3, 4, 8])
    grads = rng.normal(size=(4, 5))
    table_p, accum_p = table.copy(), accum.copy()
    table_c, accum_c = table.copy(), accum.copy()
    pure.adagrad_update(table_p, accum_p, rows, grads, 0.05, 1e-8)
    compiled.adagrad_update(table_c, accum_c, rows, grads, 0.05, 1e-8)
    np.testing.assert_allclose(table_c, table_p, rtol=1e-13)
    np.testing.assert_allclose(accum_c, accum_p, rtol=1e-13)


def test_env_var_selects_pure_backend(monkeypatch):
    import importlib

    import hopqa._kernels as kernels_pkg

    monkeypatch.setenv("HOPQA_KERNEL", "pure")
    reloaded = importlib.reload(kernels_pkg)
    assert reloaded.BACKEND == "pure"
    monkeypatch.delenv("HOPQA_KERNEL")
    importlib.reload(kernels_pkg)
