"""Positivity probe and the exact complete-positivity decision.

NOT_POSITIVE outcomes must be sound: every certificate is re-checked here
through the raw quadratic form, independently of the probe's own
re-evaluation.  NO_VIOLATION_FOUND is treated as exactly that and never
as a positivity proof.
"""
import numpy as np
import pytest

from posmap.core import max_abs
from posmap.errors import NotHermitian
from posmap.mapmodel import from_matricization
from posmap.positivity import (NO_VIOLATION_FOUND, NOT_POSITIVE, evaluate_pair,
                               is_completely_positive, pair_matrix,
                               positivity_probe, z_side_matrix)
from posmap import zoo


def test_transpose_positive_but_not_cp():
    sp = zoo.transpose_map(2)
    pr = positivity_probe(sp, budget=64)
    assert pr.status == NO_VIOLATION_FOUND
    assert pr.min_value_seen > -1e-9
    cp = is_completely_positive(sp)
    assert not cp.is_cp
    assert cp.min_eigenvalue == pytest.approx(-1.0, abs=1e-9)
    # the witness vector certifies the negative eigenvalue
    w = cp.witness
    assert np.real(w.conj() @ sp.choi @ w) == pytest.approx(-1.0, abs=1e-9)


def test_flip_parameters_split_by_field():
    sp_r = zoo.toeplitz_2x2(field="real", **zoo.TOEPLITZ_FLIP)
    pr = positivity_probe(sp_r, budget=64)
    assert pr.status == NO_VIOLATION_FOUND
    assert not is_completely_positive(sp_r).is_cp

    sp_c = zoo.toeplitz_2x2(field="complex", **zoo.TOEPLITZ_FLIP)
    pr = positivity_probe(sp_c, budget=64)
    assert pr.status == NOT_POSITIVE
    value = evaluate_pair(sp_c.choi, pr.witness_z, pr.witness_x)
    assert value < -1e-6
    assert value == pytest.approx(pr.witness_value, abs=1e-12)
    assert not is_completely_positive(sp_c).is_cp


def test_cp_map_is_never_certified():
    sp = zoo.random_star_linear(3, 3, ((0, 0), (1, 1), (2, 2)),
                                (1.0, 2.0, 0.5), seed=17, field="complex")
    cp = is_completely_positive(sp)
    assert cp.is_cp
    assert cp.min_eigenvalue >= -1e-9
    pr = positivity_probe(sp, budget=64)
    assert pr.status == NO_VIOLATION_FOUND
    assert pr.min_value_seen >= -1e-9


def test_certificates_are_sound_across_seeds():
    certified = 0
    for s in range(8):
        sp = zoo.random_star_linear(3, 3, ((0, 0), (1, 1), (2, 2)),
                                    (1.0, -1.0, 2.0), seed=200 + s,
                                    field="complex", remainder="random")
        pr = positivity_probe(sp, budget=96, seed=s)
        if pr.status == NOT_POSITIVE:
            certified += 1
            scale = max(1.0, max_abs(sp.choi))
            assert evaluate_pair(sp.choi, pr.witness_z, pr.witness_x) < -1e-9 * scale
    assert certified >= 6  # indefinite coefficient matrices should mostly certify


def test_compressions_agree_with_quadratic_form():
    sp = zoo.toeplitz_2x2(2.0, 0.5 - 0.25j, 1.5, -0.75 + 0.5j, 0.25 + 1.0j, 3.0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        direct = evaluate_pair(sp.choi, z, x)
        via_m = np.real(z.conj() @ pair_matrix(sp.choi, 2, 2, x) @ z)
        via_k = np.real(x.conj() @ z_side_matrix(sp.choi, 2, 2, z) @ x)
        assert direct == pytest.approx(via_m, abs=1e-10)
        assert direct == pytest.approx(via_k, abs=1e-10)


def test_probe_is_deterministic_in_seed():
    sp = zoo.toeplitz_2x2(field="complex", **zoo.TOEPLITZ_FLIP)
    a = positivity_probe(sp, budget=32, seed=7)
    b = positivity_probe(sp, budget=32, seed=7)
    assert a.status == b.status == NOT_POSITIVE
    assert max_abs(a.witness_z - b.witness_z) == 0.0
    assert max_abs(a.witness_x - b.witness_x) == 0.0
    assert a.min_value_seen == b.min_value_seen
    assert a.samples_used == b.samples_used


def test_probe_accounting():
    sp = zoo.transpose_map(3)
    pr = positivity_probe(sp, budget=16)
    assert pr.starts_used <= 16
    assert pr.samples_used >= pr.starts_used
    assert pr.witness_z is None and pr.witness_x is None and pr.witness_value is None


def test_non_hermitian_choi_rejected():
    rng = np.random.default_rng(9)
    sp = from_matricization(rng.standard_normal((4, 4)), "real")
    with pytest.raises(NotHermitian):
        positivity_probe(sp)
    with pytest.raises(NotHermitian):
        is_completely_positive(sp)


def test_real_field_witnesses_stay_real():
    sp = zoo.random_star_linear(3, 3, ((0, 0), (1, 1), (2, 2)),
                                (1.0, -2.0, 1.0), seed=31, field="real",
                                remainder="random")
    pr = positivity_probe(sp, budget=128, seed=0)
    if pr.status == NOT_POSITIVE:
        assert not np.iscomplexobj(pr.witness_x) or max_abs(pr.witness_x.imag) == 0.0
