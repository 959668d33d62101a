import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kubo_rigidity.channels import (
    ChoiMatrix,
    LinearMap,
    channel_from_dict,
    channel_to_dict,
    choi_level_mean,
    choi_of_map,
    classify,
    from_kraus,
    interior_shift,
    map_of_choi,
    normalize,
    normalized_channel_mean,
    verify_thm_ent_rig,
)
from kubo_rigidity.cones import is_ppt
from kubo_rigidity.errors import ContractError, DomainError
from kubo_rigidity.hermitian import Bipartite, matrix_to_entries, partial_trace_second
from kubo_rigidity.kubo_ando import make_mean
from kubo_rigidity.random_ops import random_kraus, random_pd_bipartite, random_psd, random_unitary
from kubo_rigidity.rigidity import build_pair


def transpose_map(d=2):
    images = np.zeros((d, d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            images[i, j, j, i] = 1
    return LinearMap(images)


def completely_depolarizing(d=2):
    return LinearMap(np.einsum("ij,ab->ijab", np.eye(d), np.eye(d) / d))


def choi_oracle(phi: LinearMap) -> np.ndarray:
    """Block assembly ``sum_ij E_ij (x) Phi(E_ij)``."""
    m = phi.m
    C = np.zeros((m * phi.n, m * phi.n), dtype=complex)
    for i in range(m):
        for j in range(m):
            E = np.zeros((m, m))
            E[i, j] = 1
            C += np.kron(E, phi(E))
    return C


class TestChoi:
    def test_identity_channel(self):
        C = choi_of_map(from_kraus([np.eye(2)]))
        expected = np.zeros((4, 4))
        expected[np.ix_([0, 3], [0, 3])] = 1
        np.testing.assert_array_equal(C.mat, expected)
        assert C.trace_preserving

    def test_transpose_map(self):
        C = choi_of_map(transpose_map())
        assert not classify(C).completely_positive
        assert C.trace_preserving

    def test_depolarizing(self):
        cls = classify(completely_depolarizing())
        assert cls.completely_positive and cls.trace_preserving and cls.entanglement_breaking

    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
    def test_round_trip_and_oracle(self, seed, m, n):
        phi = from_kraus(random_kraus(np.random.default_rng(seed), m, n))
        C = choi_of_map(phi)
        np.testing.assert_allclose(C.mat, choi_oracle(phi), atol=1e-12)
        np.testing.assert_allclose(map_of_choi(C).images, phi.images, atol=1e-14)
        assert classify(C).completely_positive

    def test_kraus_action(self, rng):
        Ks = random_kraus(rng, 2, 3)
        X = random_psd(rng, 2)
        np.testing.assert_allclose(from_kraus(Ks)(X), sum(K @ X @ K.conj().T for K in Ks), atol=1e-12)

    def test_extension_of_identity_gives_choi(self, rng):
        phi = from_kraus(random_kraus(rng, 2, 2))
        psi = np.eye(2).ravel()
        np.testing.assert_allclose(phi.extended(np.outer(psi, psi)), choi_of_map(phi).mat, atol=1e-12)

    def test_unitary_channel_is_tp(self, rng):
        assert choi_of_map(from_kraus([random_unitary(rng, 3)])).trace_preserving

    def test_rejects_non_hermitian_preserving(self):
        images = np.zeros((2, 2, 2, 2), dtype=complex)
        images[0, 1, 0, 0] = 1
        with pytest.raises(ContractError, match="Hermiticity"):
            LinearMap(images)

    def test_rejects_mismatched_kraus(self):
        with pytest.raises(ContractError):
            from_kraus([np.eye(2), np.eye(3)])

    def test_large_dims_eb_unknown(self):
        cls = classify(Bipartite(np.eye(9) / 3, 3, 3))
        assert cls.entanglement_breaking is None and cls.ppt_map


class TestNormalize:
    def test_tp_restored(self, rng):
        C = normalize(random_pd_bipartite(rng, 2, 3))
        assert C.trace_preserving and C.tp_defect() <= 1e-12

    def test_singular_partial_trace(self):
        X = Bipartite(np.diag([1.0, 1.0, 0.0, 0.0]), 2, 2)
        with pytest.raises(DomainError, match="singular"):
            normalize(X)

    def test_preserves_ppt_verdict_both_ways(self, rng):
        seen = set()
        for _ in range(100):
            # shift towards the PPT boundary so both verdicts occur
            X = random_pd_bipartite(rng, 2, 2, floor=0.01)
            pt = is_ppt(X)
            assert pt.member == is_ppt(normalize(X).bip).member
            seen.add(pt.member)
        assert seen == {True, False}

    def test_fixes_tp_input(self, rng):
        phi = from_kraus([random_unitary(rng, 2)])
        C = interior_shift(choi_of_map(phi), 0.1)
        C = normalize(C)
        np.testing.assert_allclose(partial_trace_second(C.bip), np.eye(2), atol=1e-12)


class TestMeans:
    def test_rejects_boundary_choi(self, rng):
        phi = from_kraus([np.eye(2)])
        with pytest.raises(DomainError, match="interior_shift"):
            choi_level_mean(make_mean("geometric", 0.5), phi, phi)

    def test_interior_shift_opt_in(self, rng):
        phi = from_kraus([np.eye(2)])
        C = interior_shift(phi)
        assert C.bip.trace() == pytest.approx(2 * (1 + 4e-8))
        with pytest.warns(UserWarning, match="ill-conditioned"):
            out = choi_level_mean(make_mean("geometric", 0.5), C, C)
        np.testing.assert_allclose(choi_of_map(out).mat, C.mat, atol=1e-12)

    def test_rejects_non_tp(self, rng):
        X = random_pd_bipartite(rng, 2, 2)
        with pytest.raises(ContractError, match="trace-preserving"):
            normalized_channel_mean(make_mean("geometric", 0.5), X, X)

    def test_rejects_dimension_mismatch(self, rng):
        with pytest.raises(ContractError):
            choi_level_mean(make_mean("geometric", 0.5), random_pd_bipartite(rng, 2, 2), random_pd_bipartite(rng, 2, 3))

    def test_normalized_mean_is_tp(self, rng):
        C1 = normalize(random_pd_bipartite(rng, 2, 2))
        C2 = normalize(random_pd_bipartite(rng, 2, 2))
        out = choi_of_map(normalized_channel_mean(make_mean("harmonic", 0.5), C1, C2))
        assert out.trace_preserving


class TestEntRig:
    def test_inputs_certified(self):
        rep = verify_thm_ent_rig(make_mean("geometric", 0.5), 0.05)
        assert all(rep.details["input_full_rank"])
        assert max(rep.details["input_tp_defect"]) <= 1e-12
        assert all(c["entanglement_breaking"] for c in rep.details["input_classes"])
        assert rep.details["scalar_normalisation_gap"] <= 1e-12

    @pytest.mark.parametrize("spec", ["geometric:0.5", "harmonic:0.5", "log:1", "duallog:0.5"])
    def test_curved_means_violate(self, spec):
        fam, a = spec.split(":")
        rep = verify_thm_ent_rig(make_mean(fam, float(a)), 0.05)
        assert rep.conclusion == "violated"
        assert rep.details["normalisation_preserves_ppt"]
        assert rep.lambda3["numeric"] == pytest.approx(rep.lambda3["exact"], abs=1e-10)

    def test_leading_order(self):
        f = make_mean("geometric", 0.5)
        eps = 0.01
        lam = verify_thm_ent_rig(f, eps).lambda3["exact"]
        assert lam / eps**2 == pytest.approx(-8 / 9 * f.kappa, rel=0.05)

    def test_arithmetic_preserved(self):
        rep = verify_thm_ent_rig(make_mean("arithmetic", 0.5), 0.05)
        assert rep.conclusion == "preserved"
        assert rep.details["output_class"]["entanglement_breaking"]


class TestJSON:
    def test_kraus_round_trip(self, rng, tmp_path):
        Ks = random_kraus(rng, 2, 2, count=2)
        data = {"kraus": [matrix_to_entries(K) for K in Ks]}
        phi = channel_from_dict(json.loads(json.dumps(data)))
        np.testing.assert_allclose(phi.images, from_kraus(Ks).images, atol=1e-15)
        again = channel_from_dict(json.loads(json.dumps(channel_to_dict(phi))))
        np.testing.assert_allclose(again.images, phi.images, atol=1e-15)

    def test_missing_key(self):
        with pytest.raises(ContractError):
            channel_from_dict({"maps": []})

    def test_choi_wrapper(self):
        C = ChoiMatrix(Bipartite(np.eye(4) / 2, 2, 2))
        assert C.trace_preserving and C.dims == (2, 2)
