import numpy as np
import pytest
from sklearn.base import clone

from conftest import match_error, planted_cp_tensor
from linsect.seeding import gaussian, rng_for
from linsect.estimators import (
    BlockTermDecomposer,
    TensorRankDecomposer,
    VarietyDecomposer,
    VarietyIntersection,
    WaringDecomposer,
)
from linsect.varieties import VarietySpec, sample_point


class TestSklearnProtocol:
    def test_get_set_params(self):
        est = VarietyIntersection(VarietySpec.determinantal(2, 2, 1), seed=3)
        params = est.get_params()
        assert params["seed"] == 3
        est.set_params(seed=9)
        assert est.seed == 9

    def test_clone(self):
        est = TensorRankDecomposer(seed=4, residual_tol=1e-9)
        cloned = clone(est)
        assert cloned.seed == 4 and cloned.residual_tol == 1e-9

    def test_unfitted_raises(self):
        from sklearn.exceptions import NotFittedError

        est = WaringDecomposer()
        with pytest.raises(NotFittedError):
            est.reconstruct()


class TestVarietyIntersection:
    def test_trivial_subspace(self):
        rng = rng_for(0, "est-trivial")
        rows = gaussian(rng, (4, 25), "C")  # rows span U
        est = VarietyIntersection(VarietySpec.determinantal(5, 5, 1)).fit(rows)
        assert est.status_ == "trivial_all"
        assert est.is_trivial_
        assert est.elements_.shape == (0, 25)
        assert est.verify()

    def test_planted_elements_and_predict(self):
        spec = VarietySpec.determinantal(5, 5, 1)
        plants = [sample_point(spec, 31), sample_point(spec, 32)]
        rng = rng_for(1, "est-planted")
        rows = np.vstack(plants + [gaussian(rng, 25, "C")])
        est = VarietyIntersection(spec, seed=2).fit(rows)
        assert est.status_ == "found_elements"
        assert est.elements_.shape == (2, 25)
        for plant in plants:
            assert match_error(plant, list(est.elements_)) <= 1e-6
        assert est.verify()
        flags = est.predict(np.vstack([plants[0], gaussian(rng, 25, "C")]))
        assert flags.tolist() == [True, False]

    def test_dict_spec_accepted(self):
        rows = np.array([[1.0, 0.0, 0.0, 0.0]])
        est = VarietyIntersection(
            {"kind": "determinantal", "dims": [2, 2], "r": 1, "field": "R"}
        ).fit(rows)
        assert est.status_ == "found_elements"


class TestDecomposers:
    def test_tensor_rank(self):
        tensor, factors = planted_cp_tensor((4, 5, 6), 3, 2, "R")
        est = TensorRankDecomposer(seed=0).fit(tensor)
        assert est.rank_ == 3
        assert est.residual_ <= 1e-8
        rebuilt = est.reconstruct()
        assert np.linalg.norm(rebuilt - tensor) <= 1e-8 * np.linalg.norm(tensor)
        for a in range(3):
            assert match_error(factors[0][:, a], list(est.factors_[0].T)) <= 1e-6

    def test_waring(self):
        rng = rng_for(2, "est-waring")
        vectors = [rng.standard_normal(4) for _ in range(2)]
        tensor = sum(np.einsum("i,j,k,l->ijkl", v, v, v, v) for v in vectors)
        est = WaringDecomposer(seed=0).fit(tensor)
        assert est.rank_ == 2
        assert est.components_.shape == (2, 4)
        assert np.linalg.norm(est.reconstruct() - tensor) <= 1e-8 * np.linalg.norm(tensor)

    def test_block_term(self):
        rng = rng_for(3, "est-block")
        slab = gaussian(rng, (4, 2), "R") @ gaussian(rng, (2, 4), "R")
        tensor = np.multiply.outer(slab, gaussian(rng, 5, "R"))
        est = BlockTermDecomposer(r=2, seed=0).fit(tensor)
        assert est.rank_ == 1
        assert est.slab_rank_ratios_[0] <= 1e-8

    def test_variety_decomposer(self):
        spec = VarietySpec.determinantal(4, 4, 1)
        point = sample_point(spec, 5)
        rng = rng_for(4, "est-xw")
        matrix = np.outer(point, gaussian(rng, 3, "C"))
        est = VarietyDecomposer(spec, seed=0).fit(matrix)
        assert est.rank_ == 1
        assert match_error(point, list(est.points_)) <= 1e-8
