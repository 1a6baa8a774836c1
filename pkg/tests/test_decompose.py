import numpy as np
import pytest

from conftest import match_error, planted_cp_tensor
from linsect.errors import (
    InvalidSpec,
    NotSymmetric,
    NotUnique,
    RankMismatch,
)
from linsect.seeding import gaussian, rng_for
from linsect.decompose import (
    block_term_decompose,
    decomposition_to_json,
    tensor_decompose,
    variety_decompose,
    waring_decompose,
)
from linsect.varieties import VarietySpec, sample_point


def planted_xw(spec, rank, w_dim, seed, field=None):
    field = field or spec.field
    points = [sample_point(spec, (seed + 1) * 777 + k) for k in range(rank)]
    rng = rng_for(seed, "xw-cofactors")
    cofactors = [gaussian(rng, w_dim, field) for _ in range(rank)]
    matrix = sum(np.outer(v, w) for v, w in zip(points, cofactors))
    return matrix, points, cofactors


class TestVarietyDecompose:
    def test_single_term(self):
        spec = VarietySpec.determinantal(2, 2, 1)
        matrix = np.outer(np.array([1.0 + 0j, 0, 0, 0]), np.array([1.0 + 0j]))
        dec = variety_decompose(matrix, spec, seed=0)
        assert dec.rank == 1
        assert abs(dec.points[0][0]) == pytest.approx(1.0)
        assert dec.residual <= 1e-12

    def test_planted_rank_four(self):
        spec = VarietySpec.determinantal(5, 5, 1)
        matrix, points, cofactors = planted_xw(spec, 4, 4, seed=2)
        dec = variety_decompose(matrix, spec, seed=0)
        assert dec.rank == 4 and dec.residual <= 1e-8
        for v in points:
            assert match_error(v, list(dec.points)) <= 1e-6
        for w in cofactors:
            assert match_error(w, list(dec.cofactors)) <= 1e-6
        rebuilt = dec.reconstruct()
        assert np.linalg.norm(rebuilt - matrix) <= 1e-8 * np.linalg.norm(matrix)

    def test_single_rank2_slab_recovered(self):
        # one slab of rank 2: the lift has a single index and the kernel
        # is exactly its power, so recovery works at any (n1, n2)
        spec = VarietySpec.determinantal(5, 5, 2)
        matrix, points, _ = planted_xw(spec, 1, 3, seed=4)
        dec = variety_decompose(matrix, spec, seed=0)
        assert dec.rank == 1
        assert match_error(points[0], list(dec.points)) <= 1e-8

    def test_reducible_spec_rejected(self):
        spec = VarietySpec.slice_rank1((2, 2, 2))
        with pytest.raises(InvalidSpec):
            variety_decompose(np.eye(8), spec, seed=0)

    def test_zero_matrix_rejected(self):
        spec = VarietySpec.determinantal(2, 2, 1)
        with pytest.raises(RankMismatch):
            variety_decompose(np.zeros((4, 2)), spec, seed=0)

    def test_certificate_verifies(self):
        spec = VarietySpec.determinantal(5, 5, 1)
        matrix, _, _ = planted_xw(spec, 3, 5, seed=6)
        dec = variety_decompose(matrix, spec, seed=0)
        assert dec.certificate.count == 3
        assert min(dec.certificate.alignments) >= 1 - 1e-8


class TestTensorDecompose:
    def test_diagonal(self):
        tensor = np.zeros((2, 2, 2))
        tensor[0, 0, 0] = 1.0
        tensor[1, 1, 1] = 1.0
        dec = tensor_decompose(tensor, seed=0)
        assert dec.rank == 2 and dec.residual <= 1e-12
        rebuilt = dec.reconstruct()
        assert np.abs(rebuilt - tensor).max() <= 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_beyond_single_mode_rank(self, seed):
        # rank 9 > min mode dimension 7: the pair-flattening route
        tensor, factors = planted_cp_tensor((7, 7, 9), 9, seed, "R")
        dec = tensor_decompose(tensor, seed=seed)
        assert dec.rank == 9 and dec.residual <= 1e-6
        for a in range(9):
            assert match_error(factors[0][:, a], list(dec.factors[0].T)) <= 1e-6
            assert match_error(factors[2][:, a], list(dec.factors[2].T)) <= 1e-6

    def test_out_of_regime_raises(self):
        tensor, _ = planted_cp_tensor((7, 7, 9), 12, 0, "R")
        with pytest.raises((NotUnique, RankMismatch)):
            tensor_decompose(tensor, seed=0)

    def test_joint_bound_corner(self):
        # (5,5,4): rank 4 = min{(5-1)(5-1)/4, 4} sits on both constraints
        tensor, factors = planted_cp_tensor((5, 5, 4), 4, 3, "C")
        dec = tensor_decompose(tensor, seed=0)
        assert dec.rank == 4 and dec.residual <= 1e-8
        for a in range(4):
            assert match_error(factors[2][:, a], list(dec.factors[2].T)) <= 1e-6

    def test_order_four_planted(self):
        tensor, factors = planted_cp_tensor((3, 3, 3, 3), 2, 1, "C")
        dec = tensor_decompose(tensor, seed=0)
        assert dec.rank == 2 and dec.residual <= 1e-8
        for a in range(2):
            for mode in range(4):
                assert match_error(factors[mode][:, a], list(dec.factors[mode].T)) <= 1e-6

    def test_order_four_at_quarter_square_bound(self):
        # n = 7, R = 9 = (n-1)^2 / 4
        tensor, factors = planted_cp_tensor((7, 7, 7, 7), 9, 3, "C")
        dec = tensor_decompose(tensor, seed=0)
        assert dec.rank == 9 and dec.residual <= 1e-6

    def test_order_five(self):
        # variety side = product tensors over three modes, co-factors over two
        tensor, factors = planted_cp_tensor((3, 3, 3, 3, 3), 4, 2, "C")
        dec = tensor_decompose(tensor, seed=0)
        assert dec.rank == 4 and dec.residual <= 1e-7
        for mode in range(5):
            for a in range(4):
                assert match_error(factors[mode][:, a], list(dec.factors[mode].T)) <= 1e-6

    def test_grouping_cross_check(self):
        tensor, _ = planted_cp_tensor((4, 5, 6), 3, 5, "R")
        default = tensor_decompose(tensor, seed=0)
        transposed = tensor_decompose(tensor, grouping=((1, 2), (0,)), seed=0)
        assert default.rank == transposed.rank == 3
        for mode in range(3):
            for a in range(3):
                assert match_error(
                    default.factors[mode][:, a], list(transposed.factors[mode].T)
                ) <= 1e-8

    def test_bad_grouping(self):
        tensor, _ = planted_cp_tensor((3, 3, 3), 2, 0, "R")
        with pytest.raises(InvalidSpec):
            tensor_decompose(tensor, grouping=((0,), (1, 2)), seed=0)
        with pytest.raises(InvalidSpec):
            tensor_decompose(tensor, grouping=((0, 1), (1, 2)), seed=0)

    def test_order_two_rejected(self):
        with pytest.raises(InvalidSpec):
            tensor_decompose(np.eye(3), seed=0)

    def test_determinism(self):
        tensor, _ = planted_cp_tensor((4, 4, 5), 3, 9, "C")
        first = tensor_decompose(tensor, seed=5)
        second = tensor_decompose(tensor, seed=5)
        assert np.array_equal(first.weights, second.weights)
        for f1, f2 in zip(first.factors, second.factors):
            assert np.array_equal(f1, f2)

    def test_terms_sorted_by_weight(self):
        tensor, _ = planted_cp_tensor((4, 4, 5), 3, 9, "C")
        dec = tensor_decompose(tensor, seed=5)
        magnitudes = np.abs(dec.weights)
        assert np.all(magnitudes[:-1] >= magnitudes[1:] - 1e-12)


class TestWaringDecompose:
    def test_two_basis_powers(self):
        e = np.eye(3)
        tensor = np.zeros((3,) * 4)
        for v in (e[0], e[1]):
            tensor += np.einsum("i,j,k,l->ijkl", v, v, v, v)
        dec = waring_decompose(tensor, seed=0)
        assert dec.rank == 2
        assert np.sort(np.real(dec.weights)) == pytest.approx([1.0, 1.0])
        for v in (e[0], e[1]):
            assert match_error(v, list(dec.vectors)) <= 1e-10

    @pytest.mark.parametrize("seed", range(4))
    def test_planted_sixth_bound(self, seed):
        # m = 4, n = 6, R = 5 = n(n-1)/6
        rng = rng_for(seed, "waring-planted")
        vectors = [rng.standard_normal(6) for _ in range(5)]
        weights = rng.standard_normal(5)
        tensor = sum(
            a * np.einsum("i,j,k,l->ijkl", v, v, v, v)
            for a, v in zip(weights, vectors)
        )
        dec = waring_decompose(tensor, seed=seed)
        assert dec.rank == 5 and dec.residual <= 1e-8
        for v in vectors:
            assert match_error(v, list(dec.vectors)) <= 1e-6
        rebuilt = dec.reconstruct()
        assert np.linalg.norm(rebuilt - tensor) <= 1e-6 * np.linalg.norm(tensor)

    def test_negation_flips_weights(self):
        rng = rng_for(1, "waring-neg")
        vectors = [rng.standard_normal(4) for _ in range(2)]
        tensor = sum(np.einsum("i,j,k,l->ijkl", v, v, v, v) for v in vectors)
        plus = waring_decompose(tensor, seed=0)
        minus = waring_decompose(-tensor, seed=0)
        assert np.allclose(np.sort(minus.weights), np.sort(-plus.weights), atol=1e-8)
        for v in plus.vectors:
            assert match_error(v, list(minus.vectors)) <= 1e-8

    def test_odd_order(self):
        rng = rng_for(2, "waring-odd")
        vectors = [rng.standard_normal(3) for _ in range(2)]
        weights = [1.5, -0.5]
        tensor = sum(
            a * np.einsum("i,j,k,l,m->ijklm", v, v, v, v, v)
            for a, v in zip(weights, vectors)
        )
        dec = waring_decompose(tensor, seed=0)
        assert dec.rank == 2 and dec.residual <= 1e-8

    def test_complex_field(self):
        rng = rng_for(5, "waring-complex")
        vectors = [gaussian(rng, 5, "C") for _ in range(3)]
        weights = gaussian(rng, 3, "C")
        tensor = sum(
            a * np.einsum("i,j,k,l->ijkl", v, v, v, v)
            for a, v in zip(weights, vectors)
        )
        dec = waring_decompose(tensor, seed=0)
        assert dec.rank == 3 and dec.residual <= 1e-8
        for v in vectors:
            assert match_error(v, list(dec.vectors)) <= 1e-6
        rebuilt = dec.reconstruct()
        assert np.linalg.norm(rebuilt - tensor) <= 1e-8 * np.linalg.norm(tensor)

    def test_complex_odd_order(self):
        rng = rng_for(6, "waring-complex-odd")
        vectors = [gaussian(rng, 3, "C") for _ in range(2)]
        weights = gaussian(rng, 2, "C")
        tensor = sum(
            a * np.einsum("i,j,k,l,m->ijklm", v, v, v, v, v)
            for a, v in zip(weights, vectors)
        )
        dec = waring_decompose(tensor, seed=0)
        assert dec.rank == 2 and dec.residual <= 1e-8

    def test_non_symmetric_rejected(self):
        rng = rng_for(3, "waring-bad")
        with pytest.raises(NotSymmetric):
            waring_decompose(rng.standard_normal((3, 3, 3)), seed=0)

    def test_non_cubic_rejected(self):
        with pytest.raises(InvalidSpec):
            waring_decompose(np.zeros((2, 3, 2)), seed=0)


class TestBlockTermDecompose:
    def test_single_term_top_rank(self):
        # fallback sanity at r = min(n1, n2) - 1
        rng = rng_for(0, "block-single")
        slab = gaussian(rng, (4, 3), "R") @ gaussian(rng, (3, 4), "R")
        w = gaussian(rng, 5, "R")
        tensor = np.multiply.outer(slab, w)
        dec = block_term_decompose(tensor, 3, seed=0)
        assert dec.rank == 1
        assert match_error(slab.reshape(-1), [s.reshape(-1) for s in dec.slabs]) <= 1e-8
        assert dec.slab_rank_ratios[0] <= 1e-8

    def test_two_rank2_slabs(self):
        rng = rng_for(1, "block-two")
        slabs = [gaussian(rng, (9, 2), "R") @ gaussian(rng, (2, 9), "R") for _ in range(1)]
        # bound for (9,9,r=2) is 1; a single term is certified
        w = [gaussian(rng, 4, "R")]
        tensor = sum(np.multiply.outer(s, v) for s, v in zip(slabs, w))
        dec = block_term_decompose(tensor, 2, seed=0)
        assert dec.rank == 1 and dec.residual <= 1e-8
        assert max(dec.slab_rank_ratios) <= 1e-8

    def test_invalid_r(self):
        with pytest.raises(InvalidSpec):
            block_term_decompose(np.zeros((3, 3, 3)), 3, seed=0)


class TestJsonEmission:
    def test_tensor_terms_reconstruct(self):
        tensor, _ = planted_cp_tensor((3, 4, 5), 2, 0, "C")
        dec = tensor_decompose(tensor, seed=0)
        payload = decomposition_to_json(dec, "C")
        assert payload["residual"] == dec.residual
        rebuilt = np.zeros((3, 4, 5), dtype=complex)
        for term in payload["terms"]:
            scale = complex(*term["scale"])
            factors = [
                np.array([complex(re, im) for re, im in leg]) for leg in term["factors"]
            ]
            outer = np.array(scale)
            for leg in factors:
                outer = np.multiply.outer(outer, leg)
            rebuilt += outer
        assert np.linalg.norm(rebuilt - tensor) <= 1e-8 * np.linalg.norm(tensor)

    def test_block_shapes(self):
        rng = rng_for(2, "json-block")
        slab = gaussian(rng, (4, 3), "R") @ gaussian(rng, (3, 4), "R")
        tensor = np.multiply.outer(slab, gaussian(rng, 5, "R"))
        dec = block_term_decompose(tensor, 3, seed=0)
        payload = decomposition_to_json(dec, "R")
        assert payload["factor_shapes"] == [[4, 4], [5]]
        assert payload["mode_groups"] == [[0, 1], [2]]
