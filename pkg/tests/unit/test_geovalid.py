"""Unit tests for the geological validity metrics."""

import itertools
from dataclasses import replace

import numpy as np
import pytest

from exceptions import ContractError, DataError
from geovalid.facies import Facies, folk_facies, mean_grain_size
from geovalid.mds import classical_mds, double_center
from geovalid.pyramid import halving_plan, laplacian_pyramid, pyr_down, pyr_up, reconstruct_pyramid
from geovalid.superposition import superposition_fraction, superposition_fractions
from geovalid.swd import (
    extract_patches,
    nearest_training_sample,
    pair_seed,
    pairwise_swd,
    random_directions,
    sliced_wasserstein,
    swd_score,
    wasserstein_1d,
)
from schemas.config import SwdSettings
from schemas.metrics import DistanceMatrix

FLAT_SWD = SwdSettings(patch_shape=(3, 3, 2), n_patches=256, n_projections=32, max_levels=1)


def _ramp_set(n=4):
    """Samples whose channel 0 rises with x and channel 1 with z."""
    x = np.arange(8, dtype=np.float64).reshape(8, 1, 1)
    z = np.arange(4, dtype=np.float64).reshape(1, 1, 4)
    sample = np.stack([np.broadcast_to(x, (8, 8, 4)), np.broadcast_to(z, (8, 8, 4))])
    return np.repeat(sample[np.newaxis], n, axis=0) / 8.0


class TestSuperposition:
    """Test the superposition fraction."""

    def test_layered_volume_honors(self, layered_volume):
        """Test time increasing upwards gives 1."""
        assert superposition_fraction(layered_volume.channels["deposition_time"]) == 1.0

    def test_inverted_volume_violates(self, layered_volume):
        """Test time decreasing upwards gives 0."""
        time = layered_volume.channels["deposition_time"][:, :, ::-1]

        assert superposition_fraction(time) == 0.0

    def test_ties_count_as_honoring(self):
        """Test a constant volume honors everywhere."""
        assert superposition_fraction(np.zeros((3, 3, 4))) == 1.0

    def test_partial_violation(self):
        """Test one inverted column out of four in a two-layer volume."""
        time = np.zeros((2, 2, 2))
        time[:, :, 1] = 1.0
        time[0, 0, 1] = -1.0

        assert superposition_fraction(time) == pytest.approx(0.75)

    def test_invariant_under_increasing_rescaling(self, rng):
        """Test raw years and [-1, 1] scaled values agree."""
        time = rng.uniform(1000.0, 2000.0, (5, 5, 6))

        scaled = 2.0 * (time - 1000.0) / 1000.0 - 1.0

        assert superposition_fraction(time) == superposition_fraction(scaled)
        assert superposition_fraction(time) == superposition_fraction(np.tanh(scaled))

    def test_batch_helper(self, layered_volume):
        """Test per-sample fractions of a batch."""
        time = layered_volume.channels["deposition_time"]
        batch = np.stack([np.stack([time, time]), np.stack([time, time[:, :, ::-1]])])

        np.testing.assert_array_equal(superposition_fractions(batch, time_channel=1), [1.0, 0.0])

    @pytest.mark.parametrize("shape", [(4, 4, 1), (4, 4), (2, 4, 4, 4)])
    def test_invalid_shapes(self, shape):
        """Test single-layer and non-3D inputs are refused."""
        with pytest.raises(DataError):
            superposition_fraction(np.zeros(shape))


class TestPyramid:
    """Test the anisotropic Laplacian pyramid."""

    def test_halving_plan_skips_thin_axis(self):
        """Test z stops halving once it would drop below twice the patch."""
        assert halving_plan((64, 64, 16), (7, 7, 3), 3) == [(2, 2, 2), (2, 2, 1)]
        assert halving_plan((32, 32, 8), (7, 7, 3), 3) == [(2, 2, 1)]
        assert halving_plan((64, 64, 16), (7, 7, 3), 1) == []

    def test_patch_must_fit(self):
        """Test a patch larger than the volume is refused."""
        with pytest.raises(ContractError):
            halving_plan((8, 8, 2), (7, 7, 3), 3)

    def test_level_shapes(self, rng):
        """Test details are full size and the residual is coarsest."""
        levels = laplacian_pyramid(rng.standard_normal((2, 64, 64, 16)), 3, (7, 7, 3))

        assert [lvl.shape for lvl in levels] == [(2, 64, 64, 16), (2, 32, 32, 8), (2, 16, 16, 8)]

    def test_exact_reconstruction(self, rng):
        """Test the pyramid inverts to the input."""
        volume = rng.standard_normal((3, 2, 32, 32, 8))

        levels = laplacian_pyramid(volume, 3, (3, 3, 2))

        np.testing.assert_allclose(reconstruct_pyramid(levels), volume, atol=1e-12)

    def test_constant_volume_has_no_detail(self):
        """Test details of a constant volume vanish and the residual keeps the value."""
        levels = laplacian_pyramid(np.ones((1, 16, 16, 8)), 3, (3, 3, 2))

        for detail in levels[:-1]:
            np.testing.assert_allclose(detail, 0.0, atol=1e-12)
        np.testing.assert_allclose(levels[-1], 1.0)

    def test_down_then_up_shapes(self, rng):
        """Test per-axis factors on a single volume."""
        volume = rng.standard_normal((8, 8, 4))

        smaller = pyr_down(volume, (2, 2, 1))

        assert smaller.shape == (4, 4, 4)
        assert pyr_up(smaller, (2, 2, 1)).shape == (8, 8, 4)


class TestWasserstein:
    """Test the exact and sliced Wasserstein distances."""

    def test_one_dimensional_matches_brute_force(self, rng):
        """Test sorted matching equals the best permutation."""
        a, b = rng.standard_normal(5), rng.standard_normal(5)

        brute = min(np.mean(np.abs(a - b[list(p)])) for p in itertools.permutations(range(5)))

        assert wasserstein_1d(a, b) == pytest.approx(brute, rel=1e-12)

    def test_one_dimensional_unequal_sizes(self):
        """Test unequal empirical measures are refused."""
        with pytest.raises(ContractError):
            wasserstein_1d(np.zeros(3), np.zeros(4))

    def test_directions_are_unit(self):
        """Test projection directions lie on the sphere."""
        directions = random_directions(12, 40, seed=3)

        np.testing.assert_allclose(np.linalg.norm(directions, axis=0), 1.0)

    def test_translation_scales_linearly(self, rng):
        """Test a translated point set is mean |v . theta| * t away."""
        points = rng.standard_normal((50, 6))
        shift = rng.standard_normal(6)
        directions = random_directions(6, 64, seed=0)
        expected = float(np.mean(np.abs(shift @ directions)))

        one = sliced_wasserstein(points, points + shift, n_projections=64, seed=0)
        two = sliced_wasserstein(points, points + 2.0 * shift, n_projections=64, seed=0)

        assert one == pytest.approx(expected, rel=1e-10)
        assert two == pytest.approx(2.0 * one, rel=1e-10)

    def test_sliced_dimension_mismatch(self):
        """Test patch sets of different dimension are refused."""
        with pytest.raises(ContractError):
            sliced_wasserstein(np.zeros((4, 3)), np.zeros((4, 5)))


class TestPatches:
    """Test patch extraction."""

    def test_patch_rows(self, random_batch):
        """Test one row of C * px * py * pz values per patch."""
        patches = extract_patches(random_batch, 0, (3, 3, 2), 20, seed=1)

        assert patches.patches.shape == (20, 36)
        assert patches.dimension == 36

    def test_constant_patches_dropped(self):
        """Test per-patch standardization discards constant patches."""
        volumes = np.ones((2, 1, 6, 6, 4))

        assert len(extract_patches(volumes, 0, (3, 3, 2), 10, seed=0)) == 0
        assert len(extract_patches(volumes, 0, (3, 3, 2), 10, seed=0, standardize="set")) == 10

    def test_same_seed_same_patches(self, random_batch):
        """Test corners depend only on the seed."""
        a = extract_patches(random_batch, 0, (3, 3, 2), 16, seed=[4, 0, 0])
        b = extract_patches(random_batch, 0, (3, 3, 2), 16, seed=[4, 0, 0])

        np.testing.assert_array_equal(a.patches, b.patches)

    def test_patch_larger_than_level(self, random_batch):
        """Test an oversized patch is refused."""
        with pytest.raises(ContractError):
            extract_patches(random_batch, 0, (9, 3, 2), 4, seed=0)


class TestSwdScore:
    """Test the multiscale score."""

    def test_identical_sets_score_zero(self, random_batch, tiny_swd):
        """Test a set against itself."""
        result = swd_score(random_batch, random_batch, tiny_swd)

        assert result.score == 0.0
        assert result.levels == list(range(len(result.patch_counts)))
        assert len(result.per_level) == len(result.levels)

    def test_symmetric(self, rng, tiny_swd):
        """Test swapping the sets leaves the score unchanged."""
        a = rng.uniform(-1, 1, (3, 2, 8, 8, 4))
        b = rng.uniform(-1, 1, (3, 2, 8, 8, 4))

        assert swd_score(a, b, tiny_swd).score == pytest.approx(swd_score(b, a, tiny_swd).score)

    def test_structure_is_detected(self):
        """Test noise is much closer to noise than to a layered ramp."""
        noise_a = np.random.default_rng(1).uniform(-1, 1, (4, 2, 8, 8, 4))
        noise_b = np.random.default_rng(2).uniform(-1, 1, (4, 2, 8, 8, 4))

        same = swd_score(noise_a, noise_b, FLAT_SWD).score
        different = swd_score(noise_a, _ramp_set(), FLAT_SWD).score

        assert different > 5.0 * same

    def test_channel_selection(self, random_batch):
        """Test a single-channel score ignores the other channel."""
        settings = FLAT_SWD.model_copy(update={"channels": [0]})
        other = random_batch.copy()
        other[:, 1] = 0.0

        assert swd_score(random_batch, other, settings).score == 0.0

    def test_skipped_level_keeps_its_index(self, rng, mocker):
        """Test a level without patches is left out and the others keep their pyramid index."""
        settings = SwdSettings(patch_shape=(3, 3, 2), n_patches=16, n_projections=8, max_levels=2)
        a = rng.uniform(-1, 1, (2, 1, 16, 16, 4))
        b = rng.uniform(-1, 1, (2, 1, 16, 16, 4))

        def finest_level_empty(volumes, level, *args):
            patches = extract_patches(volumes, level, *args)
            return replace(patches, patches=patches.patches[:0]) if level == 0 else patches

        mocker.patch("geovalid.swd.extract_patches", side_effect=finest_level_empty)

        result = swd_score(a, b, settings)

        assert result.levels == [1]
        assert result.patch_counts[0] == 0
        assert result.patch_counts[1] > 0
        assert result.score == result.per_level[0]

    def test_all_constant_sets(self, tiny_swd):
        """Test sets without any usable patch are refused."""
        flat = np.zeros((2, 2, 8, 8, 4))

        with pytest.raises(DataError):
            swd_score(flat, flat, tiny_swd)

    def test_shape_mismatch(self, random_batch, tiny_swd):
        """Test differently shaped samples are refused."""
        with pytest.raises(ContractError):
            swd_score(random_batch, random_batch[:, :1], tiny_swd)


class TestNearestAndPairwise:
    """Test memorization search and the distance matrix."""

    def test_exact_copy_is_found_first(self, random_batch, tiny_swd):
        """Test an exact duplicate wins with distance zero and ties go low."""
        training = [random_batch[0], random_batch[1], random_batch[2], random_batch[2]]

        index, distance = nearest_training_sample(random_batch[2], training, tiny_swd)

        assert index == 2
        assert distance == 0.0

    def test_empty_training_set(self, random_batch, tiny_swd):
        """Test an empty search space is refused."""
        with pytest.raises(DataError):
            nearest_training_sample(random_batch[0], [], tiny_swd)

    def test_pairwise_matrix(self, random_batch, tiny_swd):
        """Test symmetry, zero diagonal and zero distance between duplicates."""
        samples = [random_batch[0], random_batch[0], random_batch[1]]

        matrix = pairwise_swd(samples, tiny_swd)

        assert matrix.n == 3
        assert matrix.values[0, 1] == 0.0
        assert matrix.values[0, 2] > 0.0
        np.testing.assert_array_equal(matrix.values, matrix.values.T)

    def test_pair_seeds(self):
        """Test pair seeds are reproducible and distinct."""
        assert pair_seed(0, 1, 2) == pair_seed(0, 1, 2)
        assert pair_seed(0, 1, 2) != pair_seed(0, 2, 1)


class TestClassicalMds:
    """Test the distance embedding."""

    def test_triangle_is_recovered(self):
        """Test a 3-4-5 triangle embeds with its distances intact."""
        distances = np.array([[0.0, 3.0, 4.0], [3.0, 0.0, 5.0], [4.0, 5.0, 0.0]])

        coords = classical_mds(distances, k=2)

        recovered = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
        np.testing.assert_allclose(recovered, distances, atol=1e-10)
        np.testing.assert_allclose(coords.mean(axis=0), 0.0, atol=1e-12)

    def test_sign_convention(self, rng):
        """Test each axis has a positive largest-magnitude coordinate."""
        points = rng.standard_normal((6, 2))
        distances = np.linalg.norm(points[:, None] - points[None], axis=2)

        coords = classical_mds(DistanceMatrix(distances))

        for axis in range(2):
            assert coords[np.argmax(np.abs(coords[:, axis])), axis] > 0

    def test_double_centering(self):
        """Test the Gram matrix has zero row sums."""
        distances = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])

        np.testing.assert_allclose(double_center(distances).sum(axis=1), 0.0, atol=1e-12)

    def test_non_euclidean_is_clamped(self):
        """Test triangle-violating distances still embed finitely."""
        distances = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])

        assert np.all(np.isfinite(classical_mds(distances)))

    def test_too_few_items(self):
        """Test two items cannot be embedded in two dimensions."""
        with pytest.raises(ContractError):
            classical_mds(np.array([[0.0, 1.0], [1.0, 0.0]]), k=2)


class TestFacies:
    """Test three-class lithofacies."""

    def test_cutoffs(self):
        """Test class boundaries at 0.1 and 0.5."""
        result = folk_facies(np.array([0.0, 0.09, 0.1, 0.49, 0.5, 1.0]))

        expected = [Facies.CLAY] * 2 + [Facies.SANDY_CLAY] * 2 + [Facies.CLAYEY_SAND_SAND] * 2
        np.testing.assert_array_equal(result.codes, expected)
        assert result.codes.dtype == np.int8

    def test_grain_size_mixing(self):
        """Test linear and log2-scale mixing of the end-members."""
        assert mean_grain_size(0.5, 0.5, 0.01) == pytest.approx(0.255)
        assert mean_grain_size(0.5, 0.5, 0.01, mixing="phi") == pytest.approx(np.sqrt(0.005))
        assert mean_grain_size(1.0, 0.5, 0.01, mixing="phi") == pytest.approx(0.5)

    @pytest.mark.parametrize("bad", [np.nan, -0.1, 1.2])
    def test_invalid_fractions(self, bad):
        """Test fractions outside [0, 1] are refused."""
        with pytest.raises(DataError):
            folk_facies(np.array([0.2, bad]))

    def test_invalid_diameters(self):
        """Test end-members must be ordered."""
        with pytest.raises(ContractError):
            folk_facies(np.array([0.2]), d_coarse=0.01, d_fine=0.5)

    def test_unknown_mixing(self):
        """Test unknown mixing rules are refused."""
        with pytest.raises(ContractError):
            mean_grain_size(0.5, 0.5, 0.01, mixing="cubic")
