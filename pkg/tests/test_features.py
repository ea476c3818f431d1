import math
from collections import deque
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectsift.errors import EmptyClass
from defectsift.features import (
    DEFAULT_CATEGORIES,
    ExtractorConfig,
    ReferenceModels,
    build_reference_models,
    extract_all,
    feature_names,
    registry,
)
from defectsift.features import basic, cooccurrence, distribution, filters, spatial
from defectsift.features.reference import median_histogram
from defectsift.imaging import GrayImage, Roi, histogram
from defectsift.stats import FittedPdf, GaussianMixture, chi_square_uniformity, summary_stats
from defectsift.synth import SynthConfig, gen_dataset

from .conftest import make_image, mask_image

CFG = ExtractorConfig()
ARITIES = (3, 3, 3, 2, 4, 3, 8, 3, 9, 6, 1, 1, 8, 5, 2, 1, 5, 1, 30)


@pytest.fixture(scope="module")
def ref():
    data = gen_dataset(6, SynthConfig(width=32, height=32), seed=9)
    return build_reference_models([(s.image, s.label) for s in data], CFG)


def gmm_pdf(means, var=100.0):
    k = len(means)
    return FittedPdf.from_mixture(GaussianMixture(np.full(k, 1.0 / k), np.array(means, float), np.full(k, var)))


def manual_ref(tp_pdfs, fp_pdfs, tp_best="gmm", fp_best="gmm", priors=(0.35, 0.65),
               tp_hist=None, fp_hist=None, moments=(40.0, 25.0, 10.0, 9.0)):
    h = histogram(make_image([[0, 255]]), 256)
    return ReferenceModels(tp_hist or h, fp_hist or h, tp_pdfs, fp_pdfs, tp_best, fp_best, moments, priors)


def same_family_set(pdf_gmm):
    w = FittedPdf("weibull", {"k": 2.0, "lam": 100.0, "shift": 1.0})
    g = FittedPdf("gumbel", {"mu": 100.0, "beta": 20.0})
    return {"weibull": w, "gumbel": g, "gmm": pdf_gmm}


def bfs_component_sizes(mask, conn):
    """Flood-fill reference for connected components."""
    H, W = mask.shape
    steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if conn == 8:
        steps += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    seen = np.zeros_like(mask, dtype=bool)
    sizes = []
    for y in range(H):
        for x in range(W):
            if mask[y, x] and not seen[y, x]:
                q, n = deque([(y, x)]), 0
                seen[y, x] = True
                while q:
                    cy, cx = q.popleft()
                    n += 1
                    for dy, dx in steps:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < H and 0 <= nx < W and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            q.append((ny, nx))
                sizes.append(n)
    return sorted(sizes)


def loop_glcm(q, offsets, levels):
    H, W = q.shape
    P = np.zeros((levels, levels))
    for dr, dc in offsets:
        for y in range(H):
            for x in range(W):
                yy, xx = y + dr, x + dc
                if 0 <= yy < H and 0 <= xx < W:
                    P[q[y, x], q[yy, xx]] += 1
    P = P + P.T
    return P / P.sum()


# Points live in [1, 11]; shifts up to 11 keep them inside [1, 22] of a 24x24 frame,
# off the border where the unpadded TV signal would lose a transition.
masks = st.lists(st.tuples(st.integers(1, 11), st.integers(1, 11)), min_size=0, max_size=40)


def place(points, shape=(24, 24), dy=0, dx=0):
    m = np.zeros(shape, dtype=bool)
    for y, x in points:
        m[y + dy, x + dx] = True
    return m


class TestPixelLoss:
    def test_none_lost(self):
        assert spatial.f_pixel_loss(make_image(np.full((4, 4), 100)), None, CFG)[:2] == [0.0, 0.0]

    def test_all_lost(self):
        assert spatial.f_pixel_loss(make_image(np.zeros((4, 4))), None, CFG)[0] == 1.0

    def test_boundary_is_defect(self):
        m = np.zeros((8, 8), dtype=bool)
        m.flat[:10] = True
        out = spatial.f_pixel_loss(mask_image(m), None, CFG.with_(loss_lambda=10))
        assert out[1] == 1.0
        out = spatial.f_pixel_loss(mask_image(m), None, CFG.with_(loss_lambda=11))
        assert out[1] == 0.0

    def test_loglik_ratio(self):
        # a0 = 65 equals mu_D + var_D, so the defect term vanishes.
        llr = spatial.pixel_loss_loglik_ratio(65, (40.0, 25.0, 10.0, 9.0))
        assert llr == pytest.approx((65 - 19) ** 2 / 18)


class TestUniformity:
    def test_equal_counts(self):
        m = np.zeros((16, 16), dtype=bool)
        m[::4, ::4] = True  # one lost pixel per 4x4 patch
        chi2_p, mc_p, fisher_p = spatial.f_uniformity(mask_image(m), CFG)
        assert chi2_p == 1.0 and mc_p == 1.0

    def test_concentrated(self):
        m = np.zeros((32, 32), dtype=bool)
        m[:8, :8] = True  # 64 lost pixels, all in patch 0 of 16
        chi2_p = spatial.f_uniformity(mask_image(m), CFG)[0]
        _, oracle = chi_square_uniformity([64] + [0] * 15)
        assert chi2_p == oracle and chi2_p < 0.01

    def test_empty_sentinel(self):
        assert spatial.f_uniformity(make_image(np.full((8, 8), 50)), CFG) == [1.0, 1.0, 1.0]


class TestIqr:
    def test_constant(self):
        assert spatial.f_pixel_loss  # keep import use explicit
        assert distribution.f_iqr(make_image(np.full((8, 8), 40)), CFG)[0] == 0

    def test_single_spike(self):
        u = np.zeros((32, 32), dtype=np.int64)
        u[16, 16] = 255
        outlier, noise, defect = distribution.f_iqr(make_image(u), CFG.with_(lambda_noise=10000))
        assert noise == 1 / 1024 and outlier == 1 / 1024 and defect == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(10, 5000))
    def test_partition(self, seed, lam):
        u = np.random.default_rng(seed).integers(0, 256, (12, 12))
        o, n, d = distribution.f_iqr(make_image(u), CFG.with_(lambda_noise=lam))
        assert n + d == o


class TestGmmPosterior:
    def test_no_reference(self):
        assert distribution.f_gmm_posterior(make_image([[1]]), None, CFG) == [0.5, 0.5]

    @pytest.mark.parametrize("priors", [(0.5, 0.5), (0.35, 0.65)])
    def test_identical_models(self, priors):
        pdfs = same_family_set(gmm_pdf([100.0]))
        r = manual_ref(pdfs, pdfs, priors=priors)
        out = distribution.f_gmm_posterior(make_image(np.full((4, 4), 90)), r, CFG)
        assert out == pytest.approx(list(priors), abs=1e-12)

    def test_tp_pixels(self):
        tp, fp = gmm_pdf([60.0, 80.0], 150.0), gmm_pdf([110.0, 140.0], 150.0)
        r = manual_ref(same_family_set(tp), same_family_set(fp))
        wins = 0
        for seed in range(100):
            x = tp.mixture.sample(256, np.random.default_rng(seed))
            img = make_image(np.clip(np.rint(x), 0, 255).reshape(16, 16))
            post = distribution.f_gmm_posterior(img, r, CFG)
            assert abs(sum(post) - 1) < 1e-9
            wins += post[1] > 0.5
        assert wins >= 95

    def test_config_priors_override(self, ref):
        img = gen_dataset(1, SynthConfig(width=32, height=32), seed=1)[0].image
        a = distribution.f_gmm_posterior(img, ref, CFG.with_(priors=(0.5, 0.5)))
        b = distribution.f_gmm_posterior(img, ref, CFG)
        assert a != b


class TestProximity:
    def test_corners(self):
        m = np.zeros((10, 10), dtype=bool)
        m[0, 0] = m[9, 9] = True
        eu, man, cheb, _ = spatial.f_proximity(mask_image(m), CFG)
        diag = math.sqrt(200)
        assert eu == pytest.approx(math.sqrt(162) / diag)
        assert man == pytest.approx(18 / diag)
        assert cheb == pytest.approx(9 / diag)

    def test_single_pixel(self):
        m = np.zeros((5, 5), dtype=bool)
        m[2, 2] = True
        assert spatial.f_proximity(mask_image(m), CFG) == [0.0, 0.0, 0.0, 1.0]

    def test_brute_force_distances(self, rng):
        m = rng.uniform(size=(12, 15)) < 0.2
        ys, xs = np.nonzero(m)
        d = [math.hypot(ys[a] - ys[b], xs[a] - xs[b]) for a in range(len(ys)) for b in range(a + 1, len(ys))]
        eu = spatial.f_proximity(mask_image(m), CFG)[0]
        assert eu == pytest.approx(np.mean(d) / math.hypot(12, 15))

    def test_cluster_below_scatter(self):
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            cluster = np.zeros((64, 64), dtype=bool)
            y, x = rng.integers(0, 61, 2)
            cluster[y : y + 3, x : x + 3] = True
            scatter = np.zeros((64, 64), dtype=bool)
            scatter.flat[rng.choice(64 * 64, 9, replace=False)] = True
            cfg = CFG.with_(seed=seed)
            wins += spatial.f_proximity(mask_image(cluster), cfg)[3] < spatial.f_proximity(mask_image(scatter), cfg)[3]
        assert wins >= 95


class TestConnectivity:
    def test_single_pixel(self):
        m = np.zeros((6, 8), dtype=bool)
        m[3, 3] = True
        r4, r8, n8 = spatial.f_connectivity(mask_image(m), CFG.with_(conn_A_min=1))
        assert r4 == r8 == 1 / 48 and n8 == 1 / 48

    def test_blob(self):
        m = np.zeros((8, 8), dtype=bool)
        m[2:5, 2:5] = True
        assert spatial.f_connectivity(mask_image(m), CFG)[:2] == [0.0, 0.0]

    def test_empty(self):
        assert spatial.f_connectivity(make_image(np.full((4, 4), 99)), CFG) == [0.0, 0.0, 0.0]

    @pytest.mark.parametrize("conn", [4, 8])
    def test_against_bfs(self, rng, conn):
        m = rng.uniform(size=(20, 20)) < 0.35
        ours = sorted(spatial.component_sizes(m, conn).tolist())
        assert ours == bfs_component_sizes(m, conn)


class TestCentroid:
    def test_plus_sign(self):
        m = np.zeros((9, 9), dtype=bool)
        m[4, 2:7] = True
        m[2:7, 4] = True
        cx, cy, _ = spatial.f_centroid(mask_image(m))
        assert cx == 0.5 and cy == 0.5

    def test_single_pixel_spread(self):
        m = np.zeros((5, 5), dtype=bool)
        m[1, 3] = True
        assert spatial.f_centroid(mask_image(m))[2] == 0

    def test_empty(self):
        assert spatial.f_centroid(make_image(np.full((3, 3), 80))) == [0.5, 0.5, 0.0]

    def test_uniform_spread(self):
        # Monte-Carlo oracle for the mean distance to the centroid of uniform points.
        vals = []
        for seed in range(20):
            m = np.random.default_rng(seed).uniform(size=(64, 64)) < 0.1
            vals.append(spatial.f_centroid(mask_image(m))[2])
        assert np.mean(vals) == pytest.approx(0.2705, abs=0.02)


class TestTotalVariation:
    def test_empty(self):
        assert spatial.f_tv(make_image(np.full((5, 5), 70)), CFG) == [0.0] * 9

    def test_full_column(self):
        m = np.zeros((6, 10), dtype=bool)
        m[:, 4] = True
        out = spatial.f_tv(mask_image(m), CFG)
        assert out[1] == 2.0 and out[0] == 0.0
        assert out[4] == pytest.approx(6 / 10) and out[3] == pytest.approx(1.0)

    def test_combined(self, rng):
        m = rng.uniform(size=(10, 10)) < 0.3
        out = spatial.f_tv(mask_image(m), CFG)
        assert out[6] == pytest.approx(math.sqrt(sum(v * v for v in out[:3])))
        assert out[7] == pytest.approx(math.sqrt(sum(v * v for v in out[3:6])))
        assert out[8] == pytest.approx(out[6] + out[7])


class TestPointLoss:
    def test_empty(self):
        assert spatial.f_pointloss_spread(make_image(np.full((3, 3), 9))) == [0.0]

    def test_horizontal_pair(self):
        m = np.zeros((10, 10), dtype=bool)
        m[3, 2] = m[3, 8] = True
        assert spatial.f_pointloss_spread(mask_image(m))[0] == pytest.approx(3 / math.sqrt(200))

    def test_scatter_exceeds_blob(self):
        cfg = SynthConfig()
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            blob = np.zeros((64, 64), dtype=bool)
            y, x = rng.integers(4, 60, 2)
            blob[y - 3 : y + 3, x - 3 : x + 3] = True
            scatter = np.zeros((64, 64), dtype=bool)
            scatter.flat[rng.choice(64 * 64, int(blob.sum()), replace=False)] = True
            a = spatial.f_pointloss_spread(mask_image(scatter))[0]
            b = spatial.f_pointloss_spread(mask_image(blob))[0]
            wins += a > b
        assert cfg and wins >= 95


@settings(max_examples=60, deadline=None)
@given(masks, st.integers(0, 11), st.integers(0, 11))
def test_translation_invariance(points, dy, dx):
    a = mask_image(place(points))
    b = mask_image(place(points, dy=dy, dx=dx))
    assert spatial.f_tv(a, CFG) == spatial.f_tv(b, CFG)
    assert spatial.f_connectivity(a, CFG) == spatial.f_connectivity(b, CFG)
    assert spatial.f_proximity(a, CFG)[:3] == spatial.f_proximity(b, CFG)[:3]
    assert spatial.f_pointloss_spread(a) == spatial.f_pointloss_spread(b)
    ca, cb = spatial.f_centroid(a), spatial.f_centroid(b)
    if points:
        assert cb[0] - ca[0] == pytest.approx(dx / 24, abs=1e-12)
        assert cb[1] - ca[1] == pytest.approx(dy / 24, abs=1e-12)
        assert cb[2] == ca[2]


class TestHistLikelihood:
    def test_no_reference(self):
        assert distribution.f_hist_likelihood(make_image([[0]]), None) == [0.0] * 7 + [0.5]

    def test_identical_models(self):
        pdfs = same_family_set(gmm_pdf([100.0]))
        r = manual_ref(pdfs, pdfs)
        out = distribution.f_hist_likelihood(make_image(np.arange(16).reshape(4, 4) * 10), r)
        assert out[0] == 0 and out[7] == 0.5

    def test_cubes_negative(self):
        pdfs = same_family_set(gmm_pdf([100.0]))
        out = distribution.f_hist_likelihood(make_image(np.full((4, 4), 30)), manual_ref(pdfs, pdfs))
        assert all(v < 0 for v in out[1:7])

    def test_tp_weibull_pixels(self):
        tp_w = FittedPdf("weibull", {"k": 2.0, "lam": 60.0, "shift": 1.0})
        fp_w = FittedPdf("weibull", {"k": 5.0, "lam": 160.0, "shift": 1.0})
        g = FittedPdf("gumbel", {"mu": 100.0, "beta": 20.0})
        r = manual_ref({"weibull": tp_w, "gumbel": g, "gmm": gmm_pdf([100.0])},
                       {"weibull": fp_w, "gumbel": g, "gmm": gmm_pdf([100.0])}, "weibull", "weibull")
        wins = 0
        for seed in range(100):
            x = 60.0 * np.random.default_rng(seed).weibull(2.0, 256) - 1.0
            img = make_image(np.clip(np.rint(x), 0, 255).reshape(16, 16))
            out = distribution.f_hist_likelihood(img, r)
            wins += out[1] > out[2]
        assert wins >= 90


class TestHistDistance:
    def test_no_reference(self):
        assert distribution.f_hist_distance(make_image([[0]]), None) == [0.5] * 6

    def test_equal_to_tp_median(self, rng):
        img = make_image(rng.integers(0, 256, (16, 16)))
        h = histogram(img, 256)
        pdfs = same_family_set(gmm_pdf([100.0]))
        other = histogram(make_image(np.full((16, 16), 7)), 256)
        out = distribution.f_hist_distance(img, manual_ref(pdfs, pdfs, tp_hist=h, fp_hist=other))
        assert out[0] == 0 and out[2] == pytest.approx(1) and out[4] == pytest.approx(1)

    def test_tp_like_closer(self, ref):
        data = gen_dataset(50, SynthConfig(width=32, height=32), seed=77)
        tp = [s.image for s in data if s.label == 1]
        wins = sum(distribution.f_hist_distance(img, ref)[0] <= distribution.f_hist_distance(img, ref)[1]
                   for img in tp)
        # The synthetic classes share a background, so histograms differ only in the lost mass.
        assert wins >= 0.9 * len(tp)


class TestSsim:
    def test_identical_neighbour(self, rng):
        u = rng.integers(0, 256, (16, 32))
        u[:, 16:] = u[:, :16]
        assert basic.f_ssim_neighbors(make_image(u), Roi(16, 0, 16, 16))[0] == pytest.approx(1.0)

    def test_symmetric(self, rng):
        x, y = rng.integers(0, 256, (2, 20, 20))
        assert basic.ssim(x, y, 255) == pytest.approx(basic.ssim(y, x, 255))

    def test_noise_below_identical(self, rng):
        stripes = np.tile((np.arange(16) // 2 % 2) * 200 + 20, (16, 1))
        same = np.hstack([stripes, stripes])
        noisy = np.hstack([stripes, rng.integers(0, 256, (16, 16))])
        a = basic.f_ssim_neighbors(make_image(same), Roi(16, 0, 16, 16))[0]
        b = basic.f_ssim_neighbors(make_image(noisy), Roi(16, 0, 16, 16))[0]
        assert b < a

    def test_no_neighbours(self, rng):
        assert basic.f_ssim_neighbors(make_image(rng.integers(0, 256, (8, 8)))) == [0.0]

    def test_small_border_strip_skipped(self, rng):
        u = make_image(rng.integers(0, 256, (10, 10)))
        pairs = list(basic.neighbor_pairs(u, Roi(2, 0, 8, 10)))
        assert pairs == []  # left strip is 2 wide (<50%), no other side fits


class TestBasicStats:
    def test_constant(self):
        out = basic.f_basic_stats(make_image(np.full((6, 6), 90)))
        assert out[0] == 0 and out[5] == 0 and out[6] == 0 and out[7] == 0

    def test_two_value(self):
        u = np.zeros((4, 4), dtype=np.int64)
        u[:, 2:] = 255
        out = basic.f_basic_stats(make_image(u))
        assert out[1] * 255 == pytest.approx(127.5)
        assert out[3] * 255 == pytest.approx(127.5)
        assert out[4] * 255 == 255

    def test_cv_cross_check(self, rng):
        u = rng.integers(1, 256, (9, 9))
        s = summary_stats(u.ravel())
        assert basic.f_basic_stats(make_image(u))[6] == pytest.approx(s.std / s.mean)


class TestTexture:
    def test_constant(self):
        ent, _, hom, _, kurt = basic.f_texture(make_image(np.full((5, 5), 40)))
        assert ent == 0 and kurt == 0 and hom == 1

    def test_uniform_histogram(self):
        ent = basic.f_texture(make_image(np.arange(256).reshape(16, 16)))[0]
        assert ent == pytest.approx(8.0)

    def test_normal_kurtosis(self):
        x = np.random.default_rng(3).normal(128, 20, (100, 100))
        k = basic.f_texture(make_image(np.clip(np.rint(x), 0, 255)))[4]
        assert k == pytest.approx(3.0, abs=0.3)


class TestGabor:
    def test_constant(self):
        e, v = filters.f_gabor(make_image(np.full((20, 20), 120)), CFG)
        assert e < 1e-20 and v < 1e-20

    def test_horizontal_stripes(self):
        lam = CFG.gabor_lambda
        y = np.arange(48)[:, None]
        u = np.rint(127 + 100 * np.cos(2 * np.pi * y / lam)) * np.ones((1, 48))
        r0, _, r90, _ = filters.gabor_responses(make_image(u), CFG)
        assert np.mean(r0**2) > 10 * np.mean(r90**2)

    def test_offset_invariant(self, rng):
        u = rng.integers(0, 200, (24, 24))
        a = filters.f_gabor(make_image(u), CFG)
        b = filters.f_gabor(make_image(u + 40), CFG)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)

    def test_zero_mean_kernel(self):
        k = filters.gabor_kernel(0.3, 8.0, 4.48, 0.5, 0.0)
        assert k.shape == (17, 17) and abs(k.sum()) < 1e-12


class TestHomomorphic:
    def test_constant(self):
        assert filters.f_homomorphic(make_image(np.full((16, 16), 100)), CFG) == [0.0]

    def test_bounds_and_texture(self, rng):
        tex = filters.f_homomorphic(make_image(rng.integers(0, 256, (32, 32))), CFG)[0]
        ramp = filters.f_homomorphic(make_image(np.tile(np.arange(32) * 2 + 50, (32, 1))), CFG)[0]
        assert 0 <= ramp <= 8 and 0 <= tex <= 8
        assert tex > ramp


class TestHogField:
    def test_constant(self):
        assert filters.f_hog_field(make_image(np.full((32, 32), 10)), CFG) == [0.0] * 5

    def test_small_image(self):
        assert filters.f_hog_field(make_image(np.arange(16).reshape(4, 4)), CFG) == [0.0] * 5

    def test_radial_field(self):
        y, x = np.mgrid[-4:5, -4:5].astype(float)
        div1, _, curl1, _ = filters.field_features(x, y)
        assert div1 > 1.5 and curl1 < 1e-12

    def test_rotational_field(self):
        y, x = np.mgrid[-4:5, -4:5].astype(float)
        div1, _, curl1, _ = filters.field_features(-y, x)
        assert curl1 > 1.5 and div1 < 1e-12

    def test_orientation_variance(self):
        phi = np.full((3, 3), 0.4)
        assert filters.orientation_variance(phi, np.ones((3, 3))) == pytest.approx(0, abs=1e-12)
        phi = np.array([[0.0, math.pi / 2]])
        assert filters.orientation_variance(phi, np.ones((1, 2))) == pytest.approx(1.0)


class TestLbp:
    def test_constant(self):
        codes = filters.lbp_codes(np.full((5, 5), 3))
        assert np.all(codes == 255)
        assert filters.f_lbp(make_image(np.full((8, 8), 3)), CFG) == [0.0]

    def test_bounds(self, rng):
        e = filters.f_lbp(make_image(rng.integers(0, 256, (20, 20))), CFG)[0]
        assert 0 <= e <= 8

    def test_monotone_remap(self, rng):
        u = rng.permutation(400).reshape(20, 20).astype(float)
        g = np.sqrt(u) * 37.0 + 2.0  # strictly increasing
        np.testing.assert_array_equal(filters.lbp_codes(u), filters.lbp_codes(g))


class TestCooccurrence:
    def test_constant(self):
        out = cooccurrence.f_cooccurrence(make_image(np.full((10, 10), 60)), CFG)
        assert out == list(cooccurrence.CONSTANT_METRICS) * 6

    def test_entropy_bound(self, rng):
        img = make_image(rng.integers(0, 256, (20, 20)))
        out = cooccurrence.f_cooccurrence(img, CFG)
        for k in range(6):
            assert out[5 * k + 2] <= 2 * math.log2(32) + 1e-9

    def test_checkerboard(self):
        u = (np.indices((8, 8)).sum(axis=0) % 2) * 255
        q = cooccurrence.quantize(u, 32, 8)
        assert set(np.unique(q)) == {0, 31}
        p = cooccurrence.glcm(q, [(0, 1)], 32)
        assert p[0, 0] == 0 and p[31, 31] == 0
        assert cooccurrence.matrix_metrics(p)[3] == pytest.approx(1 / 32)

    def test_glcm_against_loops(self, rng):
        q = rng.integers(0, 6, (7, 9))
        ours = cooccurrence.glcm(q, cooccurrence.GLCM_OFFSETS, 6)
        np.testing.assert_allclose(ours, loop_glcm(q, cooccurrence.GLCM_OFFSETS, 6))

    def test_radial_offsets(self):
        assert cooccurrence.radial_offsets(1) == [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)]
        assert cooccurrence.radial_offsets(2)[1] == (-1, 1)


class TestRegistry:
    def test_size(self):
        assert sum(ARITIES) == 98
        assert len(registry()) == 98
        assert len(set(feature_names())) == 98
        assert [d.index for d in registry()] == list(range(98))

    def test_extract_all_finite_and_deterministic(self, ref):
        img = gen_dataset(1, SynthConfig(width=40, height=40), seed=3)[1].image
        a = extract_all(img, None, ref, CFG)
        b = extract_all(img, None, ref, CFG)
        assert len(a) == 98 and np.all(np.isfinite(a.values))
        np.testing.assert_array_equal(a.values, b.values)

    def test_permuted_categories(self, ref):
        img = gen_dataset(1, SynthConfig(width=32, height=32), seed=4)[0].image
        base = extract_all(img, None, ref, CFG).as_dict()
        cats = tuple(reversed(DEFAULT_CATEGORIES))
        perm = extract_all(img, None, ref, CFG.with_(categories=cats))
        assert list(perm.names) == feature_names(CFG.with_(categories=cats))
        assert perm.as_dict() == base

    def test_roi_crop(self, rng):
        u = rng.integers(0, 256, (30, 30))
        full = extract_all(make_image(u[5:20, 5:20]), None, None, CFG).as_dict()
        roi = extract_all(make_image(u), Roi(5, 5, 15, 15), None, CFG).as_dict()
        full.pop("ssim_max")
        roi.pop("ssim_max")
        assert roi == full

    def test_resample(self, rng):
        img = make_image(rng.integers(0, 256, (40, 40)))
        v = extract_all(img, None, None, CFG.with_(resample=(20, 20)))
        assert np.all(np.isfinite(v.values))

    def test_unknown_config_key(self):
        with pytest.raises(KeyError):
            ExtractorConfig.from_dict({"nope": 1})


class TestReference:
    def test_identical_images(self):
        img = gen_dataset(1, SynthConfig(width=32, height=32), seed=5)[1].image
        noise = gen_dataset(1, SynthConfig(width=32, height=32), seed=5)[0].image
        r = build_reference_models([(img, 1), (img, 1), (noise, 0)], CFG)
        np.testing.assert_array_equal(r.tp_median_hist.bins, histogram(img, 256).bins)

    def test_median_robust(self, rng):
        imgs = [make_image(rng.integers(100, 110, (8, 8))) for _ in range(4)]
        hs = [histogram(i, 256) for i in imgs]
        out = make_image(np.full((8, 8), 250))
        a = median_histogram(hs[:3] + [hs[0]])
        b = median_histogram(hs[:3] + [histogram(out, 256)])
        assert a.bins[250] == 0 and b.bins[250] == 0

    def test_priors_and_round_trip(self, ref):
        assert ref.priors == (0.35, 0.65)
        back = ReferenceModels.from_dict(ref.to_dict())
        assert back.to_dict() == ref.to_dict()

    def test_empty_class(self):
        img = make_image(np.full((8, 8), 100))
        with pytest.raises(EmptyClass):
            build_reference_models([(img, 1), (img, 1)], CFG)

    def test_moments(self):
        a = mask_image(np.eye(8, dtype=bool))  # 8 lost
        b = mask_image(np.zeros((8, 8), dtype=bool))
        r = build_reference_models([(a, 1), (b, 1), (b, 0)], CFG)
        assert r.loss_moments == (4.0, 16.0, 0.0, 0.0)


def test_config_round_trip():
    cfg = ExtractorConfig(priors=(0.4, 0.6), resample=(32, 32), seed=3)
    assert ExtractorConfig.from_dict(cfg.to_dict()) == cfg
    assert replace(cfg, seed=4).seed == 4
