import numpy as np
import pytest

from depthstill.geometry import EulerAngles, FlowField, RigidMotion, flow_from_depth, intrinsics_from_dims
from depthstill.warp import (
    InstanceSet,
    WarpResult,
    bilinear_sample,
    composite_instance_flow,
    forward_warp,
    hole_masks,
    photometric_residuals,
    select_largest_instances,
    synthesize_pair,
)

import oracles


def _labels_with_sizes(sizes, shape=(20, 20)):
    labels = np.zeros(shape, np.int32).ravel()
    pos = 0
    for label, n in sizes.items():
        labels[pos : pos + n] = label
        pos += n
    return InstanceSet(labels.reshape(shape))


class TestSelectLargest:
    def test_keep_none(self):
        inst = _labels_with_sizes({1: 50, 2: 200, 3: 10})
        assert select_largest_instances(inst, 0).count == 0

    def test_keep_two_largest(self):
        inst = _labels_with_sizes({1: 50, 2: 200, 3: 10})
        out = select_largest_instances(inst, 2)
        # size 200 (orig 2) becomes 1, size 50 (orig 1) becomes 2, orig 3 dropped
        assert np.array_equal(out.labels == 1, inst.labels == 2)
        assert np.array_equal(out.labels == 2, inst.labels == 1)
        assert not np.any((out.labels != 0) & (inst.labels == 3))
        assert out.count == 2

    def test_keep_all_renumbers_by_size(self):
        inst = _labels_with_sizes({4: 5, 9: 30, 2: 17})
        out = select_largest_instances(inst, 10)
        assert np.array_equal(out.labels == 1, inst.labels == 9)
        assert np.array_equal(out.labels == 2, inst.labels == 2)
        assert np.array_equal(out.labels == 3, inst.labels == 4)

    def test_ties_prefer_lower_label(self):
        inst = _labels_with_sizes({5: 10, 3: 10})
        out = select_largest_instances(inst, 1)
        assert np.array_equal(out.labels == 1, inst.labels == 3)


class TestCompositeFlow:
    K = intrinsics_from_dims(32, 24)

    def test_all_identity(self):
        labels = np.zeros((24, 32), np.int32)
        labels[5:10, 5:10] = 1
        flow, _ = composite_instance_flow(
            np.full((24, 32), 5.0), self.K, RigidMotion.identity(), InstanceSet(labels), [(1, RigidMotion.identity())]
        )
        assert np.all(flow.uv == 0)

    def test_object_translation_only_on_object(self):
        labels = np.zeros((24, 32), np.int32)
        labels[5:10, 8:20] = 1
        obj = RigidMotion(np.eye(3), [0.5, 0, 0])
        flow, _ = composite_instance_flow(np.full((24, 32), 10.0), self.K, RigidMotion.identity(), InstanceSet(labels), [(1, obj)])
        on = labels == 1
        np.testing.assert_allclose(flow.u[on], self.K.fx * 0.5 / 10.0, atol=1e-12)
        assert np.all(flow.uv[~on] == 0)
        assert np.all(flow.v == 0)

    def test_no_instances_equals_single_motion(self, rng):
        depth = rng.uniform(1, 100, (24, 32))
        T = RigidMotion.from_euler(EulerAngles(0.1, -0.05, 0.02), [0.1, 0.2, -0.1])
        a, za = composite_instance_flow(depth, self.K, T)
        b, zb = flow_from_depth(depth, self.K, T)
        assert np.array_equal(a.uv, b.uv) and np.array_equal(a.valid, b.valid) and np.array_equal(za, zb)

    def test_unknown_label(self):
        labels = np.zeros((24, 32), np.int32)
        labels[0, 0] = 1
        with pytest.raises(ValueError):
            composite_instance_flow(np.ones((24, 32)), self.K, RigidMotion.identity(), InstanceSet(labels), [(2, RigidMotion.identity())])


class TestForwardWarp:
    def test_zero_flow(self, rng):
        img = rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)
        res = forward_warp(img, FlowField.zeros(12, 16), rng.uniform(1, 10, (12, 16)))
        assert np.array_equal(res.image1, img)
        assert not res.collision.any()
        assert res.hole.all()

    def test_nearest_depth_wins(self):
        img = np.array([[10, 200, 0]], np.uint8)
        uv = np.zeros((1, 3, 2))
        uv[0, 0, 0] = 1.0  # pixel 0 -> pixel 1
        z = np.array([[5.0, 9.0, 1.0]])
        res = forward_warp(img, FlowField(uv, np.ones((1, 3), bool)), z)
        assert res.image1[0, 1] == 10
        assert res.collision[0, 1]
        assert res.zbuffer[0, 1] == 5.0
        assert not res.hole[0, 0]

    def test_equal_depth_tie_goes_to_lower_index(self):
        img = np.array([[10, 200]], np.uint8)
        uv = np.zeros((1, 2, 2))
        uv[0, 1, 0] = -1.0
        res = forward_warp(img, FlowField(uv, np.ones((1, 2), bool)), np.ones((1, 2)))
        assert res.image1[0, 0] == 10

    def test_uniform_shift(self, rng):
        img = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        flow = FlowField(np.dstack([np.full((20, 30), 3.712), np.zeros((20, 30))]), np.ones((20, 30), bool))
        res = forward_warp(img, flow, np.full((20, 30), 10.0))
        assert np.array_equal(res.image1[:, 4:], img[:, :-4])
        assert not res.hole[:, :4].any() and res.hole[:, 4:].all()
        assert not res.collision.any()

    def test_half_pixel_rounds_away_from_zero(self):
        img = np.arange(5, dtype=np.uint8)[None, :] + 1
        uv = np.zeros((1, 5, 2))
        uv[0, 2, 0] = 0.5  # 2.5 -> 3
        uv[0, 1, 0] = -0.5  # 0.5 -> 1
        uv[0, 0, 0] = -0.5  # -0.5 -> -1, off the image
        res = forward_warp(img, FlowField(uv, np.ones((1, 5), bool)), np.arange(1.0, 6.0)[None, :])
        assert res.collision[0, 3] and res.image1[0, 3] == 3
        assert not res.collision[0, 1] and res.image1[0, 1] == 2
        assert not res.hole[0, 0] and not res.hole[0, 2]

    def test_invalid_sources_not_splatted(self):
        img = np.full((2, 2), 9, np.uint8)
        valid = np.array([[True, False], [True, True]])
        res = forward_warp(img, FlowField(np.zeros((2, 2, 2)), valid), np.ones((2, 2)))
        assert not res.hole[0, 1]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            forward_warp(np.zeros((3, 3), np.uint8), FlowField.zeros(3, 4), np.ones((3, 4)))

    def test_matches_brute_force_splat(self, rng):
        for _ in range(30):
            h, w = 16, 16
            img = rng.integers(0, 256, (h, w), dtype=np.uint8)
            uv = rng.normal(0, 2.5, (h, w, 2))
            valid = rng.random((h, w)) < 0.9
            z = rng.uniform(1, 10, (h, w))
            res = forward_warp(img, FlowField(uv, valid), z)
            im1, counts, zbuf, winner = oracles.splat(img.tolist(), uv.tolist(), valid.tolist(), z.tolist())
            counts = np.array(counts)
            assert np.array_equal(res.collision, counts >= 2)
            assert np.array_equal(res.hole, counts >= 1)
            assert np.array_equal(res.zbuffer, np.array(zbuf))
            assert np.array_equal(res.source_index, np.array(winner))
            covered = counts >= 1
            assert np.array_equal(res.image1[covered], np.array([[c if c is not None else 0 for c in r] for r in im1])[covered])


def _warp(collision, hole):
    shape = collision.shape
    return WarpResult(np.zeros(shape, np.uint8), collision, hole, np.ones(shape), np.zeros(shape, np.int64))


class TestHoleMasks:
    def test_no_collisions(self, rng):
        hole = rng.random((10, 10)) < 0.5
        H, Hp = hole_masks(_warp(np.zeros((10, 10), bool), hole))
        assert np.array_equal(H, hole) and np.array_equal(Hp, hole)

    def test_single_collision(self):
        M = np.zeros((9, 9), bool)
        M[4, 4] = True
        H = np.ones((9, 9), bool)
        _, Hp = hole_masks(_warp(M, H), 3)
        expected = np.ones((9, 9), bool)
        expected[3:6, 3:6] = False
        expected[4, 4] = True
        assert np.array_equal(Hp, expected)

    def test_saturated(self):
        full = np.ones((6, 6), bool)
        _, Hp = hole_masks(_warp(full, full))
        assert Hp.all()

    def test_random_algebra(self, rng):
        for _ in range(200):
            M = rng.random((12, 12)) < 0.15
            H = rng.random((12, 12)) < 0.8
            H_out, Hp = hole_masks(_warp(M, H), 3)
            P = np.array(oracles.dilate(M.tolist(), 3)) == M
            assert np.array_equal(H_out, H)
            assert np.array_equal(Hp, H & P)
            assert np.all(Hp <= H)


class TestSynthesize:
    def test_identity_end_to_end(self, rng):
        img = rng.integers(0, 256, (24, 32, 3), dtype=np.uint8)
        K = intrinsics_from_dims(32, 24)
        s = synthesize_pair(img, rng.uniform(1, 100, (24, 32)), K, RigidMotion.identity())
        assert np.array_equal(s.image1, img)
        assert np.all(s.flow.uv == 0)
        assert s.hole_prime.all()

    def test_translation_shift_with_inpainted_band(self, rng):
        img = rng.integers(0, 256, (48, 64, 3), dtype=np.uint8)
        K = intrinsics_from_dims(64, 48)
        T = RigidMotion(np.eye(3), [10 * 4.0 / K.fx, 0, 0])  # flow ~ 4 px at depth 10
        s = synthesize_pair(img, np.full((48, 64), 10.0), K, T)
        shift = int(round(s.flow.u[0, 0]))
        assert shift == 4
        np.testing.assert_allclose(s.flow.u, s.flow.u[0, 0])
        assert np.array_equal(s.image1[:, shift:], img[:, :-shift])
        assert not s.hole[:, :shift].any()
        band = s.image1[:, :shift].astype(int)
        # each band row is filled from its own row's nearby content
        assert band.min() >= 0 and band.max() <= 255

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, (40, 50, 3), dtype=np.uint8)
        depth = rng.uniform(1, 100, (40, 50))
        K = intrinsics_from_dims(50, 40)
        T = RigidMotion.from_euler(EulerAngles(0.1, 0.05, -0.1), [0.2, -0.1, 0.15])
        a = synthesize_pair(img, depth, K, T)
        b = synthesize_pair(img, depth, K, T)
        assert np.array_equal(a.image1, b.image1) and np.array_equal(a.hole_prime, b.hole_prime)


def test_bilinear_sample_exact_on_grid_and_linear_between():
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    np.testing.assert_allclose(bilinear_sample(img, np.array([2.0]), np.array([1.0]))[:, 0], [6])
    np.testing.assert_allclose(bilinear_sample(img, np.array([0.5]), np.array([0.5]))[:, 0], [2.5])


def test_photometric_residuals_zero_for_integer_shift(rng):
    img = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
    flow = FlowField(np.dstack([np.full((20, 30), 2.0), np.zeros((20, 30))]), np.ones((20, 30), bool))
    res = forward_warp(img, flow, np.ones((20, 30)))
    r = photometric_residuals(img, res.image1, flow, res.collision, res.hole)
    assert r.shape == (20 * 28, 3)
    assert np.all(r == 0)
