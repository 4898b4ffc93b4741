import numpy as np
import pytest
import torch
from scipy.ndimage import gaussian_filter

from mfqe.config import McConfig
from mfqe.enhancement import mc_parameter_count, module_parameter_count
from mfqe.motion import (
    McSubnet, MotionError, MotionField, MotionStack, estimate_motion, upsample_motion,
    warp_bilinear, warp_tensor,
)
from mfqe.validation import AlignmentError
from mfqe.video import Frame


def naive_warp(plane, mv_x, mv_y):
    """Per-pixel clamp-to-edge bilinear sampling."""
    height, width = plane.shape
    out = np.zeros_like(plane)
    for y in range(height):
        for x in range(width):
            sx = min(max(x + mv_x[y, x], 0.0), width - 1.0)
            sy = min(max(y + mv_y[y, x], 0.0), height - 1.0)
            x0, y0 = int(np.floor(sx)), int(np.floor(sy))
            x1, y1 = min(x0 + 1, width - 1), min(y0 + 1, height - 1)
            fx, fy = sx - x0, sy - y0
            top = (1 - fx) * plane[y0, x0] + fx * plane[y0, x1]
            bottom = (1 - fx) * plane[y1, x0] + fx * plane[y1, x1]
            out[y, x] = (1 - fy) * top + fy * bottom
    return out


def test_zero_motion_is_an_exact_identity(rng):
    plane = rng.random((9, 13))
    warped = warp_bilinear(Frame(luma=plane), MotionField.zeros(9, 13))
    np.testing.assert_array_equal(warped.luma, plane)


def test_integer_shift_clamps_at_the_edge(rng):
    plane = rng.random((4, 6))
    field = MotionField(mv_x=np.ones((4, 6)), mv_y=np.zeros((4, 6)))
    warped = warp_bilinear(Frame(luma=plane), field).luma
    np.testing.assert_allclose(warped[:, :-1], plane[:, 1:])
    np.testing.assert_allclose(warped[:, -1], plane[:, -1])


def test_fractional_motion_matches_naive_sampling(rng):
    plane = rng.random((7, 8))
    mv_x = rng.uniform(-3, 3, size=(7, 8))
    mv_y = rng.uniform(-3, 3, size=(7, 8))
    warped = warp_bilinear(Frame(luma=plane), MotionField(mv_x=mv_x, mv_y=mv_y)).luma
    np.testing.assert_allclose(warped, naive_warp(plane, mv_x, mv_y), atol=1e-12)


def test_warp_is_differentiable(rng):
    frame = torch.tensor(rng.random((1, 1, 5, 6)), dtype=torch.float64, requires_grad=True)
    # Fractional parts stay well away from integers where the derivative jumps
    mv = torch.tensor(rng.uniform(0.2, 0.4, size=(1, 2, 5, 6)), dtype=torch.float64,
                      requires_grad=True)
    assert torch.autograd.gradcheck(warp_tensor, (frame, mv), eps=1e-6, atol=1e-5)


@pytest.mark.parametrize('seed', range(20))
def test_warp_gradients_with_large_and_negative_motion(seed):
    rng = np.random.default_rng(seed)
    frame = torch.tensor(rng.random((1, 1, 8, 8)), requires_grad=True)
    # Integer parts in [-6, 6]; fractional parts stay clear of the derivative jumps
    whole = rng.integers(-6, 7, size=(1, 2, 8, 8))
    mv = torch.tensor(whole + rng.uniform(0.2, 0.8, size=whole.shape), requires_grad=True)
    assert torch.autograd.gradcheck(warp_tensor, (frame, mv), eps=1e-6, atol=1e-5)


def test_warp_rejects_bad_shapes():
    with pytest.raises(MotionError):
        warp_tensor(torch.zeros(1, 1, 4, 4), torch.zeros(1, 3, 4, 4))
    with pytest.raises(AlignmentError):
        warp_tensor(torch.zeros(1, 1, 4, 4), torch.zeros(1, 2, 4, 5))
    with pytest.raises(AlignmentError):
        warp_bilinear(Frame(luma=np.zeros((4, 4))), MotionField.zeros(4, 5))


def test_motion_planes_must_match():
    with pytest.raises(MotionError):
        MotionField(mv_x=np.zeros((2, 2)), mv_y=np.zeros((2, 3)))


def test_upsample_motion_rescales_values():
    mv = torch.ones(1, 2, 3, 4)
    enlarged = upsample_motion(mv, 4)
    assert enlarged.shape == (1, 2, 12, 16)
    torch.testing.assert_close(enlarged, torch.full_like(enlarged, 4.0))
    assert upsample_motion(mv, 1) is mv


def test_motion_field_file_round_trip(tmp_path):
    field = MotionField(mv_x=np.full((3, 4), 1.5), mv_y=np.full((3, 4), -0.25))
    path = tmp_path / 'mv.bin'
    field.save(str(path))
    loaded = MotionField.load(str(path), width=4, height=3)
    np.testing.assert_array_equal(loaded.mv_x, field.mv_x)
    np.testing.assert_array_equal(loaded.mv_y, field.mv_y)
    np.testing.assert_allclose(loaded.magnitude(), np.hypot(1.5, 0.25))


def test_motion_field_load_checks_size(tmp_path):
    path = tmp_path / 'mv.bin'
    MotionField.zeros(3, 4).save(str(path))
    with pytest.raises(MotionError, match='expected'):
        MotionField.load(str(path), width=5, height=3)


def test_stack_scale_and_bound():
    stack = MotionStack(2, (2, 2, 1, 1, 1), r_max=16.0)
    assert stack.scale == 4
    assert stack.bound == 4.0
    with pytest.raises(MotionError):
        MotionStack(2, (2, 2, 1))


def test_mc_subnet_outputs_bounded_full_resolution_fields(small_mc):
    model = McSubnet(small_mc)
    reference = torch.rand(2, 1, 16, 24)
    target = torch.rand(2, 1, 16, 24)
    out = model(reference, target)
    for field in (out.m4, out.m2, out.m_full):
        assert field.shape == (2, 2, 16, 24)
        assert field.abs().max() <= small_mc.r_max
    assert out.compensated.shape == reference.shape


def test_zero_motion_returns_the_reference(small_mc):
    model = McSubnet(small_mc)
    model.zero_motion()
    reference = torch.rand(1, 1, 8, 8)
    out = model(reference, torch.rand(1, 1, 8, 8))
    torch.testing.assert_close(out.compensated, reference, rtol=0, atol=0)
    assert not out.m_full.any()


def test_mc_subnet_size_requirement(small_mc):
    model = McSubnet(small_mc)
    assert model.required_multiple == 4
    with pytest.raises(MotionError, match='multiple of 4'):
        model(torch.rand(1, 1, 10, 8), torch.rand(1, 1, 10, 8))


def test_estimate_motion(small_mc, rng):
    target = Frame(luma=rng.random((8, 12)))
    reference = Frame(luma=rng.random((8, 12)))
    m4, m2, m_full, warped = estimate_motion(McSubnet(small_mc), target, reference)
    assert m4.shape == m2.shape == m_full.shape == (8, 12)
    assert warped.luma.shape == (8, 12)


def test_estimate_motion_rejects_size_mismatch(small_mc, rng):
    with pytest.raises(AlignmentError):
        estimate_motion(McSubnet(small_mc), Frame(luma=rng.random((8, 8))),
                        Frame(luma=rng.random((8, 12))))


@pytest.mark.parametrize('config', [McConfig(), McConfig(filters=8, kernel_size=5)])
def test_mc_parameter_formula_matches_module(config):
    assert mc_parameter_count(config) == module_parameter_count(McSubnet(config))


def test_default_mc_parameter_count():
    assert mc_parameter_count(McConfig()) == 50_850


def smooth_texture(rng, size=96):
    texture = gaussian_filter(rng.random((size, size)), sigma=3.0)
    return (texture - texture.min()) / (texture.max() - texture.min())


def shifted_pair(texture, top, left, shift_x, shift_y, size=32):
    """Reference crop and a target with target(y, x) = reference(y + shift_y, x + shift_x)."""
    reference = texture[top:top + size, left:left + size]
    target = texture[top + shift_y:top + shift_y + size, left + shift_x:left + shift_x + size]
    return reference, target


@pytest.mark.slow
def test_mc_subnet_learns_a_global_shift(small_mc, rng):
    shift_x, shift_y = 2, -1
    texture = smooth_texture(rng)
    model = McSubnet(small_mc)
    model.zero_motion()
    optimizer = torch.optim.Adam(model.parameters(), lr=3e-3)
    for _ in range(400):
        pairs = [shifted_pair(texture, *rng.integers(8, 56, size=2), shift_x, shift_y) for _ in range(4)]
        reference = torch.as_tensor(np.stack([p[0] for p in pairs])[:, None], dtype=torch.float32)
        target = torch.as_tensor(np.stack([p[1] for p in pairs])[:, None], dtype=torch.float32)
        optimizer.zero_grad()
        loss = torch.mean((model(reference, target).compensated - target) ** 2)
        loss.backward()
        optimizer.step()

    reference, target = shifted_pair(texture, 30, 30, shift_x, shift_y)
    _, _, m_full, _ = estimate_motion(model, Frame(luma=target), Frame(luma=reference))
    assert np.mean(m_full.mv_x[4:-4, 4:-4]) == pytest.approx(shift_x, abs=0.3)
    assert np.mean(m_full.mv_y[4:-4, 4:-4]) == pytest.approx(shift_y, abs=0.3)
