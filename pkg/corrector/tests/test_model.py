import pytest
import torch

from scatcorrect.model import PolarUNet, build_model


@pytest.fixture(scope="module")
def net():
    torch.manual_seed(0)
    model = PolarUNet(2, 2, base_channels=4)
    model.eval()
    return model


def test_output_shapes(net):
    x = torch.randn(2, 2, 56, 104)
    with torch.no_grad():
        assert net(x).shape == (2, 2, 56, 104)
    torch.manual_seed(1)
    u2 = PolarUNet(2, 1, base_channels=4)
    u2.eval()
    with torch.no_grad():
        assert u2(x).shape == (2, 1, 56, 104)


def test_angular_shift_equivariance(net):
    torch.manual_seed(2)
    x = torch.randn(1, 2, 56, 104)
    assert net.downsampling == 8
    for shift in (8, 24, 48):
        with torch.no_grad():
            shifted_out = net(torch.roll(x, shift, dims=3))
            out_shifted = torch.roll(net(x), shift, dims=3)
        rel = (torch.linalg.vector_norm(shifted_out - out_shifted)
               / torch.linalg.vector_norm(out_shifted))
        assert rel < 1e-4, f"shift {shift}: relative violation {rel:.2e}"


def test_forward_deterministic(net):
    torch.manual_seed(3)
    x = torch.randn(1, 2, 56, 104)
    with torch.no_grad():
        assert torch.equal(net(x), net(x))


def test_rejects_indivisible_shapes(net):
    with pytest.raises(ValueError, match="downsampling"):
        net(torch.randn(1, 2, 56, 100))


def test_corrector_wrapper_round_trip_and_identity_init(net):
    from scatcorrect.model import Corrector
    torch.manual_seed(4)
    wrapped = Corrector(PolarUNet(2, 2, base_channels=4),
                        input_scale=0.02, target_scale=0.03, residual=True)
    wrapped.eval()
    x = torch.randn(1, 2, 56, 104)
    with torch.no_grad():
        # zero-initialized head + residual skip = identity map at init
        assert torch.allclose(wrapped(x), x)
    clone = build_model(wrapped.config())
    assert clone.config() == wrapped.config()
    clone.load_state_dict(wrapped.state_dict())
    clone.eval()
    with torch.no_grad():
        assert torch.equal(clone(x), wrapped(x))


def test_corrector_rejects_residual_channel_mismatch():
    from scatcorrect.model import Corrector
    with pytest.raises(ValueError, match="channel"):
        Corrector(PolarUNet(2, 1, base_channels=4), 1.0, 1.0, residual=True)
