import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memoryport.channel import ChannelMatrix, UnitarySpec
from memoryport.errors import NonPassive, NonPhysicalState, UnsupportedPartition
from memoryport.gaussian import (GaussianState, apply_channel, channel_to_quadratures, duan_value,
                                 entangling_inputs, log_negativity, lossy_channel,
                                 make_squeezed_inputs, symplectic_eigenvalues,
                                 two_mode_squeezed_covariance)

from oracles import beamsplitter_quadratures, squeezed_cov, two_mode_symplectic_min

BS = UnitarySpec.balanced().matrix


def test_unsqueezed_inputs_are_vacuum():
    assert np.array_equal(make_squeezed_inputs([0, 0, 0], 0).covariance, np.eye(6))


def test_single_squeezed_variances():
    cov = make_squeezed_inputs([1.0], [0.0]).covariance
    np.testing.assert_allclose(cov, np.diag([np.exp(-2), np.exp(2)]), atol=1e-15)


def test_orthogonal_squeezing_swaps_variances():
    cov = make_squeezed_inputs([1.0, 1.0], [0.0, np.pi / 2]).covariance
    np.testing.assert_allclose(cov[:2, :2], squeezed_cov(1.0, 0.0), atol=1e-14)
    np.testing.assert_allclose(cov[2:, 2:], np.diag([np.exp(2), np.exp(-2)]), atol=1e-14)
    assert np.all(cov[:2, 2:] == 0)


def test_quadrature_channel_examples():
    perfect = channel_to_quadratures(np.eye(2))
    assert np.array_equal(perfect.S, np.eye(4))
    np.testing.assert_allclose(perfect.G, 0, atol=1e-15)
    lossy = channel_to_quadratures(ChannelMatrix(np.sqrt(0.9) * np.eye(2), 0.9))
    np.testing.assert_allclose(lossy.S, np.sqrt(0.9) * np.eye(4), atol=1e-15)
    np.testing.assert_allclose(lossy.G, 0.1 * np.eye(4), atol=1e-15)


def test_zero_transfer_outputs_vacuum():
    out = apply_channel(entangling_inputs(1.3), channel_to_quadratures(np.zeros((2, 2))))
    np.testing.assert_allclose(out.covariance, np.eye(4), atol=1e-15)
    assert duan_value(out) == pytest.approx(4.0, abs=1e-14)


def test_amplifier_rejected():
    with pytest.raises(NonPassive):
        channel_to_quadratures(1.01 * np.eye(2))


def test_unphysical_state_rejected():
    with pytest.raises(NonPhysicalState):
        GaussianState(np.zeros(2), np.diag([0.5, 0.5]))
    with pytest.raises(NonPhysicalState):
        GaussianState(np.zeros(2), np.array([[1.0, 0.2], [0.0, 1.0]]))


def test_vacuum_through_passive_channel():
    qc = lossy_channel(UnitarySpec.random(3, seed=2).matrix, 0.37)
    out = apply_channel(GaussianState.vacuum(3), qc)
    np.testing.assert_allclose(out.covariance, np.eye(6), atol=1e-14)


def test_lossless_balanced_gives_tmsv():
    r = 1.0
    out = apply_channel(entangling_inputs(r), channel_to_quadratures(BS))
    bs = beamsplitter_quadratures()
    v_in = np.zeros((4, 4))
    v_in[:2, :2] = squeezed_cov(r, np.pi / 2)
    v_in[2:, 2:] = squeezed_cov(r, 0.0)
    oracle = bs @ v_in @ bs.T
    np.testing.assert_allclose(out.covariance, oracle, atol=1e-12)
    np.testing.assert_allclose(out.covariance, two_mode_squeezed_covariance(r), atol=1e-12)


def test_loss_on_squeezed_input():
    state = make_squeezed_inputs([1.0], [0.0])
    out = apply_channel(state, lossy_channel(np.eye(1), 0.5))
    np.testing.assert_allclose(np.diag(out.covariance), [0.5 * np.exp(-2) + 0.5, 0.5 * np.exp(2) + 0.5],
                               atol=1e-14)
    assert out.covariance[0, 0] == pytest.approx(0.5677, abs=1e-4)
    assert out.covariance[1, 1] == pytest.approx(4.1945, abs=1e-4)
    # brute-force S V S^T + G with the matrices written out
    s = np.sqrt(0.5) * np.eye(2)
    np.testing.assert_allclose(out.covariance, s @ state.covariance @ s.T + 0.5 * np.eye(2), atol=1e-15)


def test_vacuum_not_entangled():
    vac = GaussianState.vacuum(2)
    assert log_negativity(vac) == 0.0
    assert duan_value(vac) == 4.0


@pytest.mark.parametrize("r", [0.3, 1.0, 1.7])
def test_tmsv_log_negativity(r):
    out = apply_channel(entangling_inputs(r), channel_to_quadratures(BS))
    oracle = -np.log(two_mode_symplectic_min(two_mode_squeezed_covariance(r), transposed=True))
    assert oracle == pytest.approx(2 * r, abs=1e-9)
    assert log_negativity(out) == pytest.approx(oracle, abs=1e-6)
    assert log_negativity(out) == pytest.approx(2 * r, abs=1e-6)


def test_tmsv_duan():
    out = apply_channel(entangling_inputs(1.0), channel_to_quadratures(BS))
    assert duan_value(out) == pytest.approx(4 * np.exp(-2), abs=1e-12)
    assert duan_value(out) == pytest.approx(0.5413, abs=1e-4)


def test_log_negativity_monotone_in_efficiency():
    r = 1.0
    etas = np.linspace(0.1, 0.9, 9)
    en = [log_negativity(apply_channel(entangling_inputs(r), lossy_channel(BS, eta))) for eta in etas]
    assert all(0 < e < 2 * r for e in en)
    assert all(a < b for a, b in zip(en, en[1:]))
    for eta, e in zip(etas, en):
        cov = apply_channel(entangling_inputs(r), lossy_channel(BS, eta)).covariance
        assert e == pytest.approx(-np.log(two_mode_symplectic_min(cov, transposed=True)), abs=1e-9)


def test_zero_efficiency_restores_vacuum():
    out = apply_channel(entangling_inputs(1.0), lossy_channel(BS, 0.0))
    assert duan_value(out) == pytest.approx(4.0, abs=1e-14)
    assert log_negativity(out) == 0.0


def test_partition_validation():
    state = apply_channel(make_squeezed_inputs([1, 1, 0.5], [np.pi / 2, 0, 0]),
                          lossy_channel(UnitarySpec.fourier(3).matrix, 1.0))
    assert log_negativity(state, ((0,), (2,))) >= 0
    assert log_negativity(state, ((2,), (0,))) == pytest.approx(log_negativity(state, ((0,), (2,))))
    with pytest.raises(UnsupportedPartition):
        log_negativity(state, ((0, 1), (2,)))
    with pytest.raises(UnsupportedPartition):
        log_negativity(state, ((0,), (0,)))
    with pytest.raises(UnsupportedPartition):
        log_negativity(state, ((0,), (5,)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), n=st.integers(1, 4), eta=st.floats(0.0, 1.0))
def test_output_stays_physical(seed, n, eta):
    rng = np.random.default_rng(seed)
    state = make_squeezed_inputs(rng.uniform(0, 2, n), rng.uniform(0, np.pi, n))
    u = UnitarySpec.random(n, seed=seed).matrix
    out = apply_channel(state, lossy_channel(u, eta))
    assert symplectic_eigenvalues(out.covariance).min() >= 1 - 1e-9
    # lossy map applied to a pure state: total photon number can only drop toward vacuum
    assert np.trace(out.covariance) <= np.trace(state.covariance) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_random_contraction_is_passive(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m /= np.linalg.norm(m, 2) * rng.uniform(1.0, 3.0)
    qc = channel_to_quadratures(m)
    assert np.linalg.eigvalsh(qc.G).min() >= -1e-12
