import numpy as np
import pytest

from stokestrace.berg import (
    BergSequence,
    OrthonormalBasis,
    berg_diagnostics,
    build_bn,
    build_corner_space,
    rescale_to_unit,
    stated_dimension_bound,
)
from stokestrace.exceptions import DomainError
from stokestrace.harness import gen_commuting_pair
from stokestrace.linalg import commuting_tuple, eigh, operator_norm, schatten_norm
from stokestrace.rng import complex_gaussian, stream
from stokestrace.spectral import dyadic_partial_sum


def test_rescale_examples():
    r = rescale_to_unit(np.diag([-1.0, 1.0]))
    assert np.allclose(r.operator.matrix, np.diag([0.0, 1.0]))
    assert np.allclose(rescale_to_unit(np.eye(3)).operator.matrix, np.eye(3))
    zero = rescale_to_unit(np.zeros((2, 2)))
    assert np.allclose(zero.operator.matrix, 0.5 * np.eye(2))


@pytest.mark.parametrize("seed", range(5))
def test_rescale_round_trip(seed):
    g = complex_gaussian(stream(seed, "C"), (6, 6))
    c = 0.5 * (g + g.conj().T)
    r = rescale_to_unit(c)
    w = np.linalg.eigvalsh(r.operator.matrix)
    assert w[0] >= -1e-14 and w[-1] <= 1 + 1e-14
    assert operator_norm(2 * operator_norm(c) * (r.operator.matrix - 0.5 * np.eye(6)) - c) <= 1e-12
    assert operator_norm(r.invert(r.operator.matrix) - c) <= 1e-12


def test_basis_validation():
    with pytest.raises(DomainError):
        OrthonormalBasis(np.array([[1.0, 1.0], [0.0, 1.0]]))
    b = OrthonormalBasis.random(5, 3)
    assert np.allclose(b.vectors, OrthonormalBasis.random(5, 3).vectors)


def test_hand_corner_example():
    p, dim = build_corner_space(commuting_tuple([np.diag([0.25, 0.75])]), OrthonormalBasis.standard(2), 1)
    assert dim == 1 <= stated_dimension_bound(1, 1)
    assert np.allclose(p, np.diag([1.0, 0.0]))


@pytest.mark.parametrize("seed", range(3))
def test_corner_spaces_nest_and_saturate(seed):
    t = gen_commuting_pair(seed, 12, interval=(0.0, 1.0))
    seq = BergSequence(t, OrthonormalBasis.random(12, seed), rescale=False)
    dims = [seq.corner(N).dim for N in range(1, 13)]
    assert dims == sorted(dims)
    assert seq.corner(12).saturated
    for N in range(1, 12):
        P, Pn = seq.projection(N), seq.projection(N + 1)
        assert operator_norm(Pn @ P - P) <= 1e-10


def test_small_pair_within_stated_bound_at_level_two():
    t = gen_commuting_pair(7, 16, interval=(0.0, 1.0))
    _, dim = build_corner_space(t, OrthonormalBasis.standard(16), 2)
    assert dim <= stated_dimension_bound(2, 2) == 20


@pytest.mark.parametrize("seed", range(3))
def test_bn_after_saturation_is_dyadic_sum(seed):
    t = gen_commuting_pair(seed, 8, interval=(0.0, 1.0))
    seq = BergSequence(t, rescale=False)
    k = seq.saturation_level()
    for N in (k, k + 3):
        for i, b in enumerate(seq.operators(N)):
            assert operator_norm(b.matrix - dyadic_partial_sum(seq.decompositions[i], N)) <= 1e-12


def test_bn_identity_closed_form():
    # A_1 = I: every band is I, so B^(N) = (1 - 2^-N) I + sum_{k>N} 2^-k (I - P_k)
    d = 6
    u = complex_gaussian(stream(0, "U"), (d, d))
    u, _ = np.linalg.qr(u)
    a2 = (u * np.linspace(0.1, 0.9, d)) @ u.conj().T
    t = commuting_tuple([np.eye(d), 0.5 * (a2 + a2.conj().T)])
    seq = BergSequence(t, rescale=False)
    k_sat = seq.saturation_level()
    for N in range(1, k_sat + 1):
        want = (1 - 2.0 ** -N) * np.eye(d)
        for k in range(N + 1, k_sat):
            want = want + 2.0 ** -k * (np.eye(d) - seq.projection(k))
        assert operator_norm(seq.operators(N)[0].matrix - want) <= 1e-12


def test_bn_from_projection_sequence_matches_sequence():
    t = gen_commuting_pair(4, 10, interval=(0.0, 1.0))
    seq = BergSequence(t, rescale=False)
    projs = [seq.projection(k) for k in range(1, 15)]
    for N in (1, 2, 3):
        direct = build_bn(t, projs, N, K_cut=14)
        for b0, b1 in zip(direct, seq.operators(N)):
            assert operator_norm(b0.matrix - b1.matrix) <= 1e-12


def test_diagonal_tuple_commutes_with_corners():
    t = commuting_tuple([np.diag([0.1, 0.35, 0.8, 0.55]), np.diag([0.9, 0.2, 0.45, 0.3])])
    diag = berg_diagnostics(t, N_list=[1, 2, 3], p_list=[2.0, 3.0])
    assert all(v == 0.0 for v in diag.column("commutator_with_corner"))


@pytest.mark.parametrize("seed", range(3))
def test_diagnostics_invariants(seed, tmp_path):
    t = gen_commuting_pair(seed, 24, interval=(0.0, 1.0))
    seq = BergSequence(t, rescale=False)
    k = seq.saturation_level()
    diag = berg_diagnostics(t, N_list=list(range(1, k + 3)), p_list=[2.0, np.inf], sequence=seq)
    for r in diag.rows:
        assert r["nesting_defect"] <= 1e-10
        assert r["max_b_commutator"] <= 1e-10
        assert r["min_increment_eig"] >= -1e-10
        assert r["dim"] <= r["piece_bound"]
        assert r["within_tail_bound"]
        if r["N"] >= k:
            cap = 2.0 ** -r["N"] * 24 ** (1 / r["p"]) + 1e-12
            assert r["approx_error"] <= cap
            assert r["compression_defect"] <= cap
    diag.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0].startswith("N,i,p,dim")


def test_diagnostics_rejects_small_p():
    with pytest.raises(DomainError):
        berg_diagnostics(gen_commuting_pair(0, 4, interval=(0.0, 1.0)), p_list=[1.5])


def test_unit_range_enforced():
    with pytest.raises(DomainError):
        BergSequence(commuting_tuple([np.diag([-0.5, 0.5])]), rescale=False)


def test_rescaled_joint_decomposition_after_saturation():
    t = gen_commuting_pair(2, 8)
    seq = BergSequence(t)
    N = seq.saturation_level() + 2
    jsd = seq.joint_decomposition(N)
    for i, h in enumerate(seq.original_operators(N)):
        assert operator_norm(jsd.reconstruct(i) - h) <= 1e-12
        assert operator_norm(h - t[i].matrix) <= 2.0 ** -N * 2 * operator_norm(t[i].matrix) + 1e-12
    assert schatten_norm(seq.original_operators(N)[0] - t[0].matrix, 2) > 0
    assert eigh(t[0]).dim == 8
