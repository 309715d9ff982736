import numpy as np
import pytest

from qresnet.errors import CapacityError, ValidationError
from qresnet.model import (
    RES_R,
    RES_R1,
    RES_R2,
    CircuitOp,
    ModelSpec,
    ResidualStrategy,
    feature,
    fixed,
    trainable,
)
from qresnet.residual import (
    a_coefficients,
    evaluate_ancilla,
    evaluate_direct,
    residual_expectation_ancilla,
    residual_expectation_direct,
    residual_matrix,
    system_states,
)
from qresnet.simcore import GateKind, Observable, gate_matrix, ry_matrix, rz_matrix

from conftest import dense_embed, random_unitary

R = ResidualStrategy(RES_R)


def r1(m_a=0):
    return ResidualStrategy(RES_R1, alpha=fixed(0.0), m_a=m_a)


def r2(m_a=0):
    return ResidualStrategy(RES_R2, alpha=fixed(0.0), gamma=fixed(0.0), m_a=m_a)


class TestResidualMatrix:
    def test_r_of_identity(self):
        assert np.allclose(residual_matrix(R, np.eye(2)), np.eye(2))

    def test_r2_at_special_angles_reduces_to_r(self, rng):
        L = random_unitary(2, rng)
        got = residual_matrix(r2(), L, alpha=np.pi / 4, gamma=-np.pi / 4)
        assert np.max(np.abs(got - (np.eye(2) + L) / 2)) <= 1e-12

    def test_r1_at_pi_over_4_equals_r_exactly(self, rng):
        # (cos(pi/4) I + sin(pi/4) L)/sqrt(2) == (I + L)/2, with no extra scale.
        L = random_unitary(2, rng)
        got = residual_matrix(r1(), L, alpha=np.pi / 4)
        want = residual_matrix(R, L)
        assert np.max(np.abs(got - want)) <= 1e-12

    def test_m_a_flips_sign_and_eta(self, rng):
        L = random_unitary(2, rng)
        a = 0.3
        got = residual_matrix(r1(m_a=1), L, alpha=a)
        want = (np.cos(a) * np.eye(2) - np.sin(a) * L) / np.sqrt(2)
        assert np.allclose(got, want)
        g = 0.4
        got = residual_matrix(r2(m_a=1), L, alpha=a, gamma=g)
        eta = np.pi / 2 - g
        want = np.cos(a) * np.cos(eta) * np.eye(2) + np.sin(a) * np.sin(eta) * L
        assert np.allclose(got, want)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValidationError):
            residual_matrix(R, np.array([[1, 0], [0, 2]]))


class TestACoefficients:
    def test_r1_at_pi_over_4(self):
        c = a_coefficients(r1(), alpha=np.pi / 4)
        assert (c.a1, c.a2, c.a3) == pytest.approx((0.25, 0.25, 0.5), abs=1e-15)

    def test_r2_alpha_zero_kills_l_terms(self):
        g = 0.7
        c = a_coefficients(r2(), alpha=0.0, gamma=g)
        assert c.a1 == pytest.approx(0.0, abs=1e-15)
        assert c.a2 == pytest.approx(np.cos(-g) ** 2, abs=1e-15)
        assert c.a3 == pytest.approx(0.0, abs=1e-15)

    def test_r2_reduction_matches_r_exactly(self):
        c = a_coefficients(r2(), alpha=np.pi / 4, gamma=-np.pi / 4)
        r = a_coefficients(R)
        assert (c.a1, c.a2, c.a3) == pytest.approx((r.a1, r.a2, r.a3), abs=1e-15)

    def test_traditional_not_applicable(self):
        from qresnet.model import TRADITIONAL

        with pytest.raises(ValidationError):
            a_coefficients(ResidualStrategy(TRADITIONAL))


def one_qubit_residual_model(kind, m_a=0):
    """U(t2) . residual(Ry(x)) . U(t1) on one qubit, observable Z.

    Trainable layout: 6 ansatz angles, then alpha (6) and gamma (7).
    """
    if kind == RES_R:
        strat = ResidualStrategy(RES_R)
        n_params = 6
    elif kind == RES_R1:
        strat = ResidualStrategy(RES_R1, alpha=trainable(6), m_a=m_a)
        n_params = 7
    else:
        strat = ResidualStrategy(RES_R2, alpha=trainable(6), gamma=trainable(7), m_a=m_a)
        n_params = 8
    ops = (
        CircuitOp(GateKind.RZ, (0,), (trainable(2),)),
        CircuitOp(GateKind.RY, (0,), (trainable(1),)),
        CircuitOp(GateKind.RZ, (0,), (trainable(0),)),
        CircuitOp(GateKind.RY, (0,), (feature(0),), residual=strat),
        CircuitOp(GateKind.RZ, (0,), (trainable(5),)),
        CircuitOp(GateKind.RY, (0,), (trainable(4),)),
        CircuitOp(GateKind.RZ, (0,), (trainable(3),)),
    )
    return ModelSpec(1, ops, Observable(1, ("Z",)), n_params)


def ansatz_matrix(a, b, c):
    return rz_matrix(a) @ ry_matrix(b) @ rz_matrix(c)


class TestDecomposition:
    def test_r_of_identity_input_gives_one(self):
        model = ModelSpec(
            1,
            (CircuitOp(GateKind.RY, (0,), (feature(0),), residual=R),),
            Observable(1, ("Z",)),
            0,
        )
        assert residual_expectation_direct(model, 0.0, np.zeros(0)) == pytest.approx(1.0)

    @pytest.mark.parametrize("kind,m_a", [(RES_R, 0), (RES_R1, 0), (RES_R1, 1),
                                          (RES_R2, 0), (RES_R2, 1)])
    def test_three_term_oracle(self, kind, m_a, rng):
        # Term-by-term evaluation of the weighted decomposition
        # a1*<U'OU> + a2*<O> + a3*Re<OU> in the pre-block state.
        model = one_qubit_residual_model(kind, m_a)
        for _ in range(30):
            theta = rng.uniform(0, 2 * np.pi, model.n_params)
            x = rng.uniform(0, 2 * np.pi)
            got = residual_expectation_direct(model, x, theta)
            phi0 = ansatz_matrix(theta[0], theta[1], theta[2]) @ np.array([1, 0 + 0j])
            o_eff = ansatz_matrix(theta[3], theta[4], theta[5])
            o_eff = o_eff.conj().T @ np.diag([1, -1 + 0j]) @ o_eff
            u = ry_matrix(x)
            if kind == RES_R:
                coeffs = a_coefficients(R)
            elif kind == RES_R1:
                coeffs = a_coefficients(r1(m_a), alpha=theta[6])
            else:
                coeffs = a_coefficients(r2(m_a), alpha=theta[6], gamma=theta[7])
            f_term = np.real(phi0.conj() @ u.conj().T @ o_eff @ u @ phi0)
            o_term = np.real(phi0.conj() @ o_eff @ phi0)
            cross = np.real(phi0.conj() @ o_eff @ u @ phi0)
            want = coeffs.a1 * f_term + coeffs.a2 * o_term + coeffs.a3 * cross
            assert got == pytest.approx(want, abs=1e-12)

    def test_two_blocks_match_dense_oracle(self, rng):
        # Two residual encodings in sequence on 2 qubits vs. an explicit
        # dense-matrix product oracle.
        strat_a = ResidualStrategy(RES_R2, alpha=trainable(0), gamma=trainable(1))
        strat_b = ResidualStrategy(RES_R)
        ops = (
            CircuitOp(GateKind.RY, (0,), (feature(0),), residual=strat_a),
            CircuitOp(GateKind.ZZ, (0, 1), (trainable(2),)),
            CircuitOp(GateKind.RY, (1,), (feature(0),), residual=strat_b),
            CircuitOp(GateKind.U3, (0,), (trainable(3), trainable(4), trainable(5))),
        )
        model = ModelSpec(2, ops, Observable(2, ("Z", "I")), 6)
        for _ in range(20):
            theta = rng.uniform(0, 2 * np.pi, 6)
            x = rng.uniform(0, 2 * np.pi)
            got = residual_expectation_direct(model, x, theta)
            m1 = residual_matrix(strat_a, ry_matrix(x), theta[0], theta[1])
            full = dense_embed(m1, (0,), 2)
            full = dense_embed(gate_matrix(GateKind.ZZ, (theta[2],)), (0, 1), 2) @ full
            full = dense_embed(residual_matrix(strat_b, ry_matrix(x)), (1,), 2) @ full
            full = dense_embed(
                gate_matrix(GateKind.U3, tuple(theta[3:6])), (0,), 2
            ) @ full
            psi = full @ np.eye(4)[0].astype(complex)
            want = np.real(psi.conj() @ np.kron(np.diag([1, -1]), np.eye(2)) @ psi)
            assert got == pytest.approx(want, abs=1e-12)


def two_block_model():
    """Two residual blocks (r2 then r) with an entangler, for cross-path tests."""
    ops = (
        CircuitOp(GateKind.U3, (0,), (trainable(0), trainable(1), trainable(2))),
        CircuitOp(
            GateKind.RY,
            (0,),
            (feature(0),),
            residual=ResidualStrategy(RES_R2, alpha=trainable(3), gamma=trainable(4)),
        ),
        CircuitOp(GateKind.ZZ, (0, 1), (trainable(5),)),
        CircuitOp(
            GateKind.RY,
            (1,),
            (feature(0),),
            residual=ResidualStrategy(RES_R),
        ),
        CircuitOp(GateKind.U3, (1,), (trainable(6), trainable(7), trainable(8))),
    )
    return ModelSpec(2, ops, Observable(2, ("I", "Z")), 9)


class TestAncillaPath:
    def test_matches_direct_on_200_random_configs(self, rng):
        kinds = [RES_R, RES_R1, RES_R2]
        for i in range(200):
            model = one_qubit_residual_model(kinds[i % 3])
            theta = rng.uniform(0, 2 * np.pi, model.n_params)
            x = rng.uniform(0, 2 * np.pi)
            direct = residual_expectation_direct(model, x, theta)
            ancilla = residual_expectation_ancilla(model, x, theta)
            assert ancilla == pytest.approx(direct, abs=1e-10)

    def test_r_block_with_identity_l(self):
        model = ModelSpec(
            1,
            (
                CircuitOp(GateKind.RY, (0,), (trainable(0),)),
                CircuitOp(GateKind.RY, (0,), (fixed(0.0),), residual=R),
            ),
            Observable(1, ("Z",)),
            1,
        )
        theta = np.array([1.1])
        plain = np.cos(1.1)
        assert residual_expectation_ancilla(model, 0.0, theta) == pytest.approx(plain)

    def test_two_blocks_match_direct(self, rng):
        model = two_block_model()
        for _ in range(40):
            theta = rng.uniform(0, 2 * np.pi, model.n_params)
            x = rng.uniform(0, 2 * np.pi)
            direct = residual_expectation_direct(model, x, theta)
            ancilla = residual_expectation_ancilla(model, x, theta)
            assert ancilla == pytest.approx(direct, abs=1e-10)

    def test_two_observable_averaging_equals_projector(self, rng):
        model = two_block_model()
        theta = rng.uniform(0, 2 * np.pi, model.n_params)
        x = 0.9
        proj = residual_expectation_ancilla(model, x, theta)
        two_obs = residual_expectation_ancilla(model, x, theta, two_observable=True)
        assert two_obs == pytest.approx(proj, abs=1e-12)

    def test_m_a_one_branch(self, rng):
        model = one_qubit_residual_model(RES_R2, m_a=1)
        for _ in range(20):
            theta = rng.uniform(0, 2 * np.pi, model.n_params)
            x = rng.uniform(0, 2 * np.pi)
            direct = residual_expectation_direct(model, x, theta)
            ancilla = residual_expectation_ancilla(model, x, theta)
            assert ancilla == pytest.approx(direct, abs=1e-10)

    def test_capacity_error(self):
        ops = tuple(
            CircuitOp(GateKind.RY, (q,), (feature(0),), residual=R) for q in range(11)
        )
        model = ModelSpec(11, ops, Observable.identity(11), 0)
        with pytest.raises(CapacityError):
            residual_expectation_ancilla(model, 0.1, np.zeros(0))


class TestTraditionalReduction:
    def test_traditional_everywhere_is_plain_expectation(self, rng):
        # Residual machinery with no residual blocks reduces to Eq.-1 output.
        ops = (
            CircuitOp(GateKind.RZ, (0,), (trainable(0),)),
            CircuitOp(GateKind.RY, (0,), (feature(0),)),
            CircuitOp(GateKind.RY, (0,), (trainable(1),)),
        )
        model = ModelSpec(1, ops, Observable(1, ("Z",)), 2)
        theta = rng.uniform(0, 2 * np.pi, 2)
        x = 0.7
        got = residual_expectation_direct(model, x, theta)
        u = ry_matrix(theta[1]) @ ry_matrix(x) @ rz_matrix(theta[0])
        psi = u @ np.array([1, 0 + 0j])
        want = np.real(psi.conj() @ np.diag([1, -1]) @ psi)
        assert got == pytest.approx(want, abs=1e-14)


class TestSystemStates:
    def test_unitary_model_state_is_normalized(self, rng):
        model = one_qubit_residual_model(RES_R)
        # strip the residual wrapper to get a plain unitary model
        from dataclasses import replace

        plain_ops = tuple(replace(op, residual=None) for op in model.ops)
        plain = ModelSpec(1, plain_ops, model.observable, model.n_params)
        theta = rng.uniform(0, 2 * np.pi, plain.n_params)
        s = system_states(plain, np.array([[0.4]]), theta)
        assert np.linalg.norm(s[0]) == pytest.approx(1.0, abs=1e-12)

    def test_residual_projection_matches_direct_operator(self, rng):
        # The projected, unnormalized ancilla-path system state must equal the
        # residual operator applied directly.
        model = one_qubit_residual_model(RES_R2)
        theta = rng.uniform(0, 2 * np.pi, model.n_params)
        x = 0.8
        s = system_states(model, np.array([[x]]), theta, normalize=False)[0]
        pre = ansatz_matrix(theta[0], theta[1], theta[2]) @ np.array([1, 0 + 0j])
        strat = model.ops[3].residual
        rmat = residual_matrix(strat, ry_matrix(x), theta[6], theta[7])
        want = ansatz_matrix(theta[3], theta[4], theta[5]) @ (rmat @ pre)
        assert np.max(np.abs(s - want)) <= 1e-12
