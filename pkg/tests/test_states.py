"""Tests for state operators, faces and convex-component analysis."""

import math

import numpy as np
import pytest

from helpers import (
    bisect_weight_oracle,
    random_density,
    random_projection,
    random_pure,
    random_state_in_projection,
    random_unitary,
)
from statespace import (
    component_report,
    convex_combine,
    face_contains,
    face_from_projection,
    face_leq,
    face_meet,
    is_extremal,
    max_component_weight,
    new_state,
    pure_state,
    repair_state,
    state_from_json,
    state_to_json,
    states_close,
    sup_ratio,
    support_projection,
)
from statespace.errors import DimensionMismatchError, ValidationError

I2 = np.eye(2)


class TestNewState:
    def test_maximally_mixed_valid(self):
        t = new_state(I2 / 2)
        assert t.dim == 2 and t.tol == 1e-9

    def test_positivity_violation(self):
        with pytest.raises(ValidationError) as err:
            new_state(np.diag([1.1, -0.1]))
        assert err.value.code == "negative_eigenvalue"
        assert err.value.amount == pytest.approx(-0.1)

    def test_trace_violation(self):
        with pytest.raises(ValidationError) as err:
            new_state(np.diag([0.6, 0.6]))
        assert err.value.code == "trace_deviation"
        assert err.value.amount == pytest.approx(0.2)

    def test_non_hermitian_violation(self):
        m = np.array([[0.5, 0.3], [0.0, 0.5]])
        with pytest.raises(ValidationError) as err:
            new_state(m)
        assert err.value.code == "non_hermitian"
        assert err.value.amount == pytest.approx(0.3)

    def test_repair_clips_and_renormalizes(self):
        state, report = repair_state(np.diag([1.1, -0.1]))
        assert report.was_repaired
        assert report.clipped_weight == pytest.approx(0.1)
        assert report.trace_scale == pytest.approx(1 / 1.1)
        np.testing.assert_allclose(state.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    def test_repair_leaves_valid_input_alone(self):
        state, report = repair_state(I2 / 2)
        assert not report.was_repaired
        np.testing.assert_allclose(state.matrix, I2 / 2, atol=1e-15)


class TestPureState:
    def test_basis_vector(self):
        np.testing.assert_allclose(pure_state([1.0, 0.0]).matrix, np.diag([1.0, 0.0]), atol=0)

    def test_plus_state(self):
        t = pure_state(np.array([1.0, 1.0]) / np.sqrt(2.0))
        np.testing.assert_allclose(t.matrix, np.full((2, 2), 0.5), atol=1e-15)

    def test_singlet_projector_entries(self):
        t = pure_state(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0))
        m = np.asarray(t.matrix)
        np.testing.assert_allclose(m[1:3, 1:3], np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-15)
        assert np.max(np.abs(m[0])) == 0.0 and np.max(np.abs(m[3])) == 0.0

    def test_unnormalized_input_normalized(self):
        t = pure_state([3.0, 0.0])
        np.testing.assert_allclose(t.matrix, np.diag([1.0, 0.0]), atol=0)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValidationError) as err:
            pure_state([0.0, 1e-13])
        assert err.value.code == "zero_vector"

    def test_pure_states_are_extremal(self, rng):
        for d in (2, 3, 4):
            assert is_extremal(random_pure(d, rng))


class TestSupportProjection:
    def test_full_rank(self):
        handle = support_projection(new_state(I2 / 2))
        assert handle.rank == 2
        np.testing.assert_allclose(handle.projection, I2, atol=1e-12)

    def test_pure_state_is_own_projection(self, rng):
        t = random_pure(3, rng)
        handle = support_projection(t)
        assert handle.rank == 1
        np.testing.assert_allclose(handle.projection, t.matrix, atol=1e-10)

    def test_diagonal_with_kernel(self):
        handle = support_projection(new_state(np.diag([0.5, 0.5, 0.0])))
        np.testing.assert_allclose(handle.projection, np.diag([1.0, 1.0, 0.0]), atol=1e-12)

    def test_state_fixed_by_its_support(self, rng):
        t = random_density(4, rng)
        p = support_projection(t).projection
        assert np.max(np.abs(p @ t.matrix @ p - t.matrix)) <= 1e-9


class TestFaceContains:
    def test_identity_face_contains_everything(self, rng):
        full = face_from_projection(np.eye(3))
        for _ in range(5):
            assert face_contains(full, random_density(3, rng))

    def test_rank_one_face(self):
        face = face_from_projection(np.diag([1.0, 0.0]))
        assert face_contains(face, new_state(np.diag([1.0, 0.0])))
        assert not face_contains(face, new_state(I2 / 2))

    def test_diagonal_face(self):
        face = face_from_projection(np.diag([1.0, 1.0, 0.0]))
        assert face_contains(face, new_state(np.diag([0.3, 0.7, 0.0])))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            face_contains(face_from_projection(I2), new_state(np.eye(3) / 3))


class TestFaceOrder:
    def test_nested_diagonals(self):
        f1 = face_from_projection(np.diag([1.0, 0.0, 0.0]))
        f2 = face_from_projection(np.diag([1.0, 1.0, 0.0]))
        assert face_leq(f1, f2)
        assert not face_leq(f2, f1)

    def test_orthogonal_faces(self):
        f1 = face_from_projection(np.diag([1.0, 0.0]))
        f2 = face_from_projection(np.diag([0.0, 1.0]))
        assert not face_leq(f1, f2) and not face_leq(f2, f1)

    def test_constructed_nested_subspaces(self, rng):
        for _ in range(10):
            d = 5
            g = rng.normal(size=(d, 3)) + 1j * rng.normal(size=(d, 3))
            q, _ = np.linalg.qr(g)
            p2 = q @ q.conj().T
            p1 = q[:, :2] @ q[:, :2].conj().T
            assert face_leq(face_from_projection(p1), face_from_projection(p2))

    def test_order_matches_state_containment(self, rng):
        for _ in range(10):
            d = 4
            r1, r2 = int(rng.integers(1, d)), int(rng.integers(1, d))
            p1 = random_projection(d, r1, rng)
            p2 = random_projection(d, r2, rng)
            f1, f2 = face_from_projection(p1), face_from_projection(p2)
            sampled = all(
                face_contains(f2, random_state_in_projection(p1, r1, rng)) for _ in range(20)
            )
            assert face_leq(f1, f2) == sampled


class TestFaceMeet:
    def test_idempotent(self, rng):
        p = random_projection(4, 2, rng)
        f = face_from_projection(p)
        np.testing.assert_allclose(face_meet(f, f).projection, p, atol=1e-9)

    def test_diagonal_meet(self):
        f1 = face_from_projection(np.diag([1.0, 1.0, 0.0]))
        f2 = face_from_projection(np.diag([0.0, 1.0, 1.0]))
        np.testing.assert_allclose(face_meet(f1, f2).projection, np.diag([0.0, 1.0, 0.0]), atol=1e-9)

    def test_distinct_lines_meet_in_zero(self):
        f1 = face_from_projection(np.diag([1.0, 0.0]))
        f2 = face_from_projection(np.full((2, 2), 0.5))
        meet = face_meet(f1, f2)
        assert meet.rank == 0
        np.testing.assert_allclose(meet.projection, np.zeros((2, 2)), atol=1e-9)

    def test_meet_below_both(self, rng):
        f1 = face_from_projection(random_projection(5, 3, rng))
        f2 = face_from_projection(random_projection(5, 4, rng))
        meet = face_meet(f1, f2)
        assert face_leq(meet, f1) and face_leq(meet, f2)


class TestExtremality:
    def test_pure_is_extremal(self):
        assert is_extremal(pure_state([1.0, 0.0]))

    def test_maximally_mixed_is_not(self):
        assert not is_extremal(new_state(I2 / 2))

    def test_epr_reduced_state_is_not(self):
        # the reduced singlet state is 1/2 I, non-extremal
        from statespace import partial_trace, singlet_state

        reduced = new_state(partial_trace(singlet_state().matrix, (2, 2), "B"))
        assert not is_extremal(reduced)


class TestConvexCombine:
    def test_single_part(self, rng):
        t = random_density(3, rng)
        assert states_close(convex_combine([(1.0, t)]), t, 1e-12)

    def test_equal_mixture_of_basis_states(self):
        out = convex_combine([(0.5, pure_state([1.0, 0.0])), (0.5, pure_state([0.0, 1.0]))])
        np.testing.assert_allclose(out.matrix, I2 / 2, atol=1e-15)

    def test_random_pair_revalidates(self, rng):
        out = convex_combine([(0.3, random_pure(3, rng)), (0.7, random_pure(3, rng))])
        assert abs(np.trace(out.matrix) - 1.0) <= 1e-12
        assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-12

    def test_weight_sum_violation(self, rng):
        t = random_density(2, rng)
        with pytest.raises(ValidationError) as err:
            convex_combine([(0.5, t), (0.6, t)])
        assert err.value.code == "weight_sum"

    def test_never_fails_on_valid_inputs(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 5))
            w = rng.dirichlet(np.ones(k))
            parts = [(float(wi), random_density(3, rng)) for wi in w]
            convex_combine(parts)

    def test_combination_face_contains_part_faces(self, rng):
        parts = [(0.25, random_density(4, rng)), (0.35, random_pure(4, rng)), (0.4, random_density(4, rng))]
        total = convex_combine(parts)
        total_face = support_projection(total)
        for _, part in parts:
            assert face_leq(support_projection(part), total_face)


class TestMaxComponentWeight:
    def test_self_weight_is_one(self, rng):
        t = random_density(3, rng)
        assert max_component_weight(t, t) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_mixture(self):
        t2 = new_state(np.diag([0.3, 0.7]))
        t1 = pure_state([1.0, 0.0])
        assert max_component_weight(t1, t2) == pytest.approx(0.3, abs=1e-12)

    def test_agrees_with_bisection_oracle(self, rng):
        for _ in range(25):
            t1 = random_density(2, rng)
            t2 = random_density(2, rng, floor=0.1)
            w_closed = max_component_weight(t1, t2)
            w_oracle = bisect_weight_oracle(t1, t2)
            assert abs(w_closed - w_oracle) <= 1e-6

    def test_support_mismatch_gives_zero(self, rng):
        t2 = pure_state([1.0, 0.0, 0.0])
        t1 = random_density(3, rng)
        assert max_component_weight(t1, t2) == 0.0

    def test_extremal_states_are_indecomposable(self, rng):
        for d in (2, 3, 4):
            t = random_pure(d, rng)
            for _ in range(5):
                s = random_density(d, rng)
                if states_close(s, t):
                    continue
                assert max_component_weight(s, t) == 0.0


class TestSupRatio:
    def test_self_ratio_is_one(self, rng):
        t = random_density(3, rng)
        assert sup_ratio(t, t) == pytest.approx(1.0, abs=1e-9)

    def test_diagonal_example(self):
        assert sup_ratio(pure_state([1.0, 0.0]), new_state(I2 / 2)) == pytest.approx(2.0)

    def test_support_mismatch_is_infinite(self):
        t2 = pure_state([1.0, 0.0])
        t1 = pure_state([1.0, 1.0])
        assert math.isinf(sup_ratio(t1, t2))

    def test_custom_basis(self, rng):
        t1, t2 = random_density(2, rng), random_density(2, rng, floor=0.1)
        u = random_unitary(2, rng)
        value = sup_ratio(t1, t2, basis=[u[:, 0], u[:, 1]])
        assert value > 0.0 and not math.isinf(value)

    def test_bad_basis_rejected(self, rng):
        t = random_density(2, rng)
        with pytest.raises(ValidationError) as err:
            sup_ratio(t, t, basis=[np.array([1.0, 0.0]), np.array([1.0, 0.1])])
        assert err.value.code == "bad_basis"

    def test_weight_bounded_by_inverse_ratio(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 5))
            t1 = random_density(d, rng)
            t2 = random_density(d, rng)
            w = max_component_weight(t1, t2)
            u = random_unitary(d, rng)
            for basis in (None, [u[:, k] for k in range(d)]):
                ratio = sup_ratio(t1, t2, basis)
                if 0.0 < ratio < math.inf:
                    assert w <= 1.0 / ratio + 1e-9

    def test_component_report_bundles_both(self, rng):
        t = random_density(2, rng)
        report = component_report(t, t)
        assert report.max_weight == pytest.approx(1.0, abs=1e-9)
        assert report.sup_ratio == pytest.approx(1.0, abs=1e-9)
        assert report.basis_used == "eigen"
        assert report.is_component()


class TestStateJson:
    def test_round_trip(self, rng):
        t = random_density(3, rng)
        back = state_from_json(state_to_json(t))
        assert states_close(t, back, 1e-12)
        assert back.tol == t.tol

    def test_tol_default(self):
        from statespace import matrix_to_json

        obj = matrix_to_json(I2 / 2)
        assert state_from_json(obj).tol == 1e-9
