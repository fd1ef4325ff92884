import numpy as np
import pytest

from convexdecomp.coercive import (Status, Witness, boundary_point, build_witness,
                                   coordinatewise_minimizer, directional_verdict,
                                   envelope_violation, flat_half_length, flat_segment_check,
                                   positively_spans, separation_rank, sphere_growth_radius,
                                   strict_minimum_witness, verify_witness, witness_weight)
from convexdecomp.corpus import make_example33, make_example_gamma, theta
from convexdecomp.decomp import decompose
from convexdecomp.errors import DimensionError, PreconditionError
from convexdecomp.funcrepr import AffinePlus, Kernel, Quadratic, ScalarComposite

from testkit import grid_argmin, ray_table


def theta_witness(xi):
    return Witness(np.array([xi]), [], np.zeros(1), 0.0)


class TestDirectionalVerdict:
    def test_identity_certified(self):
        v = directional_verdict(Quadratic(np.eye(3)))
        assert v.status is Status.CERTIFIED
        assert v.refuting_ray is None

    def test_xsq_refuted_along_e2(self):
        v = directional_verdict(Quadratic(np.diag([2.0, 0.0])))
        assert v.status is Status.REFUTED
        x, d = v.refuting_ray
        assert abs(d[0]) < 1e-12 and abs(abs(d[1]) - 1.0) < 1e-12

    def test_theta_refuted_along_negative_axis(self):
        v = directional_verdict(theta())
        assert v.status is Status.REFUTED
        np.testing.assert_array_equal(v.refuting_ray[1], [-1.0])

    def test_refuted_ray_rechecked_independently(self, corpus):
        for e in corpus:
            v = directional_verdict(e.f, 64, 0)
            if v.status is not Status.REFUTED:
                continue
            x, d = v.refuting_ray
            (_, f0), (_, fT) = ray_table(e.f, x, d, [0.0, v.max_t])
            assert fT - f0 <= 1.0, e.name

    def test_certified_entries_never_refuted(self, corpus):
        for e in corpus:
            if directional_verdict(e.f, 32, 0).status is not Status.CERTIFIED:
                continue
            assert "flat-directions" not in e.tags and e.truth.y_space.dim == 0, e.name
            plain = AffinePlus(e.f, np.zeros(e.dim), 0.0)
            for v in np.random.default_rng(5).standard_normal((200, e.dim)):
                v /= np.linalg.norm(v)
                (_, f0), (_, fT) = ray_table(plain, np.zeros(e.dim), v, [0.0, 100.0])
                assert fT - f0 > 1.0, e.name

    def test_flat_corpus_entries_refuted(self, corpus):
        for e in corpus:
            if "flat-directions" in e.tags and "affine-shift" not in e.tags and "affine" not in e.tags:
                assert directional_verdict(e.f, 64, 0, decomposition=decompose(e.f)).status \
                    is Status.REFUTED, e.name

    def test_bad_max_t(self):
        with pytest.raises(ValueError):
            directional_verdict(theta(), max_t=0.5)

    def test_positive_span(self):
        assert positively_spans(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]))
        assert positively_spans(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]))
        assert not positively_spans(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert not positively_spans(np.array([[1.0, 0.0], [-1.0, 0.0]]))

    def test_relu_composite_certification(self):
        K = Kernel.RELU_SQUARE
        tri = ScalarComposite(np.ones(3), (K,) * 3, [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], np.zeros(3))
        assert directional_verdict(tri).status is Status.CERTIFIED
        two = ScalarComposite(np.ones(2), (K,) * 2, np.eye(2), np.zeros(2))
        assert directional_verdict(two).status is Status.REFUTED


class TestWitness:
    def test_theta_by_hand(self):
        w = build_witness(theta(), n_terms=1)
        assert len(w.trace) == 1
        t = w.trace[0]
        np.testing.assert_array_equal(t.x, [1.0])
        np.testing.assert_array_equal(t.xi, [2.0])
        assert t.weight == 0.125
        np.testing.assert_array_equal(w.xi, [0.25])
        # (theta - 0.25 t) grows along both rays
        rows = ray_table(AffinePlus(theta(), [-0.25], 0.0), [0.0], [1.0], [-1e4, 1e4])
        assert rows[0][1] == 2500.0 and rows[1][1] == 1e8 - 2500.0

    def test_identity_quadratic(self):
        f = Quadratic(np.eye(2))
        w = build_witness(f, n_terms=4)
        assert verify_witness(f, w).verdict.status is not Status.REFUTED

    def test_gamma_witness_and_zero_coordinate_refuted(self):
        f = make_example_gamma(4).f
        w = build_witness(f, n_terms=8)
        assert np.all(w.xi > 0)
        assert separation_rank(w) == 4
        bad = w.xi.copy()
        bad[0] = 0.0
        g = AffinePlus(f, -bad, 0.0)
        for t in (1.0, 10.0, 1e4):
            assert g.value(-t * np.eye(4)[0]) == 0.0
        v = verify_witness(f, Witness(bad, [], np.zeros(4), 0.0))
        assert v.verdict.status is Status.REFUTED

    def test_theta_checks(self):
        assert verify_witness(theta(), theta_witness(0.25)).verdict.status is not Status.REFUTED
        v = verify_witness(theta(), theta_witness(0.0)).verdict
        assert v.status is Status.REFUTED
        np.testing.assert_array_equal(v.refuting_ray[1], [-1.0])
        assert separation_rank(build_witness(theta(), 1)) == 1

    def test_trace_invariants(self, corpus):
        for e in corpus:
            if e.truth.y_space.dim or e.dim > 8:
                continue
            w = build_witness(e.f)
            psi = w.psi(e.f)
            acc = np.zeros(e.dim)
            for n, t in enumerate(w.trace, start=1):
                assert abs(psi.value(t.x) - 1.0) <= 1e-8, e.name
                assert t.weight == 1.0 / (2.0 ** (n + 1) * max(1.0, np.linalg.norm(t.xi)))
                scaled = t.weight * max(1.0, np.linalg.norm(t.xi))
                assert abs(scaled - 2.0 ** -(n + 1)) <= 1e-15
                acc = acc + t.weight * t.xi
            assert np.linalg.norm(acc - w.xi) <= 1e-12
            assert np.linalg.norm(w.xi) <= 0.5 + 1e-12
            assert envelope_violation(e.f, w) <= 1e-8, e.name

    def test_dyadic_weights_exact(self):
        for n in range(1, 30):
            assert witness_weight(n, 0.5) == 2.0 ** -(n + 1)

    def test_flat_function_rejected(self):
        with pytest.raises(PreconditionError) as info:
            build_witness(Quadratic(np.diag([2.0, 0.0])))
        d = info.value.direction
        assert d is not None and abs(abs(d[1]) - 1.0) < 1e-12

    def test_boundary_point_exact_and_recession(self):
        psi = theta()
        x = boundary_point(psi, np.array([1.0]))
        np.testing.assert_array_equal(x, [1.0])
        assert boundary_point(psi, np.array([-1.0])) is None

    def test_degenerate_trace(self):
        assert separation_rank(Witness(np.zeros(2), [], np.zeros(2), 0.0)) == 0


class TestStrictMinimum:
    def test_xsq(self):
        xi, x = strict_minimum_witness(Quadratic([[2.0]]))
        assert xi[0] == 0.0 and x[0] == 0.0

    def test_theta(self):
        xi, x = strict_minimum_witness(theta())
        np.testing.assert_array_equal(xi, [2.0])
        np.testing.assert_array_equal(x, [1.0])
        # conjugate s^2/4 has gradient s/2, at s = 2 that is 1
        g = AffinePlus(theta(), -xi, 0.0)
        gx, gv = grid_argmin(g, 4.0, 8001)
        assert abs(gx[0] - 1.0) <= 1e-3

    def test_example33_candidate(self):
        f = make_example33(2).f
        xi, x = strict_minimum_witness(f, candidates=[[0.5, 0.25]])
        assert np.linalg.norm(x - [1.5, 2.5]) <= 1e-2
        gx, _ = grid_argmin(AffinePlus(f, -xi, 0.0), 4.0, 401)
        assert np.linalg.norm(gx - [1.5, 2.5]) <= 0.03

    def test_dimension_limit(self):
        with pytest.raises(DimensionError):
            strict_minimum_witness(Quadratic(np.eye(4)))
        with pytest.raises(ValueError):
            strict_minimum_witness(theta(), grid=32)

    def test_none_when_nothing_isolated(self):
        f = AffinePlus(Quadratic(np.zeros((1, 1))), [1.0], 0.0)
        assert strict_minimum_witness(f) is None

    def test_coordinatewise_closed_form(self):
        for N in (2, 4, 8):
            f = make_example33(N).f
            xi = np.array([2.0 ** -n for n in range(1, N + 1)])
            x = coordinatewise_minimizer(f, xi)
            np.testing.assert_allclose(x, np.arange(1, N + 1) + 0.5, rtol=0, atol=1e-12)


class TestFlatSegments:
    def test_inside(self):
        assert flat_segment_check(make_example33(8).f, np.zeros(8), 3)

    def test_outside_probe_grows(self):
        f = make_example33(2).f
        assert flat_segment_check(f, np.zeros(2), 1)
        assert f.value([2.0, 0.0]) - f.value([0.0, 0.0]) == 0.5

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            flat_segment_check(make_example33(4).f, np.array([0.0, 2.0, 0.0, 0.0]), 2)
        with pytest.raises(PreconditionError):
            flat_segment_check(make_example33(2).f, np.zeros(2), 3)

    def test_half_length(self):
        f = make_example33(4).f
        for i in range(4):
            assert flat_half_length(f, np.zeros(4), i) == pytest.approx(i + 1, abs=1e-9)
        assert flat_half_length(make_example_gamma(2).f, np.zeros(2), 0) == 0.0


def test_sphere_growth_on_certified(corpus):
    for e in corpus:
        if directional_verdict(e.f, 8, 0).status is Status.CERTIFIED:
            R = sphere_growth_radius(e.f)
            assert R is not None and R <= 2 ** 20, e.name
