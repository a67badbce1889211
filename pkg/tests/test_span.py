import numpy as np
import pytest

from deepmkl.arch import ArchConfig, forward, grad_theta
from deepmkl.errors import ConfigError, NumericFailure, SingularWorkspaceError
from deepmkl.kernels import KernelSpec, base_gram, default_roster
from deepmkl.span import (
    SpanConfig,
    alpha_derivative,
    build_workspace,
    phi,
    phi_prime,
    smoothed_span_sq,
    smoothed_spans,
    span_grad,
    t_span,
)
from deepmkl.svm import SvmModel, solve, solve_on_support

HARD_C = 1e4
SOFT_C = 10.0

KERNEL_MIXES = {
    "rbf": ([KernelSpec.rbf(0.3)], 1),
    "linear": ([KernelSpec.linear()], 1),
    "polynomial": ([KernelSpec.polynomial()], 1),
    "roster": (default_roster(), 1),
    "deep-roster": (default_roster(), 2),
}


def _span_by_qp(K: np.ndarray, alpha: np.ndarray, p: int, eta: float) -> float:
    """min ||phi(x_p) - sum_i l_i phi(x_i)||^2 + eta sum_i l_i^2 / alpha_i over sum(l) = 1, i != p.

    Solved through the KKT system of the equality-constrained quadratic program.
    """
    rest = np.array([i for i in range(len(alpha)) if i != p])
    G = 2.0 * (K[np.ix_(rest, rest)] + np.diag(eta / alpha[rest]))
    c = -2.0 * K[rest, p]
    A = np.ones((1, len(rest)))
    kkt = np.block([[G, A.T], [A, np.zeros((1, 1))]])
    solution = np.linalg.solve(kkt, np.concatenate([-c, [1.0]]))
    lam = solution[: len(rest)]
    return float(K[p, p] + lam @ (K[np.ix_(rest, rest)] + np.diag(eta / alpha[rest])) @ lam - 2.0 * lam @ K[rest, p])


def _random_model(seed: int, mix: str = "rbf") -> tuple[SvmModel, np.ndarray]:
    """Random normalized Gram with every point a support vector and arbitrary positive coefficients."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 21))
    X = rng.normal(size=(n, 4))
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    alpha = rng.uniform(0.05, 2.0, size=n)
    specs, layers = KERNEL_MIXES[mix]
    K = forward(ArchConfig.uniform(layers, 1, specs), X).final
    model = SvmModel(alpha=alpha, bias=0.0, sv_indices=np.arange(n), C=HARD_C, dual_value=0.0, y=y)
    return model, K


def _layered_problem(seed: int, layers: int, soft: bool):
    """30 points in two 3-D blobs under the default roster with random weights, and the box constraint.

    Soft instances overlap heavily, so C = 10 leaves support vectors at the bound.
    """
    rng = np.random.default_rng(seed)
    shift, spread = (0.3, 1.0) if soft else (1.0, 0.6)
    X = np.vstack([rng.normal(shift, spread, size=(15, 3)), rng.normal(-shift, spread, size=(15, 3))])
    y = np.concatenate([np.ones(15), -np.ones(15)])
    arch = ArchConfig.uniform(layers, 1, default_roster())
    arch = arch.with_theta(rng.uniform(0.3, 1.0, size=arch.n_weights))
    return arch, X, y, SOFT_C if soft else HARD_C


def _frozen_model(K: np.ndarray, y: np.ndarray, C: float, sets=None) -> tuple[SvmModel, tuple]:
    """SVM polished on a frozen support set, with the (support set, vectors at the bound) it used."""
    if sets is None:
        coarse = solve(K, y, C=C, tol=1e-10)
        sets = (coarse.sv_indices, np.setdiff1d(coarse.sv_indices, coarse.free_indices))
    sv, at_bound = sets
    return solve_on_support(K, y, sv, C=C, at_bound=at_bound), sets


def _pair_model(alpha=(0.5, 0.5)) -> SvmModel:
    return SvmModel(
        alpha=np.array(alpha),
        bias=0.0,
        sv_indices=np.array([0, 1]),
        C=SOFT_C,
        dual_value=0.0,
        y=np.array([1.0, -1.0]),
    )


def _bump(size: int, index: int, step: float) -> np.ndarray:
    bump = np.zeros(size)
    bump[index] = step
    return bump


class TestSpanConfig:
    """Test the smoothing settings."""

    def test_phi_at_origin(self):
        """Test phi(0) = 0.5 with c = 5, d = 0."""
        assert phi(0.0, SpanConfig(c=5.0, d_offset=0.0)) == pytest.approx(0.5)

    def test_phi_prime_matches_finite_difference(self):
        """Test the sigmoid slope against a central difference."""
        cfg = SpanConfig(c=5.0, d_offset=0.3)
        x, step = 0.2, 1e-6
        fd = (phi(x + step, cfg) - phi(x - step, cfg)) / (2 * step)
        assert phi_prime(x, cfg) == pytest.approx(fd, rel=1e-6)

    def test_invalid(self):
        """Test that c and eta must be positive."""
        with pytest.raises(ConfigError):
            SpanConfig(c=0.0)
        with pytest.raises(ConfigError):
            SpanConfig(eta=-1.0)


class TestBuildWorkspace:
    """Test the support-vector workspace."""

    def test_two_point_bordered_inverse(self, two_point, two_point_model):
        """Test the bordered matrix and [K~^-1]_11 = 1/4."""
        K, _ = two_point

        ws = build_workspace(two_point_model, K, SpanConfig(eta=1e-9))

        np.testing.assert_array_equal(ws.bordered, [[1, -1, 1], [-1, 1, 1], [1, 1, 0]])
        assert np.linalg.inv(ws.bordered)[0, 0] == pytest.approx(0.25)
        assert ws.q[-1] == 0.0
        assert ws.g[-1] == 0.0
        np.testing.assert_allclose(ws.B_inv @ ws.B, np.eye(3), atol=1e-8)

    def test_single_support_vector(self, two_point):
        """Test that one support vector is refused."""
        K, y = two_point
        model = SvmModel(alpha=np.array([0.5, 0.0]), bias=0.0, sv_indices=np.array([0]), C=10.0, dual_value=0.0, y=y)

        with pytest.raises(NumericFailure, match="at least 2"):
            build_workspace(model, K, SpanConfig())

    def test_free_and_bounded_split(self, two_point):
        """Test that only vectors strictly inside the box enter the margin system."""
        K, _ = two_point

        ws = build_workspace(_pair_model(alpha=(0.5, SOFT_C)), K, SpanConfig())

        np.testing.assert_array_equal(ws.free, [0])
        np.testing.assert_array_equal(ws.margin, [[1, 1], [1, 0]])

    def test_singular_regularized_matrix(self):
        """Test that a numerically singular B raises with its condition estimate."""
        with pytest.raises(SingularWorkspaceError, match="larger eta") as exc_info:
            build_workspace(_pair_model(), np.ones((2, 2)), SpanConfig(eta=1e-14))

        assert exc_info.value.condition > 1e12

    def test_ill_conditioned_kernel_with_regular_b(self):
        """Test that a nearly duplicated pair still builds and differentiates when B is well conditioned."""
        gap = 1e-13
        K = np.array([[1.0, 1.0 - gap], [1.0 - gap, 1.0]])
        model = _pair_model()
        cfg = SpanConfig(eta=0.1)

        ws = build_workspace(model, K, cfg)
        d_spans, d_t = span_grad(ws, np.array([[0.0, 1.0], [1.0, 0.0]]), model, cfg)

        assert np.linalg.cond(ws.bordered) > 1e12
        assert np.linalg.cond(ws.B) < 1e3
        assert np.all(np.isfinite(d_spans))
        assert np.isfinite(d_t)

    def test_duplicated_support_vectors(self):
        """Test that duplicated free vectors leave the spans defined but make the gradient raise."""
        model = _pair_model()
        cfg = SpanConfig()
        ws = build_workspace(model, np.ones((2, 2)), cfg)

        assert np.all(np.isfinite(smoothed_spans(ws)))
        with pytest.raises(SingularWorkspaceError, match="duplicated") as exc_info:
            span_grad(ws, np.eye(2), model, cfg)

        assert exc_info.value.condition > 1e12


class TestSmoothedSpans:
    """Test the closed-form regularized span."""

    def test_two_point_limit(self, two_point, two_point_model):
        """Test S_p^2 -> 4 and T_span -> 1.986614 as eta -> 0."""
        K, _ = two_point
        cfg = SpanConfig(c=5.0, d_offset=0.0, eta=1e-9)
        ws = build_workspace(two_point_model, K, cfg)

        np.testing.assert_allclose(smoothed_spans(ws), [4.0, 4.0], atol=1e-6)
        assert smoothed_span_sq(ws, 1) == pytest.approx(4.0, abs=1e-6)
        assert t_span(two_point_model, ws, cfg) == pytest.approx(1.986614, abs=1e-6)

    def test_index_out_of_range(self, two_point, two_point_model):
        """Test that p must index a support vector."""
        K, _ = two_point
        ws = build_workspace(two_point_model, K, SpanConfig())
        with pytest.raises(IndexError):
            smoothed_span_sq(ws, 2)

    @pytest.mark.parametrize("eta", [1e-3, 0.1, 1.0])
    @pytest.mark.parametrize("mix", list(KERNEL_MIXES))
    @pytest.mark.parametrize("seed", range(50))
    def test_matches_quadratic_program(self, seed, mix, eta):
        """Test the closed form against the constrained minimization it solves."""
        model, K = _random_model(seed, mix)
        cfg = SpanConfig(eta=eta)

        spans = smoothed_spans(build_workspace(model, K, cfg))

        expected = [_span_by_qp(K, model.alpha, p, cfg.eta) for p in range(len(model.alpha))]
        np.testing.assert_allclose(spans, expected, rtol=1e-6, atol=1e-9)
        assert np.all(spans > 0)

    @pytest.mark.parametrize("mix", ["rbf", "roster", "deep-roster"])
    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_in_eta(self, seed, mix):
        """Test that a larger eta never shrinks a span."""
        model, K = _random_model(seed, mix)

        etas = np.geomspace(1e-4, 1, 9)
        spans = np.array([smoothed_spans(build_workspace(model, K, SpanConfig(eta=eta))) for eta in etas])

        assert np.all(np.diff(spans, axis=0) >= -1e-9)

    def test_t_span_range(self):
        """Test 0 <= T_span <= n_sv."""
        model, K = _random_model(0)
        cfg = SpanConfig()

        value = t_span(model, build_workspace(model, K, cfg), cfg)

        assert 0.0 <= value <= model.n_sv

    def test_small_spans_predict_no_errors(self):
        """Test that T_span vanishes when every alpha_p S_p^2 is far below 1."""
        model, K = _random_model(1)
        model = SvmModel(
            alpha=model.alpha * 1e-3,
            bias=0.0,
            sv_indices=model.sv_indices,
            C=HARD_C,
            dual_value=0.0,
            y=model.y,
        )
        cfg = SpanConfig(c=50.0, eta=1e-4)

        assert t_span(model, build_workspace(model, K, cfg), cfg) < 1e-10


class TestSpanGrad:
    """Test the span gradient with respect to a kernel weight."""

    def test_zero_direction(self, two_point, two_point_model):
        """Test that a zero kernel derivative gives zero gradients."""
        K, _ = two_point
        cfg = SpanConfig()
        ws = build_workspace(two_point_model, K, cfg)

        d_spans, d_t = span_grad(ws, np.zeros((2, 2)), two_point_model, cfg)

        np.testing.assert_array_equal(d_spans, 0.0)
        assert d_t == 0.0

    def test_without_alpha_term(self):
        """Test that dropping the alpha term leaves sum(phi' * alpha * dS)."""
        model, K = _random_model(2)
        cfg = SpanConfig(include_alpha_term=False)
        ws = build_workspace(model, K, cfg)
        dK = base_gram(KernelSpec.linear(), np.random.default_rng(0).normal(size=(len(model.alpha), 2)))

        d_spans, d_t = span_grad(ws, dK, model, cfg)

        slope = phi_prime(model.alpha * smoothed_spans(ws) - 1.0, cfg)
        assert d_t == pytest.approx(float(np.sum(slope * model.alpha * d_spans)))

    def test_bounded_vectors_keep_their_coefficient(self):
        """Test that vectors at C get a zero alpha derivative while the free ones stay on the margin."""
        model, K = _random_model(3)
        alpha = model.alpha.copy()
        alpha[:3] = SOFT_C
        model = SvmModel(alpha=alpha, bias=0.0, sv_indices=model.sv_indices, C=SOFT_C, dual_value=0.0, y=model.y)
        ws = build_workspace(model, K, SpanConfig())
        dK = base_gram(KernelSpec.linear(), np.random.default_rng(1).normal(size=(len(alpha), 2)))

        d_alpha = alpha_derivative(ws, dK)

        np.testing.assert_array_equal(ws.free, np.arange(3, len(alpha)))
        np.testing.assert_array_equal(d_alpha[:3], 0.0)
        d_v = model.y * d_alpha
        assert d_v.sum() == pytest.approx(0.0, abs=1e-9)
        # each free vector's margin moves by the same bias change
        shift = (dK @ (model.y * alpha) + K @ d_v)[3:]
        assert np.ptp(shift) < 1e-8 * max(1.0, float(np.abs(shift).max()))

    def test_all_support_vectors_at_bound(self):
        """Test that with no free vector the alpha term contributes nothing."""
        model, K = _random_model(4)
        alpha = np.full(len(model.alpha), SOFT_C)
        model = SvmModel(alpha=alpha, bias=0.0, sv_indices=model.sv_indices, C=SOFT_C, dual_value=0.0, y=model.y)
        dK = base_gram(KernelSpec.linear(), np.random.default_rng(2).normal(size=(len(alpha), 2)))
        with_term = SpanConfig(include_alpha_term=True)
        ws = build_workspace(model, K, with_term)

        _, d_t = span_grad(ws, dK, model, with_term)
        _, d_t_without = span_grad(ws, dK, model, SpanConfig(include_alpha_term=False))

        assert len(ws.free) == 0
        np.testing.assert_array_equal(alpha_derivative(ws, dK), 0.0)
        assert d_t == d_t_without

    def test_soft_instances_reach_the_bound(self):
        """Test that the C = 10 instances used below do hold support vectors at the bound."""
        reached = 0
        for seed in range(20):
            arch, X, y, C = _layered_problem(seed, 2, soft=True)
            _, (_, at_bound) = _frozen_model(forward(arch, X).final, y, C)
            reached += len(at_bound) > 0

        assert reached >= 15

    @pytest.mark.parametrize("soft", [False, True], ids=["hard", "soft"])
    @pytest.mark.parametrize("layers", [2, 3])
    @pytest.mark.parametrize("seed", range(20))
    def test_frozen_support_finite_difference(self, seed, layers, soft):
        """Test dS_p^2 and dT_span against finite differences with alpha re-solved on the frozen sets."""
        arch, X, y, C = _layered_problem(seed, layers, soft)
        cfg = SpanConfig(eta=0.1)
        stack = forward(arch, X)
        model, sets = _frozen_model(stack.final, y, C)
        ws = build_workspace(model, stack.final, cfg)
        flat, step = arch.flat_theta(), 1e-5

        def at(theta: np.ndarray) -> tuple[np.ndarray, float]:
            K = forward(arch.with_theta(theta), X).final
            perturbed, _ = _frozen_model(K, y, C, sets)
            perturbed_ws = build_workspace(perturbed, K, cfg)
            return smoothed_spans(perturbed_ws), t_span(perturbed, perturbed_ws, cfg)

        for index, dK in enumerate(grad_theta(arch, stack)):
            spans_plus, t_plus = at(flat + _bump(len(flat), index, step))
            spans_minus, t_minus = at(flat - _bump(len(flat), index, step))
            fd_spans = (spans_plus - spans_minus) / (2 * step)

            d_spans, d_t = span_grad(ws, dK, model, cfg)

            scale = max(1.0, float(np.abs(fd_spans).max()))
            np.testing.assert_allclose(d_spans, fd_spans, rtol=1e-3, atol=1e-4 * scale)
            assert d_t == pytest.approx((t_plus - t_minus) / (2 * step), rel=1e-3, abs=1e-4)

    @pytest.mark.slow
    @pytest.mark.parametrize("soft", [False, True], ids=["hard", "soft"])
    @pytest.mark.parametrize("layers", [2, 3])
    @pytest.mark.parametrize("seed", range(10))
    def test_full_pipeline_finite_difference(self, seed, layers, soft):
        """Test dT_span against re-solving the SVM at perturbed weights where the support sets do not change."""
        arch, X, y, C = _layered_problem(seed, layers, soft)
        cfg = SpanConfig(eta=0.1)
        stack = forward(arch, X)
        model, sets = _frozen_model(stack.final, y, C)
        ws = build_workspace(model, stack.final, cfg)
        flat, step = arch.flat_theta(), 1e-5

        def objective_at(theta: np.ndarray) -> tuple[float, tuple]:
            K = forward(arch.with_theta(theta), X).final
            perturbed, perturbed_sets = _frozen_model(K, y, C)
            return t_span(perturbed, build_workspace(perturbed, K, cfg), cfg), perturbed_sets

        def same_sets(other: tuple) -> bool:
            return all(np.array_equal(mine, theirs) for mine, theirs in zip(sets, other))

        checked = 0
        for index, dK in enumerate(grad_theta(arch, stack)):
            plus, sets_plus = objective_at(flat + _bump(len(flat), index, step))
            minus, sets_minus = objective_at(flat - _bump(len(flat), index, step))
            if not (same_sets(sets_plus) and same_sets(sets_minus)):
                continue
            _, d_t = span_grad(ws, dK, model, cfg)
            assert d_t == pytest.approx((plus - minus) / (2 * step), rel=1e-2, abs=1e-5)
            checked += 1

        assert checked > 0
