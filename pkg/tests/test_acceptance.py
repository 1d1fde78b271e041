"""
Property suites over seeded instances.

Each suite runs a reduced sample count by default; the full counts are
parametrized under the `slow` marker (./run_tests.sh --slow).
"""

import numpy as np
import pytest

from src.decomposition import canonical_decompose, is_cnu
from src.generators import (
    GeneratorSpec,
    generate,
    random_unitary,
    sample_gamma_point,
)
from src.operator_core import (
    OperatorTuple,
    Polynomial,
    Verdict,
    certify_gamma_contraction,
    is_gamma_unitary,
    joint_spectrum,
    pencil_min_eig_scan,
    rotate_tuple,
    vn_check,
)
from src.scalar_geometry import (
    AlphaGrid,
    costara_membership,
    membership,
    rotate_point,
    scalar_pencil_factored,
    scalar_pencil_scan,
    scalar_pencil_value,
)

CONTRACTION_MODELS = ("normal_interior", "normal_boundary", "mixed_direct_sum",
                      "single_contraction_blaschke", "cnu_jordan")


def sized(default, full):
    """Parametrize a sample count: the default run and a slow full-size run"""
    return pytest.mark.parametrize("count", [default, pytest.param(full, marks=pytest.mark.slow)])


class TestMembershipEquivalence:
    """Root test, rotated root test and the Costara recursion agree"""

    @pytest.mark.integration
    @sized(200, 10_000)
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_three_tests_agree(self, n, count):
        """Disagreements only occur within 1e-6 of the boundary"""
        rng = np.random.default_rng(1000 + n)
        checked = 0
        while checked < count:
            mode = "interior" if checked % 2 == 0 else "outside"
            point = sample_gamma_point(n, rng, mode)
            if abs(point.p) >= 1.0:
                continue
            checked += 1
            verdict = membership(point)
            if abs(verdict.margin) <= 1e-6:
                continue
            assert costara_membership(point) == verdict.inside
            for omega in np.exp(2j * np.pi * rng.uniform(size=16)):
                assert membership(rotate_point(point, omega)).inside == verdict.inside


class TestScalarPencil:
    """Forward direction and sign/modulus equivalence of the scalar pencil"""

    @pytest.mark.integration
    @sized(50, 1000)
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_forward_direction(self, n, count):
        """Interior points never give a certified pencil value below -1e-10"""
        rng = np.random.default_rng(2000 + n)
        grid = AlphaGrid.uniform(rings=4, angles=64)
        for _ in range(count):
            report = scalar_pencil_scan(sample_gamma_point(n, rng, "interior"), grid)
            assert report.certified_minimum >= -1e-10
            assert report.disagreements == 0

    @pytest.mark.integration
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_factored_form_matches(self, n):
        """The factored and expanded pencils agree to 1e-12 relative"""
        rng = np.random.default_rng(3000 + n)
        for _ in range(100):
            point = sample_gamma_point(n, rng, "interior" if rng.uniform() < 0.5 else "outside")
            for i in range(1, n):
                value, factored = scalar_pencil_value(point, i), scalar_pencil_factored(point, i)
                assert abs(value - factored) <= 1e-12 * (1.0 + abs(value))


class TestOperatorProperties:
    """Pencil positivity, Gamma_n-unitary identities and the von Neumann falsifier on generated tuples"""

    @pytest.mark.integration
    @sized(3, 40)
    @pytest.mark.parametrize("model", CONTRACTION_MODELS)
    def test_operator_pencil_positive(self, model, count, small_grid):
        """Certified pencil minima of generated contractions stay above -1e-8"""
        for seed in range(count):
            n = 2 + seed % 4
            tup = generate(GeneratorSpec(seed=seed, n=n, dim=1 + seed % 6, model=model)).tuple
            assert pencil_min_eig_scan(tup, small_grid).certified_minimum >= -1e-8

    @pytest.mark.integration
    @sized(10, 200)
    def test_boundary_instances_are_unitary(self, count):
        """normal_boundary instances satisfy the Gamma_n-unitary identities at 1e-10"""
        for seed in range(count):
            tup = generate(GeneratorSpec(seed=seed, n=2 + seed % 4, dim=1 + seed % 8, model="normal_boundary")).tuple
            verdict = is_gamma_unitary(tup, tol=1e-10)
            assert verdict, verdict.as_dict()

    @pytest.mark.integration
    @sized(4, 60)
    @pytest.mark.parametrize("model", CONTRACTION_MODELS)
    def test_von_neumann_never_violated(self, model, count):
        """Random polynomials of degree <= 4 never beat the sampled sup on contractions"""
        rng = np.random.default_rng(4000)
        for seed in range(count):
            n = 2 + seed % 3
            tup = generate(GeneratorSpec(seed=seed, n=n, dim=3, model=model)).tuple
            known = joint_spectrum(tup).points
            f = Polynomial.random(n, 4, rng)
            result = vn_check(tup, f, boundary_samples=1000, rng=rng, known_points=known)
            assert not result.violation, result.as_dict()

    @pytest.mark.integration
    @sized(10, 50)
    def test_norm_violations_fail(self, count, small_grid):
        """Tuples with ||S_1|| > n are reported as Failed"""
        rng = np.random.default_rng(5000)
        for _ in range(count):
            n = int(rng.integers(2, 5))
            dim = int(rng.integers(1, 5))
            U = random_unitary(dim, rng)
            S = [(n + rng.uniform(0.1, 2.0)) * U] + [np.zeros((dim, dim)) for _ in range(n - 2)]
            tup = OperatorTuple(n=n, S=S, P=np.eye(dim))
            report = certify_gamma_contraction(tup, small_grid, vn_trials=1, boundary_samples=1000)
            assert report.verdict is Verdict.FAILED
            assert report.failed_check == "norm_bounds"


class TestDecompositionProperties:
    """Known-decomposition oracle and degenerate cases over many seeds"""

    @pytest.mark.integration
    @sized(50, 1000)
    def test_mixed_direct_sums(self, count):
        """Recovered k matches ground truth with small residuals and a clean reconstruction"""
        for seed in range(count):
            n = 2 + seed % 4
            dim = 1 + seed % 8
            instance = generate(GeneratorSpec(seed=seed, n=n, dim=dim, model="mixed_direct_sum"))
            result = canonical_decompose(instance.tuple, precheck=False)
            assert result.k == instance.ground_truth["k"]
            assert result.worst_residual() <= 1e-8
            assert is_gamma_unitary(result.unitary_part, tol=1e-8)
            assert is_cnu(result.cnu_part.P)
            for rebuilt, original in zip(result.reconstruct(), instance.tuple.matrices):
                scale = 1.0 + np.linalg.norm(original, 2)
                assert np.linalg.norm(rebuilt - original, 2) <= 1e-8 * scale

    @pytest.mark.integration
    @sized(10, 100)
    def test_degenerate_dimensions(self, count):
        """k = 0 for cnu_jordan and k = dim for normal_boundary"""
        for seed in range(count):
            n, dim = 2 + seed % 4, 1 + seed % 6
            cnu = generate(GeneratorSpec(seed=seed, n=n, dim=dim, model="cnu_jordan")).tuple
            unitary = generate(GeneratorSpec(seed=seed, n=n, dim=dim, model="normal_boundary")).tuple
            assert canonical_decompose(cnu, precheck=False).k == 0
            assert canonical_decompose(unitary, precheck=False).k == dim


class TestRotationInvariance:
    """Verdicts and decomposition dimensions do not change under rotation"""

    @pytest.mark.integration
    @sized(4, 200)
    def test_verdict_and_k_invariant(self, count, small_grid):
        """16 sampled rotations keep the certificate verdict and k"""
        rng = np.random.default_rng(6000)
        models = ("normal_interior", "normal_boundary", "mixed_direct_sum", "outside_perturbed")
        rotations = 4 if count < 200 else 16
        for seed in range(count):
            model = models[seed % len(models)]
            tup = generate(GeneratorSpec(seed=seed, n=2 + seed % 3, dim=3, model=model)).tuple
            verdict = certify_gamma_contraction(tup, small_grid, vn_trials=1, boundary_samples=1000).verdict
            k = canonical_decompose(tup, precheck=False).k if verdict is not Verdict.FAILED else None
            for omega in np.exp(2j * np.pi * rng.uniform(size=rotations)):
                rotated = rotate_tuple(tup, omega)
                report = certify_gamma_contraction(rotated, small_grid, vn_trials=1, boundary_samples=1000)
                assert report.verdict is verdict
                if k is not None:
                    assert canonical_decompose(rotated, precheck=False).k == k


class TestScalarOracle:
    """For dim = 1 the operator checks reduce to the scalar ones"""

    @pytest.mark.integration
    @sized(100, 10_000)
    def test_one_dimensional_tuples(self, count, small_grid):
        """Certificate verdicts and pencil minima match the scalar computations"""
        rng = np.random.default_rng(7000)
        for _ in range(count):
            n = int(rng.integers(2, 6))
            point = sample_gamma_point(n, rng, "interior" if rng.uniform() < 0.5 else "outside")
            inside = membership(point)
            if abs(inside.margin) <= 1e-6:
                continue
            tup = OperatorTuple.from_point(point)
            scalar_scan = scalar_pencil_scan(point, small_grid)
            operator_scan = pencil_min_eig_scan(tup, small_grid)
            assert np.allclose(operator_scan.values, scalar_scan.values, atol=1e-10)
            if inside.inside:
                report = certify_gamma_contraction(tup, small_grid, vn_trials=1, boundary_samples=1000)
                assert report.verdict is Verdict.EXACT
            else:
                report = certify_gamma_contraction(tup, small_grid, vn_trials=0, boundary_samples=1000)
                assert report.verdict is Verdict.FAILED
