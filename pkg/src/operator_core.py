"""
Commuting matrix tuples (S_1, ..., S_{n-1}, P): operator pencils, joint
spectrum, Gamma_n-unitary classification, polynomial evaluation with the
von Neumann falsifier, and the layered Gamma_n-contraction certificate.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, schur, svdvals
from scipy.optimize import minimize

from src.config import get_settings
from src.errors import (
    DegenerateCombinationError,
    InvalidArgumentError,
    InvalidDimensionError,
    NumericalFailureError,
)
from src.scalar_geometry import (
    DEFAULT_TOL,
    AlphaGrid,
    GammaPoint,
    PencilScanReport,
    check_unimodular,
    elementary_symmetric,
    gamma_membership_of_coordinates,
)

logger = logging.getLogger(__name__)

COMMUTATIVITY_TOL = 1e-10
NORMALITY_RTOL = 1e-8
TRIANGULARIZATION_RTOL = 1e-8
TRIANGULARIZATION_ATTEMPTS = 5
ALPHA_TOL = 1e-12
PENCIL_TOL = 1e-8
VN_SLACK_RTOL = 1e-6
MIN_BOUNDARY_SAMPLES = 1000


def spectral_norm(matrix: np.ndarray) -> float:
    """Operator norm: the largest singular value (0 for empty matrices)."""
    if matrix.size == 0:
        return 0.0
    return float(svdvals(matrix)[0])


def adjoint(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def commutativity_residual(matrices: Sequence[np.ndarray]) -> float:
    """max over pairs of ||AB - BA|| / (1 + ||A|| ||B||)."""
    norms = [spectral_norm(m) for m in matrices]
    worst = 0.0
    for a in range(len(matrices)):
        for b in range(a + 1, len(matrices)):
            A, B = matrices[a], matrices[b]
            residual = spectral_norm(A @ B - B @ A) / (1.0 + norms[a] * norms[b])
            worst = max(worst, residual)
    return worst


def normality_residual(matrix: np.ndarray) -> float:
    """||A A* - A* A|| / ||A||^2 (0 for the zero matrix)."""
    norm = spectral_norm(matrix)
    if norm == 0.0:
        return 0.0
    return spectral_norm(matrix @ adjoint(matrix) - adjoint(matrix) @ matrix) / norm ** 2


@dataclass(eq=False)
class OperatorTuple:
    """n commuting dim x dim complex matrices (S_1, ..., S_{n-1}, P)."""

    n: int
    S: List[np.ndarray]
    P: np.ndarray
    commutativity_tol: float = field(default=COMMUTATIVITY_TOL, repr=False)
    commutativity_residual: float = field(init=False, default=0.0)

    def __post_init__(self):
        if int(self.n) < 2:
            raise InvalidDimensionError(f"n must be at least 2, got {self.n}")
        self.n = int(self.n)
        if len(self.S) != self.n - 1:
            raise InvalidDimensionError(f"expected {self.n - 1} S-matrices, got {len(self.S)}")
        P = np.atleast_2d(np.asarray(self.P, dtype=complex))
        S = [np.atleast_2d(np.asarray(m, dtype=complex)) for m in self.S]
        dim = P.shape[0]
        for m in S + [P]:
            if m.ndim != 2 or m.shape != (dim, dim):
                raise InvalidDimensionError(f"all matrices must be {dim}x{dim}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise InvalidArgumentError("matrix entries must be finite")
        self.S, self.P = S, P
        self.commutativity_residual = commutativity_residual(self.matrices)
        if self.commutativity_residual > self.commutativity_tol:
            raise InvalidArgumentError(
                f"matrices do not commute (residual {self.commutativity_residual:.3e} > {self.commutativity_tol:.1e})"
            )

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], commutativity_tol: float = COMMUTATIVITY_TOL) -> "OperatorTuple":
        matrices = list(matrices)
        return cls(n=len(matrices), S=matrices[:-1], P=matrices[-1], commutativity_tol=commutativity_tol)

    @classmethod
    def empty(cls, n: int) -> "OperatorTuple":
        zero = np.zeros((0, 0), dtype=complex)
        return cls(n=n, S=[zero.copy() for _ in range(n - 1)], P=zero.copy())

    @classmethod
    def from_point(cls, point: GammaPoint) -> "OperatorTuple":
        return cls.from_matrices([np.array([[c]], dtype=complex) for c in point.coordinates])

    @property
    def dim(self) -> int:
        return int(self.P.shape[0])

    @property
    def matrices(self) -> List[np.ndarray]:
        return list(self.S) + [self.P]

    def S_at(self, i: int) -> np.ndarray:
        """S_i with 1-based index; S_n is P."""
        return self.matrices[i - 1]

    def norms(self) -> List[float]:
        return [spectral_norm(m) for m in self.matrices]

    def scale(self) -> float:
        return 1.0 + max(self.norms(), default=0.0)

    def conjugated(self, U: np.ndarray) -> "OperatorTuple":
        """The tuple U M U* for every matrix M."""
        return OperatorTuple.from_matrices([U @ m @ adjoint(U) for m in self.matrices], self.commutativity_tol)

    def compressed(self, Q: np.ndarray, commutativity_tol: Optional[float] = None) -> "OperatorTuple":
        """The tuple Q* M Q; Q has orthonormal columns."""
        tol = self.commutativity_tol if commutativity_tol is None else commutativity_tol
        if Q.shape[1] == 0:
            return OperatorTuple.empty(self.n)
        return OperatorTuple.from_matrices([adjoint(Q) @ m @ Q for m in self.matrices], tol)

    def is_normal(self, rtol: float = NORMALITY_RTOL) -> bool:
        return all(normality_residual(m) <= rtol for m in self.matrices)


def normal_part_check(tup: OperatorTuple) -> Dict[str, float]:
    """Normality residual of every matrix, keyed S1, ..., S{n-1}, P."""
    return {
        ("P" if k == tup.n else f"S{k}"): normality_residual(m)
        for k, m in enumerate(tup.matrices, start=1)
    }


# ---------------------------------------------------------------------------
# Pencils
# ---------------------------------------------------------------------------

def _check_index(n: int, i: int):
    if not 1 <= int(i) <= n - 1:
        raise InvalidArgumentError(f"pencil index must lie in 1..{n - 1}, got {i}")


def _check_alpha(alpha: complex) -> complex:
    alpha = complex(alpha)
    if abs(alpha) > 1.0 + ALPHA_TOL:
        raise InvalidArgumentError(f"alpha must lie in the closed unit disc, |alpha| = {abs(alpha):.15g}")
    return alpha


def _pencil_stack(tup: OperatorTuple, i: int, alphas: np.ndarray) -> np.ndarray:
    """Phi_i(alpha S_1, ..., alpha^n P) for every alpha, shape (m, dim, dim)."""
    n = tup.n
    weights = alphas[:, None, None]
    eye = np.eye(tup.dim, dtype=complex)
    A = n * eye - weights ** i * tup.S_at(i)
    B = n * weights ** n * tup.P - weights ** (n - i) * tup.S_at(n - i)
    return adjoint(A) @ A - adjoint(B) @ B


def operator_pencil(tup: OperatorTuple, i: int, alpha: complex) -> np.ndarray:
    _check_index(tup.n, i)
    alpha = _check_alpha(alpha)
    return _pencil_stack(tup, int(i), np.array([alpha]))[0]


def operator_pencil_expanded(tup: OperatorTuple, i: int, alpha: complex) -> np.ndarray:
    """n^2(I - P*P) + (S_i*S_i - S_{n-i}*S_{n-i}) - n(S_i - S_{n-i}*P) - n(S_i* - P*S_{n-i})."""
    _check_index(tup.n, i)
    alpha = _check_alpha(alpha)
    n = tup.n
    Si = alpha ** i * tup.S_at(i)
    Sni = alpha ** (n - i) * tup.S_at(n - i)
    P = alpha ** n * tup.P
    eye = np.eye(tup.dim, dtype=complex)
    return (
        n ** 2 * (eye - adjoint(P) @ P)
        + (adjoint(Si) @ Si - adjoint(Sni) @ Sni)
        - n * (Si - adjoint(Sni) @ P)
        - n * (adjoint(Si) - adjoint(P) @ Sni)
    )


def pencil_pair_sum(tup: OperatorTuple, i: int, omega: complex, beta: complex) -> np.ndarray:
    """Phi_i at omega plus Phi_{n-i} at beta."""
    return operator_pencil(tup, i, omega) + operator_pencil(tup, tup.n - i, beta)


def _min_eigenvalues(tup: OperatorTuple, alphas: np.ndarray) -> np.ndarray:
    values = np.empty((tup.n - 1, alphas.shape[0]))
    for i in range(1, tup.n):
        try:
            values[i - 1] = np.linalg.eigvalsh(_pencil_stack(tup, i, alphas))[:, 0]
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"Hermitian eigensolver failed for pencil {i}: {e}")
    return values


def pencil_min_eig_scan(tup: OperatorTuple, grid: Optional[AlphaGrid] = None, threads: Optional[int] = None) -> PencilScanReport:
    if tup.dim == 0:
        raise InvalidDimensionError("pencil scan needs a tuple of dimension at least 1")
    grid = grid or AlphaGrid()
    threads = threads or get_settings().threads
    alphas = grid.samples()

    # Chunks are reassembled in order, so minima do not depend on scheduling
    chunks = [c for c in np.array_split(alphas, max(1, threads * 2)) if c.shape[0]]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda chunk: _min_eigenvalues(tup, chunk), chunks))
    else:
        parts = [_min_eigenvalues(tup, chunk) for chunk in chunks]

    return PencilScanReport(kind="operator", n=tup.n, alphas=alphas, values=np.concatenate(parts, axis=1), grid=grid)


# ---------------------------------------------------------------------------
# Joint spectrum
# ---------------------------------------------------------------------------

@dataclass
class JointSpectrum:
    """Aligned diagonals after simultaneous unitary triangularization."""

    points: np.ndarray
    residual: float
    attempts: int
    basis: np.ndarray = field(repr=False, default=None)

    def gamma_points(self) -> List[GammaPoint]:
        return [GammaPoint.from_coordinates(row) for row in self.points]


def simultaneous_triangularize(matrices: Sequence[np.ndarray], rng: Optional[np.random.Generator] = None) -> JointSpectrum:
    """Schur-triangularize a random combination and check that it triangularizes every matrix."""
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    dim = matrices[0].shape[0]
    if dim == 0:
        return JointSpectrum(points=np.zeros((0, len(matrices)), dtype=complex), residual=0.0, attempts=0,
                             basis=np.zeros((0, 0), dtype=complex))
    rng = rng if rng is not None else np.random.default_rng(0)
    scales = [1.0 + spectral_norm(m) for m in matrices]

    worst = float("inf")
    for attempt in range(1, TRIANGULARIZATION_ATTEMPTS + 1):
        weights = rng.standard_normal(len(matrices)) + 1j * rng.standard_normal(len(matrices))
        combination = sum(w * m / s for w, m, s in zip(weights, matrices, scales))
        try:
            _, Z = schur(combination, output="complex")
        except LinAlgError as e:
            raise NumericalFailureError(f"Schur decomposition failed: {e}")
        blocks = [adjoint(Z) @ m @ Z for m in matrices]
        residual = max(np.linalg.norm(np.tril(b, -1)) / s for b, s in zip(blocks, scales))
        if residual <= TRIANGULARIZATION_RTOL:
            points = np.stack([np.diag(b) for b in blocks], axis=1)
            return JointSpectrum(points=points, residual=float(residual), attempts=attempt, basis=Z)
        logger.debug("triangularization attempt %d left residual %.3e", attempt, residual)
        worst = min(worst, residual)

    raise DegenerateCombinationError(
        f"no random combination triangularized the family (best residual {worst:.3e})", residual=worst
    )


def joint_spectrum(tup: OperatorTuple, seed: int = 0) -> JointSpectrum:
    return simultaneous_triangularize(tup.matrices, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Gamma_n-unitaries
# ---------------------------------------------------------------------------

@dataclass
class GammaUnitaryVerdict:
    is_unitary: bool
    failed_check: Optional[str]
    residuals: Dict[str, float]

    def __bool__(self):
        return self.is_unitary

    def as_dict(self) -> Dict:
        return {"is_unitary": self.is_unitary, "failed_check": self.failed_check, "residuals": dict(self.residuals)}


def scaled_subtuple(tup: OperatorTuple) -> List[np.ndarray]:
    """((n-1)/n S_1, (n-2)/n S_2, ..., 1/n S_{n-1})."""
    n = tup.n
    return [(n - i) / n * tup.S_at(i) for i in range(1, n)]


def is_gamma_unitary(tup: OperatorTuple, tol: float = DEFAULT_TOL, seed: int = 0) -> GammaUnitaryVerdict:
    residuals: Dict[str, float] = {}
    if tup.dim == 0:
        return GammaUnitaryVerdict(True, None, residuals)
    n = tup.n
    eye = np.eye(tup.dim)
    P = tup.P

    residuals["P*P-I"] = spectral_norm(adjoint(P) @ P - eye)
    residuals["PP*-I"] = spectral_norm(P @ adjoint(P) - eye)
    if max(residuals["P*P-I"], residuals["PP*-I"]) > tol:
        return GammaUnitaryVerdict(False, "P_unitary", residuals)

    worst = 0.0
    for i in range(1, n):
        Si, Sni = tup.S_at(i), tup.S_at(n - i)
        scale = 1.0 + spectral_norm(Si) + spectral_norm(Sni)
        residual = spectral_norm(Si - adjoint(Sni) @ P) / scale
        residuals[f"S{i}-S{n - i}*P"] = residual
        worst = max(worst, residual)
    if worst > tol:
        return GammaUnitaryVerdict(False, "S_i=S_(n-i)*P", residuals)

    scaled = scaled_subtuple(tup)
    normality = max(normality_residual(m) for m in scaled)
    residuals["scaled_normality"] = normality
    if normality > NORMALITY_RTOL:
        return GammaUnitaryVerdict(False, "scaled_subtuple_normal", residuals)

    spectrum = simultaneous_triangularize(scaled, np.random.default_rng(seed))
    margins = [gamma_membership_of_coordinates(row, tol) for row in spectrum.points]
    residuals["scaled_min_margin"] = min(v.margin for v in margins)
    if not all(v.inside for v in margins):
        return GammaUnitaryVerdict(False, "scaled_subtuple_membership", residuals)

    return GammaUnitaryVerdict(True, None, residuals)


# ---------------------------------------------------------------------------
# Polynomials and the von Neumann falsifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial in n variables: ((exponent tuple, coefficient), ...)."""

    n_vars: int
    terms: Tuple[Tuple[Tuple[int, ...], complex], ...]

    def __post_init__(self):
        cleaned = []
        for exponent, coefficient in self.terms:
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != self.n_vars:
                raise InvalidArgumentError(f"exponent {exponent} does not have {self.n_vars} entries")
            if any(e < 0 for e in exponent):
                raise InvalidArgumentError(f"negative exponent in {exponent}")
            cleaned.append((exponent, complex(coefficient)))
        object.__setattr__(self, "terms", tuple(cleaned))

    @classmethod
    def constant(cls, n_vars: int, value: complex) -> "Polynomial":
        return cls(n_vars, (((0,) * n_vars, value),))

    @classmethod
    def coordinate(cls, n_vars: int, k: int) -> "Polynomial":
        """The k-th coordinate function (1-based; k = n_vars is p)."""
        exponent = [0] * n_vars
        exponent[k - 1] = 1
        return cls(n_vars, ((tuple(exponent), 1.0),))

    @classmethod
    def random(cls, n_vars: int, max_degree: int, rng: np.random.Generator, max_terms: int = 6) -> "Polynomial":
        terms = []
        for _ in range(int(rng.integers(1, max_terms + 1))):
            degree = int(rng.integers(0, max_degree + 1))
            exponent = tuple(int(e) for e in rng.multinomial(degree, np.full(n_vars, 1.0 / n_vars)))
            coefficient = complex(rng.standard_normal(), rng.standard_normal()) / np.sqrt(2.0)
            terms.append((exponent, coefficient))
        return cls(n_vars, tuple(terms))

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def evaluate_points(self, coordinates: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coordinates, dtype=complex))
        values = np.zeros(coords.shape[0], dtype=complex)
        for exponent, coefficient in self.terms:
            values += coefficient * np.prod(coords ** np.asarray(exponent)[None, :], axis=1)
        return values

    def as_dict(self) -> Dict:
        return {
            "n_vars": self.n_vars,
            "terms": [{"exponent": list(e), "coefficient": [c.real, c.imag]} for e, c in self.terms],
        }


def evaluate_polynomial(tup: OperatorTuple, f: Polynomial) -> np.ndarray:
    if f.n_vars != tup.n:
        raise InvalidArgumentError(f"polynomial has {f.n_vars} variables, tuple has {tup.n} matrices")
    eye = np.eye(tup.dim, dtype=complex)
    powers: List[List[np.ndarray]] = []
    for j, matrix in enumerate(tup.matrices):
        top = max((e[j] for e, _ in f.terms), default=0)
        chain = [eye]
        for _ in range(top):
            chain.append(chain[-1] @ matrix)
        powers.append(chain)

    result = np.zeros((tup.dim, tup.dim), dtype=complex)
    for exponent, coefficient in f.terms:
        term = eye
        for j, e in enumerate(exponent):
            if e:
                term = term @ powers[j][e]
        result += coefficient * term
    return result


@dataclass
class VonNeumannResult:
    operator_norm: float
    sampled_sup: float
    slack: float
    violation: bool

    @property
    def note(self) -> str:
        if self.violation:
            return "||f(T)|| exceeds a lower bound of sup|f| on Gamma_n: not a Gamma_n-contraction"
        return "no violation found; the sampled sup underestimates the true sup, so this is evidence only"

    def as_dict(self) -> Dict:
        return {
            "operator_norm": self.operator_norm,
            "sampled_sup": self.sampled_sup,
            "slack": self.slack,
            "violation": self.violation,
            "note": self.note,
        }


def sampled_sup_norm(
    f: Polynomial,
    samples: int,
    rng: np.random.Generator,
    known_points: Optional[np.ndarray] = None,
    refine: int = 8,
) -> float:
    """Lower estimate of sup |f| over Gamma_n from points of the distinguished boundary."""
    n = f.n_vars
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(samples, n))
    angles[0] = 0.0
    values = np.abs(f.evaluate_points(elementary_symmetric(np.exp(1j * angles))))
    best = float(np.max(values))

    def objective(theta):
        return -abs(f.evaluate_points(elementary_symmetric(np.exp(1j * theta))[None, :])[0]) ** 2

    for start in np.argsort(values)[::-1][:refine]:
        result = minimize(objective, angles[start], method="L-BFGS-B")
        best = max(best, float(np.sqrt(max(-result.fun, 0.0))))

    if known_points is not None and len(known_points):
        best = max(best, float(np.max(np.abs(f.evaluate_points(known_points)))))
    return best


def vn_check(
    tup: OperatorTuple,
    f: Polynomial,
    boundary_samples: int = 2048,
    rng: Optional[np.random.Generator] = None,
    known_points: Optional[np.ndarray] = None,
    slack: Optional[float] = None,
) -> VonNeumannResult:
    if f.n_vars != tup.n:
        raise InvalidArgumentError(f"polynomial has {f.n_vars} variables, tuple has {tup.n} matrices")
    if boundary_samples < MIN_BOUNDARY_SAMPLES:
        raise InvalidArgumentError(f"boundary_samples must be at least {MIN_BOUNDARY_SAMPLES}")
    rng = rng if rng is not None else np.random.default_rng(0)

    operator_norm = spectral_norm(evaluate_polynomial(tup, f))
    sup = sampled_sup_norm(f, boundary_samples, rng, known_points)
    slack = VN_SLACK_RTOL * (1.0 + sup) if slack is None else slack
    return VonNeumannResult(operator_norm, sup, slack, operator_norm > sup + slack)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

class Verdict(str, Enum):
    EXACT = "ExactGammaContraction"
    NECESSARY = "NecessaryConditionsPassed"
    FAILED = "Failed"


@dataclass
class CertificateReport:
    verdict: Verdict
    failed_check: Optional[str]
    evidence: Dict[str, Any]
    passed_checks: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return {
            "verdict": self.verdict.value,
            "failed_check": self.failed_check,
            "passed_checks": list(self.passed_checks),
            "evidence": self.evidence,
        }


def norm_bounds(n: int) -> List[float]:
    """Sup of |s_i| over Gamma_n (C(n, i)) followed by the bound 1 for p."""
    return [float(math.comb(n, i)) for i in range(1, n)] + [1.0]


def certify_gamma_contraction(
    tup: OperatorTuple,
    grid: Optional[AlphaGrid] = None,
    vn_trials: int = 8,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    boundary_samples: int = 2048,
    pencil_tol: float = PENCIL_TOL,
    max_degree: int = 4,
    commutativity_tol: float = COMMUTATIVITY_TOL,
) -> CertificateReport:
    """Run the layered checks in order; the first falsified one decides Failed."""
    evidence: Dict[str, Any] = {"n": tup.n, "dim": tup.dim}
    passed: List[str] = []

    def failed(check: str) -> CertificateReport:
        logger.debug("certificate failed at %s", check)
        return CertificateReport(Verdict.FAILED, check, evidence, passed)

    if tup.dim == 0:
        return CertificateReport(Verdict.EXACT, None, evidence, passed)

    evidence["commutativity_residual"] = tup.commutativity_residual
    if tup.commutativity_residual > commutativity_tol:
        return failed("commutativity")
    passed.append("commutativity")

    norms = tup.norms()
    bounds = norm_bounds(tup.n)
    evidence["norms"] = {("P" if k == tup.n else f"S{k}"): v for k, v in enumerate(norms, start=1)}
    evidence["norm_bounds"] = bounds
    if any(norm > bound + tol for norm, bound in zip(norms, bounds)):
        return failed("norm_bounds")
    passed.append("norm_bounds")

    spectrum = joint_spectrum(tup, seed)
    verdicts = [gamma_membership_of_coordinates(row, tol) for row in spectrum.points]
    evidence["joint_spectrum"] = {
        "points": [[[c.real, c.imag] for c in row] for row in spectrum.points],
        "margins": [v.margin for v in verdicts],
        "triangularization_residual": spectrum.residual,
    }
    if not all(v.inside for v in verdicts):
        return failed("joint_spectrum")
    passed.append("joint_spectrum")

    scan = pencil_min_eig_scan(tup, grid)
    evidence["pencil_scan"] = scan.as_dict()
    if scan.certified_minimum < -pencil_tol:
        return failed("pencil_positivity")
    passed.append("pencil_positivity")

    rng = np.random.default_rng(seed)
    vn_results = []
    for _ in range(vn_trials):
        f = Polynomial.random(tup.n, max_degree, rng)
        result = vn_check(tup, f, boundary_samples, rng, known_points=spectrum.points)
        vn_results.append(result.as_dict())
        if result.violation:
            evidence["von_neumann"] = vn_results
            return failed("von_neumann")
    evidence["von_neumann"] = vn_results
    passed.append("von_neumann")

    normality = normal_part_check(tup)
    evidence["normality_residuals"] = normality
    if all(r <= NORMALITY_RTOL for r in normality.values()):
        return CertificateReport(Verdict.EXACT, None, evidence, passed)
    return CertificateReport(Verdict.NECESSARY, None, evidence, passed)


def rotate_tuple(tup: OperatorTuple, omega: complex) -> OperatorTuple:
    omega = check_unimodular(omega)
    rotated = [omega ** k * m for k, m in enumerate(tup.matrices, start=1)]
    return OperatorTuple.from_matrices(rotated, tup.commutativity_tol)
