"""
Canonical decomposition of a Gamma_n-contraction.

The maximal subspace on which P acts unitarily and which reduces P is computed
from P alone.  That it also reduces every S_i is then checked, not imposed:
the off-diagonal blocks of each S_i in the split H1 + H2 must vanish.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.linalg import null_space, svd

from src.errors import NotAContractionError, NotAGammaContractionError, TheoremViolationError
from src.operator_core import (
    CertificateReport,
    OperatorTuple,
    Verdict,
    adjoint,
    certify_gamma_contraction,
    is_gamma_unitary,
    spectral_norm,
)
from src.scalar_geometry import DEFAULT_TOL, AlphaGrid

logger = logging.getLogger(__name__)

BLOCK_TOL = 1e-8
ORTHONORMAL_TOL = 1e-12


def _kernel(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Right singular vectors with singular value <= tol * (largest + 1)."""
    cols = matrix.shape[1]
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    _, sv, vh = svd(matrix, full_matrices=True)
    threshold = tol * ((sv[0] if sv.size else 0.0) + 1.0)
    rank = int(np.count_nonzero(sv > threshold))
    return adjoint(vh[rank:])


def _check_contraction(P: np.ndarray, tol: float):
    norm = spectral_norm(P)
    if norm > 1.0 + tol:
        raise NotAContractionError(f"P is not a contraction: ||P|| = {norm:.12g}", norm)


def maximal_unitary_subspace(P: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (dim x k) of the largest reducing subspace on which P is unitary."""
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    dim = P.shape[0]
    if dim == 0:
        return np.zeros((0, 0), dtype=complex)
    _check_contraction(P, tol)

    eye = np.eye(dim, dtype=complex)
    basis = _kernel(np.vstack([eye - adjoint(P) @ P, eye - P @ adjoint(P)]), tol)
    logger.debug("unitary kernel of P has dimension %d of %d", basis.shape[1], dim)

    for iteration in range(dim):
        k = basis.shape[1]
        if k == 0:
            break
        # keep h only if P h and P* h stay in the current subspace
        leak = eye - basis @ adjoint(basis)
        coefficients = _kernel(np.vstack([leak @ P @ basis, leak @ adjoint(P) @ basis]), tol)
        if coefficients.shape[1] == k:
            break
        basis = basis @ coefficients
        logger.debug("iteration %d shrank the subspace to dimension %d", iteration + 1, basis.shape[1])

    if basis.shape[1] == 0:
        return np.zeros((dim, 0), dtype=complex)
    return basis


def is_cnu(P: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return maximal_unitary_subspace(P, tol).shape[1] == 0


def orthogonal_complement(basis: np.ndarray) -> np.ndarray:
    dim, k = basis.shape
    if k == 0:
        return np.eye(dim, dtype=complex)
    if k == dim:
        return np.zeros((dim, 0), dtype=complex)
    return null_space(adjoint(basis))


def _matrix_names(n: int) -> List[str]:
    return [f"S{i}" for i in range(1, n)] + ["P"]


@dataclass
class DecompositionResult:
    basis_H1: np.ndarray
    basis_H2: np.ndarray
    unitary_part: OperatorTuple
    cnu_part: OperatorTuple
    residuals: Dict[str, Dict[str, float]]
    tol: float = DEFAULT_TOL
    block_tol: float = BLOCK_TOL
    certificate: Optional[CertificateReport] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return int(self.basis_H1.shape[1])

    @property
    def dim(self) -> int:
        return int(self.basis_H1.shape[0])

    @property
    def n(self) -> int:
        return self.unitary_part.n

    def reconstruct(self) -> List[np.ndarray]:
        """Q1 U Q1* + Q2 C Q2* for every matrix of the tuple."""
        Q1, Q2 = self.basis_H1, self.basis_H2
        rebuilt = []
        for j in range(self.n):
            M = np.zeros((self.dim, self.dim), dtype=complex)
            if self.k:
                M += Q1 @ self.unitary_part.matrices[j] @ adjoint(Q1)
            if self.dim - self.k:
                M += Q2 @ self.cnu_part.matrices[j] @ adjoint(Q2)
            rebuilt.append(M)
        return rebuilt

    def worst_residual(self) -> float:
        return max((max(r["upper"], r["lower"]) / r["scale"] for r in self.residuals.values()), default=0.0)


def block_residuals(tup: OperatorTuple, Q1: np.ndarray, Q2: np.ndarray) -> Dict[str, Dict[str, float]]:
    """||Q1* M Q2|| and ||Q2* M Q1|| for every matrix, with the scale 1 + ||M||."""
    table = {}
    for name, M in zip(_matrix_names(tup.n), tup.matrices):
        table[name] = {
            "upper": spectral_norm(adjoint(Q1) @ M @ Q2),
            "lower": spectral_norm(adjoint(Q2) @ M @ Q1),
            "scale": 1.0 + spectral_norm(M),
        }
    return table


def canonical_decompose(
    tup: OperatorTuple,
    tol: float = DEFAULT_TOL,
    block_tol: float = BLOCK_TOL,
    precheck: bool = True,
    grid: Optional[AlphaGrid] = None,
    vn_trials: int = 8,
    seed: int = 0,
) -> DecompositionResult:
    certificate = None
    if precheck:
        certificate = certify_gamma_contraction(tup, grid=grid, vn_trials=vn_trials, tol=tol, seed=seed)
        if certificate.verdict is Verdict.FAILED:
            raise NotAGammaContractionError(
                f"tuple is not a Gamma_{tup.n}-contraction (failed check: {certificate.failed_check})",
                report=certificate,
            )
        if certificate.verdict is Verdict.NECESSARY:
            logger.warning("tuple is not normal; only necessary conditions for a Gamma_%d-contraction were checked", tup.n)

    Q1 = maximal_unitary_subspace(tup.P, tol)
    Q2 = orthogonal_complement(Q1)
    residuals = block_residuals(tup, Q1, Q2)
    logger.debug("H1 has dimension %d of %d", Q1.shape[1], tup.dim)

    offending = {
        name: r for name, r in residuals.items()
        if max(r["upper"], r["lower"]) > block_tol * r["scale"]
    }
    if offending:
        raise TheoremViolationError(
            f"H1 + H2 does not reduce {', '.join(offending)}",
            diagnostics={"k": Q1.shape[1], "dim": tup.dim, "block_tol": block_tol, "residuals": residuals},
        )

    unitary_part = tup.compressed(Q1)
    cnu_part = tup.compressed(Q2)

    unitary_verdict = is_gamma_unitary(unitary_part, tol=block_tol, seed=seed)
    if not unitary_verdict:
        raise TheoremViolationError(
            f"restriction to H1 is not a Gamma_{tup.n}-unitary (failed check: {unitary_verdict.failed_check})",
            diagnostics={"k": Q1.shape[1], "dim": tup.dim, "unitary_check": unitary_verdict.as_dict(), "residuals": residuals},
        )
    if not is_cnu(cnu_part.P, tol):
        raise TheoremViolationError(
            "P restricted to H2 still has a unitary part",
            diagnostics={"k": Q1.shape[1], "dim": tup.dim, "residuals": residuals},
        )

    return DecompositionResult(
        basis_H1=Q1,
        basis_H2=Q2,
        unitary_part=unitary_part,
        cnu_part=cnu_part,
        residuals=residuals,
        tol=tol,
        block_tol=block_tol,
        certificate=certificate,
    )


@dataclass(frozen=True)
class CheckOutcome:
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold

    @property
    def margin(self) -> float:
        return self.threshold - self.value

    def as_dict(self) -> Dict:
        return {"passed": self.passed, "value": self.value, "threshold": self.threshold, "margin": self.margin}


@dataclass
class VerificationReport:
    checks: Dict[str, CheckOutcome]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed_checks(self) -> List[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def as_dict(self) -> Dict:
        return {"passed": self.passed, "checks": {name: c.as_dict() for name, c in self.checks.items()}}


def verify_decomposition(tup: OperatorTuple, result: DecompositionResult, tol: float = BLOCK_TOL) -> VerificationReport:
    """Re-derive the block structure of the decomposition and report every identity with its margin."""
    Q1, Q2 = result.basis_H1, result.basis_H2
    n = tup.n
    checks: Dict[str, CheckOutcome] = {}

    def gram_error(Q):
        return spectral_norm(adjoint(Q) @ Q - np.eye(Q.shape[1])) if Q.shape[1] else 0.0

    cross = spectral_norm(adjoint(Q1) @ Q2) if Q1.shape[1] and Q2.shape[1] else 0.0
    checks["bases_orthonormal"] = CheckOutcome(max(gram_error(Q1), gram_error(Q2), cross), ORTHONORMAL_TOL)

    residuals = block_residuals(tup, Q1, Q2)
    worst_block = max(max(r["upper"], r["lower"]) / r["scale"] for r in residuals.values())
    checks["off_diagonal_blocks"] = CheckOutcome(worst_block, tol)

    P1 = adjoint(Q1) @ tup.P @ Q1
    P2 = adjoint(Q2) @ tup.P @ Q2
    if Q1.shape[1]:
        eye = np.eye(Q1.shape[1])
        p1_error = max(spectral_norm(adjoint(P1) @ P1 - eye), spectral_norm(P1 @ adjoint(P1) - eye))
        identity_error = 0.0
        for i in range(1, n):
            Si11 = adjoint(Q1) @ tup.S_at(i) @ Q1
            Sni11 = adjoint(Q1) @ tup.S_at(n - i) @ Q1
            scale = 1.0 + spectral_norm(Si11) + spectral_norm(Sni11)
            identity_error = max(identity_error, spectral_norm(Si11 - adjoint(Sni11) @ P1) / scale)
    else:
        p1_error = identity_error = 0.0
    checks["P1_unitary"] = CheckOutcome(p1_error, tol)
    checks["unitary_block_identity"] = CheckOutcome(identity_error, tol)

    commutation_error = 0.0
    if Q1.shape[1] and Q2.shape[1]:
        for i in range(1, n):
            S = tup.S_at(i)
            S12 = adjoint(Q1) @ S @ Q2
            S21 = adjoint(Q2) @ S @ Q1
            scale = 1.0 + spectral_norm(S)
            commutation_error = max(
                commutation_error,
                spectral_norm(S12 @ P2 - P1 @ S12) / scale,
                spectral_norm(S21 @ P1 - P2 @ S21) / scale,
            )
    checks["commutation_blocks"] = CheckOutcome(commutation_error, tol)

    rebuilt = result.reconstruct()
    reconstruction = max(
        spectral_norm(R - M) / (1.0 + spectral_norm(M)) for R, M in zip(rebuilt, tup.matrices)
    )
    checks["reconstruction"] = CheckOutcome(reconstruction, tol)

    leftover = maximal_unitary_subspace(P2, result.tol).shape[1] if Q2.shape[1] else 0
    checks["cnu_part_trivial"] = CheckOutcome(float(leftover), 0.0)

    return VerificationReport(checks)
