"""
Seeded test instances with known ground truth.

Every model is a pure function of its GeneratorSpec: the same seed, n, dim
and model give the same matrices bit for bit.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag, qr, solve

from src.errors import InvalidArgumentError, InvalidDimensionError, NotAContractionError
from src.operator_core import OperatorTuple, norm_bounds, spectral_norm
from src.scalar_geometry import (
    DEFAULT_TOL,
    AlphaGrid,
    GammaPoint,
    MembershipVerdict,
    membership,
    scalar_pencil_scan,
    symmetrize,
)

logger = logging.getLogger(__name__)

MODELS = (
    "normal_interior",
    "normal_boundary",
    "mixed_direct_sum",
    "single_contraction_blaschke",
    "cnu_jordan",
    "outside_perturbed",
)
SAMPLE_MODES = ("interior", "boundary", "outside")

INTERIOR_RADIUS = 1.0 - 1e-3
OUTSIDE_DELTA = (1e-2, 1.0)
CNU_CONTRACTION_NORM = 0.95
MAX_MOBIUS_ZERO = 0.5
CONTRACTION_TOL = 1e-12


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    n: int
    dim: int
    model: str

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidArgumentError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.n < 2:
            raise InvalidDimensionError(f"n must be at least 2, got {self.n}")
        if self.dim < 1:
            raise InvalidDimensionError(f"dim must be at least 1, got {self.dim}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")

    def as_dict(self) -> Dict:
        return asdict(self)


@dataclass
class GeneratedInstance:
    spec: GeneratorSpec
    tuple: OperatorTuple
    ground_truth: Dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

def _sample_roots(n: int, rng: np.random.Generator, mode: str) -> Tuple[np.ndarray, Optional[float]]:
    if mode not in SAMPLE_MODES:
        raise InvalidArgumentError(f"unknown sampling mode {mode!r}")
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    if mode == "boundary":
        return np.exp(1j * angles), None

    radii = INTERIOR_RADIUS * np.sqrt(rng.uniform(0.0, 1.0, n))
    roots = radii * np.exp(1j * angles)
    if mode == "interior":
        return roots, None

    delta = float(rng.uniform(*OUTSIDE_DELTA))
    j = int(rng.integers(n))
    roots[j] = (1.0 + delta) * np.exp(1j * angles[j])
    return roots, delta


def sample_gamma_point(n: int, rng: np.random.Generator, mode: str = "interior") -> GammaPoint:
    roots, _ = _sample_roots(n, rng, mode)
    return symmetrize(roots)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Gaussian matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    Q, R = qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases[None, :]


def normal_tuple(points: Sequence[GammaPoint], U: Optional[np.ndarray] = None) -> OperatorTuple:
    if not points:
        raise InvalidArgumentError("normal_tuple needs at least one point")
    n = points[0].n
    if any(p.n != n for p in points):
        raise InvalidArgumentError("all points must have the same n")
    coords = np.stack([p.coordinates for p in points])
    matrices = [np.diag(coords[:, j]) for j in range(n)]
    if U is not None:
        matrices = [U @ m @ U.conj().T for m in matrices]
    return OperatorTuple.from_matrices(matrices)


# ---------------------------------------------------------------------------
# Single-contraction models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscMap:
    """A self-map of the closed disc: rotation * (z - a) / (1 - conj(a) z), a constant, or the identity."""

    kind: str = "identity"
    a: complex = 0.0
    rotation: complex = 1.0
    value: complex = 0.0

    def __post_init__(self):
        if self.kind not in ("mobius", "constant", "identity"):
            raise InvalidArgumentError(f"unknown disc map kind {self.kind!r}")
        if self.kind == "mobius" and abs(self.a) >= 1.0:
            raise InvalidArgumentError(f"Mobius zero must lie in the open disc, got |a| = {abs(self.a)}")
        if self.kind == "mobius" and abs(abs(self.rotation) - 1.0) > CONTRACTION_TOL:
            raise InvalidArgumentError("Mobius rotation must be unimodular")
        if self.kind == "constant" and abs(self.value) > 1.0:
            raise InvalidArgumentError(f"constant map must take a value in the closed disc, got {self.value}")

    def __call__(self, z: complex) -> complex:
        if self.kind == "identity":
            return complex(z)
        if self.kind == "constant":
            return complex(self.value)
        return self.rotation * (z - self.a) / (1.0 - np.conj(self.a) * z)

    def apply(self, T: np.ndarray) -> np.ndarray:
        eye = np.eye(T.shape[0], dtype=complex)
        if self.kind == "identity":
            return T.astype(complex)
        if self.kind == "constant":
            return complex(self.value) * eye
        # (I - conj(a) T) and (T - a I) commute
        return self.rotation * solve(eye - np.conj(self.a) * T, T - self.a * eye)

    def as_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "a": [complex(self.a).real, complex(self.a).imag],
            "rotation": [complex(self.rotation).real, complex(self.rotation).imag],
            "value": [complex(self.value).real, complex(self.value).imag],
        }


def single_contraction_model(T: np.ndarray, maps: Sequence[DiscMap]) -> OperatorTuple:
    """The symmetrization (e_1(F), ..., e_n(F)) of F_j = f_j(T)."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    norm = spectral_norm(T)
    if norm > 1.0 + CONTRACTION_TOL:
        raise NotAContractionError(f"T is not a contraction: ||T|| = {norm:.12g}", norm)
    n = len(maps)
    if n < 2:
        raise InvalidDimensionError(f"need at least two disc maps, got {n}")

    dim = T.shape[0]
    sym = [np.eye(dim, dtype=complex)] + [np.zeros((dim, dim), dtype=complex) for _ in range(n)]
    for j, f in enumerate(maps, start=1):
        F = f.apply(T)
        for k in range(j, 0, -1):
            sym[k] = sym[k] + F @ sym[k - 1]
    return OperatorTuple.from_matrices(sym[1:])


def _random_contraction(dim: int, rng: np.random.Generator, norm: float) -> np.ndarray:
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return norm * G / spectral_norm(G)


def _random_mobius(rng: np.random.Generator, max_zero: float) -> DiscMap:
    a = max_zero * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    return DiscMap(kind="mobius", a=complex(a), rotation=complex(np.exp(2j * np.pi * rng.uniform())))


def cnu_model(n: int, dim: int, rng: np.random.Generator) -> OperatorTuple:
    """Single-contraction model over 0.95 * (random contraction) with Mobius maps of small zero."""
    T = _random_contraction(dim, rng, CNU_CONTRACTION_NORM)
    return single_contraction_model(T, [_random_mobius(rng, MAX_MOBIUS_ZERO) for _ in range(n)])


def mixed_direct_sum(
    unitary_points: Sequence[GammaPoint],
    cnu_part: Optional[OperatorTuple],
    U: Optional[np.ndarray] = None,
) -> Tuple[OperatorTuple, int]:
    """Block-diagonal normal boundary part plus a cnu part, conjugated by U; also returns k."""
    blocks = []
    if unitary_points:
        blocks.append(normal_tuple(unitary_points).matrices)
    if cnu_part is not None and cnu_part.dim:
        blocks.append(cnu_part.matrices)
    if not blocks:
        raise InvalidArgumentError("direct sum needs at least one nonempty component")
    n = len(blocks[0])
    if any(len(b) != n for b in blocks):
        raise InvalidArgumentError("components must have the same n")

    matrices = [block_diag(*[b[j] for b in blocks]) for j in range(n)]
    if U is not None:
        matrices = [U @ m @ U.conj().T for m in matrices]
    return OperatorTuple.from_matrices(matrices), len(unitary_points)


def _encode_points(points: Sequence[GammaPoint]) -> List[List[List[float]]]:
    return [[[c.real, c.imag] for c in p.coordinates] for p in points]


def generate(spec: GeneratorSpec) -> GeneratedInstance:
    rng = np.random.default_rng(spec.seed)
    n, dim, model = spec.n, spec.dim, spec.model
    truth: Dict[str, Any] = {"model": model, "seed": spec.seed, "n": n, "dim": dim}

    if model == "normal_interior":
        points = [sample_gamma_point(n, rng, "interior") for _ in range(dim)]
        tup = normal_tuple(points, random_unitary(dim, rng))
        truth.update(label="gamma_contraction", k=0, spectrum=_encode_points(points), unitary_spectrum=[])

    elif model == "normal_boundary":
        points = [sample_gamma_point(n, rng, "boundary") for _ in range(dim)]
        tup = normal_tuple(points, random_unitary(dim, rng))
        truth.update(label="gamma_unitary", k=dim, spectrum=_encode_points(points),
                     unitary_spectrum=_encode_points(points))

    elif model == "mixed_direct_sum":
        k = int(rng.integers(0, dim + 1))
        points = [sample_gamma_point(n, rng, "boundary") for _ in range(k)]
        cnu = cnu_model(n, dim - k, rng) if dim - k else None
        tup, k = mixed_direct_sum(points, cnu, random_unitary(dim, rng))
        truth.update(label="gamma_contraction", k=k, unitary_spectrum=_encode_points(points))

    elif model == "single_contraction_blaschke":
        T = _random_contraction(dim, rng, float(rng.uniform(0.5, 1.0)))
        maps = []
        for _ in range(n):
            if rng.uniform() < 0.8:
                maps.append(_random_mobius(rng, 0.9))
            else:
                value = np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
                maps.append(DiscMap(kind="constant", value=complex(value)))
        tup = single_contraction_model(T, maps)
        truth.update(label="gamma_contraction", k=None, maps=[m.as_dict() for m in maps])

    elif model == "cnu_jordan":
        lam = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        J = lam * np.eye(dim) + np.eye(dim, k=1)
        T = CNU_CONTRACTION_NORM * J / (1.0 + abs(lam))
        tup = single_contraction_model(T, [DiscMap() for _ in range(n)])
        truth.update(label="gamma_contraction", k=0, eigenvalue=[complex(T[0, 0]).real, complex(T[0, 0]).imag])

    else:
        bad = int(rng.integers(dim))
        points, deltas = [], []
        for j in range(dim):
            roots, delta = _sample_roots(n, rng, "outside" if j == bad else "interior")
            points.append(symmetrize(roots))
            if delta is not None:
                deltas.append(delta)
        tup = normal_tuple(points, random_unitary(dim, rng))
        truth.update(label="not_gamma_contraction", k=None, spectrum=_encode_points(points),
                     outside_index=bad, delta=deltas[0])

    logger.debug("generated %s instance (n=%d, dim=%d, seed=%d)", model, n, dim, spec.seed)
    return GeneratedInstance(spec=spec, tuple=tup, ground_truth=truth)


# ---------------------------------------------------------------------------
# Searching the converse of scalar pencil positivity
# ---------------------------------------------------------------------------

@dataclass
class ExplorerCandidate:
    point: GammaPoint
    membership: MembershipVerdict
    pencil_minimum: float
    dense_pencil_minimum: float

    def as_dict(self) -> Dict:
        return {
            "point": [[c.real, c.imag] for c in self.point.coordinates],
            "membership": self.membership.as_dict(),
            "pencil_minimum": self.pencil_minimum,
            "dense_pencil_minimum": self.dense_pencil_minimum,
        }


def _explorer_point(n: int, rng: np.random.Generator) -> GammaPoint:
    if rng.uniform() < 0.5:
        return sample_gamma_point(n, rng, "outside")
    # uniform in the polydisc box |s_i| <= C(n, i), |p| <= 1
    bounds = np.array(norm_bounds(n))
    coords = bounds * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))
    return GammaPoint.from_coordinates(coords)


def explore_pencil_converse(
    n: int,
    budget: int,
    rng: np.random.Generator,
    grid: Optional[AlphaGrid] = None,
    tol: float = DEFAULT_TOL,
    on_sample: Optional[Callable[[], None]] = None,
) -> List[ExplorerCandidate]:
    """Points outside Gamma_n on which every scalar pencil stays non-negative over the grid."""
    if budget < 1:
        raise InvalidArgumentError(f"budget must be at least 1, got {budget}")
    if n < 2:
        raise InvalidDimensionError(f"n must be at least 2, got {n}")
    grid = grid or AlphaGrid()
    dense = grid.densified(4)

    candidates = []
    for _ in range(budget):
        if on_sample is not None:
            on_sample()
        point = _explorer_point(n, rng)
        verdict = membership(point, "closed", tol)
        if verdict.inside:
            continue
        minimum = scalar_pencil_scan(point, grid).minimum
        if minimum < 0.0:
            continue
        dense_minimum = scalar_pencil_scan(point, dense).minimum
        if dense_minimum < 0.0:
            logger.info("candidate dropped after re-verification on the denser grid")
            continue
        candidates.append(ExplorerCandidate(point, verdict, minimum, dense_minimum))

    logger.info("explorer kept %d candidate(s) out of %d samples", len(candidates), budget)
    return candidates
