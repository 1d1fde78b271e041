"""
Points of the symmetrized polydisc.

A point (s_1, ..., s_{n-1}, p) of C^n is read through its fiber polynomial
z^n - s_1 z^{n-1} + s_2 z^{n-2} - ... + (-1)^n p, whose roots are the
preimages of the point under the symmetrization map.  Membership in the
closed set, the open set and the distinguished boundary is decided by where
those roots lie; the Costara recursion and the scalar pencils are kept as
independent cross-checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.linalg import LinAlgError, companion, eigvals
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from src.errors import InvalidArgumentError, InvalidDimensionError, NumericalFailureError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-9
UNIMODULAR_TOL = 1e-12
ROUND_TRIP_RTOL = 1e-9
PENCIL_AGREEMENT_TOL = 1e-12
# Largest spread of a root cluster that may still be merged into one multiple root
CLUSTER_CAP = 1e-2

REGIONS = ("closed", "open", "boundary")


@dataclass(frozen=True, eq=False)
class GammaPoint:
    """A candidate point (s_1, ..., s_{n-1}, p) of C^n."""

    n: int
    s: np.ndarray
    p: complex

    def __post_init__(self):
        if int(self.n) < 2:
            raise InvalidDimensionError(f"n must be at least 2, got {self.n}")
        s = np.asarray(self.s, dtype=complex).reshape(-1)
        if s.shape != (int(self.n) - 1,):
            raise InvalidDimensionError(f"expected {int(self.n) - 1} s-coordinates, got {s.shape[0]}")
        if not (np.all(np.isfinite(s)) and np.isfinite(complex(self.p))):
            raise InvalidArgumentError("point coordinates must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", complex(self.p))

    @classmethod
    def from_coordinates(cls, coordinates: Sequence[complex]) -> "GammaPoint":
        coords = np.asarray(coordinates, dtype=complex).reshape(-1)
        return cls(n=coords.shape[0], s=coords[:-1], p=coords[-1])

    @property
    def coordinates(self) -> np.ndarray:
        return np.append(self.s, self.p)

    def s_at(self, i: int) -> complex:
        """The coordinate s_i (1-based); s_n is p."""
        return self.coordinates[i - 1]

    def fiber_coefficients(self) -> np.ndarray:
        """Descending coefficients [1, -s_1, s_2, ..., (-1)^n p] of the fiber polynomial."""
        return _fiber_coefficients(self.coordinates)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coordinates))

    def __repr__(self):
        coords = ", ".join(f"{c:.6g}" for c in self.coordinates)
        return f"GammaPoint(n={self.n}, ({coords}))"


@dataclass(frozen=True)
class MembershipVerdict:
    region: str
    inside: bool
    max_root_modulus: float
    margin: float
    min_root_modulus: float
    tol: float

    def as_dict(self) -> Dict:
        return {
            "region": self.region,
            "inside": bool(self.inside),
            "max_root_modulus": float(self.max_root_modulus),
            "min_root_modulus": float(self.min_root_modulus),
            "margin": float(self.margin),
            "tol": float(self.tol),
        }


@dataclass(frozen=True)
class AlphaGrid:
    """Sample of the closed unit disc: concentric rings plus a dense unit circle."""

    radii: Tuple[float, ...] = tuple(k / 8 for k in range(1, 9))
    angles_per_ring: int = 256
    boundary_angles: int = 1024
    include_unit_circle: bool = True

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if any(r < 0.0 or r > 1.0 for r in radii):
            raise InvalidArgumentError(f"grid radii must lie in [0, 1], got {radii}")
        if self.angles_per_ring < 1 or self.boundary_angles < 1:
            raise InvalidArgumentError("grid needs at least one angle per ring")
        if not self.include_unit_circle:
            raise InvalidArgumentError("the unit circle |alpha| = 1 is always part of the grid")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def uniform(cls, rings: int = 8, angles: int = 256, boundary_angles: Optional[int] = None) -> "AlphaGrid":
        if rings < 1:
            raise InvalidArgumentError("grid needs at least one ring")
        return cls(
            radii=tuple(k / rings for k in range(1, rings + 1)),
            angles_per_ring=angles,
            boundary_angles=boundary_angles if boundary_angles is not None else 4 * angles,
        )

    def densified(self, factor: int) -> "AlphaGrid":
        """A grid with `factor` times as many rings, ring angles and circle angles."""
        rings = max(1, len(self.radii)) * factor
        return AlphaGrid(
            radii=tuple(k / rings for k in range(1, rings + 1)),
            angles_per_ring=self.angles_per_ring * factor,
            boundary_angles=self.boundary_angles * factor,
        )

    def samples(self) -> np.ndarray:
        parts = []
        ring_angles = 2.0 * np.pi * np.arange(self.angles_per_ring) / self.angles_per_ring
        for r in self.radii:
            if r == 0.0:
                parts.append(np.zeros(1, dtype=complex))
            elif r < 1.0:
                # radius 1 is covered by the denser boundary ring
                parts.append(r * np.exp(1j * ring_angles))
        circle = 2.0 * np.pi * np.arange(self.boundary_angles) / self.boundary_angles
        parts.append(np.exp(1j * circle))
        return np.concatenate(parts)

    def as_dict(self) -> Dict:
        return {
            "radii": list(self.radii),
            "angles_per_ring": self.angles_per_ring,
            "boundary_angles": self.boundary_angles,
        }


@dataclass
class PencilScanReport:
    """Pencil values (or minimum eigenvalues) of Phi_i over a grid of alphas.

    `values[i - 1, k]` belongs to index i and sample `alphas[k]`.  The scalar
    scan also keeps both sides of the modulus form of the inequality.
    """

    kind: str
    n: int
    alphas: np.ndarray
    values: np.ndarray
    modulus_lhs: Optional[np.ndarray] = None
    modulus_rhs: Optional[np.ndarray] = None
    disagreements: int = 0
    grid: Optional[AlphaGrid] = field(default=None, repr=False)

    @property
    def certified_indices(self) -> List[int]:
        # Positivity on all of Gamma_n is only guaranteed for these indices; the
        # middle pencils can be negative on Gamma_n once n >= 4.
        return sorted({1, self.n - 1})

    def _argmin(self, indices: Sequence[int]) -> Tuple[float, int, complex]:
        rows = np.asarray(indices) - 1
        block = self.values[rows]
        flat = int(np.argmin(block))
        r, k = np.unravel_index(flat, block.shape)
        return float(block[r, k]), int(indices[r]), complex(self.alphas[k])

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))

    @property
    def argmin(self) -> Tuple[int, complex]:
        _, i, alpha = self._argmin(list(range(1, self.n)))
        return i, alpha

    @property
    def certified_minimum(self) -> float:
        return self._argmin(self.certified_indices)[0]

    @property
    def certified_argmin(self) -> Tuple[int, complex]:
        _, i, alpha = self._argmin(self.certified_indices)
        return i, alpha

    def index_minima(self) -> Dict[int, float]:
        return {i: float(np.min(self.values[i - 1])) for i in range(1, self.n)}

    def rows(self) -> Iterator[Tuple]:
        """(i, re_alpha, im_alpha, phi_value, modulus_lhs, modulus_rhs) per sample."""
        for i in range(1, self.n):
            for k, alpha in enumerate(self.alphas):
                lhs = float(self.modulus_lhs[i - 1, k]) if self.modulus_lhs is not None else None
                rhs = float(self.modulus_rhs[i - 1, k]) if self.modulus_rhs is not None else None
                yield i, float(alpha.real), float(alpha.imag), float(self.values[i - 1, k]), lhs, rhs

    def as_dict(self) -> Dict:
        i, alpha = self.argmin
        ci, calpha = self.certified_argmin
        return {
            "kind": self.kind,
            "n": self.n,
            "samples": int(self.alphas.shape[0]),
            "minimum": self.minimum,
            "argmin": {"i": i, "alpha": [alpha.real, alpha.imag]},
            "certified_indices": self.certified_indices,
            "certified_minimum": self.certified_minimum,
            "certified_argmin": {"i": ci, "alpha": [calpha.real, calpha.imag]},
            "index_minima": {str(k): v for k, v in self.index_minima().items()},
            "disagreements": int(self.disagreements),
        }


# ---------------------------------------------------------------------------
# Symmetrization
# ---------------------------------------------------------------------------

def _product_coefficients(z: np.ndarray) -> np.ndarray:
    """Descending coefficients of prod_j (X - z_j), batched over leading axes."""
    z = np.asarray(z, dtype=complex)
    degree = z.shape[-1]
    coeffs = np.zeros(z.shape[:-1] + (degree + 1,), dtype=complex)
    coeffs[..., 0] = 1.0
    for j in range(degree):
        coeffs[..., 1:j + 2] = coeffs[..., 1:j + 2] - z[..., j, None] * coeffs[..., 0:j + 1]
    return coeffs


def elementary_symmetric(z) -> np.ndarray:
    """(e_1(z), ..., e_n(z)) along the last axis."""
    coeffs = _product_coefficients(z)
    degree = coeffs.shape[-1] - 1
    signs = (-1.0) ** np.arange(1, degree + 1)
    return coeffs[..., 1:] * signs


def symmetrize(z) -> GammaPoint:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] < 2:
        raise InvalidDimensionError(f"symmetrization needs n >= 2 variables, got {z.shape[0]}")
    return GammaPoint.from_coordinates(elementary_symmetric(z))


def _fiber_coefficients(coordinates: np.ndarray) -> np.ndarray:
    coords = np.asarray(coordinates, dtype=complex)
    signs = (-1.0) ** np.arange(1, coords.shape[0] + 1)
    return np.concatenate(([1.0 + 0j], coords * signs))


# ---------------------------------------------------------------------------
# Fiber roots and membership
# ---------------------------------------------------------------------------

def _round_trip_residual(roots: np.ndarray, coords: np.ndarray) -> float:
    return float(np.max(np.abs(elementary_symmetric(roots) - coords)))


def _split_at_widest_gap(roots: np.ndarray, members: np.ndarray) -> List[np.ndarray]:
    points = np.column_stack((roots[members].real, roots[members].imag))
    labels = fcluster(linkage(points, method="single"), t=2, criterion="maxclust")
    return [members[labels == label] for label in np.unique(labels)]


def _merge_root_clusters(roots: np.ndarray, coords: np.ndarray, scale: float, bound: float) -> Tuple[np.ndarray, float]:
    """Replace numerically split multiple roots by the mean of their cluster.

    A k-fold root comes back from the eigensolver as k roots spread by about
    (eps * scale)^(1/k) around it, while their mean is accurate to O(eps).
    A merge is kept only if the roots still reproduce the coordinates no worse
    than before (or within bound); a rejected cluster is split at its widest
    gap and the parts are tried on their own.
    """
    merged = roots.copy()
    residual = _round_trip_residual(merged, coords)
    if roots.shape[0] < 2:
        return merged, residual

    distance = np.abs(roots[:, None] - roots[None, :])
    adjacency = distance <= CLUSTER_CAP * (1.0 + np.abs(roots))[:, None]
    n_clusters, labels = connected_components(csr_matrix(adjacency), directed=False)
    pending = [np.flatnonzero(labels == label) for label in range(n_clusters)]

    while pending:
        members = pending.pop()
        k = members.shape[0]
        if k < 2:
            continue
        center = roots[members].mean()
        spread = float(np.max(np.abs(roots[members] - center)))
        if spread <= min(CLUSTER_CAP, 100.0 * (EPS * scale) ** (1.0 / k)):
            trial = merged.copy()
            trial[members] = center
            trial_residual = _round_trip_residual(trial, coords)
            if trial_residual <= max(residual, bound):
                merged, residual = trial, trial_residual
                continue
            logger.debug("Rejected merge of %d roots near %s (residual %.3e)", k, center, trial_residual)
        if k > 2:
            parts = _split_at_widest_gap(roots, members)
            if len(parts) > 1:
                pending.extend(parts)
    return merged, residual


def roots_of_coordinates(coordinates) -> np.ndarray:
    """Roots of the fiber polynomial of a coordinate vector of any length >= 1."""
    coords = np.asarray(coordinates, dtype=complex).reshape(-1)
    if coords.shape[0] == 0:
        raise InvalidDimensionError("empty coordinate vector")
    if coords.shape[0] == 1:
        return coords.copy()

    coeffs = _fiber_coefficients(coords)
    try:
        roots = eigvals(companion(coeffs))
    except (LinAlgError, ValueError) as e:
        raise NumericalFailureError(f"companion eigensolver failed: {e}", residual=float("inf"))
    if not np.all(np.isfinite(roots)):
        raise NumericalFailureError("companion eigensolver returned non-finite roots", residual=float("inf"))

    bound = ROUND_TRIP_RTOL * (1.0 + float(np.linalg.norm(coords)))
    roots, residual = _merge_root_clusters(roots, coords, scale=1.0 + float(np.max(np.abs(coeffs))), bound=bound)
    if residual > bound:
        raise NumericalFailureError(
            f"fiber roots do not reproduce the point (residual {residual:.3e} > {bound:.3e})",
            residual=residual,
        )
    return roots


def fiber_roots(point: GammaPoint) -> np.ndarray:
    return roots_of_coordinates(point.coordinates)


def _verdict(region: str, moduli: np.ndarray, tol: float) -> MembershipVerdict:
    max_mod = float(np.max(moduli))
    min_mod = float(np.min(moduli))
    if region == "closed":
        inside = max_mod <= 1.0 + tol
        margin = 1.0 - max_mod
    elif region == "open":
        inside = max_mod < 1.0 - tol
        margin = 1.0 - max_mod
    else:
        deviation = float(np.max(np.abs(moduli - 1.0)))
        inside = deviation <= tol
        margin = tol - deviation
    return MembershipVerdict(region, bool(inside), max_mod, margin, min_mod, tol)


def _check_region(region: str, tol: float):
    if region not in REGIONS:
        raise InvalidArgumentError(f"unknown region {region!r}; expected one of {REGIONS}")
    if tol < 0:
        raise InvalidArgumentError("tolerance must be non-negative")


def membership(point: GammaPoint, region: str = "closed", tol: float = DEFAULT_TOL) -> MembershipVerdict:
    _check_region(region, tol)
    return _verdict(region, np.abs(fiber_roots(point)), tol)


def membership_report(point: GammaPoint, tol: float = DEFAULT_TOL) -> Dict[str, MembershipVerdict]:
    """Verdicts for all three regions from a single root computation."""
    _check_region("closed", tol)
    moduli = np.abs(fiber_roots(point))
    return {region: _verdict(region, moduli, tol) for region in REGIONS}


def gamma_membership_of_coordinates(coordinates, tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Closed membership for a coordinate vector; length 1 means the closed unit disc."""
    _check_region("closed", tol)
    return _verdict("closed", np.abs(roots_of_coordinates(coordinates)), tol)


# ---------------------------------------------------------------------------
# Rotations and Costara coefficients
# ---------------------------------------------------------------------------

def check_unimodular(omega: complex) -> complex:
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > UNIMODULAR_TOL:
        raise InvalidArgumentError(f"omega must be unimodular, |omega| = {abs(omega):.15g}")
    return omega


def weighted_powers(coordinates, alphas) -> np.ndarray:
    """Rows (alpha c_1, alpha^2 c_2, ..., alpha^n c_n), one per alpha."""
    coords = np.asarray(coordinates, dtype=complex).reshape(-1)
    alphas = np.asarray(alphas, dtype=complex).reshape(-1)
    powers = alphas[:, None] ** np.arange(1, coords.shape[0] + 1)[None, :]
    return powers * coords[None, :]


def rotate_point(point: GammaPoint, omega: complex) -> GammaPoint:
    omega = check_unimodular(omega)
    return GammaPoint.from_coordinates(weighted_powers(point.coordinates, [omega])[0])


def costara_coefficients(point: GammaPoint) -> Optional[np.ndarray]:
    """Solve s_i = c_i + conj(c_{n-i}) p; None when |p| >= 1."""
    p = point.p
    if abs(p) >= 1.0:
        return None
    return (point.s - np.conj(point.s[::-1]) * p) / (1.0 - abs(p) ** 2)


def costara_membership(point: GammaPoint, tol: float = DEFAULT_TOL) -> bool:
    """Closed membership decided by descending through the Costara coefficients."""
    coords = point.coordinates
    while True:
        p = coords[-1]
        if abs(p) > 1.0 + tol:
            return False
        if coords.shape[0] == 1:
            return True
        if abs(p) >= 1.0:
            return gamma_membership_of_coordinates(coords, tol).inside
        coords = costara_coefficients(GammaPoint.from_coordinates(coords))


# ---------------------------------------------------------------------------
# Scalar pencils
# ---------------------------------------------------------------------------

def _check_index(n: int, i: int):
    if not 1 <= int(i) <= n - 1:
        raise InvalidArgumentError(f"pencil index must lie in 1..{n - 1}, got {i}")


def _pencil_terms(scaled: np.ndarray, n: int, i: int):
    si = scaled[..., i - 1]
    sni = scaled[..., n - i - 1]
    p = scaled[..., -1]
    value = (
        n ** 2 * (1.0 - np.abs(p) ** 2)
        + (np.abs(si) ** 2 - np.abs(sni) ** 2)
        - 2.0 * n * np.real(si - np.conj(sni) * p)
    )
    lhs = np.abs(n * p - sni)
    rhs = np.abs(n - si)
    return value, lhs, rhs


def scalar_pencil_value(point: GammaPoint, i: int) -> float:
    _check_index(point.n, i)
    value, _, _ = _pencil_terms(point.coordinates, point.n, int(i))
    return float(value)


def scalar_pencil_factored(point: GammaPoint, i: int) -> float:
    """|n - s_i|^2 - |n p - s_{n-i}|^2."""
    _check_index(point.n, i)
    _, lhs, rhs = _pencil_terms(point.coordinates, point.n, int(i))
    return float(rhs ** 2 - lhs ** 2)


def scalar_pencil_scan(point: GammaPoint, grid: Optional[AlphaGrid] = None) -> PencilScanReport:
    grid = grid or AlphaGrid()
    n = point.n
    alphas = grid.samples()
    scaled = weighted_powers(point.coordinates, alphas)

    values = np.empty((n - 1, alphas.shape[0]))
    lhs = np.empty_like(values)
    rhs = np.empty_like(values)
    for i in range(1, n):
        values[i - 1], lhs[i - 1], rhs[i - 1] = _pencil_terms(scaled, n, i)

    # Pencil sign and modulus inequality are the same statement
    pencil_ok = values >= 0.0
    modulus_ok = lhs <= rhs
    significant = np.abs(values) > PENCIL_AGREEMENT_TOL * (1.0 + lhs ** 2 + rhs ** 2)
    disagreements = int(np.count_nonzero((pencil_ok != modulus_ok) & significant))
    if disagreements:
        raise NumericalFailureError(
            f"pencil sign and modulus test disagree at {disagreements} samples",
            residual=float(disagreements),
        )

    return PencilScanReport(
        kind="scalar",
        n=n,
        alphas=alphas,
        values=values,
        modulus_lhs=lhs,
        modulus_rhs=rhs,
        disagreements=disagreements,
        grid=grid,
    )
