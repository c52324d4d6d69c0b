"""Independent certification of solutions.

The primary certificate is the field-equation residual evaluated by central
finite differences on a grid, using nothing but point evaluations of the
solution blocks; it shares no code path with either construction.  Companion
checks cover the exponential-evolution oracle, constant symmetry
transformations, the determinant factorization consequence, and the scalar
(all blocks 1 x 1) reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .blockalg import BlockStructure, GradedPair
from .errors import EmptyReportError, SolutionSingularityError
from .solitons import ClosedFormSolution, SolitonSpec

DEFAULT_H_FD = 1e-4
DEFAULT_TOLERANCE = 1e-5
DET_SKIP_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid, z_minus outer and z_plus inner."""

    z_minus: tuple[float, float, int]
    z_plus: tuple[float, float, int]

    def __post_init__(self):
        for name, (lo, hi, count) in (("z_minus", self.z_minus), ("z_plus", self.z_plus)):
            if count < 1:
                raise ValueError(f"{name}: count must be >= 1")
            if hi < lo:
                raise ValueError(f"{name}: max must be >= min")

    def z_minus_values(self) -> np.ndarray:
        lo, hi, count = self.z_minus
        return np.linspace(lo, hi, count)

    def z_plus_values(self) -> np.ndarray:
        lo, hi, count = self.z_plus
        return np.linspace(lo, hi, count)

    def points(self):
        for i, zm in enumerate(self.z_minus_values()):
            for j, zp in enumerate(self.z_plus_values()):
                yield i, j, float(zm), float(zp)


class TrivialSolution:
    """The identity seed; solves the field equations when the pair commutes."""

    provenance = "trivial"

    def __init__(self, structure: BlockStructure):
        self.structure = structure

    def gamma_pair(self, z, alpha: int):
        eye = np.eye(self.structure.size(alpha), dtype=complex)
        return eye, eye.copy()


class TransformedSolution:
    """A solution conjugated by constant block matrices (see apply_symmetry)."""

    provenance = "symmetry-transformed"

    def __init__(self, base, eta_minus, eta_plus):
        self.base = base
        self.structure = base.structure
        p = self.structure.p
        self._em = {a: np.asarray(eta_minus[a], dtype=complex) for a in range(1, p + 1)}
        self._ep = {a: np.asarray(eta_plus[a], dtype=complex) for a in range(1, p + 1)}
        self._em_inv = {a: np.linalg.inv(self._em[a]) for a in self._em}
        self._ep_inv = {a: np.linalg.inv(self._ep[a]) for a in self._ep}

    def gamma_pair(self, z, alpha: int):
        a = (alpha - 1) % self.structure.p + 1
        gamma, gamma_inv = self.base.gamma_pair(z, alpha)
        return (self._ep_inv[a] @ gamma @ self._em[a],
                self._em_inv[a] @ gamma_inv @ self._ep[a])


@dataclass
class ResidualReport:
    """Field-equation residuals on a grid; NaN entries mark skipped points."""

    grid: GridSpec
    h_fd: float
    residuals: np.ndarray  # shape (p, count_minus, count_plus)
    skipped: tuple[tuple[int, int], ...]
    max_residual: float
    mean_residual: float

    def to_json_dict(self) -> dict:
        return {
            "h_fd": self.h_fd,
            "grid": {"z_minus": list(self.grid.z_minus), "z_plus": list(self.grid.z_plus)},
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "skipped_points": [list(s) for s in self.skipped],
        }


def toda_residual(solution, pair: GradedPair, grid: GridSpec,
                  h_fd: float = DEFAULT_H_FD) -> ResidualReport:
    """Second-order central-difference residual of the field equations.

    At each grid point and block index the mixed term
    d_plus( Gamma_a^-1 d_minus Gamma_a ) is assembled from a 2-D stencil of
    Gamma evaluations, and the two algebraic terms from the center values.
    Points where any stencil evaluation hits a solution singularity are
    skipped and reported.  For exact solutions the residual scales as
    h_fd^2 until roundoff takes over.
    """
    if h_fd <= 0:
        raise ValueError("h_fd must be positive")
    bs = pair.structure
    p = bs.p
    cm_count = grid.z_minus[2]
    cp_count = grid.z_plus[2]
    residuals = np.full((p, cm_count, cp_count), np.nan)
    skipped = []
    memo: dict[tuple[float, float, int], tuple[np.ndarray, np.ndarray]] = {}

    def ev(zm, zp, alpha):
        key = (zm, zp, (alpha - 1) % p + 1)
        if key not in memo:
            memo[key] = solution.gamma_pair((zm, zp), key[2])
        return memo[key]

    for i, j, zm, zp in grid.points():
        try:
            point_res = np.empty(p)
            for a in range(1, p + 1):
                def d_minus_term(zp_side):
                    g_plus, _ = ev(zm + h_fd, zp_side, a)
                    g_minus, _ = ev(zm - h_fd, zp_side, a)
                    _, gi = ev(zm, zp_side, a)
                    return gi @ ((g_plus - g_minus) / (2 * h_fd))

                mixed = (d_minus_term(zp + h_fd) - d_minus_term(zp - h_fd)) / (2 * h_fd)
                gamma, gamma_inv = ev(zm, zp, a)
                gamma_up, _ = ev(zm, zp, a + 1)
                _, gamma_down_inv = ev(zm, zp, a - 1)
                algebraic_up = gamma_inv @ pair.C_plus(a) @ gamma_up @ pair.C_minus(a)
                algebraic_down = pair.C_minus(a - 1) @ gamma_down_inv \
                    @ pair.C_plus(a - 1) @ gamma
                point_res[a - 1] = np.linalg.norm(mixed + algebraic_up - algebraic_down)
        except SolutionSingularityError:
            skipped.append((i, j))
            continue
        residuals[:, i, j] = point_res

    finite = residuals[np.isfinite(residuals)]
    if finite.size == 0:
        raise EmptyReportError("every grid point was singular; no residual certificate")
    return ResidualReport(
        grid=grid, h_fd=h_fd, residuals=residuals, skipped=tuple(skipped),
        max_residual=float(np.max(finite)), mean_residual=float(np.mean(finite)))


def oracle_evolution(pair: GradedPair, pole: complex, v0: np.ndarray,
                     z: tuple[float, float], mode: str) -> np.ndarray:
    """Evolve an initial vector by the full matrix exponential.

    mode 'y': exp(pole^-1 c_minus^T z_minus + pole c_plus^T z_plus) v0;
    mode 'u': exp(-pole^-1 c_minus z_minus - pole c_plus z_plus) v0.
    Independent of the eigenvector expansion used by the closed form, and
    valid for arbitrary (including null-sector) initial vectors.
    """
    cm = pair.c_minus.array
    cp = pair.c_plus.array
    zm, zp = z
    v0 = np.asarray(v0, dtype=complex)
    if mode == "y":
        gen = cm.T * (zm / pole) + cp.T * (pole * zp)
    elif mode == "u":
        gen = -cm * (zm / pole) - cp * (pole * zp)
    else:
        raise ValueError(f"mode must be 'u' or 'y', got {mode!r}")
    return scipy.linalg.expm(gen) @ v0


def apply_symmetry(solution, eta_minus, eta_plus, pair: GradedPair):
    """Conjugate a solution and its pair by constant block matrices.

    eta_minus / eta_plus map block index (1..p) to an invertible matrix of
    that block's size.  Returns (solution', pair') which again satisfy the
    field equations, at the same residual tolerance.
    """
    bs = pair.structure
    p = bs.p
    em = {a: np.asarray(eta_minus[a], dtype=complex) for a in range(1, p + 1)}
    ep_ = {a: np.asarray(eta_plus[a], dtype=complex) for a in range(1, p + 1)}
    for a in range(1, p + 1):
        for name, mat in (("eta_minus", em[a]), ("eta_plus", ep_[a])):
            want = (bs.size(a), bs.size(a))
            if mat.shape != want:
                raise ValueError(f"{name}[{a}] has shape {mat.shape}, expected {want}")
            if abs(np.linalg.det(mat)) < 1e-14:
                raise ValueError(f"{name}[{a}] is singular")
    c_minus_new = []
    c_plus_new = []
    for a in range(1, p + 1):
        em_next_inv = np.linalg.inv(em[a % p + 1])
        ep_next = ep_[a % p + 1]
        c_minus_new.append(em_next_inv @ pair.C_minus(a) @ em[a])
        c_plus_new.append(np.linalg.inv(ep_[a]) @ pair.C_plus(a) @ ep_next)
    new_pair = GradedPair(bs, c_minus_new, c_plus_new)
    return TransformedSolution(solution, em, ep_), new_pair


@dataclass
class DetFactorizationReport:
    max_mixed_derivative: float
    skipped: tuple[tuple[int, int], ...]


def det_factorization_check(solution, structure: BlockStructure, grid: GridSpec,
                            h_fd: float = DEFAULT_H_FD) -> DetFactorizationReport:
    """Max |d_minus d_plus log det gamma| over the grid by central differences.

    The determinant of the full block-diagonal solution factorizes into a
    z_minus-only and a z_plus-only part, so the mixed derivative of its log
    vanishes for exact solutions.  Phases are unwrapped relative to the
    stencil center so the complex log stays on one branch.
    """
    p = structure.p

    def det_gamma(zm, zp):
        val = 1.0 + 0j
        for a in range(1, p + 1):
            gamma, _ = solution.gamma_pair((zm, zp), a)
            val *= np.linalg.det(gamma)
        return val

    worst = 0.0
    skipped = []
    for i, j, zm, zp in grid.points():
        try:
            center = det_gamma(zm, zp)
            corners = {(sm, sp): det_gamma(zm + sm * h_fd, zp + sp * h_fd)
                       for sm in (-1, 1) for sp in (-1, 1)}
        except SolutionSingularityError:
            skipped.append((i, j))
            continue
        if abs(center) < DET_SKIP_TOL or any(abs(v) < DET_SKIP_TOL
                                             for v in corners.values()):
            skipped.append((i, j))
            continue
        def local_log(v):
            return np.log(abs(v)) + 1j * np.angle(v / center)
        mixed = (local_log(corners[(1, 1)]) - local_log(corners[(1, -1)])
                 - local_log(corners[(-1, 1)]) + local_log(corners[(-1, -1)])) \
            / (4 * h_fd * h_fd)
        worst = max(worst, abs(mixed))
    if len(skipped) == grid.z_minus[2] * grid.z_plus[2]:
        raise EmptyReportError("every grid point was skipped in the determinant check")
    return DetFactorizationReport(max_mixed_derivative=float(worst),
                                  skipped=tuple(skipped))


def abelian_reduction_check(spec: SolitonSpec, grid: GridSpec) -> float:
    """Max |Gamma_a - tau_{a+1}/tau_a| for all-scalar block structures.

    Exercises the subset-sum matrices: when every block is 1 x 1 the matrix
    tau function must collapse to the scalar tau one block up.
    """
    bs = spec.structure
    if any(s != 1 for s in bs.sizes):
        raise ValueError("abelian reduction requires all block sizes equal to 1")
    sol = ClosedFormSolution(spec)
    worst = 0.0
    for _, _, zm, zp in grid.points():
        z = (zm, zp)
        try:
            taus = {a: sol.tau_pair(z, a).tau for a in range(1, bs.p + 2)}
            for a in range(1, bs.p + 1):
                gamma, _ = sol.gamma_pair(z, a)
                worst = max(worst, abs(gamma[0, 0] - taus[a + 1] / taus[a]))
        except SolutionSingularityError:
            continue
    return float(worst)


def inverse_consistency_check(solution, points) -> float:
    """Max ||Gamma_a^-1 Gamma_a - I|| over the given points and all blocks."""
    bs = solution.structure
    worst = 0.0
    for z in points:
        for a in range(1, bs.p + 1):
            gamma, gamma_inv = solution.gamma_pair(z, a)
            worst = max(worst, float(np.linalg.norm(
                gamma_inv @ gamma - np.eye(bs.size(a)))))
    return worst


def cross_construction_check(spec: SolitonSpec, pair: GradedPair, points) -> float:
    """Agreement between the general dressing and the closed form.

    The two constructions differ by the constant left symmetry factor
    h_{a,J}; with that factor restored they are the same solution, so the
    check compares Gamma(dressing) against h_{a,J} Gamma(closed form).
    """
    from .dressing import DressedSolution

    closed = ClosedFormSolution(spec)
    dressed = DressedSolution(pair, spec.spectral, spec.poles, spec.to_initial_data())
    bs = spec.structure
    worst = 0.0
    for z in points:
        for a in range(1, bs.p + 1):
            g_dress, _ = dressed.gamma_pair(z, a)
            g_closed, _ = closed.gamma_pair(z, a)
            h_factor, _ = closed.dressing_factor(a, "J")
            worst = max(worst, float(np.linalg.norm(g_dress - h_factor @ g_closed)))
    return worst
