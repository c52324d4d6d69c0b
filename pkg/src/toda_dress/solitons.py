"""Closed-form soliton solutions built from idempotents and tau pairs.

The soliton subclass of dressed solutions pins, for each pole pair, one
nonzero coefficient vector on the u-side (index I) and two on the y-side
(indices J and K).  Everything then collapses to constant r x r matrices
plus scalar exponential factors: the solution blocks are ratios of a scalar
tau function and a matrix tau function, both finite sums over subsets of
poles weighted by interaction coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .blockalg import root_of_unity
from .dressing import InitialData, PoleData
from .errors import DegenerateConfigurationError, SolutionSingularityError
from .spectral import SpectralData

BRACKET_TOL = 1e-12
SINGULARITY_RTOL = 1e-8
MAX_POLES = 12  # subset sums enumerate 2^r terms
_CONSTANT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SolitonSpec:
    """Data selecting one soliton per pole pair.

    ``index_c[i]`` is the single index I_i with nonzero u-side coefficient
    ``coeff_c[i]``; ``index_d[i]`` is the pair (J_i, K_i) carrying the y-side
    coefficients ``coeff_d[i] = (d_J, d_K)``.  All coefficient vectors have
    length n_star.
    """

    spectral: SpectralData
    poles: PoleData
    index_c: tuple[int, ...]
    index_d: tuple[tuple[int, int], ...]
    coeff_c: tuple[np.ndarray, ...]
    coeff_d: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        bs = self.spectral.structure
        p = bs.p
        r = self.poles.r
        if r > MAX_POLES:
            raise ValueError(f"at most {MAX_POLES} poles supported, got {r}")
        if not (len(self.index_c) == len(self.index_d) == len(self.coeff_c)
                == len(self.coeff_d) == r):
            raise ValueError("per-pole fields must all have length r")
        object.__setattr__(self, "index_c", tuple(int(v) for v in self.index_c))
        object.__setattr__(self, "index_d",
                           tuple((int(a), int(b)) for a, b in self.index_d))
        object.__setattr__(
            self, "coeff_c",
            tuple(np.asarray(v, dtype=complex) for v in self.coeff_c))
        object.__setattr__(
            self, "coeff_d",
            tuple((np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
                  for a, b in self.coeff_d))
        for i in range(r):
            if not 1 <= self.index_c[i] <= p:
                raise ValueError(f"index_c[{i}] out of range 1..{p}")
            J, K = self.index_d[i]
            if not (1 <= J <= p and 1 <= K <= p):
                raise ValueError(f"index_d[{i}] out of range 1..{p}")
            if J == K:
                raise ValueError(f"index_d[{i}]: the two indices must differ")
            for v in (self.coeff_c[i], *self.coeff_d[i]):
                if v.shape != (bs.n_star,):
                    raise ValueError(
                        f"coefficient vectors must have length n_star={bs.n_star}")
        self.poles.validate_separation(p)
        fam = IdempotentFamily(self)
        scale = max(np.linalg.norm(self.spectral.gram), 1.0)
        for A in ("J", "K"):
            for i in range(r):
                for j in range(r):
                    d_norm = np.linalg.norm(fam._d(A, i))
                    c_norm = np.linalg.norm(self.coeff_c[j])
                    if abs(fam.bracket(A, i, j)) <= BRACKET_TOL * scale * max(
                            d_norm * c_norm, 1.0):
                        raise DegenerateConfigurationError(
                            f"pairing of d_{A}[{i}] with c[{j}] through the Gram "
                            "matrix vanishes")

    @property
    def r(self) -> int:
        return self.poles.r

    @property
    def structure(self):
        return self.spectral.structure

    def rho(self, i: int) -> int:
        J, K = self.index_d[i]
        return K - J

    def zeta(self, i: int) -> complex:
        # principal branch for the half-integer root-of-unity power
        J, K = self.index_d[i]
        p = self.structure.p
        return -1j * self.poles.nu[i] * np.exp(-1j * np.pi * (K + J) / p)

    def z_exponent(self, i: int, z: tuple[float, float]) -> complex:
        """Z(zeta_i) = kappa_rho (zeta^-1 z_minus + zeta z_plus)."""
        p = self.structure.p
        kappa = 2.0 * np.sin(np.pi * self.rho(i) / p)
        zeta = self.zeta(i)
        return kappa * (z[0] / zeta + zeta * z[1])

    def to_initial_data(self) -> InitialData:
        """The equivalent general-dressing initial data (null sector zero)."""
        p = self.structure.p
        d_rows = []
        c_rows = []
        for i in range(self.r):
            d_row: list[np.ndarray | None] = [None] * p
            J, K = self.index_d[i]
            d_row[J - 1] = self.coeff_d[i][0]
            d_row[K - 1] = self.coeff_d[i][1]
            c_row: list[np.ndarray | None] = [None] * p
            c_row[self.index_c[i] - 1] = self.coeff_c[i]
            d_rows.append(tuple(d_row))
            c_rows.append(tuple(c_row))
        none_r = tuple([None] * self.r)
        return InitialData(d=tuple(d_rows), c=tuple(c_rows),
                           d_null=none_r, c_null=none_r)


class IdempotentFamily:
    """Rank-one building blocks Y and their tilded (bracket-scaled) variants.

    y(A, alpha, i, j) = theta_a c_{I_j} d_{A_i}^T theta_a^T / (d_{A_i}^T Theta c_{I_j});
    the tilded variant drops the denominator.  The diagonal members are
    idempotent, and products contract by bracket ratios.
    """

    def __init__(self, spec: SolitonSpec):
        self.spec = spec
        gram = spec.spectral.gram
        r = spec.r
        self._brackets = {}
        for A in ("J", "K"):
            br = np.empty((r, r), dtype=complex)
            for i in range(r):
                for j in range(r):
                    br[i, j] = self._d(A, i) @ gram @ spec.coeff_c[j]
            self._brackets[A] = br

    def _d(self, A: str, i: int) -> np.ndarray:
        return self.spec.coeff_d[i][0] if A == "J" else self.spec.coeff_d[i][1]

    def bracket(self, A: str, i: int, j: int) -> complex:
        return complex(self._brackets[A][i, j])

    def y_tilde(self, A: str, alpha: int, i: int, j: int) -> np.ndarray:
        t = self.spec.spectral.theta_block(alpha)
        return np.outer(t @ self.spec.coeff_c[j], t @ self._d(A, i))

    def y(self, A: str, alpha: int, i: int, j: int) -> np.ndarray:
        return self.y_tilde(A, alpha, i, j) / self.bracket(A, i, j)


def _subsets(r: int):
    for size in range(1, r + 1):
        yield from (list(s) for s in itertools.combinations(range(r), size))


def interaction_eta(H: np.ndarray, subset) -> complex:
    """Subdeterminant of H on the subset divided by its diagonal product."""
    subset = list(subset)
    diag = np.prod([H[k, k] for k in subset])
    if any(abs(H[k, k]) == 0 for k in subset):
        raise DegenerateConfigurationError("zero diagonal entry in H")
    if len(subset) == 1:
        return 1.0 + 0j
    sub = H[np.ix_(subset, subset)]
    return complex(np.linalg.det(sub) / diag)


@dataclass(frozen=True)
class TauPair:
    """One evaluation of the scalar/matrix tau functions at a block index.

    ``tau_x_inv`` is the inverse-side matrix sum whose matrix factors sit one
    block lower than the scalar factors (it is consumed as the numerator of
    the inverse block one step up), so its shape is that of block alpha - 1.
    ``scale`` is 1 plus the sum of absolute term magnitudes of ``tau``, used
    for relative singularity detection.
    """

    tau: complex
    tau_x: np.ndarray
    tau_x_inv: np.ndarray
    scale: float


class ClosedFormSolution:
    """Evaluatable multi-soliton solution assembled from constant matrices."""

    provenance = "closed-form"

    def __init__(self, spec: SolitonSpec):
        self.spec = spec
        self.structure = spec.structure
        bs = spec.structure
        p = bs.p
        r = spec.r
        fam = IdempotentFamily(spec)
        self.family = fam
        mu, nu = spec.poles.mu, spec.poles.nu

        def pole_factor(A: str, i: int, j: int, numerator: str) -> complex:
            A_i = spec.index_d[i][0] if A == "J" else spec.index_d[i][1]
            a = nu[i] * root_of_unity(p, -A_i)
            b = mu[j] * root_of_unity(p, spec.index_c[j])
            top = a if numerator == "nu" else b
            return top / (a - b)

        def build(A: str, numerator: str) -> np.ndarray:
            return np.array([[fam.bracket(A, i, j) * pole_factor(A, i, j, numerator)
                              for j in range(r)] for i in range(r)])

        self.D_J = build("J", "nu")
        self.D_K = build("K", "nu")
        self.B_J = build("J", "mu")
        self.B_K = build("K", "mu")
        for name, mat in (("D(J)", self.D_J), ("B(J)", self.B_J)):
            if np.linalg.cond(mat) > _CONSTANT_COND_LIMIT:
                raise DegenerateConfigurationError(f"{name} is singular")
        self.H = self.D_K @ np.linalg.inv(self.D_J)
        self.F = self.B_K @ np.linalg.inv(self.B_J)

        self._h_J = {a: self._dressing_h("J", a) for a in range(1, p + 1)}
        self._h_J_inv = {a: self._dressing_h_inv("J", a) for a in range(1, p + 1)}
        self._eta = {tuple(S): interaction_eta(self.H, S) for S in _subsets(r)}
        # per subset and block: X-tilde = h_J^-1 X and its inverse-side partner
        self._xt = {}
        self._xt_inv = {}
        for a in range(1, p + 1):
            for S in _subsets(r):
                X = self._delta_x(a, S, inverse=False)
                Xi = self._delta_x(a, S, inverse=True)
                self._xt[(a, tuple(S))] = self._h_J_inv[a] @ X
                self._xt_inv[(a, tuple(S))] = Xi @ self._h_J[a]

    # -- constant matrices -------------------------------------------------

    def _dressing_h(self, A: str, alpha: int) -> np.ndarray:
        bs = self.structure
        D = self.D_J if A == "J" else self.D_K
        D_inv = np.linalg.inv(D)
        out = np.eye(bs.size(alpha), dtype=complex)
        for i in range(self.spec.r):
            for j in range(self.spec.r):
                out -= D_inv[i, j] * self.family.y_tilde(A, alpha, j, i)
        return out

    def _dressing_h_inv(self, A: str, alpha: int) -> np.ndarray:
        bs = self.structure
        B = self.B_J if A == "J" else self.B_K
        if np.linalg.cond(B) > _CONSTANT_COND_LIMIT:
            raise DegenerateConfigurationError(f"B({A}) is singular")
        B_inv = np.linalg.inv(B)
        out = np.eye(bs.size(alpha), dtype=complex)
        for i in range(self.spec.r):
            for j in range(self.spec.r):
                out += B_inv[j, i] * self.family.y_tilde(A, alpha, i, j)
        return out

    def _delta_x(self, alpha: int, subset, inverse: bool) -> np.ndarray:
        """X_{alpha,S} from the row-replacement matrix, or its inverse variant."""
        base = self.B_J if inverse else self.D_J
        repl = self.B_K if inverse else self.D_K
        delta = base.copy()
        for i in subset:
            delta[i, :] = repl[i, :]
        if np.linalg.cond(delta) > _CONSTANT_COND_LIMIT:
            raise DegenerateConfigurationError(
                f"row-replacement matrix for subset {tuple(subset)} is singular")
        d_inv = np.linalg.inv(delta)
        sign = 1.0 if inverse else -1.0
        in_subset = set(subset)
        out = np.eye(self.structure.size(alpha), dtype=complex)
        for j in range(self.spec.r):
            A = "K" if j in in_subset else "J"
            for k in range(self.spec.r):
                out += sign * d_inv[k, j] * self.family.y_tilde(A, alpha, j, k)
        return out

    def dressing_factor(self, alpha: int, A: str) -> tuple[np.ndarray, np.ndarray]:
        a = (alpha - 1) % self.structure.p + 1
        if A == "J":
            return self._h_J[a], self._h_J_inv[a]
        return self._dressing_h("K", a), self._dressing_h_inv("K", a)

    def x_tilde(self, alpha: int, subset) -> np.ndarray:
        """h_{alpha,J}^-1 X_{alpha,subset}, the matrix weight of one tau term."""
        a = (alpha - 1) % self.structure.p + 1
        return self._xt[(a, tuple(sorted(subset)))]

    def x_tilde_inv(self, alpha: int, subset) -> np.ndarray:
        """X_{alpha,subset}^-1 h_{alpha,J}, its partner on the inverse side."""
        a = (alpha - 1) % self.structure.p + 1
        return self._xt_inv[(a, tuple(sorted(subset)))]

    # -- point evaluation ---------------------------------------------------

    def _exp_factor(self, alpha: int, i: int, z) -> complex:
        # assembled multiplicatively; the log of H_ii is never taken
        return (root_of_unity(self.structure.p, alpha * self.spec.rho(i))
                * np.exp(self.spec.z_exponent(i, z)) * self.H[i, i])

    def tau_pair(self, z: tuple[float, float], alpha: int) -> TauPair:
        bs = self.structure
        p = bs.p
        a = (alpha - 1) % p + 1
        a_prev = (alpha - 2) % p + 1
        e_here = [self._exp_factor(alpha, i, z) for i in range(self.spec.r)]
        tau = 1.0 + 0j
        scale = 1.0
        tau_x = np.eye(bs.size(a), dtype=complex)
        tau_x_inv = np.eye(bs.size(a_prev), dtype=complex)
        for S in _subsets(self.spec.r):
            key = tuple(S)
            weight = self._eta[key] * np.prod([e_here[i] for i in S])
            tau += weight
            scale += abs(weight)
            tau_x = tau_x + weight * self._xt[(a, key)]
            tau_x_inv = tau_x_inv + weight * self._xt_inv[(a_prev, key)]
        return TauPair(tau=tau, tau_x=tau_x, tau_x_inv=tau_x_inv, scale=scale)

    def gamma_pair(self, z: tuple[float, float], alpha: int):
        """Solution block Gamma_alpha and its inverse at one point."""
        here = self.tau_pair(z, alpha)
        up = self.tau_pair(z, alpha + 1)
        for tp in (here, up):
            if abs(tp.tau) < SINGULARITY_RTOL * tp.scale:
                raise SolutionSingularityError(
                    f"tau vanishes at {z}; the solution has a pole here", point=z)
        gamma = here.tau_x / here.tau
        gamma_inv = up.tau_x_inv / up.tau
        return gamma, gamma_inv


# -- operations on a SolitonSpec ---------------------------------------------

def dressing_factor_h(spec: SolitonSpec, alpha: int, A: str):
    """Constant symmetry factor h_{alpha,A} and its inverse, A in {'J','K'}."""
    if A not in ("J", "K"):
        raise ValueError("A must be 'J' or 'K'")
    return ClosedFormSolution(spec).dressing_factor(alpha, A)


def delta_matrix_X(spec: SolitonSpec, subset, alpha: int,
                   inverse: bool = False) -> np.ndarray:
    """X_{alpha, subset} via the row-replacement determinant representation."""
    sol = ClosedFormSolution(spec)
    a = (alpha - 1) % spec.structure.p + 1
    return sol._delta_x(a, sorted(subset), inverse)


def multi_soliton_tau_pair(spec: SolitonSpec, z, alpha: int) -> TauPair:
    return ClosedFormSolution(spec).tau_pair(z, alpha)


def soliton_gamma_pair(spec: SolitonSpec, z, alpha: int):
    return ClosedFormSolution(spec).gamma_pair(z, alpha)


def one_soliton(spec: SolitonSpec, z: tuple[float, float]):
    """Single-soliton blocks from the explicit rank-one formulas (r = 1).

    Returns {alpha: (Gamma_alpha, Gamma_alpha^-1)}.  This path goes through
    the idempotent algebra directly rather than the subset sums and serves
    as an independent route for cross-checking the general machinery.
    """
    if spec.r != 1:
        raise ValueError("one_soliton requires exactly one pole pair")
    bs = spec.structure
    p = bs.p
    fam = IdempotentFamily(spec)
    mu, nu = spec.poles.mu[0], spec.poles.nu[0]
    I = spec.index_c[0]
    J, K = spec.index_d[0]
    a_J = 1 - mu / nu * root_of_unity(p, I + J)
    a_K = 1 - mu / nu * root_of_unity(p, I + K)
    a_J_inv = 1 - nu / mu * root_of_unity(p, -(I + J))
    a_K_inv = 1 - nu / mu * root_of_unity(p, -(I + K))
    d_ratio = fam.bracket("K", 0, 0) / fam.bracket("J", 0, 0) * a_J / a_K
    phase = np.exp(spec.z_exponent(0, z)) * d_ratio
    rho = spec.rho(0)
    out = {}
    for alpha in range(1, p + 1):
        na = bs.size(alpha)
        eye = np.eye(na, dtype=complex)
        Y_J = fam.y("J", alpha, 0, 0)
        Y_K = fam.y("K", alpha, 0, 0)
        h_J = eye - a_J * Y_J
        h_J_inv = eye - a_J_inv * Y_J
        h_K = eye - a_K * Y_K
        h_K_inv = eye - a_K_inv * Y_K
        x_t = h_J_inv @ h_K
        x_t_inv = h_K_inv @ h_J
        e_here = root_of_unity(p, alpha * rho) * phase
        e_up = root_of_unity(p, (alpha + 1) * rho) * phase
        for denom in (1 + e_here, 1 + e_up):
            if abs(denom) < SINGULARITY_RTOL * (1 + abs(e_here) + abs(e_up)):
                raise SolutionSingularityError(
                    f"one-soliton denominator vanishes at {z}", point=z)
        gamma = (eye + e_here * x_t) / (1 + e_here)
        gamma_inv = (eye + e_up * x_t_inv) / (1 + e_up)
        out[alpha] = (gamma, gamma_inv)
    return out
