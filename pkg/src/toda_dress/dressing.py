"""General rational dressing of the trivial seed solution.

A dressed solution is parameterized by r pole pairs (mu_i, nu_i) and initial
coefficient vectors.  At each point of the plane the pole vectors evolve by
exponential phases, an r x r matrix family R_a is assembled from them, and
the solution blocks are rank-r updates of the identity driven by R_a^-1.
All index conventions are 1-based and cyclic; quasi-periodic quantities pick
up a factor mu^p (resp. nu^-p) when the block index advances by a full cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockalg import BlockStructure, GradedPair, root_of_unity
from .errors import (NullSectorUnsupportedError, PoleCollisionError,
                     SolutionSingularityError)
from .spectral import SpectralData, eigen_psi

POLE_SEPARATION_RTOL = 1e-9
R_CONDITION_LIMIT = 1e12


def cyclotomic_identity(z: complex, beta: int, p: int) -> tuple[complex, complex]:
    """Evaluate both sides of the root-of-unity partial fraction identity.

    lhs = sum_{a=0}^{p-1} z eps_p^(-beta a) / (z - eps_p^a),
    rhs = p z^(p - (beta mod p)) / (z^p - 1).

    Returns (lhs, rhs); they agree to roundoff for any admissible z.
    """
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    z = complex(z)
    for a in range(p):
        if abs(z - root_of_unity(p, a)) < 1e-12:
            raise ValueError(f"z = {z} is at (or too near) the pole eps_p^{a}")
    lhs = sum(z * root_of_unity(p, -beta * a) / (z - root_of_unity(p, a))
              for a in range(p))
    rhs = p * z ** (p - beta % p) / (z ** p - 1)
    return lhs, rhs


@dataclass(frozen=True)
class PoleData:
    """Pole positions mu_i (of psi) and nu_i (of psi^-1)."""

    mu: tuple[complex, ...]
    nu: tuple[complex, ...]

    def __post_init__(self):
        mu = tuple(complex(m) for m in self.mu)
        nu = tuple(complex(v) for v in self.nu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        if len(mu) != len(nu):
            raise ValueError("mu and nu must have the same length")
        if not mu:
            raise ValueError("need at least one pole pair")
        if any(m == 0 for m in mu) or any(v == 0 for v in nu):
            raise ValueError("pole positions must be nonzero")

    @property
    def r(self) -> int:
        return len(self.mu)

    def validate_separation(self, p: int) -> None:
        """Require mu_i^p, nu_i^p pairwise distinct and mutually separated."""
        mu_p = [m ** p for m in self.mu]
        nu_p = [v ** p for v in self.nu]

        def too_close(a, b):
            return abs(a - b) < POLE_SEPARATION_RTOL * max(abs(a), abs(b), 1.0)

        for i in range(self.r):
            for j in range(i + 1, self.r):
                if too_close(mu_p[i], mu_p[j]):
                    raise PoleCollisionError(f"mu[{i}]^p and mu[{j}]^p coincide")
                if too_close(nu_p[i], nu_p[j]):
                    raise PoleCollisionError(f"nu[{i}]^p and nu[{j}]^p coincide")
        for i in range(self.r):
            for j in range(self.r):
                if too_close(nu_p[i], mu_p[j]):
                    raise PoleCollisionError(f"nu[{i}]^p collides with mu[{j}]^p")


@dataclass(frozen=True)
class InitialData:
    """Expansion coefficients of the pole vectors at the origin.

    ``d[i][b-1]`` and ``c[i][b-1]`` are the n_star coefficient vectors on the
    eigenvector matrix Psi_b (b = 1..p) for pole i; ``d_null``/``c_null`` are
    the coefficients on the null-sector basis.  A zero coefficient may be
    given as None.
    """

    d: tuple[tuple[np.ndarray | None, ...], ...]
    c: tuple[tuple[np.ndarray | None, ...], ...]
    d_null: tuple[np.ndarray | None, ...]
    c_null: tuple[np.ndarray | None, ...]

    @property
    def r(self) -> int:
        return len(self.d)

    def has_null_component(self) -> bool:
        def nonzero(v):
            return v is not None and np.any(np.asarray(v) != 0)
        return any(nonzero(v) for v in self.d_null) or any(nonzero(v) for v in self.c_null)


def z_phase(p: int, alpha: int, w: complex, z: tuple[float, float]) -> complex:
    """Exponent Z_alpha(w) = w^-1 eps_p^-alpha z_minus + w eps_p^alpha z_plus."""
    zm, zp = z
    return root_of_unity(p, -alpha) * zm / w + root_of_unity(p, alpha) * w * zp


class EvolvedVectors:
    """Pole vectors u_i, y_i at one point, with quasi-periodic block access."""

    def __init__(self, structure: BlockStructure, poles: PoleData,
                 point: tuple[float, float], u, y):
        self.structure = structure
        self.poles = poles
        self.point = (float(point[0]), float(point[1]))
        self.u = tuple(np.asarray(v, dtype=complex) for v in u)
        self.y = tuple(np.asarray(v, dtype=complex) for v in y)

    def u_tilde(self, i: int, alpha: int) -> np.ndarray:
        """Quasi-periodic block u_{i,alpha} mu_i^alpha for any integer alpha."""
        bs = self.structure
        return self.u[i][bs.block_slice(alpha)] * self.poles.mu[i] ** alpha

    def y_tilde(self, i: int, alpha: int) -> np.ndarray:
        bs = self.structure
        return self.y[i][bs.block_slice(alpha)] * self.poles.nu[i] ** (-alpha)


def evolve_vectors(poles: PoleData, init: InitialData, sd: SpectralData,
                   z: tuple[float, float]) -> EvolvedVectors:
    """Closed-form evolution of the pole vectors on the soliton subclass.

    y_i = sum_b Psi_b exp(Z_{-b}(nu_i)) d_{i,b} and
    u_i = sum_b Psi_b exp(-Z_b(mu_i)) c_{i,b}.  Null-sector coefficients are
    not supported in closed form (their polynomial factors are not pinned
    down here); use the matrix-exponential oracle for that case.
    """
    if init.has_null_component():
        raise NullSectorUnsupportedError(
            "nonzero null-sector coefficients; evolve with the matrix-exponential "
            "oracle (verify.oracle_evolution) instead")
    bs = sd.structure
    p = bs.p
    psis = [eigen_psi(sd, b) for b in range(1, p + 1)]
    us, ys = [], []
    for i in range(poles.r):
        mu, nu = poles.mu[i], poles.nu[i]
        u = np.zeros(bs.n, dtype=complex)
        y = np.zeros(bs.n, dtype=complex)
        for b in range(1, p + 1):
            d_ib = init.d[i][b - 1]
            if d_ib is not None:
                y += psis[b - 1] @ np.asarray(d_ib, dtype=complex) \
                    * np.exp(z_phase(p, -b, nu, z))
            c_ib = init.c[i][b - 1]
            if c_ib is not None:
                u += psis[b - 1] @ np.asarray(c_ib, dtype=complex) \
                    * np.exp(-z_phase(p, b, mu, z))
        us.append(u)
        ys.append(y)
    return EvolvedVectors(bs, poles, z, us, ys)


def r_tilde(ev: EvolvedVectors, alpha: int) -> np.ndarray:
    """The r x r matrix R_alpha of pairings of quasi-periodic blocks.

    (R_alpha)_{ij} = (nu_i^p - mu_j^p)^-1 [ mu_j^p sum_{b<alpha} y~_{i,b} u~_{j,b}
    + nu_i^p sum_{b>=alpha} y~_{i,b} u~_{j,b} ], b over 1..p, split at alpha.
    The base formula covers alpha in 1..p+1; other indices reduce by
    quasi-periodicity (a diagonal rescaling by nu^-p, mu^p per full cycle).
    """
    bs = ev.structure
    p = bs.p
    r = ev.poles.r
    if not 1 <= alpha <= p + 1:
        base = (alpha - 1) % p + 1
        shift = (alpha - base) // p
        out = r_tilde(ev, base)
        scale = np.array([[ev.poles.nu[i] ** (-p * shift) * ev.poles.mu[j] ** (p * shift)
                           for j in range(r)] for i in range(r)])
        return out * scale
    pair_sum = {}
    for i in range(r):
        for j in range(r):
            pair_sum[(i, j)] = [ev.y_tilde(i, b) @ ev.u_tilde(j, b)
                                for b in range(1, p + 1)]
    out = np.empty((r, r), dtype=complex)
    for i in range(r):
        nu_p = ev.poles.nu[i] ** p
        for j in range(r):
            mu_p = ev.poles.mu[j] ** p
            denom = nu_p - mu_p
            if abs(denom) < POLE_SEPARATION_RTOL * max(abs(nu_p), abs(mu_p), 1.0):
                raise PoleCollisionError(
                    f"nu[{i}]^p - mu[{j}]^p below separation threshold")
            s1 = sum(pair_sum[(i, j)][b - 1] for b in range(1, alpha))
            s2 = sum(pair_sum[(i, j)][b - 1] for b in range(alpha, p + 1))
            out[i, j] = (mu_p * s1 + nu_p * s2) / denom
    return out


class DressedPoint:
    """Per-point cache: R matrices and solution blocks at one (z-, z+)."""

    def __init__(self, solution: "DressedSolution", z: tuple[float, float]):
        self.solution = solution
        self.point = (float(z[0]), float(z[1]))
        self.ev = evolve_vectors(solution.poles, solution.init, solution.spectral, z)
        self._r_cache: dict[int, np.ndarray] = {}
        self._rinv_cache: dict[int, np.ndarray] = {}

    def r_tilde(self, alpha: int) -> np.ndarray:
        if alpha not in self._r_cache:
            self._r_cache[alpha] = r_tilde(self.ev, alpha)
        return self._r_cache[alpha]

    def _r_inv(self, alpha: int) -> np.ndarray:
        if alpha not in self._rinv_cache:
            R = self.r_tilde(alpha)
            if np.linalg.cond(R) > R_CONDITION_LIMIT:
                raise SolutionSingularityError(
                    f"R_{alpha} is singular at {self.point}; the solution has a "
                    "pole here", point=self.point)
            self._rinv_cache[alpha] = np.linalg.inv(R)
        return self._rinv_cache[alpha]

    def gamma_pair(self, alpha: int) -> tuple[np.ndarray, np.ndarray]:
        return gamma_pair(self, alpha)


def gamma_pair(point: DressedPoint, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """Solution block and its inverse at one point.

    Gamma_a = I - sum_{ij} u~_{i,a} (R_a^-1)_{ij} y~_{j,a};
    Gamma_a^-1 uses R_{a+1}^-1 in place of R_a^-1 with a sign flip.
    """
    bs = point.solution.structure
    r = point.solution.poles.r
    na = bs.size(alpha)
    r_inv = point._r_inv(alpha)
    r1_inv = point._r_inv(alpha + 1)
    gamma = np.eye(na, dtype=complex)
    gamma_inv = np.eye(na, dtype=complex)
    for i in range(r):
        ui = point.ev.u_tilde(i, alpha)
        for j in range(r):
            yj = point.ev.y_tilde(j, alpha)
            outer = np.outer(ui, yj)
            gamma -= outer * r_inv[i, j]
            gamma_inv += outer * r1_inv[i, j]
    return gamma, gamma_inv


def p_q_matrices(point: DressedPoint) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Rank-structured residue matrices P_i, Q_i solving the pole conditions.

    (P_i)_{ab} = -(1/p) u_{i,a} sum_j (R_b^-1)_{ij} y_{j,b}^T and
    (Q_i)_{ab} = (1/p) sum_j u_{j,a} mu_j^-1 (R_{a+1}^-1)_{ji} nu_i y_{i,b}^T,
    assembled as full n x n matrices in un-tilded variables.
    """
    sol = point.solution
    bs = sol.structure
    p = bs.p
    r = sol.poles.r
    mu, nu = sol.poles.mu, sol.poles.nu
    u_blk = {(i, a): point.ev.u_tilde(i, a) * mu[i] ** (-a)
             for i in range(r) for a in range(1, p + 1)}
    y_blk = {(i, a): point.ev.y_tilde(i, a) * nu[i] ** a
             for i in range(r) for a in range(1, p + 1)}
    r_inv_plain = {}
    for a in range(1, p + 2):
        rt_inv = point._r_inv(a)
        # un-tilde: R_a = diag(nu^a) Rt_a diag(mu^-a), so R_a^-1 = diag(mu^a) Rt_a^-1 diag(nu^-a)
        r_inv_plain[a] = np.array(
            [[mu[i] ** a * rt_inv[i, j] * nu[j] ** (-a) for j in range(r)]
             for i in range(r)])
    P = [np.zeros((bs.n, bs.n), dtype=complex) for _ in range(r)]
    Q = [np.zeros((bs.n, bs.n), dtype=complex) for _ in range(r)]
    for i in range(r):
        for a in range(1, p + 1):
            sa = bs.block_slice(a)
            for b in range(1, p + 1):
                sb = bs.block_slice(b)
                block_p = np.zeros((bs.size(a), bs.size(b)), dtype=complex)
                block_q = np.zeros((bs.size(a), bs.size(b)), dtype=complex)
                for j in range(r):
                    block_p -= np.outer(u_blk[(i, a)], y_blk[(j, b)]) \
                        * r_inv_plain[b][i, j] / p
                    block_q += np.outer(u_blk[(j, a)], y_blk[(i, b)]) \
                        * (nu[i] / mu[j]) * r_inv_plain[a + 1][j, i] / p
                P[i][sa, sb] = block_p
                Q[i][sa, sb] = block_q
    return P, Q


def assemble_psi_pair(point: DressedPoint, lam: complex) -> tuple[np.ndarray, np.ndarray]:
    """The dressing factor psi(lambda) and its inverse at one point.

    psi = I + sum_{i,k} lambda/(lambda - eps_p^k mu_i) h^k P_i h^-k and the
    inverse replaces (mu_i, P_i) by (nu_i, Q_i); the normalization at
    lambda = 0 is the identity.
    """
    sol = point.solution
    bs = sol.structure
    p = bs.p
    lam = complex(lam)
    for i in range(sol.poles.r):
        for k in range(1, p + 1):
            for pole in (sol.poles.mu[i], sol.poles.nu[i]):
                if abs(lam - root_of_unity(p, k) * pole) < 1e-10 * max(1.0, abs(pole)):
                    raise ValueError(f"lambda = {lam} is at a pole of psi")
    P, Q = p_q_matrices(point)
    h_pow = sol._h_powers
    psi = np.eye(bs.n, dtype=complex)
    psi_inv = np.eye(bs.n, dtype=complex)
    for i in range(sol.poles.r):
        for k in range(1, p + 1):
            conj_p = h_pow[k] @ P[i] @ h_pow[p - k]
            conj_q = h_pow[k] @ Q[i] @ h_pow[p - k]
            psi += lam / (lam - root_of_unity(p, k) * sol.poles.mu[i]) * conj_p
            psi_inv += lam / (lam - root_of_unity(p, k) * sol.poles.nu[i]) * conj_q
    return psi, psi_inv


class DressedSolution:
    """Evaluatable solution produced by the general dressing construction."""

    provenance = "general-dressing"

    def __init__(self, pair: GradedPair, spectral: SpectralData,
                 poles: PoleData, init: InitialData):
        from .blockalg import build_h, require_commuting

        if init.r != poles.r:
            raise ValueError("initial data and pole data disagree on r")
        require_commuting(pair)
        poles.validate_separation(pair.structure.p)
        self.structure = pair.structure
        self.pair = pair
        self.spectral = spectral
        self.poles = poles
        self.init = init
        h = build_h(pair.structure).array
        self._h_powers = [np.linalg.matrix_power(h, k)
                          for k in range(pair.structure.p + 1)]

    def at(self, z: tuple[float, float]) -> DressedPoint:
        """Evaluate at one point; the returned cache is not shared."""
        return DressedPoint(self, z)

    def gamma_pair(self, z: tuple[float, float], alpha: int):
        return self.at(z).gamma_pair(alpha)
