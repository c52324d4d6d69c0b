"""Eigen-structure of the graded connection pair.

The nonzero spectrum of the lower component lives on the unit circle: each
p-th root of unity appears with multiplicity ``n_star``, carried by stacked
eigenvector matrices built from a chain of theta blocks.  The remaining
directions span the (generalized) null space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockalg import BlockStructure, GradedPair, root_of_unity
from .errors import SpectralConstructionError

CHAIN_TOL = 1e-12
NULL_SVD_RTOL = 1e-10
CLUSTER_TOL = 1e-8
CLUSTER_AMBIGUITY = 1e-6


@dataclass(frozen=True)
class SpectralData:
    """theta chain, its Gram matrix, and a basis of the generalized null space.

    ``theta[a-1]`` is the n_a x n_star block for a = 1..p; ``gram`` is the
    common n_star x n_star product theta^T theta; ``null_vectors`` has
    n - p*n_star orthonormal columns spanning the generalized null space of
    the lower component (empty when n == p*n_star).
    """

    structure: BlockStructure
    theta: tuple[np.ndarray, ...]
    gram: np.ndarray
    null_vectors: np.ndarray

    def theta_block(self, alpha: int) -> np.ndarray:
        return self.theta[(alpha - 1) % self.structure.p]

    def psi(self, beta: int) -> np.ndarray:
        return eigen_psi(self, beta)


def _check_chain(pair: GradedPair, theta) -> float:
    p = pair.structure.p
    worst = 0.0
    for a in range(1, p + 1):
        t_a = theta[(a - 1) % p]
        t_next = theta[a % p]
        worst = max(worst, float(np.linalg.norm(pair.C_minus(a) @ t_a - t_next)))
        worst = max(worst, float(np.linalg.norm(pair.C_plus(a) @ t_next - t_a)))
    return worst


def canonical_theta(pair: GradedPair) -> SpectralData:
    """Spectral data for a canonical pair: theta_a = (I_{n_star}; 0).

    The fixed choice is verified against the chain relations for the actual
    blocks of ``pair``; a pair for which it fails is rejected rather than
    silently mis-diagonalized.
    """
    bs = pair.structure
    ns = bs.n_star
    theta = []
    for a in range(1, bs.p + 1):
        t = np.zeros((bs.size(a), ns), dtype=complex)
        t[:ns, :ns] = np.eye(ns)
        theta.append(t)
    res = _check_chain(pair, theta)
    if res > CHAIN_TOL:
        raise SpectralConstructionError(
            f"canonical theta fails the chain relations (residual {res:.3e}); "
            "pair is not in canonical form")
    gram = theta[0].T @ theta[0]
    null = null_basis(pair)
    return SpectralData(structure=bs, theta=tuple(theta), gram=gram, null_vectors=null)


def eigen_psi(sd: SpectralData, beta: int) -> np.ndarray:
    """Stacked eigenvector matrix Psi_beta with block rows eps_p^(a*beta) theta_a."""
    bs = sd.structure
    if not 1 <= beta <= bs.p:
        raise ValueError(f"beta must be in 1..{bs.p}, got {beta}")
    out = np.zeros((bs.n, bs.n_star), dtype=complex)
    for a in range(1, bs.p + 1):
        out[bs.block_slice(a)] = root_of_unity(bs.p, a * beta) * sd.theta_block(a)
    return out


def null_basis(pair: GradedPair) -> np.ndarray:
    """Orthonormal basis of the generalized null space via SVD of c_minus^p.

    The p-th power annihilates every generalized null vector while acting
    invertibly on the root-of-unity eigenspaces, so its kernel is exactly the
    complement of those.  Returns an n x (n - p*n_star) matrix, possibly with
    zero columns.
    """
    bs = pair.structure
    cm = pair.c_minus.array
    power = np.linalg.matrix_power(cm, bs.p)
    _, s, vh = np.linalg.svd(power)
    scale = max(1.0, float(np.linalg.norm(cm)))
    kernel_dim = int(np.sum(s < NULL_SVD_RTOL * scale))
    expected = bs.n - bs.p * bs.n_star
    if kernel_dim != expected:
        raise SpectralConstructionError(
            f"kernel of c_minus^p has dimension {kernel_dim}, expected {expected}")
    basis = vh.conj().T[:, bs.n - kernel_dim:]
    return basis


@dataclass(frozen=True)
class SpectrumSummary:
    zero_algebraic: int
    zero_geometric: int
    nonzero_each: int


def spectrum_multiplicities(pair: GradedPair) -> SpectrumSummary:
    """Cluster the eigenvalues of c_minus against the predicted spectrum.

    Predicted: eigenvalue 0 with algebraic multiplicity n - p*n_star, and
    eps_p^(-beta) for beta = 1..p with multiplicity n_star each.  Geometric
    multiplicity of 0 is n - rank(c_minus), computed from the actual matrix.
    """
    bs = pair.structure
    cm = pair.c_minus.array
    eigvals = np.linalg.eigvals(cm)
    centers = [0j] + [root_of_unity(bs.p, -b) for b in range(1, bs.p + 1)]
    expected = [bs.n - bs.p * bs.n_star] + [bs.n_star] * bs.p
    for ev in eigvals:
        dists = sorted(abs(ev - c) for c in centers)
        if dists[0] > CLUSTER_TOL or dists[1] < CLUSTER_AMBIGUITY:
            raise SpectralConstructionError(
                f"eigenvalue {ev} cannot be unambiguously clustered")
    for center, want in zip(centers, expected):
        got = int(np.sum(np.abs(eigvals - center) < CLUSTER_TOL))
        if got != want:
            raise SpectralConstructionError(
                f"eigenvalue cluster at {center} has multiplicity {got}, expected {want}")
    rank = np.linalg.matrix_rank(cm, tol=NULL_SVD_RTOL * max(1.0, float(np.linalg.norm(cm))))
    return SpectrumSummary(
        zero_algebraic=bs.n - bs.p * bs.n_star,
        zero_geometric=bs.n - int(rank),
        nonzero_each=bs.n_star,
    )
