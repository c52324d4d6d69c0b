"""Block-structured complex matrix algebra for cyclically graded connection data.

Everything downstream is shaped by a partition of ``n`` into ``p`` blocks of
sizes ``n_1..n_p``.  Block indices are 1-based and cyclic (index ``alpha + p``
means the same block as ``alpha``), matching the usual conventions for
cyclically graded matrices.  Internally arrays are dense ``complex128``;
the problem sizes are desk scale, so no sparsity machinery is used beyond
named accessors for the nonzero blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COMMUTATOR_TOL = 1e-12


def root_of_unity(p: int, k: int = 1) -> complex:
    """Return exp(2*pi*i*k/p), the k-th power of the principal p-th root."""
    if p < 1:
        raise ValueError(f"order p must be a positive integer, got {p}")
    return complex(np.exp(2j * np.pi * k / p))


@dataclass(frozen=True)
class BlockStructure:
    """Partition of n into p cyclic blocks.

    Parameters
    ----------
    sizes : tuple of int
        Block sizes ``n_1..n_p``; requires ``p >= 2`` and every size >= 1.

    Attributes
    ----------
    p, n : int
        Number of blocks and total dimension.
    n_star : int
        Minimum block size.
    rank_k : int
        ``sum_a min(n_a, n_{a+1})`` with cyclic index, the maximum possible
        rank of the lower connection component for this structure.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 2:
            raise ValueError(f"need at least 2 blocks, got {len(sizes)}")
        if any(s < 1 for s in sizes):
            raise ValueError(f"all block sizes must be >= 1, got {sizes}")
        offsets = [0]
        for s in sizes:
            offsets.append(offsets[-1] + s)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def p(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return self._offsets[-1]

    @property
    def n_star(self) -> int:
        return min(self.sizes)

    @property
    def rank_k(self) -> int:
        return sum(min(self.size(a), self.size(a + 1)) for a in range(1, self.p + 1))

    def size(self, alpha: int) -> int:
        """Size of block ``alpha`` (1-based, cyclic)."""
        return self.sizes[(alpha - 1) % self.p]

    def block_slice(self, alpha: int) -> slice:
        """Row/column slice of block ``alpha`` in the flat n x n layout."""
        a = (alpha - 1) % self.p
        return slice(self._offsets[a], self._offsets[a + 1])

    def is_uniform_overlap(self) -> bool:
        """True when min(n_a, n_{a+1}) equals n_star for every cyclic a."""
        return self.rank_k == self.p * self.n_star


class BlockMatrix:
    """Dense n x n complex matrix together with its block partition.

    The flat array and the p x p grid of blocks are two views of the same
    data; ``partition`` and ``from_blocks`` are mutually inverse.  Instances
    are immutable: the backing array is read-only.
    """

    def __init__(self, structure: BlockStructure, array: np.ndarray):
        array = np.asarray(array, dtype=complex)
        if array.shape != (structure.n, structure.n):
            raise ValueError(
                f"array shape {array.shape} does not match structure n={structure.n}")
        array = array.copy()
        array.setflags(write=False)
        self.structure = structure
        self._array = array

    @classmethod
    def from_blocks(cls, structure: BlockStructure, grid) -> "BlockMatrix":
        """Assemble from a p x p grid; grid[a][b] is block (a+1, b+1)."""
        p = structure.p
        arr = np.zeros((structure.n, structure.n), dtype=complex)
        for a in range(p):
            for b in range(p):
                blk = np.asarray(grid[a][b], dtype=complex)
                want = (structure.sizes[a], structure.sizes[b])
                if blk.shape != want:
                    raise ValueError(
                        f"block ({a + 1},{b + 1}) has shape {blk.shape}, expected {want}")
                arr[structure.block_slice(a + 1), structure.block_slice(b + 1)] = blk
        return cls(structure, arr)

    @property
    def array(self) -> np.ndarray:
        """Read-only flat n x n view."""
        return self._array

    def block(self, alpha: int, beta: int) -> np.ndarray:
        """Block (alpha, beta), 1-based cyclic indices."""
        return self._array[self.structure.block_slice(alpha),
                           self.structure.block_slice(beta)]

    def partition(self):
        """The p x p grid of blocks as nested lists."""
        p = self.structure.p
        return [[self.block(a, b) for b in range(1, p + 1)] for a in range(1, p + 1)]


def build_h(bs: BlockStructure) -> BlockMatrix:
    """Diagonal automorphism matrix: block (a, a) is eps_p^(p-a+1) * I."""
    arr = np.zeros((bs.n, bs.n), dtype=complex)
    for a in range(1, bs.p + 1):
        sl = bs.block_slice(a)
        arr[sl, sl] = root_of_unity(bs.p, bs.p - a + 1) * np.eye(bs.size(a))
    return BlockMatrix(bs, arr)


def apply_automorphism(x: BlockMatrix, h: BlockMatrix) -> BlockMatrix:
    """Inner automorphism h x h^-1 on the shared block structure."""
    if x.structure != h.structure:
        raise ValueError("x and h must share a BlockStructure")
    arr = h.array @ x.array @ np.linalg.inv(h.array)
    return BlockMatrix(x.structure, arr)


class GradedPair:
    """Constant connection pair (c_minus, c_plus) with block-cyclic sparsity.

    ``c_minus`` carries blocks C_{-a} mapping block a to block a+1 (cyclic),
    ``c_plus`` carries C_{+a} mapping block a+1 back to block a.  The label
    a runs over 1..p with C_{-p} == C_{-0} (the wrap-around corner block)
    and likewise for C_{+}.
    """

    def __init__(self, structure: BlockStructure, c_minus_blocks, c_plus_blocks):
        p = structure.p
        if len(c_minus_blocks) != p or len(c_plus_blocks) != p:
            raise ValueError(f"need exactly {p} blocks for each component")
        cm = []
        cp = []
        for a in range(1, p + 1):
            m = np.asarray(c_minus_blocks[a - 1], dtype=complex)
            want_m = (structure.size(a + 1), structure.size(a))
            if m.shape != want_m:
                raise ValueError(f"C_minus[{a}] has shape {m.shape}, expected {want_m}")
            q = np.asarray(c_plus_blocks[a - 1], dtype=complex)
            want_q = (structure.size(a), structure.size(a + 1))
            if q.shape != want_q:
                raise ValueError(f"C_plus[{a}] has shape {q.shape}, expected {want_q}")
            m = m.copy()
            q = q.copy()
            m.setflags(write=False)
            q.setflags(write=False)
            cm.append(m)
            cp.append(q)
        self.structure = structure
        self._cm = tuple(cm)
        self._cp = tuple(cp)

    def C_minus(self, alpha: int) -> np.ndarray:
        """C_{-alpha}; alpha is cyclic, C_{-0} is the corner block C_{-p}."""
        return self._cm[(alpha - 1) % self.structure.p]

    def C_plus(self, alpha: int) -> np.ndarray:
        return self._cp[(alpha - 1) % self.structure.p]

    @property
    def c_minus(self) -> BlockMatrix:
        """Full lower component with C_{-a} at block position (a+1, a)."""
        bs = self.structure
        arr = np.zeros((bs.n, bs.n), dtype=complex)
        for a in range(1, bs.p + 1):
            arr[bs.block_slice(a + 1), bs.block_slice(a)] = self.C_minus(a)
        return BlockMatrix(bs, arr)

    @property
    def c_plus(self) -> BlockMatrix:
        """Full upper component with C_{+a} at block position (a, a+1)."""
        bs = self.structure
        arr = np.zeros((bs.n, bs.n), dtype=complex)
        for a in range(1, bs.p + 1):
            arr[bs.block_slice(a), bs.block_slice(a + 1)] = self.C_plus(a)
        return BlockMatrix(bs, arr)


def build_canonical_c(bs: BlockStructure) -> GradedPair:
    """Canonical commuting pair: every block is I_{n_star} in the top-left corner.

    When ``min(n_a, n_{a+1})`` is the same for every cyclic pair of adjacent
    blocks (equivalently ``rank_k == p * n_star``) this is exactly the
    maximum-rank canonical form; each block then has full rank
    ``min(n_a, n_{a+1})``.  For other structures no maximum-rank commuting
    pair exists at all (the two products sandwiching a given block would have
    different ranks), so the construction keeps the identity at size
    ``n_star`` uniformly, which preserves commutativity and the eigenvector
    chain at the cost of rank.
    """
    ns = bs.n_star
    cm = []
    cp = []
    for a in range(1, bs.p + 1):
        m = np.zeros((bs.size(a + 1), bs.size(a)), dtype=complex)
        m[:ns, :ns] = np.eye(ns)
        q = np.zeros((bs.size(a), bs.size(a + 1)), dtype=complex)
        q[:ns, :ns] = np.eye(ns)
        cm.append(m)
        cp.append(q)
    return GradedPair(bs, cm, cp)


def commutator_check(pair: GradedPair) -> float:
    """Max Frobenius norm of C_{-(a-1)} C_{+(a-1)} - C_{+a} C_{-a} over a.

    Zero (to roundoff) exactly when the two components commute, which is the
    condition for the identity map to solve the field equations trivially.
    """
    worst = 0.0
    p = pair.structure.p
    for a in range(1, p + 1):
        lhs = pair.C_minus(a - 1) @ pair.C_plus(a - 1)
        rhs = pair.C_plus(a) @ pair.C_minus(a)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def require_commuting(pair: GradedPair, tol: float = COMMUTATOR_TOL) -> None:
    """Raise if the pair does not commute; dressing needs the trivial seed."""
    res = commutator_check(pair)
    if res > tol:
        raise ValueError(
            f"connection components do not commute (residual {res:.3e} > {tol:.1e}); "
            "no trivial seed solution exists for this pair")
