"""Shared fixtures: canonical setups and admissible random soliton data."""

import itertools

import numpy as np
import pytest

import toda_dress as td
from toda_dress.errors import DegenerateConfigurationError


def make_canonical(sizes):
    bs = td.BlockStructure(tuple(sizes))
    pair = td.build_canonical_c(bs)
    sd = td.canonical_theta(pair)
    return bs, pair, sd


def _draw_complex(rng, shape=()):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_soliton_spec(sizes, r, rng, clearance=0.25, window=0.45,
                        max_tries=200):
    """Rejection-sample soliton data that stays clear of singular lines.

    Pole magnitudes are kept near 1 so the exponential rates stay moderate,
    and a candidate is accepted only if, on a coarse cover of the padded
    window [-window, window]^2, every scalar tau keeps at least ``clearance``
    relative magnitude.  This keeps finite-difference constants bounded for
    the residual certificates.
    """
    bs, pair, sd = make_canonical(sizes)
    p = bs.p
    for _ in range(max_tries):
        mu = []
        nu = []
        for _ in range(r):
            m = _draw_complex(rng)
            v = _draw_complex(rng)
            mu.append(m / abs(m) * rng.uniform(0.75, 1.4))
            nu.append(v / abs(v) * rng.uniform(0.75, 1.4))
        powers = [m ** p for m in mu] + [v ** p for v in nu]
        if any(abs(a - b) < 0.25 for a, b in itertools.combinations(powers, 2)):
            continue
        index_c = tuple(int(rng.integers(1, p + 1)) for _ in range(r))
        index_d = []
        for _ in range(r):
            J, K = sorted(rng.choice(np.arange(1, p + 1), size=2, replace=False))
            index_d.append((int(J), int(K)))
        coeff_c = tuple(_draw_complex(rng, (bs.n_star,)) for _ in range(r))
        coeff_d = tuple((_draw_complex(rng, (bs.n_star,)),
                         _draw_complex(rng, (bs.n_star,))) for _ in range(r))
        try:
            spec = td.SolitonSpec(spectral=sd, poles=td.PoleData(tuple(mu), tuple(nu)),
                                  index_c=index_c, index_d=tuple(index_d),
                                  coeff_c=coeff_c, coeff_d=coeff_d)
            solution = td.ClosedFormSolution(spec)
        except (DegenerateConfigurationError, td.errors.PoleCollisionError):
            continue
        if clearance is not None and not _has_clearance(solution, window, clearance):
            continue
        return spec, pair, solution
    raise RuntimeError(f"no admissible draw for sizes={sizes}, r={r}")


def _has_clearance(solution, window, clearance):
    p = solution.structure.p
    axis = np.linspace(-window - 0.02, window + 0.02, 9)
    for zm in axis:
        for zp in axis:
            for a in range(1, p + 1):
                tp = solution.tau_pair((float(zm), float(zp)), a)
                if abs(tp.tau) < clearance * tp.scale:
                    return False
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
