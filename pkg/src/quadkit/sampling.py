"""Randomized discretizations of the parameter domain.

Streams come from a counter-based generator (Philox 4x64, as shipped with
numpy) so that a (strategy, seed, m, d) tuple reproduces the same points
bit-for-bit.  The algorithm identifier is recorded in every sample set.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .orthopoly import evaluate_basis

GENERATOR_ALGORITHM = "philox4x64"

# inverse-CDF transforms per density family, applied to uniform(0,1) draws
_TRANSFORMS = {
    "legendre": lambda u: 2.0 * u - 1.0,
    "hermite": ndtri,
    "chebyshev1": lambda u: np.cos(np.pi * u),
}


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray          # m x d
    strategy: str               # monte_carlo | christoffel
    seed: int
    density: tuple              # family name per dimension
    metadata: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def to_json(self):
        return {"points": self.points.tolist(), "strategy": self.strategy,
                "seed": self.seed, "density": list(self.density),
                "metadata": dict(self.metadata)}


def _stream(seed):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def monte_carlo_sample(densities, m, seed):
    """i.i.d. draws from the product density via per-dimension inverse CDFs.

    Parameters
    ----------
    densities : sequence of str
        Family name per dimension (legendre = uniform, hermite = standard
        normal, chebyshev1 = arcsine).
    m : int
        Number of samples.
    seed : int
        Stream key for the counter-based generator.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if isinstance(densities, str):
        densities = (densities,)
    densities = tuple(densities)
    for fam in densities:
        if fam not in _TRANSFORMS:
            raise ValueError(f"unsupported density family for sampling: {fam!r}")
    gen = _stream(seed)
    u = gen.random((m, len(densities)))
    pts = np.column_stack([_TRANSFORMS[fam](u[:, i]) for i, fam in enumerate(densities)])
    return SampleSet(pts, "monte_carlo", int(seed), densities,
                     {"algorithm": GENERATOR_ALGORITHM})


def christoffel_sample(d, m, seed, density="legendre"):
    """Arcsine draws on [-1, 1]^d: z = cos(pi u) per dimension.

    Only the uniform target density is supported; sampling the equilibrium
    measure for unbounded densities needs machinery we do not carry.
    """
    if density != "legendre":
        raise ValueError("christoffel sampling supports only the uniform density")
    if m < 1:
        raise ValueError("m must be >= 1")
    gen = _stream(seed)
    u = gen.random((m, d))
    pts = np.cos(np.pi * u)
    return SampleSet(pts, "christoffel", int(seed), ("legendre",) * d,
                     {"algorithm": GENERATOR_ALGORITHM})


def sample_weights(points, basis, recurrences):
    """Reciprocal-kernel weights for a sampled point set.

    With K_n(z) = sum_j Psi_j(z)^2 the diagonal projection kernel, the raw
    weight of point i is (n/m) / K_n(z_i); weights are then normalized to
    unit sum.  Down-weighting high-kernel points is what flattens the
    effective kernel and conditions the weighted least-squares matrix; the
    proportional (non-reciprocal) alternative degrades conditioning.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    psi = evaluate_basis(basis, recurrences, pts)
    kernel = np.sum(psi ** 2, axis=1)
    if np.any(kernel <= 1e-300):
        raise ValueError("projection kernel vanishes at a sample point")
    n = psi.shape[1]
    m = pts.shape[0]
    raw = (n / m) / kernel
    return raw / raw.sum()


def kernel_diagonal(points, basis, recurrences):
    """K_n evaluated at the points (diagnostic surface)."""
    psi = evaluate_basis(basis, recurrences, np.atleast_2d(np.asarray(points, float)))
    return np.sum(psi ** 2, axis=1)
