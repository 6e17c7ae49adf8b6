"""Isotropic covariance kernels on graph spaces.

Every kernel here is a spectral filter on the d-dimensional hypercube graph
whose vertices are the graph codes: k(x, y) depends only on the Hamming
distance m = |x XOR y| and can be written as

    k(x, y) = sigma^2 * sum_j c_j * G'(d, j, m)

where G' are the normalized level sums from :mod:`graphgp.kravchuk`, the
c_j are nonnegative and sum to one, and c_j is proportional to
Phi(lambda_j) * C(d, j) for a nonnegative spectral density Phi evaluated at
the hypercube Laplacian eigenvalue of level j. The normalizer is computed
with a max-shifted log-sum-exp so very peaked or very flat spectra stay
finite, and it guarantees k(x, x) = sigma^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .kravchuk import KravchukTable, build_table
from .spaces import GraphCode, GraphSpace, bit_matrix, pairwise_hamming


class LaplacianVariant(Enum):
    """Which hypercube Laplacian supplies the eigenvalues lambda_j.

    All three give the same kernel class, only the eigenvalue scale differs:
    2j for the plain Laplacian, 2j/d for the random-walk and symmetric
    normalized ones.
    """

    PLAIN = "plain"
    RANDOM_WALK = "rw"
    SYMMETRIC = "sym"


@dataclass(frozen=True)
class Matern:
    """Matérn spectral density Phi(lam) = (2 nu / kappa^2 + lam)^(-nu)."""

    nu: float
    kappa: float

    def __post_init__(self) -> None:
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be positive and finite, got {self.nu}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")

    def log_phi(self, lam: np.ndarray) -> np.ndarray:
        return -self.nu * np.log(2.0 * self.nu / self.kappa**2 + lam)


@dataclass(frozen=True)
class Heat:
    """Heat (diffusion / squared-exponential) density Phi(lam) = exp(-kappa^2 lam / 2)."""

    kappa: float

    def __post_init__(self) -> None:
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")

    def log_phi(self, lam: np.ndarray) -> np.ndarray:
        return -0.5 * self.kappa**2 * lam


@dataclass(frozen=True)
class CustomPhi:
    """Arbitrary nonnegative spectral density, given as a callable of lambda."""

    phi: Callable[[float], float]

    def log_phi(self, lam: np.ndarray) -> np.ndarray:
        values = np.array([float(self.phi(float(v))) for v in np.atleast_1d(lam)])
        if (values < 0).any():
            bad = float(values[values < 0][0])
            raise ValueError(f"spectral density must be nonnegative, got {bad}")
        with np.errstate(divide="ignore"):
            return np.log(values)


Family = Matern | Heat | CustomPhi


@dataclass(frozen=True)
class KernelSpec:
    """A kernel: spectral family, variance, Laplacian variant, truncation level.

    ``truncation`` keeps only levels j <= J; ``None`` means exact (J = d).
    """

    family: Family
    variance: float = 1.0
    laplacian: LaplacianVariant = LaplacianVariant.SYMMETRIC
    truncation: int | None = None

    def __post_init__(self) -> None:
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be positive and finite, got {self.variance}")
        if self.truncation is not None and self.truncation < 0:
            raise ValueError(f"truncation must be >= 0, got {self.truncation}")

    def with_variance(self, variance: float) -> "KernelSpec":
        return replace(self, variance=variance)


def matern_spec(
    d: int,
    nu_base: float = 2.5,
    kappa: float = 1.0,
    variance: float = 1.0,
    laplacian: LaplacianVariant = LaplacianVariant.SYMMETRIC,
    truncation: int | None = None,
) -> KernelSpec:
    """Matérn spec with the dimension-adapted smoothness nu = d/2 + nu_base.

    Plain half-integer nu decays too fast as d grows; offsetting by d/2
    keeps the kernel profile usable across dimensions.
    """
    return KernelSpec(Matern(nu=d / 2 + nu_base, kappa=kappa), variance, laplacian, truncation)


def eigenvalue_levels(variant: LaplacianVariant, d: int) -> np.ndarray:
    """Eigenvalue lambda_j of the chosen hypercube Laplacian for levels j = 0..d."""
    j = np.arange(d + 1, dtype=float)
    if variant is LaplacianVariant.PLAIN:
        return 2.0 * j
    return 2.0 * j / d


class CoefficientVector:
    """Per-level kernel coefficients in log form.

    ``log_weights[j]`` is log c_j where c_j = Phi(lambda_j) C(d, j) / C and
    the normalizer C makes the c_j sum to one; levels beyond the truncation
    are -inf.
    """

    def __init__(self, d: int, log_weights: np.ndarray, levels: np.ndarray):
        self.d = d
        log_weights = np.asarray(log_weights, dtype=float)
        log_weights.setflags(write=False)
        self.log_weights = log_weights
        levels = np.asarray(levels, dtype=float)
        levels.setflags(write=False)
        self.levels = levels

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


def _log_level_masses(spec: KernelSpec, d: int) -> tuple[np.ndarray, np.ndarray]:
    """log(Phi(lambda_j) * C(d, j)) per level, truncated; plus the levels."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    J = d if spec.truncation is None else min(spec.truncation, d)
    lam = eigenvalue_levels(spec.laplacian, d)
    log_phi = np.asarray(spec.family.log_phi(lam), dtype=float)
    log_raw = log_phi + build_table(d).log_binom
    log_raw[J + 1 :] = -np.inf
    return log_raw, lam


def log_normalizer(spec: KernelSpec, d: int) -> float:
    """log of C = sum over retained levels of Phi(lambda_j) * C(d, j).

    Computed with a max-shifted log-sum-exp; dividing the raw level masses
    by C is what pins k(x, x) to sigma^2.
    """
    log_raw, _ = _log_level_masses(spec, d)
    finite = np.isfinite(log_raw)
    if not finite.any():
        raise ValueError("degenerate kernel: the spectral density vanishes on every retained level")
    shift = log_raw[finite].max()
    return float(shift + math.log(np.exp(log_raw[finite] - shift).sum()))


@lru_cache(maxsize=512)
def spectral_coefficients(spec: KernelSpec, d: int) -> CoefficientVector:
    """Normalized per-level coefficients of the kernel on a d-bit space."""
    log_raw, lam = _log_level_masses(spec, d)
    return CoefficientVector(d, log_raw - log_normalizer(spec, d), lam)


def evaluate(spec: KernelSpec, table: KravchukTable, m: int) -> float:
    """Kernel value at Hamming distance m, via the cached level-sum table.

    Terms c_j * G'(d, j, m) carry signs from G', so the summation tracks
    signs explicitly and shifts by the largest log magnitude. At m = 0 every
    G' equals one and the value is exactly sigma^2 by normalization.
    """
    d = table.d
    if not (0 <= m <= d):
        raise ValueError(f"distance m={m} out of range for d={d}")
    if m == 0:
        return spec.variance
    coeffs = spectral_coefficients(spec, d)
    g = table.values[:, m]
    live = np.isfinite(coeffs.log_weights) & (g != 0.0)
    if not live.any():
        return 0.0
    log_terms = coeffs.log_weights[live] + np.log(np.abs(g[live]))
    signs = np.sign(g[live])
    shift = log_terms.max()
    acc = float(np.sum(signs * np.exp(log_terms - shift)))
    return spec.variance * acc * math.exp(shift)


def kernel_profile(spec: KernelSpec, d: int) -> np.ndarray:
    """Vector of kernel values at every distance m = 0..d."""
    table = build_table(d)
    return np.array([evaluate(spec, table, m) for m in range(d + 1)])


def heat_closed_form(kappa: float, sigma2: float, m: int) -> float:
    """Closed-form heat kernel value sigma^2 * tanh(kappa^2 / 2)^m.

    Matches the spectral Heat family with the plain Laplacian (eigenvalues
    2j); under the normalized variants the same formula holds with kappa^2
    replaced by kappa^2 / d.
    """
    if not (kappa > 0):
        raise ValueError(f"kappa must be positive, got {kappa}")
    if m < 0:
        raise ValueError(f"distance must be >= 0, got {m}")
    return sigma2 * math.tanh(kappa**2 / 2.0) ** m


def gram(
    spec: KernelSpec, xs: Sequence[GraphCode], ys: Sequence[GraphCode] | None = None
) -> np.ndarray:
    """Gram matrix of kernel values at pairwise Hamming distances."""
    if len(xs) == 0:
        return np.zeros((0, 0 if ys is None else len(ys)))
    d = xs[0].space.d
    profile = kernel_profile(spec, d)
    return profile[pairwise_hamming(xs, ys)]


class IsotropicKernel:
    """A kernel spec bound to a space; the Gram-matrix provider used by GP code."""

    def __init__(self, spec: KernelSpec, space: GraphSpace):
        self.spec = spec
        self.space = space

    def gram(self, xs: Sequence[GraphCode], ys: Sequence[GraphCode] | None = None) -> np.ndarray:
        return gram(self.spec, xs, ys)

    def profile(self) -> np.ndarray:
        return kernel_profile(self.spec, self.space.d)

    def with_spec(self, spec: KernelSpec) -> "IsotropicKernel":
        return IsotropicKernel(spec, self.space)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"IsotropicKernel({self.spec!r}, {self.space.kind.value}_{self.space.n})"


class LinearKernel:
    """Baseline linear kernel on raw bit vectors: k(x, y) = sigma^2 (<x, y> + 1)."""

    def __init__(self, variance: float = 1.0):
        if not (variance > 0 and math.isfinite(variance)):
            raise ValueError(f"variance must be positive and finite, got {variance}")
        self.variance = variance

    def gram(self, xs: Sequence[GraphCode], ys: Sequence[GraphCode] | None = None) -> np.ndarray:
        bx = bit_matrix(xs)
        by = bx if ys is None else bit_matrix(ys)
        return self.variance * (bx @ by.T + 1.0)

    def with_variance(self, variance: float) -> "LinearKernel":
        return LinearKernel(variance)


# -- JSON kernel-spec format ----------------------------------------------

_VARIANT_BY_CODE = {v.value: v for v in LaplacianVariant}


def spec_to_json(spec: KernelSpec) -> dict:
    if isinstance(spec.family, Matern):
        fam = {"family": "matern", "nu": spec.family.nu, "kappa": spec.family.kappa}
    elif isinstance(spec.family, Heat):
        fam = {"family": "heat", "kappa": spec.family.kappa}
    else:
        raise ValueError("custom spectral densities have no JSON form")
    fam["variance"] = spec.variance
    fam["laplacian"] = spec.laplacian.value
    if spec.truncation is not None:
        fam["truncation"] = spec.truncation
    return fam


def spec_from_json(obj: dict, d: int | None = None) -> KernelSpec:
    """Parse a kernel spec. Matérn accepts either "nu" or "nu_base" (needs d)."""
    family_name = obj.get("family")
    kappa = float(obj.get("kappa", 1.0))
    if family_name == "heat":
        family: Family = Heat(kappa=kappa)
    elif family_name == "matern":
        if "nu" in obj:
            nu = float(obj["nu"])
        elif "nu_base" in obj:
            if d is None:
                raise ValueError('"nu_base" requires the space dimension to resolve nu = d/2 + nu_base')
            nu = d / 2 + float(obj["nu_base"])
        else:
            raise ValueError('matern spec needs "nu" or "nu_base"')
        family = Matern(nu=nu, kappa=kappa)
    else:
        raise ValueError(f"unknown kernel family {family_name!r}; expected heat or matern")
    variant = _VARIANT_BY_CODE.get(obj.get("laplacian", "sym"))
    if variant is None:
        raise ValueError(f"unknown laplacian variant {obj.get('laplacian')!r}")
    truncation = obj.get("truncation")
    return KernelSpec(
        family=family,
        variance=float(obj.get("variance", 1.0)),
        laplacian=variant,
        truncation=None if truncation is None else int(truncation),
    )

