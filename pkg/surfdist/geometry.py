"""
Induced Riemannian data of a surface and of the product of two surfaces.

Index conventions (n = parameter dimension of one surface):

    metric[a, b]                = g_ab = m (∂_a x · ∂_b x)
    partials[c, a, b]           = ∂_c g_ab
    christoffel_first[b, a, c]  = Γ_{b,ac} = ½(∂_b g_ac + ∂_c g_ab − ∂_a g_bc)
                                = m (∂_a x · ∂²_bc x)
    christoffel_second[a, b, c] = Γ^a_bc = g^ad Γ_{b,dc}

The first storage index of christoffel_first is the pre-comma index.
"""

from typing import NamedTuple, Optional

import numpy as np

from .errors import SingularMetric
from .manifold import SurfaceDefinition, SurfaceJet


class MetricBundle(NamedTuple):
    """Metric data of one surface at one point."""

    metric: np.ndarray
    inverse: np.ndarray
    partials: np.ndarray
    christoffel_first: np.ndarray
    christoffel_second: np.ndarray

    @property
    def dim(self) -> int:
        return self.metric.shape[0]


class ProductMetric(NamedTuple):
    """Block-diagonal metric of the product manifold; cross blocks are never stored."""

    block1: MetricBundle
    block2: MetricBundle

    @property
    def dims(self):
        return self.block1.dim, self.block2.dim

    def lower(self, v: np.ndarray) -> np.ndarray:
        """g_ij v^j, blockwise."""
        n = self.block1.dim
        return np.concatenate([self.block1.metric @ v[:n], self.block2.metric @ v[n:]])

    def raise_index(self, w: np.ndarray) -> np.ndarray:
        """g^ij w_j, blockwise."""
        n = self.block1.dim
        return np.concatenate([self.block1.inverse @ w[:n], self.block2.inverse @ w[n:]])

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """<u, v>_g for two contravariant vectors."""
        return float(u @ self.lower(v))


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def induced_metric(jet: SurfaceJet, mass: float) -> np.ndarray:
    """First fundamental form scaled by the point mass: g_ab = m Σ_I ∂_a x^I ∂_b x^I."""
    J = jet.jacobian
    return _symmetrize(mass * (J.T @ J))


def invert_metric(metric: np.ndarray) -> np.ndarray:
    """
    Contravariant metric g^ab by Cholesky factorization.

    Raises:
        SingularMetric: the factorization met a non-positive pivot, which
            happens at parameterization singularities.
    """
    try:
        L = np.linalg.cholesky(metric)
    except np.linalg.LinAlgError:
        raise SingularMetric(f"metric {metric.tolist()} is not positive definite") from None
    L_inv = np.linalg.inv(L)
    return _symmetrize(L_inv.T @ L_inv)


def jet_metric_partials(jet: SurfaceJet, mass: float) -> np.ndarray:
    """∂_c g_ab = m (∂²_ca x · ∂_b x + ∂_a x · ∂²_cb x), from the jet alone."""
    J, S = jet.jacobian, jet.second
    term = np.einsum("Ica,Ib->cab", S, J)
    return mass * (term + term.transpose(0, 2, 1))


def metric_partials(surface: SurfaceDefinition, params, mass: float) -> np.ndarray:
    """Metric partials at ``params``; no differencing of the metric itself."""
    return jet_metric_partials(surface.jet(params), mass)


def christoffel_first(partials: np.ndarray) -> np.ndarray:
    """Γ_{b,ac} = ½(∂_b g_ac + ∂_c g_ab − ∂_a g_bc), stored as [b, a, c]."""
    # partials[b, a, c] + partials[c, a, b] - partials[a, b, c]
    return 0.5 * (partials + partials.transpose(2, 1, 0) - partials.transpose(1, 0, 2))


def christoffel_second(first: np.ndarray, inverse: np.ndarray) -> np.ndarray:
    """Γ^a_bc = g^ad Γ_{b,dc}, symmetric in (b, c)."""
    second = np.einsum("ad,bdc->abc", inverse, first)
    return 0.5 * (second + second.transpose(0, 2, 1))


def geodesic_coefficients(jet: SurfaceJet, mass: float) -> np.ndarray:
    """m (∂_a x · ∂²_bc x) laid out like christoffel_first, i.e. [b, a, c]."""
    return mass * np.einsum("Ia,Ibc->bac", jet.jacobian, jet.second)


def metric_bundle(
    surface: SurfaceDefinition,
    params,
    mass: float,
    jet: Optional[SurfaceJet] = None,
) -> MetricBundle:
    """Assemble metric, inverse, partials and both Christoffel kinds at one point."""
    if jet is None:
        jet = surface.jet(params)
    metric = induced_metric(jet, mass)
    inverse = invert_metric(metric)
    partials = jet_metric_partials(jet, mass)
    first = christoffel_first(partials)
    return MetricBundle(metric, inverse, partials, first, christoffel_second(first, inverse))


def product_bundle(
    surface1: SurfaceDefinition,
    params1,
    mass1: float,
    surface2: SurfaceDefinition,
    params2,
    mass2: float,
    jets=(None, None),
) -> ProductMetric:
    """
    Metric data of the product manifold as two independent blocks.

    Raises:
        SingularMetric: tagged with ``surface`` 1 or 2.
    """
    blocks = []
    for tag, (surface, params, mass, jet) in enumerate(
        ((surface1, params1, mass1, jets[0]), (surface2, params2, mass2, jets[1])), start=1
    ):
        try:
            blocks.append(metric_bundle(surface, params, mass, jet))
        except SingularMetric as exc:
            raise exc.tagged(surface=tag) from None
    return ProductMetric(*blocks)
