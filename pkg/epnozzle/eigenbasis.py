# coding=utf-8
# Copyright 2026 The epnozzle Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Neumann eigenbasis of the polar Laplace-Beltrami operator on (0, phi0).

The eigenproblem -(sin(phi) xi')' = omega sin(phi) xi with xi'(0) = xi'(phi0)
= 0 becomes the Legendre form -((1 - s^2) xi_s)_s = omega xi after the change
of variable s = cos(phi), on s in [cos(phi0), 1] with uniform weight. We solve
it by a Ritz-Galerkin method in Legendre polynomials of the rescaled variable,
where both Neumann conditions are natural, and integrate with a Gauss rule
that is exact for every bilinear form involved. For phi0 = pi the eigenpairs
are exactly omega_k = k(k+1), xi_k ~ P_k(cos(phi)).
"""

import dataclasses
from typing import Callable

from absl import logging
from epnozzle import errors
import numpy as np
from numpy.polynomial import legendre
import scipy.linalg

_DOMAIN_SLACK = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class EigenBasis:
  """Orthonormal Neumann eigenfunctions in L^2((0, phi0); sin(phi) dphi).

  Attributes:
    phi0: Wedge half-opening angle.
    omegas: Eigenvalues omega_0 = 0 < omega_1 < ... < omega_m.
    coeffs: Legendre coefficients of each eigenfunction in the rescaled
      variable x in [-1, 1], shape (n_poly, m + 1).
    nodes: Gauss nodes in phi, increasing.
    weights: Quadrature weights such that sum(w f) ~ int f sin(phi) dphi.
    xis: Eigenfunctions at the nodes, shape (m + 1, n_nodes).
    dxis: Their phi-derivatives at the nodes.
    dxis_s: Their s-derivatives at the nodes.
  """

  phi0: float
  omegas: np.ndarray
  coeffs: np.ndarray
  nodes: np.ndarray
  weights: np.ndarray
  xis: np.ndarray
  dxis: np.ndarray
  dxis_s: np.ndarray

  @property
  def num_modes(self) -> int:
    return self.omegas.size

  @property
  def s_lo(self) -> float:
    return float(np.cos(self.phi0))

  def _to_x(self, phi: np.ndarray) -> np.ndarray:
    return 2.0 * (np.cos(phi) - self.s_lo) / (1.0 - self.s_lo) - 1.0

  def values(self, phi) -> np.ndarray:
    """xi_k(phi) for every mode, shape (m + 1, len(phi))."""
    phi = _check_domain(phi, self.phi0)
    return legendre.legval(self._to_x(phi), self.coeffs).reshape(
        self.num_modes, -1
    )

  def s_derivatives(self, phi) -> np.ndarray:
    """d xi_k / ds at phi, shape (m + 1, len(phi))."""
    phi = _check_domain(phi, self.phi0)
    scale = 2.0 / (1.0 - self.s_lo)
    dcoeffs = legendre.legder(self.coeffs, axis=0)
    return scale * legendre.legval(self._to_x(phi), dcoeffs).reshape(
        self.num_modes, -1
    )

  def derivatives(self, phi) -> np.ndarray:
    """d xi_k / dphi = -sin(phi) d xi_k / ds."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    return -np.sin(phi) * self.s_derivatives(phi)


def _check_domain(phi, phi0: float) -> np.ndarray:
  phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
  if np.any(phi < -_DOMAIN_SLACK) or np.any(phi > phi0 + _DOMAIN_SLACK):
    raise errors.OutOfDomainError(f'phi outside [0, {phi0}]')
  return np.clip(phi, 0.0, phi0)


def _solve(phi0: float, m_modes: int, n_nodes: int):
  """Ritz-Galerkin eigenpairs with a basis of n_nodes // 2 polynomials."""
  n_poly = max(n_nodes // 2, m_modes + 2)
  s_lo = np.cos(phi0)
  half = 0.5 * (1.0 - s_lo)
  x, w = legendre.leggauss(n_nodes)
  s = s_lo + half * (x + 1.0)
  w = half * w
  vander = legendre.legvander(x, n_poly - 1)
  dvander = legendre.legvander(x, n_poly - 2) @ legendre.legder(
      np.eye(n_poly), axis=0
  ) / half
  mass = vander.T @ (w[:, None] * vander)
  stiffness = dvander.T @ ((w * (1.0 - s**2))[:, None] * dvander)
  omegas, vectors = scipy.linalg.eigh(
      stiffness, mass, subset_by_index=[0, m_modes]
  )
  # Fix signs so that xi_k > 0 on the axis (x = 1, where P_n(1) = 1).
  signs = np.sign(np.sum(vectors, axis=0))
  signs[signs == 0.0] = 1.0
  vectors = vectors * signs
  if abs(omegas[0]) < 1e-9 * max(1.0, abs(omegas[-1])):
    omegas[0] = 0.0
  return omegas, vectors, x, s, w


def build_basis(
    phi0: float, m_modes: int, n_nodes: int, check_resolution: bool = True
) -> EigenBasis:
  """Builds the first m_modes + 1 Neumann eigenpairs.

  Args:
    phi0: Half-opening angle in (0, pi].
    m_modes: Index of the highest mode; at least 1.
    n_nodes: Gauss nodes in s; at least 4 m_modes.
    check_resolution: Compare the top eigenvalue against a solve with twice
      the nodes.

  Returns:
    The eigenbasis with quadrature data.

  Raises:
    ResolutionError: If the top eigenvalue moves by more than 1e-8 relative
      under node doubling.
  """
  if not 0.0 < phi0 <= np.pi:
    raise errors.ValidationError(f'phi0 must lie in (0, pi], got {phi0}')
  if m_modes < 1:
    raise errors.ValidationError('m_modes must be at least 1')
  if n_nodes < 4 * m_modes:
    raise errors.ValidationError(
        f'n_nodes={n_nodes} must be at least 4 m_modes={4 * m_modes}'
    )
  omegas, vectors, x, s, w = _solve(phi0, m_modes, n_nodes)
  if check_resolution:
    finer = _solve(phi0, m_modes, 2 * n_nodes)[0]
    change = abs(finer[-1] - omegas[-1]) / max(abs(finer[-1]), 1e-300)
    if change > 1e-8:
      raise errors.ResolutionError(
          f'top eigenvalue changes by {change:.2e} under node doubling'
      )
  gaps = np.diff(omegas)
  if np.any(gaps < 1e-10):
    logging.warning(
        'Eigenvalues are not well separated: min gap %.3e', gaps.min()
    )

  # Store nodes by increasing phi, i.e. decreasing s.
  order = np.argsort(-s)
  nodes = np.arccos(np.clip(s[order], -1.0, 1.0))
  basis = EigenBasis(
      phi0=float(phi0),
      omegas=omegas,
      coeffs=vectors,
      nodes=nodes,
      weights=w[order],
      xis=np.empty(0),
      dxis=np.empty(0),
      dxis_s=np.empty(0),
  )
  basis = dataclasses.replace(
      basis,
      xis=basis.values(nodes),
      dxis=basis.derivatives(nodes),
      dxis_s=basis.s_derivatives(nodes),
  )
  logging.info(
      'Eigenbasis phi0=%.6g: %d modes, omega_max=%.6g, %d nodes.',
      phi0,
      m_modes + 1,
      omegas[-1],
      n_nodes,
  )
  return basis


def project(
    f: Callable[[np.ndarray], np.ndarray] | np.ndarray, basis: EigenBasis
) -> np.ndarray:
  """Weighted inner products <f, xi_k> for every mode.

  Args:
    f: A callable of phi, or samples at basis.nodes. Trailing axes other than
      the last are projected independently.
    basis: The eigenbasis.

  Returns:
    Coefficients with the node axis replaced by the mode axis.
  """
  values = f(basis.nodes) if callable(f) else np.asarray(f, dtype=np.float64)
  return np.tensordot(values * basis.weights, basis.xis, axes=([-1], [1]))


def evaluate(coeffs, basis: EigenBasis, phi) -> np.ndarray:
  """Sums coeffs_k xi_k(phi); trailing coefficients may be omitted."""
  coeffs = np.asarray(coeffs, dtype=np.float64)
  if coeffs.shape[-1] > basis.num_modes:
    raise errors.ValidationError(
        f'{coeffs.shape[-1]} coefficients for {basis.num_modes} modes'
    )
  values = basis.values(phi)[: coeffs.shape[-1]]
  return coeffs @ values


def check_derivative_basis(basis: EigenBasis) -> float:
  """Orthonormality defect of {xi_k' / sqrt(omega_k)}, k >= 1.

  The integral of xi_j' xi_k' sin(phi) dphi equals that of
  (1 - s^2) xi_j,s xi_k,s ds, which is polynomial and integrated exactly.
  """
  s = np.cos(basis.nodes)
  weights = basis.weights * (1.0 - s**2)
  dxi = basis.dxis_s[1:] / np.sqrt(basis.omegas[1:, None])
  gram = (dxi * weights) @ dxi.T
  return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def gram_defect(basis: EigenBasis) -> float:
  """Largest deviation of the weighted Gram matrix from the identity."""
  gram = (basis.xis * basis.weights) @ basis.xis.T
  return float(np.max(np.abs(gram - np.eye(basis.num_modes))))
