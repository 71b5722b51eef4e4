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

"""Radial background solutions of the Euler-Poisson system.

A purely radial flow with density rho(r), velocity u(r) = m0 / (r^2 rho) and
electric field E(r) solves

  rho' = g1(r, rho, E),   E' = g2(r, rho, E) = rho - b(r) - 2 E / r,

or, equivalently, an ODE system for (M^2, r^2 E). The supersonic branch exists
on a finite interval [r_en, r*); this module integrates it, locates r*, and
builds the background potentials (phi_bar, Phi_bar) with Phi_bar offset so
that the pseudo-Bernoulli invariant B - Phi vanishes identically.
"""

import dataclasses
import functools

from absl import logging
from epnozzle import core_model
from epnozzle import errors
import numpy as np
from scipy import integrate
from scipy import interpolate
from scipy import optimize

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclasses.dataclass(frozen=True)
class BackgroundParams:
  """Data of the radial background problem.

  Attributes:
    gas: Gas law.
    m0: Mass flux r^2 rho u.
    S0: Background entropy.
    rho0: Density at the entrance.
    E0: Electric field at the entrance.
    b0: Constant ion background density, used without a table.
    b_table: Optional (r, b) samples of a radially varying ion density.
  """

  gas: core_model.GasLaw
  m0: float
  S0: float  # pylint: disable=invalid-name
  rho0: float
  E0: float  # pylint: disable=invalid-name
  b0: float
  b_table: tuple[tuple[float, float], ...] | None = None

  def __post_init__(self):
    if not self.m0 > 0.0:
      raise errors.ValidationError('m0 must be positive')
    if not self.S0 > 0.0:
      raise errors.ValidationError('S0 must be positive')
    if self.b_table is not None and len(self.b_table) < 4:
      raise errors.ValidationError('b_table needs at least 4 samples')

  @functools.cached_property
  def _b_spline(self) -> interpolate.CubicSpline | None:
    if self.b_table is None:
      return None
    table = np.asarray(self.b_table, dtype=np.float64)
    return interpolate.CubicSpline(table[:, 0], table[:, 1])

  def b_bar(self, r) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if self._b_spline is None:
      return np.full_like(r, self.b0)
    return self._b_spline(r)

  @property
  def kappa0(self) -> float:
    g = self.gas.gamma
    return (self.m0**2 / (g * self.S0)) ** (1.0 / (g + 1.0))

  def sonic_density(self, r) -> np.ndarray:
    """Density at which the flow through radius r is sonic."""
    g = self.gas.gamma
    r = np.asarray(r, dtype=np.float64)
    return (self.m0**2 / (g * r**4 * self.S0)) ** (1.0 / (g + 1.0))

  def entrance_mach_sq(self, r_en: float) -> float:
    g = self.gas.gamma
    return self.m0**2 / (g * self.S0 * r_en**4 * self.rho0 ** (g + 1.0))

  def charge_bound(self, r, r_en: float) -> np.ndarray:
    """Upper bound on b: kappa0 (1 / (r^4 M0^2))^(1 / (gamma + 1))."""
    g = self.gas.gamma
    r = np.asarray(r, dtype=np.float64)
    m0_sq = self.entrance_mach_sq(r_en)
    return self.kappa0 * (1.0 / (r**4 * m0_sq)) ** (1.0 / (g + 1.0))

  def check_admissible(self, r_en: float, r_ex: float) -> None:
    """Raises AdmissibilityError outside the supersonic data window."""
    rho_s = float(self.sonic_density(r_en))
    if not 0.0 < self.rho0 < rho_s:
      raise errors.AdmissibilityError(
          f'rho0={self.rho0} outside the admissibility window '
          f'(0, rho_s={rho_s:.6g})'
      )
    if not self.entrance_mach_sq(r_en) > 1.0:
      raise errors.AdmissibilityError('entrance Mach number must exceed 1')
    r = np.linspace(r_en, r_ex, 33)
    b = self.b_bar(r)
    bound = self.charge_bound(r, r_en)
    if np.any(b <= 0.0) or np.any(b >= bound):
      raise errors.AdmissibilityError(
          f'b must lie in (0, {float(np.min(bound)):.6g}) on the span'
      )


def rhs_rho_E(  # pylint: disable=invalid-name
    r, rho, E, params: BackgroundParams, sonic_tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
  """Right-hand side (g1, g2) of the (rho, E) system."""
  g = params.gas.gamma
  m0 = params.m0
  denominator = r**2 * g * params.S0 * rho ** (g - 1.0) - m0**2 / (
      r**2 * rho**2
  )
  if np.any(np.abs(denominator) < sonic_tol):
    raise errors.SonicSingularityError(
        f'sonic denominator {np.min(np.abs(denominator)):.3e} at r={r}'
    )
  numerator = r**2 * rho * E + 2.0 * m0**2 / (r**3 * rho)
  g1 = numerator / denominator
  g2 = rho - params.b_bar(r) - 2.0 * E / r
  return g1, g2


def rhs_mach_E(  # pylint: disable=invalid-name
    r, M_sq, E, params: BackgroundParams, sonic_tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
  """Right-hand side (h1, h2) of the (M^2, r^2 E) system."""
  g = params.gas.gamma
  if np.any(np.abs(M_sq - 1.0) < max(sonic_tol, 0.0)) or np.any(M_sq == 1.0):
    raise errors.SonicSingularityError(f'M^2 = 1 at r={r}')
  kappa0 = params.kappa0
  bracket = (2.0 / r) * (2.0 + (g - 1.0) * M_sq) + (
      g + 1.0
  ) * kappa0**2 * (r**4 * M_sq) ** ((g - 1.0) / (g + 1.0)) * E / params.m0**2
  h1 = M_sq / (M_sq - 1.0) * bracket
  rho = kappa0 * (1.0 / (r**4 * M_sq)) ** (1.0 / (g + 1.0))
  h2 = r**2 * (rho - params.b_bar(r))
  return h1, h2


@dataclasses.dataclass(frozen=True)
class BackgroundSample:
  """Background quantities and their radial derivatives at given radii."""

  r: np.ndarray
  rho: np.ndarray
  E: np.ndarray  # pylint: disable=invalid-name
  u: np.ndarray
  c_sq: np.ndarray
  phi_bar: np.ndarray
  Phi_bar: np.ndarray  # pylint: disable=invalid-name
  drho: np.ndarray
  dE: np.ndarray  # pylint: disable=invalid-name
  du: np.ndarray
  b_bar: np.ndarray

  @property
  def mach_sq(self) -> np.ndarray:
    return self.u**2 / self.c_sq


@dataclasses.dataclass(frozen=True, eq=False)
class RadialBackground:
  """Sampled supersonic background with Hermite interpolants.

  Attributes:
    params: Background data.
    r: Radial nodes (the accepted integrator steps).
    rho: Density at the nodes.
    E: Electric field at the nodes.
    drho: Density derivative at the nodes.
    dE: Field derivative at the nodes.
    phi_bar: Velocity potential at the nodes.
    Phi_bar: Electric potential at the nodes, offset so B - Phi = 0.
    horizon: First radius where the solution leaves the admissible window, if
      it was reached within the integrated span.
    horizon_reason: Which window bound stopped the integration.
    analytic: Whether the samples solve the ODE system, so that derivatives
      anywhere can be taken from its right-hand side.
  """

  params: BackgroundParams
  r: np.ndarray
  rho: np.ndarray
  E: np.ndarray  # pylint: disable=invalid-name
  drho: np.ndarray
  dE: np.ndarray  # pylint: disable=invalid-name
  phi_bar: np.ndarray | None = None
  Phi_bar: np.ndarray | None = None  # pylint: disable=invalid-name
  horizon: float | None = None
  horizon_reason: str = ''
  analytic: bool = True

  @classmethod
  def from_samples(
      cls,
      params: BackgroundParams,
      r: np.ndarray,
      rho: np.ndarray,
      E: np.ndarray,  # pylint: disable=invalid-name
      drho: np.ndarray | None = None,
      dE: np.ndarray | None = None,  # pylint: disable=invalid-name
      **kwargs,
  ) -> 'RadialBackground':
    """Builds a background from samples, computing the potentials.

    Passing explicit derivatives marks the samples as not solving the ODE
    system; derivatives off the nodes then come from the interpolants.

    Args:
      params: Background data.
      r: Increasing radial nodes.
      rho: Density samples.
      E: Field samples.
      drho: Density derivative; defaults to the ODE right-hand side.
      dE: Field derivative; defaults to the ODE right-hand side.
      **kwargs: Horizon metadata.

    Returns:
      The background with phi_bar and Phi_bar filled in.
    """
    r = np.asarray(r, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    E = np.asarray(E, dtype=np.float64)  # pylint: disable=invalid-name
    analytic = drho is None and dE is None
    rhs = rhs_rho_E(r, rho, E, params, sonic_tol=0.0)
    bg = cls(
        params=params,
        r=r,
        rho=rho,
        E=E,
        drho=rhs[0] if drho is None else np.asarray(drho, dtype=np.float64),
        dE=rhs[1] if dE is None else np.asarray(dE, dtype=np.float64),
        analytic=analytic,
        **kwargs,
    )
    phi_bar, Phi_bar = background_potentials(bg)  # pylint: disable=invalid-name
    return dataclasses.replace(bg, phi_bar=phi_bar, Phi_bar=Phi_bar)

  @property
  def r_en(self) -> float:
    return float(self.r[0])

  @property
  def r_end(self) -> float:
    return float(self.r[-1])

  @property
  def u(self) -> np.ndarray:
    return self.params.m0 / (self.r**2 * self.rho)

  @property
  def c_sq(self) -> np.ndarray:
    p = self.params
    return p.gas.gamma * p.S0 * self.rho ** (p.gas.gamma - 1.0)

  @property
  def mach_sq(self) -> np.ndarray:
    return self.u**2 / self.c_sq

  @property
  def bernoulli(self) -> np.ndarray:
    g = self.params.gas.gamma
    return 0.5 * self.u**2 + self.c_sq / (g - 1.0)

  @functools.cached_property
  def splines(self) -> dict[str, interpolate.PPoly | interpolate.BPoly]:
    """Cubic Hermite interpolants, quintic for the potentials.

    The potentials match value, slope and curvature at the nodes.
    """
    splines = {
        'rho': interpolate.CubicHermiteSpline(self.r, self.rho, self.drho),
        'E': interpolate.CubicHermiteSpline(self.r, self.E, self.dE),
    }
    if self.phi_bar is not None:
      du = -self.u * (self.drho / self.rho + 2.0 / self.r)
      splines['phi_bar'] = interpolate.BPoly.from_derivatives(
          self.r, np.stack([self.phi_bar, self.u, du], axis=1)
      )
      splines['Phi_bar'] = interpolate.BPoly.from_derivatives(
          self.r, np.stack([self.Phi_bar, self.E, self.dE], axis=1)
      )
    return splines

  def interpolate(self, name: str, r) -> np.ndarray:
    """Evaluates the stored interpolant `name` at radii `r`."""
    r = np.asarray(r, dtype=np.float64)
    span = 1e-12 * max(1.0, abs(self.r_end))
    if np.any(r < self.r_en - span) or np.any(r > self.r_end + span):
      raise errors.OutOfDomainError(
          f'radius outside the background span [{self.r_en}, {self.r_end}]'
      )
    if self.r.size == 1:
      return np.full_like(r, float(getattr(self, name)[0]))
    return self.splines[name](np.clip(r, self.r_en, self.r_end))

  def evaluate(self, r) -> BackgroundSample:
    """Samples every background quantity and its derivative at `r`."""
    r = np.asarray(r, dtype=np.float64)
    p = self.params
    rho = self.interpolate('rho', r)
    E = self.interpolate('E', r)  # pylint: disable=invalid-name
    u = p.m0 / (r**2 * rho)
    if self.analytic or self.r.size == 1:
      drho, dE = rhs_rho_E(r, rho, E, p, sonic_tol=0.0)  # pylint: disable=invalid-name
    else:
      drho = self.splines['rho'](r, 1)
      dE = self.splines['E'](r, 1)  # pylint: disable=invalid-name
    return BackgroundSample(
        r=r,
        rho=rho,
        E=E,
        u=u,
        c_sq=p.gas.gamma * p.S0 * rho ** (p.gas.gamma - 1.0),
        phi_bar=self.interpolate('phi_bar', r),
        Phi_bar=self.interpolate('Phi_bar', r),
        drho=drho,
        dE=dE,
        du=-u * (drho / rho + 2.0 / r),
        b_bar=p.b_bar(r),
    )


def _entrance_bernoulli(params: BackgroundParams, r_en: float) -> float:
  g = params.gas.gamma
  u0 = params.m0 / (r_en**2 * params.rho0)
  return 0.5 * u0**2 + g / (g - 1.0) * params.S0 * params.rho0 ** (g - 1.0)


def background_potentials(
    bg: RadialBackground,
) -> tuple[np.ndarray, np.ndarray]:
  """Background velocity and electric potentials at the background nodes.

  phi_bar(r) = m0 / (r_en^2 rho0) + int_{r_en}^r m0 / (t^2 rho(t)) dt and
  Phi_bar(r) = B(r_en) + int_{r_en}^r E(t) dt, integrated with a 4-point
  Gauss rule on each interval between nodes.

  Args:
    bg: Background with density and field samples.

  Returns:
    (phi_bar, Phi_bar) sampled at bg.r.
  """
  p = bg.params
  r_en = bg.r_en
  phi_start = p.m0 / (r_en**2 * float(bg.rho[0]))
  Phi_start = _entrance_bernoulli(  # pylint: disable=invalid-name
      dataclasses.replace(p, rho0=float(bg.rho[0])), r_en
  )
  if bg.r.size == 1:
    return np.array([phi_start]), np.array([Phi_start])
  left, right = bg.r[:-1], bg.r[1:]
  half = 0.5 * (right - left)
  t = 0.5 * (left + right)[:, None] + half[:, None] * _GAUSS_NODES[None, :]
  rho = bg.splines['rho'](t)
  E = bg.splines['E'](t)  # pylint: disable=invalid-name
  d_phi = half * np.sum(_GAUSS_WEIGHTS * p.m0 / (t**2 * rho), axis=1)
  d_Phi = half * np.sum(_GAUSS_WEIGHTS * E, axis=1)  # pylint: disable=invalid-name
  phi_bar = phi_start + np.concatenate([[0.0], np.cumsum(d_phi)])
  Phi_bar = Phi_start + np.concatenate([[0.0], np.cumsum(d_Phi)])  # pylint: disable=invalid-name
  return phi_bar, Phi_bar


def _window_events(params: BackgroundParams, delta: float, sonic_tol: float):
  """Terminal events for the admissible density window and the sonic line."""

  def too_thin(r, y):
    del r
    return y[0] - delta

  def near_sonic(r, y):
    return float(params.sonic_density(r)) - delta - y[0]

  def sonic_denominator(r, y):
    g = params.gas.gamma
    rho = y[0]
    denominator = r**2 * g * params.S0 * rho ** (g - 1.0) - params.m0**2 / (
        r**2 * rho**2
    )
    return abs(denominator) - sonic_tol

  events = [too_thin, near_sonic, sonic_denominator]
  for event in events:
    event.terminal = True
    event.direction = -1
  return events


_EVENT_REASONS = ('density below window', 'density near sonic', 'sonic line')


def _rk4(fun, r0: float, r1: float, y0: np.ndarray, n_steps: int, inside):
  """Classical fixed-step Runge-Kutta; stops where `inside` fails."""
  h = (r1 - r0) / n_steps
  rs, ys = [r0], [np.asarray(y0, dtype=np.float64)]
  y, r = ys[0], r0
  for step in range(n_steps):
    k1 = fun(r, y)
    k2 = fun(r + 0.5 * h, y + 0.5 * h * k1)
    k3 = fun(r + 0.5 * h, y + 0.5 * h * k2)
    k4 = fun(r + h, y + h * k3)
    y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    r = r0 + (step + 1) * h
    reason = inside(r, y)
    if reason:
      return np.array(rs), np.array(ys), (r, reason)
    rs.append(r)
    ys.append(y)
  return np.array(rs), np.array(ys), None


def integrate_background(
    params: BackgroundParams,
    r_span: tuple[float, float],
    stepper: str = 'rk45',
    rtol: float = 1e-12,
    atol: float = 1e-14,
    n_steps: int = 200,
    horizon_margin: float = 1e-3,
    sonic_tol: float = 1e-10,
    require_full_span: bool = True,
    min_nodes: int = 256,
) -> RadialBackground:
  """Integrates the supersonic background from r_en outward.

  Args:
    params: Background data; must satisfy the admissibility window.
    r_span: (r_en, r_end).
    stepper: 'rk45' (adaptive Dormand-Prince with event location) or 'rk4'
      (classical fixed step, used for self-convergence checks).
    rtol: Relative tolerance of the adaptive stepper.
    atol: Absolute tolerance of the adaptive stepper.
    n_steps: Number of steps of the fixed-step path.
    horizon_margin: Width of the density window margin relative to the sonic
      density at the entrance.
    sonic_tol: Threshold on the sonic denominator.
    require_full_span: Raise if the horizon lies before r_end; otherwise the
      truncated background is returned with its horizon set.
    min_nodes: Lower bound on the number of adaptive steps over the span.

  Returns:
    The background on the accepted span.

  Raises:
    AdmissibilityError: If the data are outside the admissibility window.
    HorizonBeforeExitError: If the solution stops before r_end.
  """
  r_en, r_end = (float(r_span[0]), float(r_span[1]))
  params.check_admissible(r_en, max(r_end, r_en))
  y0 = np.array([params.rho0, params.E0])
  if r_end == r_en:
    return RadialBackground.from_samples(
        params, np.array([r_en]), y0[:1], y0[1:]
    )
  delta = horizon_margin * float(params.sonic_density(r_en))

  def fun(r, y):
    return np.array(rhs_rho_E(r, y[0], y[1], params, sonic_tol=0.0))

  horizon, reason = None, ''
  if stepper == 'rk45':
    events = _window_events(params, delta, sonic_tol)
    solution = integrate.solve_ivp(
        fun,
        (r_en, r_end),
        y0,
        method='RK45',
        rtol=rtol,
        atol=atol,
        max_step=(r_end - r_en) / min_nodes,
        events=events,
    )
    if solution.status == -1:
      raise errors.SonicSingularityError(solution.message)
    r, y = solution.t, solution.y.T
    for i, hits in enumerate(solution.t_events):
      if hits.size:
        horizon, reason = float(hits[0]), _EVENT_REASONS[i]
        break
  elif stepper == 'rk4':

    def inside(r, y):
      if y[0] < delta:
        return _EVENT_REASONS[0]
      if y[0] > float(params.sonic_density(r)) - delta:
        return _EVENT_REASONS[1]
      return ''

    r, y, stop = _rk4(fun, r_en, r_end, y0, n_steps, inside)
    if stop is not None:
      horizon, reason = stop
  else:
    raise ValueError(f'unknown stepper {stepper!r}')

  if horizon is not None:
    logging.info('Background horizon at r*=%.10g (%s).', horizon, reason)
    if require_full_span:
      raise errors.HorizonBeforeExitError(
          f'background leaves the supersonic window at r*={horizon:.10g} '
          f'({reason}) before r_ex={r_end}',
          horizon=horizon,
      )
  bg = RadialBackground.from_samples(
      params, r, y[:, 0], y[:, 1], horizon=horizon, horizon_reason=reason
  )
  if np.any(bg.mach_sq <= 1.0):
    raise errors.HorizonBeforeExitError(
        'background is not supersonic on its span', horizon=bg.r_end
    )
  logging.info(
      'Background on [%g, %g]: %d nodes, Mach in [%.4f, %.4f].',
      r_en,
      bg.r_end,
      bg.r.size,
      float(np.sqrt(np.min(bg.mach_sq))),
      float(np.sqrt(np.max(bg.mach_sq))),
  )
  return bg


def find_horizon(
    params: BackgroundParams,
    r_en: float,
    r_probe: float,
    xtol: float = 1e-10,
    **kwargs,
) -> float | None:
  """Returns r* if the background stops existing before r_probe.

  The integrator's event location is refined with Brent's method on the
  event function, with the state at trial radii integrated afresh from the
  last accepted node.

  Args:
    params: Background data.
    r_en: Entrance radius.
    r_probe: Radius the background must reach.
    xtol: Absolute tolerance on r*.
    **kwargs: Passed to `integrate_background`.

  Returns:
    The horizon r*, or None if the background reaches r_probe.
  """
  bg = integrate_background(
      params, (r_en, r_probe), require_full_span=False, **kwargs
  )
  if bg.horizon is None:
    return None
  delta = kwargs.get('horizon_margin', 1e-3) * float(
      params.sonic_density(r_en)
  )
  event = _window_events(params, delta, kwargs.get('sonic_tol', 1e-10))[
      _EVENT_REASONS.index(bg.horizon_reason)
  ]
  last = bg.r.size - 1
  while last > 0 and bg.r[last] >= bg.horizon:
    last -= 1
  r_lo = float(bg.r[last])
  y_lo = np.array([bg.rho[last], bg.E[last]])

  def fun(r, y):
    return np.array(rhs_rho_E(r, y[0], y[1], params, sonic_tol=0.0))

  def level(r):
    if r == r_lo:
      return event(r, y_lo)
    solution = integrate.solve_ivp(
        fun, (r_lo, r), y_lo, method='RK45', rtol=1e-13, atol=1e-15
    )
    if not solution.success:
      return -np.inf
    return event(r, solution.y[:, -1])

  r_hi = bg.horizon
  for _ in range(8):
    if level(r_hi) <= 0.0 or r_hi >= r_probe:
      break
    r_hi = min(r_hi + 4.0 * xtol, r_probe)
  if level(r_lo) <= 0.0 or level(r_hi) > 0.0:
    logging.warning(
        'Could not bracket the horizon near r*=%.10g; keeping the event '
        'location.', bg.horizon,
    )
    return bg.horizon
  return float(optimize.brentq(level, r_lo, r_hi, xtol=xtol))


def crossform_check(
    bg: RadialBackground, rtol: float = 1e-12, atol: float = 1e-14
) -> float:
  """Largest gap between M^2 from the (rho, E) and (M^2, r^2 E) systems.

  Args:
    bg: Background integrated in (rho, E) variables.
    rtol: Relative tolerance for the (M^2, r^2 E) integration.
    atol: Absolute tolerance for the (M^2, r^2 E) integration.

  Returns:
    max over the background nodes of |M^2(rho) - M^2(direct)|.
  """
  if bg.r.size == 1:
    return 0.0
  p = bg.params
  r_en = bg.r_en

  def fun(r, y):
    return np.array(rhs_mach_E(r, y[0], y[1] / r**2, p, sonic_tol=0.0))

  y0 = np.array([float(bg.mach_sq[0]), r_en**2 * float(bg.E[0])])
  solution = integrate.solve_ivp(
      fun, (r_en, bg.r_end), y0, method='RK45', rtol=rtol, atol=atol,
      t_eval=bg.r,
  )
  if not solution.success:
    raise errors.SonicSingularityError(solution.message)
  return float(np.max(np.abs(solution.y[0] - bg.mach_sq)))
