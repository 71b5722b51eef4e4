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

"""Nested Picard iterations for the perturbed nozzle flow.

The potentials (chi, Psi) are iterated innermost with frozen (psi, S, V), the
swirl stream function psi in the middle and the transported (S, V)
outermost. One damping factor is shared by all loops: it starts at `relax`
and drops to `relax_fallback` the first time any increment grows.
"""

import concurrent.futures
import dataclasses
import enum
import json
from typing import Any, Sequence

from absl import logging
from epnozzle import case_lib
from epnozzle import core_model
from epnozzle import eigenbasis
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import linear_subsystem
from epnozzle import radial_background
from epnozzle import verify_report
from epnozzle import vorticity_transport
import epnozzle
from ml_collections import config_dict
import numpy as np
import tqdm

Parity = grid_utils.Parity


class Status(enum.Enum):
  CONVERGED = 'Converged'
  DIVERGED = 'Diverged'
  SONIC_APPROACH = 'SonicApproach'
  CAVITATION = 'Cavitation'
  BACKFLOW = 'Backflow'
  HORIZON_BEFORE_EXIT = 'HorizonBeforeExit'


# First match wins.
_STATUS_OF_ERROR = (
    (errors.SonicApproachError, Status.SONIC_APPROACH),
    (errors.SonicSingularityError, Status.SONIC_APPROACH),
    (errors.CavitationError, Status.CAVITATION),
    (errors.BackflowError, Status.BACKFLOW),
    (errors.HorizonBeforeExitError, Status.HORIZON_BEFORE_EXIT),
    (errors.NonConvergenceError, Status.DIVERGED),
    (errors.SingularSystemError, Status.DIVERGED),
    (errors.ResolutionError, Status.DIVERGED),
)


@dataclasses.dataclass(frozen=True)
class IterationConfig:
  """Tolerances, iteration caps, damping and budgets of the three loops."""

  tol_p: float = 1e-8
  tol_v: float = 1e-8
  tol_t: float = 1e-8
  atol: float = 1e-12
  max_iters_p: int = 40
  max_iters_v: int = 20
  max_iters_t: int = 20
  relax: float = 1.0
  relax_fallback: float = 0.5
  budget_p: float = 10.0
  budget_v: float = 10.0
  budget_t: float = 10.0

  def __post_init__(self):
    for name in ('tol_p', 'tol_v', 'tol_t'):
      if not getattr(self, name) > 0.0:
        raise errors.ValidationError(f'{name} must be positive')
    for name in ('relax', 'relax_fallback'):
      if not 0.0 < getattr(self, name) <= 1.0:
        raise errors.ValidationError(f'{name} must lie in (0, 1]')
    for name in ('max_iters_p', 'max_iters_v', 'max_iters_t'):
      if getattr(self, name) < 1:
        raise errors.ValidationError(f'{name} must be at least 1')

  @classmethod
  def from_config(cls, config: config_dict.ConfigDict) -> 'IterationConfig':
    names = [f.name for f in dataclasses.fields(cls)]
    return cls(**{name: config[name] for name in names if name in config})


@dataclasses.dataclass
class Damping:
  """Relaxation factor shared by the loops of one solve."""

  relax: float = 1.0
  fallback: float = 0.5
  reduced: bool = False

  def blend(self, old: np.ndarray, new: np.ndarray) -> np.ndarray:
    if self.relax == 1.0:
      return new
    return old + self.relax * (new - old)

  def observe(self, history: Sequence[float], loop: str) -> None:
    if self.reduced or len(history) < 2 or history[-1] <= history[-2]:
      return
    self.reduced = True
    if self.fallback < self.relax:
      logging.warning(
          'Increment of the %s loop grew (%.3e > %.3e); relax %.3g -> %.3g.',
          loop,
          history[-1],
          history[-2],
          self.relax,
          self.fallback,
      )
      self.relax = self.fallback


@dataclasses.dataclass
class SolveReport:
  """Outcome of a solve.

  Attributes:
    status: Exit status.
    message: Error message for a failed solve.
    node: Offending (r, phi) of a guard failure.
    iterations: Iteration counts of the potentials (p), stream function (v)
      and transport (t) loops.
    history: Increments of each loop, in order.
    monitors: Per outer iteration, H^k_* sizes of the iterates and their
      fractions of the budgets.
    residuals: ResidualReport entries of the final fields.
    conservation: Conservation diagnostics of the final fields.
    relax: Final damping factor.
    case_hash: Hash of the case text.
    grid: (n_r, n_phi).
    version: Package version.
  """

  status: Status = Status.DIVERGED
  message: str = ''
  node: tuple[float, float] | None = None
  iterations: dict[str, int] = dataclasses.field(
      default_factory=lambda: {'p': 0, 'v': 0, 't': 0}
  )
  history: dict[str, list[float]] = dataclasses.field(
      default_factory=lambda: {'p': [], 'v': [], 't': []}
  )
  monitors: list[dict[str, float]] = dataclasses.field(default_factory=list)
  residuals: dict[str, Any] = dataclasses.field(default_factory=dict)
  conservation: dict[str, Any] = dataclasses.field(default_factory=dict)
  relax: float = 1.0
  case_hash: str = ''
  grid: tuple[int, int] = (0, 0)
  version: str = epnozzle.__version__

  @property
  def converged(self) -> bool:
    return self.status == Status.CONVERGED

  def to_dict(self) -> dict[str, Any]:
    out = dataclasses.asdict(self)
    out['status'] = self.status.value
    out['node'] = None if self.node is None else list(self.node)
    out['grid'] = list(self.grid)
    return out

  def to_json(self) -> str:
    return json.dumps(self.to_dict(), sort_keys=True, indent=2)

  @classmethod
  def from_dict(cls, data: dict[str, Any]) -> 'SolveReport':
    data = dict(data)
    data['status'] = Status(data['status'])
    if data.get('node') is not None:
      data['node'] = tuple(data['node'])
    data['grid'] = tuple(data.get('grid', (0, 0)))
    names = {f.name for f in dataclasses.fields(cls)}
    return cls(**{k: v for k, v in data.items() if k in names})


@dataclasses.dataclass(frozen=True, eq=False)
class SolverContext:
  """Everything fixed during one solve."""

  case: case_lib.NozzleCase
  config: config_dict.ConfigDict
  iteration: IterationConfig
  grid: grid_utils.Grid
  background: radial_background.RadialBackground
  sample: radial_background.BackgroundSample
  radial: linear_subsystem.RadialCoefficients
  basis: eigenbasis.EigenBasis
  doping: np.ndarray
  lifting: linear_subsystem.Lifting
  entrance_u: np.ndarray

  @property
  def gas(self) -> core_model.GasLaw:
    return self.case.gas


def make_grid(
    case: case_lib.NozzleCase, config: config_dict.ConfigDict
) -> grid_utils.Grid:
  g = case.geometry
  return grid_utils.Grid.uniform(
      g.r_en, g.r_ex, g.phi0, config.grid.n_r, config.grid.n_phi
  )


def prepare(
    case: case_lib.NozzleCase, config: config_dict.ConfigDict
) -> SolverContext:
  """Integrates the background and builds the basis and liftings."""
  grid = make_grid(case, config)
  g = case.geometry
  background = radial_background.integrate_background(
      case.background,
      (g.r_en, g.r_ex),
      rtol=config.ode_rtol,
      atol=config.ode_atol,
      horizon_margin=config.horizon_margin,
  )
  sample = background.evaluate(grid.r)
  basis = eigenbasis.build_basis(g.phi0, config.modes - 1, config.quad_nodes)
  boundary = case.boundary_data()
  return SolverContext(
      case=case,
      config=config,
      iteration=IterationConfig.from_config(config),
      grid=grid,
      background=background,
      sample=sample,
      radial=linear_subsystem.radial_coefficients(
          case.gas, case.background.S0, sample
      ),
      basis=basis,
      doping=case.doping_field(grid),
      lifting=linear_subsystem.lift_boundary(
          grid, boundary, config.compat_tol
      ),
      entrance_u=np.asarray(boundary.u_en(grid.phi), dtype=np.float64),
  )


def _monitor_order(grid: grid_utils.Grid, k: int) -> int:
  """Coarse grids monitor with k = 2 instead of the nominal order."""
  return k if min(grid.shape) >= 32 else 2


def _sizes(
    ctx: SolverContext, state: core_model.FlowFields
) -> dict[str, float]:
  grid = ctx.grid
  s0 = ctx.case.background.S0
  k_p, k_v = _monitor_order(grid, 4), _monitor_order(grid, 3)
  k_t = _monitor_order(grid, 4)
  size_p = verify_report.hk_star_norm(
      state.chi, grid, k_p
  ) + verify_report.hk_star_norm(state.Psi, grid, k_p)
  size_v = verify_report.hk_star_norm(state.psi, grid, k_v, Parity.ODD)
  size_t = verify_report.hk_star_norm(
      state.S - s0, grid, k_t
  ) + verify_report.hk_star_norm(state.v_swirl, grid, k_t, Parity.ODD)
  it = ctx.iteration
  return {
      'size_p': size_p,
      'size_v': size_v,
      'size_t': size_t,
      'budget_fraction_p': size_p / it.budget_p,
      'budget_fraction_v': size_v / it.budget_v,
      'budget_fraction_t': size_t / it.budget_t,
  }


def _check_budget(size: float, budget: float, loop: str, history) -> None:
  if size > budget:
    raise errors.NonConvergenceError(
        f'{loop} iterate size {size:.3e} exceeds its budget {budget:.3e}',
        history=list(history),
    )


def _converged(delta: float, size: float, tol: float, atol: float) -> bool:
  return delta <= tol * size + atol


def decreasing_tail(history: Sequence[float], atol: float = 0.0) -> bool:
  """Whether the last three increments decrease.

  An increment at or below `atol` counts as a decrease; shorter histories
  pass.
  """
  tail = list(history[-3:])
  return all(b < a or b <= atol for a, b in zip(tail, tail[1:]))


def _accept(
    history: Sequence[float], size: float, tol: float, atol: float, loop: str
) -> bool:
  """Convergence test on the last increment plus the monotone tail."""
  if not _converged(history[-1], size, tol, atol):
    return False
  if decreasing_tail(history, atol):
    return True
  logging.warning(
      'The %s loop met its tolerance with non-decreasing increments %s; '
      'iterating on.',
      loop,
      ', '.join(f'{d:.3e}' for d in history[-3:]),
  )
  return False


def picard_potentials(
    ctx: SolverContext,
    state: core_model.FlowFields,
    damping: Damping,
    report: SolveReport | None = None,
) -> core_model.FlowFields:
  """Iterates the linearized potential map with frozen (psi, S, V).

  Args:
    ctx: Solver context.
    state: Current iterate; its (chi, Psi) start the iteration.
    damping: Shared damping.
    report: If given, receives increments and iteration counts.

  Returns:
    The state with converged (chi, Psi).

  Raises:
    NonConvergenceError: After max_iters_p iterations or when the iterate
      exceeds budget_p.
  """
  grid, it = ctx.grid, ctx.iteration
  curl_r, _ = core_model.curl_theta(state.psi, grid)
  entrance = ctx.entrance_u - curl_r[0]
  history = []
  for iteration in range(1, it.max_iters_p + 1):
    coeffs = linear_subsystem.assemble_coefficients(
        state,
        ctx.sample,
        ctx.radial,
        ctx.gas,
        ctx.doping,
        sonic_margin=ctx.config.sonic_margin,
    )
    chi, Psi = linear_subsystem.linear_step(  # pylint: disable=invalid-name
        coeffs,
        ctx.basis,
        ctx.lifting,
        entrance,
        check_resolution=ctx.config.check_resolution,
    )
    delta = grid_utils.h1_norm(chi - state.chi, grid) + grid_utils.h1_norm(
        Psi - state.Psi, grid
    )
    size = grid_utils.h1_norm(chi, grid) + grid_utils.h1_norm(Psi, grid)
    state = state.replace(
        chi=damping.blend(state.chi, chi), Psi=damping.blend(state.Psi, Psi)
    )
    history.append(delta)
    if report is not None:
      report.history['p'].append(delta)
      report.iterations['p'] += 1
    logging.debug(
        'potentials %d: increment %.3e size %.3e', iteration, delta, size
    )
    damping.observe(history, 'potentials')
    _check_budget(size, it.budget_p, 'potential', history)
    if _accept(history, size, it.tol_p, it.atol, 'potentials'):
      return state
  raise errors.NonConvergenceError(
      f'potentials did not converge in {it.max_iters_p} iterations',
      history=history,
  )


def update_vorticity(
    ctx: SolverContext, state: core_model.FlowFields, damping: Damping
) -> np.ndarray:
  """One application of the psi map, blended with the previous psi."""
  source = vorticity_transport.swirl_source_field(ctx.gas, state, ctx.sample)
  psi = vorticity_transport.solve_psi(source, ctx.grid)
  return damping.blend(state.psi, psi)


def update_transport(
    ctx: SolverContext, state: core_model.FlowFields
) -> tuple[np.ndarray, np.ndarray]:
  """Transports entrance (S, Lambda) along the current streamlines."""
  velocity = vorticity_transport.composed_velocity(state, ctx.sample)
  feet = vorticity_transport.trace_streamline(
      velocity, ctx.grid, rtol=1e-10, atol=1e-12
  )
  return vorticity_transport.transport_scalars(
      feet,
      ctx.case.entrance_entropy(),
      ctx.case.entrance_swirl(),
      ctx.grid,
      compat_tol=ctx.config.compat_tol,
  )


def _iterate(
    ctx: SolverContext,
    state: core_model.FlowFields,
    damping: Damping,
    report: SolveReport,
) -> core_model.FlowFields:
  """Runs the nested loops until the transport loop converges."""
  grid, it = ctx.grid, ctx.iteration
  s0 = ctx.case.background.S0
  for outer in range(1, it.max_iters_t + 1):
    middle_converged = False
    middle = []
    for _ in range(it.max_iters_v):
      state = picard_potentials(ctx, state, damping, report)
      psi = update_vorticity(ctx, state, damping)
      delta = grid_utils.h1_norm(psi - state.psi, grid, Parity.ODD)
      size = grid_utils.h1_norm(psi, grid, Parity.ODD)
      state = state.replace(psi=psi)
      middle.append(delta)
      report.history['v'].append(delta)
      report.iterations['v'] += 1
      damping.observe(middle, 'stream function')
      _check_budget(size, it.budget_v, 'stream function', middle)
      if _accept(middle, size, it.tol_v, it.atol, 'stream function'):
        middle_converged = True
        break
    if not middle_converged:
      raise errors.NonConvergenceError(
          f'stream function did not converge in {it.max_iters_v} iterations',
          history=middle,
      )

    S, v_swirl = update_transport(ctx, state)  # pylint: disable=invalid-name
    S = damping.blend(state.S, S)  # pylint: disable=invalid-name
    v_swirl = damping.blend(state.v_swirl, v_swirl)
    delta = grid_utils.h1_norm(S - state.S, grid) + grid_utils.h1_norm(
        v_swirl - state.v_swirl, grid, Parity.ODD
    )
    size = grid_utils.h1_norm(S - s0, grid) + grid_utils.h1_norm(
        v_swirl, grid, Parity.ODD
    )
    state = state.replace(S=S, v_swirl=v_swirl)
    report.history['t'].append(delta)
    report.iterations['t'] += 1
    damping.observe(report.history['t'], 'transport')
    monitors = _sizes(ctx, state)
    monitors['outer'] = outer
    report.monitors.append(monitors)
    logging.info(
        'Outer iteration %d: transport increment %.3e, sizes p=%.3e v=%.3e '
        't=%.3e.',
        outer,
        delta,
        monitors['size_p'],
        monitors['size_v'],
        monitors['size_t'],
    )
    _check_budget(size, it.budget_t, 'transport', report.history['t'])
    if _accept(report.history['t'], size, it.tol_t, it.atol, 'transport'):
      return state
  raise errors.NonConvergenceError(
      f'transport did not converge in {it.max_iters_t} iterations',
      history=report.history['t'],
  )


def attach_primitives(
    state: core_model.FlowFields,
    sample: radial_background.BackgroundSample,
    gas: core_model.GasLaw,
) -> core_model.FlowFields:
  prim = core_model.primitive_fields(gas, state, sample.u, sample.Phi_bar)
  return state.replace(primitives=prim)


def _status_of(error: Exception) -> Status | None:
  for error_type, status in _STATUS_OF_ERROR:
    if isinstance(error, error_type):
      return status
  return None


def solve_case(
    case: case_lib.NozzleCase, config: config_dict.ConfigDict | None = None
) -> tuple[core_model.FlowFields, SolveReport]:
  """Solves a case.

  Controlled failures (sonic approach, cavitation, backflow, a horizon
  before the exit, divergence) end the solve with the matching status and
  the last iterate; they are not raised.

  Args:
    case: Parsed case.
    config: Solver config; defaults to the case's config.

  Returns:
    The final fields, with primitive variables when they exist, and the
    report.
  """
  if config is None:
    config = case.config()
  grid = make_grid(case, config)
  report = SolveReport(case_hash=case.case_hash, grid=grid.shape)
  iteration = IterationConfig.from_config(config)
  damping = Damping(relax=iteration.relax, fallback=iteration.relax_fallback)
  state = core_model.FlowFields.background(grid, case.background.S0)
  ctx = None
  try:
    ctx = prepare(case, config)
    state = _iterate(ctx, state, damping, report)
    state = attach_primitives(state, ctx.sample, case.gas)
    report.status = Status.CONVERGED
  except errors.NozzleError as e:
    status = _status_of(e)
    if status is None:
      raise
    report.status = status
    report.message = str(e)
    report.node = e.node
    logging.error('Solve ended with status %s: %s', status.value, e)
  report.relax = damping.relax

  if ctx is not None and state.primitives is None:
    try:
      state = attach_primitives(state, ctx.sample, case.gas)
    except errors.NozzleError as e:
      logging.warning('No primitive variables for the last iterate: %s', e)
  if state.primitives is not None:
    residuals = verify_report.residual_euler_poisson(state, ctx.doping)
    report.residuals = residuals.to_dict()
    report.conservation = verify_report.conservation_report(state)
    if report.converged and residuals.min_mach_margin <= 0.0:
      report.status = Status.SONIC_APPROACH
      report.node = residuals.margin_node
      report.message = 'converged fields are not supersonic'
  return state, report


def deviation_norm(
    fields: core_model.FlowFields, sample: radial_background.BackgroundSample
) -> float:
  """H^1_* size of the deviation of (rho, u, S, Phi) from the background."""
  prim = fields.primitives
  if prim is None:
    raise errors.ValidationError('fields carry no primitive variables')
  grid = fields.grid
  parts = (
      (prim.rho - sample.rho[:, None], Parity.EVEN),
      (prim.velocity.u_r - sample.u[:, None], Parity.EVEN),
      (prim.velocity.u_phi, Parity.ODD),
      (prim.velocity.u_theta, Parity.ODD),
      (prim.Phi - sample.Phi_bar[:, None], Parity.EVEN),
  )
  return float(
      sum(verify_report.hk_star_norm(f, grid, 1, p) for f, p in parts)
  )


@dataclasses.dataclass(frozen=True)
class ScalingResult:
  """Log-log fit of deviation norms against the amplitude."""

  slope: float
  intercept: float
  table: tuple[tuple[float, float], ...]

  def to_dict(self) -> dict[str, Any]:
    return {
        'slope': self.slope,
        'intercept': self.intercept,
        'table': [list(row) for row in self.table],
    }


def scaling_study(
    case: case_lib.NozzleCase,
    epsilons: Sequence[float],
    config: config_dict.ConfigDict | None = None,
    channel: str | None = None,
    num_workers: int | None = None,
) -> ScalingResult:
  """Solves a family of amplitudes and fits the deviation-norm slope.

  Args:
    case: Template case; its perturbation shapes are scaled by each eps.
    epsilons: Amplitudes; zero entries are skipped with a warning.
    config: Solver config; defaults to the case's config.
    channel: Restrict the perturbation to one channel of
      `case_lib.CHANNELS`.
    num_workers: Parallel solves; defaults to config.num_workers.

  Returns:
    The fitted slope and the (eps, norm) table.

  Raises:
    ValidationError: Unless at least 3 nonzero amplitudes span 2 decades.
    NonConvergenceError: If any member does not converge.
  """
  if config is None:
    config = case.config()
  if channel is not None:
    case = case.with_channel(channel)
  members = []
  for eps in epsilons:
    if eps == 0.0:
      logging.warning('Skipping eps = 0 in the scaling fit.')
      continue
    members.append(abs(float(eps)))
  if len(members) < 3:
    raise errors.ValidationError('a scaling study needs 3 nonzero amplitudes')
  if max(members) / min(members) < 100.0 * (1.0 - 1e-9):
    raise errors.ValidationError('amplitudes must span at least 2 decades')
  workers = num_workers or config.num_workers

  def run(eps):
    fields, report = solve_case(case.with_eps(eps), config)
    return eps, fields, report

  sample = prepare_sample(case, config)
  rows = []
  with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
    futures = [pool.submit(run, eps) for eps in members]
    for future in tqdm.tqdm(
        futures, total=len(futures), desc='sweep', disable=len(futures) < 2
    ):
      eps, fields, report = future.result()
      if not report.converged:
        raise errors.NonConvergenceError(
            f'sweep member eps={eps:g} ended with {report.status.value}: '
            f'{report.message}'
        )
      rows.append((eps, deviation_norm(fields, sample)))
  rows.sort()
  norms = np.array([norm for _, norm in rows])
  if np.any(norms <= 0.0):
    raise errors.ValidationError(
        'the perturbation leaves the background unchanged'
    )
  slope, intercept = np.polyfit(
      np.log([eps for eps, _ in rows]), np.log(norms), 1
  )
  logging.info('Scaling slope %.4f over %d amplitudes.', slope, len(rows))
  return ScalingResult(
      slope=float(slope), intercept=float(intercept), table=tuple(rows)
  )


def prepare_sample(
    case: case_lib.NozzleCase, config: config_dict.ConfigDict
) -> radial_background.BackgroundSample:
  """Background sampled on the case's grid."""
  g = case.geometry
  background = radial_background.integrate_background(
      case.background,
      (g.r_en, g.r_ex),
      rtol=config.ode_rtol,
      atol=config.ode_atol,
      horizon_margin=config.horizon_margin,
  )
  return background.evaluate(make_grid(case, config).r)
