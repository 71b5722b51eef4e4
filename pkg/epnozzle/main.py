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

r"""Command-line entry point of the nozzle solver.

Usage:

  epnozzle background --case=zero.case [--probe_horizon=4.0]
  epnozzle eigen --case=zero.case [--modes=8]
  epnozzle solve --case=swirl.case --out=/tmp/swirl [--grid=64x16]
  epnozzle verify --out=/tmp/swirl
  epnozzle sweep --case=swirl.case --eps=1e-4,1e-3,1e-2 [--channel=swirl]

Exit status is 0 for a converged solve, 2 for a controlled failure (sonic
approach, cavitation, backflow, horizon before the exit, divergence) and 1
for usage, input and I/O errors.
"""

import json
import sys
from typing import Callable, Sequence

from absl import app
from absl import flags
from absl import logging
from epnozzle import archive
from epnozzle import case_lib
from epnozzle import eigenbasis
from epnozzle import errors
from epnozzle import outer_iteration
from epnozzle import radial_background
from epnozzle import verify_report
from etils import epath
import numpy as np

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

FLAGS = flags.FLAGS

_CASE = flags.DEFINE_string('case', None, 'Case file or bundled case name.')
_OUT = flags.DEFINE_string('out', None, 'Archive directory.')
_GRID = flags.DEFINE_string('grid', None, 'Grid as NRxNPHI, e.g. 64x16.')
_MODES = flags.DEFINE_integer('modes', None, 'Number of eigenmodes.')
_TOL = flags.DEFINE_float('tol', None, 'Tolerance of all three loops.')
_RELAX = flags.DEFINE_float('relax', None, 'Initial damping factor.')
_NUM_WORKERS = flags.DEFINE_integer(
    'num_workers', None, 'Parallel solves of a sweep.'
)
_EPS = flags.DEFINE_list(
    'eps', ['1e-4', '1e-3', '1e-2'], 'Amplitudes of a sweep.'
)
_CHANNEL = flags.DEFINE_enum(
    'channel', None, sorted(case_lib.CHANNELS), 'Perturbation channel to sweep.'
)
_PROBE_HORIZON = flags.DEFINE_float(
    'probe_horizon', None, 'Integrate the background up to this radius.'
)


def _load_case() -> case_lib.NozzleCase:
  if not _CASE.value:
    raise app.UsageError('--case is required')
  return case_lib.parse_case(_CASE.value)


def _config(case: case_lib.NozzleCase):
  overrides = {}
  if _GRID.value is not None:
    overrides['grid'] = _GRID.value
  if _MODES.value is not None:
    overrides['modes'] = _MODES.value
  if _TOL.value is not None:
    overrides.update(tol_p=_TOL.value, tol_v=_TOL.value, tol_t=_TOL.value)
  if _RELAX.value is not None:
    overrides['relax'] = _RELAX.value
  if _NUM_WORKERS.value is not None:
    overrides['num_workers'] = _NUM_WORKERS.value
  return case.config(**overrides)


def _exit_code(report: outer_iteration.SolveReport) -> int:
  return EXIT_OK if report.converged else EXIT_FAILURE


def cmd_background() -> int:
  """Integrates and prints the radial background."""
  case = _load_case()
  config = _config(case)
  g = case.geometry
  kwargs = dict(
      rtol=config.ode_rtol,
      atol=config.ode_atol,
      horizon_margin=config.horizon_margin,
  )
  if _PROBE_HORIZON.value is not None:
    horizon = radial_background.find_horizon(
        case.background, g.r_en, _PROBE_HORIZON.value, **kwargs
    )
    if horizon is None:
      print(f'r* not found within the probe span [{g.r_en}, '
            f'{_PROBE_HORIZON.value}]')
    else:
      print(f'r* = {horizon:.12g}')
  try:
    bg = radial_background.integrate_background(
        case.background, (g.r_en, g.r_ex), **kwargs
    )
  except errors.HorizonBeforeExitError as e:
    print(f'HorizonBeforeExit: {e}', file=sys.stderr)
    return EXIT_FAILURE
  r = np.linspace(g.r_en, g.r_ex, 11)
  sample = bg.evaluate(r)
  print(f'{"r":>12} {"rho":>16} {"E":>16} {"u":>16} {"M":>12}')
  for i in range(r.size):
    print(
        f'{r[i]:12.6f} {sample.rho[i]:16.10g} {sample.E[i]:16.10g} '
        f'{sample.u[i]:16.10g} {np.sqrt(sample.mach_sq[i]):12.8f}'
    )
  print(f'crossform discrepancy: {radial_background.crossform_check(bg):.3e}')
  return EXIT_OK


def cmd_eigen() -> int:
  """Prints the Neumann eigenvalues of the case's wedge."""
  case = _load_case()
  config = _config(case)
  basis = eigenbasis.build_basis(
      case.geometry.phi0, config.modes - 1, config.quad_nodes
  )
  print(f'{"k":>4} {"omega_k":>22}')
  for k, omega in enumerate(basis.omegas):
    print(f'{k:4d} {omega:22.15g}')
  print(f'gram defect: {eigenbasis.gram_defect(basis):.3e}')
  print(
      'derivative-basis defect: '
      f'{eigenbasis.check_derivative_basis(basis):.3e}'
  )
  return EXIT_OK


def cmd_solve() -> int:
  """Solves a case and writes an archive when --out is given."""
  case = _load_case()
  config = _config(case)
  fields, report = outer_iteration.solve_case(case, config)
  if _OUT.value:
    archive.write_solution(fields, report, _OUT.value, case, config)
  print(f'status: {report.status.value}')
  if report.message:
    print(f'message: {report.message}')
  if report.node is not None:
    print(f'node: r={report.node[0]:.6g} phi={report.node[1]:.6g}')
  print(
      'iterations: '
      + ' '.join(f'{k}={v}' for k, v in sorted(report.iterations.items()))
  )
  if report.residuals:
    print(f'residual: {report.residuals["total"]:.3e}')
    print(f'min Mach margin: {report.residuals["min_mach_margin"]:.6g}')
  return _exit_code(report)


def cmd_verify() -> int:
  """Re-checks a stored solution and writes verify.json next to it."""
  if not _OUT.value:
    raise app.UsageError('--out must name an archive directory')
  stored = archive.read_solution(_OUT.value)
  case = stored.case()
  fields = archive.fields_from_table(stored.table, case.gas)
  doping = case.doping_field(fields.grid)
  residuals = verify_report.residual_euler_poisson(fields, doping)
  result = {
      'residuals': residuals.to_dict(),
      'conservation': verify_report.conservation_report(fields),
      'status': stored.report.status.value,
  }
  path = epath.Path(_OUT.value) / 'verify.json'
  try:
    path.write_text(json.dumps(result, sort_keys=True, indent=2) + '\n')
  except OSError as e:
    raise errors.IoError(f'cannot write {path}: {e}') from e
  for name in ('continuity', 'momentum_phi', 'entropy', 'angular_momentum',
               'poisson', 'mass_flux_spread', 'bernoulli_defect',
               'min_mach_margin'):
    print(f'{name:>20}: {getattr(residuals, name):.6e}')
  return EXIT_OK


def cmd_sweep() -> int:
  """Runs a scaling study and prints the slope table."""
  case = _load_case()
  config = _config(case)
  try:
    epsilons = [float(e) for e in _EPS.value]
  except ValueError as e:
    raise app.UsageError(f'--eps must list numbers: {e}') from e
  try:
    result = outer_iteration.scaling_study(
        case, epsilons, config, channel=_CHANNEL.value
    )
  except errors.NonConvergenceError as e:
    print(f'sweep aborted: {e}', file=sys.stderr)
    return EXIT_FAILURE
  print(f'{"eps":>12} {"deviation":>16}')
  for eps, norm in result.table:
    print(f'{eps:12.4g} {norm:16.8g}')
  print(f'slope: {result.slope:.4f}')
  if _OUT.value:
    path = epath.Path(_OUT.value)
    try:
      path.mkdir(parents=True, exist_ok=True)
      (path / 'sweep.json').write_text(
          json.dumps(result.to_dict(), sort_keys=True, indent=2) + '\n'
      )
    except OSError as e:
      raise errors.IoError(f'cannot write {path}: {e}') from e
  return EXIT_OK


COMMANDS: dict[str, Callable[[], int]] = {
    'background': cmd_background,
    'eigen': cmd_eigen,
    'solve': cmd_solve,
    'verify': cmd_verify,
    'sweep': cmd_sweep,
}


def _usage() -> str:
  return f'usage: epnozzle {{{",".join(COMMANDS)}}} [flags]\n{__doc__}'


def dispatch(argv: Sequence[str]) -> int:
  """Runs the command named by the positional arguments."""
  if len(argv) != 2 or argv[1] not in COMMANDS:
    print(_usage(), file=sys.stderr)
    return EXIT_USAGE
  try:
    return COMMANDS[argv[1]]()
  except app.UsageError as e:
    print(f'{e}\n{_usage()}', file=sys.stderr)
    return EXIT_USAGE
  except (errors.ValidationError, errors.ParseError, errors.IoError) as e:
    print(f'{type(e).__name__}: {e}', file=sys.stderr)
    return EXIT_USAGE
  except errors.NozzleError as e:
    logging.error('%s: %s', type(e).__name__, e)
    print(f'{type(e).__name__}: {e}', file=sys.stderr)
    return EXIT_FAILURE


def run_cli(argv: Sequence[str]) -> int:
  """Parses flags from argv and runs the command; returns the exit code."""
  FLAGS.unparse_flags()
  try:
    remaining = FLAGS(list(argv))
  except flags.Error as e:
    FLAGS.unparse_flags()
    FLAGS(list(argv[:1]))
    print(f'{e}\n{_usage()}', file=sys.stderr)
    return EXIT_USAGE
  return dispatch(remaining)


def main(argv: Sequence[str]) -> int:
  return dispatch(argv)


def run() -> None:
  app.run(main)


if __name__ == '__main__':
  run()
