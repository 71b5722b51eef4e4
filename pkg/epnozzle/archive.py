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

"""Solution archives: a node table, the solve report and metadata.

An archive directory holds

  fields.csv      one row per node, r-outer order, 17 significant digits
  report.json     the SolveReport
  metadata.json   case hash, version, grid and tolerances
  case.toml       the case text the solution was computed from
"""

import dataclasses
import json
from typing import Any

from absl import logging
from epnozzle import case_lib
from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import outer_iteration
import epnozzle
from etils import epath
from ml_collections import config_dict
import numpy as np
import pandas as pd

COLUMNS = (
    'r', 'phi', 'rho', 'u_r', 'u_phi', 'u_theta', 'S', 'Phi', 'M', 'psi',
    'chi', 'Psi',
)
FIELDS_FILE = 'fields.csv'
REPORT_FILE = 'report.json'
METADATA_FILE = 'metadata.json'
CASE_FILE = 'case.toml'
_FLOAT_FORMAT = '%.17g'
_TOLERANCES = ('tol_p', 'tol_v', 'tol_t', 'atol', 'relax', 'sonic_margin')


def fields_table(fields: core_model.FlowFields) -> pd.DataFrame:
  """Node table of a solution; primitive columns are NaN without them."""
  r, phi = fields.grid.mesh()
  nan = np.full(fields.grid.shape, np.nan)
  prim = fields.primitives
  columns = {
      'r': r,
      'phi': phi,
      'rho': nan if prim is None else prim.rho,
      'u_r': nan if prim is None else prim.velocity.u_r,
      'u_phi': nan if prim is None else prim.velocity.u_phi,
      'u_theta': fields.v_swirl if prim is None else prim.velocity.u_theta,
      'S': fields.S,
      'Phi': nan if prim is None else prim.Phi,
      'M': nan if prim is None else prim.mach,
      'psi': fields.psi,
      'chi': fields.chi,
      'Psi': fields.Psi,
  }
  return pd.DataFrame(
      {name: np.asarray(columns[name], dtype=np.float64).ravel()
       for name in COLUMNS}
  )


def write_solution(
    fields: core_model.FlowFields,
    report: outer_iteration.SolveReport,
    out_dir: epath.PathLike,
    case: case_lib.NozzleCase | None = None,
    config: config_dict.ConfigDict | None = None,
) -> dict[str, epath.Path]:
  """Writes an archive directory.

  Args:
    fields: Solution fields.
    report: Solve report.
    out_dir: Archive directory, created if needed.
    case: Case of the solution; its text is stored alongside.
    config: Solver config whose tolerances go into the metadata.

  Returns:
    The written paths by kind.

  Raises:
    IoError: If a file cannot be written.
  """
  out_dir = epath.Path(out_dir)
  metadata = {
      'case_hash': report.case_hash,
      'case_name': case.name if case is not None else '',
      'grid': list(fields.grid.shape),
      'status': report.status.value,
      'version': epnozzle.__version__,
  }
  if config is not None:
    metadata['tolerances'] = {name: config[name] for name in _TOLERANCES}
    metadata['modes'] = config.modes
  paths = {
      'fields': out_dir / FIELDS_FILE,
      'report': out_dir / REPORT_FILE,
      'metadata': out_dir / METADATA_FILE,
  }
  try:
    out_dir.mkdir(parents=True, exist_ok=True)
    with paths['fields'].open('w') as f:
      fields_table(fields).to_csv(f, index=False, float_format=_FLOAT_FORMAT)
    paths['report'].write_text(report.to_json() + '\n')
    paths['metadata'].write_text(
        json.dumps(metadata, sort_keys=True, indent=2) + '\n'
    )
    if case is not None and case.source:
      paths['case'] = out_dir / CASE_FILE
      paths['case'].write_text(case.source)
  except OSError as e:
    raise errors.IoError(f'cannot write archive {out_dir}: {e}') from e
  logging.info('Wrote archive %s.', out_dir)
  return paths


@dataclasses.dataclass(frozen=True, eq=False)
class SolutionArchive:
  table: pd.DataFrame
  report: outer_iteration.SolveReport
  metadata: dict[str, Any]
  case_text: str = ''

  def case(self) -> case_lib.NozzleCase:
    if not self.case_text:
      raise errors.ValidationError('the archive stores no case')
    return case_lib.parse_case_text(self.case_text, name=CASE_FILE)


def read_solution(archive_dir: epath.PathLike) -> SolutionArchive:
  """Reads an archive written by `write_solution`."""
  archive_dir = epath.Path(archive_dir)
  try:
    with (archive_dir / FIELDS_FILE).open('r') as f:
      table = pd.read_csv(f, float_precision='round_trip')
    report = json.loads((archive_dir / REPORT_FILE).read_text())
    metadata = json.loads((archive_dir / METADATA_FILE).read_text())
    case_path = archive_dir / CASE_FILE
    case_text = case_path.read_text() if case_path.exists() else ''
  except (OSError, ValueError) as e:
    raise errors.IoError(f'cannot read archive {archive_dir}: {e}') from e
  if tuple(table.columns) != COLUMNS:
    raise errors.IoError(f'unexpected columns {list(table.columns)}')
  return SolutionArchive(
      table=table,
      report=outer_iteration.SolveReport.from_dict(report),
      metadata=metadata,
      case_text=case_text,
  )


def fields_from_table(
    table: pd.DataFrame, gas: core_model.GasLaw
) -> core_model.FlowFields:
  """Rebuilds fields and primitive variables from a node table."""
  r = np.unique(table['r'].to_numpy())
  phi = np.unique(table['phi'].to_numpy())
  grid = grid_utils.Grid(r=r, phi=phi)
  if len(table) != r.size * phi.size:
    raise errors.GridMismatchError('the table is not a tensor grid')

  def column(name):
    return table[name].to_numpy(dtype=np.float64).reshape(grid.shape)

  velocity = core_model.VelocityTriple(
      u_r=column('u_r'), u_phi=column('u_phi'), u_theta=column('u_theta')
  )
  rho, S = column('rho'), column('S')  # pylint: disable=invalid-name
  primitives = core_model.PrimitiveFields(
      gas=gas,
      rho=rho,
      velocity=velocity,
      S=S,
      Phi=column('Phi'),
      c_sq=gas.gamma * S * rho ** (gas.gamma - 1.0),
  )
  return core_model.FlowFields(
      grid=grid,
      chi=column('chi'),
      Psi=column('Psi'),
      psi=column('psi'),
      S=S,
      v_swirl=column('u_theta'),
      primitives=primitives,
  )
