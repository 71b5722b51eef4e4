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

"""Nozzle case files: parsing, defaults and compatibility checks.

A case is a TOML document:

  [geometry]
  r_en = 2.0
  r_ex = 2.5
  phi0 = 0.5

  [gas]
  gamma = 1.6666666666666667

  [background]
  m0 = 10.0
  S0 = 1.0
  rho0 = 1.0
  E0 = 0.0
  b0 = 0.5            # or b_table = [[r, b], ...]

  [perturbation]
  eps = 1e-3
  w_en = {family = "tapered_sine", coefficients = [1.0]}
  doping = {family = "cosine", coefficients = [1.0, 0.5], radial = "bump"}

  [numerics]
  grid = "64x16"
  modes = 8

Perturbation profiles are shapes; the boundary value is the background value
plus eps times the shape. A bare number is a constant shape and an array of
numbers lists cosine coefficients.
"""

import dataclasses
import hashlib
import re
import sys
from typing import Any, Mapping

from epnozzle import config_utils
from epnozzle import core_model
from epnozzle import errors
from epnozzle import grid_utils
from epnozzle import linear_subsystem
from epnozzle import path_utils
from epnozzle import profiles
from epnozzle import radial_background
from epnozzle.configs import config_globals
from epnozzle.configs import solver
from etils import epath
from ml_collections import config_dict
import numpy as np

if sys.version_info >= (3, 11):
  import tomllib  # pylint: disable=g-import-not-at-top
else:
  import tomli as tomllib  # pylint: disable=g-import-not-at-top

_SECTIONS = ('geometry', 'gas', 'background', 'perturbation', 'numerics')
_PROFILES = ('u_en', 'v_en', 'w_en', 'S_en', 'E_en', 'Phi_ex')
_LOCATION = re.compile(r'\(at line (\d+), column (\d+)\)')

# Profiles scaled by each sweep channel.
CHANNELS = {
    'doping': ('doping',),
    'swirl': ('w_en',),
    'field': ('E_en', 'Phi_ex'),
    'entropy': ('S_en',),
    'entrance': ('u_en', 'v_en'),
}


@dataclasses.dataclass(frozen=True)
class Perturbation:
  """Amplitude and shapes of the perturbation data."""

  eps: float = 0.0
  u_en: profiles.Profile = profiles.Zero()
  v_en: profiles.Profile = profiles.Zero()
  w_en: profiles.Profile = profiles.Zero()
  S_en: profiles.Profile = profiles.Zero()  # pylint: disable=invalid-name
  E_en: profiles.Profile = profiles.Zero()  # pylint: disable=invalid-name
  Phi_ex: profiles.Profile = profiles.Zero()  # pylint: disable=invalid-name
  doping: profiles.DopingField = profiles.DopingField(profiles.Zero())

  def shape(self, name: str) -> profiles.Profile:
    if name == 'doping':
      return self.doping.profile
    return getattr(self, name)

  def scaled(self, name: str) -> profiles.Profile:
    """eps times the shape of one boundary profile."""
    shape = self.shape(name)
    if shape.is_zero or self.eps == 0.0:
      return profiles.Zero()
    return shape.scaled(self.eps)

  @property
  def is_zero(self) -> bool:
    return self.eps == 0.0 or all(
        self.shape(name).is_zero for name in (*_PROFILES, 'doping')
    )

  def only(self, channel: str) -> 'Perturbation':
    """Keeps the shapes of one sweep channel and drops the others."""
    if channel not in CHANNELS:
      raise errors.ValidationError(
          f'unknown channel {channel!r}; expected one of {sorted(CHANNELS)}'
      )
    keep = CHANNELS[channel]
    changes = {
        name: profiles.Zero() for name in _PROFILES if name not in keep
    }
    if 'doping' not in keep:
      changes['doping'] = profiles.DopingField(profiles.Zero())
    return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class NozzleCase:
  """A parsed case.

  Attributes:
    geometry: Nozzle wedge.
    gas: Gas law.
    background: Radial background data.
    perturbation: Perturbation amplitude and shapes.
    numerics: Overrides of the solver config from the case file.
    source: Text the case was parsed from.
    name: File name or label.
  """

  geometry: core_model.NozzleGeometry
  gas: core_model.GasLaw
  background: radial_background.BackgroundParams
  perturbation: Perturbation = Perturbation()
  numerics: Mapping[str, Any] = dataclasses.field(default_factory=dict)
  source: str = ''
  name: str = ''

  def with_eps(self, eps: float) -> 'NozzleCase':
    return dataclasses.replace(
        self, perturbation=dataclasses.replace(self.perturbation, eps=eps)
    )

  def with_channel(self, channel: str) -> 'NozzleCase':
    return dataclasses.replace(
        self, perturbation=self.perturbation.only(channel)
    )

  @property
  def case_hash(self) -> str:
    text = self.source or repr(self)
    return hashlib.blake2b(text.encode('utf-8'), digest_size=16).hexdigest()

  def config(self, **overrides) -> config_dict.ConfigDict:
    """Solver config: defaults, then the case's numerics, then overrides."""
    config = solver.get_config()
    apply_numerics(config, self.numerics)
    apply_numerics(config, overrides)
    return config

  def boundary_data(self) -> linear_subsystem.BoundaryData:
    """Boundary perturbations relative to the background."""
    p = self.perturbation
    return linear_subsystem.BoundaryData(
        u_en=p.scaled('u_en'),
        v_en=p.scaled('v_en'),
        E_en=p.scaled('E_en'),
        Phi_ex=p.scaled('Phi_ex'),
    )

  def entrance_entropy(self) -> profiles.Profile:
    """Absolute entrance entropy S0 + eps * shape."""
    return self.perturbation.scaled('S_en').shifted(self.background.S0)

  def entrance_swirl(self) -> profiles.Profile:
    return self.perturbation.scaled('w_en')

  def doping_field(self, grid: grid_utils.Grid) -> np.ndarray:
    """Ion density b = b_bar(r) + eps * doping(r, phi) on the grid."""
    r, phi = grid.mesh()
    b = self.background.b_bar(r)
    p = self.perturbation
    if p.eps != 0.0 and not p.doping.profile.is_zero:
      b = b + p.eps * p.doping(r, phi, grid.r_en, grid.r_ex)
    return b


def apply_numerics(
    config: config_dict.ConfigDict, numerics: Mapping[str, Any]
) -> config_dict.ConfigDict:
  """Applies flat overrides, accepting `grid = "NRxNPHI"`."""
  for key, value in numerics.items():
    try:
      if key == 'grid':
        if isinstance(value, str):
          value = grid_utils.parse_grid_spec(value)
        config.grid.n_r, config.grid.n_phi = (int(v) for v in value)
      elif key in ('n_r', 'n_phi'):
        config.grid[key] = int(value)
      elif key in config:
        config[key] = value
      else:
        raise errors.ValidationError(f'unknown numerics key {key!r}')
    except TypeError as e:
      raise errors.ValidationError(f'numerics key {key!r}: {e}') from e
  return config


def _number(section: Mapping[str, Any], key: str, where: str, default=None):
  value = section.get(key, default)
  if value is None:
    raise errors.ValidationError(f'[{where}] is missing {key!r}')
  if isinstance(value, bool) or not isinstance(value, (int, float)):
    raise errors.ValidationError(f'[{where}] {key} must be a number')
  return float(value)


def _series(family: str, coefficients, phi0: float) -> profiles.Profile:
  if isinstance(coefficients, (int, float)):
    coefficients = [coefficients]
  families = {
      'cosine': profiles.CosineSeries,
      'sine_squared': profiles.SineSquaredSeries,
      'tapered_sine': profiles.TaperedSineSeries,
  }
  return families[family](coefficients=tuple(coefficients), phi0=phi0)


def parse_profile(value: Any, phi0: float, where: str) -> profiles.Profile:
  """Builds a profile from its case-file value.

  Args:
    value: A number, an array of cosine coefficients, an array of
      [phi, value] pairs, a `{family = ...}` table or a constructor table.
    phi0: Wedge half-opening angle.
    where: Key name used in error messages.

  Returns:
    The profile shape.
  """
  if value is None:
    return profiles.Zero()
  if isinstance(value, bool):
    raise errors.ValidationError(f'{where}: expected a profile')
  if isinstance(value, (int, float)):
    return profiles.CosineSeries(coefficients=(float(value),), phi0=phi0)
  if isinstance(value, list):
    if value and all(isinstance(v, list) and len(v) == 2 for v in value):
      table = np.asarray(value, dtype=np.float64)
      return profiles.Tabulated(
          phi=tuple(table[:, 0]), values=tuple(table[:, 1])
      )
    if all(isinstance(v, (int, float)) for v in value):
      return _series('cosine', value, phi0)
    raise errors.ValidationError(f'{where}: malformed profile array')
  if isinstance(value, Mapping):
    if config_utils.is_object_spec(value):
      profile = config_utils.resolve_value(
          value, config_globals.get_globals()
      )
      if not isinstance(profile, profiles.Profile):
        raise errors.ValidationError(f'{where}: constructor is not a profile')
      return profile
    family = value.get('family')
    if family in ('cosine', 'sine_squared', 'tapered_sine'):
      if 'coefficients' not in value:
        raise errors.ValidationError(f'{where}: missing coefficients')
      return _series(family, value['coefficients'], phi0)
    if family == 'table':
      return profiles.Tabulated(
          phi=tuple(value.get('phi', ())), values=tuple(value.get('values', ()))
      )
    if family == 'zero':
      return profiles.Zero()
    raise errors.ValidationError(f'{where}: unknown profile family {family!r}')
  raise errors.ValidationError(f'{where}: expected a profile')


def _check_keys(section: Mapping[str, Any], allowed, where: str) -> None:
  unknown = sorted(set(section) - set(allowed))
  if unknown:
    raise errors.ValidationError(f'[{where}] has unknown keys {unknown}')


def _section(document: Mapping[str, Any], name: str) -> Mapping[str, Any]:
  section = document.get(name, {})
  if not isinstance(section, Mapping):
    raise errors.ValidationError(f'{name} must be a [section]')
  return section


def parse_case_text(text: str, name: str = '') -> NozzleCase:
  """Parses and validates a case from its text.

  Args:
    text: TOML case text.
    name: Label for messages and archives.

  Returns:
    The validated case.

  Raises:
    ParseError: With line and column on malformed TOML.
    ValidationError: Naming the violated condition.
    AdmissibilityError: If the background data leave the supersonic window.
    CompatibilityError: If the boundary data violate the wall conditions.
  """
  try:
    document = tomllib.loads(text)
  except tomllib.TOMLDecodeError as e:
    match = _LOCATION.search(str(e))
    line, column = (int(match.group(1)), int(match.group(2))) if match else (
        0,
        0,
    )
    message = _LOCATION.sub('', str(e)).strip()
    raise errors.ParseError(message, line=line, column=column) from e
  _check_keys(document, _SECTIONS, 'case')
  for required in ('geometry', 'gas', 'background'):
    if required not in document:
      raise errors.ValidationError(f'missing [{required}] section')

  geometry_section = _section(document, 'geometry')
  _check_keys(geometry_section, ('r_en', 'r_ex', 'phi0'), 'geometry')
  geometry = core_model.NozzleGeometry(
      r_en=_number(geometry_section, 'r_en', 'geometry'),
      r_ex=_number(geometry_section, 'r_ex', 'geometry'),
      phi0=_number(geometry_section, 'phi0', 'geometry'),
  )
  gas_section = _section(document, 'gas')
  _check_keys(gas_section, ('gamma',), 'gas')
  gas = core_model.GasLaw(gamma=_number(gas_section, 'gamma', 'gas'))

  bg = _section(document, 'background')
  _check_keys(bg, ('m0', 'S0', 'rho0', 'E0', 'b0', 'b_table'), 'background')
  b_table = bg.get('b_table')
  if b_table is not None:
    b_table = tuple(tuple(float(v) for v in row) for row in b_table)
  params = radial_background.BackgroundParams(
      gas=gas,
      m0=_number(bg, 'm0', 'background'),
      S0=_number(bg, 'S0', 'background'),
      rho0=_number(bg, 'rho0', 'background'),
      E0=_number(bg, 'E0', 'background', default=0.0),
      b0=_number(bg, 'b0', 'background', default=0.0 if b_table else None),
      b_table=b_table,
  )
  params.check_admissible(geometry.r_en, geometry.r_ex)

  pert = _section(document, 'perturbation')
  _check_keys(pert, ('eps', *_PROFILES, 'doping'), 'perturbation')
  phi0 = geometry.phi0
  shapes = {
      key: parse_profile(pert.get(key), phi0, key) for key in _PROFILES
  }
  doping_value = pert.get('doping')
  radial = 'uniform'
  if isinstance(doping_value, Mapping) and 'radial' in doping_value:
    doping_value = dict(doping_value)
    radial = doping_value.pop('radial')
  doping = profiles.DopingField(
      parse_profile(doping_value, phi0, 'doping'), radial=radial
  )
  perturbation = Perturbation(
      eps=_number(pert, 'eps', 'perturbation', default=0.0),
      doping=doping,
      **shapes,
  )
  numerics = dict(_section(document, 'numerics'))
  apply_numerics(solver.get_config(), numerics)

  case = NozzleCase(
      geometry=geometry,
      gas=gas,
      background=params,
      perturbation=perturbation,
      numerics=numerics,
      source=text,
      name=name,
  )
  validate_compatibility(case)
  return case


def parse_case(path: epath.PathLike) -> NozzleCase:
  """Reads a case file, also looking among the bundled cases."""
  resolved = path_utils.resolve_case_path(path)
  try:
    text = resolved.read_text(encoding='utf-8')
  except (OSError, UnicodeDecodeError) as e:
    raise errors.IoError(f'cannot read case {resolved}: {e}') from e
  return parse_case_text(text, name=resolved.name)


def validate_compatibility(case: NozzleCase, tol: float | None = None) -> None:
  """Checks the axis and wall conditions on the boundary data.

  Args:
    case: Parsed case.
    tol: Tolerance; defaults to the config's compat_tol.

  Raises:
    CompatibilityError: Listing every failed condition.
  """
  if tol is None:
    tol = float(case.config().compat_tol)
  p = case.perturbation
  phi0 = case.geometry.phi0
  checks = {
      'w_en(0) = 0': p.scaled('w_en')(0.0),
      'v_en(phi0) = 0': p.scaled('v_en')(phi0),
      "Phi_ex'(phi0) = 0": p.scaled('Phi_ex').derivative(phi0),
      "d_phi b(., phi0) = 0": p.eps * p.doping.profile.derivative(phi0),
  }
  for name in ('u_en', 'v_en', 'w_en', 'S_en', 'E_en'):
    checks[f"{name}'(phi0) = 0"] = p.scaled(name).derivative(phi0)
  failures = [
      f'{name} (got {float(value):.3e})'
      for name, value in checks.items()
      if not abs(float(value)) <= tol
  ]
  if failures:
    raise errors.CompatibilityError(failures)
  entropy = case.entrance_entropy()(np.linspace(0.0, phi0, 65))
  if np.any(entropy <= 0.0):
    raise errors.ValidationError('entrance entropy must stay positive')
