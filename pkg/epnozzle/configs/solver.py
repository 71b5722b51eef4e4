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

"""Default numerical parameters of the nozzle solver.

Philosophy:
* Physical data (geometry, gas, background, perturbations) belong in case
  files; everything numerical is a config key that a case's [numerics]
  section or a command-line flag may override.
* Tolerances are relative discrete H^1 changes with an absolute floor `atol`.
"""

from ml_collections import config_dict


def get_grid_config(**kwargs) -> config_dict.ConfigDict:
  grid = config_dict.ConfigDict()
  grid.n_r = 64
  grid.n_phi = 16
  grid.update(kwargs)
  return grid


def get_config(**kwargs) -> config_dict.ConfigDict:
  """Create the solver config.

  Args:
    **kwargs: Values to override.

  Returns:
    Config dict with the default numerical parameters.
  """
  config = config_dict.ConfigDict()
  config.grid = get_grid_config()
  config.modes = 8
  config.quad_nodes = 48
  config.check_resolution = False

  # Picard loops: potentials (p), swirl stream function (v), transport (t).
  config.tol_p = 1e-8
  config.tol_v = 1e-8
  config.tol_t = 1e-8
  config.atol = 1e-12
  config.max_iters_p = 40
  config.max_iters_v = 20
  config.max_iters_t = 20
  config.relax = 1.0
  config.relax_fallback = 0.5

  # Caps on the H^k_* sizes of the iterates; exceeding one ends the solve.
  config.budget_p = 10.0
  config.budget_v = 10.0
  config.budget_t = 10.0

  config.sonic_margin = 0.02
  config.horizon_margin = 1e-3
  config.ode_rtol = 1e-12
  config.ode_atol = 1e-14
  config.compat_tol = 1e-8
  config.num_workers = 4
  config.update(kwargs)
  return config
