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

"""Locating files that ship with the package."""

import os

from etils import epath

CASES_DIR = 'cases'


def get_absolute_path(relative_path: os.PathLike[str] | str) -> epath.Path:
  """Returns the path of a resource relative to the package root."""
  return epath.Path(__file__).parent / relative_path


def resolve_case_path(path: os.PathLike[str] | str) -> epath.Path:
  """Finds a case file on disk, then among the bundled cases.

  Args:
    path: A path, or the name of a bundled case such as `zero.case`.

  Returns:
    The first existing candidate, or `path` itself if none exists.
  """
  candidate = epath.Path(path)
  if candidate.exists():
    return candidate
  bundled = get_absolute_path(CASES_DIR) / os.fspath(path)
  if bundled.exists():
    return bundled
  return candidate


def bundled_cases() -> list[str]:
  return sorted(p.name for p in get_absolute_path(CASES_DIR).glob('*.case'))
