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

"""Constructing boundary profiles and other objects from configurations.

A case file or a config module describes an object by naming its constructor:

  config.w_en = callable_config('profiles.TaperedSineSeries',
                                coefficients=(1.0,), phi0=0.5)

which is stored as

  ConfigDict({
    'w_en': ConfigDict({
      '__constructor': 'profiles.TaperedSineSeries',
      '__config': ConfigDict({'coefficients': (1.0,), 'phi0': 0.5}),
    })
  })

`parse_config(config, config_globals.get_globals())` replaces every such entry
by the constructed object. Plain dictionaries with the two keys, such as a
TOML inline table, are resolved the same way.
"""

from typing import Any, Mapping

from ml_collections import config_dict

_CALLABLE = '__constructor'
_KWARGS = '__config'
_OBJECT = '__object'


def callable_config(
    callable_: str, *args: config_dict.ConfigDict, **kwargs: Any
) -> config_dict.ConfigDict:
  """Describes a call to `callable_` with keyword arguments.

  Args:
    callable_: Dotted name of the callable, resolved against the globals given
      to `parse_config`.
    *args: Dictionaries of further keyword arguments.
    **kwargs: Keyword arguments.

  Returns:
    A ConfigDict understood by `parse_config`.
  """
  kwargs = config_dict.ConfigDict(kwargs)
  for arg in args:
    kwargs.update(arg)
  return config_dict.ConfigDict({_CALLABLE: callable_, _KWARGS: kwargs})


def object_config(object_: str) -> config_dict.ConfigDict:
  """Describes a reference to an existing object, such as `profiles.Zero()`."""
  return config_dict.ConfigDict({_OBJECT: object_})


def is_object_spec(value: Any) -> bool:
  """Whether `value` is a constructor or object entry."""
  if not isinstance(value, (Mapping, config_dict.ConfigDict)):
    return False
  keys = set(value.keys())
  return keys == {_CALLABLE, _KWARGS} or keys == {_OBJECT}


def _resolve(value: Any, globals_: dict[str, Any]) -> Any:
  if isinstance(value, Mapping) and not isinstance(
      value, config_dict.ConfigDict
  ):
    value = config_dict.ConfigDict(dict(value))
  if isinstance(value, config_dict.ConfigDict):
    keys = set(value.keys())
    if keys == {_CALLABLE, _KWARGS}:
      fn = eval(value[_CALLABLE], globals_)  # pylint: disable=eval-used
      return _resolve(fn(**parse_config(value[_KWARGS], globals_)), globals_)
    if keys == {_OBJECT}:
      return eval(value[_OBJECT], globals_)  # pylint: disable=eval-used
    return parse_config(value, globals_)
  if isinstance(value, config_dict.FieldReference):
    return value.get()
  return value


def parse_config(
    config: config_dict.ConfigDict, globals_: dict[str, Any]
) -> config_dict.ConfigDict:
  """Constructs every described object in `config`, in place.

  Lists and tuples are searched element by element; other containers are
  left alone.

  Args:
    config: Configuration with `callable_config` or `object_config` entries.
    globals_: Names available to the constructor expressions.

  Returns:
    The same ConfigDict with the entries replaced by objects.
  """
  with config.ignore_type():
    for key, value in config.items():
      if type(value) in (list, tuple):
        config[key] = type(value)(_resolve(v, globals_) for v in value)
      else:
        config[key] = _resolve(value, globals_)
    return config


def resolve_value(value: Any, globals_: dict[str, Any]) -> Any:
  """Constructs a single described object, or returns `value` unchanged."""
  return _resolve(value, globals_)
