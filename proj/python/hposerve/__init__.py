# Copyright 2026 The hposerve Authors
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
"""In-process access to the hposerve engine.

Study definitions use the same JSON shape as the server's ask body.
"""

import json

from . import _core
from ._core import (
    BRANIN_MINIMUM,
    Error,
    branin,
    median,
    rosenbrock,
    should_prune,
    sphere,
)

__all__ = [
    "BRANIN_MINIMUM",
    "Error",
    "branin",
    "canonical_text",
    "evaluate",
    "fingerprint",
    "grid_size",
    "median",
    "oracle_random_search",
    "rosenbrock",
    "should_prune",
    "sphere",
    "suggest",
]


def _text(definition):
    return definition if isinstance(definition, str) else json.dumps(definition)


def canonical_text(definition):
    return _core.canonical_text(_text(definition))


def fingerprint(definition):
    """Hex SHA-256 of the canonical text."""
    return _core.fingerprint(_text(definition))


def suggest(definition, history=(), n_taken=0):
    """Parameters the server would hand out as trial number ``n_taken``.

    ``history`` holds completed trials as ``{"params": ..., "objective": ...}``
    in completion order.
    """
    return json.loads(
        _core.suggest(_text(definition), json.dumps(list(history)), n_taken))


def grid_size(definition):
    return _core.grid_size(_text(definition))


def evaluate(objective, params, seed=0):
    return _core.evaluate(objective, json.dumps(params), seed)


def oracle_random_search(objective, n_trials, seed=0):
    return _core.oracle_random_search(objective, n_trials, seed)
