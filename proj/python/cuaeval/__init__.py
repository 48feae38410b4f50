# Copyright 2026 The cuaeval Authors
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

"""Python access to the cuaeval core."""

import json
import os

from . import _cuaeval
from ._cuaeval import CuaevalError, ReviewApi, cli, judge_accuracy, noisy_draw

__all__ = [
    "CuaevalError",
    "ReviewApi",
    "cli",
    "judge_accuracy",
    "metrics",
    "noisy_draw",
    "parse_verdict",
    "rejudge",
    "run",
    "validate_corpus",
]


def validate_corpus(corpus_dir, profile="unconstrained", strict=False):
    return json.loads(_cuaeval.validate_corpus(os.fspath(corpus_dir), profile, strict))


def run(config_path, store=None, run_id=None, parallelism=None):
    """Runs a benchmark config; returns the run manifest."""
    return json.loads(_cuaeval.run(os.fspath(config_path), os.fspath(store or ""),
                                   run_id or "", parallelism or 0))


def rejudge(store, run_id, judge_spec, corpus_dir):
    if not isinstance(judge_spec, str):
        judge_spec = json.dumps(judge_spec)
    return _cuaeval.rejudge(os.fspath(store), run_id, judge_spec, os.fspath(corpus_dir))


def metrics(store, run_ids, truth="oracle", task_weighted=False, labels=None, out_dir=None):
    if isinstance(run_ids, str):
        run_ids = [run_ids]
    return json.loads(_cuaeval.metrics(os.fspath(store), list(run_ids), truth, task_weighted,
                                       os.fspath(labels or ""), os.fspath(out_dir or "")))


def parse_verdict(raw, evaluator_id="remote"):
    return json.loads(_cuaeval.parse_verdict(raw, evaluator_id))
