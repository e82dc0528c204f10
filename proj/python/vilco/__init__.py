# Copyright 2026 The vilco Authors.
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
"""Python bindings for the vilco continual-learning engine."""

from ._core import (
    ConfigError,
    FormatError,
    NumericalError,
    ShapeError,
    VilcoError,
    __version__,
    avg_performance,
    backward_forgetting,
    gradcheck,
    interval_iou,
    load_features,
    recall_at_k,
    report,
    run,
    save_features,
    standard_config,
)

__all__ = [
    "ConfigError",
    "FormatError",
    "NumericalError",
    "ShapeError",
    "VilcoError",
    "__version__",
    "avg_performance",
    "backward_forgetting",
    "gradcheck",
    "interval_iou",
    "load_features",
    "recall_at_k",
    "report",
    "run",
    "save_features",
    "standard_config",
]
