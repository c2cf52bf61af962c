# Copyright 2022 InstaDeep Ltd. All rights reserved.
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

"""Exceptions raised across the downlink package."""


class DownlinkError(Exception):
    """Base class for every error raised by downlink."""


class DomainError(DownlinkError, ValueError):
    """An argument lies outside the domain of an operation."""


class ContractError(DownlinkError, ValueError):
    """A precondition of an operation was broken by the caller."""


class NumericalError(DownlinkError, ArithmeticError):
    """An iterative numerical method failed to converge."""


class GenerationError(DownlinkError):
    """An instance could not be synthesised with the requested parameters."""


class InstanceParseError(DownlinkError, ValueError):
    """An instance, window or schedule file is malformed."""


class ConfigError(DownlinkError, ValueError):
    """A run configuration holds invalid values."""
