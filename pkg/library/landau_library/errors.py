# Copyright 2024-2025 NetCracker Technology Corporation
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

"""Exception hierarchy shared by every landau_library module."""


class LandauError(Exception):
    pass


class ConfigurationError(LandauError):
    """Invalid grid, kernel or run configuration.

    ``path`` holds a JSON pointer when the error comes from config validation.
    """

    def __init__(self, message, path=None):
        super().__init__(f'{path}: {message}' if path else message)
        self.path = path


class DomainError(LandauError):
    pass


class GridMismatchError(LandauError):
    pass


class SingularityError(LandauError):
    pass


class UnsupportedError(LandauError):
    pass


class DegenerateError(LandauError):
    pass


class ResolutionError(LandauError):
    pass


class InputError(LandauError):
    pass


class InstabilityError(LandauError):
    """Raised when a time step produces non-finite values.

    The trajectory recorded so far and a diagnostic dictionary travel with it,
    so callers can still persist the partial run.
    """

    def __init__(self, message, diagnostic=None, trajectory=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}
        self.trajectory = trajectory
