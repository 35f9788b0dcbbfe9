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

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="landau-lab",
    version="0.1.0",
    author="framework_team",
    description="Landau equation velocity-space solver, estimates and Robot Framework keywords",
    long_description=long_description,
    long_description_content_type="text/markdown",
    package_dir={"": "landau_library"},
    py_modules=["errors", "grid_core", "norms", "collision", "monotone_analytics", "solver", "ode_lab",
                "inequality_suite", "cli_io", "LandauLibrary"],
    entry_points={"console_scripts": ["landau=cli_io:main"]},
    install_requires=["numpy", "scipy", "pydantic>=2", "pyyaml", "robotframework"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
