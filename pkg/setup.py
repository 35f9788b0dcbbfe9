# Root-level build manifest: mirrors library/setup.py so the package can be
# installed from the repository root. Paths are relative to this directory.

import setuptools

with open("library/README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="landau-lab",
    version="0.1.0",
    author="framework_team",
    description="Landau equation velocity-space solver, estimates and Robot Framework keywords",
    long_description=long_description,
    long_description_content_type="text/markdown",
    package_dir={"": "library/landau_library"},
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
