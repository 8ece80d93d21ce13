#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import glob
import os.path
import re
import sys

import setuptools


# Read description and requirements.
with open("README.md", encoding="utf8") as f:
    readme = f.read()
with open("requirements.txt") as f:
    reqs = f.read()

# get version string from module
init_path = os.path.join(os.path.dirname(__file__), "asvplan/__init__.py")
with open(init_path, "r") as f:
    version = re.search(r"__version__ = ['\"]([^'\"]*)['\"]", f.read(), re.M).group(1)

# Set key package information.
DISTNAME = "asvplan"
DESCRIPTION = "asvplan: intention-aware collision avoidance planning for surface vessels."
LONG_DESCRIPTION = readme
AUTHOR = "asvplan contributors"
LICENSE = "MIT licensed, as found in the LICENSE file"
REQUIREMENTS = reqs.strip().split("\n")
VERSION = version

# Run installer.
if __name__ == "__main__":
    if sys.version_info < (3, 8):
        sys.exit("Sorry, Python >=3.8 is required for asvplan.")

    setuptools.setup(
        name=DISTNAME,
        install_requires=REQUIREMENTS,
        packages=setuptools.find_packages(exclude=["test", "test.*", "benchmarks"]),
        dependency_links=[],
        version=VERSION,
        description=DESCRIPTION,
        long_description=LONG_DESCRIPTION,
        long_description_content_type="text/markdown",
        author=AUTHOR,
        license=LICENSE,
        tests_require=["pytest"],
        entry_points={"console_scripts": ["asvplan = asvplan.cli.launcher:main"]},
        data_files=[
            ("configs", glob.glob("configs/*.yaml") + ["configs/planner_overrides.txt"]),
            ("configs/scenarios", glob.glob("configs/scenarios/*.yaml")),
        ],
    )
