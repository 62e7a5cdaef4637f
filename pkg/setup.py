#!/usr/bin/env python

import os
import sys

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

if sys.argv[-1] == "publish":
    os.system("python setup.py sdist upload")
    sys.exit()

readme = open("README.md").read()

with open("requirements.txt") as f:
    requirements = [l for l in f.read().splitlines() if l and not l.startswith("#")]

setup(
    name="surfcalc",
    version="1.0.0",
    description="end spaces, exhaustions, pants decompositions and handle-shift bases of infinite-type surfaces",
    long_description=readme,
    long_description_content_type="text/markdown",
    author="Joe Yesselman",
    author_email="jyesselm@unl.edu",
    packages=[
        "surfcalc",
    ],
    package_dir={"surfcalc": "surfcalc"},
    py_modules=[
        "surfcalc/cli",
        "surfcalc/config",
        "surfcalc/endspace",
        "surfcalc/errors",
        "surfcalc/exhaustion",
        "surfcalc/logger",
        "surfcalc/mcgword",
        "surfcalc/pants",
        "surfcalc/paths",
        "surfcalc/shiftbasis",
        "surfcalc/surface",
    ],
    package_data={
        "surfcalc": ["resources/params/*.yml", "resources/surfaces/*.json"],
    },
    include_package_data=True,
    install_requires=requirements,
    zip_safe=False,
    keywords="surfcalc",
    classifiers=[
        "Intended Audience :: Developers",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: Implementation :: PyPy",
    ],
    entry_points={"console_scripts": ["surfcalc=surfcalc.cli:main"]},
)
