#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

import os
import re
import codecs
from setuptools import setup, find_packages

requirements = [
    "numpy>=1.19",
    "scipy>=1.6",
    "pandas>=0.23.4",
    "parse>=1.9, <2.0",
    "f90nml>=1.0.2",
]


with open('README.md') as readme_file:
    readme = readme_file.read()

with open('CHANGELOG.rst') as changelog_file:
    changelog = changelog_file.read()

with open('requirements_dev.txt') as reqd_file:
    requirements_dev = reqd_file.read().split()


def find_version(*file_paths):
    """Recommended way of getting the version without importing helmpy from
    https://packaging.python.org/guides/single-sourcing-package-version"""
    fp = os.path.join(os.path.abspath(os.path.dirname(__file__)), *file_paths)
    with codecs.open(fp, 'r') as fp:
        version_file = fp.read()
    version_match = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]",
                              version_file, re.M)
    if version_match:
        return version_match.group(1)
    raise RuntimeError("Unable to find version string.")


setup(
    name='helmpy',
    version=find_version("helmpy", "__init__.py"),
    description="Adaptive front-tracking finite elements for time domain "
                "Helmholtz problems.",
    long_description=readme + '\n\n' + changelog,
    long_description_content_type='text/markdown',
    author="helmpy developers",
    packages=find_packages(exclude=['tests', 'docs']),
    include_package_data=True,
    install_requires=requirements,
    license="MIT license",
    zip_safe=False,
    keywords='helmholtz wave-equation finite-elements adaptive-mesh',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    entry_points={
        'console_scripts': ['helmpy=helmpy.cli:main'],
    },
    python_requires='>=3.7',
    test_suite='tests',
    tests_require=requirements_dev,
)
