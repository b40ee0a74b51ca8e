#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

from setuptools import setup, find_packages

with open('README.md') as readme_file:
    readme = readme_file.read()

test_requirements = ['pytest>=3', ]

setup(
    python_requires='>=3.9',
    classifiers=[
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    description="Maass-Hecke cusp forms, Kuznetsov checks and quantum ergodicity statistics",
    install_requires=['numpy', 'scipy', 'mpmath', 'pyyaml',
    'pydantic>=2', 'typing_extensions', 'tqdm', 'pandas', 'pytest'],
    license="BSD 3-Clause",
    long_description=readme,
    long_description_content_type='text/markdown',
    include_package_data=True,
    keywords='maassqe',
    name='maassqe',
    packages=find_packages(include=['maassqe', 'maassqe.*']),
    test_suite='tests',
    tests_require=test_requirements,
    version='0.1.0',
    zip_safe=False,
    entry_points={
        'console_scripts': [
            'maassqe = maassqe.kernel:main',
        ],
    }
)
