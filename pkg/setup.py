#!/usr/bin/env python
"""See <https://setuptools.readthedocs.io/en/latest/>.
"""
from setuptools import setup, find_packages


setup(
    # Publication Metadata:
    version='0.1.0',
    name='bubbletower',
    description="Numerical laboratory for nodal bubble-tower solutions of the critical equation",
    # long_description="",
    license='Mozilla Public License Version 2.0',
    classifiers=[
        'License :: OSI Approved :: Mozilla Public License 2.0 (MPL 2.0)',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.6',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],


    # Entry points:
    entry_points={
        'console_scripts': [
            'bubbletower = bubbletower.main:main'
        ],
    },


    # Packages and Package Data:
    package_dir={'': 'src'},
    packages=find_packages('src'),
    package_data={
        'bubbletower': ['config_schema*.json', 'config_default.yml']
    },


    # Requirements:
    install_requires=[
        'datapunt-config-loader==1.0.0',
        'jsonschema',
        'numpy>=1.17',  # numpy.random.default_rng
        'PyYaml<6',  # datapunt-config-loader 1.0.0 calls yaml.load() without Loader
        'scipy',
    ],
    extras_require={
        'docs': [
            'Sphinx',
            'sphinx-autobuild',
            'sphinx-autodoc-typehints',
            'sphinx_rtd_theme',
        ],
        'test': [
            'pytest',
            'pytest-cov',
        ],
        'dev': [
            'jupyter',
        ]
    },
)
