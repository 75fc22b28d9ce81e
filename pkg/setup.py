#!/usr/bin/env python
from setuptools import setup

setup(
    name='pydlista',
    version='0.1.0',
    description='Debiased LISTA: confidence intervals for unrolled sparse recovery',
    author='pydlista developers',
    packages=['pydlista', 'pydlista.test'],
    package_dir={'pydlista': 'pydlista'},
    package_data={'pydlista': ['docs/*.txt']},
    install_requires=['numpy>=1.20', 'scipy>=1.6'],
    python_requires='>=3.8',
    entry_points={
        'console_scripts': ['pydlista = pydlista.cli:main'],
    },
    long_description="""
    This package provides the Python "pydlista" module, which trains learned
    ISTA networks (LISTA-CP) for compressed sensing, debiases their output
    with a one-step correction and builds componentwise confidence intervals
    for the sparse signal.  A Monte Carlo harness measures how often the
    intervals cover the ground truth, both for trained networks and for the
    exact-oracle case, and exports the results as plain CSV and INI files.""",

    keywords='compressed sensing sparse recovery ISTA LISTA debiasing '
             'confidence intervals uncertainty quantification',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License (GPL)',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        ],
    license='GPL',
      )
