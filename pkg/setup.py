from setuptools import setup

setup(name='gmwmx',
      version='0.9.0',
      packages=['gmwmx', 'gmwmx.tests'],
      license='LICENSE.txt',
      description='Wavelet-moment estimation of trajectories and noise in gappy position series.',
      long_description=open('README.rst').read(),
      install_requires=[
        'numpy>=1.17',
        'scipy>=1.6',
        'pandas>=1.0',
        'joblib>=0.14',
        ],
      entry_points={
        'console_scripts': ['gmwmx = gmwmx.cli:main'],
        },
      classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
        'Topic :: Software Development :: Libraries :: Python Modules'
        ])
