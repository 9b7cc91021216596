try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

with open('README.md', encoding="utf-8") as f:
    _readme = f.read()

_install_requires = [
    'deepmerge==1.1.1',
    'pyyaml~=6.0.2',
    'numpy>=1.22',
    'scipy>=1.12'
]

_tests_require = [
    'pytest>=7'
]

setup(
    name='kinstils',
    version="0.1.0",
    description='Space-time least-squares transport solver and Poincare constant verification',
    long_description=_readme + '\n\n',
    long_description_content_type='text/markdown',
    author='Adobe',
    author_email='noreply@adobe.com',
    python_requires=">=3.9",
    license='Apache2',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],
    packages=['kinstils'],
    include_package_data=True,
    install_requires=_install_requires,
    extras_require={
        'test': _tests_require
    },
    entry_points={
        'console_scripts': [
            'kinstils = kinstils.main:run'
        ]
    }
)
