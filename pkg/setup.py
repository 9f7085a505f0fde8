import os
from pathlib import PurePath
from typing import List

from setuptools import find_packages, setup

__author__ = 'pfwgan'


version = '0.1.0'


def load_requirements(path: PurePath) -> List[str]:
    """ Load dependencies from a requirements.txt style file, ignoring comments etc. """
    res = []
    if not os.path.exists(path):
        return res
    with open(path) as fd:
        for line in fd.readlines():
            while line.endswith('\n') or line.endswith('\\'):
                line = line[:-1]
            line = line.strip()
            if not line or line.startswith('-') or line.startswith('#'):
                continue
            res += [line]
    return res


here = PurePath(__file__)
README = open(here.with_name('README.md')).read()

install_requires = load_requirements(here.with_name('requirements.txt'))
test_requires = load_requirements(here.with_name('test_requirements.txt'))


setup(
    name='pfwgan',
    version=version,
    description='Privacy- and fairness-penalised WGAN-GP synthesizer and evaluator for tabular data',
    long_description=README,
    long_description_content_type='text/markdown',
    classifiers=['Topic :: Scientific/Engineering :: Artificial Intelligence'],
    keywords='synthetic data, wgan-gp, fairness, privacy',
    license='BSD',
    packages=find_packages('src'),
    package_dir={'': 'src'},
    python_requires='>=3.8',
    zip_safe=False,
    install_requires=install_requires,
    tests_require=test_requires,
    extras_require={'testing': test_requires},
    entry_points={'console_scripts': ['pfwgan=pfwgan.cli:main']},
)
