"""
Setup configuration for the rsp-cycles application.
Installs the ``rspcycles`` command and makes the app importable during testing.
"""

from setuptools import setup, find_packages

setup(
    name='rsp-cycles',
    version='1.0.0',
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    install_requires=[
        # Pinned versions are in requirements.txt
        'Flask>=3.0',
        'Flask-SQLAlchemy>=3.1',
        'Flask-Limiter>=3.8',
        'python-dotenv>=1.0',
        'numpy>=1.26',
        'scipy>=1.11',
    ],
    entry_points={
        'console_scripts': [
            'rspcycles=app.utils.cli:main',
        ],
    },
    python_requires='>=3.10',
)
