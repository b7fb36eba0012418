"""
Setup script for the surfdist package.
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="surfdist",
    version="0.1.0",
    description="Minimum distance between parametric surfaces by damped mechanical dynamics",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="Nghi Studio",
    author_email="nghimestudio@gmail.com",
    url="https://github.com/nghimestudio/surfdist",
    packages=find_packages(include=["surfdist", "surfdist.*"]),
    package_data={
        "surfdist": ["data/*.json"],
    },
    include_package_data=True,
    install_requires=["numpy", "scipy>=1.7", "pyparsing>=3.1"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["surfdist=surfdist.cli:main"]},
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Software Development :: Libraries :: Python Modules",
    ],
    keywords=["geometry", "minimum-distance", "riemannian", "christoffel", "ode", "collision"],
    zip_safe=False,
)
