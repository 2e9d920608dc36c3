"""Setup script for julia-pressure."""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="julia-pressure",
    version="0.1.0",
    author="Your Name",
    description="Tree pressure, hidden pressure, Lyapunov spectra and conformal measures of rational maps",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=("examples", "examples.*")),
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy==1.26.4",
        "scipy==1.11.4",
        "python-dotenv==1.0.0",
    ],
    extras_require={
        "dev": [
            "pytest==7.4.3",
        ],
    },
    entry_points={
        "console_scripts": [
            "julia-pressure=julia_pressure.main:main",
        ],
    },
)
