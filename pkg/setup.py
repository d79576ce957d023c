import os
from setuptools import setup


def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()


setup(
    name="noethercheck",
    version="0.1.0dev",
    description="Symbolic and numeric verification of Noether symmetries and "
    "conservation laws of damped nonlinear wave equations.",
    license="MIT",
    packages=["noethercheck"],
    package_data={"noethercheck": [os.path.join("data", "examples", "*.csv")]},
    long_description=read("README.rst"),
    long_description_content_type="text/x-rst",
    zip_safe=False,
    python_requires=">=3.8, <4",
    install_requires=[
        "numpy >= 1.20",
        "pandas >= 1.2",
        "scipy >= 1.6",
        "matplotlib >= 3.3",
        "sympy >= 1.9",
    ],
    extras_require={
        "dev": [
            "pytest >= 6.2",
            "hypothesis >= 6.0",
            "black",
            "coverage",
            "sphinx_rtd_theme",
        ]
    },
    entry_points={"console_scripts": ["noethercheck=noethercheck.cli:main"]},
)
