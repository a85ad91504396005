from setuptools import find_namespace_packages, setup

setup(
    name="risk-sharing-price",
    description="Risk sharing prices for non-replicable claims in incomplete markets.",
    version="0.1.0",
    author="Michael Leng",
    author_email="michael@len.gy",
    url="https://len.gy",
    install_requires=[
        "typer[all]",
        "rich",
        "numpy",
        "scipy"
    ],
    extras_require={
        "test": [
            "pytest",
            "hypothesis"
        ]
    },
    packages=find_namespace_packages(include=["commands", "entities", "pricing", "util"]),
    py_modules=["rsp"],
    license="MIT",
    entry_points={
        "console_scripts": [
            "rsp=rsp:main"
        ]
    }
)
