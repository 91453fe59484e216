from setuptools import setup, find_packages

import entbound

# Load the requirements list
with open("requirements.txt", "r") as fh:
    requires = fh.readlines()

setup(
    name="entbound",
    version=entbound.__version__,
    packages=find_packages(exclude=["tests"]),
    install_requires=requires,
    extras_require={"test": ["pytest", "hypothesis"]},
    entry_points="""
        [console_scripts]
        entbound=entbound.scripts.entbound:cli
    """,
    # metadata for upload to PyPI
    description="Measurable lower and upper bounds on concurrence",
    license="GPL v3.0",
)
