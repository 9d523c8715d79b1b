from setuptools import setup

setup(
    name="ctop-solver",
    version="1.0",
    description="Contiguous trilateration ordering: checks, propagation search and benchmarks",
    license="MIT",
    packages=["ctop", "ctop.solvers", "ctop.config"],
    package_data={
        "ctop": ["fixtures/*.ctop", "fixtures/*.expect"],
        "ctop.config": ["*.cfg"],
    },
    install_requires=[
        "numpy==1.*",
        "networkx==3.*",
        "ortools==9.*",
        "pytest==7.*",
        "Flask==2.2.2",
        "Werkzeug==2.3.7",
        "pre-commit==2.*",
        "flake8==3.8.4",
        "psutil",
    ],
    entry_points={"console_scripts": ["ctop=ctop.__main__:main"]},
    zip_safe=False,
)
