from setuptools import setup, find_packages

setup(
    name="soclearn",
    version="1.0.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "lxml>=4.9.0",
        "numpy>=1.22",
        "pandas>=1.4",
        "scipy>=1.8",
    ],
    extras_require={
        "plot": ["matplotlib>=3.5"],
        "test": ["pytest>=7.0", "statsmodels>=0.13"],
    },
    entry_points={
        "console_scripts": ["soclearn=soclearn.cli:main"],
    },
    description="Naive and rational social learning on random observation networks",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
