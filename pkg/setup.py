from setuptools import setup, find_packages

setup(
    name="mmgesture",
    version="0.1.0",
    description="mmWave radar gesture recognition laboratory: DRAI processing, augmentation, segmentation and classification",
    author="mmgesture Team",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "torch>=2.0",
        "pydantic>=2.0.0",
        "pyyaml>=6.0",
        "textual>=0.40.0",
        "plotext>=5.2.8,<6",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "mmgesture=mmgesture.cli:main",
        ],
    },
)
