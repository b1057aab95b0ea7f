import setuptools

setuptools.setup(
    name="fracdiff",
    version="0.1.0",
    author="fracdiff developers",
    description="Fast Riemann-Liouville fractional integrals via diffusive representations",
    long_description="Library and command-line tool for evaluating fractional integrals of order 0 < alpha < 1 "
                     "with Gauss-Laguerre diffusive quadrature, exponential-sum kernel compression and "
                     "local/history splitting, checked against product-integration references.",
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=['tests']),
    install_requires=[
        'numpy',
        'scipy',
        'pandas>=1.5',
        'scikit-learn',
        'joblib',
    ],
    entry_points={
        'console_scripts': ['fracdiff=fracdiff.cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
