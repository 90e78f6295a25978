"""Exact dimer dynamics on bipartite torus graphs and Q-system conserved quantities.

The package is organized around a handful of exact carriers:

* ``algebra``       -- multivariate Laurent polynomials and rational matrices
* ``graph``         -- bipartite torus graphs with rotation systems and homology
* ``matchings``     -- perfect matchings, weights, relative cycles
* ``cluster``       -- cluster seeds, Y-seeds, mutations, tau coordinates
* ``moves``         -- urban renewal, 2-valent shrinking, graph mutation
* ``hamiltonians``  -- homology-graded matching partition functions
* ``qsystems``      -- Q-system recurrences, certified graph builders
* ``hardparticles`` -- simple-loop alphabets and independent-set sums
* ``poisson``       -- log-canonical brackets, commutation and Casimir checks
* ``cli``           -- JSON command line surface

Everything is exact: coefficients are ``fractions.Fraction`` throughout and all
checks are equalities, never tolerances.
"""

__version__ = "0.1.0"
