"""Computational companion to the bounded-gaps-between-primes argument.

Submodules:

- ``arith``: prime tables and multiplicative functions
- ``tuples``: admissible tuples and their constants
- ``sieve``: restricted Λ²-sieve weights and the ``G``, ``G'`` sums
- ``dde``: the sieve delay equation
- ``interval``, ``constants``: certified numerical conditions
- ``decompose``: Heath-Brown's identity and the exponent classifier
- ``expsums``: Ramanujan, Kloosterman and correlation sums, the dispersion split
- ``equidist``: primes and divisor sums in residue classes
"""

__version__ = "0.1.0"
