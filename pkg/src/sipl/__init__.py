"""Short-interval prime laboratory.

Counts intervals ``[n, n + lam log n]`` by their number of primes, builds and
checks admissible tuples, scans for windows whose primes sit at tuple
offsets, and evaluates the related divisor sums and bounds.
"""

__version__ = "0.1.0"
