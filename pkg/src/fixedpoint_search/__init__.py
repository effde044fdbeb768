"""Fixed-point quantum search: the recursive pi/3 phase-shift algorithm, the
two-ancilla measurement-based algorithm, and the baselines they are compared with."""

__version__ = "0.1.0"
