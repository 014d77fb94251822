"""Haar averages of multi-time correlators of a random unitary: exact Weingarten
oracle, seeded Monte Carlo, leading-order OTOC evaluation and cobweb diagrams."""

__version__ = "0.1.0"
