"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately avoid the library's own recursions:

* ``brute_partitions`` enumerates set partitions by direct recursion
  (place element n into each existing block or a new one).
* ``mobius_cumulant`` computes cumulants by Mobius inversion over the
  partition lattice, kappa = sum_pi (-1)^(|pi|-1) (|pi|-1)! prod E[y^A].
* ``direct_wick_product_expectation`` multiplies out the Wick polynomials
  monomial by monomial and takes the expectation term-wise.
"""

import math

import numpy as np
import pytest

from wickfield.cumulants import WickExpansion, wick_expansion
from wickfield.fields import random_discrete_field
from wickfield.indexing import SiteRef, subsequence


def brute_partitions(n):
    """All set partitions of range(n), each a frozenset of frozensets."""
    if n == 0:
        return [frozenset()]
    out = []
    for part in brute_partitions(n - 1):
        blocks = list(part)
        for i in range(len(blocks)):
            grown = blocks[:i] + [blocks[i] | {n - 1}] + blocks[i + 1:]
            out.append(frozenset(grown))
        out.append(frozenset(blocks + [frozenset({n - 1})]))
    return out


def mobius_cumulant(provider, sequence):
    """kappa[y_I] by Mobius inversion over the partition lattice."""
    total = 0.0 + 0.0j
    for part in brute_partitions(len(sequence)):
        sign = (-1) ** (len(part) - 1) * math.factorial(len(part) - 1)
        prod = 1.0 + 0.0j
        for block in part:
            prod *= provider.moment(subsequence(sequence, sorted(block)))
        total += sign * prod
    return total


def direct_wick_product_expectation(provider, groups, tail=()):
    """E[prod_l :y^(J_l): * y^(J')] by explicit polynomial multiplication."""
    poly = WickExpansion({(): 1.0 + 0.0j})
    for group in groups:
        poly = poly * wick_expansion(provider, group)
    if tail:
        poly = poly * WickExpansion({tuple(tail): 1.0 + 0.0j})
    return poly.expectation(provider)


def refs(*labels):
    return tuple(SiteRef(lab) for lab in labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def discrete_field(rng):
    return random_discrete_field(rng, sites=[0, 1, 2])


@pytest.fixture
def two_field_provider(rng):
    sites = [("psi", 0), ("psi", 1), ("phi", 0), ("phi", 1)]
    return random_discrete_field(rng, sites=sites)
