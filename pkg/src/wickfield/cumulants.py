"""Moment/cumulant conversion and Wick polynomials over a moment provider.

Cumulants follow the anchored recursion

    kappa[y_I] = E[y^I] - sum_{E: x in E, E proper subset of I} E[y^(I\\E)] kappa[y_E]

with the anchor x taken as the first position in canonical order (any anchor
gives the same value; pick-independence is a property test).  Wick polynomials
follow

    :y^I: = y^I - sum_{E proper subset of I} E[y^(I\\E)] :y^E:

and expectations of products of Wick monomials expand over restricted
partitions only (no block internal to a single Wick group).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from itertools import combinations
from threading import Lock

from .indexing import IndexSequence, SiteRef, canonical, seq_sort_key, subsequence
from .partitions import (
    DEFAULT_SIZE_GUARD,
    enumerate_partitions,
    enumerate_restricted,
)


class OrderOverflowError(ValueError):
    """Requested cumulant/moment order exceeds the provider's declared max."""


class MomentProvider(ABC):
    """Source of joint moments E[y^I].

    Implementations must be permutation invariant in the index sequence,
    return 1 for the empty sequence, and satisfy the conjugation consistency
    moment(I*) = conj(moment(I)).
    """

    max_order: int = 8
    #: set by jointly Gaussian providers; enables exact zero fast paths for
    #: cumulants of order != 2
    is_gaussian: bool = False

    @abstractmethod
    def moment(self, sequence: IndexSequence) -> complex:
        ...

    def mean(self, ref: SiteRef) -> complex:
        return self.moment((ref,))

    def check_order(self, order: int):
        if order > self.max_order:
            raise OrderOverflowError(
                f"order {order} exceeds provider max_order {self.max_order}"
            )


def _variable_moment(provider, variables) -> complex:
    """Moment of a product of monomial variables (each a tuple of SiteRefs)."""
    flat = tuple(ref for mono in variables for ref in mono)
    return provider.moment(flat)


class CumulantTable:
    """Memoized cumulants kappa[y_I] over a backing provider.

    Entries are stored under the permutation-invariant canonical key; writes
    of identical keys are idempotent, so concurrent readers/inserters are
    safe under the GIL plus the insert lock.
    """

    def __init__(self, provider: MomentProvider):
        self.provider = provider
        self._memo = {}
        self._lock = Lock()

    def cumulant(self, sequence: IndexSequence, anchor: int = 0) -> complex:
        """kappa of single field variables, one per position of the sequence."""
        return self.joint_cumulant(tuple((ref,) for ref in sequence), anchor=anchor)

    def joint_cumulant(self, variables, anchor: int = 0) -> complex:
        """kappa[v_1, ..., v_k] where each v_i is a monomial in field variables.

        Monomials act as compound random variables; moments of partial
        products come from the backing provider.
        """
        variables = tuple(canonical(mono) for mono in variables)
        if not variables:
            raise ValueError("cumulant of an empty collection is undefined")
        total = sum(len(mono) for mono in variables)
        self.provider.check_order(total)
        if self.provider.is_gaussian and all(len(m) == 1 for m in variables):
            return self._gaussian_cumulant(variables)
        return self._recurse(tuple(sorted(variables, key=seq_sort_key)), anchor)

    def _gaussian_cumulant(self, variables) -> complex:
        # jointly Gaussian, zero mean: only the second cumulant survives
        if len(variables) == 2:
            return self.provider.covariance(variables[0][0], variables[1][0])
        if len(variables) == 1:
            return self.provider.moment(variables[0])
        return 0.0

    def _recurse(self, key, anchor: int) -> complex:
        if anchor == 0:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        k = len(key)
        value = _variable_moment(self.provider, key)
        if k > 1:
            rest = [i for i in range(k) if i != anchor]
            # subsets E with the anchor variable, E a proper subset
            for size in range(0, k - 1):
                for extra in combinations(rest, size):
                    positions = (anchor,) + extra
                    sub = tuple(sorted((key[i] for i in positions), key=seq_sort_key))
                    comp = tuple(key[i] for i in rest if i not in extra)
                    value -= _variable_moment(self.provider, comp) * self._recurse(sub, 0)
        if anchor == 0:
            with self._lock:
                self._memo.setdefault(key, value)
        return value


def cumulant(provider: MomentProvider, sequence: IndexSequence, anchor: int = 0) -> complex:
    """kappa[y_I] of single field variables; convenience over CumulantTable."""
    return CumulantTable(provider).cumulant(sequence, anchor=anchor)


def moments_from_cumulants(table: CumulantTable, sequence: IndexSequence,
                           size_guard: int = DEFAULT_SIZE_GUARD) -> complex:
    """E[y^I] = sum over partitions of I of the product of block cumulants."""
    n = len(sequence)
    total = 0.0 + 0.0j
    for part in enumerate_partitions(n, size_guard=size_guard):
        prod = 1.0 + 0.0j
        for block in part.blocks:
            prod *= table.cumulant(subsequence(sequence, block))
        total += prod
    return total


@dataclass
class WickExpansion:
    """:y^I: as a polynomial in the underlying variables.

    ``terms`` maps a canonical monomial (tuple of SiteRefs) to its complex
    coefficient; the empty monomial is the constant term.
    """

    terms: dict = field(default_factory=dict)

    def expectation(self, provider: MomentProvider) -> complex:
        return sum(c * provider.moment(mono) for mono, c in self.terms.items())

    def scaled(self, factor: complex) -> "WickExpansion":
        return WickExpansion({m: factor * c for m, c in self.terms.items()})

    def __add__(self, other: "WickExpansion") -> "WickExpansion":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0.0) + c
        return WickExpansion(out)

    def __mul__(self, other: "WickExpansion") -> "WickExpansion":
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = canonical(m1 + m2)
                out[mono] = out.get(mono, 0.0) + c1 * c2
        return WickExpansion(out)


def wick_expansion(provider: MomentProvider, sequence: IndexSequence) -> WickExpansion:
    """Expand :y^I: recursively; the leading term is y^I with coefficient 1."""
    provider.check_order(len(sequence))
    memo = {}

    def rec(seq_canon):
        hit = memo.get(seq_canon)
        if hit is not None:
            return hit
        n = len(seq_canon)
        terms = {seq_canon: 1.0 + 0.0j}
        positions = range(n)
        for size in range(0, n):
            for sub in combinations(positions, size):
                comp = tuple(i for i in positions if i not in sub)
                weight = provider.moment(subsequence(seq_canon, comp))
                inner = rec(canonical(subsequence(seq_canon, sub)))
                for mono, c in inner.terms.items():
                    terms[mono] = terms.get(mono, 0.0) - weight * c
        result = WickExpansion(terms)
        memo[seq_canon] = result
        return result

    return rec(canonical(sequence))


def wick_product_expectation(provider: MomentProvider, groups, tail=(),
                             table: CumulantTable | None = None,
                             size_guard: int = DEFAULT_SIZE_GUARD) -> complex:
    """E[ prod_l :y^(J_l): * y^(J') ] via the restricted partition expansion.

    Sums the product of block cumulants over partitions of the concatenation
    of the groups and the tail in which no block is internal to a single
    group.
    """
    flat = tuple(ref for g in groups for ref in g) + tuple(tail)
    provider.check_order(len(flat))
    if table is None:
        table = CumulantTable(provider)
    total = 0.0 + 0.0j
    for part in enumerate_restricted(groups, tail, size_guard=size_guard):
        prod = 1.0 + 0.0j
        for block in part.blocks:
            prod *= table.cumulant(subsequence(flat, block))
            if prod == 0:
                break
        total += prod
    return total


def generating_check(provider, sequence: IndexSequence, h: float = 1e-3,
                     tol: float | None = None):
    """Compare the cumulant against a finite difference of ln G_m at 0.

    The provider must expose ``log_generating_function(lam)`` with ``lam`` a
    dict from site label to a real argument.  Central differences are O(h^2)
    accurate; the default tolerance budgets rounding on top of that.
    """
    from .reports import BoundReport

    if not hasattr(provider, "log_generating_function"):
        raise TypeError("provider has no closed-form generating function")
    if len(sequence) > 4:
        raise OrderOverflowError("generating-function check supports order <= 4")

    def deriv(refs, lam):
        if not refs:
            return provider.log_generating_function(lam)
        head, rest = refs[0], refs[1:]
        up = dict(lam)
        up[head] = up.get(head, 0.0) + h
        dn = dict(lam)
        dn[head] = dn.get(head, 0.0) - h
        return (deriv(rest, up) - deriv(rest, dn)) / (2 * h)

    fd = deriv(tuple(sequence), {})
    exact = cumulant(provider, sequence)
    if tol is None:
        tol = 100 * h * h + 1e-9
    return BoundReport(
        inequality_id="generating-function-cumulant",
        lhs=abs(fd - exact),
        rhs=tol,
        witnesses={"order": len(sequence), "h": h,
                   "finite_difference": fd, "cumulant": exact},
    )
