import math

import numpy as np
import pytest

from wickfield.clustering import (
    GAMMA,
    Observable,
    clustering_norm,
    joint_theorem_check,
    l1_divergence_probe,
    lemma_check,
    magnitude_constants,
    observable_covariance,
    phi_kernel,
    theorem41_check,
)
from wickfield.cumulants import CumulantTable
from wickfield.fields import (
    IidComplexGaussianField,
    IidRealGaussianField,
    random_discrete_field,
    sinc_coupling_example,
)
from wickfield.indexing import SiteRef


def test_gamma_constant():
    assert GAMMA == pytest.approx(2 * math.e)


def test_clustering_norm_iid_real():
    f = IidRealGaussianField()
    box = list(range(-5, 6))
    assert clustering_norm(f, 2, 1, box).value == pytest.approx(1.0)
    assert clustering_norm(f, 2, math.inf, box).value == pytest.approx(1.0)
    assert clustering_norm(f, 3, 1, box).value == 0.0
    assert clustering_norm(f, 1, 1, box).value == 0.0


def test_clustering_norm_circular_complex_unconjugated():
    # the norm sums cumulants of the bare (unconjugated) variables; for a
    # circularly symmetric complex field E[phi phi] = 0, so the norm vanishes
    f = IidComplexGaussianField()
    assert clustering_norm(f, 2, 1, list(range(-3, 4))).value == 0.0


def test_clustering_norm_discrete_anchor_sup(rng):
    # non-invariant field: the sup must scan every anchor
    f = random_discrete_field(rng, sites=[0, 1, 2])
    table = CumulantTable(f)
    per_anchor = []
    for a in f.sites:
        per_anchor.append(sum(abs(table.cumulant((SiteRef(a), SiteRef(b))))
                              for b in f.sites))
    rep = clustering_norm(f, 2, 1, list(f.sites))
    assert rep.value == pytest.approx(max(per_anchor))


def test_magnitude_constants_monotone():
    f = IidRealGaussianField()
    M = magnitude_constants(f, 1, 6, list(range(-3, 4)))
    vals = list(M.values)
    assert vals == sorted(vals)
    # only n = 2 contributes: M = (1/2!)^(1/2)
    assert M.top() == pytest.approx(1 / math.sqrt(2))


def test_phi_kernel_iid_complex_orthonormal():
    f = IidComplexGaussianField()
    box = list(range(-2, 3))
    row = phi_kernel(f, 1, (0,), box)
    for x, v in row.values.items():
        want = 1.0 if x == (0,) else 0.0
        assert v == pytest.approx(want, abs=1e-12)
    # order 2: E[:phi(0)*^2: :phi(x)^2:] = 2 delta pairings on the diagonal
    row2 = phi_kernel(f, 2, (0, 0), box)
    assert row2.values[(0, 0)] == pytest.approx(2.0)
    assert row2.values[(0, 1)] == pytest.approx(0.0, abs=1e-12)


def test_lemma_chain_iid(rng):
    f = IidRealGaussianField()
    box = list(range(-5, 6))
    rep = lemma_check(f, 1, 1, (0,), box)
    assert rep.flag
    assert rep.witnesses["flag_lhs_le_middle"]
    assert rep.witnesses["flag_middle_le_rhs"]
    assert rep.lhs == pytest.approx(1.0)
    assert rep.witnesses["middle"] == pytest.approx(1.0)
    assert rep.rhs == pytest.approx(math.e ** 2)

    rep2 = lemma_check(f, 2, 1, (0, 0), list(range(-3, 4)))
    assert rep2.flag
    assert rep2.witnesses["flag_lhs_le_middle"]
    assert rep2.witnesses["flag_middle_le_rhs"]


def test_lemma_chain_discrete(rng):
    f = random_discrete_field(rng, sites=[0, 1])
    rep = lemma_check(f, 1, 1, (0,), [0, 1])
    assert rep.witnesses["flag_lhs_le_middle"]
    assert rep.witnesses["flag_middle_le_rhs"]
    assert rep.flag


def test_theorem41_item1_sinc():
    f = sinc_coupling_example()
    box = [("phi", x) for x in range(-2000, 2001)]
    norm_box = [("phi", x) for x in range(-20, 21)]
    rep = theorem41_check(f, Observable.of_site(("psi", 0)), 1, 1, box,
                          norm_box=norm_box)
    assert rep.flag
    assert rep.lhs == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert rep.rhs == pytest.approx(math.e)
    assert rep.witnesses["cov"] == pytest.approx(1.0)


def test_theorem41_item2_weighted_iid():
    f = IidRealGaussianField()
    box = list(range(-4, 5))
    X = Observable.of_site(0)
    for n in (1, 2):
        rep = theorem41_check(f, X, n, 2, box)
        assert rep.flag
        if n >= 2:
            assert rep.lhs == 0.0  # Gaussian: order n+1 >= 3 cumulants vanish


def test_theorem41_rejects_bad_p():
    f = IidRealGaussianField()
    with pytest.raises(ValueError):
        theorem41_check(f, Observable.of_site(0), 1, 3, [0])


def test_joint_theorem_sinc_m1_n1():
    f = sinc_coupling_example()
    phi_box = [("phi", x) for x in range(-2000, 2001)]
    rep = joint_theorem_check(
        f, 1, 1, 1, [("psi", 0)], phi_box,
        psi_norm_box=[("psi", x) for x in range(-10, 11)],
        phi_norm_box=[("phi", x) for x in range(-10, 11)])
    assert rep.flag
    assert rep.lhs == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert rep.rhs == pytest.approx(4 * math.e ** 2)
    assert rep.witnesses["M_joint"] == pytest.approx(1 / math.sqrt(2))


def test_joint_m1_reduces_to_covariance_bound():
    # m = 1 computes the same l2 sum as the single-observable check
    f = sinc_coupling_example()
    phi_box = [("phi", x) for x in range(-500, 501)]
    norm = [("phi", x) for x in range(-10, 11)]
    joint = joint_theorem_check(
        f, 1, 1, 1, [("psi", 0)], phi_box,
        psi_norm_box=[("psi", x) for x in range(-10, 11)], phi_norm_box=norm)
    single = theorem41_check(f, Observable.of_site(("psi", 0)), 1, 1, phi_box,
                             norm_box=norm)
    assert joint.lhs == pytest.approx(single.lhs, abs=1e-12)


def test_joint_theorem_gaussian_higher_orders_zero():
    f = sinc_coupling_example()
    phi_box = [("phi", x) for x in range(-20, 21)]
    for m, n in [(1, 2), (2, 1), (2, 2)]:
        rep = joint_theorem_check(
            f, m, n, 1, [("psi", 0)], phi_box,
            psi_norm_box=[("psi", x) for x in range(-10, 11)])
        assert rep.lhs == 0.0
        assert rep.flag


def test_joint_theorem_discrete_all_orders(two_field_provider):
    f = two_field_provider
    psi_sites = [("psi", 0), ("psi", 1)]
    phi_sites = [("phi", 0), ("phi", 1)]
    for m in (1, 2):
        for n in (1, 2):
            for p in (1, 2):
                rep = joint_theorem_check(f, m, n, p, psi_sites, phi_sites)
                assert rep.flag, (m, n, p)


def test_joint_theorem_lhs_matches_brute_force(two_field_provider):
    f = two_field_provider
    table = CumulantTable(f)
    psi_sites = [("psi", 0), ("psi", 1)]
    phi_sites = [("phi", 0), ("phi", 1)]
    rep = joint_theorem_check(f, 1, 1, 1, psi_sites, phi_sites, table=table)
    best = 0.0
    for xp in psi_sites:
        acc = sum(abs(table.cumulant((SiteRef(xp), SiteRef(x)))) ** 2
                  for x in phi_sites)
        best = max(best, math.sqrt(acc))
    assert rep.lhs == pytest.approx(best, abs=1e-12)


def test_observable_covariance_nonnegative(rng):
    f = random_discrete_field(rng, sites=[0, 1])
    table = CumulantTable(f)
    X = Observable([(1.0, (SiteRef(0),)), (0.5, (SiteRef(0), SiteRef(1)))])
    assert observable_covariance(table, X) >= 0


def test_observable_conjugate():
    X = Observable([(1j, (SiteRef(0),))])
    Xc = X.conjugate()
    assert Xc.terms[0][0] == -1j
    assert Xc.terms[0][1][0].conj is True


def test_divergence_probe_sinc():
    f = sinc_coupling_example()
    p1 = l1_divergence_probe(f, [100, 1000, 10000], exponent=1)
    assert p1.odd_harmonic_coefficient == pytest.approx(2 / math.pi, rel=1e-3)
    assert p1.slope_vs_log_radius == pytest.approx(1 / math.pi, rel=0.01)
    sums = [s for _, s in p1.rows]
    assert sums == sorted(sums)  # diverging partial sums

    p2 = l1_divergence_probe(f, [100, 1000, 10000], exponent=2)
    assert p2.rows[-1][1] == pytest.approx(0.5, abs=1e-3)
    assert p2.odd_harmonic_coefficient is None
