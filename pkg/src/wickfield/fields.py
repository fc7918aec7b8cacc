"""Concrete random-field models backing the moment-provider interface.

Three families:

* :class:`FiniteDiscreteField` -- exact finite sample spaces, the brute-force
  oracle used throughout the tests;
* Gaussian covariance fields, including the translation-invariant spectral
  pair (psi, phi) on Z with cross-spectrum G-hat, and i.i.d. real/complex
  special cases;
* :class:`EnsembleEstimator` -- plug-in empirical moments from sampled
  realizations (bias O(1/N); k-statistics are out of scope).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .cumulants import MomentProvider
from .indexing import IndexSequence, SiteRef

DEFAULT_GRID = 4096


class PSDViolationError(ValueError):
    """Spectra fail the positive semi-definiteness conditions."""


def _as_ref(s) -> SiteRef:
    return s if isinstance(s, SiteRef) else SiteRef(s)


# ---------------------------------------------------------------------------
# exact finite distributions


class FiniteDiscreteField(MomentProvider):
    """Exact finite distribution over a handful of sites.

    ``atoms`` is a list of (probability, value-vector) pairs, one value per
    site.  Every moment is a weighted sum over atoms, exact up to rounding.
    """

    def __init__(self, sites, atoms, max_order: int = 10):
        self.sites = tuple(sites)
        self.atoms = tuple((float(p), tuple(complex(v) for v in values))
                           for p, values in atoms)
        self.max_order = max_order
        self._index = {s: i for i, s in enumerate(self.sites)}
        total = sum(p for p, _ in self.atoms)
        if any(p < 0 for p, _ in self.atoms):
            raise ValueError("negative atom probability")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total}, not 1")
        for _, values in self.atoms:
            if len(values) != len(self.sites):
                raise ValueError("atom value vector length != number of sites")

    def _value(self, values, ref: SiteRef) -> complex:
        try:
            v = values[self._index[ref.site]]
        except KeyError:
            raise KeyError(f"unknown site {ref.site!r}") from None
        return v.conjugate() if ref.conj else v

    def moment(self, sequence: IndexSequence) -> complex:
        total = 0.0 + 0.0j
        for p, values in self.atoms:
            prod = 1.0 + 0.0j
            for ref in sequence:
                prod *= self._value(values, ref)
            total += p * prod
        return total

    def log_generating_function(self, lam: dict) -> complex:
        """ln E[e^(lam . y)]; keys may be site labels or SiteRefs."""
        total = 0.0 + 0.0j
        for p, values in self.atoms:
            expo = sum(t * self._value(values, _as_ref(s)) for s, t in lam.items())
            total += p * np.exp(expo)
        return complex(np.log(total))


def exact_moment(field: FiniteDiscreteField, sequence: IndexSequence) -> complex:
    return field.moment(sequence)


def bernoulli_field(p: float, site=0) -> FiniteDiscreteField:
    return FiniteDiscreteField([site], [(1 - p, (0,)), (p, (1,))])


def rademacher_field(site=0) -> FiniteDiscreteField:
    return FiniteDiscreteField([site], [(0.5, (1,)), (0.5, (-1,))])


def random_discrete_field(rng, sites=None, n_atoms: int = 4,
                          max_order: int = 10) -> FiniteDiscreteField:
    """Random real-valued finite field; real atoms keep the field closed
    under conjugation, as the bound certifiers assume."""
    if sites is None:
        sites = list(range(rng.integers(1, 5)))
    probs = rng.random(n_atoms) + 0.05
    probs /= probs.sum()
    values = rng.uniform(-1.0, 1.0, size=(n_atoms, len(sites)))
    atoms = [(probs[i], tuple(values[i])) for i in range(n_atoms)]
    return FiniteDiscreteField(sites, atoms, max_order=max_order)


# ---------------------------------------------------------------------------
# Gaussian fields


class GaussianCovarianceField(MomentProvider):
    """Zero-mean jointly Gaussian field; moments are Isserlis pairing sums
    over a covariance kernel supplied by the subclass."""

    is_gaussian = True
    max_order = 8

    def covariance(self, a: SiteRef, b: SiteRef) -> complex:
        raise NotImplementedError

    def moment(self, sequence: IndexSequence) -> complex:
        n = len(sequence)
        if n == 0:
            return 1.0
        self.check_order(n)
        if n % 2 == 1:
            return 0.0
        return self._pairing_sum(tuple(sequence))

    def _pairing_sum(self, refs) -> complex:
        if not refs:
            return 1.0
        head, rest = refs[0], refs[1:]
        total = 0.0 + 0.0j
        for i, other in enumerate(rest):
            c = self.covariance(head, other)
            if c != 0:
                total += c * self._pairing_sum(rest[:i] + rest[i + 1:])
        return total


def gaussian_moment(field: GaussianCovarianceField, sequence: IndexSequence) -> complex:
    return field.moment(sequence)


class IidRealGaussianField(GaussianCovarianceField):
    """Independent real N(0, variance) variables at every site."""

    def __init__(self, variance: float = 1.0, max_order: int = 8):
        self.variance = variance
        self.max_order = max_order

    def covariance(self, a: SiteRef, b: SiteRef) -> complex:
        return self.variance if a.site == b.site else 0.0

    def log_generating_function(self, lam: dict) -> complex:
        return 0.5 * self.variance * sum(t * t for t in lam.values())

    def covariance_support_radius(self):
        return 0


class IidComplexGaussianField(GaussianCovarianceField):
    """Independent circularly symmetric complex Gaussians: E[|phi|^2] =
    variance, E[phi^2] = 0."""

    def __init__(self, variance: float = 1.0, max_order: int = 8):
        self.variance = variance
        self.max_order = max_order

    def covariance(self, a: SiteRef, b: SiteRef) -> complex:
        if a.site != b.site:
            return 0.0
        return self.variance if a.conj != b.conj else 0.0

    def covariance_support_radius(self):
        return 0


def check_psd(f1_hat, f2_hat, g_hat, grid: int = DEFAULT_GRID,
              tol: float = 1e-12) -> bool:
    """F1-hat >= 0, F2-hat >= 0 and |G-hat|^2 <= F1-hat * F2-hat on the grid."""
    k = np.arange(grid) / grid
    k = np.where(k >= 0.5, k - 1.0, k)
    f1 = np.asarray(f1_hat(k), dtype=float)
    f2 = np.asarray(f2_hat(k), dtype=float)
    g = np.asarray(g_hat(k))
    if np.min(f1) < -tol or np.min(f2) < -tol:
        return False
    return bool(np.max(np.abs(g) ** 2 - f1 * f2) <= tol)


class SpectralGaussianField(GaussianCovarianceField):
    """Translation-invariant zero-mean Gaussian pair (psi, phi) on Z.

    Sites are ("psi", x) or ("phi", x) with integer x.  Covariances are the
    inverse Fourier transforms of the spectra; the quadrature uses a uniform
    grid on the torus (one FFT yields the whole displacement table).  Closed
    forms, when supplied, take precedence over quadrature.
    """

    def __init__(self, f1_hat, f2_hat, g_hat, grid: int = DEFAULT_GRID,
                 closed_forms: dict | None = None, max_order: int = 8,
                 name: str = "spectral-gaussian"):
        if not check_psd(f1_hat, f2_hat, g_hat, grid=grid):
            raise PSDViolationError(
                "spectra violate F1>=0, F2>=0, |G|^2 <= F1*F2 on the grid")
        self.f1_hat = f1_hat
        self.f2_hat = f2_hat
        self.g_hat = g_hat
        self.grid = grid
        self.closed_forms = dict(closed_forms or {})
        self.max_order = max_order
        self.name = name
        self._tables = {}

    # spectra by pair key
    def _spectrum(self, which):
        return {"psipsi": self.f1_hat, "phiphi": self.f2_hat,
                "psiphi": self.g_hat}[which]

    def _table(self, which) -> np.ndarray:
        tab = self._tables.get(which)
        if tab is None:
            k = np.arange(self.grid) / self.grid
            k = np.where(k >= 0.5, k - 1.0, k)
            tab = np.fft.ifft(np.asarray(self._spectrum(which)(k), dtype=complex))
            self._tables[which] = tab
        return tab

    def covariance_profile(self, which, displacements) -> np.ndarray:
        """Covariance at integer displacements, vectorized."""
        displacements = np.asarray(displacements)
        fn = self.closed_forms.get(which)
        if fn is not None:
            return fn(displacements)
        if np.max(np.abs(displacements)) >= self.grid // 2:
            raise ValueError("displacement exceeds half the quadrature grid")
        tab = self._table(which)
        vals = tab[np.mod(displacements, self.grid)]
        return np.real_if_close(vals, tol=1e6)

    def pair_covariance(self, which, displacement) -> complex:
        return complex(self.covariance_profile(which, np.asarray([displacement]))[0])

    def covariance(self, a: SiteRef, b: SiteRef) -> complex:
        # real-valued fields: the conjugation flags are inert
        comp_a, x = a.site
        comp_b, y = b.site
        if comp_a == "psi" and comp_b == "psi":
            return self.pair_covariance("psipsi", x - y)
        if comp_a == "phi" and comp_b == "phi":
            return self.pair_covariance("phiphi", x - y)
        if comp_a == "psi":
            return self.pair_covariance("psiphi", x - y)
        return self.pair_covariance("psiphi", y - x)

    def log_generating_function(self, lam: dict) -> complex:
        refs = {_as_ref(s): t for s, t in lam.items()}
        total = 0.0 + 0.0j
        for a, ta in refs.items():
            for b, tb in refs.items():
                total += ta * tb * self.covariance(a, b)
        return 0.5 * total


def gaussian_covariance(field: SpectralGaussianField, which: str,
                        displacement: int) -> complex:
    """Covariance of the selected pair at a lattice displacement.

    ``which`` is one of "psipsi", "phiphi", "psiphi".
    """
    return field.pair_covariance(which, displacement)


def _sinc_g(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.sin(0.5 * np.pi * x) / (np.pi * x)
    return np.where(x == 0, 0.5, vals)


def sinc_coupling_example(grid: int = DEFAULT_GRID) -> SpectralGaussianField:
    """The i.i.d. pair with cross-spectrum the indicator of |k| < 1/4.

    F1-hat = F2-hat = 1 (i.i.d. unit variance), G(x) = sin(pi x / 2)/(pi x)
    with G(0) = 1/2; the PSD condition holds with zero margin.
    """
    delta = lambda x: np.where(np.asarray(x) == 0, 1.0, 0.0)
    return SpectralGaussianField(
        f1_hat=lambda k: np.ones_like(np.asarray(k, dtype=float)),
        f2_hat=lambda k: np.ones_like(np.asarray(k, dtype=float)),
        g_hat=lambda k: (np.abs(np.asarray(k, dtype=float)) < 0.25).astype(float),
        grid=grid,
        closed_forms={"psipsi": delta, "phiphi": delta, "psiphi": _sinc_g},
        name="sinc-coupling",
    )


# ---------------------------------------------------------------------------
# spectral sampling and empirical moments


def _hermitian_unit_modes(rng, shape):
    """Complex Gaussian modes z(k) with z(-k) = z(k)* and unit variance,
    so the inverse FFT of sqrt(spectrum)-weighted modes is real."""
    n_samples, length = shape
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    idx = (-np.arange(length)) % length
    z = (z + np.conj(z[:, idx])) / math.sqrt(2)
    return z


def sample_field_pair(field: SpectralGaussianField, length: int, n_samples: int,
                      rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw (psi, phi) realizations on a periodic box of ``length`` sites.

    Per discrete mode the 2x2 spectral matrix [[F1, G], [G, F2]] is factored
    (Cholesky-style, robust to the semi-definite boundary) and applied to two
    independent hermitian-symmetric unit mode fields.
    """
    k = np.arange(length) / length
    k = np.where(k >= 0.5, k - 1.0, k)
    f1 = np.asarray(field.f1_hat(k), dtype=float)
    f2 = np.asarray(field.f2_hat(k), dtype=float)
    g = np.asarray(field.g_hat(k), dtype=float)
    # lower-triangular factor of [[f1, g], [g, f2]] per mode
    a11 = np.sqrt(np.maximum(f1, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        a21 = np.where(a11 > 0, g / np.where(a11 > 0, a11, 1.0), 0.0)
    a22 = np.sqrt(np.maximum(f2 - a21 ** 2, 0.0))
    z1 = _hermitian_unit_modes(rng, (n_samples, length))
    z2 = _hermitian_unit_modes(rng, (n_samples, length))
    scale = math.sqrt(length)
    psi = np.fft.ifft(scale * a11 * z1, axis=1).real
    phi = np.fft.ifft(scale * (a21 * z1 + a22 * z2), axis=1).real
    return psi, phi


class EnsembleEstimator(MomentProvider):
    """Plug-in empirical moments from a matrix of realizations.

    ``samples`` has shape (count, n_sites); estimated moments converge to
    the provider moments at the Monte Carlo rate O(N^-1/2).
    """

    def __init__(self, sites, samples: np.ndarray, seed=None, max_order: int = 8):
        self.sites = tuple(sites)
        self.samples = np.asarray(samples)
        self.seed = seed
        self.max_order = max_order
        self._index = {s: i for i, s in enumerate(self.sites)}
        if self.samples.ndim != 2 or self.samples.shape[1] != len(self.sites):
            raise ValueError("samples must be (count, n_sites)")

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    def _column(self, ref: SiteRef) -> np.ndarray:
        col = self.samples[:, self._index[ref.site]]
        return np.conj(col) if ref.conj else col

    def moment(self, sequence: IndexSequence) -> complex:
        if not sequence:
            return 1.0
        prod = np.ones(self.count, dtype=complex)
        for ref in sequence:
            prod = prod * self._column(ref)
        return complex(prod.mean())

    def moment_standard_error(self, sequence: IndexSequence) -> float:
        prod = np.ones(self.count, dtype=complex)
        for ref in sequence:
            prod = prod * self._column(ref)
        return float(np.std(prod) / math.sqrt(self.count))


def sample_ensemble(field: SpectralGaussianField, box: int, n_samples: int,
                    seed: int) -> EnsembleEstimator:
    """Spectral Monte Carlo ensemble of the (psi, phi) pair on a periodic box.

    Deterministic given the seed.  Site labels are ("psi", x) and ("phi", x)
    for x in range(box).
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    psi, phi = sample_field_pair(field, box, n_samples, rng)
    sites = [("psi", x) for x in range(box)] + [("phi", x) for x in range(box)]
    samples = np.concatenate([psi, phi], axis=1)
    return EnsembleEstimator(sites, samples, seed=seed)


# ---------------------------------------------------------------------------
# config files and sample export

_SPECTRA = {
    "flat": lambda params: (lambda k: np.full_like(np.asarray(k, dtype=float),
                                                   params.get("value", 1.0))),
    "band": lambda params: (lambda k: params.get("height", 1.0) *
                            (np.abs(np.asarray(k, dtype=float)) <
                             params.get("halfwidth", 0.25)).astype(float)),
    "zero": lambda params: (lambda k: np.zeros_like(np.asarray(k, dtype=float))),
}


def spectrum_from_config(cfg: dict):
    try:
        builder = _SPECTRA[cfg["name"]]
    except KeyError:
        raise ValueError(f"unknown spectrum {cfg.get('name')!r}; "
                         f"choose one of {sorted(_SPECTRA)}") from None
    return builder(cfg)


def field_from_config(cfg: dict) -> SpectralGaussianField:
    """Build a spectral Gaussian field from a declarative config dict."""
    model = cfg.get("model", "spectral")
    grid = int(cfg.get("grid", DEFAULT_GRID))
    if model == "sinc_coupling":
        return sinc_coupling_example(grid=grid)
    if model != "spectral":
        raise ValueError(f"unknown field model {model!r}")
    if int(cfg.get("dimension", 1)) != 1:
        raise ValueError("only dimension 1 spectral fields are supported")
    return SpectralGaussianField(
        f1_hat=spectrum_from_config(cfg["f1"]),
        f2_hat=spectrum_from_config(cfg["f2"]),
        g_hat=spectrum_from_config(cfg["g"]),
        grid=grid,
        name=cfg.get("name", "spectral-gaussian"),
    )


def load_field_config(path) -> SpectralGaussianField:
    with open(path) as fh:
        return field_from_config(json.load(fh))


def export_samples(est: EnsembleEstimator, basepath):
    """Write the sample matrix as flat complex128 binary plus a JSON header."""
    base = Path(basepath)
    data = np.ascontiguousarray(est.samples, dtype=np.complex128)
    base.with_suffix(".bin").write_bytes(data.tobytes())
    header = {
        "schema_version": 1,
        "dtype": "complex128",
        "shape": list(data.shape),
        "sites": [list(s) if isinstance(s, tuple) else s for s in est.sites],
        "seed": est.seed,
    }
    base.with_suffix(".json").write_text(json.dumps(header, indent=2))
    return base.with_suffix(".bin"), base.with_suffix(".json")
