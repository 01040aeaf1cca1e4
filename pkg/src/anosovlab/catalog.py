"""Exact resonance catalog in constant curvature, plus synthetic spectra.

In constant curvature the transfer-operator spectrum is an arithmetic
function of the Laplace spectrum of the underlying surface: each eigenvalue
mu contributes, on every vertical band line Re z = -1/2 - k, the conjugate
pair

    z = -1/2 - k +- i sqrt(mu - 1/4),

which degenerates to two real values -1/2 - k +- sqrt(1/4 - mu) for small
eigenvalues mu < 1/4 (these are tagged exceptional, as is the separate
integer family z = -n).  Synthetic eigenvalue lists following the Weyl
counting law N(mu) ~ (area / 4 pi) mu drive the statistics tests without a
Laplacian eigensolver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .errors import ConfigError

EXCEPTIONAL = "exceptional"
UNASSIGNED = "unassigned"  # inverted modes before any membership pass


@dataclass(frozen=True)
class Resonance:
    re: float
    im: float
    band: Union[int, str]
    provenance: str  # analytic | inverted

    def __post_init__(self):
        if self.provenance not in ("analytic", "inverted"):
            raise ConfigError("provenance must be analytic or inverted")
        is_index = isinstance(self.band, (int, np.integer)) \
            and not isinstance(self.band, bool)
        if not is_index and self.band not in (EXCEPTIONAL, UNASSIGNED):
            raise ConfigError(
                "band must be an integer, 'exceptional', or 'unassigned'"
            )

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class ResonanceList:
    entries: Tuple[Resonance, ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def band_entries(self, k: int) -> "ResonanceList":
        return ResonanceList(tuple(r for r in self.entries if r.band == k))

    def zs(self) -> np.ndarray:
        return np.array([r.z for r in self.entries], dtype=complex)

    def conjugation_defect(self) -> float:
        """Max distance from any entry's conjugate to the nearest entry."""
        z = self.zs()
        if len(z) == 0:
            return 0.0
        d = np.abs(np.conj(z)[:, None] - z[None, :]).min(axis=1)
        return float(d.max())

    def records(self) -> List[dict]:
        return [
            {"re": r.re, "im": r.im, "band": r.band, "provenance": r.provenance}
            for r in self.entries
        ]


@dataclass(frozen=True)
class LaplaceSpectrum:
    """Laplace eigenvalues of the surface with its area."""

    area: float
    eigenvalues: np.ndarray
    source: str = "file"  # file | synthetic

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float)
        )
        ev = self.eigenvalues
        if not self.area > 0:
            raise ConfigError("area must be positive")
        if self.source not in ("file", "synthetic"):
            raise ConfigError("source must be file or synthetic")
        if ev.ndim != 1 or len(ev) == 0:
            raise ConfigError("eigenvalues must be a nonempty 1-d list")
        if np.any(np.diff(ev) < 0):
            raise ConfigError("eigenvalues must be sorted nondecreasing")
        if np.any(ev < 0):
            raise ConfigError("eigenvalues must be nonnegative")
        if ev[0] != 0.0:
            raise ConfigError("the zero eigenvalue mu_0 = 0 must be present")


def resonances_from_laplacian(spec: LaplaceSpectrum, k_max: int,
                              n_max: int = 0) -> ResonanceList:
    """All z = -1/2 - k +- i sqrt(mu - 1/4) for k <= k_max, plus z = -n.

    Small eigenvalues mu < 1/4 give two real entries per band line, tagged
    exceptional; the integer family z = -n, n = 1..n_max, is listed
    separately (also exceptional).  Repeated eigenvalues repeat entries.
    The list is closed under complex conjugation by construction.
    """
    if k_max < 0 or n_max < 0:
        raise ConfigError("k_max and n_max must be nonnegative")
    out = []
    for k in range(k_max + 1):
        line = -0.5 - k
        for mu in spec.eigenvalues:
            if mu >= 0.25:
                s = float(np.sqrt(mu - 0.25))
                out.append(Resonance(line, s, k, "analytic"))
                out.append(Resonance(line, -s, k, "analytic"))
            else:
                r = float(np.sqrt(0.25 - mu))
                out.append(Resonance(line + r, 0.0, EXCEPTIONAL, "analytic"))
                out.append(Resonance(line - r, 0.0, EXCEPTIONAL, "analytic"))
    for n in range(1, n_max + 1):
        out.append(Resonance(float(-n), 0.0, EXCEPTIONAL, "analytic"))
    return ResonanceList(tuple(out))


def synthetic_weyl_spectrum(area: float, mu_max: float, jitter: float = 0.0,
                            seed: int = 0) -> LaplaceSpectrum:
    """Eigenvalue staircase with counting slope area/(4 pi) and jitter.

    The deterministic staircase places mu_j = j * 4 pi / area; the jitter
    displaces each level by at most jitter spacings (jitter < 1/2 keeps the
    list sorted).  mu_0 = 0 is prepended.
    """
    if not area > 0 or not mu_max > 0:
        raise ConfigError("area and mu_max must be positive")
    if not 0.0 <= jitter < 0.5:
        raise ConfigError("jitter must lie in [0, 1/2)")
    spacing = 4.0 * np.pi / area
    n = int(np.floor(mu_max / spacing + 1e-12))
    j = np.arange(1, n + 1, dtype=float)
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        j = j + jitter * rng.uniform(-1.0, 1.0, size=n)
    mu = np.concatenate([[0.0], np.sort(spacing * j)])
    return LaplaceSpectrum(area=area, eigenvalues=mu, source="synthetic")
