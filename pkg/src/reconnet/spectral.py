"""Complex spectra of adjacency matrices and the rescaled-ensemble theory.

The entrywise standardization (a_ij - p_ij) / sqrt(N p_ij (1 - p_ij)) maps
a sampled adjacency matrix onto the zero-mean unit-variance setting in
which the bulk of the spectrum fills an ellipse with semi-axes 1 + tau and
1 - tau, tau being the standardized correlation between a_ij and a_ji.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateEnsembleError,
    DomainError,
    InsufficientDataError,
    NumericalError,
)
from .graph import DirectedNetwork
from .models import FittedModel, dyad_probability_arrays


@dataclass
class Spectrum:
    """All eigenvalues of one real matrix, sorted by modulus then real part."""

    values: np.ndarray  # complex, descending (|lambda|, Re lambda)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def leading(self) -> complex:
        return complex(self.values[0])

    def bulk(self) -> np.ndarray:
        """Everything except the single leading eigenvalue."""
        return self.values[1:]


@dataclass
class TauMatrix:
    """Standardized dyad correlations of a model; NaN where undefined.

    A dyad is defined when both directed probabilities lie strictly inside
    (0, 1); deterministic entries carry no fluctuation.
    """

    values: np.ndarray = field(repr=False)
    defined: np.ndarray = field(repr=False)

    @property
    def mean_tau(self) -> float:
        if not self.defined.any():
            return float("nan")
        return float(self.values[self.defined].mean())

    def defined_values(self) -> np.ndarray:
        iu, ju = np.triu_indices(self.values.shape[0], k=1)
        keep = self.defined[iu, ju]
        return self.values[iu[keep], ju[keep]]


@dataclass
class BulkShape:
    """Quantile-based semi-axes of a pooled spectral bulk."""

    semi_axis_re: float
    semi_axis_im: float
    axis_ratio: float  # semi_axis_im / semi_axis_re
    pooled_count: int
    mean_tau: float = float("nan")


def eigenvalues(matrix) -> Spectrum:
    """Full complex spectrum of a dense real matrix (LAPACK dgeev path)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"matrix must be square, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NumericalError("matrix has non-finite entries")
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((-vals.real, -np.abs(vals)))
    vals = vals[order]
    # moduli equal up to eigensolver accuracy count as ties, re-ranked by
    # real part (a 3-cycle's roots of unity differ in |.| only by ULPs)
    mods = np.abs(vals)
    tol = 1e-8 * max(1.0, float(mods[0])) if len(vals) else 0.0
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and mods[j - 1] - mods[j] <= tol:
            j += 1
        if j - i > 1:
            block = vals[i:j]
            vals[i:j] = block[np.argsort(-block.real, kind="stable")]
        i = j
    return Spectrum(values=vals)


def leading_eigenvalue(net: DirectedNetwork) -> float:
    """Spectral radius of the (nonnegative) adjacency matrix.

    The max-modulus eigenvalue of a nonnegative matrix is real up to
    rounding; equal-modulus ties are broken by largest real part, which
    selects the Perron root.
    """
    lead = eigenvalues(net.adjacency).leading
    return float(lead.real)


def rescale_matrix(net: DirectedNetwork, model: FittedModel) -> np.ndarray:
    """Entrywise standardization (a_ij - p_ij) / sqrt(N p_ij (1 - p_ij)).

    Entries whose model probability is exactly 0 or 1 are deterministic
    and set to 0, as is the diagonal.
    """
    p = dyad_probability_arrays(model).link
    a = net.adjacency
    if a.shape != p.shape:
        raise DomainError(f"network has {a.shape[0]} nodes, model has {p.shape[0]}")
    n = a.shape[0]
    mask = (p > 0.0) & (p < 1.0)
    np.fill_diagonal(mask, False)
    if not mask.any():
        raise DegenerateEnsembleError("all entries are deterministic under the model")
    out = np.zeros_like(p)
    out[mask] = (a[mask] - p[mask]) / np.sqrt(n * p[mask] * (1.0 - p[mask]))
    return out


def tau_matrix(model: FittedModel) -> TauMatrix:
    """Standardized correlation of (a_ij, a_ji) per dyad, from the model.

    tau_ij = (p_both - p_ij p_ji) / sqrt(p_ij(1-p_ij) p_ji(1-p_ji)) on
    dyads where both directed probabilities are inside (0, 1); the 1/N
    factor of the rescaled-ensemble covariance is not part of tau.
    """
    arrs = dyad_probability_arrays(model)
    p = arrs.link
    pt = p.T
    defined = (p > 0.0) & (p < 1.0) & (pt > 0.0) & (pt < 1.0)
    np.fill_diagonal(defined, False)
    values = np.full_like(p, np.nan)
    # grouped as symmetric products so tau_ij == tau_ji bitwise
    num = arrs.both - p * pt
    var = p * (1.0 - p)
    den = np.sqrt(var * var.T)
    values[defined] = num[defined] / den[defined]
    return TauMatrix(values=values, defined=defined)


def fgrm_tau(u: float, v: float, a_i: float, l_i: float, a_j: float, l_j: float) -> float:
    """Closed-form dyad correlation of the two-parameter fitness model.

    tau_ij = u (v^2 - 1) sqrt(A_i A_j L_i L_j) / g_ij, with g_ij^2 the
    expanded polynomial of the dyad variance product. Algebraically equal
    to the generic tau of ``tau_matrix`` on the same dyad.
    """
    v2 = v * v
    aij = a_i * l_j
    aji = a_j * l_i
    prod = aij * aji
    g2 = (
        1.0
        + u * (v2 + 1.0) * (aij + aji)
        + u * u * (v2 + 1.0) ** 2 * prod
        + u * u * v2 * (aij * aij + aji * aji)
        + u ** 3 * v2 * (v2 + 1.0) * prod * (aij + aji)
        + u ** 4 * v2 * v2 * prod * prod
    )
    return u * (v2 - 1.0) * math.sqrt(prod) / math.sqrt(g2)


def bulk_shape(spectra, mean_tau: float = float("nan")) -> BulkShape:
    """Pooled bulk of several spectra: 0.99-quantile semi-axes.

    Each spectrum contributes everything except its single leading
    eigenvalue; the 0.99 quantiles of |Re| and |Im| are robust to the few
    stragglers outside the asymptotic support at finite N.
    """
    pooled = []
    for s in spectra:
        if s.n < 3:
            raise DomainError(f"spectra must have at least 3 eigenvalues, got {s.n}")
        pooled.append(s.bulk())
    if not pooled:
        raise InsufficientDataError("no spectra supplied")
    vals = np.concatenate(pooled)
    if len(vals) < 10:
        raise InsufficientDataError(f"only {len(vals)} pooled eigenvalues, need >= 10")
    semi_re = float(np.quantile(np.abs(vals.real), 0.99))
    semi_im = float(np.quantile(np.abs(vals.imag), 0.99))
    ratio = semi_im / semi_re if semi_re > 0 else float("inf")
    return BulkShape(
        semi_axis_re=semi_re,
        semi_axis_im=semi_im,
        axis_ratio=ratio,
        pooled_count=len(vals),
        mean_tau=mean_tau,
    )
