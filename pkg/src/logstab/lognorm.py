"""Logarithmic norms (matrix measures) under L1, L2, Linf and weighted norms.

Three independent routes are provided: the closed forms per norm kind, a
numerical estimator built on the one-sided limit of (||I + theta*A|| - 1)/theta,
and, for weighted norms, the quadratic-form formulation through the symmetric
pencil. The routes cross-validate each other; tests treat the limit estimator
as the oracle for the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import NormKind, as_square, induced_matrix_norm, spd_sqrt_pair, sym_eig

DEFAULT_THETA_SEQ = tuple(10.0 ** (-k) for k in range(1, 8))


def log_norm(a, kind: NormKind) -> float:
    """Logarithmic norm mu[A] in closed form.

    l2: half the largest eigenvalue of A + A^T. weighted(P): same after the
    similarity transform sqrt(P) A sqrt(P)^-1. l1 (linf): max over columns
    (rows) of the diagonal entry plus the off-diagonal absolute sum.
    """
    m = as_square(a)
    if kind.tag == "l1":
        return float((m.diagonal() + np.abs(m).sum(axis=0) - np.abs(m.diagonal())).max())
    if kind.tag == "linf":
        return float((m.diagonal() + np.abs(m).sum(axis=1) - np.abs(m.diagonal())).max())
    if kind.tag == "weighted":
        m = kind.weight_sqrt @ m @ kind.weight_sqrt_inv
    s = m + m.T
    eigvals, _ = sym_eig(s, need_vectors=False)
    return float(0.5 * eigvals[-1])


def log_norm_pair(a, kind: NormKind) -> tuple[float, float]:
    """(mu[A], mu[-A]) sharing one eigendecomposition where possible.

    For l2/weighted kinds mu[-A] is -1/2 the smallest eigenvalue of the same
    symmetrized matrix, so both values cost a single solve. Used heavily by
    the transition-matrix bound checks.
    """
    m = as_square(a)
    if kind.tag in ("l1", "linf"):
        return log_norm(m, kind), log_norm(-m, kind)
    if kind.tag == "weighted":
        m = kind.weight_sqrt @ m @ kind.weight_sqrt_inv
    eigvals, _ = sym_eig(m + m.T, need_vectors=False)
    return float(0.5 * eigvals[-1]), float(-0.5 * eigvals[0])


@dataclass
class LimitEstimate:
    """Limit-definition estimate of mu[A] with convergence diagnostics."""

    value: float
    thetas: list[float] = field(default_factory=list)
    raw_values: list[float] = field(default_factory=list)
    extrapolated: list[float] = field(default_factory=list)
    successive_diffs: list[float] = field(default_factory=list)


def log_norm_limit_table(a, kind: NormKind, theta_seq=None) -> LimitEstimate:
    """Evaluate (||I + theta*A|| - 1)/theta along a theta sequence.

    Adjacent pairs are Richardson-extrapolated assuming a linear-in-theta
    error term; the returned value is the extrapolation of the final pair.
    Successive differences of the raw values are recorded as convergence
    evidence (they are expected to shrink monotonically until roundoff).
    """
    m = as_square(a)
    if theta_seq is None:
        theta_seq = DEFAULT_THETA_SEQ
    thetas = [float(t) for t in theta_seq]
    if not thetas:
        raise InvalidInputError("theta sequence must be non-empty")
    if any(t <= 0.0 for t in thetas):
        raise InvalidInputError("theta values must be positive")
    if any(t2 >= t1 for t1, t2 in zip(thetas, thetas[1:])):
        raise InvalidInputError("theta sequence must be strictly decreasing")

    eye = np.eye(m.shape[0])
    raw = [(induced_matrix_norm(eye + t * m, kind) - 1.0) / t for t in thetas]
    extrap = [
        (t1 * g2 - t2 * g1) / (t1 - t2)
        for (t1, g1), (t2, g2) in zip(zip(thetas, raw), zip(thetas[1:], raw[1:]))
    ]
    value = extrap[-1] if extrap else raw[-1]
    diffs = [abs(g2 - g1) for g1, g2 in zip(raw, raw[1:])]
    return LimitEstimate(float(value), thetas, raw, extrap, diffs)


def log_norm_limit_estimate(a, kind: NormKind, theta_seq=None) -> float:
    """Richardson-extrapolated limit estimate of mu[A]; oracle for log_norm."""
    return log_norm_limit_table(a, kind, theta_seq).value


def log_norm_quadratic_form(a, p) -> float:
    """Weighted log norm via the quadratic-form route.

    Computes the largest generalized eigenvalue of (P A + A^T P) v = 2 lam P v
    by congruence with sqrt(P)^-1, i.e. the maximum of the P-inner-product
    Rayleigh quotient. Must agree with log_norm(A, weighted(P)) to roundoff;
    kept as an independent assembly for cross-checking.
    """
    m = as_square(a)
    root, inv_root = spd_sqrt_pair(p)
    if root.shape[0] != m.shape[0]:
        raise InvalidInputError(
            f"weight is {root.shape[0]}x{root.shape[0]} but matrix is {m.shape[0]}x{m.shape[0]}"
        )
    pm = np.asarray(p, dtype=float)
    pencil = 0.5 * (pm @ m + m.T @ pm)
    reduced = inv_root @ pencil @ inv_root
    eigvals, _ = sym_eig(0.5 * (reduced + reduced.T), need_vectors=False)
    return float(eigvals[-1])


@dataclass
class LogNormResult:
    """One evaluation of mu[A]: the value, the norm kind, and the route used."""

    value: float
    kind: NormKind
    method: str  # "closed_form" | "limit_estimate" | "quadratic_form"


def log_norm_all_routes(a, kind: NormKind, theta_seq=None) -> list[LogNormResult]:
    """Evaluate mu[A] by every route applicable to the kind."""
    results = [
        LogNormResult(log_norm(a, kind), kind, "closed_form"),
        LogNormResult(log_norm_limit_estimate(a, kind, theta_seq), kind, "limit_estimate"),
    ]
    if kind.tag == "weighted":
        results.append(LogNormResult(log_norm_quadratic_form(a, kind.weight), kind, "quadratic_form"))
    return results
