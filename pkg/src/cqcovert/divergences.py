"""Entropy and divergence functionals, all in nats.

Every functional is computed spectrally with the 0 log 0 = 0 convention.
Results that round to a tiny negative number from floating-point
cancellation are clipped to 0; anything below -NATS_CLIP raises, since the
mathematics guarantees nonnegativity.
"""

from __future__ import annotations

import numpy as np

from .config import NATS_CLIP, SUPPORT_INCLUSION_TOL, SUPPORT_TOL
from .operators import DensityOperator

Nats = float


def _clip_nonnegative(value: float, what: str) -> float:
    if value < -NATS_CLIP:
        raise ArithmeticError(f"{what} evaluated to {value:.3e}, below the -{NATS_CLIP} floor")
    return max(value, 0.0)


def _entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > SUPPORT_TOL]
    return float(-(w * np.log(w)).sum())


def von_neumann_entropy(a: DensityOperator) -> Nats:
    """-tr[a log a], in [0, log dim]."""
    w = np.linalg.eigvalsh(a.mat)
    return _clip_nonnegative(_entropy_of_spectrum(w), "von Neumann entropy")


def relative_entropy(a: DensityOperator, b: DensityOperator) -> Nats:
    """tr[a log a - a log b] when supp(a) lies in supp(b), else +inf."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    wa, va = np.linalg.eigh(a.mat)
    wb, vb = np.linalg.eigh(b.mat)

    pa = va[:, wa > SUPPORT_TOL]
    pb = vb[:, wb > SUPPORT_TOL]
    if pa.shape[1] > 0:
        if pb.shape[1] == 0:
            return float("inf")
        leak = pa - pb @ (pb.conj().T @ pa)
        if float(np.linalg.norm(leak, 2)) > SUPPORT_INCLUSION_TOL:
            return float("inf")

    on_a = wa > SUPPORT_TOL
    term_a = float((wa[on_a] * np.log(wa[on_a])).sum())
    on_b = wb > SUPPORT_TOL
    log_b = (vb[:, on_b] * np.log(wb[on_b])) @ vb[:, on_b].conj().T
    term_b = float(np.einsum("ij,ji->", a.mat, log_b).real)
    return _clip_nonnegative(term_a - term_b, "relative entropy")


def chi_squared(rho_tilde: DensityOperator, rho_zero: DensityOperator) -> Nats:
    """tr[rho_tilde^2 rho_zero^{-1}] - 1, demanding a full-rank reference.

    The reference must be strictly full rank: a singular second argument
    signals an unsanitized channel, and silent pseudo-inversion would mask
    that configuration error.
    """
    if rho_tilde.dim != rho_zero.dim:
        raise ValueError(f"dimension mismatch: {rho_tilde.dim} vs {rho_zero.dim}")
    w, v = np.linalg.eigh(rho_zero.mat)
    if w[0] <= SUPPORT_TOL:
        raise ValueError(
            f"reference state is singular (smallest eigenvalue {w[0]:.3e}); "
            "sanitize the channel first"
        )
    inv = (v / w) @ v.conj().T
    value = float(np.einsum("ij,jk,ki->", rho_tilde.mat, rho_tilde.mat, inv).real) - 1.0
    return _clip_nonnegative(value, "chi-squared divergence")


def chi_squared_frobenius(rho_tilde: DensityOperator, rho_zero: DensityOperator) -> Nats:
    """Same divergence via ||rho_zero^{-1/2} (rho_tilde - rho_zero)||_F^2.

    Independent code path kept as an algebraic cross-check of
    :func:`chi_squared`; do not fold the two together.
    """
    w, v = np.linalg.eigh(rho_zero.mat)
    if w[0] <= SUPPORT_TOL:
        raise ValueError("reference state is singular")
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    diff = rho_tilde.mat - rho_zero.mat
    return _clip_nonnegative(float(np.linalg.norm(inv_sqrt @ diff) ** 2), "chi-squared divergence")


def holevo_information(states, dist) -> Nats:
    """H(Sum_x P(x) s_x) - Sum_x P(x) H(s_x) for an ensemble of states.

    ``states`` is a sequence of DensityOperators indexed by symbol;
    ``dist`` is an InputDistribution or a bare probability vector over the
    same index set.
    """
    probs = np.asarray(getattr(dist, "probs", dist), dtype=float)
    if len(probs) != len(states):
        raise ValueError(f"{len(probs)} probabilities for {len(states)} states")
    dim = states[0].dim
    mix = np.zeros((dim, dim), dtype=np.complex128)
    conditional = 0.0
    for p, state in zip(probs, states):
        if p <= 0.0:
            continue
        mix += p * state.mat
        conditional += p * _entropy_of_spectrum(np.linalg.eigvalsh(state.mat))
    mixture_entropy = _entropy_of_spectrum(np.linalg.eigvalsh(mix))
    return _clip_nonnegative(mixture_entropy - conditional, "Holevo information")
