"""Euclidean projection onto the probability simplex and the regularized proximal step.

The projection uses the exact sort-and-threshold method: O(d log d), no
iteration. Vectors that already satisfy the simplex invariants (entries
>= -1e-12, sum within 1e-9 of 1) are returned as-is after clamping tiny
negatives, which makes the projection bitwise idempotent and keeps
noise-free dynamics exact.
"""

import numpy as np

from .errors import DimMismatch, NonFiniteInput, NonPositiveEta

SUM_TOL = 1e-9
NEG_TOL = -1e-12

# Padding sentinel for rows whose true dimension is below the array width;
# sinks below any real coordinate in the sorted threshold search.
_PAD = -1e30


def _clamp(v: np.ndarray) -> np.ndarray:
    """Clamp entries in (-1e-12, 0] to exactly +0.0, leaving the rest bitwise intact."""
    out = np.maximum(v, 0.0)
    out[out == 0.0] = 0.0  # normalizes -0.0
    return out


def is_feasible(v: np.ndarray) -> bool:
    """True when v lies on the simplex within the module tolerances."""
    return bool(v.min() >= NEG_TOL and abs(v.sum() - 1.0) <= SUM_TOL)


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of v onto {x : x >= 0, sum(x) = 1}.

    Returns v itself (tiny negatives clamped) when it is already feasible,
    so projecting a projection is a bitwise no-op.

    Raises:
        NonFiniteInput: v has NaN/inf entries or is empty.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise NonFiniteInput(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("projection input must be finite")
    if is_feasible(v):
        return _clamp(v)
    u = np.sort(v)[::-1]
    cssm = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    # largest k with u_k > (cumsum_k - 1)/k
    cond = u > (cssm - 1.0) / k
    rho = np.nonzero(cond)[0][-1]
    theta = (cssm[rho] - 1.0) / (rho + 1.0)
    return _clamp(v - theta)


def project_rows(x: np.ndarray, dims=None) -> np.ndarray:
    """Project each row of x onto its simplex.

    dims: optional per-row true dimension; columns at or beyond a row's
    dimension must be zero on input and are zero on output. Feasible rows
    pass through unchanged (clamped), matching project_simplex.
    """
    x = np.asarray(x, dtype=np.float64)
    n, width = x.shape
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("projection input must be finite")
    work = x.copy()
    if dims is not None:
        dims = np.asarray(dims)
        pad = np.arange(width)[None, :] >= dims[:, None]
        work[pad] = _PAD
    u = -np.sort(-work, axis=1)
    cssm = np.cumsum(u, axis=1)
    k = np.arange(1, width + 1)[None, :]
    cond = u > (cssm - 1.0) / k
    rho = width - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = (cssm[np.arange(n), rho] - 1.0) / (rho + 1.0)
    out = np.maximum(work - theta[:, None], 0.0)
    # feasible rows pass through bitwise
    sums = x.sum(axis=1)
    mins = x.min(axis=1) if dims is None else np.where(pad, np.inf, x).min(axis=1)
    ok = (mins >= NEG_TOL) & (np.abs(sums - 1.0) <= SUM_TOL)
    out[ok] = np.maximum(x[ok], 0.0)
    out[out == 0.0] = 0.0
    return out


def proximal_step(pi_bar: np.ndarray, g: np.ndarray, eta: float, tau: float) -> np.ndarray:
    """One regularized proximal-gradient step: Proj[(pi_bar - eta*g) / (1 + eta*tau)].

    With tau = 0 this reduces exactly to a projected gradient step.

    Raises:
        DimMismatch: pi_bar and g differ in length.
        NonPositiveEta: eta <= 0.
    """
    pi_bar = np.asarray(pi_bar, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if pi_bar.shape != g.shape:
        raise DimMismatch(f"pi_bar has shape {pi_bar.shape}, gradient {g.shape}")
    if not eta > 0:
        raise NonPositiveEta(f"eta must be > 0, got {eta}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if tau == 0.0:
        return project_simplex(pi_bar - eta * g)
    return project_simplex((pi_bar - eta * g) / (1.0 + eta * tau))
