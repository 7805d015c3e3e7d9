"""Exact spectral theory of the weighted boundary-star graph.

The graph has a hub vertex joined to ``N - 1`` leaves and to one boundary
vertex where functions vanish.  Its Laplacian is determined by 2N positive
parameters: the boundary-edge weight ``theta``, the spoke weights
``theta_i`` and the vertex measures ``mu``.  The eigenvalues are the roots
of a secular function with poles ``b_i = theta_i / mu_i``, which makes both
directions of the spectral problem exact:

* forward: bracketed root finding between consecutive poles,
* inverse: residues of a rational function built from the targets and a
  chosen interlacing pole sequence.

All functions are pure; nothing in this module holds mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, ValidationError

__all__ = [
    "StarWeights",
    "TargetSpectrum",
    "PoleSequence",
    "laplacian_pair",
    "forward_spectrum",
    "secular_values",
    "prescribe_weights",
    "default_poles",
    "scale_weights",
    "normalize_for_construction",
    "jacobian_phi",
    "jacobian_fd",
]

#: minimum relative eigenvalue gap below which the spectrum counts as
#: degenerate for perturbation formulas
SIMPLE_GAP_RTOL = 1e-8

#: relative tolerance of the secular root finder
ROOT_RTOL = 1e-13


@dataclass(frozen=True)
class StarWeights:
    """Weights of the boundary-star Laplacian.

    Parameters
    ----------
    theta : float
        Weight of the edge joining the hub to the boundary vertex.
    theta_i : tuple of float
        Weights of the N - 1 spoke edges (empty for N = 1).
    mu : tuple of float
        Vertex measures (mu_0 is the hub), length N.
    """

    theta: float
    theta_i: tuple[float, ...]
    mu: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta_i", tuple(float(t) for t in self.theta_i))
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "theta", float(self.theta))
        if len(self.mu) < 1:
            raise ValidationError("mu must have at least one entry")
        if len(self.theta_i) != len(self.mu) - 1:
            raise ValidationError(
                f"need len(theta_i) == len(mu) - 1, got {len(self.theta_i)} vs {len(self.mu)}"
            )
        for name, vals in (("theta", [self.theta]), ("theta_i", self.theta_i), ("mu", self.mu)):
            for v in vals:
                if not np.isfinite(v) or v <= 0.0:
                    raise ValidationError(f"{name} entries must be positive and finite, got {v}")

    @property
    def n(self) -> int:
        """Number of interior vertices N."""
        return len(self.mu)

    @property
    def poles(self) -> np.ndarray:
        """Secular-function poles b_i = theta_i / mu_i (unsorted)."""
        return np.asarray(self.theta_i) / np.asarray(self.mu[1:])

    def to_dict(self) -> dict:
        return {"theta": self.theta, "theta_i": list(self.theta_i), "mu": list(self.mu)}

    @classmethod
    def from_dict(cls, d: dict) -> "StarWeights":
        try:
            return cls(theta=d["theta"], theta_i=tuple(d["theta_i"]), mu=tuple(d["mu"]))
        except KeyError as e:
            raise ValidationError(f"weights object missing key {e}") from e


@dataclass(frozen=True)
class TargetSpectrum:
    """A strictly increasing sequence of positive target eigenvalues."""

    a: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if len(self.a) < 1:
            raise ValidationError("need at least one target eigenvalue")
        if self.a[0] <= 0.0:
            raise ValidationError("targets must be positive")
        for lo, hi in zip(self.a, self.a[1:]):
            if not hi > lo:
                raise ValidationError(f"targets must be strictly increasing, got {lo} >= {hi}")

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class PoleSequence:
    """Poles strictly interlacing a target spectrum: a_k < b_k < a_{k+1}."""

    b: tuple[float, ...]
    targets: TargetSpectrum = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        a = self.targets.a
        if len(self.b) != len(a) - 1:
            raise ValidationError(f"need {len(a) - 1} poles for {len(a)} targets, got {len(self.b)}")
        for k, bk in enumerate(self.b):
            if not (a[k] < bk < a[k + 1]):
                raise ValidationError(
                    f"pole b_{k + 1}={bk} does not interlace targets ({a[k]}, {a[k + 1]})"
                )


def _as_targets(targets) -> TargetSpectrum:
    if isinstance(targets, TargetSpectrum):
        return targets
    return TargetSpectrum(tuple(targets))


def laplacian_pair(w: StarWeights) -> tuple[np.ndarray, np.ndarray]:
    """Matrix pencil (Q, M) of the star Laplacian.

    Q is the quadratic form on the basis of vertex indicators (hub first),
    M the diagonal measure matrix; the Laplacian eigenvalues are the
    eigenvalues of ``Q f = lambda M f``.
    """
    n = w.n
    Q = np.zeros((n, n))
    Q[0, 0] = w.theta + sum(w.theta_i)
    for i, t in enumerate(w.theta_i, start=1):
        Q[0, i] = Q[i, 0] = -t
        Q[i, i] = t
    M = np.diag(np.asarray(w.mu))
    return Q, M


def secular_values(w: StarWeights, lam) -> np.ndarray:
    """Evaluate theta/(mu_0 lam) + sum_i theta_i / (mu_0 (lam - b_i)).

    Equals 1 exactly at every eigenvalue (for any overall weight scale).
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu0 = w.mu[0]
    out = w.theta / (mu0 * lam)
    for t, b in zip(w.theta_i, w.poles):
        out = out + t / (mu0 * (lam - b))
    return out


def _dense_spectrum(Q: np.ndarray, M: np.ndarray) -> np.ndarray:
    # symmetrize with M^{-1/2}; M is diagonal positive
    d = 1.0 / np.sqrt(np.diag(M))
    A = (Q * d).T * d
    A = 0.5 * (A + A.T)
    return np.sort(scipy.linalg.eigh(A, eigvals_only=True))


def _secular_root(w: StarWeights, lo: float, hi: float) -> float:
    """Root of g(lam) = 1 - secular(lam) on (lo, hi), g increasing.

    Newton iteration safeguarded by bisection on the bracketing interval;
    the bracket shrinks monotonically so the iteration cannot escape.
    """
    mu0 = w.mu[0]
    th_i = np.asarray(w.theta_i)
    b = w.poles

    def g_and_dg(x):
        dx = x - b
        g = 1.0 - w.theta / (mu0 * x) - np.sum(th_i / dx) / mu0
        dg = w.theta / (mu0 * x * x) + np.sum(th_i / (dx * dx)) / mu0
        return g, dg

    x = 0.5 * (lo + hi)
    for _ in range(200):
        g, dg = g_and_dg(x)
        if g > 0.0:
            hi = x
        else:
            lo = x
        step = g / dg
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= ROOT_RTOL * abs(x_new):
            return x_new
        x = x_new
    return 0.5 * (lo + hi)


def forward_spectrum(w: StarWeights) -> np.ndarray:
    """All N eigenvalues of the star Laplacian, ascending.

    Uses bracketed secular root finding on the pole-interlacing intervals;
    falls back to a dense symmetric generalized eigensolve when poles
    coincide (the brackets then degenerate but the pencil does not).
    """
    n = w.n
    if n == 1:
        return np.array([w.theta / w.mu[0]])
    b = np.sort(w.poles)
    # coincident poles break the bracketing structure
    if len(b) > 1 and np.min(np.diff(b)) <= 1e-12 * b[-1]:
        return _dense_spectrum(*laplacian_pair(w))
    order = np.argsort(w.poles)
    w_sorted = StarWeights(
        theta=w.theta,
        theta_i=tuple(np.asarray(w.theta_i)[order]),
        mu=(w.mu[0],) + tuple(np.asarray(w.mu[1:])[order]),
    )
    lams = np.empty(n)
    lo = 0.0
    eps_b = 1e-14
    for k in range(n - 1):
        lams[k] = _secular_root(w_sorted, lo + eps_b * b[k], b[k] * (1.0 - eps_b))
        lo = b[k]
    # last interval (b_{N-1}, inf): grow the upper bracket until g > 0
    hi = b[-1] * 2.0 + w.theta / w.mu[0]
    mu0 = w.mu[0]
    th_i = np.asarray(w_sorted.theta_i)
    while 1.0 - w.theta / (mu0 * hi) - np.sum(th_i / (hi - b)) / mu0 <= 0.0:
        hi = b[-1] + 2.0 * (hi - b[-1])
    lams[-1] = _secular_root(w_sorted, b[-1] * (1.0 + eps_b), hi)
    if lams[0] <= 0.0:
        raise DegenerateSpectrumError("first eigenvalue is not positive")
    return lams


def default_poles(targets) -> np.ndarray:
    """Geometric-mean poles b_k = sqrt(a_k a_{k+1}).

    Scale-equivariant and always strictly interlacing, which keeps the
    residues of the inverse construction well conditioned.
    """
    a = np.asarray(_as_targets(targets).a)
    return np.sqrt(a[:-1] * a[1:])


def prescribe_weights(targets, poles=None) -> StarWeights:
    """Weights whose star Laplacian has exactly the target eigenvalues.

    Parameters
    ----------
    targets : sequence of float or TargetSpectrum
        Strictly increasing positive values a_1 < ... < a_N.
    poles : sequence of float, optional
        Interlacing poles b_k with a_k < b_k < a_{k+1}; geometric means
        by default.

    Returns
    -------
    StarWeights
        mu_0 = 1; theta and theta_i are minus the residues of
        prod(lam - a_i) / (lam prod(lam - b_i)) at 0 and at each b_i;
        mu_i = theta_i / b_i.
    """
    t = _as_targets(targets)
    a = np.asarray(t.a)
    n = t.n
    if poles is None:
        b = default_poles(t)
    else:
        b = np.asarray([float(x) for x in poles])
    PoleSequence(tuple(b), t)  # validates interlacing
    theta = float(np.prod(a) / np.prod(b)) if n > 1 else float(np.prod(a))
    theta_i = np.empty(n - 1)
    for i in range(n - 1):
        num = np.prod(b[i] - a)
        den = b[i] * np.prod(b[i] - np.delete(b, i))
        theta_i[i] = -num / den
    if theta <= 0.0 or np.any(theta_i <= 0.0):
        # cannot occur under strict interlacing; guard against rounding
        raise ValidationError("residue construction produced a non-positive weight")
    mu = np.concatenate([[1.0], theta_i / b]) if n > 1 else np.array([1.0])
    return StarWeights(theta=theta, theta_i=tuple(theta_i), mu=tuple(mu))


def scale_weights(w: StarWeights, t: float) -> StarWeights:
    """Multiply every weight by t > 0; the spectrum is unchanged."""
    if not t > 0.0:
        raise ValidationError(f"scale factor must be positive, got {t}")
    return StarWeights(
        theta=t * w.theta,
        theta_i=tuple(t * x for x in w.theta_i),
        mu=tuple(t * m for m in w.mu),
    )


def normalize_for_construction(w: StarWeights) -> StarWeights:
    """Scale up to the smallest weights usable for surface construction.

    Returns ``scale_weights(w, t*)`` with the minimal t* >= 1 such that
    mu_0 >= N + 1 and mu_i >= 2 for i >= 1, so every patch of the glued
    surface keeps a positive area budget.
    """
    n = w.n
    t = max(1.0, (n + 1) / w.mu[0])
    for m in w.mu[1:]:
        t = max(t, 2.0 / m)
    if t == 1.0:
        return w
    return scale_weights(w, t)


def _eigenpairs(w: StarWeights) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and M-orthonormal eigenvectors of the pencil (dense)."""
    Q, M = laplacian_pair(w)
    d = 1.0 / np.sqrt(np.diag(M))
    A = (Q * d).T * d
    A = 0.5 * (A + A.T)
    lam, V = scipy.linalg.eigh(A)
    F = V * d[:, None]  # back to pencil coordinates, F^T M F = I
    return lam, F


def jacobian_phi(w: StarWeights, rank_tol: float = 1e-8):
    """Analytic Jacobian of the eigenvalue map and its smallest singular value.

    Rows are eigenvalues lambda_1..lambda_N, columns the 2N parameters in
    the order (theta, theta_1..theta_{N-1}, mu_0..mu_{N-1}).  Entries come
    from first-order pencil perturbation with M-normalized eigenvectors f:

        d lambda / d theta   = f_0^2
        d lambda / d theta_i = (f_0 - f_i)^2
        d lambda / d mu_j    = -lambda f_j^2

    Returns
    -------
    (J, sigma_min) : (ndarray of shape (N, 2N), float)
        The map is a submersion at ``w`` iff sigma_min > rank_tol.

    Raises
    ------
    DegenerateSpectrumError
        If the spectrum is not simple to within the gap tolerance.
    """
    lam, F = _eigenpairs(w)
    n = w.n
    if n > 1 and np.min(np.diff(lam)) <= SIMPLE_GAP_RTOL * np.max(np.abs(lam)):
        raise DegenerateSpectrumError(
            f"eigenvalue gap below {SIMPLE_GAP_RTOL} * max|lambda|; Jacobian undefined"
        )
    J = np.empty((n, 2 * n))
    for k in range(n):
        f = F[:, k]
        J[k, 0] = f[0] ** 2
        for i in range(1, n):
            J[k, i] = (f[0] - f[i]) ** 2
        J[k, n:] = -lam[k] * f**2
    sigma_min = float(np.linalg.svd(J, compute_uv=False)[-1])
    return J, sigma_min


def _param_vector(w: StarWeights) -> np.ndarray:
    return np.concatenate([[w.theta], w.theta_i, w.mu])


def _weights_from_params(p: np.ndarray, n: int) -> StarWeights:
    return StarWeights(theta=p[0], theta_i=tuple(p[1:n]), mu=tuple(p[n:]))


def jacobian_fd(w: StarWeights, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of the eigenvalue map.

    Independent cross-check of :func:`jacobian_phi`; differentiates
    :func:`forward_spectrum` parameter by parameter.
    """
    p0 = _param_vector(w)
    n = w.n
    J = np.empty((n, 2 * n))
    for j, pj in enumerate(p0):
        h = rel_step * pj
        pp, pm = p0.copy(), p0.copy()
        pp[j] += h
        pm[j] -= h
        lp = forward_spectrum(_weights_from_params(pp, n))
        lm = forward_spectrum(_weights_from_params(pm, n))
        J[:, j] = (lp - lm) / (2.0 * h)
    return J
