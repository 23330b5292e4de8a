"""Single-particle mean-field Hamiltonian, its spectrum and Boltzmann matrix.

The 3x3 matrix is ordered |1>, |2>, |3>.  Eigenpairs come from the analytic
(trigonometric Cardano) route; near-degenerate spectra fall back to cyclic
Jacobi rotations.  Rows that decouple exactly (both off-diagonal entries
zero) are split off so the exact zeros survive into the eigenvectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ParameterError, check_beta, validate

_DEGENERATE_DISCRIMINANT = 1e-12
_RESIDUAL_TOL = 1e-11


def build_h(params: ModelParams, y1: float, y2: float) -> np.ndarray:
    """Single-particle Hamiltonian at the mean-field point ``(y1, y2)``."""
    h = np.zeros((3, 3))
    h[1, 1] = params.delta
    h[2, 2] = params.Delta
    h[0, 2] = h[2, 0] = 2.0 * params.g1 * y1
    h[1, 2] = h[2, 1] = 2.0 * params.g2 * y2
    return h


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues; ``vectors[:, k]`` belongs to ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray


def _sign_fix(v):
    k = max(range(3), key=lambda i: (abs(v[i]), -i))
    return [-x for x in v] if v[k] < 0 else list(v)


def _finish(values, vectors) -> SpectralDecomposition:
    return _finish_cols(values, np.asarray(vectors, dtype=float).T.tolist())


def _finish_cols(values, cols) -> SpectralDecomposition:
    values = [float(x) for x in values]
    order = sorted(range(3), key=lambda k: values[k])
    vals = np.array([values[k] for k in order])
    vecs = np.array([_sign_fix(cols[k]) for k in order]).T
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralDecomposition(vals, vecs)


def _eig2(p: float, r: float, s: float):
    """Eigenpairs of [[p, r], [r, s]]: returns (lam_lo, lam_hi, v_lo, v_hi)."""
    if r == 0.0:
        if p <= s:
            return p, s, (1.0, 0.0), (0.0, 1.0)
        return s, p, (0.0, 1.0), (1.0, 0.0)
    m = 0.5 * (p + s)
    rad = math.hypot(0.5 * (p - s), r)
    # product of eigenvalues is p*s - r^2; divide it out to avoid cancellation
    if m >= 0:
        hi = m + rad
        lo = (p * s - r * r) / hi
    else:
        lo = m - rad
        hi = (p * s - r * r) / lo
    theta = 0.5 * math.atan2(2.0 * r, p - s)
    c, sn = math.cos(theta), math.sin(theta)
    return lo, hi, (-sn, c), (c, sn)


def _decoupled_index(a: np.ndarray):
    for k in range(3):
        i, j = [n for n in range(3) if n != k]
        if a[k, i] == 0.0 and a[k, j] == 0.0:
            return k, i, j
    return None


def _eig_block(a: np.ndarray, k: int, i: int, j: int) -> SpectralDecomposition:
    lo, hi, v_lo, v_hi = _eig2(a[i, i], a[i, j], a[j, j])
    vecs = np.zeros((3, 3))
    vecs[k, 0] = 1.0
    vecs[i, 1], vecs[j, 1] = v_lo
    vecs[i, 2], vecs[j, 2] = v_hi
    return _finish([a[k, k], lo, hi], vecs)


def cardano_eigvalsh(a) -> np.ndarray:
    """Ascending eigenvalues of (a stack of) real symmetric 3x3 matrices.

    Vectorised trigonometric form of Cardano's solution.  Accurate to a few
    ulps of the matrix norm away from degeneracy; near a double eigenvalue
    the inner pair loses about half the digits.
    """
    a = np.asarray(a, dtype=float)
    a00, a11, a22 = a[..., 0, 0], a[..., 1, 1], a[..., 2, 2]
    a01, a02, a12 = a[..., 0, 1], a[..., 0, 2], a[..., 1, 2]
    off = a01 * a01 + a02 * a02 + a12 * a12
    q = (a00 + a11 + a22) / 3.0
    b00, b11, b22 = a00 - q, a11 - q, a22 - q
    p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0, p, 1.0)
    det = (b00 * (b11 * b22 - a12 * a12)
           - a01 * (a01 * b22 - a12 * a02)
           + a02 * (a01 * a12 - b11 * a02))
    r = np.clip(det / (2.0 * safe**3), -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    out = np.stack([lo, mid, hi], axis=-1)
    return np.sort(out, axis=-1)


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _null_vector(rows, lam):
    m = [list(r) for r in rows]
    for k in range(3):
        m[k][k] -= lam
    crosses = (_cross(m[0], m[1]), _cross(m[0], m[2]), _cross(m[1], m[2]))
    best = max(crosses, key=lambda v: _dot(v, v))
    norm = math.sqrt(_dot(best, best))
    return tuple(c / norm for c in best)


def _cardano_scalar(rows):
    (a00, a01, a02), (_, a11, a12), (_, _, a22) = rows
    off = a01 * a01 + a02 * a02 + a12 * a12
    q = (a00 + a11 + a22) / 3.0
    b00, b11, b22 = a00 - q, a11 - q, a22 - q
    p = math.sqrt((b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off) / 6.0)
    if p == 0.0:
        return q, q, q
    det = (b00 * (b11 * b22 - a12 * a12)
           - a01 * (a01 * b22 - a12 * a02)
           + a02 * (a01 * a12 - b11 * a02))
    r = min(1.0, max(-1.0, det / (2.0 * p ** 3)))
    phi = math.acos(r) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return tuple(sorted((lo, 3.0 * q - hi - lo, hi)))


def _discriminant_ratio(values, scale: float) -> float:
    l0, l1, l2 = values
    gaps = (l1 - l0) * (l2 - l1) * (l2 - l0)
    return (gaps * gaps) / scale**6


def _rayleigh(rows, w):
    return _dot(w, (_dot(rows[0], w), _dot(rows[1], w), _dot(rows[2], w)))


def _eig_cardano(a: np.ndarray):
    rows = a.tolist()
    values = _cardano_scalar(rows)
    scale = max(abs(values[0]), abs(values[2]), values[2] - values[0])
    if scale == 0.0 or _discriminant_ratio(values, scale) < _DEGENERATE_DISCRIMINANT:
        return None
    w0 = _null_vector(rows, values[0])
    w2 = _null_vector(rows, values[2])
    d = _dot(w2, w0)
    w2 = tuple(x - d * y for x, y in zip(w2, w0))
    n = math.sqrt(_dot(w2, w2))
    w2 = tuple(x / n for x in w2)
    w1 = _cross(w2, w0)
    cols = [w0, w1, w2]
    # tighten the eigenvalues with Rayleigh quotients
    values = [_rayleigh(rows, w) for w in cols]
    if not _residual_ok_scalar(rows, values, cols):
        return None
    return values, cols


def jacobi_eigh(a: np.ndarray, max_sweeps: int = 50):
    """Cyclic Jacobi diagonalisation of a symmetric 3x3 matrix."""
    a = np.array(a, dtype=float)
    v = np.eye(3)
    norm = float(np.abs(a).max()) or 1.0
    for _ in range(max_sweeps):
        off = abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2])
        if off <= 1e-300 or off < 1e-17 * norm:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            if abs(apq) < 1e-300 * abs(a[q, q] - a[p, p]):
                # rotation angle underflows; the element is negligible
                a[p, q] = a[q, p] = 0.0
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    return np.diag(a).copy(), v


def _residual_ok_scalar(rows, values, cols) -> bool:
    norm = max(max(abs(x) for r in rows for x in r), 1e-300)
    for lam, w in zip(values, cols):
        for r, wi in zip(rows, w):
            if abs(_dot(r, w) - lam * wi) > _RESIDUAL_TOL * norm:
                return False
    for i in range(3):
        for j in range(i, 3):
            if abs(_dot(cols[i], cols[j]) - (i == j)) > 1e-12:
                return False
    return True


def eigendecompose(h) -> SpectralDecomposition:
    """Sorted eigenvalues and orthonormal eigenvectors of a symmetric 3x3.

    Eigenvector signs are fixed so the largest-magnitude component is
    positive (first index wins ties), making the result deterministic.
    """
    a = np.asarray(h, dtype=float)
    if a.shape != (3, 3) or not np.array_equal(a, a.T):
        raise ValueError("expected a symmetric 3x3 matrix")
    block = _decoupled_index(a)
    if block is not None:
        return _eig_block(a, *block)
    found = _eig_cardano(a)
    if found is not None:
        return _finish_cols(*found)
    return _finish(*jacobi_eigh(a))


@dataclass(frozen=True)
class BoltzmannMatrix:
    """``exp(-beta h)`` stored as ``shifted * exp(log_scale)``.

    ``shifted`` has its dominant eigenvalue equal to one, so it stays finite
    when ``exp(-beta h)`` itself would overflow.
    """

    shifted: np.ndarray
    log_scale: float

    @property
    def log_z(self) -> float:
        return math.log(float(np.trace(self.shifted))) + self.log_scale

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    @property
    def matrix(self) -> np.ndarray:
        """Unscaled matrix; overflows for very large ``beta * Delta``."""
        return self.shifted * math.exp(self.log_scale)

    @property
    def state(self) -> np.ndarray:
        """Normalised thermal state ``exp(-beta h) / z``."""
        return self.shifted / np.trace(self.shifted)

    def rescaled(self, log_scale: float) -> np.ndarray:
        """``shifted`` re-expressed relative to another scale factor."""
        return self.shifted * math.exp(self.log_scale - log_scale)


def boltzmann(decomp: SpectralDecomposition, beta: float) -> BoltzmannMatrix:
    check_beta(beta)
    eps = decomp.values
    w = decomp.vectors
    weights = np.exp(-beta * (eps - eps[0]))
    shifted = (w * weights) @ w.T
    shifted = 0.5 * (shifted + shifted.T)
    return BoltzmannMatrix(shifted, -beta * float(eps[0]))


def closed_form_boltzmann_delta0(params: ModelParams, beta: float, branch: int,
                                 y0: float) -> BoltzmannMatrix:
    """Closed-form ``exp(-beta h)`` at ``delta = 0`` with one active mode.

    Entries are the hyperbolic expressions ``a_+``, ``a_-`` and ``b_n``,
    evaluated with the common factor ``exp(beta Delta (Omega - 1) / 2)``
    pulled out.
    """
    validate(params)
    check_beta(beta)
    if params.delta != 0:
        raise ParameterError("closed form requires delta == 0")
    if branch not in (1, 2):
        raise ParameterError(f"branch must be 1 or 2, got {branch!r}")
    D = params.Delta
    g = params.g(branch)
    x2 = 16.0 * g * g * y0 * y0 / (D * D)
    omega = math.sqrt(1.0 + x2)
    omega_m1 = x2 / (omega + 1.0)
    log_scale = 0.5 * beta * D * omega_m1
    e2x = math.exp(-beta * D * omega)              # exp(-2x), x = beta D Omega / 2
    sinh_part = -math.expm1(-beta * D * omega)      # 1 - exp(-2x)
    a_plus = 0.5 * ((1.0 + e2x) + sinh_part / omega)
    a_minus = 0.5 * (omega_m1 + e2x * (omega + 1.0)) / omega
    b = -(4.0 * g * y0 / (D * omega)) * 0.5 * sinh_part
    spectator = math.exp(-log_scale)
    m = np.zeros((3, 3))
    if branch == 1:
        m[0, 0], m[2, 2], m[0, 2], m[2, 0] = a_plus, a_minus, b, b
        m[1, 1] = spectator
    else:
        m[1, 1], m[2, 2], m[1, 2], m[2, 1] = a_plus, a_minus, b, b
        m[0, 0] = spectator
    return BoltzmannMatrix(m, log_scale)
