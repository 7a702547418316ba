"""Numeric engine for pure Gaussian states in the complex-graph picture.

A pure ``N``-mode Gaussian state is stored as a complex symmetric graph
matrix ``Z`` with positive-definite imaginary part, together with real
first moments and a complex log-scalar.  The state is annihilated by the
complex nullifiers ``p - Z x`` up to its first moments:
``<p - Z x> = mean_p - Z mean_x`` holds identically.

Conventions: ``x = (a + a+)/sqrt(2)``, vacuum variance ``1/2``; the
covariance matrix orders all positions before all momenta.  A cluster
node of squeezing ``r`` has ``Z = i e^{-2r}`` (position variance
``e^{2r}/2``), so large ``r`` approaches a zero-momentum eigenstate.
The ideal infinite-squeezing limit is never represented here; the
symbolic engine owns it.

The log-scalar tracks the scalar of the canonical normal-ordered
displacement frame ``prod_j Z_j(mean_p_j) X_j(mean_x_j)`` applied to a
zero-mean state, so displacement phases agree exactly with the symbolic
engine; Gaussian gates update it through the Weyl-reordering identity.
Homodyne measurement does not maintain it (records carry no phase).

States are self-contained values: operations return new instances and
never touch shared mutable state.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .lattice import StabilizerGen

__all__ = [
    "GaussianGraphState",
    "CovarianceMoments",
    "MeasurementRecord",
    "graph_from_cluster",
    "to_covariance",
    "from_covariance",
    "displace",
    "apply_gate",
    "fourier_all",
    "measure_homodyne",
    "nullifier_stats",
    "add_mode",
]


@dataclass(frozen=True)
class MeasurementRecord:
    mode: int
    basis: str                # "position" | "momentum"
    outcome: float


@dataclass(frozen=True)
class CovarianceMoments:
    """Covariance matrix (positions first, then momenta) and mean vector."""

    sigma: np.ndarray
    mean: np.ndarray
    modes: tuple

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def purity_defect(self) -> float:
        n = self.n_modes
        if n == 0:
            return 0.0
        sign, logdet = np.linalg.slogdet(2.0 * self.sigma)
        return abs(sign * math.exp(logdet) - 1.0)

    def uncertainty_defect(self) -> float:
        """Most negative eigenvalue of ``sigma + i/2 Omega`` (clipped at 0)."""
        n = self.n_modes
        if n == 0:
            return 0.0
        omega = np.block([
            [np.zeros((n, n)), np.eye(n)],
            [-np.eye(n), np.zeros((n, n))],
        ])
        eigs = np.linalg.eigvalsh(self.sigma + 0.5j * omega)
        return float(max(0.0, -eigs.min()))


class GaussianGraphState:
    """Pure Gaussian state ``(Z, mean_x, mean_p, log_scalar)`` with named modes."""

    __slots__ = ("Z", "mean_x", "mean_p", "log_scalar", "modes")

    def __init__(self, Z: np.ndarray, mean_x: np.ndarray, mean_p: np.ndarray,
                 log_scalar: complex = 0j, modes: tuple | None = None):
        Z = np.asarray(Z, dtype=complex)
        n = Z.shape[0]
        if Z.shape != (n, n):
            raise ValueError("graph matrix must be square")
        if not np.allclose(Z, Z.T, atol=1e-12):
            raise ValueError("graph matrix must be symmetric")
        self.Z = 0.5 * (Z + Z.T)
        self.mean_x = np.asarray(mean_x, dtype=float).copy()
        self.mean_p = np.asarray(mean_p, dtype=float).copy()
        if self.mean_x.shape != (n,) or self.mean_p.shape != (n,):
            raise ValueError("first-moment vectors must match the graph size")
        self.log_scalar = complex(log_scalar)
        self.modes = tuple(modes) if modes is not None else tuple(range(n))
        if len(self.modes) != n:
            raise ValueError("mode labels must match the graph size")

    # -- bookkeeping -----------------------------------------------------------

    @property
    def n_modes(self) -> int:
        return self.Z.shape[0]

    def index_of(self, mode) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ValueError(f"mode {mode!r} not present in the state") from None

    def copy(self) -> "GaussianGraphState":
        return GaussianGraphState(self.Z, self.mean_x, self.mean_p,
                                  self.log_scalar, self.modes)

    def nullifier_residual(self) -> float:
        """Max deviation of ``<p - Z x>`` from ``mean_p - Z mean_x`` (always 0
        by construction; kept as an explicit identity check)."""
        expect = self.mean_p - self.Z.real @ self.mean_x
        implied = (self.mean_p - self.Z @ self.mean_x).real
        return float(np.max(np.abs(expect - implied))) if self.n_modes else 0.0

    @classmethod
    def vacuum(cls, n: int, modes=None) -> "GaussianGraphState":
        return cls(1j * np.eye(n), np.zeros(n), np.zeros(n), 0j, modes)

    def __repr__(self) -> str:
        return f"GaussianGraphState({self.n_modes} modes)"


def graph_from_cluster(A: np.ndarray, squeezing, modes=None) -> GaussianGraphState:
    """Cluster state with graph ``A`` and per-node squeezing.

    ``Z = A + i diag(e^{-2 r_k})``: the controlled-phase pattern of ``A``
    on a row of momentum-squeezed nodes.  ``squeezing`` is a scalar or a
    map keyed like ``modes`` (default ``0..N-1``); values must be finite
    and nonnegative here.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency matrix must be symmetric")
    mode_list = tuple(modes) if modes is not None else tuple(range(n))
    diag = np.zeros(n)
    for k, mode in enumerate(mode_list):
        r = float(squeezing[mode] if isinstance(squeezing, dict) else squeezing)
        if math.isinf(r):
            raise ValueError("the numeric engine cannot represent infinite squeezing")
        if r < 0:
            raise ValueError("squeezing must be nonnegative")
        diag[k] = math.exp(-2.0 * r)
    return GaussianGraphState(A + 1j * np.diag(diag), np.zeros(n), np.zeros(n),
                              0j, mode_list)


# -- covariance bridge ---------------------------------------------------------


def to_covariance(state: GaussianGraphState) -> CovarianceMoments:
    """Closed-form second moments of the graph state.

    With ``Z = V + iU``: ``sigma_xx = U^-1 / 2``, ``sigma_xp = U^-1 V / 2``,
    ``sigma_pp = (U + V U^-1 V)/2``.
    """
    n = state.n_modes
    if n == 0:
        return CovarianceMoments(np.zeros((0, 0)), np.zeros(0), ())
    U = state.Z.imag
    V = state.Z.real
    try:
        np.linalg.cholesky(U)
    except np.linalg.LinAlgError:
        raise ValueError("graph imaginary part must be positive definite") from None
    Uinv = np.linalg.inv(U)
    Uinv = 0.5 * (Uinv + Uinv.T)
    sxx = 0.5 * Uinv
    sxp = 0.5 * Uinv @ V
    spp = 0.5 * (U + V @ Uinv @ V)
    sigma = np.block([[sxx, sxp], [sxp.T, spp]])
    sigma = 0.5 * (sigma + sigma.T)
    mean = np.concatenate([state.mean_x, state.mean_p])
    return CovarianceMoments(sigma, mean, state.modes)


def from_covariance(cov: CovarianceMoments, log_scalar: complex = 0j) -> GaussianGraphState:
    """Recover the graph form of a pure state; raises if the moments are
    not pure to working precision."""
    n = cov.n_modes
    if n == 0:
        return GaussianGraphState(np.zeros((0, 0)), np.zeros(0), np.zeros(0),
                                  log_scalar, ())
    sxx = cov.sigma[:n, :n]
    sxp = cov.sigma[:n, n:]
    U = np.linalg.inv(2.0 * sxx)
    U = 0.5 * (U + U.T)
    V = 2.0 * U @ sxp
    scale = max(1.0, float(np.max(np.abs(cov.sigma))))
    asym = np.max(np.abs(V - V.T)) if n else 0.0
    if asym > 1e-8 * scale:
        raise ValueError(f"moments are not those of a pure state (defect {asym:.2e})")
    V = 0.5 * (V + V.T)
    spp = 0.5 * (U + V @ np.linalg.inv(U) @ V)
    if np.max(np.abs(spp - cov.sigma[n:, n:])) > 1e-7 * scale:
        raise ValueError("moments are not those of a pure state")
    return GaussianGraphState(V + 1j * U, cov.mean[:n], cov.mean[n:],
                              log_scalar, cov.modes)


# -- displacements and gates -----------------------------------------------------


def displace(state: GaussianGraphState, mode, kind: str, amount: float) -> GaussianGraphState:
    """Apply ``X(amount)`` (kind "X") or ``Z(amount)`` (kind "Z") to one mode.

    Covariances are untouched.  ``X(s)`` crosses the stored ``Z(mean_p)``
    frame factor, contributing ``exp(-i s mean_p)`` to the log-scalar;
    ``Z(t)`` merges silently.
    """
    amount = float(amount)
    if not math.isfinite(amount):
        raise ValueError("displacement amount must be finite")
    k = state.index_of(mode)
    out = state.copy()
    if kind.upper() == "X":
        out.log_scalar = out.log_scalar - 1j * amount * out.mean_p[k]
        out.mean_x[k] += amount
    elif kind.upper() == "Z":
        out.mean_p[k] += amount
    else:
        raise ValueError(f"unknown displacement kind {kind!r}")
    return out


def _weyl_log_update(old_x, old_p, new_x, new_p) -> complex:
    """Scalar acquired by the canonical ``prod Z(p)X(x)`` frame when the
    first moments move symplectically: ``exp(i/2 (sum x p - sum x' p'))``."""
    return 0.5j * (float(np.dot(old_x, old_p)) - float(np.dot(new_x, new_p)))


def apply_gate(state: GaussianGraphState, gate) -> GaussianGraphState:
    """Apply a Clifford gate ``("P", mode, eta)``, ("F", mode)`` or
    ``("CZ", i, j)``.

    ``P`` and ``CZ`` act natively on the graph (real self-loop / edge
    increments); the single-mode Fourier rotation goes through the
    covariance domain, which is always well defined.
    """
    kind = gate[0]
    out = state.copy()
    old_x, old_p = state.mean_x, state.mean_p
    if kind == "P":
        _, mode, eta = gate
        k = out.index_of(mode)
        out.Z[k, k] += float(eta)
        new_x = old_x.copy()
        new_p = old_p.copy()
        new_p[k] += float(eta) * old_x[k]
    elif kind == "CZ":
        _, mi, mj = gate
        i, j = out.index_of(mi), out.index_of(mj)
        if i == j:
            raise ValueError("controlled-phase needs two distinct modes")
        out.Z[i, j] += 1.0
        out.Z[j, i] += 1.0
        new_x = old_x.copy()
        new_p = old_p.copy()
        new_p[i] += old_x[j]
        new_p[j] += old_x[i]
    elif kind == "F":
        _, mode = gate
        k = out.index_of(mode)
        n = state.n_modes
        S = np.eye(2 * n)
        S[k, k] = 0.0
        S[k, n + k] = -1.0
        S[n + k, n + k] = 0.0
        S[n + k, k] = 1.0
        cov = to_covariance(state)
        sigma = S @ cov.sigma @ S.T
        mean = S @ cov.mean
        new = from_covariance(CovarianceMoments(sigma, mean, state.modes))
        new_x, new_p = new.mean_x, new.mean_p
        out = GaussianGraphState(new.Z, new_x, new_p, state.log_scalar, state.modes)
    else:
        raise ValueError(f"unsupported gate {gate!r}")
    out.mean_x = new_x
    out.mean_p = new_p
    out.log_scalar = state.log_scalar + _weyl_log_update(old_x, old_p, new_x, new_p)
    return out


def fourier_all(state: GaussianGraphState) -> GaussianGraphState:
    """Fourier rotation of every mode at once: ``Z -> -Z^{-1}``, means
    ``(x, p) -> (-p, x)``."""
    if state.n_modes == 0:
        return state.copy()
    Znew = -np.linalg.inv(state.Z)
    Znew = 0.5 * (Znew + Znew.T)
    new_x = -state.mean_p
    new_p = state.mean_x.copy()
    log = state.log_scalar + _weyl_log_update(state.mean_x, state.mean_p, new_x, new_p)
    return GaussianGraphState(Znew, new_x, new_p, log, state.modes)


# -- measurement ------------------------------------------------------------------


def measure_homodyne(state: GaussianGraphState, mode, basis: str, *,
                     outcome: float | None = None,
                     rng: np.random.Generator | None = None,
                     ) -> tuple[GaussianGraphState, MeasurementRecord]:
    """Ideal homodyne detection of one quadrature; the mode is removed.

    The outcome is drawn from the exact Gaussian marginal unless forced.
    The surviving modes are conditioned on the measured quadrature
    (pseudo-inverse of its 1x1 variance block), which keeps the state
    pure.  Measuring the last mode leaves an empty state.
    """
    basis = basis.lower()
    if basis not in ("position", "momentum"):
        raise ValueError(f"unknown basis {basis!r}")
    k = state.index_of(mode)
    n = state.n_modes
    cov = to_covariance(state)
    q = k if basis == "position" else n + k
    var = float(cov.sigma[q, q])
    mu = float(cov.mean[q])
    if outcome is None:
        if rng is None:
            raise ValueError("measurement needs a random generator or a forced outcome")
        m = float(rng.normal(mu, math.sqrt(max(var, 0.0))))
    else:
        m = float(outcome)
        if not math.isfinite(m):
            raise ValueError("forced outcome must be finite")
    keep = [i for i in range(2 * n) if i not in (k, n + k)]
    kept_modes = tuple(md for i, md in enumerate(state.modes) if i != k)
    record = MeasurementRecord(mode=mode, basis=basis, outcome=m)
    if not keep:
        empty = GaussianGraphState(np.zeros((0, 0)), np.zeros(0), np.zeros(0),
                                   state.log_scalar, ())
        return empty, record
    a = cov.sigma[keep, q]
    gain = a / var if var > 1e-300 else np.zeros_like(a)
    mean = cov.mean[keep] + gain * (m - mu)
    sigma = cov.sigma[np.ix_(keep, keep)] - np.outer(gain, a)
    sigma = 0.5 * (sigma + sigma.T)
    new = from_covariance(CovarianceMoments(sigma, mean, kept_modes),
                          log_scalar=state.log_scalar)
    return new, record


# -- observables ------------------------------------------------------------------


def nullifier_stats(state: GaussianGraphState, gen: StabilizerGen) -> tuple[complex, complex]:
    """Expectation and complex-bilinear variance of a nullifier generator.

    The variance is the bilinear (not sesquilinear) form of the
    coefficient vector on the covariance matrix; it vanishes identically
    on exact complex nullifiers of the state.
    """
    alpha, beta = gen.coefficient_vectors(state.modes)
    expectation = gen.offset + alpha @ state.mean_x + beta @ state.mean_p
    cov = to_covariance(state)
    w = np.concatenate([alpha, beta])
    variance = w @ cov.sigma @ w
    return complex(expectation), complex(variance)


def add_mode(state: GaussianGraphState, mode, squeezing: float) -> GaussianGraphState:
    """Append a fresh unentangled momentum-squeezed mode."""
    if mode in state.modes:
        raise ValueError(f"mode {mode!r} already present")
    r = float(squeezing)
    if math.isinf(r) or r < 0:
        raise ValueError("squeezing must be finite and nonnegative")
    n = state.n_modes
    Z = np.zeros((n + 1, n + 1), dtype=complex)
    Z[:n, :n] = state.Z
    Z[n, n] = 1j * math.exp(-2.0 * r)
    return GaussianGraphState(Z, np.append(state.mean_x, 0.0),
                              np.append(state.mean_p, 0.0),
                              state.log_scalar, state.modes + (mode,))


# -- exports ----------------------------------------------------------------------


def snapshot_text(state: GaussianGraphState) -> str:
    """Structured text export: graph rows as complex pairs, means, scalar."""
    out = io.StringIO()
    out.write(f"modes {' '.join(str(m) for m in state.modes)}\n")
    out.write(f"log_scalar {state.log_scalar.real!r} {state.log_scalar.imag!r}\n")
    for i in range(state.n_modes):
        row = " ".join(f"{z.real!r} {z.imag!r}" for z in state.Z[i])
        out.write(f"Z {row}\n")
    out.write("mean_x " + " ".join(repr(v) for v in state.mean_x) + "\n")
    out.write("mean_p " + " ".join(repr(v) for v in state.mean_p) + "\n")
    return out.getvalue()


def moments_csv(state: GaussianGraphState) -> str:
    """Per-mode first and second moments as CSV."""
    cov = to_covariance(state)
    n = state.n_modes
    lines = ["mode,mean_x,mean_p,var_x,var_p,cov_xp"]
    for i, mode in enumerate(state.modes):
        lines.append(",".join([
            str(mode),
            repr(float(cov.mean[i])), repr(float(cov.mean[n + i])),
            repr(float(cov.sigma[i, i])), repr(float(cov.sigma[n + i, n + i])),
            repr(float(cov.sigma[i, n + i])),
        ]))
    return "\n".join(lines) + "\n"
