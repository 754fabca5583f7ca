"""Time evolution under the quadratic phonon Hamiltonian and Floquet
stability.

Equations of motion: d(dtheta)/dt = p / m_eff, dp/dt = -f(t) dtheta.
The integrator is position-Verlet (drift-kick-drift) with the force matrix
evaluated at the step midpoint; each step is an exact composition of
symplectic shears, so transfer matrices are symplectic to roundoff and
backward evolution is the exact inverse of forward evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import M_EFF, RingConfig
from .lattice import ForceProvider


class DivergenceError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state during evolution at t = {t:.6g}")
        self.t = t


@dataclass
class PhaseVector:
    """First moments (dtheta_1..dtheta_N, p_1..p_N); complex entries are
    allowed (the linear dynamics is real, so complex data evolves as two
    independent real solutions)."""
    t: float
    data: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0] // 2

    @property
    def dtheta(self) -> np.ndarray:
        return self.data[: self.n]

    @property
    def p(self) -> np.ndarray:
        return self.data[self.n:]

    @property
    def dtheta_dot(self) -> np.ndarray:
        return self.p / M_EFF


@dataclass
class TransferMatrix:
    t0: float
    t1: float
    m: np.ndarray

    def symplectic_defect(self) -> float:
        n = self.m.shape[0] // 2
        j = symplectic_form(n)
        return float(np.max(np.abs(self.m.T @ j @ self.m - j)))


@dataclass
class GaussianState:
    """Quasi-free state: mean phase-space vector and 2N x 2N covariance."""
    t: float
    mean: np.ndarray
    cov: np.ndarray
    hbar: float

    @property
    def n(self) -> int:
        return self.mean.shape[0] // 2

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.cov)

    def check_uncertainty(self, tol: float = 1e-9):
        nu = self.symplectic_eigenvalues()
        if np.any(nu < self.hbar / 2.0 - tol):
            raise ValueError(
                f"covariance violates the uncertainty relation: min nu = {nu.min():.3e}")


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray
    max_modulus: float
    classification: str       # "stable" | "unstable"
    growth_rate: float        # log|lambda_max| / T
    diagnostic: str = ""


def symplectic_form(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    n = cov.shape[0] // 2
    j = symplectic_form(n)
    ev = np.linalg.eigvals(j @ cov)
    nu = np.sort(np.abs(ev.imag))
    return nu[::2]   # eigenvalues come in +-i nu pairs: keep one per pair


def default_n_sub(config: RingConfig, provider: ForceProvider | None = None) -> int:
    """Smallest n_sub with omega_max * dt < 0.1, dt = T/(N n_sub)."""
    if config.n_sub is not None:
        return config.n_sub
    if provider is None:
        provider = ForceProvider(config)
    om = provider.omega_max()
    return max(8, math.ceil(10.0 * om / config.n_ions))


def _step_times(t0: float, t1: float, dt: float):
    n_steps = round(abs(t1 - t0) / dt)
    n_steps = max(n_steps, 1)
    h = (t1 - t0) / n_steps
    return n_steps, h


def evolve_phase(state: PhaseVector, t1: float, provider: ForceProvider,
                 n_sub: int | None = None) -> PhaseVector:
    """Evolve first moments from state.t to t1 (either direction)."""
    out = _evolve_block(state.data.copy(), state.t, t1, provider,
                        n_sub=n_sub)
    return PhaseVector(t=t1, data=out)


def _evolve_block(data: np.ndarray, t0: float, t1: float,
                  provider: ForceProvider, n_sub: int | None = None) -> np.ndarray:
    """Shared stepping kernel; data has 2N rows (vector or column stack)."""
    if t1 == t0:
        return data
    config = provider.config
    ns = n_sub if n_sub is not None else default_n_sub(config, provider)
    dt = 1.0 / (config.n_ions * ns)
    provider.set_phase_grid(dt)
    n_steps, h = _step_times(t0, t1, dt)
    n = data.shape[0] // 2
    q = data[:n]
    p = data[n:]
    half_over_m = 0.5 * h / M_EFF
    t = t0
    for step in range(n_steps):
        q += half_over_m * p
        p -= h * provider.apply(t + 0.5 * h, q)
        q += half_over_m * p
        t = t0 + (step + 1) * h
        if step % 256 == 0 and not np.all(np.isfinite(p)):
            raise DivergenceError(t)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise DivergenceError(t1)
    return data


def transfer_matrix(t0: float, t1: float, provider: ForceProvider,
                    n_sub: int | None = None) -> TransferMatrix:
    """Columns are evolved phase-space basis vectors."""
    n = provider.config.n_ions
    m = _evolve_block(np.eye(2 * n), t0, t1, provider, n_sub=n_sub)
    return TransferMatrix(t0=t0, t1=t1, m=m)


def evolve_covariance(state: GaussianState, t1: float, provider: ForceProvider,
                      n_sub: int | None = None) -> GaussianState:
    """Gamma(t1) = M Gamma M^T, mean evolved by the same M."""
    n = state.n
    block = np.concatenate([state.mean[:, None], np.eye(2 * n)], axis=1)
    block = _evolve_block(block, state.t, t1, provider, n_sub=n_sub)
    mean = block[:, 0].copy()
    m = block[:, 1:]
    cov = m @ state.cov @ m.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState(t=t1, mean=mean, cov=cov, hbar=state.hbar)


def _homogeneous_stability(config: RingConfig, provider: ForceProvider,
                           n_sub: int | None, tol: float) -> StabilityReport:
    """Monodromy of a uniformly rotating ring.

    The force matrix is a constant circulant, so the Verlet map
    block-diagonalizes over the Fourier modes into 2x2 symplectic steps;
    eigenvalue moduli then come out accurate to roundoff, free of the
    conditioning loss of the dense 2N x 2N eigenproblem.
    """
    n = config.n_ions
    stiff = np.fft.fft(provider.matrix(0.0)[0]).real
    stiff[0] = 0.0   # translation mode: row sums vanish identically
    ns = n_sub if n_sub is not None else default_n_sub(config, provider)
    h = 1.0 / (n * ns)
    n_steps = n * ns
    a = 0.5 * h / M_EFF
    ev = np.empty(2 * n, dtype=complex)
    mods = np.empty(2 * n)
    for i, s in enumerate(stiff):
        # drift(h/2) kick(h) drift(h/2) for one Fourier mode
        m11 = 1.0 - a * h * s
        m12 = a * (2.0 - a * h * s)
        m21 = -h * s
        tr = 2.0 * m11
        det = m11 * m11 - m12 * m21
        disc = tr * tr - 4.0 * det
        if disc < 0.0:
            lam = 0.5 * (tr + 1j * math.sqrt(-disc))
            pair = (lam, lam.conjugate())
        else:
            rt = math.sqrt(disc)
            pair = (0.5 * (tr + rt) + 0j, 0.5 * (tr - rt) + 0j)
        for j, lam in enumerate(pair):
            ev[2 * i + j] = lam ** n_steps
            mods[2 * i + j] = abs(lam) ** n_steps
    max_mod = float(np.max(mods))
    stable = max_mod <= 1.0 + tol
    return StabilityReport(eigenvalues=ev, max_modulus=max_mod,
                           classification="stable" if stable else "unstable",
                           growth_rate=0.0 if stable else math.log(max_mod),
                           diagnostic="circulant mode decomposition")


def monodromy_stability(config: RingConfig, provider: ForceProvider | None = None,
                        n_sub: int | None = None, tol: float = 1e-6) -> StabilityReport:
    """Floquet classification of a static profile.

    Builds the transfer matrix over one sub-period T/N, composes it with the
    index-shift permutation (licensed by the shift covariance of the force
    matrix) and raises the product to the N-th power to obtain the
    full-period monodromy.  A uniformly rotating ring is handled by exact
    Fourier-mode decomposition instead.
    """
    if config.ramp is not None:
        raise ValueError("monodromy analysis requires a static profile")
    if provider is None:
        provider = ForceProvider(config)
    if config.v_min_frac == 1.0:
        return _homogeneous_stability(config, provider, n_sub, tol)
    n = config.n_ions
    try:
        m_sub = transfer_matrix(0.0, 1.0 / n, provider, n_sub=n_sub).m
    except DivergenceError as exc:
        return StabilityReport(eigenvalues=np.array([]), max_modulus=math.inf,
                               classification="unstable", growth_rate=math.inf,
                               diagnostic=str(exc))
    # f(t + T/N) = P f(t) P^T with (P v)_i = v_{i+1}, so the full-period
    # monodromy is (P^-1 M_sub)^N; applying P^-1 permutes rows i -> i-1.
    inv_perm = np.roll(np.arange(n), 1)
    inv_full = np.concatenate([inv_perm, inv_perm + n])
    step = m_sub[inv_full, :]
    # eigenvalues of step^N are the N-th powers of those of step; powering
    # the spectrum instead of the matrix keeps moduli accurate to roundoff
    # even when the explicit matrix power would be badly conditioned
    ev_step = np.linalg.eigvals(step)
    ev = ev_step ** n
    max_mod = float(np.max(np.abs(ev_step)) ** n)
    stable = max_mod <= 1.0 + tol
    growth = 0.0 if stable else math.log(max_mod)
    return StabilityReport(eigenvalues=ev, max_modulus=max_mod,
                           classification="stable" if stable else "unstable",
                           growth_rate=growth)
