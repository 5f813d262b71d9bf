"""Random-matrix machinery for region-local STFT sampling certificates.

For a sample point lam drawn uniformly from a region Omega, the N x N
rank-one matrix

    (T_j)_{kl} = V_phi psi_k(lam_j) * conj(V_phi psi_l(lam_j))

turns sampled energies of p = sum_k c_k psi_k in V_N into quadratic
forms: sum_j |V_phi p(lam_j)|^2 = <c, (sum_j T_j^T) c>.  Its expectation
is diag(alpha_k)/|Omega| exactly, so the smallest eigenvalue of the
centered average (1/r) sum_j (T_j - E T) measures how far a concrete
draw is from the ideal sampling behaviour:

    min-eig >= -nu/|Omega|
      =>  (1/r) sum_j |V_phi p(lam_j)|^2 >= (<Hp,p> - nu ||p||^2) / |Omega|
          for every p in V_N.

The matrix Bernstein inequality bounds the failure probability of that
event; this module evaluates those closed-form tails exactly as stated
(values may exceed 1 or go negative -- clamping is presentation-layer
only, so the formulas stay cross-checkable) and estimates the empirical
failure frequency by seeded Monte Carlo.

Note on exponents: the general Bernstein tail used here carries the
customary t^2/2 numerator, while the specialized subspace bound
N*exp(-nu^2 r / (|Omega|(1+nu/3))) is the (sharper) form without the
1/2; consequently subspace = N*(tropp/N)^2 under the canonical
substitution sigma^2 = r/|Omega|, B = 1, t = r*nu/|Omega|.  Both are
implemented exactly as stated; Monte Carlo validation shows the sharper
form still dominates the empirical tails at the scales exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .locop import EigenSystem
from .regions import TFRegion, _draw_indices
from .tfcore import TFPoint, Window, _analysis_rows, _stft_values

__all__ = [
    "TMatrix",
    "TailParams",
    "build_T_matrix",
    "expected_T",
    "empirical_min_eigenvalue",
    "tropp_tail",
    "subspace_failure_bound",
    "covering_tail",
    "success_probability",
    "required_samples",
    "monte_carlo_failure_frequency",
    "covering_exceedance_frequency",
]

# spawn-key stream ids for counter-based seed derivation (see cli.derive_seed)
TRIAL_STREAM = 1


@dataclass(eq=False)
class TMatrix:
    """Rank-one Hermitian N x N sample matrix attached to one grid point."""

    entries: np.ndarray
    source_point: TFPoint


@dataclass
class TailParams:
    """Parameter bundle for the closed-form probability tails.

    a defaults to 3/|Omega| (the covering rate used by the combined
    bound); eps1/eps2 are the covering and eigenvalue-count excesses.
    """

    nu: float
    r: int
    omega_measure: float
    N: int
    eps1: float = 0.0
    eps2: float = 0.0
    a: float | None = None

    def __post_init__(self):
        if self.nu < 0:
            raise ParameterError("nu must be >= 0")
        if self.r < 1:
            raise ParameterError("r must be >= 1")
        if self.omega_measure <= 0:
            raise ParameterError("omega_measure must be positive")
        if self.a is None:
            self.a = 3.0 / self.omega_measure
        if self.a <= 1.0 / self.omega_measure:
            raise ParameterError("covering rate a must exceed 1/|Omega|")


def _sample_vector(lam: TFPoint, eigs: EigenSystem, window: Window) -> np.ndarray:
    # v[k] = V_phi psi_k(lam), k = 1..N
    row = _analysis_rows(np.array([lam.m]), np.array([lam.n]), window.values)[0]
    return row @ eigs.basis()


def build_T_matrix(lam: TFPoint, eigs: EigenSystem, window: Window) -> TMatrix:
    """T = v v^H with v_k = V_phi psi_k(lam); trace = ||P_{V_N} pi(lam) phi||^2."""
    if eigs.N < 1:
        raise ParameterError("build_T_matrix needs a spectral cut with N >= 1")
    v = _sample_vector(lam, eigs, window)
    return TMatrix(np.outer(v, np.conj(v)), lam)


def expected_T(eigs: EigenSystem, region: TFRegion) -> np.ndarray:
    """E(T) over a uniform point of the region: diag(alpha_1..alpha_N)/|Omega|, exact."""
    return np.diag(eigs.eigenvalues[: eigs.N]) / region.measure


def _region_table(eigs: EigenSystem, region: TFRegion, window: Window) -> np.ndarray:
    """E[i, k] = V_phi psi_k(p_i) over all region points p_i (row-major order)."""
    N = eigs.N
    cols = []
    for k in range(N):
        V = _stft_values(eigs.eigenvectors[:, k], window.values)
        cols.append(V[region.mask])
    return np.stack(cols, axis=1)


def _min_eig_from_rows(A: np.ndarray, diag_term: np.ndarray) -> float:
    # rows of A are the sample vectors v_j; sum_j T_j = A^T conj(A)
    r = A.shape[0]
    S = (A.T @ np.conj(A)) / r - diag_term
    S = 0.5 * (S + S.conj().T)
    return float(np.linalg.eigvalsh(S)[0])


def empirical_min_eigenvalue(
    samples, eigs: EigenSystem, region: TFRegion, window: Window
) -> float:
    """Smallest eigenvalue of (1/r) sum_j (T_j - E T) for a concrete draw.

    Always >= -(1 + 1/|Omega|) since each centered summand has norm <= 1.
    """
    if samples.r < 1:
        raise ParameterError("empirical statistic needs r >= 1")
    if eigs.N < 1:
        raise ParameterError("empirical statistic needs a spectral cut with N >= 1")
    W = _analysis_rows(samples.points[:, 0], samples.points[:, 1], window.values)
    A = W @ eigs.basis()
    return _min_eig_from_rows(A, expected_T(eigs, region))


def tropp_tail(N: int, sigma2: float, Bnorm: float, t: float) -> float:
    """Bernstein-type tail N * exp(-(t^2/2)/(sigma^2 + B t / 3)) for matrix sums.

    Raw value; may exceed 1.
    """
    if t < 0 or sigma2 < 0 or Bnorm <= 0:
        raise ParameterError("tropp_tail requires t >= 0, sigma2 >= 0, Bnorm > 0")
    if t == 0.0:
        return float(N)
    return float(N * math.exp(-(t * t / 2.0) / (sigma2 + Bnorm * t / 3.0)))


def subspace_failure_bound(p: TailParams) -> float:
    """Tail for the V_N sampling event: N * exp(-nu^2 r / (|Omega| (1 + nu/3)))."""
    om = p.omega_measure
    return float(p.N * math.exp(-(p.nu**2) * p.r / (om * (1.0 + p.nu / 3.0))))


def covering_tail(p: TailParams) -> float:
    """P(N0 > a r) <= (|Omega|+eps1) * exp(-r (a ln(a|Omega|) - (a - 1/|Omega|)))."""
    om = p.omega_measure
    a = p.a
    exponent = a * math.log(a * om) - (a - 1.0 / om)
    return float((om + p.eps1) * math.exp(-p.r * exponent))


def success_probability(p: TailParams) -> float:
    """Lower bound on P(two-sided sampling inequality holds); may be negative.

    1 - (|Omega|+eps2) * exp(-nu^2 r/(|Omega|(1+nu/3))) - covering_tail.
    The first factor uses |Omega|+eps2 in place of the integer dimension.
    """
    om = p.omega_measure
    sub = (om + p.eps2) * math.exp(-(p.nu**2) * p.r / (om * (1.0 + p.nu / 3.0)))
    return float(1.0 - sub - covering_tail(p))


def required_samples(nu: float, delta: float, omega_measure: float, eps2: float = 0.0) -> int:
    """Sample count from the threshold |Omega| (1+nu/3)/nu^2 * ln(2(|Omega|+eps2)/delta).

    Rounded to the nearest integer (minimum 1), matching the published count
    at the reference scale (9486 from a threshold of 9486.067).
    """
    if nu <= 0:
        raise ParameterError("nu must be positive")
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie strictly in (0, 1)")
    if omega_measure <= 0:
        raise ParameterError("omega_measure must be positive")
    bound = omega_measure * (1.0 + nu / 3.0) / nu**2 * math.log(
        2.0 * (omega_measure + eps2) / delta
    )
    return max(1, int(math.floor(bound + 0.5)))


def _trial_seed(master_seed: int, trial: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(TRIAL_STREAM, int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


def monte_carlo_failure_frequency(
    trials: int,
    nu: float,
    r: int,
    setup,
    master_seed: int,
    threads: int = 1,
) -> float:
    """Fraction of trials with empirical min-eigenvalue <= -nu/|Omega|.

    setup is the (region, window, eigensystem) triple.  Trial i draws its
    sample set with the derived seed SeedSequence(master_seed, spawn_key=
    (1, i)), so trials are independent, reproducible, and parallel-safe;
    aggregation is an order-independent count.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    region, window, eigs = setup
    if eigs.N < 1:
        raise ParameterError("Monte Carlo needs a spectral cut with N >= 1")
    table = _region_table(eigs, region, window)
    P = region.point_count
    alpha = eigs.eigenvalues[: eigs.N]
    thresh = -nu / region.measure
    diag = alpha / region.measure

    # vectorized over trial chunks: gather rows, batched Gram, batched eigvalsh
    def count_chunk(t0: int, t1: int) -> int:
        B = t1 - t0
        idx = np.empty((B, r), dtype=np.int64)
        for i in range(B):
            rng = np.random.default_rng(np.random.SeedSequence(_trial_seed(master_seed, t0 + i)))
            idx[i] = _draw_indices(rng, P, r, False)
        A = table[idx]  # (B, r, N)
        S = np.einsum("brk,brl->bkl", A, np.conj(A)) / r
        S[:, np.arange(eigs.N), np.arange(eigs.N)] -= diag
        S = 0.5 * (S + np.conj(np.swapaxes(S, 1, 2)))
        mins = np.linalg.eigvalsh(S)[:, 0]
        return int((mins <= thresh).sum())

    # keep the gathered (chunk, r, N) block and its conjugate near ~128 MB total
    chunk = max(1, min(trials, 4_000_000 // max(1, r * eigs.N)))
    spans = [(t0, min(t0 + chunk, trials)) for t0 in range(0, trials, chunk)]
    if threads > 1 and len(spans) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            failures = sum(ex.map(lambda s: count_chunk(*s), spans))
    else:
        failures = sum(count_chunk(*s) for s in spans)
    return failures / trials


def covering_exceedance_frequency(
    trials: int,
    r: int,
    region: TFRegion,
    cell_px: int,
    a: float,
    master_seed: int,
) -> float:
    """Fraction of trials whose covering index N0 exceeds a*r (same seeding scheme)."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if cell_px < 1:
        raise ParameterError("cell_px must be >= 1")
    L = region.L
    pts = region.points()
    P = region.point_count
    C = -(-L // cell_px)
    cell_of_point = (pts[:, 0] // cell_px) * C + (pts[:, 1] // cell_px)
    ncells = C * C
    threshold = a * r
    failures = 0
    for i in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(_trial_seed(master_seed, i)))
        idx = _draw_indices(rng, P, r, False)
        occ = np.bincount(cell_of_point[idx], minlength=ncells)
        if occ.max() > threshold:
            failures += 1
    return failures / trials
