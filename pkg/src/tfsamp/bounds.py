"""Frame bounds and deterministic lower-bound constants for sampled STFTs.

The Bessel bound B of a sampled system {pi(lam_j) phi} is computed
exactly as the spectral norm of its frame operator (finite dimensions
admit the exact value; abstract covering-based estimates are both looser
and non-constructive).  The certificate constants:

    A_lemma   = (r/|Omega|) (gamma - gamma*eps/(1-gamma) - nu) - 2 B sqrt(eps/(1-gamma))
    A_theorem = (r/|Omega|) (1/2 - eps - nu - 6 sqrt(2) C_phi sqrt(eps)),  C_phi = B/N0

lower-bound the sampled energy sum_j |V_phi f(lam_j)|^2 >= A ||f||^2 for
every f that is eps-concentrated on the region, PROVIDED the empirical
min-eigenvalue statistic of the draw clears -nu/|Omega|.  Negative A is
returned as-is with a vacuous flag: it means the parameters give no
guarantee, not that sampling failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .regions import SampleSet
from .tfcore import Signal, Window, _analysis_rows

__all__ = [
    "BoundReport",
    "SamplingCheck",
    "exact_bessel_bound",
    "lemma_lower_bound_A",
    "theorem_lower_bound_A",
    "admissible_params",
    "verify_sampling_inequality",
]


@dataclass
class BoundReport:
    """Certificate constants for one sampled system."""

    bessel_B: float
    C_phi: float
    A_lemma: float
    A_theorem: float
    eps_max: float
    nu_max: float
    params: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.A_lemma <= 0.0 and self.A_theorem <= 0.0


@dataclass(frozen=True)
class SamplingCheck:
    """Outcome of testing A ||f||^2 <= sum_j |V_phi f(lam_j)|^2 <= r ||f||^2."""

    sample_energy: float
    norm_sq: float
    ratio: float
    lower_holds: bool
    upper_holds: bool
    A: float


def _atoms(samples: SampleSet, window: Window) -> np.ndarray:
    """(L, r) matrix whose columns are pi(lam_j) phi."""
    W = _analysis_rows(samples.points[:, 0], samples.points[:, 1], window.values)
    return np.conj(W.T)


def exact_bessel_bound(samples: SampleSet, window: Window) -> float:
    """Largest eigenvalue of the frame operator S = sum_j pi(lam_j)phi (pi(lam_j)phi)^*.

    Power iteration with matvecs through the atom matrix (O(rL) per step),
    relative tolerance 1e-10 held over several consecutive steps; falls back
    to a dense eigensolve of the smaller Gram form if the iteration stalls.
    """
    if samples.r < 1:
        raise ParameterError("Bessel bound needs at least one sample point")
    A = _atoms(samples, window)
    L, r = A.shape
    rng = np.random.default_rng(np.random.SeedSequence(0x7F5A))
    x = rng.normal(size=L) + 1j * rng.normal(size=L)
    x /= np.linalg.norm(x)
    prev = 0.0
    stable = 0
    for _ in range(20000):
        y = A @ (A.conj().T @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        lam = float(np.real(np.vdot(x, y)))
        if abs(lam - prev) <= 1e-12 * max(lam, 1e-300):
            stable += 1
            # Rayleigh quotient stalled; accept only with a certified residual
            if stable >= 5 and np.linalg.norm(y - lam * x) <= 1e-10 * max(lam, 1e-300):
                return lam
        else:
            stable = 0
        x = y / ny
        prev = lam
    # stalled: top eigenvalues too close for power iteration; go dense on the
    # smaller of Gram (r x r) and frame operator (L x L)
    if r <= L:
        G = A.conj().T @ A
        return float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[-1])
    S = A @ A.conj().T
    return float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[-1])


def lemma_lower_bound_A(r, omega_measure, gamma, eps, nu, B) -> float:
    """A = (r/|Omega|)(gamma - gamma*eps/(1-gamma) - nu) - 2B sqrt(eps/(1-gamma))."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError("gamma must lie strictly in (0, 1)")
    if not 0.0 <= eps < 1.0 - gamma:
        raise ParameterError("eps must satisfy 0 <= eps < 1 - gamma")
    q = eps / (1.0 - gamma)
    return float(r / omega_measure * (gamma - gamma * q - nu) - 2.0 * B * math.sqrt(q))


_SIX_ROOT_TWO = 6.0 * math.sqrt(2.0)


def theorem_lower_bound_A(r, omega_measure, eps, nu, C_phi) -> float:
    """A = (r/|Omega|) (1/2 - eps - nu - 6 sqrt(2) C_phi sqrt(eps)).

    Requires (eps, nu) inside the admissible ranges (which force A > 0).
    """
    eps_max, nu_max = admissible_params(C_phi)
    if not 0.0 <= eps < eps_max:
        raise ParameterError(f"eps={eps} not admissible (needs eps < {eps_max:.6g})")
    if not 0.0 <= nu < nu_max(eps):
        raise ParameterError(f"nu={nu} not admissible (needs nu < {nu_max(eps):.6g})")
    return float(
        r / omega_measure * (0.5 - eps - nu - _SIX_ROOT_TWO * C_phi * math.sqrt(eps))
    )


def admissible_params(C_phi: float):
    """Closed-form admissible thresholds: eps_max and nu_max as a function of eps.

    eps < 1 / (4 (1 + 6 sqrt(2) C_phi)^2);  nu < 1/2 - (1 + 6 sqrt(2) C_phi) sqrt(eps).
    """
    if C_phi <= 0:
        raise ParameterError("C_phi must be positive")
    c = 1.0 + _SIX_ROOT_TWO * C_phi
    eps_max = 1.0 / (4.0 * c * c)

    def nu_max(eps: float) -> float:
        return 0.5 - c * math.sqrt(max(eps, 0.0))

    return eps_max, nu_max


def verify_sampling_inequality(
    f: Signal, samples: SampleSet, window: Window, A: float
) -> SamplingCheck:
    """Evaluate both sides of A||f||^2 <= sum_j |V_phi f(lam_j)|^2 <= r||f||^2."""
    nsq = float(np.real(np.vdot(f.values, f.values)))
    if nsq == 0.0:
        raise ParameterError("sampling inequality is undefined for the zero signal")
    W = _analysis_rows(samples.points[:, 0], samples.points[:, 1], window.values)
    energy = float((np.abs(W @ f.values) ** 2).sum())
    return SamplingCheck(
        sample_energy=energy,
        norm_sq=nsq,
        ratio=energy / nsq,
        lower_holds=bool(energy >= A * nsq),
        upper_holds=bool(energy <= samples.r * nsq + 1e-9 * max(1.0, energy)),
        A=float(A),
    )
