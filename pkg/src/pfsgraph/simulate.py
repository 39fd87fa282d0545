"""Block-structured Gaussian simulation instances for the evaluation studies.

The precision matrix has three blocks: a single target node, its true
neighborhood (internally edgeless), and a sparse bulk. Off-diagonal nonzeros
are +-1, the diagonal is shifted for positive definiteness, and the spectrum
is affinely rescaled to prescribed extreme eigenvalues, which preserves the
zero pattern off the diagonal. A nonlinear variant rewrites the target column
as a sum of Gaussian bumps of its neighbors at a fixed signal-to-noise ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .data import DataMatrix, make_data_matrix
from .errors import DegenerateSignalError, GenerationError
from .graphs import TrueGraph

ResponseKind = Literal["linear", "nonlinear"]


@dataclass(frozen=True)
class PrecisionSpec:
    """Shape of the simulated precision matrix."""

    p: int
    block_sizes: tuple[int, int, int]
    avg_degree_23: float
    avg_degree_33: float
    eig_min: float
    eig_max: float
    seed: int

    def __post_init__(self):
        if sum(self.block_sizes) != self.p:
            raise ValueError("block sizes must sum to p")
        if self.block_sizes[0] != 1:
            raise ValueError("first block is the single target node")
        if not 0 < self.eig_min < self.eig_max:
            raise ValueError("need 0 < eig_min < eig_max")


@dataclass(frozen=True)
class SimulatedInstance:
    """A simulated draw: precision matrix, its graph, and the samples."""

    theta: np.ndarray
    truth: TrueGraph
    samples: DataMatrix
    spec: PrecisionSpec
    n: int
    response_kind: ResponseKind


def linear_design(p: int = 200, seed: int = 0) -> PrecisionSpec:
    """Linear study design: 4 true neighbors, dense bulk coupling."""
    return PrecisionSpec(p=p, block_sizes=(1, 4, p - 5), avg_degree_23=6.0,
                         avg_degree_33=2.0, eig_min=0.01, eig_max=10.0, seed=seed)


def nonlinear_design(p: int = 200, seed: int = 0) -> PrecisionSpec:
    """Nonlinear study design: same blocks, sparser 2-3 coupling."""
    return PrecisionSpec(p=p, block_sizes=(1, 4, p - 5), avg_degree_23=2.0,
                         avg_degree_33=2.0, eig_min=0.01, eig_max=10.0, seed=seed)


def fig1_design(p: int = 100, seed: int = 0) -> PrecisionSpec:
    """Two-neighbor preset with a wide spectrum and sparse local structure."""
    return PrecisionSpec(p=p, block_sizes=(1, 2, p - 3), avg_degree_23=3.0,
                         avg_degree_33=2.0, eig_min=0.1, eig_max=100.0, seed=seed)


DESIGNS = {"linear": linear_design, "nonlinear": nonlinear_design, "fig1": fig1_design}
DESIGN_N = {"linear": 100, "nonlinear": 100, "fig1": 200}


def make_precision(spec: PrecisionSpec) -> np.ndarray:
    """Build the block-structured precision matrix for ``spec``.

    The target connects to every second-block node; 2-3 and 3-3 couplings are
    independent coin flips with probability avg_degree / |block 3|; values are
    +-1 uniform. The spectrum is then mapped onto [eig_min, eig_max].
    """
    rng = np.random.default_rng(spec.seed)
    p = spec.p
    _, b2, b3 = spec.block_sizes
    a = np.zeros((p, p))

    def signs(size):
        return rng.integers(0, 2, size=size) * 2.0 - 1.0

    # target to every neighbor; neighborhood block internally diagonal
    a[0, 1:1 + b2] = signs(b2)
    prob_23 = spec.avg_degree_23 / b3
    mask_23 = rng.random((b2, b3)) < prob_23
    a[1:1 + b2, 1 + b2:] = np.where(mask_23, signs((b2, b3)), 0.0)
    prob_33 = spec.avg_degree_33 / b3
    upper = np.triu(rng.random((b3, b3)) < prob_33, k=1)
    a[1 + b2:, 1 + b2:] = np.where(upper, signs((b3, b3)), 0.0)
    a = np.triu(a) + np.triu(a).T

    eigs = np.linalg.eigvalsh(a)
    shifted = a + (abs(eigs[0]) + 0.1) * np.eye(p)
    lo, hi = np.linalg.eigvalsh(shifted)[[0, -1]]
    if hi - lo < 1e-12:
        raise GenerationError("degenerate spectrum, cannot rescale eigenvalues")
    scale = (spec.eig_max - spec.eig_min) / (hi - lo)
    theta = scale * shifted + (spec.eig_min - scale * lo) * np.eye(p)
    return (theta + theta.T) / 2.0


def graph_from_precision(theta: np.ndarray, tol: float = 1e-12) -> TrueGraph:
    """Edge (j, k) iff |theta[j, k]| > tol for j != k."""
    theta = np.asarray(theta)
    if theta.shape[0] != theta.shape[1] or not np.allclose(theta, theta.T):
        raise ValueError("precision matrix must be symmetric")
    rows, cols = np.nonzero(np.abs(np.triu(theta, k=1)) > tol)
    return TrueGraph(p=theta.shape[0], edges=frozenset((int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)))


def sample_gaussian(theta: np.ndarray, n: int, seed: int) -> DataMatrix:
    """n zero-mean Gaussian draws with covariance theta^-1, via Cholesky."""
    theta = np.asarray(theta, dtype=np.float64)
    cov = np.linalg.inv(theta)
    cov = (cov + cov.T) / 2.0
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"precision matrix is not positive definite: {exc}") from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, theta.shape[0]))
    return make_data_matrix(z @ chol.T)


def apply_nonlinear_response(samples: DataMatrix, target: int, neighbors, snr: float,
                             seed: int) -> DataMatrix:
    """Replace the target column by sum_j exp(-X_j^2/2) over neighbors plus noise.

    The noise is mean-zero Gaussian with variance var(signal)/snr, so the
    realized signal-to-noise ratio matches ``snr`` in expectation.
    """
    neighbors = sorted(set(neighbors))
    if not neighbors:
        raise ValueError("neighbor set must be nonempty")
    if snr <= 0:
        raise ValueError("snr must be positive")
    samples.check_node(target)
    for j in neighbors:
        samples.check_node(j)
    cols = samples.values[:, [j - 1 for j in neighbors]]
    signal = np.exp(-cols**2 / 2.0).sum(axis=1)
    var_signal = float(signal.var())
    if var_signal < 1e-12:
        raise DegenerateSignalError("signal variance is (near) zero, SNR scaling undefined")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, np.sqrt(var_signal / snr), size=samples.n)
    values = np.array(samples.values)
    values[:, target - 1] = signal + noise
    return make_data_matrix(values, names=samples.names, kinds=samples.kinds)


def generate_instance(design: str, n: int | None = None, p: int | None = None,
                      seed: int = 0, snr: float = 4.0) -> SimulatedInstance:
    """One full instance of a named design, deterministically from ``seed``.

    Sub-seeds for the precision pattern, the Gaussian draw, and the nonlinear
    noise are spawned from one seed sequence so the three stages never share
    streams.
    """
    if design not in DESIGNS:
        raise ValueError(f"unknown design {design!r}; expected one of {sorted(DESIGNS)}")
    kw = {} if p is None else {"p": p}
    n = DESIGN_N[design] if n is None else n
    s_prec, s_samp, s_noise = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(3)]
    spec = DESIGNS[design](seed=s_prec, **kw)
    theta = make_precision(spec)
    truth = graph_from_precision(theta)
    samples = sample_gaussian(theta, n, s_samp)
    kind: ResponseKind = "linear"
    if design == "nonlinear":
        samples = apply_nonlinear_response(samples, 1, sorted(truth.neighbors(1)), snr, s_noise)
        kind = "nonlinear"
    return SimulatedInstance(theta=theta, truth=truth, samples=samples, spec=spec, n=n, response_kind=kind)
