"""Classical QUBO solvers: simulated annealing, a random baseline and exhaustive search."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from qubo_approx.config import get_settings
from qubo_approx.errors import DimensionError, ParameterError, RefusalError
from qubo_approx.qubo import QuboMatrix, all_assignments, energy

logger = logging.getLogger(__name__)

# sweeps drawn per generator call
_BLOCK = 64
# assignments evaluated per brute-force chunk
_CHUNK = 1 << 16


class SampleSource(str, Enum):
    SIM_ANNEAL = "SimAnneal"
    RANDOM_BASELINE = "RandomBaseline"
    BRUTE_FORCE = "BruteForce"


@dataclass(frozen=True)
class SaParams:
    """Simulated-annealing parameters.

    ``sweeps`` is the effort knob. Unset beta endpoints are derived from the
    QUBO: the start accepts the largest uphill move half of the time and the
    end accepts the smallest one less than 1% of the time.
    """

    sweeps: int = field(default_factory=lambda: get_settings().sweeps)
    beta_start: float | None = None
    beta_end: float | None = None
    restarts: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.sweeps) < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps}")
        if int(self.restarts) < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if int(self.seed) < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")
        for name in ("beta_start", "beta_end"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive real, got {value}")
        if self.beta_start is not None and self.beta_end is not None and not self.beta_start < self.beta_end:
            raise ParameterError(f"beta_start ({self.beta_start}) must be below beta_end ({self.beta_end})")

    def with_seed(self, seed: int) -> SaParams:
        return SaParams(self.sweeps, self.beta_start, self.beta_end, self.restarts, int(seed))

    def with_sweeps(self, sweeps: int) -> SaParams:
        return SaParams(int(sweeps), self.beta_start, self.beta_end, self.restarts, self.seed)


@dataclass(frozen=True)
class Sample:
    assignment: tuple[int, ...]
    energy: float | None
    source: SampleSource
    seed: int | None = None

    @property
    def bits(self) -> np.ndarray:
        return np.asarray(self.assignment, dtype=np.uint8)


@dataclass(frozen=True)
class SampleSet:
    samples: tuple[Sample, ...]
    n_runs: int
    params: SaParams | None = None

    def __post_init__(self) -> None:
        if len(self.samples) != self.n_runs:
            raise DimensionError(f"SampleSet holds {len(self.samples)} samples, expected {self.n_runs}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def assignments(self) -> np.ndarray:
        return np.array([s.assignment for s in self.samples], dtype=np.uint8)

    def energies(self) -> np.ndarray:
        if any(s.energy is None for s in self.samples):
            raise ParameterError("These samples were not scored against a QUBO")
        return np.array([s.energy for s in self.samples], dtype=np.float64)

    @property
    def mean_energy(self) -> float:
        return float(self.energies().mean())

    @property
    def best(self) -> Sample:
        energies = self.energies()
        return self.samples[int(np.argmin(energies))]


# ---------------------------
# Simulated annealing
# ---------------------------
def default_betas(q: QuboMatrix) -> tuple[float, float]:
    linear, coupling = q.to_dense()
    magnitudes = np.concatenate([np.abs(linear), np.abs(coupling[np.triu_indices(q.n, 1)])])
    nonzero = magnitudes[magnitudes > 0]
    if not nonzero.size:
        return 0.1, 1.0
    max_delta = float((np.abs(linear) + np.abs(coupling).sum(axis=1)).max())
    return math.log(2) / max_delta, math.log(100) / float(nonzero.min())


def _ladder(q: QuboMatrix, params: SaParams) -> np.ndarray:
    b0, b1 = default_betas(q)
    start = params.beta_start if params.beta_start is not None else b0
    end = params.beta_end if params.beta_end is not None else b1
    if not start < end:
        if params.beta_start is None:
            start = end / 100
        else:
            end = start * 100
    return np.geomspace(start, end, int(params.sweeps))


def _anneal_chains(q: QuboMatrix, params: SaParams, seeds: list[tuple[int, int]]) -> np.ndarray:
    """Advance one Metropolis chain per seed pair together; return each chain's best state."""
    n, R = q.n, len(seeds)
    linear, coupling = q.to_dense()
    betas = _ladder(q, params)
    rngs = [np.random.default_rng(list(s)) for s in seeds]

    X = np.array([rng.integers(0, 2, size=n) for rng in rngs], dtype=np.float64)
    L = X @ coupling
    E = X @ linear + 0.5 * np.einsum("ri,ri->r", X, L)
    best_X, best_E = X.copy(), E.copy()
    rows = np.arange(R)
    base = np.arange(n)

    for start in range(0, len(betas), _BLOCK):
        block = betas[start : start + _BLOCK]
        orders = np.empty((R, len(block), n), dtype=np.int64)
        uniforms = np.empty((R, len(block), n))
        for r, rng in enumerate(rngs):
            orders[r] = rng.permuted(np.tile(base, (len(block), 1)), axis=1)
            uniforms[r] = rng.random((len(block), n))

        for s, beta in enumerate(block):
            for t in range(n):
                v = orders[:, s, t]
                x = X[rows, v]
                delta = (1 - 2 * x) * (linear[v] + L[rows, v])
                accept = (delta <= 0) | (uniforms[:, s, t] < np.exp(-beta * np.maximum(delta, 0)))
                if not accept.any():
                    continue
                r_acc, v_acc = rows[accept], v[accept]
                step = 1 - 2 * x[accept]
                X[r_acc, v_acc] += step
                L[r_acc] += step[:, None] * coupling[v_acc]
                E[r_acc] += delta[accept]
                # the best state can be passed mid-sweep, so it is tracked per flip
                better = r_acc[E[r_acc] < best_E[r_acc] - 1e-9]
                if better.size:
                    best_X[better] = X[better]
                    best_E[better] = E[better]
    return best_X.astype(np.uint8)


def _sa_samples(q: QuboMatrix, n_runs: int, params: SaParams) -> list[Sample]:
    seeds = [(params.seed + r, k) for r in range(n_runs) for k in range(params.restarts)]
    states = _anneal_chains(q, params, seeds)
    out = []
    for r in range(n_runs):
        candidates = states[r * params.restarts : (r + 1) * params.restarts]
        scored = [(energy(q, a), idx) for idx, a in enumerate(candidates)]
        e, idx = min(scored)
        out.append(
            Sample(tuple(int(b) for b in candidates[idx]), e, SampleSource.SIM_ANNEAL, params.seed + r)
        )
    return out


def simulated_anneal(q: QuboMatrix, params: SaParams | None = None) -> Sample:
    params = params or SaParams()
    return _sa_samples(q, 1, params)[0]


def sample_many(q: QuboMatrix, n_runs: int, params: SaParams | None = None) -> SampleSet:
    """``n_runs`` independent anneals; run r uses seed ``params.seed + r``."""
    params = params or SaParams()
    if int(n_runs) < 1:
        raise ParameterError(f"n_runs must be >= 1, got {n_runs}")
    samples = _sa_samples(q, int(n_runs), params)
    logger.debug("Annealed n=%d for %d runs x %d sweeps", q.n, n_runs, params.sweeps)
    return SampleSet(samples=tuple(samples), n_runs=int(n_runs), params=params)


# ---------------------------
# Random baseline
# ---------------------------
def random_baseline(n_bits: int, n_runs: int, seed: int, q: QuboMatrix | None = None) -> SampleSet:
    """Uniform assignments; a function of ``n_bits`` and ``seed`` only, scored against ``q`` if given."""
    if int(n_bits) < 1:
        raise DimensionError(f"n_bits must be >= 1, got {n_bits}")
    if int(n_runs) < 1:
        raise ParameterError(f"n_runs must be >= 1, got {n_runs}")
    if q is not None and q.n != int(n_bits):
        raise DimensionError(f"Baseline width {n_bits} does not match QUBO n={q.n}")
    bits = np.random.default_rng(int(seed)).integers(0, 2, size=(int(n_runs), int(n_bits)), dtype=np.uint8)
    samples = tuple(
        Sample(tuple(int(b) for b in row), energy(q, row) if q is not None else None, SampleSource.RANDOM_BASELINE, int(seed))
        for row in bits
    )
    return SampleSet(samples=samples, n_runs=int(n_runs))


# ---------------------------
# Exhaustive search
# ---------------------------
def _check_cap(q: QuboMatrix, cap: int | None) -> None:
    cap = get_settings().brute_force_cap if cap is None else int(cap)
    if q.n > cap:
        raise RefusalError(f"Refusing to enumerate 2^{q.n} assignments (cap is n <= {cap})")


def _chunk_energies(q: QuboMatrix, linear: np.ndarray, upper: np.ndarray, start: int, stop: int) -> np.ndarray:
    bits = all_assignments(q.n, start, stop).astype(np.float64)
    return q.offset + bits @ linear + np.einsum("ri,ri->r", bits @ upper, bits)


def enumerate_energies(q: QuboMatrix, cap: int | None = None) -> np.ndarray:
    """Energies of all 2^n assignments in lexicographic order (a_0 most significant)."""
    _check_cap(q, cap)
    linear, coupling = q.to_dense()
    upper = np.triu(coupling, 1)
    total = 1 << q.n
    return np.concatenate(
        [_chunk_energies(q, linear, upper, s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    )


def brute_force(q: QuboMatrix, cap: int | None = None) -> Sample:
    """Exact minimum; the lexicographically smallest argmin wins ties."""
    _check_cap(q, cap)
    linear, coupling = q.to_dense()
    upper = np.triu(coupling, 1)
    total = 1 << q.n
    best_e, best_idx = math.inf, 0
    for s in range(0, total, _CHUNK):
        chunk = _chunk_energies(q, linear, upper, s, min(s + _CHUNK, total))
        i = int(np.argmin(chunk))
        if chunk[i] < best_e:
            best_e, best_idx = float(chunk[i]), s + i
    bits = all_assignments(q.n, best_idx, best_idx + 1)[0]
    return Sample(tuple(int(b) for b in bits), energy(q, bits), SampleSource.BRUTE_FORCE)
