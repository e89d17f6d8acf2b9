"""Monte-Carlo cross-check of the analytic noise levels.

Samples are drawn in fixed-size chunks, each from its own counter-based
Philox stream keyed by (seed, stream, chunk), so a batch does not depend on
how many worker threads produced it.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from qswap.config import settings
from qswap.errors import ConfigError, PhysicalityError
from qswap.services.detection import SidebandSignal, Signal, signal_variance
from qswap.services.gaussian import PHYSICALITY_TOL, BrightState

logger = logging.getLogger(__name__)

# stream reserved for electronic-noise draws
ELEC_STREAM = 2 ** 32 - 1


def generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    counter = ((stream % 2 ** 32) << 32) | (chunk % 2 ** 32)
    return np.random.Generator(np.random.Philox(key=(seed % 2 ** 64) | (counter << 64)))


def factorize(cov: np.ndarray) -> np.ndarray:
    """L with L L^T = cov; falls back to eigh for semidefinite matrices."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        if w.min() < -PHYSICALITY_TOL * max(1.0, float(np.abs(w).max())):
            raise PhysicalityError(f"covariance is not positive semidefinite (min eig {w.min():.3e})")
        logger.debug("cholesky failed, sampling through eigh")
        return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    samples: np.ndarray
    seed: int
    stream: int
    chunk_size: int

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def chunks(self):
        for start in range(0, self.n, self.chunk_size):
            yield self.samples[start:start + self.chunk_size]


def sample(state: BrightState, n: int, seed: int, stream: int = 0,
           chunk_size: Optional[int] = None, threads: Optional[int] = None) -> SampleBatch:
    if n < 1:
        raise ConfigError(f"sample size must be positive, got {n}")
    chunk_size = chunk_size or settings.ORACLE_CHUNK
    factor = factorize(state.cov)
    dim = factor.shape[0]

    def draw(chunk: int) -> np.ndarray:
        m = min(chunk_size, n - chunk * chunk_size)
        return generator(seed, stream, chunk).standard_normal((m, dim)) @ factor.T

    n_chunks = math.ceil(n / chunk_size)
    with ThreadPoolExecutor(max_workers=threads or settings.THREADS) as pool:
        parts = list(pool.map(draw, range(n_chunks)))
    samples = np.concatenate(parts)
    samples.flags.writeable = False
    return SampleBatch(samples, seed, stream, chunk_size)


@dataclass(frozen=True)
class Moments:
    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x: np.ndarray) -> "Moments":
        mean = float(x.mean())
        return cls(x.size, mean, float(((x - mean) ** 2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        n = self.n + other.n
        delta = other.mean - self.mean
        return Moments(n, self.mean + delta * other.n / n,
                       self.m2 + other.m2 + delta ** 2 * self.n * other.n / n)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1)


def empirical_variance(batch: SampleBatch, signal: Signal) -> float:
    if batch.n < 2:
        raise ConfigError("need at least two samples for a variance")
    if signal.coeffs.size != batch.samples.shape[1]:
        raise ConfigError("signal does not match the sampled state")
    elec = math.sqrt(signal.elec_noise)
    moments = []
    for chunk_no, chunk in enumerate(batch.chunks()):
        x = chunk @ signal.coeffs
        if elec:
            noise = generator(batch.seed, ELEC_STREAM, (batch.stream << 16) + chunk_no)
            x = x + elec * noise.standard_normal(x.size)
        moments.append(Moments.of(x))
    return reduce(Moments.merge, moments).variance


def empirical_sideband_variance(cos_batch: SampleBatch, sin_batch: SampleBatch,
                                signal: SidebandSignal) -> float:
    """Cosine and sine components are read from independent batches."""
    return empirical_variance(cos_batch, signal.cos) + empirical_variance(sin_batch, signal.sin)


def standard_error(variance: float, n: int) -> float:
    return variance * math.sqrt(2 / (n - 1))


@dataclass(frozen=True)
class OracleComparison:
    name: str
    analytic: float
    empirical: float
    stderr: float

    @property
    def z(self) -> float:
        return (self.empirical - self.analytic) / self.stderr if self.stderr > 0 else 0.0

    def agrees(self, sigmas: float = 3.0) -> bool:
        return abs(self.z) <= sigmas


def compare(state: BrightState, signal: Signal | SidebandSignal, n: int, seed: int,
            stream: int = 0, name: str = "") -> OracleComparison:
    analytic = signal_variance(state.cov, signal)
    if isinstance(signal, SidebandSignal):
        cos_batch = sample(state, n, seed, 2 * stream)
        sin_batch = sample(state, n, seed, 2 * stream + 1)
        empirical = empirical_sideband_variance(cos_batch, sin_batch, signal)
        parts = (signal_variance(state.cov, signal.cos), signal_variance(state.cov, signal.sin))
        stderr = math.sqrt(sum(standard_error(v, n) ** 2 for v in parts))
    else:
        empirical = empirical_variance(sample(state, n, seed, stream), signal)
        stderr = standard_error(analytic, n)
    result = OracleComparison(name, analytic, empirical, stderr)
    logger.debug("oracle %s: analytic %.6g empirical %.6g z %.2f", name, analytic, empirical, result.z)
    return result


def covariance_error(batch: SampleBatch, state: BrightState) -> float:
    """Frobenius distance between the sample covariance and the state's."""
    return float(np.linalg.norm(np.cov(batch.samples, rowvar=False) - state.cov))
