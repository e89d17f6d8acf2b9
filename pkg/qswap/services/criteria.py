"""Entanglement criteria evaluated on carrier-referenced covariances."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from qswap.errors import ConfigError
from qswap.models import Quadrature, Sign, Verdict
from qswap.services.gaussian import BrightState, ModeRef, symplectic_eigenvalues

logger = logging.getLogger(__name__)

VERDICT_TOL = 1e-9
MAX_PPT_MODES = 20
GAIN_BOUNDS = (0.0, 2.0)


@dataclass(frozen=True)
class CriterionResult:
    criterion: str
    value: float
    threshold: float
    verdict: Verdict
    params: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED

    def to_row(self) -> dict:
        return {
            "criterion": self.criterion,
            "params": json.dumps(self.params, sort_keys=True, default=str),
            "value": self.value,
            "threshold": self.threshold,
            "verdict": self.verdict.value,
        }


def judge(value: float, threshold: float, tol: float = VERDICT_TOL) -> Verdict:
    """Values below the separable bound violate it; a band of tol around it is inconclusive."""
    if value < threshold - tol:
        return Verdict.VIOLATED
    if value > threshold + tol:
        return Verdict.SATISFIED
    return Verdict.INCONCLUSIVE


def _qidx(state: BrightState, mode: ModeRef, quad: Quadrature | str) -> int:
    return 2 * state.index(mode) + (0 if Quadrature(quad) is Quadrature.X else 1)


def _pair(state: BrightState, quad, i: ModeRef, j: ModeRef) -> tuple[float, float, float]:
    if state.index(i) == state.index(j):
        raise ConfigError("a squeezing variance needs two distinct modes")
    a, b = _qidx(state, i, quad), _qidx(state, j, quad)
    cc = state.carrier_cov()
    return cc[a, a], cc[b, b], cc[a, b]


def squeezing_variance(state: BrightState, quad: Quadrature | str, i: ModeRef, j: ModeRef,
                       sign: Sign | str, g: float = 1.0) -> float:
    v_i, v_j, c = _pair(state, quad, i, j)
    return float((v_i + g ** 2 * v_j + 2 * Sign(sign).factor * g * c) / (1 + g ** 2))


def _pairing(pairing: str) -> tuple[Sign, Sign]:
    if pairing == "+-":
        return Sign.PLUS, Sign.MINUS
    if pairing == "-+":
        return Sign.MINUS, Sign.PLUS
    raise ConfigError(f"pairing must be '+-' or '-+', got {pairing!r}")


def duan_sum(state: BrightState, i: ModeRef, j: ModeRef, g: float = 1.0,
             pairing: str = "+-") -> CriterionResult:
    sx, sy = _pairing(pairing)
    vx = squeezing_variance(state, Quadrature.X, i, j, sx, g)
    vy = squeezing_variance(state, Quadrature.Y, i, j, sy, g)
    labels = [state.labels[state.index(i)], state.labels[state.index(j)]]
    return CriterionResult("duan", vx + vy, 2.0, judge(vx + vy, 2.0),
                           {"modes": labels, "gain": g, "pairing": pairing, "vsq_x": vx, "vsq_y": vy})


@dataclass(frozen=True)
class GainOptimum:
    gain: float
    value: float
    degenerate: bool = False

    @property
    def verdict(self) -> Verdict:
        return Verdict.INCONCLUSIVE if self.degenerate else judge(self.value, 1.0)


def optimal_gain(state: BrightState, quad: Quadrature | str, i: ModeRef, j: ModeRef,
                 sign: Sign | str) -> GainOptimum:
    """Stationary point of the normalized squeezing variance in closed form.

    Solves c g^2 + (V_i - V_j) g - c = 0 and keeps the root with the smaller
    quotient, which is the smaller eigenvalue of [[V_i, c], [c, V_j]].
    """
    v_i, v_j, c = _pair(state, quad, i, j)
    c *= Sign(sign).factor
    if v_j <= 0:
        raise ConfigError("mode j has non-positive variance")
    scale = max(v_i, v_j)
    if abs(c) <= VERDICT_TOL * scale:
        return GainOptimum(0.0, float(v_i), degenerate=abs(v_i - v_j) <= VERDICT_TOL * scale)
    disc = math.sqrt((v_i - v_j) ** 2 + 4 * c ** 2)

    def quotient(g: float) -> float:
        return (v_i + g ** 2 * v_j + 2 * g * c) / (1 + g ** 2)

    best = min(((v_j - v_i) + disc) / (2 * c), ((v_j - v_i) - disc) / (2 * c), key=quotient)
    return GainOptimum(float(best), float(quotient(best)))


def optimal_duan(state: BrightState, i: ModeRef, j: ModeRef, pairing: str = "+-",
                 bounds: tuple[float, float] = GAIN_BOUNDS) -> CriterionResult:
    """Duan sum minimized over one common gain."""
    res = minimize_scalar(lambda g: duan_sum(state, i, j, g, pairing).value,
                          bounds=bounds, method="bounded", options={"xatol": 1e-8})
    best = duan_sum(state, i, j, float(res.x), pairing)
    return CriterionResult(best.criterion, best.value, best.threshold, best.verdict,
                           {**best.params, "optimized": True})


def partial_transpose(cov: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    flip = np.ones(cov.shape[0])
    for k in modes:
        flip[2 * k + 1] = -1.0
    return cov * np.outer(flip, flip)


def _cut(state: BrightState, modes: Sequence[ModeRef]) -> list[int]:
    idx = sorted({state.index(m) for m in modes})
    if not idx or len(idx) == state.n_modes:
        raise ConfigError("a bipartition needs modes on both sides")
    return idx


def pt_spectrum(state: BrightState, modes: Sequence[ModeRef]) -> np.ndarray:
    """Symplectic spectrum after flipping Y on the given side of the cut."""
    return symplectic_eigenvalues(partial_transpose(state.cov, _cut(state, modes)))


def ppt_symplectic(state: BrightState, modes: Sequence[ModeRef]) -> tuple[float, CriterionResult]:
    idx = _cut(state, modes)
    nu_min = float(pt_spectrum(state, idx).min())
    params = {
        "cut": [state.labels[k] for k in idx],
        "rest": [state.labels[k] for k in range(state.n_modes) if k not in idx],
    }
    return nu_min, CriterionResult("ppt", nu_min, 1.0, judge(nu_min, 1.0), params)


@dataclass(frozen=True)
class PptSummary:
    results: tuple[CriterionResult, ...]

    @property
    def genuine(self) -> bool:
        """Every bipartition is entangled."""
        return all(r.violated for r in self.results)


def bipartitions(n: int) -> list[list[int]]:
    """One side of each unordered bipartition; mode 0 is always on it."""
    return [[0] + [k for k in range(1, n) if mask >> (k - 1) & 1]
            for mask in range(2 ** (n - 1) - 1)]


def ppt_all_bipartitions(state: BrightState, max_modes: int = MAX_PPT_MODES) -> PptSummary:
    n = state.n_modes
    if n < 2:
        raise ConfigError("need at least two modes for a bipartition")
    if n > max_modes:
        raise ConfigError(f"{n} modes give too many bipartitions (limit {max_modes})")
    results = tuple(ppt_symplectic(state, side)[1] for side in bipartitions(n))
    logger.debug("ppt over %d bipartitions, %d violated", len(results),
                 sum(r.violated for r in results))
    return PptSummary(results)


def combination_variance(state: BrightState, h: Sequence[float], g: Sequence[float]) -> tuple[float, float]:
    """Variances of sum h_i X_i and sum g_i Y_i in the carrier frame."""
    h, g = np.asarray(h, dtype=float), np.asarray(g, dtype=float)
    if h.shape != (state.n_modes,) or g.shape != (state.n_modes,):
        raise ConfigError(f"coefficient vectors need {state.n_modes} entries")
    cc = state.carrier_cov()
    u = np.zeros(2 * state.n_modes)
    v = np.zeros(2 * state.n_modes)
    u[0::2], v[1::2] = h, g
    return float(u @ cc @ u), float(v @ cc @ v)


def _groups(state: BrightState, partition: Sequence[Sequence[ModeRef]]) -> list[list[int]]:
    groups = [[state.index(m) for m in grp] for grp in partition]
    flat = [k for grp in groups for k in grp]
    if not groups or any(not grp for grp in groups) or len(set(flat)) != len(flat):
        raise ConfigError("partition groups must be non-empty and disjoint")
    return groups


def vlf_threshold(h: np.ndarray, g: np.ndarray, groups: list[list[int]]) -> float:
    return 2 * sum(abs(sum(h[k] * g[k] for k in grp)) for grp in groups)


def vlf_test(state: BrightState, h: Sequence[float], g: Sequence[float],
             partition: Sequence[Sequence[ModeRef]]) -> CriterionResult:
    groups = _groups(state, partition)
    h, g = np.asarray(h, dtype=float), np.asarray(g, dtype=float)
    vu, vv = combination_variance(state, h, g)
    threshold = vlf_threshold(h, g, groups)
    params = {
        "h": [round(float(x), 12) for x in h],
        "g": [round(float(x), 12) for x in g],
        "partition": [[state.labels[k] for k in grp] for grp in groups],
    }
    return CriterionResult("vlf", vu + vv, threshold, judge(vu + vv, threshold), params)


def optimize_vlf(state: BrightState, partition: Sequence[Sequence[ModeRef]], restarts: int = 8,
                 seed: int = 0) -> CriterionResult:
    """Search coefficient vectors that violate the partition bound the most.

    Coefficients live on the partitioned modes only; the objective is the
    margin over the bound divided by the squared vector norm.
    """
    groups = _groups(state, partition)
    support = sorted(k for grp in groups for k in grp)
    n = state.n_modes
    cc = state.carrier_cov()

    def unpack(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h, g = np.zeros(n), np.zeros(n)
        h[support], g[support] = x[:len(support)], x[len(support):]
        return h, g

    def objective(x: np.ndarray) -> float:
        norm = float(x @ x)
        if norm < 1e-12:
            return 0.0
        h, g = unpack(x)
        u, v = np.zeros(2 * n), np.zeros(2 * n)
        u[0::2], v[1::2] = h, g
        return (u @ cc @ u + v @ cc @ v - vlf_threshold(h, g, groups)) / norm

    rng = np.random.default_rng(seed)
    starts = [np.ones(2 * len(support))] + [rng.standard_normal(2 * len(support)) for _ in range(restarts)]
    best = None
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    x = best.x / math.sqrt(float(best.x @ best.x))
    h, g = unpack(x)
    result = vlf_test(state, h, g, partition)
    return CriterionResult(result.criterion, result.value, result.threshold, result.verdict,
                           {**result.params, "optimized": True})


def min_variance_combination(state: BrightState,
                             allowed: Sequence[tuple[ModeRef, Quadrature | str]]) -> tuple[np.ndarray, float]:
    """Unit-norm quadrature combination of least variance.

    The sign is fixed so the first non-negligible coefficient is positive.
    """
    if not allowed:
        raise ConfigError("no quadratures to combine")
    idx = [_qidx(state, m, q) for m, q in allowed]
    if len(set(idx)) != len(idx):
        raise ConfigError("repeated quadratures in combination")
    cc = state.carrier_cov()
    w, v = np.linalg.eigh(cc[np.ix_(idx, idx)])
    vec = v[:, 0]
    lead = next((x for x in vec if abs(x) > 1e-12), 1.0)
    if lead < 0:
        vec = -vec
    return vec, float(w[0])


def entangling_cuts(state: BrightState) -> list[tuple[list[int], list[int]]]:
    """Both sides of every bipartition."""
    return [(side, [k for k in range(state.n_modes) if k not in side])
            for side in bipartitions(state.n_modes)]


def vlf_all_bipartitions(state: BrightState, restarts: int = 8, seed: int = 0) -> list[CriterionResult]:
    if state.n_modes > MAX_PPT_MODES:
        raise ConfigError(f"{state.n_modes} modes give too many bipartitions")
    return [optimize_vlf(state, [[state.labels[k] for k in a], [state.labels[k] for k in b]],
                         restarts, seed)
            for a, b in entangling_cuts(state)]
