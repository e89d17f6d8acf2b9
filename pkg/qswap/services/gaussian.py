"""Bright multimode Gaussian beams and the linear optics acting on them.

Quadratures are X = a + a^dagger and Y = i(a^dagger - a), ordered
(X1, Y1, ..., XN, YN) in one global phase frame, so the vacuum covariance is
the identity. Carrier-referenced quadratures are only formed at detection
time, by rotating each mode with -arg(alpha_k).
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.linalg import block_diag

from qswap.config import settings
from qswap.errors import ConfigError, DegenerateInputError, PhysicalityError
from qswap.schemas import SqueezerParams

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
UNCERTAINTY_TOL = 1e-9

ModeRef = Union[int, str]


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def omega(n: int) -> np.ndarray:
    """Symplectic form, block diagonal of [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def wrap_phase(phi: float) -> float:
    """Map an angle onto (-pi, pi]."""
    return phi - 2 * math.pi * math.ceil((phi - math.pi) / (2 * math.pi))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    n = cov.shape[0] // 2
    if n == 0:
        return np.empty(0)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega(n) @ cov)))
    nu = moduli[::2]
    if np.max(np.abs(moduli[1::2] - nu)) > PHYSICALITY_TOL * max(1.0, float(nu.max())):
        logger.warning("symplectic spectrum does not pair up: %s", moduli)
    return nu


@dataclass(frozen=True, eq=False)
class BrightState:
    carriers: np.ndarray
    cov: np.ndarray
    labels: tuple[str, ...]
    consumed: frozenset[int] = frozenset()

    def __post_init__(self):
        carriers = np.array(self.carriers, dtype=complex).reshape(-1)
        n = carriers.size
        cov = np.array(self.cov, dtype=float).reshape(2 * n, 2 * n)
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != n:
            raise ConfigError(f"{len(labels)} labels for {n} modes")
        if len(set(labels)) != n:
            raise ConfigError(f"mode labels must be unique: {labels}")
        if not (np.all(np.isfinite(carriers)) and np.all(np.isfinite(cov))):
            raise PhysicalityError("carriers and covariance must be finite")
        if n:
            scale = max(1.0, float(np.max(np.abs(cov))))
            if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
                raise PhysicalityError("covariance matrix is not symmetric")
            cov = (cov + cov.T) / 2
        consumed = frozenset(int(k) for k in self.consumed)
        if any(not 0 <= k < n for k in consumed):
            raise ConfigError(f"consumed modes {sorted(consumed)} out of range")
        carriers.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "carriers", carriers)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "consumed", consumed)

    @classmethod
    def empty(cls) -> "BrightState":
        return cls(np.empty(0, dtype=complex), np.empty((0, 0)), ())

    @property
    def n_modes(self) -> int:
        return self.carriers.size

    @property
    def powers(self) -> np.ndarray:
        return np.abs(self.carriers) ** 2

    @property
    def total_power(self) -> float:
        return float(np.sum(self.powers))

    def index(self, mode: ModeRef) -> int:
        if isinstance(mode, str):
            try:
                return self.labels.index(mode)
            except ValueError:
                raise ConfigError(f"unknown mode label {mode!r}; have {self.labels}") from None
        k = int(mode)
        if not 0 <= k < self.n_modes:
            raise ConfigError(f"mode index {k} out of range for {self.n_modes} modes")
        return k

    def carrier_phase(self, mode: ModeRef) -> float:
        return float(np.angle(self.carriers[self.index(mode)]))

    def block(self, mode: ModeRef) -> np.ndarray:
        k = self.index(mode)
        return self.cov[2 * k:2 * k + 2, 2 * k:2 * k + 2]

    def carrier_frame(self) -> np.ndarray:
        """Map from global quadratures to carrier-referenced ones."""
        if not self.n_modes:
            return np.empty((0, 0))
        return block_diag(*(rotation(-theta) for theta in np.angle(self.carriers)))

    def carrier_cov(self) -> np.ndarray:
        frame = self.carrier_frame()
        return frame @ self.cov @ frame.T

    def with_consumed(self, *modes: ModeRef) -> "BrightState":
        extra = {self.index(m) for m in modes}
        return BrightState(self.carriers, self.cov, self.labels, self.consumed | extra)

    def reduced(self, modes: Sequence[ModeRef]) -> "BrightState":
        idx = [self.index(m) for m in modes]
        if len(set(idx)) != len(idx):
            raise ConfigError(f"repeated modes in {list(modes)}")
        quads = [q for k in idx for q in (2 * k, 2 * k + 1)]
        consumed = {pos for pos, k in enumerate(idx) if k in self.consumed}
        return BrightState(self.carriers[idx], self.cov[np.ix_(quads, quads)],
                           tuple(self.labels[k] for k in idx), consumed)

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.cov)

    def is_physical(self) -> bool:
        live = [k for k in range(self.n_modes) if k not in self.consumed]
        if not live:
            return True
        cov = self.reduced(live).cov
        if np.linalg.eigvalsh(cov).min() <= 0:
            return False
        return bool(symplectic_eigenvalues(cov).min() >= 1 - PHYSICALITY_TOL)

    def validate_physical(self) -> "BrightState":
        """Check the uncertainty relation on the modes that were not detected."""
        if not self.is_physical():
            raise PhysicalityError(
                f"covariance of modes {self.labels} violates the uncertainty relation")
        return self


def prepare_squeezed_beam(p: SqueezerParams, label: str = "SQ") -> BrightState:
    if p.power <= 0:
        raise ConfigError(f"squeezed beam needs positive power, got {p.power}")
    if p.squeezing * p.excess < 1 - UNCERTAINTY_TOL:
        raise PhysicalityError(
            f"squeezing {p.squeezing} and excess {p.excess} violate the uncertainty relation")
    r = rotation(p.carrier_phase) @ rotation(p.ellipse_angle)
    cov = r @ np.diag([p.squeezing, p.excess]) @ r.T
    return BrightState([math.sqrt(p.power) * cmath.exp(1j * p.carrier_phase)], cov, (label,))


def prepare_coherent_beam(power: float, phase: float = 0.0, label: str = "COH") -> BrightState:
    if power < 0:
        raise ConfigError(f"coherent beam power must be >= 0, got {power}")
    return BrightState([math.sqrt(power) * cmath.exp(1j * phase)], np.eye(2), (label,))


def vacuum(label: str = "VAC") -> BrightState:
    return prepare_coherent_beam(0.0, 0.0, label)


def tensor(a: BrightState, b: BrightState) -> BrightState:
    clash = set(a.labels) & set(b.labels)
    if clash:
        raise ConfigError(f"label collision in tensor product: {sorted(clash)}")
    if not a.n_modes:
        return b
    if not b.n_modes:
        return a
    consumed = a.consumed | {k + a.n_modes for k in b.consumed}
    return BrightState(np.concatenate([a.carriers, b.carriers]), block_diag(a.cov, b.cov),
                       a.labels + b.labels, consumed)


def relabel(state: BrightState, mode: ModeRef, label: str) -> BrightState:
    k = state.index(mode)
    labels = list(state.labels)
    labels[k] = label
    return BrightState(state.carriers, state.cov, tuple(labels), state.consumed)


def phase_symplectic(n: int, k: int, phi: float) -> np.ndarray:
    s = np.eye(2 * n)
    s[2 * k:2 * k + 2, 2 * k:2 * k + 2] = rotation(phi)
    return s


def beamsplitter_symplectic(n: int, j: int, k: int, transmission: float, phi: float) -> np.ndarray:
    """Phase shift phi on mode k, then the real mixing of modes j and k."""
    t, r = math.sqrt(transmission), math.sqrt(1 - transmission)
    jj, kk = slice(2 * j, 2 * j + 2), slice(2 * k, 2 * k + 2)
    mix = np.eye(2 * n)
    mix[jj, jj] = t * np.eye(2)
    mix[jj, kk] = r * np.eye(2)
    mix[kk, jj] = r * np.eye(2)
    mix[kk, kk] = -t * np.eye(2)
    return mix @ phase_symplectic(n, k, phi)


def _congruence(state: BrightState, s: np.ndarray, carriers: np.ndarray) -> BrightState:
    return BrightState(carriers, s @ state.cov @ s.T, state.labels, state.consumed)


def phase_shift(state: BrightState, mode: ModeRef, phi: float) -> BrightState:
    k = state.index(mode)
    carriers = state.carriers.copy()
    carriers[k] *= cmath.exp(1j * phi)
    return _congruence(state, phase_symplectic(state.n_modes, k, phi), carriers)


def beamsplitter(state: BrightState, j: ModeRef, k: ModeRef, transmission: float,
                 phi: float = 0.0) -> BrightState:
    j, k = state.index(j), state.index(k)
    if j == k:
        raise ConfigError("beam splitter needs two distinct modes")
    if not 0.0 <= transmission <= 1.0:
        raise ConfigError(f"transmission must lie in [0, 1], got {transmission}")
    if not math.isfinite(phi):
        raise ConfigError(f"beam splitter phase must be finite, got {phi}")
    t, r = math.sqrt(transmission), math.sqrt(1 - transmission)
    a_j, a_k = state.carriers[j], state.carriers[k] * cmath.exp(1j * phi)
    carriers = state.carriers.copy()
    carriers[j] = t * a_j + r * a_k
    carriers[k] = r * a_j - t * a_k
    s = beamsplitter_symplectic(state.n_modes, j, k, transmission, phi)
    return _congruence(state, s, carriers)


def loss(state: BrightState, mode: ModeRef, efficiency: float) -> BrightState:
    k = state.index(mode)
    if not 0.0 <= efficiency <= 1.0:
        raise ConfigError(f"efficiency must lie in [0, 1], got {efficiency}")
    kk = slice(2 * k, 2 * k + 2)
    attenuate = np.eye(2 * state.n_modes)
    attenuate[kk, kk] *= math.sqrt(efficiency)
    cov = attenuate @ state.cov @ attenuate
    cov[kk, kk] += (1 - efficiency) * np.eye(2)
    carriers = state.carriers.copy()
    carriers[k] *= math.sqrt(efficiency)
    return BrightState(carriers, cov, state.labels, state.consumed)


def is_dark(state: BrightState, k: int, threshold: float | None = None) -> bool:
    threshold = settings.BRIGHTNESS_THRESHOLD if threshold is None else threshold
    peak = float(state.powers.max()) if state.n_modes else 0.0
    return peak <= 0 or state.powers[k] < threshold * peak


def balance_phase(state: BrightState, j: ModeRef, k: ModeRef, transmission: float = 0.5) -> float:
    """Phase on mode k that makes both 50/50 outputs equally intense."""
    j, k = state.index(j), state.index(k)
    if abs(transmission - 0.5) > SYMMETRY_TOL:
        raise ConfigError("phase balancing is defined for a 50/50 splitter only")
    if is_dark(state, j) or is_dark(state, k):
        raise DegenerateInputError(
            f"cannot balance {state.labels[j]} and {state.labels[k]}: a carrier is dark")
    psi = cmath.phase(np.conj(state.carriers[j]) * state.carriers[k])
    return wrap_phase(math.pi / 2 - psi)


def tensor_all(states: Iterable[BrightState]) -> BrightState:
    out = BrightState.empty()
    for s in states:
        out = tensor(out, s)
    return out
