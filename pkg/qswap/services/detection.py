"""Photodetection and electronics in the bright-beam linearization.

A photocurrent is kept as a linear functional of the global quadrature
vector. Its fluctuation for a bright mode k is |alpha_k| times the
carrier-referenced amplitude quadrature, which is why direct detection never
sees a phase shift applied to the mode before it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from qswap.errors import ConfigError, DegenerateInputError, LinearizationError, MeasurementError
from qswap.models import Quadrature
from qswap.schemas import DbmAnchor
from qswap.services.gaussian import (
    BrightState,
    ModeRef,
    balance_phase,
    beamsplitter,
    is_dark,
    rotation,
    tensor,
    vacuum,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Signal:
    coeffs: np.ndarray
    dc: float = 0.0
    elec_noise: float = 0.0
    shot_ref: float = 0.0
    consumed_modes: frozenset[int] = frozenset()

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if coeffs.size % 2:
            raise ConfigError("signal coefficients must cover X and Y of every mode")
        if self.elec_noise < 0 or self.shot_ref < 0:
            raise ConfigError("electronic noise and shot reference must be >= 0")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "consumed_modes", frozenset(self.consumed_modes))

    @property
    def n_modes(self) -> int:
        return self.coeffs.size // 2

    def quadrature_variance(self, cov: np.ndarray) -> float:
        return float(self.coeffs @ cov @ self.coeffs)


@dataclass(frozen=True, eq=False)
class SidebandSignal:
    """In-phase and quadrature Fourier components of one photocurrent."""
    cos: Signal
    sin: Signal

    @property
    def shot_ref(self) -> float:
        return self.cos.shot_ref


@dataclass(frozen=True)
class NoiseReport:
    variance: float
    shot_ref: float
    rel_db: Optional[float]
    abs_dbm: Optional[float] = None
    name: str = ""

    def to_row(self, scenario: str) -> dict:
        return {
            "scenario": scenario,
            "trace": self.name,
            "variance": self.variance,
            "shot_ref": self.shot_ref,
            "rel_db": self.rel_db,
            "abs_dbm": self.abs_dbm,
        }


def to_db(ratio: float) -> float:
    return 10 * math.log10(ratio)


def noise_report(var: float, shot_ref: float, anchor: Optional[DbmAnchor] = None,
                 name: str = "") -> NoiseReport:
    rel = to_db(var / shot_ref) if shot_ref > 0 and var > 0 else None
    dbm = anchor.dbm + to_db(var / anchor.shot_ref) if anchor is not None and var > 0 else None
    return NoiseReport(variance=var, shot_ref=shot_ref, rel_db=rel, abs_dbm=dbm, name=name)


def _require_bright(state: BrightState, k: int):
    if is_dark(state, k):
        raise LinearizationError(
            f"mode {state.labels[k]} is too dark for linearized direct detection")


def _require_live(state: BrightState, k: int):
    if k in state.consumed:
        raise MeasurementError(f"mode {state.labels[k]} was already detected")


def direct_tap(state: BrightState, mode: ModeRef, elec_noise: float = 0.0) -> Signal:
    k = state.index(mode)
    _require_live(state, k)
    _require_bright(state, k)
    alpha = state.carriers[k]
    amp, theta = abs(alpha), float(np.angle(alpha))
    coeffs = np.zeros(2 * state.n_modes)
    coeffs[2 * k:2 * k + 2] = amp * np.array([math.cos(theta), math.sin(theta)])
    return Signal(coeffs, dc=amp ** 2, elec_noise=elec_noise, shot_ref=amp ** 2,
                  consumed_modes=frozenset({k}))


def measure(state: BrightState, mode: ModeRef, elec_noise: float = 0.0) -> tuple[BrightState, Signal]:
    """Direct detection that also marks the mode as consumed."""
    signal = direct_tap(state, mode, elec_noise)
    return state.with_consumed(mode), signal


def quadrature_tap(state: BrightState, mode: ModeRef, quad: Quadrature | str,
                   scale: float = 1.0, elec_noise: float = 0.0) -> Signal:
    """Scaled carrier-referenced X or Y of one mode, as a homodyne would read it."""
    k = state.index(mode)
    _require_live(state, k)
    theta = state.carrier_phase(k)
    c, s = math.cos(theta), math.sin(theta)
    unit = [c, s] if Quadrature(quad) is Quadrature.X else [-s, c]
    coeffs = np.zeros(2 * state.n_modes)
    coeffs[2 * k:2 * k + 2] = scale * np.array(unit)
    return Signal(coeffs, elec_noise=elec_noise, shot_ref=scale ** 2, consumed_modes=frozenset({k}))


def measure_quadrature(state: BrightState, mode: ModeRef, quad: Quadrature | str,
                       scale: float = 1.0) -> tuple[BrightState, Signal]:
    signal = quadrature_tap(state, mode, quad, scale)
    return state.with_consumed(mode), signal


def mix(signals: Sequence[Signal], weights: Sequence[float], extra_elec_noise: float = 0.0) -> Signal:
    if not signals or len(signals) != len(weights):
        raise ConfigError("mix needs one weight per signal")
    if len({s.coeffs.size for s in signals}) != 1:
        raise ConfigError("mixed signals belong to states of different size")
    seen: set[int] = set()
    for s in signals:
        if seen & s.consumed_modes:
            raise MeasurementError(f"modes {sorted(seen & s.consumed_modes)} enter the mix twice")
        seen |= s.consumed_modes
    w = np.asarray(weights, dtype=float)
    return Signal(
        coeffs=sum(wi * s.coeffs for wi, s in zip(w, signals)),
        dc=float(sum(wi * s.dc for wi, s in zip(w, signals))),
        elec_noise=float(sum(wi ** 2 * s.elec_noise for wi, s in zip(w, signals))) + extra_elec_noise,
        shot_ref=float(sum(wi ** 2 * s.shot_ref for wi, s in zip(w, signals))),
        consumed_modes=frozenset(seen),
    )


def signal_variance(cov: np.ndarray, signal: Signal | SidebandSignal) -> float:
    if isinstance(signal, SidebandSignal):
        return signal_variance(cov, signal.cos) + signal_variance(cov, signal.sin)
    if signal.coeffs.size != cov.shape[0]:
        raise ConfigError(
            f"signal spans {signal.n_modes} modes but the state has {cov.shape[0] // 2}")
    return signal.quadrature_variance(cov) + signal.elec_noise


def variance(state: BrightState, signal: Signal | SidebandSignal, shot_ref: Optional[float] = None,
             anchor: Optional[DbmAnchor] = None, name: str = "") -> NoiseReport:
    var = signal_variance(state.cov, signal)
    ref = signal.shot_ref if shot_ref is None else shot_ref
    return noise_report(var, ref, anchor, name)


def electronic_noise_variance(shot_ref: float, level_db: float) -> float:
    """Electronic noise floor sitting level_db relative to a shot level."""
    return shot_ref * 10 ** (level_db / 10)


def feedforward(state: BrightState, sig_x: Signal, sig_y: Signal, target: ModeRef,
                gain_x: float = 1.0, gain_y: float = 1.0) -> BrightState:
    """Displace the carrier-referenced X and Y of target by the two photocurrents.

    The currents are normalized by the target carrier amplitude so gain 1
    adds them at shot-noise scale. Detected modes keep their rows, so the
    joint matrix is only required to be physical on the undetected modes.
    """
    k = state.index(target)
    _require_live(state, k)
    for sig in (sig_x, sig_y):
        if sig.coeffs.size != 2 * state.n_modes:
            raise ConfigError("feedforward signal does not match the state")
        if k in sig.consumed_modes or np.any(sig.coeffs[2 * k:2 * k + 2] != 0):
            raise MeasurementError(f"feedforward signal reads its own target {state.labels[k]}")
    _require_bright(state, k)
    amp = abs(state.carriers[k])
    rot = rotation(state.carrier_phase(k))
    kick = rot @ np.vstack([gain_x / amp * sig_x.coeffs, gain_y / amp * sig_y.coeffs])
    a = np.eye(2 * state.n_modes)
    a[2 * k:2 * k + 2, :] += kick
    cov = a @ state.cov @ a.T
    noise = np.diag([(gain_x / amp) ** 2 * sig_x.elec_noise, (gain_y / amp) ** 2 * sig_y.elec_noise])
    cov[2 * k:2 * k + 2, 2 * k:2 * k + 2] += rot @ noise @ rot.T
    consumed = state.consumed | sig_x.consumed_modes | sig_y.consumed_modes
    logger.debug("feedforward onto %s with gains %.4f/%.4f", state.labels[k], gain_x, gain_y)
    return BrightState(state.carriers, cov, state.labels, consumed)


@dataclass(frozen=True, eq=False)
class MzReadout:
    state: BrightState
    difference: NoiseReport
    ports: tuple[NoiseReport, NoiseReport]
    port_powers: tuple[float, float]
    signals: dict[str, SidebandSignal] = field(default_factory=dict)


def unbalanced_mz(state: BrightState, delay: float, optical_phase: float, rf_omega: float,
                  anchor: Optional[DbmAnchor] = None) -> MzReadout:
    """Single-mode beam through a delay-line interferometer, read at rf_omega.

    The empty port of the input splitter is carried as a vacuum mode so the
    returned state can be sampled. Each output photocurrent is split into its
    cosine and sine components at the detection frequency.
    """
    if state.n_modes != 1:
        raise ConfigError("the delay-line interferometer takes a single beam")
    alpha = state.carriers[0]
    if abs(alpha) == 0:
        raise DegenerateInputError("the delay-line interferometer needs a bright input")
    joint = tensor(state, vacuum(f"{state.labels[0]}_vac"))
    eye = np.eye(2)
    direct = 0.5 * np.hstack([eye, eye])
    delayed = 0.5 * rotation(optical_phase) @ np.hstack([eye, -eye])
    phase = rf_omega * delay
    turn = np.exp(1j * optical_phase)
    signals: dict[str, SidebandSignal] = {}
    powers = []
    for port, sign, beta in (("plus", 1.0, alpha * (1 + turn) / 2), ("minus", -1.0, alpha * (1 - turn) / 2)):
        amp, theta = abs(beta), float(np.angle(beta))
        u = amp * np.array([math.cos(theta), math.sin(theta)])
        c_direct, c_delayed = u @ direct, sign * (u @ delayed)
        signals[port] = SidebandSignal(
            Signal(c_direct + math.cos(phase) * c_delayed, dc=amp ** 2, shot_ref=amp ** 2),
            Signal(math.sin(phase) * c_delayed),
        )
        powers.append(amp ** 2)
    plus, minus = signals["plus"], signals["minus"]
    signals["difference"] = SidebandSignal(
        Signal(plus.cos.coeffs - minus.cos.coeffs, shot_ref=sum(powers)),
        Signal(plus.sin.coeffs - minus.sin.coeffs),
    )
    reports = {name: variance(joint, sig, anchor=anchor, name=name) for name, sig in signals.items()}
    return MzReadout(joint, reports["difference"], (reports["plus"], reports["minus"]),
                     tuple(powers), signals)


def interferometric_check(state: BrightState, i: ModeRef, j: ModeRef,
                          anchor: Optional[DbmAnchor] = None) -> tuple[NoiseReport, NoiseReport]:
    """Recombine two beams on a balanced splitter and read sum and difference."""
    phi = balance_phase(state, i, j)
    mixed = beamsplitter(state, i, j, 0.5, phi)
    mixed, first = measure(mixed, i)
    mixed, second = measure(mixed, j)
    return (variance(mixed, mix([first, second], [1, 1]), anchor=anchor, name="sum"),
            variance(mixed, mix([first, second], [1, -1]), anchor=anchor, name="difference"))
