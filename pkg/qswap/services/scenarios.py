"""Network assembly, trace evaluation and the swap protocol itself."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from qswap.config import settings
from qswap.errors import ConfigError, PhysicalityError
from qswap.models import Preset, Quadrature, Sign, SweepParam
from qswap.schemas import (
    BeamSplitterElement,
    CoherentSource,
    ExperimentSpec,
    LossElement,
    PhaseShiftElement,
    ShotSpec,
    SqueezerParams,
    SwapParams,
    VisibilityElement,
    db_to_linear,
)
from qswap.services import presets
from qswap.services.criteria import (
    GAIN_BOUNDS,
    CriterionResult,
    duan_sum,
    judge,
    optimal_duan,
    ppt_all_bipartitions,
    squeezing_variance,
)
from qswap.services.detection import (
    NoiseReport,
    SidebandSignal,
    Signal,
    electronic_noise_variance,
    feedforward,
    interferometric_check,
    measure,
    measure_quadrature,
    mix,
    noise_report,
    to_db,
    unbalanced_mz,
    variance,
)
from qswap.services.gaussian import (
    BrightState,
    ModeRef,
    balance_phase,
    beamsplitter,
    loss,
    phase_shift,
    prepare_coherent_beam,
    prepare_squeezed_beam,
    relabel,
    tensor,
    tensor_all,
    vacuum,
)

logger = logging.getLogger(__name__)

BALANCE_TOL = 1e-10
REP_RATE_HZ = 82e6
MZ_DELAY_S = 2 / REP_RATE_HZ
MZ_RF_HZ = 20.5e6


@dataclass(frozen=True)
class BalanceReport:
    modes: tuple[str, str]
    phase: float
    powers: tuple[float, float]


@dataclass(frozen=True, eq=False)
class Probe:
    """What the oracle needs to re-measure a trace: the state and the current."""
    state: BrightState
    signal: Signal | SidebandSignal


@dataclass(frozen=True)
class TraceSet:
    scenario: str
    reports: tuple[NoiseReport, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [r.name for r in self.reports]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate trace names in {self.scenario}: {names}")

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.reports]

    def __getitem__(self, name: str) -> NoiseReport:
        for r in self.reports:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_row(self.scenario) for r in self.reports],
                            columns=["scenario", "trace", "variance", "shot_ref", "rel_db", "abs_dbm"])


@dataclass(frozen=True, eq=False)
class ScenarioRun:
    traces: TraceSet
    probes: Mapping[str, Probe]
    criteria: tuple[CriterionResult, ...] = ()


@dataclass(frozen=True, eq=False)
class ExperimentRun:
    spec: ExperimentSpec
    network: BrightState
    state: BrightState
    signals: dict[str, Signal]
    traces: TraceSet
    balances: tuple[BalanceReport, ...]

    def probes(self) -> dict[str, Probe]:
        return {name: Probe(self.state, self.signals[name])
                for name in self.traces.names if name in self.signals}

    def criteria(self) -> tuple[CriterionResult, ...]:
        # pairs are judged after feedforward; detection leaves the covariance untouched
        return tuple(duan_sum(self.state, a, b) for a, b in self.spec.pairs)

    def as_scenario(self) -> ScenarioRun:
        return ScenarioRun(self.traces, self.probes(), self.criteria())


def balanced_beamsplitter(state: BrightState, j: ModeRef, k: ModeRef) -> tuple[BrightState, BalanceReport]:
    phi = balance_phase(state, j, k)
    out = beamsplitter(state, j, k, 0.5, phi)
    pj, pk = out.powers[out.index(j)], out.powers[out.index(k)]
    if abs(pj - pk) > BALANCE_TOL * max(pj, pk):
        raise PhysicalityError(f"balanced splitter left powers {pj:.6g} and {pk:.6g}")
    report = BalanceReport((out.labels[out.index(j)], out.labels[out.index(k)]), phi, (float(pj), float(pk)))
    logger.debug("balanced %s/%s with phase %.6f", *report.modes, phi)
    return out, report


def apply_visibility(state: BrightState, j: ModeRef, k: ModeRef, visibility: float) -> BrightState:
    """Imperfect mode overlap as equal loss v^2 on both inputs."""
    if not 0.0 <= visibility <= 1.0:
        raise ConfigError(f"visibility must lie in [0, 1], got {visibility}")
    return loss(loss(state, j, visibility ** 2), k, visibility ** 2)


def _prepare(source) -> BrightState:
    if isinstance(source, CoherentSource):
        return prepare_coherent_beam(source.power, source.phase, source.label)
    return prepare_squeezed_beam(source.params, source.label)


def apply_element(state: BrightState, element) -> tuple[BrightState, Optional[BalanceReport]]:
    report = None
    if isinstance(element, BeamSplitterElement):
        j, k = element.modes
        if element.phase == "auto":
            state, report = balanced_beamsplitter(state, j, k)
        else:
            state = beamsplitter(state, j, k, element.transmission, element.phase)
        if element.labels:
            jj, kk = state.index(j), state.index(k)
            state = relabel(relabel(state, jj, f"__{jj}"), kk, element.labels[1])
            state = relabel(state, jj, element.labels[0])
    elif isinstance(element, PhaseShiftElement):
        state = phase_shift(state, element.mode, element.phase)
    elif isinstance(element, LossElement):
        state = loss(state, element.mode, element.efficiency)
    elif isinstance(element, VisibilityElement):
        state = apply_visibility(state, *element.modes, element.visibility)
    else:
        raise ConfigError(f"unknown element {element!r}")
    return state, report


def build_network(spec: ExperimentSpec) -> tuple[BrightState, tuple[BalanceReport, ...]]:
    """Sources in order, then the optical elements; validated before detection."""
    state = tensor_all(_prepare(s) for s in spec.sources)
    balances = []
    for element in spec.elements:
        state, report = apply_element(state, element)
        if report:
            balances.append(report)
    state.validate_physical()
    logger.info("network %s: %d modes %s", spec.name, state.n_modes, ",".join(state.labels))
    return state, tuple(balances)


def run_experiment(spec: ExperimentSpec) -> ExperimentRun:
    """Detect, combine and feed forward, then read every trace on the final state.

    Taps on feedforward targets are taken after the feedforward; all other
    taps come first. Mixes are combined once their inputs exist.
    """
    network, balances = build_network(spec)
    targets = {f.target for f in spec.feedforward}
    elec_db = spec.anchors.elec_noise_db
    references: dict[str, Optional[list[str]]] = {}
    signals: dict[str, Signal] = {}
    mixes = [e for e in spec.electronics if e.kind == "mix"]

    def tap(state: BrightState, spec_tap) -> BrightState:
        shot = network.powers[network.index(spec_tap.mode)]
        elec = electronic_noise_variance(shot, elec_db) if elec_db is not None else 0.0
        state, signals[spec_tap.name] = measure(state, spec_tap.mode, elec)
        references[spec_tap.name] = spec_tap.reference
        return state

    def combine():
        for m in mixes:
            if m.name not in signals and all(t in signals for t in m.terms):
                signals[m.name] = mix([signals[t] for t in m.terms], list(m.terms.values()), m.extra_elec_noise)
                references[m.name] = m.reference

    state = network
    for t in spec.taps:
        if t.mode not in targets:
            state = tap(state, t)
    combine()
    for link in spec.feedforward:
        state = feedforward(state, signals[link.sig_x], signals[link.sig_y], link.target,
                            link.gain_x, link.gain_y)
    for t in spec.taps:
        if t.mode in targets:
            state = tap(state, t)
    combine()
    state.validate_physical()

    anchor = spec.anchors.dbm
    reports = []
    reported = [t.name for t in spec.taps if t.report] + [e.name for e in spec.electronics
                                                          if e.kind == "shot" or e.report]
    for e in spec.electronics:
        if isinstance(e, ShotSpec):
            ref = sum(signals[r].shot_ref for r in e.reference)
            reports.append(noise_report(ref, ref, anchor, e.name))
    for name in reported:
        if name not in signals:
            continue
        ref = references.get(name)
        shot = sum(signals[r].shot_ref for r in ref) if ref else None
        reports.append(variance(state, signals[name], shot, anchor, name))
    order = {name: i for i, name in enumerate(reported)}
    reports.sort(key=lambda r: order[r.name])
    traces = TraceSet(spec.name, tuple(reports), spec.metadata.model_dump())
    return ExperimentRun(spec, network, state, signals, traces, tuple(balances))


def build_epr_source(p1: SqueezerParams, p2: SqueezerParams,
                     labels: tuple[str, str] = ("EPRa", "EPRb")) -> tuple[BrightState, BalanceReport]:
    if not math.isclose(p1.power, p2.power, rel_tol=1e-9):
        logger.warning("EPR inputs have unequal powers %.6g and %.6g", p1.power, p2.power)
    state = tensor(prepare_squeezed_beam(p1, labels[0]), prepare_squeezed_beam(p2, labels[1]))
    return balanced_beamsplitter(state, 0, 1)


def build_swap_setup(src_i: tuple[SqueezerParams, SqueezerParams],
                     src_ii: tuple[SqueezerParams, SqueezerParams],
                     visibility: float = 1.0) -> BrightState:
    """Modes ordered EPR1, Mode5, Mode6, EPR4."""
    epr_i, _ = build_epr_source(*src_i, labels=("EPR1", "EPR2"))
    epr_ii, _ = build_epr_source(*src_ii, labels=("EPR3", "EPR4"))
    state = apply_visibility(tensor(epr_i, epr_ii), "EPR2", "EPR3", visibility)
    state, _ = balanced_beamsplitter(state, "EPR2", "EPR3")
    state = relabel(relabel(state, "EPR2", "Mode5"), "EPR3", "Mode6")
    return state.validate_physical()


def swap_setup(params: SwapParams) -> BrightState:
    return build_swap_setup((params.source_i(), params.source_i()),
                            (params.source_ii(), params.source_ii()), params.visibility)


@dataclass(frozen=True, eq=False)
class SwapOutcome:
    output: BrightState
    duan: CriterionResult
    gain_x: float
    gain_y: float


def _swap_output(setup: BrightState, gain_x: float, gain_y: float, elec_noise: float) -> BrightState:
    state, i5 = measure(setup, "Mode5", elec_noise)
    state, i6 = measure(state, "Mode6", elec_noise)
    bell_plus = mix([i5, i6], [1.0, 1.0])
    bell_minus = mix([i5, i6], [1.0, -1.0])
    state = feedforward(state, bell_plus, bell_minus, "EPR4", gain_x, gain_y)
    out = state.reduced(["EPR1", "EPR4"])
    return relabel(relabel(out, "EPR1", "OUT1"), "EPR4", "OUT2")


def swap_with_feedforward(setup: BrightState, gain_x: float = 1.0, gain_y: Optional[float] = None,
                          optimize: bool = False, elec_noise: float = 0.0) -> SwapOutcome:
    """Bell detection of Mode5/Mode6 and displacement of EPR4 by the two currents.

    With optimize the common gain minimizing the Duan sum is searched in [0, 2].
    """
    gain_y = gain_x if gain_y is None else gain_y
    if optimize:
        res = minimize_scalar(lambda g: duan_sum(_swap_output(setup, g, g, elec_noise), 0, 1).value,
                              bounds=GAIN_BOUNDS, method="bounded", options={"xatol": 1e-8})
        gain_x = gain_y = float(res.x)
    out = _swap_output(setup, gain_x, gain_y, elec_noise).validate_physical()
    result = duan_sum(out, "OUT1", "OUT2", 1.0)
    result = replace(result, params={**result.params, "gain_x": gain_x, "gain_y": gain_y})
    logger.info("swap output duan %.4f at gains %.4f/%.4f (%s)", result.value, gain_x, gain_y,
                result.verdict.value)
    return SwapOutcome(out, result, gain_x, gain_y)


@dataclass(frozen=True, eq=False)
class ClassicalRun:
    result: CriterionResult
    swap_state: BrightState
    classical_state: BrightState
    swap_signal: Signal
    classical_signal: Signal


def _classical(params: SwapParams) -> ClassicalRun:
    epr, _ = build_epr_source(params.source_i(), params.source_i(), labels=("EPR1", "EPR2"))
    power = float(epr.powers[1])
    state = tensor_all([epr, prepare_coherent_beam(power, 0.0, "CL"), vacuum("HET")])
    state = beamsplitter(state, "EPR2", "HET", 0.5, 0.0)
    scale = math.sqrt(2 * power)
    state, sx = measure_quadrature(state, "EPR2", Quadrature.X, scale)
    state, sy = measure_quadrature(state, "HET", Quadrature.Y, scale)
    state = feedforward(state, sx, sy, "CL", 1.0, 1.0)
    classical = squeezing_variance(state, Quadrature.X, "EPR1", "CL", Sign.PLUS, 1.0)

    s = math.sqrt(power)
    _, c1 = measure_quadrature(state, "EPR1", Quadrature.X, s)
    _, c2 = measure_quadrature(state, "CL", Quadrature.X, s)
    classical_signal = mix([c1, c2], [1.0, 1.0])

    run = run_experiment(presets.swap(params))
    swap_value = squeezing_variance(run.state, Quadrature.X, "EPR1", "EPR4", Sign.PLUS, 1.0)
    result = CriterionResult(
        "classical_baseline", classical, 1.0, judge(classical, 1.0),
        {"swap_value": swap_value, "gap_db": to_db(classical / swap_value)},
    )
    return ClassicalRun(result, run.state, state, run.signals["i1+i_out2"], classical_signal)


def classical_baseline(params: SwapParams) -> CriterionResult:
    """Measure-and-prepare: heterodyne EPR2 and write the result onto a coherent beam.

    The value is the normalized X sum of EPR1 and the prepared beam, and the
    gap to the swap output is reported in dB.
    """
    return _classical(params).result


def _bell_elec_noise(params: SwapParams) -> float:
    if params.elec_noise_db is None:
        return 0.0
    return electronic_noise_variance(params.power, params.elec_noise_db)


def run_trace_set(params: SwapParams, preset: Preset) -> TraceSet:
    return run_preset(params, preset).traces


def run_preset(params: SwapParams, preset: Preset) -> ScenarioRun:
    preset = Preset(preset)
    spec = presets.preset_spec(preset, params)
    if spec is not None:
        run = run_experiment(spec)
        criteria = run.criteria()
        if preset in presets.SWAP_NETWORK_PRESETS:
            criteria += tuple(ppt_all_bipartitions(run.network.reduced(
                ["EPR1", "Mode5", "Mode6", "EPR4"])).results)
        if preset is Preset.SWAP:
            elec = _bell_elec_noise(params)
            outcome = swap_with_feedforward(swap_setup(params), params.gain_x, params.gain_y, elec_noise=elec)
            best = swap_with_feedforward(swap_setup(params), optimize=True, elec_noise=elec)
            criteria = (outcome.duan, optimal_duan(best.output, "OUT1", "OUT2")) + criteria[len(run.spec.pairs):]
        return ScenarioRun(run.traces, run.probes(), criteria)
    anchor = params.anchors().dbm
    if preset is Preset.CLASSICAL:
        cl = _classical(params)
        reports = (
            variance(cl.swap_state, cl.swap_signal, anchor=anchor, name="swap i1+i_out2"),
            variance(cl.classical_state, cl.classical_signal, anchor=anchor, name="classical i1+i_cl"),
        )
        probes = {"swap i1+i_out2": Probe(cl.swap_state, cl.swap_signal),
                  "classical i1+i_cl": Probe(cl.classical_state, cl.classical_signal)}
        return ScenarioRun(TraceSet(preset.value, reports), probes, (cl.result,))
    if preset is Preset.PHASE:
        beam = prepare_squeezed_beam(params.source_i(), "SQ")
        readout = unbalanced_mz(beam, MZ_DELAY_S, math.pi / 2, 2 * math.pi * MZ_RF_HZ, anchor)
        reports = (readout.difference,) + readout.ports
        probes = {name: Probe(readout.state, sig) for name, sig in readout.signals.items()}
        meta = {"delay_s": MZ_DELAY_S, "rf_hz": MZ_RF_HZ, "port_powers": list(readout.port_powers)}
        return ScenarioRun(TraceSet(preset.value, reports, meta), probes)
    if preset is Preset.INTERFERE:
        epr, _ = build_epr_source(params.source_i(), params.source_i(), labels=("EPR1", "EPR2"))
        reports = interferometric_check(epr, "EPR1", "EPR2", anchor)
        return ScenarioRun(TraceSet(preset.value, reports), {}, (duan_sum(epr, "EPR1", "EPR2"),))
    raise ConfigError(f"unknown preset {preset}")


def network_state(params: SwapParams, preset: Preset) -> BrightState:
    """State the multipartite criteria look at for a preset."""
    preset = Preset(preset)
    if preset is Preset.FIG4:
        return build_network(presets.fig4(params))[0]
    if preset in (Preset.CLASSICAL, Preset.PHASE, Preset.INTERFERE):
        epr, _ = build_epr_source(params.source_i(), params.source_i(), labels=("EPR1", "EPR2"))
        return epr
    if preset is Preset.FIG8_ASYM:
        params = params.model_copy(update={"excess_ii": presets.ASYMMETRIC_EXCESS_II})
    return swap_setup(params)


def _sweep_point(base: SwapParams, param: SweepParam, value: float, pure: bool, preset: Preset) -> dict:
    if param is SweepParam.SQUEEZING:
        s = db_to_linear(-value)
        update = {"squeezing_i": s, "squeezing_ii": s}
        if pure:
            update.update(excess_i=1 / s, excess_ii=1 / s)
        params = base.model_copy(update=update)
    elif param is SweepParam.GAIN:
        params = base.model_copy(update={"gain_x": value, "gain_y": value})
    else:
        params = base.model_copy(update={"visibility": value})
    outcome = swap_with_feedforward(swap_setup(params), params.gain_x, params.gain_y,
                                    elec_noise=_bell_elec_noise(params))
    row = {
        "param": param.value,
        "value": value,
        "duan": outcome.duan.value,
        "vsq_x": outcome.duan.params["vsq_x"],
        "vsq_y": outcome.duan.params["vsq_y"],
        "verdict": outcome.duan.verdict.value,
    }
    for report in run_trace_set(params, preset).reports:
        row[f"rel_db[{report.name}]"] = report.rel_db
    return row


@dataclass(frozen=True)
class SweepResult:
    param: SweepParam
    frame: pd.DataFrame
    crossing: Optional[tuple[float, float]]


def swap_sweep(param: SweepParam | str, values: Sequence[float], base: SwapParams,
               pure: bool = False, threads: Optional[int] = None,
               preset: Preset = Preset.SWAP) -> SweepResult:
    """Duan sum of the swap output along one parameter, with the traces of preset.

    The crossing is the first bracket of consecutive values where the sum
    passes the separable bound of 2.
    """
    param, preset = SweepParam(param), Preset(preset)
    if not len(values):
        raise ConfigError("sweep needs at least one value")
    with ThreadPoolExecutor(max_workers=threads or settings.THREADS) as pool:
        rows = list(pool.map(lambda v: _sweep_point(base, param, float(v), pure, preset), values))
    frame = pd.DataFrame(rows)
    below = (frame["duan"] < 2.0).to_numpy()
    crossing = None
    for a in range(len(below) - 1):
        if below[a] != below[a + 1]:
            crossing = (float(frame["value"][a]), float(frame["value"][a + 1]))
            break
    if crossing:
        logger.info("%s sweep crosses the separable bound between %g and %g", param.value, *crossing)
    return SweepResult(param, frame, crossing)


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    return np.linspace(start, stop, steps)
