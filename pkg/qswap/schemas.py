"""Validated parameter and scenario documents.

An ExperimentSpec is the JSON form of a network: sources, optical elements,
taps, electronic mixes and feedforward links. Presets build the same model,
so `--config` files and presets run through one engine.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qswap.models import Preset

UNCERTAINTY_TOL = 1e-9


def db_to_linear(db: float) -> float:
    return 10 ** (db / 10)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class SqueezerParams(StrictModel):
    power: float = Field(gt=0)
    squeezing: float = Field(gt=0, le=1)
    excess: float = Field(gt=0)
    ellipse_angle: float = 0.0
    carrier_phase: float = 0.0

    @model_validator(mode="after")
    def _uncertainty(self):
        if self.squeezing * self.excess < 1 - UNCERTAINTY_TOL:
            raise ValueError(
                f"squeezing {self.squeezing} x excess {self.excess} < 1 is unphysical")
        return self

    @classmethod
    def from_db(cls, squeezing_db: float, excess_db: Optional[float] = None,
                power: float = 1.0, pure: bool = False, **kwargs) -> "SqueezerParams":
        """Squeezing in dB below shot noise, anti-squeezing in dB above it.

        Without an anti-squeezing level the beam is pure, and 0 dB squeezing
        is then a coherent beam.
        """
        s = db_to_linear(-squeezing_db)
        if pure or excess_db is None:
            h = 1 / s
        else:
            h = db_to_linear(excess_db)
        return cls(power=power, squeezing=s, excess=h, **kwargs)

    @property
    def squeezing_db(self) -> float:
        return -10 * math.log10(self.squeezing)

    @property
    def is_pure(self) -> bool:
        return abs(self.squeezing * self.excess - 1) <= UNCERTAINTY_TOL


class SqueezedSource(StrictModel):
    kind: Literal["squeezed"]
    label: str
    params: SqueezerParams


class CoherentSource(StrictModel):
    kind: Literal["coherent"]
    label: str
    power: float = Field(ge=0)
    phase: float = 0.0


Source = Annotated[Union[SqueezedSource, CoherentSource], Field(discriminator="kind")]


class BeamSplitterElement(StrictModel):
    kind: Literal["beamsplitter"]
    modes: tuple[str, str]
    transmission: float = Field(default=0.5, ge=0, le=1)
    phase: Union[float, Literal["auto"]] = "auto"
    labels: Optional[tuple[str, str]] = None

    @model_validator(mode="after")
    def _auto_needs_balanced(self):
        if self.phase == "auto" and abs(self.transmission - 0.5) > 1e-12:
            raise ValueError("phase 'auto' requires transmission 0.5")
        if self.modes[0] == self.modes[1]:
            raise ValueError("beam splitter needs two distinct modes")
        return self


class PhaseShiftElement(StrictModel):
    kind: Literal["phase_shift"]
    mode: str
    phase: float


class LossElement(StrictModel):
    kind: Literal["loss"]
    mode: str
    efficiency: float = Field(ge=0, le=1)


class VisibilityElement(StrictModel):
    kind: Literal["visibility"]
    modes: tuple[str, str]
    visibility: float = Field(ge=0, le=1)


Element = Annotated[
    Union[BeamSplitterElement, PhaseShiftElement, LossElement, VisibilityElement],
    Field(discriminator="kind"),
]


class TapSpec(StrictModel):
    name: str
    mode: str
    report: bool = True
    reference: Optional[list[str]] = None


class MixSpec(StrictModel):
    kind: Literal["mix"]
    name: str
    terms: dict[str, float] = Field(min_length=1)
    extra_elec_noise: float = Field(default=0.0, ge=0)
    report: bool = True
    reference: Optional[list[str]] = None


class ShotSpec(StrictModel):
    kind: Literal["shot"]
    name: str
    reference: list[str] = Field(min_length=1)


Electronics = Annotated[Union[MixSpec, ShotSpec], Field(discriminator="kind")]


class FeedforwardSpec(StrictModel):
    sig_x: str
    sig_y: str
    target: str
    gain_x: float = 1.0
    gain_y: float = 1.0


class DbmAnchor(StrictModel):
    dbm: float
    shot_ref: float = Field(default=1.0, gt=0)


class Anchors(StrictModel):
    dbm: Optional[DbmAnchor] = None
    elec_noise_db: Optional[float] = None


class TraceMetadata(StrictModel):
    detection_frequency_hz: float = 17.5e6
    rbw_hz: float = 300e3
    vbw_hz: float = 30.0


class ExperimentSpec(StrictModel):
    name: str = "custom"
    sources: list[Source] = Field(min_length=1)
    elements: list[Element] = []
    taps: list[TapSpec] = []
    electronics: list[Electronics] = []
    feedforward: list[FeedforwardSpec] = []
    pairs: list[tuple[str, str]] = []
    anchors: Anchors = Anchors()
    metadata: TraceMetadata = TraceMetadata()

    @model_validator(mode="after")
    def _references(self):
        labels = [s.label for s in self.sources]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate source labels: {labels}")
        live = set(labels)

        def need(mode: str, where: str):
            if mode not in live:
                raise ValueError(f"{where} references unknown mode {mode!r}")

        for el in self.elements:
            modes = el.modes if hasattr(el, "modes") else (el.mode,)
            for m in modes:
                need(m, el.kind)
            if getattr(el, "labels", None):
                live -= set(el.modes)
                if set(el.labels) & live:
                    raise ValueError(f"relabel {el.labels} collides with existing modes")
                live |= set(el.labels)

        names = [t.name for t in self.taps] + [e.name for e in self.electronics]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate trace names: {names}")
        tapped = {}
        for tap in self.taps:
            need(tap.mode, f"tap {tap.name}")
            if tap.mode in tapped:
                raise ValueError(f"mode {tap.mode} is tapped twice")
            tapped[tap.mode] = tap.name
        signals = {t.name for t in self.taps}
        mix_terms = {}
        for e in self.electronics:
            refs = e.terms if e.kind == "mix" else e.reference
            for r in refs:
                if r not in signals:
                    raise ValueError(f"{e.name} references unknown or later signal {r!r}")
            if e.kind == "mix":
                signals.add(e.name)
                mix_terms[e.name] = list(e.terms)
        for item in self.taps + [e for e in self.electronics if e.kind == "mix"]:
            for r in item.reference or ():
                if r not in signals:
                    raise ValueError(f"{item.name} reference {r!r} is not a signal")

        def depends_on(name: str) -> set[str]:
            if name not in mix_terms:
                return {name}
            return set().union(*(depends_on(t) for t in mix_terms[name]))

        target_taps = {tapped[f.target] for f in self.feedforward if f.target in tapped}
        for f in self.feedforward:
            need(f.target, "feedforward")
            for sig in (f.sig_x, f.sig_y):
                if sig not in signals:
                    raise ValueError(f"feedforward signal {sig!r} is undefined")
                if depends_on(sig) & target_taps:
                    raise ValueError(f"feedforward signal {sig!r} reads a modulated mode")
        for a, b in self.pairs:
            need(a, "pair")
            need(b, "pair")
        return self


class SwapParams(StrictModel):
    """Knobs shared by the two-source swap presets."""
    squeezing_i: float = 0.5
    excess_i: float = 100.0
    squeezing_ii: float = 0.5
    excess_ii: float = 100.0
    power: float = Field(default=1.0, gt=0)
    visibility: float = Field(default=1.0, ge=0, le=1)
    gain_x: float = 1.0
    gain_y: float = 1.0
    elec_noise_db: Optional[float] = None
    dbm_anchor: Optional[float] = None

    def source_i(self, carrier_phase: float = 0.0) -> SqueezerParams:
        return SqueezerParams(power=self.power, squeezing=self.squeezing_i,
                              excess=self.excess_i, carrier_phase=carrier_phase)

    def source_ii(self, carrier_phase: float = 0.0) -> SqueezerParams:
        return SqueezerParams(power=self.power, squeezing=self.squeezing_ii,
                              excess=self.excess_ii, carrier_phase=carrier_phase)

    @property
    def mixed(self) -> bool:
        return not (self.source_i().is_pure and self.source_ii().is_pure)

    def anchors(self) -> Anchors:
        dbm = DbmAnchor(dbm=self.dbm_anchor, shot_ref=self.power) if self.dbm_anchor is not None else None
        return Anchors(dbm=dbm, elec_noise_db=self.elec_noise_db)


class RunManifest(StrictModel):
    preset: Optional[Preset] = None
    config: Optional[Path] = None
    out_dir: Path = Path("out")
    params: SwapParams = SwapParams()
    oracle: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _one_scenario(self):
        if (self.preset is None) == (self.config is None):
            raise ValueError("give exactly one of a preset or a config file")
        return self
