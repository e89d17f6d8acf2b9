"""Built-in scenarios expressed as ExperimentSpec documents.

Two EPR sources, each made from a pair of squeezed beams on a balanced
splitter. Source I gives EPR1/EPR2, source II gives EPR3/EPR4. The swap
interferes EPR2 and EPR3 into Mode5 and Mode6.
"""
from __future__ import annotations

from typing import Optional

from qswap.models import Preset
from qswap.schemas import (
    BeamSplitterElement,
    ExperimentSpec,
    FeedforwardSpec,
    MixSpec,
    ShotSpec,
    SqueezedSource,
    SwapParams,
    TapSpec,
    VisibilityElement,
)

ASYMMETRIC_EXCESS_II = 63.0

PRESET_HELP = {
    Preset.FIG4: "noise of each squeezed input beam and of both EPR sources",
    Preset.FIG5: "EPR1 and EPR4 before and after adding the Bell-plus current",
    Preset.FIG7: "four-beam sum i1+i5+i6+i4 against its shot level",
    Preset.FIG8: "EPR1 and EPR4 each corrected by the Bell-plus current, against a three-beam shot level",
    Preset.FIG8_ASYM: "as fig8 with a quieter anti-squeezed quadrature in source II",
    Preset.SWAP: "full swap with Bell detection and feedforward onto EPR4",
    Preset.CLASSICAL: "swap against a measure-and-prepare baseline",
    Preset.PHASE: "delay-line interferometer reading phase noise as amplitude noise",
    Preset.INTERFERE: "recombining the EPR beams of source I",
}

SWAP_NETWORK_PRESETS = (Preset.FIG5, Preset.FIG7, Preset.FIG8, Preset.FIG8_ASYM, Preset.SWAP)


def _squeezed(label: str, params: SwapParams, source: str) -> SqueezedSource:
    p = params.source_i() if source == "I" else params.source_ii()
    return SqueezedSource(kind="squeezed", label=label, params=p)


def _epr(a: str, b: str, out: tuple[str, str]) -> BeamSplitterElement:
    return BeamSplitterElement(kind="beamsplitter", modes=(a, b), labels=out)


def swap_network(params: SwapParams, name: str, taps: list[TapSpec], electronics: list,
                 feedforward: Optional[list[FeedforwardSpec]] = None) -> ExperimentSpec:
    sources = [_squeezed("SQ1", params, "I"), _squeezed("SQ2", params, "I"),
               _squeezed("SQ3", params, "II"), _squeezed("SQ4", params, "II")]
    elements = [
        _epr("SQ1", "SQ2", ("EPR1", "EPR2")),
        _epr("SQ3", "SQ4", ("EPR3", "EPR4")),
        VisibilityElement(kind="visibility", modes=("EPR2", "EPR3"), visibility=params.visibility),
        _epr("EPR2", "EPR3", ("Mode5", "Mode6")),
    ]
    return ExperimentSpec(name=name, sources=sources, elements=elements, taps=taps,
                          electronics=electronics, feedforward=feedforward or [],
                          pairs=[("EPR1", "EPR4")], anchors=params.anchors())


def _bell(report: bool = False) -> list[MixSpec]:
    return [MixSpec(kind="mix", name="i_bell_plus", terms={"i5": 1.0, "i6": 1.0}, report=report),
            MixSpec(kind="mix", name="i_bell_minus", terms={"i5": 1.0, "i6": -1.0}, report=report)]


def fig4(params: SwapParams) -> ExperimentSpec:
    sources = [_squeezed("SQ_I_s", params, "I"), _squeezed("SQ_I_p", params, "I"),
               _squeezed("SQ_II_s", params, "II"), _squeezed("SQ_II_p", params, "II"),
               _squeezed("SQ1", params, "I"), _squeezed("SQ2", params, "I"),
               _squeezed("SQ3", params, "II"), _squeezed("SQ4", params, "II")]
    taps = [TapSpec(name=f"i_{label[3:]}", mode=label) for label in
            ("SQ_I_s", "SQ_I_p", "SQ_II_s", "SQ_II_p")]
    taps += [TapSpec(name=f"i{k}", mode=f"EPR{k}", report=False) for k in range(1, 5)]
    electronics = [
        MixSpec(kind="mix", name="i1+i2", terms={"i1": 1.0, "i2": 1.0}),
        MixSpec(kind="mix", name="i3+i4", terms={"i3": 1.0, "i4": 1.0}),
        ShotSpec(kind="shot", name="shot_1beam", reference=["i_I_s"]),
        ShotSpec(kind="shot", name="shot_2beam", reference=["i1", "i2"]),
    ]
    return ExperimentSpec(
        name=Preset.FIG4.value, sources=sources,
        elements=[_epr("SQ1", "SQ2", ("EPR1", "EPR2")), _epr("SQ3", "SQ4", ("EPR3", "EPR4"))],
        taps=taps, electronics=electronics, pairs=[("EPR1", "EPR2"), ("EPR3", "EPR4")],
        anchors=params.anchors())


def fig5(params: SwapParams) -> ExperimentSpec:
    two = ["i1", "i4"]
    taps = [TapSpec(name="i1", mode="EPR1"), TapSpec(name="i4", mode="EPR4"),
            TapSpec(name="i5", mode="Mode5", report=False), TapSpec(name="i6", mode="Mode6", report=False)]
    electronics = _bell() + [
        MixSpec(kind="mix", name="i1+i4", terms={"i1": 1.0, "i4": 1.0}, reference=two),
        MixSpec(kind="mix", name="i1+i4+i_bell_plus",
                terms={"i1": 1.0, "i4": 1.0, "i_bell_plus": 1.0}, reference=two),
        ShotSpec(kind="shot", name="shot_2beam", reference=two),
    ]
    return swap_network(params, Preset.FIG5.value, taps, electronics)


def fig7(params: SwapParams) -> ExperimentSpec:
    names = ["i1", "i5", "i6", "i4"]
    modes = ["EPR1", "Mode5", "Mode6", "EPR4"]
    taps = [TapSpec(name=n, mode=m, report=False) for n, m in zip(names, modes)]
    electronics = [
        MixSpec(kind="mix", name="i1+i5+i6+i4", terms={n: 1.0 for n in names}),
        ShotSpec(kind="shot", name="shot_4beam", reference=names),
    ]
    return swap_network(params, Preset.FIG7.value, taps, electronics)


def fig8(params: SwapParams, name: str = Preset.FIG8.value) -> ExperimentSpec:
    three = ["i1", "i5", "i6"]
    taps = [TapSpec(name="i1", mode="EPR1", reference=three), TapSpec(name="i4", mode="EPR4", reference=three),
            TapSpec(name="i5", mode="Mode5", report=False), TapSpec(name="i6", mode="Mode6", report=False)]
    electronics = _bell() + [
        MixSpec(kind="mix", name="i1+i_bell_plus", terms={"i1": 1.0, "i_bell_plus": 1.0}, reference=three),
        MixSpec(kind="mix", name="i_bell_plus+i4", terms={"i_bell_plus": 1.0, "i4": 1.0}, reference=three),
        ShotSpec(kind="shot", name="shot_3beam", reference=three),
    ]
    return swap_network(params, name, taps, electronics)


def fig8_asym(params: SwapParams) -> ExperimentSpec:
    return fig8(params.model_copy(update={"excess_ii": ASYMMETRIC_EXCESS_II}), Preset.FIG8_ASYM.value)


def swap(params: SwapParams) -> ExperimentSpec:
    two = ["i1", "i_out2"]
    taps = [TapSpec(name="i1", mode="EPR1"), TapSpec(name="i_out2", mode="EPR4"),
            TapSpec(name="i5", mode="Mode5", report=False), TapSpec(name="i6", mode="Mode6", report=False)]
    electronics = _bell() + [
        MixSpec(kind="mix", name="i1+i_out2", terms={"i1": 1.0, "i_out2": 1.0}, reference=two),
        ShotSpec(kind="shot", name="shot_2beam", reference=two),
    ]
    link = FeedforwardSpec(sig_x="i_bell_plus", sig_y="i_bell_minus", target="EPR4",
                           gain_x=params.gain_x, gain_y=params.gain_y)
    return swap_network(params, Preset.SWAP.value, taps, electronics, [link])


BUILDERS = {
    Preset.FIG4: fig4,
    Preset.FIG5: fig5,
    Preset.FIG7: fig7,
    Preset.FIG8: fig8,
    Preset.FIG8_ASYM: fig8_asym,
    Preset.SWAP: swap,
}


def preset_spec(preset: Preset, params: SwapParams) -> Optional[ExperimentSpec]:
    """Network form of a preset; None for presets that are not a plain network."""
    builder = BUILDERS.get(Preset(preset))
    return builder(params) if builder else None
