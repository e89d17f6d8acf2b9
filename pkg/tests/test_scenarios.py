import math

import numpy as np
import pytest
from pydantic import ValidationError

from qswap.errors import ConfigError, DegenerateInputError
from qswap.models import Preset, SweepParam, Verdict
from qswap.schemas import ExperimentSpec, SqueezerParams, SwapParams
from qswap.services.criteria import duan_sum
from qswap.services.detection import NoiseReport
from qswap.services.presets import preset_spec
from qswap.services.scenarios import (
    TraceSet,
    build_epr_source,
    build_network,
    classical_baseline,
    run_experiment,
    run_preset,
    run_trace_set,
    swap_setup,
    swap_sweep,
    swap_with_feedforward,
)

COHERENT = SwapParams(squeezing_i=1.0, excess_i=1.0, squeezing_ii=1.0, excess_ii=1.0)


def pure(s: float) -> SwapParams:
    return SwapParams(squeezing_i=s, excess_i=1 / s, squeezing_ii=s, excess_ii=1 / s)


def test_epr_source_is_balanced_and_entangled(squeezed_params):
    state, report = build_epr_source(squeezed_params, squeezed_params)
    assert report.phase == pytest.approx(math.pi / 2)
    assert report.powers[0] == pytest.approx(report.powers[1])
    assert duan_sum(state, 0, 1).value == pytest.approx(1.0)


def test_coherent_epr_inputs_give_no_correlation():
    p = SqueezerParams(power=1, squeezing=1, excess=1)
    state, _ = build_epr_source(p, p)
    assert duan_sum(state, 0, 1).value == pytest.approx(2.0)


def test_swap_setup_mode_order(mixed_swap_setup):
    assert mixed_swap_setup.labels == ("EPR1", "Mode5", "Mode6", "EPR4")
    np.testing.assert_allclose(mixed_swap_setup.powers, [1.0, 1.0, 1.0, 1.0])


@pytest.mark.parametrize("s, expected", [(0.5, 2.0), (0.25, 1.0)])
def test_swap_at_unit_gain_is_four_times_the_squeezing(s, expected):
    params = SwapParams(squeezing_i=s, squeezing_ii=s)
    outcome = swap_with_feedforward(swap_setup(params))
    assert outcome.duan.value == pytest.approx(expected, rel=1e-9)
    assert outcome.output.labels == ("OUT1", "OUT2")
    if s == 0.5:
        assert outcome.duan.params["vsq_x"] == pytest.approx(1.0)
    else:
        assert outcome.duan.verdict is Verdict.VIOLATED


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9, 0.99])
def test_optimized_gain_swaps_pure_inputs_at_any_squeezing(s):
    outcome = swap_with_feedforward(swap_setup(pure(s)), optimize=True)
    assert outcome.duan.value < 2.0
    assert 0.0 <= outcome.gain_x <= 2.0


def test_swap_needs_three_db_at_unit_gain():
    above = swap_with_feedforward(swap_setup(SwapParams(squeezing_i=0.49, squeezing_ii=0.49)))
    below = swap_with_feedforward(swap_setup(SwapParams(squeezing_i=0.51, squeezing_ii=0.51)))
    assert above.duan.verdict is Verdict.VIOLATED
    assert below.duan.verdict is Verdict.SATISFIED


def test_classical_baseline_gap():
    result = classical_baseline(SwapParams())
    assert result.value == pytest.approx(1.5)
    assert result.params["swap_value"] == pytest.approx(1.0)
    assert result.params["gap_db"] == pytest.approx(10 * math.log10(1.5))


def test_fig5_single_traces_add_up():
    traces = run_trace_set(SwapParams(), Preset.FIG5)
    assert traces["i1+i4"].variance == pytest.approx(traces["i1"].variance + traces["i4"].variance, rel=1e-12)
    assert traces["i1"].rel_db == pytest.approx(10 * math.log10(50.25))


def test_fig5_with_coherent_sources():
    traces = run_trace_set(COHERENT, Preset.FIG5)
    for name in ("i1", "i4", "i1+i4", "shot_2beam"):
        assert traces[name].rel_db == pytest.approx(0.0, abs=1e-9)
    assert traces["i1+i4+i_bell_plus"].rel_db == pytest.approx(10 * math.log10(2))


def test_fig7_four_beam_sum_shows_the_squeezing():
    traces = run_trace_set(SwapParams(), Preset.FIG7)
    assert traces["i1+i5+i6+i4"].rel_db == pytest.approx(10 * math.log10(0.5))
    assert traces["shot_4beam"].shot_ref == pytest.approx(4.0)


@pytest.mark.parametrize("preset, excess", [(Preset.FIG8, 100.0), (Preset.FIG8_ASYM, 63.0)])
def test_fig8_gap(preset, excess):
    traces = run_trace_set(SwapParams(), preset)
    diff = traces["i1+i_bell_plus"].rel_db - traces["i4"].rel_db
    assert diff == pytest.approx(10 * math.log10((2.5 + excess) / (0.5 + excess)))
    assert diff < 0.14
    assert traces["i4"].shot_ref == pytest.approx(3.0)
    mirrored = traces["i_bell_plus+i4"].rel_db - traces["i1"].rel_db
    assert mirrored == pytest.approx(10 * math.log10((2.5 + 100) / (0.5 + 100)))
    assert traces["i_bell_plus+i4"].shot_ref == pytest.approx(3.0)


def test_fig4_traces():
    traces = run_trace_set(SwapParams(), Preset.FIG4)
    assert traces["i_I_s"].rel_db == pytest.approx(10 * math.log10(0.5))
    assert traces["i1+i2"].rel_db == pytest.approx(10 * math.log10(0.5))
    assert "i1" not in traces.names


def test_swap_preset_matches_direct_protocol():
    traces = run_trace_set(SwapParams(), Preset.SWAP)
    outcome = swap_with_feedforward(swap_setup(SwapParams()))
    assert traces["i1+i_out2"].variance / traces["i1+i_out2"].shot_ref == pytest.approx(
        outcome.duan.params["vsq_x"])


def test_swap_preset_criteria():
    run = run_preset(pure(0.5), Preset.SWAP)
    ppt = [c for c in run.criteria if c.criterion == "ppt"]
    assert len(ppt) == 7
    assert all(c.verdict is Verdict.VIOLATED for c in ppt)
    assert set(run.probes) >= {"i1", "i_out2", "i1+i_out2"}


def test_phase_preset_reads_antisqueezing():
    traces = run_trace_set(SwapParams(), Preset.PHASE)
    assert traces["difference"].rel_db == pytest.approx(20.0, rel=1e-9)


def test_interfere_preset():
    traces = run_trace_set(SwapParams(), Preset.INTERFERE)
    assert traces["sum"].rel_db == pytest.approx(10 * math.log10(0.5), abs=1e-9)


def test_electronic_noise_and_anchor_reach_traces():
    params = SwapParams(elec_noise_db=-10.0, dbm_anchor=-80.0)
    traces = run_trace_set(params, Preset.FIG5)
    assert traces["i1"].variance == pytest.approx(50.25 + 0.1)
    assert traces["shot_2beam"].abs_dbm == pytest.approx(-80.0 + 10 * math.log10(2))


def test_visibility_degrades_the_swap():
    perfect = swap_with_feedforward(swap_setup(SwapParams(squeezing_i=0.25, squeezing_ii=0.25)))
    lossy = swap_with_feedforward(swap_setup(SwapParams(squeezing_i=0.25, squeezing_ii=0.25, visibility=0.9)))
    assert lossy.duan.value > perfect.duan.value


def test_config_round_trip_through_engine():
    spec = preset_spec(Preset.SWAP, SwapParams())
    again = ExperimentSpec.model_validate_json(spec.model_dump_json())
    run = run_experiment(again)
    assert run.state.labels == ("EPR1", "Mode5", "Mode6", "EPR4")
    assert {0, 1, 2, 3} == set(run.state.consumed)
    assert len(run.balances) == 3


def test_spec_validation_catches_bad_references():
    base = preset_spec(Preset.SWAP, SwapParams()).model_dump()
    bad_mode = {**base, "taps": base["taps"] + [{"name": "ghost", "mode": "EPR9"}]}
    with pytest.raises(ValidationError):
        ExperimentSpec.model_validate(bad_mode)
    loop = {**base, "feedforward": [{"sig_x": "i_out2", "sig_y": "i_bell_minus", "target": "EPR4"}]}
    with pytest.raises(ValidationError):
        ExperimentSpec.model_validate(loop)


def test_build_network_rejects_dark_auto_balance():
    spec = ExperimentSpec.model_validate({
        "sources": [{"kind": "coherent", "label": "A", "power": 1.0},
                    {"kind": "coherent", "label": "B", "power": 0.0}],
        "elements": [{"kind": "beamsplitter", "modes": ["A", "B"]}],
    })
    with pytest.raises(DegenerateInputError):
        build_network(spec)


def test_trace_names_unique():
    report = NoiseReport(1.0, 1.0, 0.0, name="a")
    with pytest.raises(ConfigError):
        TraceSet("x", (report, report))


def test_squeezing_sweep_crosses_near_three_db():
    result = swap_sweep(SweepParam.SQUEEZING, np.linspace(0, 6, 25), SwapParams(), threads=2)
    assert len(result.frame) == 25
    lo, hi = result.crossing
    assert lo <= 10 * math.log10(2) <= hi
    assert list(result.frame["value"]) == pytest.approx(list(np.linspace(0, 6, 25)))


def test_gain_sweep_on_pure_inputs_dips_below_bound():
    result = swap_sweep(SweepParam.GAIN, np.linspace(0, 2, 21), pure(0.9))
    assert result.frame["duan"].min() < 2.0


def test_empty_sweep_rejected():
    with pytest.raises(ConfigError):
        swap_sweep(SweepParam.GAIN, [], SwapParams())


def test_single_point_visibility_sweep_matches_the_preset_run():
    result = swap_sweep(SweepParam.VISIBILITY, [1.0], SwapParams(), preset=Preset.SWAP)
    row = result.frame.iloc[0]
    run = run_preset(SwapParams(), Preset.SWAP)
    assert row["duan"] == pytest.approx(run.criteria[0].value, rel=1e-9)
    for report in run.traces.reports:
        assert row[f"rel_db[{report.name}]"] == pytest.approx(report.rel_db, rel=1e-9)


def test_sweep_reports_traces_of_the_chosen_preset():
    result = swap_sweep(SweepParam.SQUEEZING, [3.0], SwapParams(), preset=Preset.FIG7)
    assert result.frame.loc[0, "rel_db[i1+i5+i6+i4]"] == pytest.approx(-3.0, abs=0.01)
    assert "rel_db[i1+i_out2]" not in result.frame.columns


def test_classical_swap_value_is_the_swap_preset_trace():
    params = SwapParams(squeezing_i=0.3, squeezing_ii=0.3)
    traces = run_trace_set(params, Preset.SWAP)
    expected = traces["i1+i_out2"].variance / traces["i1+i_out2"].shot_ref
    assert classical_baseline(params).params["swap_value"] == pytest.approx(expected, rel=1e-9)


def test_feedforward_gains_are_recorded_without_touching_the_criterion():
    outcome = swap_with_feedforward(swap_setup(SwapParams()), 0.8, 1.1)
    assert outcome.duan.params["gain_x"] == pytest.approx(0.8)
    assert outcome.duan.params["gain_y"] == pytest.approx(1.1)
    assert {"vsq_x", "vsq_y"} <= set(outcome.duan.params)
