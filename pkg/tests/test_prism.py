"""Tests for deterministic PRISM model/property emission."""

from __future__ import annotations

import re
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from conftest import make_schedule
from thermark import (
    DiscreteThermalModel,
    ValidationError,
    ZoneGains,
    assign_rewards,
    compose,
    expected_temperature,
    export_prism_model,
    export_properties,
    unroll_zone,
)
from thermark.cli import RunConfig, _build_model
from thermark.datasets import two_zone_benchmark_dir

GOLDEN = Path(__file__).parent / "golden"


def pinned_rewarded(theta=9):
    d = two_zone_benchmark_dir()
    config = RunConfig(
        building=d / "building.json",
        occupancy_paths={
            "zone1": d / "occupancy_zone1.csv",
            "zone2": d / "occupancy_zone2.csv",
        },
        strategy="S6",
    )
    _, thermal, model, _ = _build_model(config)
    gains = {z: ZoneGains(0.7, 1.5) for z in model.zone_ids}
    return assign_rewards(model, thermal, gains, theta)


def one_zone_rewarded():
    thermal = DiscreteThermalModel(
        a=np.array([[1.0]]), b=np.array([[1.0]]), delta=1.0,
        initial_temps=np.array([20.0]), zone_ids=("room",), derived=False,
    )
    schedule = make_schedule(p_vf=[0.25], p_ff=[0.5])
    chain = unroll_zone(schedule, [True, False], 1, zone_id="room")
    model = compose([chain])
    return assign_rewards(model, thermal, {"room": ZoneGains(0.7, 1.5)}, 1)


class TestGolden:
    def test_model_text_matches_golden(self):
        artifact = export_prism_model(pinned_rewarded(), name="two_zone_benchmark",
                                      theta_range=range(1, 10))
        assert artifact.model_text == (GOLDEN / "two_zone_benchmark.pm").read_text()

    def test_properties_match_golden(self):
        artifact = export_prism_model(pinned_rewarded(), name="two_zone_benchmark",
                                      theta_range=range(1, 10))
        assert artifact.properties_text == (GOLDEN / "two_zone_benchmark.props").read_text()

    def test_export_is_deterministic(self):
        a = export_prism_model(pinned_rewarded(), name="x", theta_range=range(1, 10))
        b = export_prism_model(pinned_rewarded(), name="x", theta_range=range(1, 10))
        assert a.model_text == b.model_text
        assert a.properties_text == b.properties_text


class TestOneZone:
    def test_hand_written_model(self):
        artifact = export_prism_model(one_zone_rewarded(), name="room_model")
        expected = """\
// room_model: 1-zone occupancy/thermal reward model
// horizon K=1, theta=1, step length 1 h
// modules synchronize on step labels t1..t2; t_sink loops the
// absorbing final state

dtmc

module zone_room
  step_room : [0..2] init 0;
  occ_room : [0..1] init 0;

  [t1] step_room=0 & occ_room=0 -> 0.25:(step_room'=1)&(occ_room'=1) + 0.75:(step_room'=1)&(occ_room'=0);
  [t2] step_room=1 -> 1:(step_room'=2)&(occ_room'=0);
  [t_sink] step_room=2 -> 1:(step_room'=2);
endmodule

rewards "zone_room"
  step_room=0 & occ_room=0 : 20;
  step_room=1 & occ_room=1 : 1.5;
  step_room=1 & occ_room=0 : 1.5;
endrewards
"""
        assert artifact.model_text == expected

    def test_reward_entry_count_matches_nonzero_states(self):
        rewarded = one_zone_rewarded()
        artifact = export_prism_model(rewarded, name="room_model")
        emitted = len(re.findall(r"^  step_\w+=\d.* : .*;$", artifact.model_text, re.M))
        nonzero = sum(
            int(rewarded.rewards[zid][s.index] != 0.0)
            for zid in rewarded.rewards
            for s in rewarded.model.states
        )
        assert emitted == nonzero == 3


class TestValidationAndLiterals:
    def test_negative_reward_rejected(self, bench_thermal):
        schedule = make_schedule(p_vf=0.4)
        chains = [unroll_zone(schedule, [True] * 10, 9, zone_id=z)
                  for z in ("zone1", "zone2")]
        model = compose(chains)
        gains = {"zone1": ZoneGains(0.7, -1.5), "zone2": ZoneGains(0.7, 1.5)}
        rewarded = assign_rewards(model, bench_thermal, gains, 3)
        with pytest.raises(ValidationError, match="negative reward unsupported"):
            export_prism_model(rewarded, name="bad")

    def test_probability_literals_round_trip(self):
        artifact = export_prism_model(pinned_rewarded(), name="x")
        rewarded = pinned_rewarded()
        probs = set()
        for chain in rewarded.model.chains:
            probs.update(chain.occ_given_empty)
            probs.update(chain.occ_given_occupied)
        emitted = re.findall(r"(\d\.\d+):", artifact.model_text)
        emitted_values = {float(e) for e in emitted}
        for p in probs:
            if p not in (0.0, 1.0):
                assert p in emitted_values or (1.0 - p) in emitted_values

    def test_module_renaming_for_identical_schedules(self, bench_thermal):
        schedule = make_schedule(p_vf=0.4)
        chains = [unroll_zone(schedule, [True] * 10, 9, zone_id=z)
                  for z in ("zone1", "zone2")]
        model = compose(chains)
        gains = {z: ZoneGains(0.7, 1.5) for z in ("zone1", "zone2")}
        rewarded = assign_rewards(model, bench_thermal, gains, 2)
        artifact = export_prism_model(rewarded, name="twins")
        assert ("module zone_zone2 = zone_zone1 "
                "[ step_zone1=step_zone2, occ_zone1=occ_zone2 ] endmodule"
                ) in artifact.model_text
        spelled_out = re.findall(r"^module zone_\w+$", artifact.model_text, re.M)
        assert spelled_out == ["module zone_zone1"]


class TestProperties:
    def test_full_range_two_zones(self):
        text = export_properties(range(1, 10), ("zone1", "zone2"))
        queries = [line for line in text.splitlines() if line.startswith("R{")]
        assert len(queries) == 18
        assert 'R{"zone_zone1"}=? [ C<=2 ]' in queries[0]
        assert "C<=10" in queries[-1]

    def test_empty_range_header_only(self):
        text = export_properties([], ("zone1",))
        lines = text.splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("//")

    def test_single_query(self):
        text = export_properties([4], ("attic",))
        queries = [line for line in text.splitlines() if line.startswith("R{")]
        assert queries == ['R{"zone_attic"}=? [ C<=5 ]  // theta=4, zone attic']


@pytest.mark.skipif(shutil.which("prism") is None,
                    reason="PRISM model checker not on PATH")
class TestPrismIntegration:
    def test_prism_agrees_with_engine(self, tmp_path):
        for theta in (1, 5, 9):
            rewarded = pinned_rewarded(theta)
            artifact = export_prism_model(rewarded, name="check", theta_range=[theta])
            model_path = tmp_path / f"check_{theta}.pm"
            props_path = tmp_path / f"check_{theta}.props"
            model_path.write_text(artifact.model_text)
            props_path.write_text(artifact.properties_text)
            engine = expected_temperature(rewarded, theta)
            for prop_index, zid in enumerate(rewarded.model.zone_ids, start=1):
                out = subprocess.run(
                    ["prism", str(model_path), str(props_path), "-prop", str(prop_index)],
                    capture_output=True, text=True, timeout=300, check=True,
                )
                match = re.search(r"Result: ([0-9.eE+-]+)", out.stdout)
                assert match, out.stdout
                assert abs(float(match.group(1)) - engine[zid]) <= 1e-6
