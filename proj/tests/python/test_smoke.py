import math
import os
from pathlib import Path

import pytest

import tiltwing as tw

ROOT = Path(os.environ.get("TILTWING_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def vehicle():
    return tw.default_vehicle()


def test_config_file_matches_builtin(vehicle):
    loaded = tw.load_vehicle(ROOT / "config" / "default_vehicle.yaml")
    assert loaded.to_yaml() == vehicle.to_yaml()
    tw.validate(loaded)


def test_bad_config_raises():
    with pytest.raises(ValueError):
        tw.parse_vehicle("mass: -1\n")


def test_wrench_at_rest_is_zero(vehicle):
    force, moment = tw.wrench(vehicle, tw.ActuatorCommands())
    assert max(abs(v) for v in force) == 0.0
    assert max(abs(v) for v in moment) == 0.0


def test_hover_trim(vehicle):
    t = tw.solve_trim(vehicle, 0.0, 0.0)
    assert t["feasible"]
    assert 0.0 < t["delta_plr"] < 1.0
    assert t["res_v"] < 0.05


def test_small_map_lookup(vehicle):
    m = tw.build_trim_map(vehicle, [0.0, 5.0, 10.0], [-0.1, 0.0, 0.1])
    assert m.feasible_count() > 0
    header = m.to_csv().splitlines()[0]
    assert header == "va,gamma,feasible,theta_t,delta_w,delta_plr,delta_al,delta_e,delta_pt,cost,res_v,res_th"
    hover = m.lookup(0.0, 0.0)
    assert hover["delta_w"] == pytest.approx(1.0, abs=0.05)
    assert tw.parse_trim_map(m.to_csv()).feasible_count() == m.feasible_count()


def test_scenario_and_report(vehicle):
    text = (ROOT / "scenarios" / "hover_hold.scn").read_text()
    log = tw.run_scenario(text, vehicle)
    metrics = tw.report(log)
    assert metrics["altitude_excursion_m"] < 0.5
    with pytest.raises(ValueError):
        tw.run_scenario("mode = hover\nduration = 1\n", vehicle)


def test_control_helpers():
    u = tw.wls_allocate([[1.0, 0.0], [0.0, 1.0]], [5.0, 5.0], [[1.0, 0.0], [0.0, 1.0]],
                        [[1e-9, 0.0], [0.0, 1e-9]], 0.2, 0.7)
    assert u[0] == pytest.approx(0.2)
    assert u[1] == pytest.approx(0.3)
    assert tw.turn_coordination(math.radians(20.0), 15.0) == pytest.approx(9.81 * math.tan(math.radians(20.0)) / 15.0)


def test_checks_pass(vehicle):
    assert all(passed for _, passed, _ in tw.check(vehicle))
