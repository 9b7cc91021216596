# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import math

import numpy as np
import pytest

from kinstils.exceptions import IntegrationError, InvalidArgumentError
from kinstils.expr import parse
from kinstils.geometry import SpaceDomain
from kinstils.vlasov import (RATIO_HEADER, TRAJECTORY_HEADER, EMFields, PhaseState, VlasovCase, VlasovTestFunction,
                             divergence_a, field_a, flow_rk4, max_divergence, ratio_catalog, ratio_rows, speed_drift,
                             trajectory_rows, vlasov_identity_check, vlasov_ratio)

UNIT = SpaceDomain((0.0,), (1.0,))
SQUARE = SpaceDomain((0.0, 0.0), (1.0, 1.0))

NO_FIELD = EMFields.from_strings()
GYRATION = EMFields.from_strings(B=("0", "0", "1"))

FIELD_CATALOGS = [
    EMFields.from_strings(E=("t", "x", "y"), B=("sin(t+x)", "cos(y)", "x*y")),
    EMFields.from_strings(E=("exp(-x)", "0", "sin(t)"), B=("0", "0", "1 + x^2")),
    EMFields.from_strings(E=("x*y", "t*y", "cos(x)"), B=("t", "max(x, y)", "sqrt(1 + t)")),
]

BUMP = "t*(x*(1-x))^2*(vx*(1-vx))^2"


def bump(text=BUMP, support_v=None):
    return VlasovTestFunction.from_string(text, [[0, 1]], support_v or {"vx": [0, 1]})


def test_field_a_example():
    fields = EMFields.from_strings(E=("1", "0", "0"), B=("0", "0", "1"))
    a = field_a(PhaseState(0.0, [0, 0, 0], [1, 2, 3]), fields)
    assert a.tolist() == [1.0, 1.0, 2.0, 3.0, 3.0, -1.0, 0.0]


def test_fields_reject_velocity_dependence():
    with pytest.raises(InvalidArgumentError):
        EMFields([parse("vx"), parse("0"), parse("0")], [parse("0")] * 3)
    with pytest.raises(InvalidArgumentError):
        EMFields([parse("0")] * 2, [parse("0")] * 3)


def test_phase_state_validation():
    state = PhaseState(0.5, [1, 2, 0], 3)
    assert state.x.tolist() == [1.0, 2.0, 0.0]
    assert state.v.tolist() == [3.0, 3.0, 3.0]
    assert PhaseState.from_array(state.as_array()).as_array().tolist() == state.as_array().tolist()
    with pytest.raises(InvalidArgumentError):
        PhaseState(0.0, [float("nan"), 0, 0], [0, 0, 0])


@pytest.mark.parametrize("fields", FIELD_CATALOGS)
def test_divergence_free_at_random_states(fields):
    rng = np.random.default_rng(11)
    for _ in range(100):
        state = PhaseState(rng.uniform(0, 1), rng.uniform(-1, 1, 3), rng.uniform(-2, 2, 3))
        assert abs(divergence_a(state, fields)) <= 1e-6


@pytest.mark.parametrize("fields", FIELD_CATALOGS)
def test_max_divergence(fields):
    assert max_divergence(fields, 1.0, SQUARE, samples=20) <= 1e-6


def test_divergence_step_must_be_positive():
    with pytest.raises(InvalidArgumentError):
        divergence_a(PhaseState(0.0, [0, 0, 0], [0, 0, 0]), NO_FIELD, h=0.0)


def test_gyration_matches_closed_form():
    dt = 2 * math.pi / 1000
    trajectory = flow_rk4(PhaseState(0.0, [0, 0, 0], [1, 0, 0]), GYRATION, dt, 1000)
    assert len(trajectory) == 1001
    for state in trajectory[::50]:
        t = state.t
        assert np.max(np.abs(state.x - [math.sin(t), math.cos(t) - 1, 0])) <= 1e-6
        assert np.max(np.abs(state.v - [math.cos(t), -math.sin(t), 0])) <= 1e-6
    end = trajectory[-1]
    assert end.t == pytest.approx(2 * math.pi)
    assert np.linalg.norm(end.x) <= 1e-6
    assert speed_drift(trajectory) <= 1e-8


def test_constant_force_is_integrated_exactly():
    fields = EMFields.from_strings(E=("1", "-2", "0.5"))
    x0 = np.array([0.1, 0.2, 0.3])
    v0 = np.array([1.0, 0.0, -1.0])
    end = flow_rk4(PhaseState(0.0, x0, v0), fields, 0.1, 20)[-1]
    E = np.array([1.0, -2.0, 0.5])
    assert end.x == pytest.approx(x0 + 2.0 * v0 + 2.0 * E, abs=1e-12)
    assert end.v == pytest.approx(v0 + 2.0 * E, abs=1e-12)


def test_fourth_order_convergence():
    def error(nsteps):
        end = flow_rk4(PhaseState(0.0, [0, 0, 0], [1, 0, 0]), GYRATION, 2.0 / nsteps, nsteps)[-1]
        return np.linalg.norm(end.x - [math.sin(2.0), math.cos(2.0) - 1, 0])

    order = math.log2(error(20) / error(40))
    assert order >= 3.9


def test_blow_up_raises():
    fields = EMFields.from_strings(E=("1/(1-t)", "0", "0"))
    with pytest.raises(IntegrationError) as e:
        flow_rk4(PhaseState(0.0, [0, 0, 0], [0, 0, 0]), fields, 0.5, 4)
    assert e.value.step == 2


def test_flow_arguments():
    with pytest.raises(InvalidArgumentError):
        flow_rk4(PhaseState(0.0, [0, 0, 0], [0, 0, 0]), NO_FIELD, 0.0, 1)
    with pytest.raises(InvalidArgumentError):
        flow_rk4(PhaseState(0.0, [0, 0, 0], [0, 0, 0]), NO_FIELD, 0.1, 0)


def test_trajectory_rows():
    trajectory = flow_rk4(PhaseState(0.0, [1, 2, 3], [0, 0, 0]), NO_FIELD, 0.5, 2)
    header, rows = trajectory_rows(trajectory)
    assert header == TRAJECTORY_HEADER
    assert len(rows) == 3
    assert rows[0] == [0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0]
    assert rows[2][:2] == [2, 1.0]


@pytest.mark.parametrize("fields", [NO_FIELD, GYRATION, EMFields.from_strings(E=("sin(t)", "0", "0"))])
def test_ratio_bound_in_one_dimension(fields):
    report = vlasov_ratio(bump(), fields, 1.0, UNIT)
    assert report.admissible
    assert report.passed
    assert report.ratio <= 2.0 * (1 + 1e-4)
    assert report.bound == 2.0


def test_ratio_bound_with_two_velocity_components():
    testfn = bump("t*(x*(1-x))^2*(vx*(1-vx)*(vy+1)*(1-vy))^2", {"vx": [0, 1], "vy": [-1, 1]})
    report = vlasov_ratio(testfn, GYRATION, 0.5, UNIT, quad_order=4)
    assert report.admissible
    assert report.passed


def test_ratio_bound_in_two_dimensions():
    testfn = VlasovTestFunction.from_string("t*(x*(1-x)*y*(1-y))^2*(1-vx^2)*(1-vy^2)", [[0, 1], [0, 1]],
                                            {"vx": [-1, 1], "vy": [-1, 1]})
    fields = EMFields.from_strings(E=("y", "-x", "0"), B=("0", "0", "2"))
    report = vlasov_ratio(testfn, fields, 1.0, SQUARE, quad_order=3)
    assert report.admissible
    assert report.passed


def test_zero_function_passes_vacuously():
    report = vlasov_ratio(bump("0"), GYRATION, 1.0, UNIT)
    assert report.lhs == 0.0
    assert report.ratio is None
    assert report.passed


def test_ratio_is_scale_invariant():
    base = vlasov_ratio(bump(), GYRATION, 1.0, UNIT)
    scaled = vlasov_ratio(bump("10*" + BUMP), GYRATION, 1.0, UNIT)
    assert scaled.ratio == pytest.approx(base.ratio, rel=1e-10)


def test_inadmissible_function_is_flagged():
    report = vlasov_ratio(bump("t*x*vx"), NO_FIELD, 1.0, UNIT)
    assert not report.admissible
    assert 0.9 < report.support_max <= 1.0


def test_support_must_stay_in_domain():
    testfn = VlasovTestFunction.from_string(BUMP, [[0, 2]], {"vx": [0, 1]})
    with pytest.raises(InvalidArgumentError):
        vlasov_ratio(testfn, NO_FIELD, 1.0, UNIT)
    with pytest.raises(InvalidArgumentError):
        vlasov_ratio(bump(), NO_FIELD, 1.0, SQUARE)
    with pytest.raises(InvalidArgumentError):
        vlasov_ratio(bump(), NO_FIELD, 0.0, UNIT)


def test_test_function_validation():
    with pytest.raises(InvalidArgumentError):
        VlasovTestFunction.from_string(BUMP, [[1, 0]])
    with pytest.raises(InvalidArgumentError):
        VlasovTestFunction(parse(BUMP), ((0, 1),), {"vw": (0, 1)})
    with pytest.raises(InvalidArgumentError):
        vlasov_ratio(VlasovTestFunction.from_string("y*t", [[0, 1]]), NO_FIELD, 1.0, UNIT)


@pytest.mark.parametrize("fields", [NO_FIELD, GYRATION, EMFields.from_strings(E=("sin(t)*x", "0", "0"))])
def test_identity_check(fields):
    report = vlasov_identity_check(bump(), fields, 1.0, UNIT)
    assert report.sign_pass
    assert report.residual <= 1e-6


def test_identity_check_with_outflow():
    testfn = VlasovTestFunction.from_string("t*x*(vx*(1-vx))^2", [[0, 1]], {"vx": [0, 1]})
    report = vlasov_identity_check(testfn, NO_FIELD, 1.0, UNIT)
    assert report.boundary < 0
    assert report.residual <= 1e-6
    assert report.sign_pass


def test_ratio_catalog_keeps_order():
    cases = [VlasovCase("free/bump", bump(), NO_FIELD, 1.0, UNIT),
             VlasovCase("gyration/bump", bump(), GYRATION, 1.0, UNIT),
             VlasovCase("gyration/zero", bump("0"), GYRATION, 1.0, UNIT)]
    reports = ratio_catalog(cases)
    assert [name for name, _ in reports] == ["free/bump", "gyration/bump", "gyration/zero"]
    assert all(report.passed for _, report in reports)
    header, rows = ratio_rows(reports)
    assert header == RATIO_HEADER
    assert rows[2][0] == "gyration/zero"
    assert rows[2][3] is None
