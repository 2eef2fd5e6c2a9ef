"""Actuation presets and the preferred-field expression language."""

import math

import numpy as np
import pytest

from rodfem.errors import ConfigError
from rodfem.materials import IsotropicDrag, ResistiveForceDrag
from rodfem.scenarios import (
    builtin_scenario,
    compile_expr,
    evaluate_field,
)


def test_relaxation_preset_fields():
    scn = builtin_scenario("relaxation")
    u = np.linspace(0.0, 1.0, 7)
    np.testing.assert_allclose(
        evaluate_field(scn.kappa1_pref, u, 3.0), 2.0 * np.sin(1.5 * np.pi * u))
    np.testing.assert_allclose(
        evaluate_field(scn.kappa2_pref, u, 3.0), 3.0 * np.cos(1.5 * np.pi * u))
    np.testing.assert_allclose(
        evaluate_field(scn.twist_pref, u, 3.0), 5.0 * np.cos(2.0 * np.pi * u))
    assert scn.spin_up == 0.0
    assert scn.t_final == 25.0
    assert isinstance(scn.drag, IsotropicDrag)
    np.testing.assert_allclose(scn.drag.matrix, np.eye(3))
    np.testing.assert_allclose(scn.material.bend_stiffness_at(u), 1.0)


def test_swimmer_preset_traveling_wave():
    scn = builtin_scenario("worm2d")
    # hand evaluation of the modulated traveling wave at two points
    for u, t in ((0.25, 0.0), (0.5, 1.5)):
        expected = (10.0 * u + 8.0 * (1.0 - u)) * math.sin(
            2.0 * math.pi * u / 0.65 - 0.6 * math.pi * t)
        got = evaluate_field(scn.kappa1_pref, np.array([u]), t)[0]
        assert got == pytest.approx(expected, rel=1e-14)
    np.testing.assert_allclose(
        evaluate_field(scn.kappa2_pref, np.linspace(0, 1, 5), 2.0), 0.0)
    np.testing.assert_allclose(
        evaluate_field(scn.twist_pref, np.linspace(0, 1, 5), 2.0), 0.0)
    assert scn.spin_up == 5.0
    assert isinstance(scn.drag, ResistiveForceDrag) and scn.drag.k == 40.0


def test_spatial_swimmer_adds_a_plane_breaking_window():
    scn = builtin_scenario("worm3d")
    u = np.array([0.0, 1.0 / 3.0, 0.34, 1.0])
    np.testing.assert_allclose(
        evaluate_field(scn.kappa2_pref, u, 0.7), [6.0, 6.0, 0.0, 0.0])
    # the in-plane wave is shared with the planar swimmer
    planar = builtin_scenario("worm2d")
    uu = np.linspace(0.0, 1.0, 9)
    np.testing.assert_allclose(
        evaluate_field(scn.kappa1_pref, uu, 1.2),
        evaluate_field(planar.kappa1_pref, uu, 1.2))


def test_swimmer_presets_taper_with_epsilon():
    scn = builtin_scenario("worm2d", eps=0.1)
    u = np.array([0.0, 0.5])
    expected = 8.0 * ((0.1 + u) * (0.1 + 1.0 - u)) ** 1.5 / 1.2**3
    np.testing.assert_allclose(scn.material.bend_stiffness_at(u), expected)
    np.testing.assert_allclose(scn.material.twist_stiffness_at(u), expected)
    np.testing.assert_allclose(scn.material.bend_viscosity_at(u), 0.0)
    assert scn.material.rotary_drag == 1.0


def test_unknown_preset_is_rejected():
    with pytest.raises(ConfigError):
        builtin_scenario("squid")


# --- expression language ----------------------------------------------------


def test_expression_matches_manual_evaluation():
    f = compile_expr("2*sin(3*pi*u/2) + t*u**2")
    u = np.linspace(0.0, 1.0, 6)
    np.testing.assert_allclose(
        f(u, 2.0), 2.0 * np.sin(1.5 * np.pi * u) + 2.0 * u**2)


def test_expression_operators():
    u = np.array([0.25])
    assert compile_expr("-u + 3")(u, 0.0)[0] == pytest.approx(2.75)
    assert compile_expr("8/(u+0.75)")(u, 0.0)[0] == pytest.approx(8.0)
    assert compile_expr("2**u**2")(u, 0.0)[0] == pytest.approx(2.0 ** 0.0625)
    assert compile_expr("abs(0-u)")(u, 0.0)[0] == pytest.approx(0.25)
    assert compile_expr("exp(u)*cos(0)")(u, 0.0)[0] == pytest.approx(
        math.exp(0.25))


def test_window_function_is_closed_at_both_ends():
    f = compile_expr("step(u, 0.25, 0.5)")
    u = np.array([0.2, 0.25, 0.4, 0.5, 0.51])
    np.testing.assert_allclose(f(u, 0.0), [0.0, 1.0, 1.0, 1.0, 0.0])


def test_constant_expressions_broadcast():
    f = compile_expr("1.5")
    u = np.linspace(0, 1, 4)
    out = evaluate_field(f, u, 0.0)
    assert out.shape == u.shape
    np.testing.assert_allclose(out, 1.5)


@pytest.mark.parametrize("src", [
    "2*",             # dangling operator
    "sin(u",          # unbalanced parenthesis
    "foo(u)",         # unknown function
    "u $ t",          # stray character
    "step(u, 1)",     # wrong arity
    "q + 1",          # unknown name
    "u 2",            # trailing input
])
def test_malformed_expressions_raise(src):
    with pytest.raises(ConfigError):
        compile_expr(src)
