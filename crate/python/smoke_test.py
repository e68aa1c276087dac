"""Smoke test for the Python bindings. Run with pytest or as a script."""

import json
import tempfile
from pathlib import Path

import ltl_rhc


def test_translation_round_trip():
    nba = ltl_rhc.translate("[]<> a && []<> b", ["a", "b"])
    assert nba.num_states >= 2 and nba.num_accepting >= 1
    again = ltl_rhc.Automaton.from_json(nba.to_json())
    assert again.num_states == nba.num_states
    assert nba.accepts([], [["a"], ["b"]])
    assert not nba.accepts([], [["a"]])
    assert ltl_rhc.evaluate("[]<> a && []<> b", ["a", "b"], [["a"]], [["a", "b"]])


def test_bad_input_raises_value_error():
    for formula in ["[] (a &&", "[] c"]:
        try:
            ltl_rhc.translate(formula, ["a"])
        except ValueError:
            continue
        raise AssertionError(f"{formula!r} accepted")


def test_product_summary():
    s = ltl_rhc.Scenario("sim61a")
    p = s.product_summary()
    assert (p.num_q, p.num_states) == (100, 2400)
    assert p.f_star > 0 and p.initial_energy < float("inf")


def test_short_mission():
    s = ltl_rhc.Scenario("exp61b")
    s.steps = 30
    s.seed = 3
    m = ltl_rhc.run(s)
    assert m.steps == 30 and m.is_safe()
    assert len(m.path()) == 31
    assert len(m.energy()) == 30
    rows = m.rows()
    assert rows[0]["k"] == 1 and "energy" in rows[0]
    with tempfile.TemporaryDirectory() as d:
        written = m.export(d)
        assert {Path(p).name for p in written} >= {"mission.log", "energy.csv", "render.svg"}
    again = ltl_rhc.run(s)
    assert again.path() == m.path()
    json.dumps(rows)


def test_invalid_setter_rejected():
    s = ltl_rhc.Scenario("exp61b")
    try:
        s.horizon = 0
    except ValueError:
        return
    raise AssertionError("horizon 0 accepted")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"{name} ok")
