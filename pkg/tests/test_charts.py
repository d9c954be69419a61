import pytest

from latentbn.charts import PALETTE, svg_grouped_bars


def test_basic_chart_structure():
    svg = svg_grouped_bars(
        "demo", ["g1", "g2"], ["a", "b"], [[0.2, 0.8], [0.5, 0.1]]
    )
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert svg.count("<rect") >= 4
    assert "demo" in svg and "g1" in svg and "a" in svg
    assert PALETTE[0] in svg and PALETTE[1] in svg


def test_deterministic_output():
    args = ("t", ["x"], ["s1", "s2"], [[0.3, 0.4]])
    assert svg_grouped_bars(*args) == svg_grouped_bars(*args)


def test_escapes_markup_in_labels():
    svg = svg_grouped_bars("a<b & \"c\"", ["<g>"], ["s"], [[1.0]])
    assert "a<b" not in svg
    assert "&lt;b" in svg and "&amp;" in svg and "&lt;g&gt;" in svg


def test_all_zero_values_still_render():
    svg = svg_grouped_bars("z", ["g"], ["s"], [[0.0]])
    assert "<svg" in svg and "</svg>" in svg


def test_shape_validation():
    with pytest.raises(ValueError, match="at least one"):
        svg_grouped_bars("t", [], ["s"], [])
    with pytest.raises(ValueError, match="shaped"):
        svg_grouped_bars("t", ["g"], ["s"], [[0.1, 0.2]])
