import xml.etree.ElementTree as ET

import pytest

from dmpo_bench.core import GenParams, InstanceError, Solution, TaskKind, serialize_instance
from dmpo_bench.generators import generate
from dmpo_bench.render import LABEL_PALETTE, TOUR_STROKE, RenderStyle, render_svg

NS = "{http://www.w3.org/2000/svg}"


def parse(svg):
    return ET.fromstring(svg)


def test_deterministic_bytes():
    inst = generate(TaskKind.MAX_CUT, GenParams(n=7), 1)
    style = RenderStyle(show_weights=True)
    assert render_svg(inst, style) == render_svg(inst, style)


@pytest.mark.parametrize("task", list(TaskKind), ids=lambda t: t.value)
def test_circle_layout_counts(task):
    inst = generate(task, GenParams(n=8, density=0.4, planted=True), 2)
    root = parse(render_svg(inst, RenderStyle(layout="circle")))
    assert len(root.findall(f".//{NS}circle")) == inst.graph.n
    assert len(root.findall(f".//{NS}line")) == inst.graph.m
    labels = [t.text for t in root.find(f"{NS}g[@id='nodes']").findall(f"{NS}text")]
    assert labels == [str(i) for i in range(inst.graph.n)]


def test_two_coloring_overlay_uses_two_fills():
    inst = generate(TaskKind.MAX_CUT, GenParams(n=6), 4)
    sol = inst.reference.solution
    root = parse(render_svg(inst, RenderStyle(highlight=sol)))
    fills = {c.get("fill") for c in root.iter(f"{NS}circle")}
    assert fills == {LABEL_PALETTE[0], LABEL_PALETTE[1]}


def test_tour_overlay_marks_n_edges():
    inst = generate(TaskKind.TSP, GenParams(n=6), 4)
    root = parse(render_svg(inst, RenderStyle(layout="coordinates", highlight=inst.reference.solution)))
    marked = [ln for ln in root.iter(f"{NS}line") if ln.get("stroke") == TOUR_STROKE]
    assert len(marked) == 6


def test_weights_as_labels():
    inst = generate(TaskKind.MIN_CUT, GenParams(n=5, density=0.8), 0)
    root = parse(render_svg(inst, RenderStyle(show_weights=True)))
    texts = [t.text for t in root.find(f"{NS}g[@id='weights']")]
    assert texts == [str(w) for _, _, w in inst.graph.edges]


def test_coordinates_layout_needs_coords():
    inst = generate(TaskKind.VERTEX_COVER, GenParams(n=5), 0)
    with pytest.raises(InstanceError, match="coordinates"):
        render_svg(inst, RenderStyle(layout="coordinates"))
    with pytest.raises(ValueError):
        RenderStyle(layout="spring")


def test_rendering_is_pure():
    inst = generate(TaskKind.TSP, GenParams(n=5), 0)
    before = serialize_instance(inst)
    render_svg(inst, RenderStyle(highlight=Solution.tour([0, 1, 2, 3, 4])))
    assert serialize_instance(inst) == before
