"""Render instances and solutions to SVG files."""

# %%
from pathlib import Path

from dmpo_bench.core import GenParams, TaskKind
from dmpo_bench.generators import generate
from dmpo_bench.render import RenderStyle, default_style, render_svg

out = Path("render_demo")
out.mkdir(exist_ok=True)

# %% TSP uses its coordinates; cut and coloring labels become node colours
for task in (TaskKind.TSP, TaskKind.MAX_CUT, TaskKind.GRAPH_COLORING, TaskKind.MAX_CLIQUE):
    inst = generate(task, GenParams(n=8, density=0.4), seed=4)
    style = default_style(inst, highlight=inst.reference.solution)
    path = out / f"{task.value}.svg"
    path.write_text(render_svg(inst, style))
    print("wrote", path, style.layout)

# %% weights as edge labels
inst = generate(TaskKind.MIN_CUT, GenParams(n=6, density=0.6), seed=1)
(out / "min_cut_weights.svg").write_text(render_svg(inst, RenderStyle(show_weights=True, size=640)))
