"""Figure data and rendering for two-state problems.

Three panels: the indirect utility as a step function, the set of
additional-learning-proof beliefs, and the concave envelope over that set.
Rendering goes through matplotlib's SVG backend with a fixed hash salt and
no date stamp, so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import matplotlib
from matplotlib.figure import Figure

from alpgame.equilibrium import BinaryRegion, StepFunction, alp_region_binary, step_function
from alpgame.model import PersuasionProblem
from alpgame.rational import format_rational
from alpgame.solver import enumerate_candidates, solve

GREY = "#808080"
LIGHT = "#c8c8c8"
RED = "#c0392b"

RC = {
    "svg.hashsalt": "alpgame",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "path.simplify": False,
}


def upper_hull(points: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the least concave majorant of a finite point set, left to right."""
    top: dict[Fraction, Fraction] = {}
    for x, y in points:
        if x not in top or y > top[x]:
            top[x] = y
    hull: list[tuple[Fraction, Fraction]] = []
    for p in sorted(top.items()):
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


@dataclass(frozen=True)
class FigureData:
    states: tuple[str, ...]
    steps: StepFunction
    region: BinaryRegion
    envelope: tuple[tuple[Fraction, Fraction], ...]
    prior: Fraction
    value: Fraction

    def closedness(self) -> list[dict[str, bool]]:
        """Which side of each breakpoint the point value belongs to."""
        out = []
        xs, pts, segs = self.steps.breakpoints, self.steps.points, self.steps.segments
        for i in range(len(xs)):
            left = i > 0 and pts[i] == segs[i - 1]
            right = i < len(segs) and pts[i] == segs[i]
            out.append({"left_closed": left, "right_closed": right})
        return out

    def envelope_at(self, x: Fraction) -> Fraction:
        env = self.envelope
        for (x0, y0), (x1, y1) in zip(env, env[1:]):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        if len(env) == 1 and env[0][0] == x:
            return env[0][1]
        raise ValueError(f"{x} lies outside the envelope's domain")

    def to_json(self) -> dict[str, Any]:
        f = format_rational
        return {
            "states": list(self.states),
            "axis": f"Pr({self.states[1]})",
            "steps": {
                "breakpoints": [f(x) for x in self.steps.breakpoints],
                "segment_values": [f(v) for v in self.steps.segments],
                "point_values": [f(v) for v in self.steps.points],
                "closedness": self.closedness(),
            },
            "alp_region": self.region.to_json(),
            "envelope": [[f(x), f(y)] for x, y in self.envelope],
            "prior_marker": [f(self.prior), f(self.value)],
        }


def figure_data(problem: PersuasionProblem) -> FigureData:
    steps = step_function(problem)
    region = alp_region_binary(problem)
    pts = [(c.belief[1], c.value) for c in enumerate_candidates(problem)]
    result = solve(problem)
    return FigureData(
        tuple(problem.states),
        steps,
        region,
        tuple(upper_hull(pts)),
        problem.prior[1],
        result.value,
    )


def _draw_steps(ax, steps: StepFunction, color: str) -> None:
    xs, pts, segs = steps.breakpoints, steps.points, steps.segments
    for i, v in enumerate(segs):
        ax.plot([float(xs[i]), float(xs[i + 1])], [float(v), float(v)], color=color, lw=2, solid_capstyle="butt")
    for i, x in enumerate(xs):
        ends = set()
        if i > 0:
            ends.add(segs[i - 1])
        if i < len(segs):
            ends.add(segs[i])
        for v in sorted(ends):
            if v != pts[i]:
                ax.plot([float(x)], [float(v)], "o", ms=4, mfc="white", mec=color)
        ax.plot([float(x)], [float(pts[i])], "o", ms=4, color=color)


def _frame(ax, data: FigureData, title: str) -> None:
    ticks = sorted(set(data.steps.breakpoints))
    ax.set_xticks([float(t) for t in ticks], [str(t) for t in ticks])
    yvals = sorted(set(data.steps.points) | set(data.steps.segments))
    ax.set_yticks([float(v) for v in yvals], [str(v) for v in yvals])
    top = float(max(yvals)) if yvals else 1.0
    low = float(min(yvals)) if yvals else 0.0
    pad = 0.15 * (top - low) if top > low else 0.5
    ax.set_xlim(-0.02, 1.05)
    ax.set_ylim(low - pad, top + pad)
    ax.set_xlabel(f"Pr({data.states[1]})")
    ax.set_title(title, fontsize=9, loc="left")


def render(data: FigureData, path: str | Path) -> Path:
    """Write the three-panel SVG to ``path`` and return it."""
    path = Path(path)
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(10, 3.2))
        axes = fig.subplots(1, 3)
        a, b, c = axes

        _draw_steps(a, data.steps, GREY)
        _frame(a, data, "Panel A. Indirect utility")

        _draw_steps(b, data.steps, LIGHT)
        base = b.get_ylim()[0]
        for piece in data.region.pieces:
            if piece.is_point:
                b.plot([float(piece.lo)], [base], "o", ms=6, color=RED, clip_on=False)
            else:
                b.plot([float(piece.lo), float(piece.hi)], [base, base], color=RED, lw=5, clip_on=False)
        _frame(b, data, "Panel B. ALP beliefs")

        _draw_steps(c, data.steps, LIGHT)
        ex = [float(x) for x, _ in data.envelope]
        ey = [float(y) for _, y in data.envelope]
        c.plot(ex, ey, "--", color=RED, lw=1.5)
        c.plot([float(data.prior)], [float(data.value)], "s", ms=5, color="black")
        c.axvline(float(data.prior), color="black", lw=0.5, ls=":")
        _frame(c, data, "Panel C. Concavification")

        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_figure(problem: PersuasionProblem, path: str | Path) -> tuple[FigureData, Path, Path]:
    """Render the SVG and write the figure data next to it as JSON."""
    data = figure_data(problem)
    svg = render(data, path)
    js = svg.with_suffix(".json")
    js.write_text(json.dumps(data.to_json(), indent=2, ensure_ascii=False) + "\n")
    return data, svg, js
