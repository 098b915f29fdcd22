"""Graficos SVG autocontenidos de los barridos (sin dependencias de graficacion).

Los elementos forman un arbol (etiqueta, atributos, hijos) que se
serializa a texto; los atributos con guion bajo se escriben con guion.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from ..models.trace import SweepResult

logger = logging.getLogger(__name__)

NS_SVG = "http://www.w3.org/2000/svg"
WIDTH = 640
HEIGHT = 420
MARGIN = (70, 30, 40, 60)  # izquierda, derecha, arriba, abajo
EMPIRICAL_COLOR = "#1f77b4"
BOUND_COLOR = "#d62728"

AttrValue = Union[str, int, float]


def _rounded(value: AttrValue) -> str:
    if isinstance(value, float):
        r = round(value, 3)
        return str(int(r)) if r == int(r) else f"{r:g}"
    return str(value)


@dataclass
class Element:
    tag: str
    attrs: Dict[str, AttrValue] = field(default_factory=dict)
    children: List["Element"] = field(default_factory=list)
    text: str = ""

    def add(self, *children: "Element") -> "Element":
        self.children.extend(children)
        return self

    def svg(self) -> str:
        props = " ".join(f"{key.replace('_', '-')}={quoteattr(_rounded(value))}" for key, value in self.attrs.items())
        head = f"<{self.tag}{' ' + props if props else ''}"
        if not self.children and not self.text:
            return head + " />"
        inner = escape(self.text) + "".join(child.svg() for child in self.children)
        return f"{head}>{inner}</{self.tag}>"


def _points(xs: Sequence[float], ys: Sequence[float]) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


class _Scale:
    """Mapa de datos a pixeles, lineal o logaritmico."""

    def __init__(self, low: float, high: float, start: float, stop: float, log: bool) -> None:
        self.log = log
        if log:
            low, high = math.log10(low), math.log10(high)
        if high <= low:
            low, high = low - 1.0, high + 1.0
        self.low, self.high, self.start, self.stop = low, high, start, stop

    def __call__(self, value: float) -> float:
        v = math.log10(value) if self.log else value
        return self.start + (v - self.low) / (self.high - self.low) * (self.stop - self.start)

    def ticks(self, count: int = 5) -> List[float]:
        if self.log:
            first, last = math.floor(self.low), math.ceil(self.high)
            return [10.0**e for e in range(first, last + 1) if self.low - 1e-9 <= e <= self.high + 1e-9]
        return list(np.linspace(self.low, self.high, count))


def _y_range(values: np.ndarray, log: bool) -> Tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return (0.1, 10.0) if log else (0.0, 1.0)
    if log:
        positive = finite[finite > 0]
        low, high = float(positive.min()), float(positive.max())
        return low / 2.0, high * 2.0
    low, high = float(min(0.0, finite.min())), float(finite.max())
    return low, high * 1.05 if high > 0 else 1.0


class PlotService:
    """Dibuja error empirico (media +/- error estandar) y cota teorica contra el eje del barrido."""

    def __init__(self, width: int = WIDTH, height: int = HEIGHT) -> None:
        self.width = width
        self.height = height

    def sweep_figure(self, result: SweepResult) -> str:
        if not result.points:
            raise ValueError("El barrido no tiene puntos")
        xs = result.sweep_values
        mean = result.mean_errors
        se = np.nan_to_num(result.stderrs)
        bound = result.bounds
        lower, upper = mean - se, mean + se
        series = np.concatenate([lower, upper, bound])
        log_y = bool(np.all(series[np.isfinite(series)] > 0))

        left, right, top, bottom = MARGIN
        x_low, x_high = float(xs.min()), float(xs.max())
        if x_low == x_high:
            x_low, x_high = x_low / 10.0, x_high * 10.0
        sx = _Scale(x_low, x_high, left, self.width - right, log=True)
        y_low, y_high = _y_range(series, log_y)
        sy = _Scale(y_low, y_high, self.height - bottom, top, log=log_y)

        root = Element("svg", {"xmlns": NS_SVG, "width": self.width, "height": self.height,
                               "viewBox": f"0 0 {self.width} {self.height}"})
        root.add(Element("rect", {"x": 0, "y": 0, "width": self.width, "height": self.height, "fill": "white"}))
        root.add(self._axes(result, sx, sy))

        px = [sx(x) for x in xs]
        ok = np.isfinite(mean)
        if np.any(ok):
            band = [sx(x) for x in xs[ok]]
            band_y = [sy(max(v, y_low)) for v in upper[ok]] + [sy(max(v, y_low)) for v in lower[ok]][::-1]
            root.add(Element("polygon", {"points": _points(band + band[::-1], band_y),
                                         "fill": EMPIRICAL_COLOR, "fill_opacity": 0.2, "stroke": "none"}))
            root.add(Element("polyline", {"points": _points(band, [sy(v) for v in mean[ok]]),
                                          "fill": "none", "stroke": EMPIRICAL_COLOR, "stroke_width": 2}))
            for x, v in zip(band, mean[ok]):
                root.add(Element("circle", {"cx": x, "cy": sy(v), "r": 4, "fill": EMPIRICAL_COLOR}))
        finite = np.isfinite(bound)
        if np.any(finite):
            bx = [p for p, keep in zip(px, finite) if keep]
            by = [sy(v) for v in bound[finite]]
            root.add(Element("polyline", {"points": _points(bx, by), "fill": "none",
                                          "stroke": BOUND_COLOR, "stroke_width": 2, "stroke_dasharray": "6,4"}))
            for x, y in zip(bx, by):
                root.add(Element("rect", {"x": x - 4, "y": y - 4, "width": 8, "height": 8, "fill": BOUND_COLOR}))
        root.add(self._legend(result))
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + root.svg() + "\n"

    def _axes(self, result: SweepResult, sx: _Scale, sy: _Scale) -> Element:
        left, right, top, bottom = MARGIN
        x0, x1 = left, self.width - right
        y0, y1 = self.height - bottom, top
        group = Element("g", {"font_family": "sans-serif", "font_size": 12, "fill": "black"})
        group.add(Element("line", {"x1": x0, "y1": y0, "x2": x1, "y2": y0, "stroke": "black"}))
        group.add(Element("line", {"x1": x0, "y1": y0, "x2": x0, "y2": y1, "stroke": "black"}))
        for value in result.sweep_values:
            x = sx(value)
            group.add(Element("line", {"x1": x, "y1": y0, "x2": x, "y2": y0 + 5, "stroke": "black"}))
            group.add(Element("text", {"x": x, "y": y0 + 18, "text_anchor": "middle"}, text=f"{value:g}"))
        for tick in sy.ticks():
            y = sy(tick)
            group.add(Element("line", {"x1": x0 - 5, "y1": y, "x2": x0, "y2": y, "stroke": "black"}))
            group.add(Element("text", {"x": x0 - 8, "y": y + 4, "text_anchor": "end"}, text=f"{tick:.3g}"))
        symbol = "beta" if result.axis == "beta" else "alpha"
        group.add(Element("text", {"x": (x0 + x1) / 2, "y": self.height - 12, "text_anchor": "middle"},
                          text=f"{symbol} (escala log)"))
        group.add(Element("text", {"x": 16, "y": (y0 + y1) / 2, "text_anchor": "middle",
                                   "transform": f"rotate(-90 16 {(y0 + y1) / 2:.2f})"},
                          text="||Q - Q*||_inf"))
        group.add(Element("text", {"x": (x0 + x1) / 2, "y": 20, "text_anchor": "middle", "font_size": 14},
                          text=f"{result.label}: {result.operator} ({result.protocol})"))
        return group

    def _legend(self, result: SweepResult) -> Element:
        x = self.width - MARGIN[1] - 190
        y = MARGIN[2] + 10
        legend = Element("g", {"font_family": "sans-serif", "font_size": 12})
        legend.add(Element("circle", {"cx": x, "cy": y, "r": 4, "fill": EMPIRICAL_COLOR}))
        legend.add(Element("text", {"x": x + 10, "y": y + 4}, text="error medio +/- e.e."))
        legend.add(Element("rect", {"x": x - 4, "y": y + 16, "width": 8, "height": 8, "fill": BOUND_COLOR}))
        legend.add(Element("text", {"x": x + 10, "y": y + 24}, text=f"cota teorica (k={result.points[0].n_steps})"))
        return legend


def emit_plot(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(PlotService().sweep_figure(result), encoding="utf-8")
    logger.info("Grafico guardado en %s", path)
    return path


__all__ = ["Element", "PlotService", "emit_plot"]
