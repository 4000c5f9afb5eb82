"""Self-contained SVG plots: KM curves, trial panels, scatter diagnostics.

No plotting dependency; every figure is assembled from a small panel
primitive. Elements carry stable class names (km-step, censor-tick,
km-median, pt, cutoff-line, ...) so reports and tests can address the
structure instead of pixels.

Series color conventions: complete follow-up black; time/interim/case
censoring red/blue/green; the event subset of a censored dataset orange;
its in-interval censored subset purple.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .bias import signif
from .dataset import SurvivalDataset
from .errors import DomainError, NoEventsError, NonConvergenceError
from .estimate import cox_two_group, km_fit, km_survival_at
from .experiment import ExperimentTable, case_censoring_correlation
from .rocstat import youden_analysis

__all__ = [
    "Panel",
    "compose",
    "km_plot",
    "trial_plot",
    "censor_plot",
    "bias_plot",
    "MECHANISM_COLORS",
]

MECHANISM_COLORS = {"time": "red", "interim": "blue", "case": "green"}

_FONT = 'font-family="sans-serif"'


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _sig3(v: float) -> str:
    return f"{signif(v, 3):g}"


def _ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi] with a 1/2/5 step."""
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        step = mult * mag
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + step * 1e-9:
        out.append(round(t, 10))
        t += step
    return out


class Panel:
    """One plot area with data-space to pixel-space transforms."""

    def __init__(self, xlim: tuple[float, float], ylim: tuple[float, float],
                 width: int = 460, height: int = 360, title: str = "",
                 xlabel: str = "", ylabel: str = "", log_y: bool = False):
        if not (xlim[0] < xlim[1]) or not (ylim[0] < ylim[1]):
            raise DomainError("axis limits must be increasing")
        if log_y and ylim[0] <= 0:
            raise DomainError("log scale needs a positive lower y limit")
        self.xlim = xlim
        self.ylim = ylim
        self.width = width
        self.height = height
        self.log_y = log_y
        self.margin = (44, 56, 14)  # top, left, right/bottom share the last
        self.parts: list[str] = []
        self._draw_frame(title, xlabel, ylabel)

    # transforms ---------------------------------------------------------
    def x(self, v: float) -> float:
        top, left, pad = self.margin
        inner = self.width - left - pad
        frac = (v - self.xlim[0]) / (self.xlim[1] - self.xlim[0])
        return left + min(max(frac, 0.0), 1.0) * inner

    def y(self, v: float) -> float:
        top, left, pad = self.margin
        inner = self.height - top - 36
        lo, hi = self.ylim
        if self.log_y:
            v = max(v, lo)
            frac = (math.log10(v) - math.log10(lo)) / (math.log10(hi) - math.log10(lo))
        else:
            frac = (v - lo) / (hi - lo)
        return top + (1.0 - min(max(frac, 0.0), 1.0)) * inner

    @property
    def _bottom(self) -> float:
        return self.height - 36

    # primitives ---------------------------------------------------------
    def _draw_frame(self, title: str, xlabel: str, ylabel: str):
        top, left, pad = self.margin
        right = self.width - pad
        bottom = self._bottom
        self.parts.append(
            f'<rect class="plot-frame" x="{left}" y="{top}" '
            f'width="{right - left}" height="{bottom - top}" '
            f'fill="white" stroke="black" stroke-width="1"/>')
        for t in _ticks(*self.xlim):
            px = self.x(t)
            self.parts.append(
                f'<line class="axis-tick" x1="{px:.1f}" y1="{bottom}" '
                f'x2="{px:.1f}" y2="{bottom + 4}" stroke="black"/>')
            self.parts.append(
                f'<text class="axis-label" x="{px:.1f}" y="{bottom + 16}" '
                f'text-anchor="middle" font-size="11" {_FONT}>{_fmt(t)}</text>')
        y_ticks = ([0.01, 0.1, 0.25, 0.5, 1.0] if self.log_y
                   else _ticks(*self.ylim))
        for t in y_ticks:
            py = self.y(t)
            self.parts.append(
                f'<line class="axis-tick" x1="{left - 4}" y1="{py:.1f}" '
                f'x2="{left}" y2="{py:.1f}" stroke="black"/>')
            self.parts.append(
                f'<text class="axis-label" x="{left - 7}" y="{py + 4:.1f}" '
                f'text-anchor="end" font-size="11" {_FONT}>{_fmt(t)}</text>')
        if title:
            self.parts.append(
                f'<text class="panel-title" x="{(left + right) / 2:.1f}" y="{top - 24}" '
                f'text-anchor="middle" font-size="13" font-weight="bold" {_FONT}>'
                f'{escape(title)}</text>')
        if xlabel:
            self.parts.append(
                f'<text class="axis-title" x="{(left + right) / 2:.1f}" '
                f'y="{bottom + 31}" text-anchor="middle" font-size="12" {_FONT}>'
                f'{escape(xlabel)}</text>')
        if ylabel:
            cy = (top + bottom) / 2
            self.parts.append(
                f'<text class="axis-title" x="14" y="{cy:.1f}" text-anchor="middle" '
                f'font-size="12" {_FONT} transform="rotate(-90 14 {cy:.1f})">'
                f'{escape(ylabel)}</text>')

    def hline(self, y: float, cls: str = "hline", color: str = "black",
              dotted: bool = False, width: int = 1):
        top, left, pad = self.margin
        dash = ' stroke-dasharray="2,3"' if dotted else ""
        self.parts.append(
            f'<line class="{cls}" x1="{left}" y1="{self.y(y):.1f}" '
            f'x2="{self.width - pad}" y2="{self.y(y):.1f}" '
            f'stroke="{color}" stroke-width="{width}"{dash}/>')

    def vline(self, x: float, cls: str = "vline", color: str = "black",
              dotted: bool = False, width: int = 1, y_top: float | None = None):
        py_top = self.y(y_top) if y_top is not None else self.margin[0]
        dash = ' stroke-dasharray="2,3"' if dotted else ""
        self.parts.append(
            f'<line class="{cls}" x1="{self.x(x):.1f}" y1="{self._bottom}" '
            f'x2="{self.x(x):.1f}" y2="{py_top:.1f}" '
            f'stroke="{color}" stroke-width="{width}"{dash}/>')

    def segment(self, x1, y1, x2, y2, cls: str, color: str, width: int = 1):
        self.parts.append(
            f'<line class="{cls}" x1="{self.x(x1):.1f}" y1="{self.y(y1):.1f}" '
            f'x2="{self.x(x2):.1f}" y2="{self.y(y2):.1f}" '
            f'stroke="{color}" stroke-width="{width}"/>')

    def point(self, x: float, y: float, color: str, filled: bool,
              cls: str = "pt", radius: float = 2.6):
        fill = color if filled else "none"
        self.parts.append(
            f'<circle class="{cls} {"sig" if filled else "open"}" '
            f'cx="{self.x(x):.1f}" cy="{self.y(y):.1f}" r="{radius}" '
            f'fill="{fill}" stroke="{color}"/>')

    def text(self, px: float, py: float, content: str, cls: str = "note",
             size: int = 11, color: str = "black", anchor: str = "start",
             bold: bool = False):
        weight = ' font-weight="bold"' if bold else ""
        self.parts.append(
            f'<text class="{cls}" x="{px:.1f}" y="{py:.1f}" fill="{color}" '
            f'text-anchor="{anchor}" font-size="{size}"{weight} {_FONT}>'
            f'{escape(content)}</text>')

    def km_curve(self, dataset: SurvivalDataset, color: str, width: int = 1,
                 mark_censored: bool = True, median_line: bool = True):
        """One KM step curve with censor ticks and the median drop-line."""
        curve = km_fit(dataset)
        x0, y0 = self.x(0), self.y(1.0)
        path = [f"M {x0:.1f} {y0:.1f}"]
        for t, s in zip(curve.times, curve.survival):
            path.append(f"H {self.x(t):.1f}")
            path.append(f"V {self.y(s):.1f}")
        self.parts.append(
            f'<path class="km-step" d="{" ".join(path)}" fill="none" '
            f'stroke="{color}" stroke-width="{width}"/>')
        if mark_censored:
            for t in np.unique(dataset.censored_times):
                s = km_survival_at(curve, float(t))
                px, py = self.x(float(t)), self.y(s)
                self.parts.append(
                    f'<line class="censor-tick" x1="{px:.1f}" y1="{py - 4:.1f}" '
                    f'x2="{px:.1f}" y2="{py + 4:.1f}" stroke="{color}"/>')
        if median_line and curve.median is not None:
            self.parts.append(
                f'<line class="km-median" x1="{self.x(curve.median):.1f}" '
                f'y1="{self._bottom}" x2="{self.x(curve.median):.1f}" '
                f'y2="{self.y(0.5):.1f}" stroke="{color}" stroke-width="2" '
                f'stroke-dasharray="2,3"/>')

    def legend(self, entries: list[tuple[str, str, bool]], corner: str = "topright"):
        """entries: (label, color, filled marker) triples."""
        top, left, pad = self.margin
        line_h = 15
        if corner.startswith("top"):
            py = top + 14
        else:
            py = self._bottom - 8 - line_h * (len(entries) - 1)
        anchor_right = corner.endswith("right")
        px_text = self.width - pad - 10 if anchor_right else left + 22
        px_mark = px_text - 8 if anchor_right else left + 12
        for label, color, filled in entries:
            if color:
                fill = color if filled else "none"
                self.parts.append(
                    f'<circle class="legend-mark" cx="{px_mark - (len(label) * 6 if anchor_right else 0):.1f}" '
                    f'cy="{py - 4:.1f}" r="3" fill="{fill}" stroke="{color}"/>')
            self.text(px_text, py, label, cls="legend",
                      anchor="end" if anchor_right else "start")
            py += line_h

    def render(self, dx: float = 0, dy: float = 0) -> str:
        body = "\n".join(self.parts)
        return f'<g transform="translate({dx:.1f},{dy:.1f})">\n{body}\n</g>'


def compose(panels: list[Panel], ncol: int = 1) -> str:
    """Lay panels out on a grid and wrap them into one SVG document."""
    if not panels:
        raise DomainError("no panels to compose")
    ncol = max(1, min(ncol, len(panels)))
    nrow = math.ceil(len(panels) / ncol)
    cell_w = max(p.width for p in panels)
    cell_h = max(p.height for p in panels)
    total_w, total_h = ncol * cell_w, nrow * cell_h
    groups = [p.render(dx=(i % ncol) * cell_w, dy=(i // ncol) * cell_h)
              for i, p in enumerate(panels)]
    body = "\n".join(groups)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
            f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">\n'
            f'<rect width="{total_w}" height="{total_h}" fill="white"/>\n'
            f'{body}\n</svg>\n')


def _km_limits(datasets, log_y: bool):
    xmax = max(float(d.times.max()) for d in datasets) * 1.1
    if xmax <= 0:
        xmax = 1.0
    return (0.0, xmax), ((1e-2, 1.0) if log_y else (0.0, 1.0))


_KM_PALETTE = ["black", "red", "blue", "green", "darkorange", "purple",
               "brown", "gray"]


def km_panel(datasets: list[SurvivalDataset], title: str = "",
             log_y: bool = False, colors: list[str] | None = None,
             legend: bool = True) -> Panel:
    if not datasets:
        raise DomainError("no datasets to plot")
    colors = colors or [_KM_PALETTE[i % len(_KM_PALETTE)]
                        for i in range(len(datasets))]
    xlim, ylim = _km_limits(datasets, log_y)
    panel = Panel(xlim, ylim, title=title, xlabel="Time", ylabel="Proportion",
                  log_y=log_y)
    for frac in (0.25, 0.5, 0.75):
        panel.hline(frac, cls="gridline", dotted=True)
    for d, c in zip(datasets, colors):
        panel.km_curve(d, c)
    if legend:
        panel.legend([(d.label or d.name, c, True)
                      for d, c in zip(datasets, colors)])
    return panel


def km_plot(datasets: list[SurvivalDataset], title: str = "",
            log_y: bool = False) -> str:
    """KM curves of one or more datasets in a single panel."""
    return compose([km_panel(datasets, title=title, log_y=log_y)])


def trial_panel(group0: SurvivalDataset, group1: SurvivalDataset,
                color: str = "red", main: str = "",
                log_y: bool = False) -> Panel:
    """Complete vs censored KM curves plus the event and in-interval
    censored subsets, titled with the Cox hazard ratio and p-value."""
    try:
        fit = cox_two_group(group0, group1)
        title = f"{main},    hr: {_sig3(fit.hr)}    p: {_sig3(fit.p_value)}"
    except (NoEventsError, NonConvergenceError):
        title = f"{main},    hr: NA    p: NA"
    xlim, ylim = _km_limits([group0, group1], log_y)
    panel = Panel(xlim, ylim, title=title, xlabel="Time", ylabel="Proportion",
                  log_y=log_y)
    for frac in (0.25, 0.5, 0.75):
        panel.hline(frac, cls="gridline", dotted=True)
    panel.km_curve(group0, "black", width=2)
    panel.km_curve(group1, color)

    events0 = group0.event_times
    if events0.size == 0:
        raise NoEventsError("complete dataset has no events")
    last_event = float(events0.max())
    event_mask = group1.statuses == 1
    if event_mask.any():
        panel.km_curve(group1.subset(event_mask), "darkorange", width=2,
                       median_line=False)
    censored_inside = (group1.statuses == 0) & (group1.times < last_event)
    if censored_inside.any():
        flipped = SurvivalDataset(group1.times[censored_inside],
                                  np.ones(int(censored_inside.sum())),
                                  group1.groups[censored_inside],
                                  name=group1.name)
        panel.km_curve(flipped, "purple", width=2, median_line=False)
    panel.legend([("uncensored dataset", "black", True),
                  ("censored dataset", color, True),
                  ("events", "darkorange", True),
                  ("censored cases", "purple", True)])
    return panel


def trial_plot(group0: SurvivalDataset, group1: SurvivalDataset,
               color: str = "red", main: str = "", log_y: bool = False) -> str:
    return compose([trial_panel(group0, group1, color=color, main=main,
                                log_y=log_y)])


def censor_panel(table: ExperimentTable, title: str = "") -> Panel:
    """hr vs achieved censoring, dots colored by mechanism, filled when
    significant; regression line over the case rows."""
    rows = [r for r in table.rows
            if r.hr is not None and r.p_censored is not None]
    if not rows:
        raise DomainError("no plottable rows (hr and pCensored all absent)")
    panel = Panel((0.0, 1.0), (0.0, 1.2), title=title, xlabel="pCensored",
                  ylabel="hr")
    for r in rows:
        panel.point(r.p_censored, r.hr, MECHANISM_COLORS[r.mechanism],
                    filled=(r.p_value is not None and r.p_value < 0.05))
    panel.hline(1.0, cls="hr-one")
    line = case_censoring_correlation(table)
    panel.segment(0.0, line.intercept, 1.0, line.intercept + line.slope,
                  cls="fit-line", color="black")
    panel.legend([(f"{m} censoring", MECHANISM_COLORS[m], True)
                  for m in ("time", "interim", "case")], corner="bottomleft")
    panel.text(panel.width - panel.margin[2] - 10, panel._bottom - 10,
               f"r = {_sig3(line.r)}", cls="legend corr", anchor="end")
    return panel


def censor_plot(table: ExperimentTable, title: str = "") -> str:
    return compose([censor_panel(table, title=title)])


_INDEX_COLUMNS = {"SQBI": "sqbi", "UMBI": "umbi", "SABI": "sabi"}


def bias_panel(table: ExperimentTable, index: str, title: str = "",
               xlim: tuple[float, float] | None = None) -> Panel:
    """hr vs a bias index with the Youden cutoff and ROC annotations."""
    if index not in _INDEX_COLUMNS:
        raise DomainError(f"index must be one of {sorted(_INDEX_COLUMNS)}")
    field = _INDEX_COLUMNS[index]
    rows = [r for r in table.rows
            if getattr(r, field) is not None and r.hr is not None
            and r.p_value is not None]
    if not rows:
        raise DomainError(f"no rows with {index} and hr")
    scores = [getattr(r, field) for r in rows]
    roc = youden_analysis(scores, [1 if r.p_value < 0.05 else 0 for r in rows])
    if xlim is None:
        xlim = (min(scores), max(scores))
        if xlim[0] == xlim[1]:
            xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
    panel = Panel(xlim, (0.0, 1.6), title=title, xlabel=index, ylabel="hr")
    for r in rows:
        panel.point(getattr(r, field), r.hr, MECHANISM_COLORS[r.mechanism],
                    filled=r.p_value < 0.05)
    panel.hline(1.0, cls="hr-one")
    panel.vline(roc.cutoff, cls="cutoff-line")
    top, left, pad = panel.margin
    panel.text(panel.width - pad - 10, top + 14, "Area under ROC",
               cls="legend", anchor="end")
    panel.text(panel.width - pad - 10, top + 29,
               f"{roc.auc:.3f} ({roc.auc_ci_low:.3f}, {roc.auc_ci_high:.3f})",
               cls="legend auc", anchor="end")
    labels = [("Cutoff", roc.cutoff), ("Sensit", roc.sensitivity),
              ("Specif", roc.specificity), ("posPV", roc.ppv),
              ("negPV", roc.npv)]
    py = panel._bottom - 8 - 15 * (len(labels) - 1)
    for name, value in labels:
        shown = "NA" if isinstance(value, float) and math.isnan(value) else _sig3(value)
        panel.text(left + 12, py, f"{name}: {shown}", cls="legend roc-param")
        py += 15
    return panel


def bias_plot(table: ExperimentTable, index: str, title: str = "",
              xlim: tuple[float, float] | None = None) -> str:
    return compose([bias_panel(table, index, title=title, xlim=xlim)])
