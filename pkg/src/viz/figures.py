"""
Plotly figures for the dashboard.
"""
from collections import defaultdict
from typing import Dict, List, Mapping, Optional, Sequence

import plotly.graph_objects as go

from ..model.types import StreetSegment
from ..score.walkability import score_color
from ..stats.types import BinSummary, CorrelationResult, RegressionResult, StabilityCurve


def street_map_figure(segments: Sequence[StreetSegment], scores: Mapping[str, Optional[float]]) -> go.Figure:
    """Streets drawn in lon/lat, colored red to green by score (grey when unscored)."""
    known = [v for v in scores.values() if v is not None]
    lo, hi = (min(known), max(known)) if known else (0.0, 0.0)

    # one trace per color, segments separated by None gaps
    lines: Dict[str, List[List[Optional[float]]]] = defaultdict(lambda: [[], []])
    for segment in sorted(segments, key=lambda s: s.id):
        color = score_color(scores.get(segment.id), lo, hi)
        xs, ys = lines[color]
        xs.extend([p.lon for p in segment.coordinates] + [None])
        ys.extend([p.lat for p in segment.coordinates] + [None])

    fig = go.Figure()
    for color, (xs, ys) in sorted(lines.items()):
        fig.add_trace(go.Scatter(x=xs, y=ys, mode="lines", line=dict(color=color, width=3),
                                 hoverinfo="skip", showlegend=False))
    fig.update_layout(
        title=f"Street scores ({lo:.2f} red to {hi:.2f} green)" if known else "Street scores",
        xaxis_title="longitude",
        yaxis_title="latitude",
        yaxis=dict(scaleanchor="x"),
        template="plotly_white",
    )
    return fig


def stability_figure(curve: StabilityCurve, knee: Optional[float] = None) -> go.Figure:
    """r against the minimum per-segment data volume, log-scaled, with the stable region shaded."""
    points = [p for p in curve.points if p.r is not None]
    fig = go.Figure(go.Scatter(
        x=[p.threshold for p in points],
        y=[p.r for p in points],
        mode="lines+markers",
        text=[f"n={p.n_segments}" for p in points],
        name="r",
    ))
    if knee is not None and points:
        fig.add_vrect(x0=max(knee, 1e-9), x1=points[-1].threshold, fillcolor="green", opacity=0.12, line_width=0)
    fig.update_layout(
        title=f"r({curve.metric}, {curve.target}) by data volume",
        xaxis=dict(title="minimum volume per segment", type="log"),
        yaxis_title="Pearson r",
        template="plotly_white",
    )
    return fig


def bins_figure(summaries: Sequence[BinSummary], metric: str, target: str) -> go.Figure:
    """Median target per metric bin with 2nd to 98th percentile whiskers."""
    filled = [b for b in summaries if b.count]
    fig = go.Figure(go.Scatter(
        x=[b.label for b in filled],
        y=[b.median for b in filled],
        mode="markers",
        marker=dict(size=12),
        error_y=dict(
            type="data",
            symmetric=False,
            array=[b.p98 - b.median for b in filled],
            arrayminus=[b.median - b.p2 for b in filled],
        ),
        text=[f"n={b.count}" for b in filled],
    ))
    fig.update_layout(title=f"{target} by {metric} bin", yaxis_title=target, template="plotly_white")
    return fig


def regression_figure(result: RegressionResult) -> go.Figure:
    names = list(result.names)
    colors = ["#1a9850" if c else "#999999" for c in result.codes[1:]]
    fig = go.Figure(go.Bar(
        x=names,
        y=[result.coefficients[n] for n in names],
        error_y=dict(type="data", array=result.std_errors[1:]),
        marker_color=colors,
    ))
    fig.update_layout(
        title=f"{result.target} ~ venue categories (adjusted R² {result.adj_r2:.2f}, n={result.n})",
        yaxis_title="coefficient",
        template="plotly_white",
    )
    return fig


def correlation_figure(correlations: Mapping[str, CorrelationResult]) -> go.Figure:
    names = sorted(correlations)
    fig = go.Figure(go.Bar(
        x=[correlations[n].r for n in names],
        y=names,
        orientation="h",
        marker_color=["#1a9850" if correlations[n].r >= 0 else "#d73027" for n in names],
    ))
    fig.update_layout(title="Pearson correlations", xaxis=dict(range=[-1, 1]), template="plotly_white")
    return fig
