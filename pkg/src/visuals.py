"""
Visualisation utilities for rating reports
Table-1 style distribution chart and whip/braid rating comparison
"""
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from src.utils import get_level_color

OBSERVED_COLOR = '#0033A0'
REFERENCE_COLOR = '#E31837'

COMMON_LAYOUT = dict(
    paper_bgcolor='white',
    plot_bgcolor='white',
    font=dict(color='#333333', family="Inter, sans-serif"),
    margin=dict(t=60, l=40, r=40, b=40),
)


# ── Table 1 distribution ─────────────────────────────────────────────────────

def create_table1_chart(report, reference=None, height=450):
    """
    Newly solved fraction per level (bars) and cumulative fraction (lines).
    ``reference`` is an optional second BatchReport drawn alongside.
    """
    fig = make_subplots(specs=[[{"secondary_y": True}]])
    total = report.total or 1
    fig.add_trace(go.Bar(
        x=report.labels,
        y=[n / total for n in report.newly],
        name="newly solved",
        marker=dict(color=[get_level_color(level) for level in range(len(report.newly))]),
        text=report.newly,
        hovertemplate="%{x}: %{text} puzzles<extra></extra>",
    ), secondary_y=False)
    fig.add_trace(go.Scatter(
        x=report.labels,
        y=report.fractions(),
        name="cumulative",
        mode='lines+markers',
        line=dict(color=OBSERVED_COLOR, width=3),
    ), secondary_y=True)

    if reference is not None:
        levels = min(len(reference.labels), len(report.labels))
        fig.add_trace(go.Scatter(
            x=report.labels[:levels],
            y=reference.fractions()[:levels],
            name="reference cumulative",
            mode='lines+markers',
            line=dict(color=REFERENCE_COLOR, width=2, dash='dash'),
        ), secondary_y=True)

    fig.update_yaxes(title_text="fraction newly solved", range=[0, 1], secondary_y=False)
    fig.update_yaxes(title_text="fraction solved (cumulative)", range=[0, 1.02], secondary_y=True)
    fig.update_layout(
        title=dict(text=f"Puzzles solved per {report.ladder} level ({report.total} puzzles, "
                        f"{report.unsolved} unsolved)", font=dict(color=OBSERVED_COLOR)),
        barmode='group',
        height=height,
        legend=dict(font=dict(color='#333333')),
        **COMMON_LAYOUT,
    )
    return fig


# ── Ladder comparison ────────────────────────────────────────────────────────

def create_rating_scatter(ratings_df, cap, height=450):
    """Whip rating against braid rating; points above the diagonal never occur."""
    df = ratings_df[ratings_df["status"] == "ok"]
    above = cap + 1
    whip = df["whip_rating"].astype("float").fillna(above)
    braid = df["braid_rating"].astype("float").fillna(above)
    counts = (
        df.assign(whip=whip, braid=braid)
        .groupby(["whip", "braid"]).size().reset_index(name="puzzles")
    )
    fig = go.Figure()
    fig.add_shape(type="line", x0=0, y0=0, x1=above, y1=above,
                  line=dict(color='rgba(0,0,0,0.3)', dash='dot'))
    fig.add_trace(go.Scatter(
        x=counts["whip"].tolist(),
        y=counts["braid"].tolist(),
        mode='markers',
        marker=dict(size=[8 + 4 * n ** 0.5 for n in counts["puzzles"]],
                    color=[get_level_color(b if b <= cap else None) for b in counts["braid"]],
                    line=dict(width=1, color='white')),
        text=counts["puzzles"].tolist(),
        hovertemplate="whip %{x} / braid %{y}: %{text} puzzles<extra></extra>",
        showlegend=False,
    ))
    ticks = list(range(above + 1))
    labels = ["BRT"] + [str(n) for n in range(1, above)] + [f">{cap}"]
    fig.update_layout(
        xaxis=dict(title="whip rating", tickvals=ticks, ticktext=labels),
        yaxis=dict(title="braid rating", tickvals=ticks, ticktext=labels),
        title=dict(text="Whip vs braid ratings", font=dict(color=OBSERVED_COLOR)),
        height=height,
        **COMMON_LAYOUT,
    )
    return fig


def write_html(fig, path):
    fig.write_html(str(path), include_plotlyjs="cdn")
