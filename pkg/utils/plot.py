import numpy as np
import pandas as pd
import plotly.graph_objects as go

MARGIN = dict(l=40, r=40, t=40, b=40)


def _finish(fig: go.Figure, title: str, x_label: str, y_label: str, log_axes: bool = False) -> go.Figure:
    fig.update_layout(title=title, xaxis_title=x_label, yaxis_title=y_label,
                      legend=dict(x=0, y=1), margin=MARGIN, height=400)
    if log_axes:
        fig.update_xaxes(type="log")
        fig.update_yaxes(type="log")
    return fig


# --- 1. Two diagnostics against a shared x (time, N or k), second on its own axis
def dual_axis_plot(df, x, y1, y2=None, title="", y1_label="", y2_label="", x_label="t"):
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=df[x], y=df[y1], name=y1_label or y1, mode="lines+markers",
                             line=dict(color="blue")))
    if y2 and y2 in df.columns:
        fig.add_trace(go.Scatter(x=df[x], y=df[y2], name=y2_label or y2, mode="lines+markers",
                                 yaxis="y2", line=dict(color="red")))
        fig.update_layout(yaxis2=dict(title=y2_label or y2, overlaying="y", side="right"))
    return _finish(fig, title, x_label, y1_label or y1)


# --- 2. One diagnostic; log-log for decay and tail fits
def single_line_plot(df, x, y, title="", y_label="", x_label="t", log_axes=False):
    data = df[df[y] > 0] if log_axes else df
    fig = go.Figure(go.Scatter(x=data[x], y=data[y], name=y, mode="lines+markers", line=dict(color="blue")))
    return _finish(fig, title, x_label, y_label or y, log_axes)


# --- 3. Radial profile |u|, Re u, Im u from a field CSV (columns r, re_u, im_u)
def field_profile_plot(df: pd.DataFrame, title="", r_max=None):
    if r_max is not None:
        df = df[df["r"] <= r_max]
    traces = [
        ("|u|", np.hypot(df["re_u"], df["im_u"]), dict(color="black")),
        ("Re u", df["re_u"], dict(color="blue", dash="dot")),
        ("Im u", df["im_u"], dict(color="red", dash="dot")),
    ]
    fig = go.Figure([go.Scatter(x=df["r"], y=y, name=name, line=line) for name, y, line in traces])
    return _finish(fig, title, "r", "u")


# --- 4. Relative drift of conserved columns against their initial value
def drift_plot(df: pd.DataFrame, columns=("mass", "energy"), title="Relative drift"):
    fig = go.Figure()
    for col in (c for c in columns if c in df.columns):
        ref = df[col].iloc[0]
        drift = (df[col] - ref) / ref if ref else df[col] - ref
        fig.add_trace(go.Scatter(x=df["t"], y=drift, name=col))
    return _finish(fig, title, "t", "relative drift")
