import os
import sys

import numpy as np
import pandas as pd
import streamlit as st

# ---------------------------------------------------------
# Ensure project root is on sys.path so `utils.*` imports work
# ---------------------------------------------------------
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from utils.config import DEFAULT_OUTPUT_DIR
from utils.fetch import load_json, load_processed_csv
from utils.plot import drift_plot, dual_axis_plot, field_profile_plot, single_line_plot


# ---------------------------------------------------------
# Page config
# ---------------------------------------------------------
st.set_page_config(
    page_title="Radial NLS Laboratory",
    layout="wide",
)

st.title("Radial NLS Laboratory on ℍ³")
st.caption(
    "Results of the scenario runs in data/processed: solver diagnostics, dispersive decay, "
    "Morawetz and Sobolev checks, Euclidean scaling limits and profile decompositions."
)


# ---------------------------------------------------------
# Sidebar navigation & global settings
# ---------------------------------------------------------
st.sidebar.header("Settings")

section = st.sidebar.radio(
    "Section",
    [
        "Scenario Verdicts",
        "Simulation",
        "Dispersive Decay",
        "Morawetz",
        "Sobolev & Smoothing",
        "Euclidean Comparison",
        "Profile Decomposition",
    ],
)

out_dir = st.sidebar.text_input("Results directory", str(DEFAULT_OUTPUT_DIR))

st.sidebar.markdown(
    "Run `python run_all_pipelines.py` (or one `--config`) to refresh the results."
)


# ---------------------------------------------------------
# Cached helpers
# ---------------------------------------------------------
@st.cache_data(show_spinner=False)
def get_csv(filename: str, directory: str) -> pd.DataFrame:
    return load_processed_csv(filename, directory)


def get_summary(filename: str, directory: str):
    path = os.path.join(directory, filename)
    if not os.path.exists(path):
        return None
    return load_json(path)


def show_checks(summary: dict):
    """Table of the check verdicts in a scenario summary."""
    rows = []
    for c in summary.get("checks", []):
        rows.append({
            "check": c.get("check"),
            "lhs": c.get("lhs"),
            "rhs": c.get("rhs"),
            "constant": c.get("constant"),
            "pass": "✔" if c.get("pass") else "✖",
        })
    st.dataframe(pd.DataFrame(rows), use_container_width=True)


SUMMARIES = {
    "simulate": "simulate.json",
    "transform-selftest": "transform_selftest.json",
    "dispersive-test": "dispersive_test.json",
    "morawetz-test": "morawetz_test.json",
    "sobolev-test": "sobolev_test.json",
    "euclid-compare": "euclid_compare.json",
    "profile-extract": "profile_extract.json",
    "sweep": "sweep.json",
}


# ---------------------------------------------------------
# 1. Scenario verdicts
# ---------------------------------------------------------
if section == "Scenario Verdicts":
    st.subheader("Scenario Verdicts")
    cols = st.columns(4)
    for i, (scenario, filename) in enumerate(SUMMARIES.items()):
        summary = get_summary(filename, out_dir)
        with cols[i % 4]:
            if summary is None:
                st.metric(scenario, "not run")
            else:
                passed = sum(bool(c.get("pass")) for c in summary["checks"])
                st.metric(scenario, "✔ pass" if summary["pass"] else "✖ fail",
                          f"{passed}/{len(summary['checks'])} checks")

    st.markdown("---")
    chosen = st.selectbox("Details for", list(SUMMARIES))
    summary = get_summary(SUMMARIES[chosen], out_dir)
    if summary is None:
        st.info(f"{SUMMARIES[chosen]} not found yet. Run the {chosen} scenario to enable this view.")
    else:
        show_checks(summary)


# ---------------------------------------------------------
# 2. Simulation diagnostics
# ---------------------------------------------------------
elif section == "Simulation":
    st.subheader("Conserved Quantities")
    try:
        diag = get_csv("simulate_diagnostics.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        st.plotly_chart(drift_plot(diag), use_container_width=True)
        col_left, col_right = st.columns(2)
        with col_left:
            fig = dual_axis_plot(diag, x="t", y1="l6", y2="morawetz_action",
                                 title="L⁶ norm and Morawetz action",
                                 y1_label="‖u‖₆", y2_label="Morawetz action")
            st.plotly_chart(fig, use_container_width=True)
        with col_right:
            fig = single_line_plot(diag, x="t", y="boundary_mass", title="Boundary-mass monitor",
                                   y_label="relative mass in outer 5%")
            st.plotly_chart(fig, use_container_width=True)

    st.markdown("---")
    st.subheader("Radial Profiles")
    try:
        profiles = get_csv("simulate_profiles.csv", out_dir)
    except FileNotFoundError:
        st.info("simulate_profiles.csv not found yet. Run the simulate scenario to enable this section.")
    else:
        times = np.sort(profiles["t"].unique())
        t = st.select_slider("t", options=list(times), value=times[-1])
        r_max = st.slider("r window", 1.0, float(profiles["r"].max()), min(10.0, float(profiles["r"].max())))
        st.plotly_chart(field_profile_plot(profiles[profiles["t"] == t], title=f"u(t={t:.4g})", r_max=r_max),
                        use_container_width=True)


# ---------------------------------------------------------
# 3. Dispersive decay
# ---------------------------------------------------------
elif section == "Dispersive Decay":
    st.subheader("Dispersive Decay of the Linear Flow")
    try:
        decay = get_csv("dispersive_decay.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        col_left, col_right = st.columns(2)
        for col, geometry in zip((col_left, col_right), ("hyperbolic", "euclidean")):
            part = decay[decay["geometry"] == geometry]
            with col:
                if part.empty:
                    st.info(f"No {geometry} rows in dispersive_decay.csv")
                    continue
                fig = single_line_plot(part, x="t", y="norm", title=f"{geometry.title()} ‖e^(itΔ)φ‖", log_axes=True)
                st.plotly_chart(fig, use_container_width=True)
        summary = get_summary("dispersive_test.json", out_dir)
        if summary is not None:
            for geometry, fit in summary.get("fits", {}).items():
                st.markdown(f"**{geometry}**: fitted exponent **{fit['exponent']:.3f}** (bound {fit['bound']:.3f})")


# ---------------------------------------------------------
# 4. Morawetz
# ---------------------------------------------------------
elif section == "Morawetz":
    st.subheader("Morawetz Inequality Corpus")
    try:
        corpus = get_csv("morawetz_corpus.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        st.dataframe(corpus, use_container_width=True)
        st.markdown(f"Ratio spread across the corpus: **{corpus['ratio'].max() / corpus['ratio'].min():.2f}×**")
    summary = get_summary("morawetz_test.json", out_dir)
    if summary is not None:
        st.markdown("---")
        show_checks(summary)


# ---------------------------------------------------------
# 5. Sobolev & smoothing
# ---------------------------------------------------------
elif section == "Sobolev & Smoothing":
    st.subheader("Refined Sobolev Ratios")
    try:
        corpus = get_csv("sobolev_corpus.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        fig = dual_axis_plot(corpus, x="field", y1="ratio", y2="n_star", title="lhs / rhs and maximizing scale",
                             y1_label="ratio", y2_label="N*", x_label="field")
        st.plotly_chart(fig, use_container_width=True)
    summary = get_summary("sobolev_test.json", out_dir)
    if summary is not None:
        smoothing = next((c for c in summary["checks"] if c.get("check") == "local_smoothing"), None)
        if smoothing is not None:
            df = pd.DataFrame({"K": smoothing["K"], "value": smoothing["values"]})
            st.plotly_chart(single_line_plot(df, x="K", y="value", title="Local smoothing vs K",
                                             x_label="K", log_axes=True), use_container_width=True)


# ---------------------------------------------------------
# 6. Euclidean comparison
# ---------------------------------------------------------
elif section == "Euclidean Comparison":
    st.subheader("Scaling Limit")
    try:
        scaling = get_csv("euclid_scaling_limit.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        col_left, col_right = st.columns(2)
        for col, mode in zip((col_left, col_right), ("linear", "nonlinear")):
            part = scaling[scaling["mode"] == mode]
            with col:
                fig = dual_axis_plot(part, x="N", y1="sup_H1_dist", y2="strichartz_dist",
                                     title=f"{mode.title()} flow", y1_label="sup H¹ distance",
                                     y2_label="L²W¹⁶ distance", x_label="N")
                st.plotly_chart(fig, use_container_width=True)

    st.markdown("---")
    st.subheader("Strichartz Extinction")
    try:
        ext = get_csv("euclid_strichartz_extinction.csv", out_dir)
    except FileNotFoundError:
        st.info("euclid_strichartz_extinction.csv not found yet. Run euclid-compare to enable this section.")
    else:
        for N, part in ext.groupby("N"):
            st.plotly_chart(single_line_plot(part, x="T1", y="tail_norm", title=f"Tail norm, N = {N:g}",
                                             x_label="T1", log_axes=True), use_container_width=True)


# ---------------------------------------------------------
# 7. Profile decomposition
# ---------------------------------------------------------
elif section == "Profile Decomposition":
    st.subheader("Energy Decoupling")
    try:
        audit = get_csv("profile_decoupling.csv", out_dir)
    except FileNotFoundError as e:
        st.error(str(e))
    else:
        fig = dual_axis_plot(audit, x="k", y1="residual", y2="cross_h1", title="Decoupling residual",
                             y1_label="relative residual", y2_label="max H¹ cross term", x_label="k")
        st.plotly_chart(fig, use_container_width=True)

    summary = get_summary("profile_extract.json", out_dir)
    if summary is None:
        st.info("profile_extract.json not found yet. Run the profile-extract scenario to enable this section.")
    else:
        dec = summary["decomposition"]
        st.markdown(f"Extracted **{dec['count']}** profile(s); δ sequence: {', '.join(f'{d:.3g}' for d in dec['deltas'])}")
        for j, prof in enumerate(dec["profiles"]):
            try:
                df = get_csv(f"profile_{j:02d}.csv", out_dir)
            except FileNotFoundError:
                continue
            title = f"Profile {j} ({prof['geometry']}, energy {prof['energy']:.4g})"
            st.plotly_chart(field_profile_plot(df, title=title, r_max=10.0), use_container_width=True)
