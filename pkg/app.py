import os
import sys
import tempfile

import pandas as pd
import streamlit as st

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config.settings import load_settings
from src.core.errors import ScoringFlowError
from src.core.progress import ProgressTracker
from src.pipeline.orchestrator import ScoringOrchestrator
from src.pipeline.reports import bins_frame, report_document
from src.pipeline.synth import SynthSpec, synth_city
from src.viz.figures import (
    bins_figure,
    correlation_figure,
    regression_figure,
    stability_figure,
    street_map_figure,
)

# Page configuration
st.set_page_config(
    page_title="StreetScore",
    page_icon="🚶",
    layout="wide",
    initial_sidebar_state="expanded"
)

if "initialized" not in st.session_state:
    st.session_state.initialized = True
    st.session_state.state = None
    st.session_state.tracker = None
    st.session_state.workdir = tempfile.mkdtemp(prefix="streetscore_")


def save_upload(upload, name: str) -> str:
    path = os.path.join(st.session_state.workdir, name)
    with open(path, "wb") as f:
        f.write(upload.getvalue())
    return path


def render_inputs() -> dict:
    """Sidebar: input source and the main run parameters."""
    st.sidebar.header("Inputs")
    source = st.sidebar.radio("Source", ["Synthetic city", "Upload files"])
    paths = {}
    if source == "Synthetic city":
        n_segments = st.sidebar.number_input("Segments", min_value=10, max_value=5000, value=300, step=50)
        rho_night = st.sidebar.slider("Planted r(photo@night, safety)", -0.95, 0.95, 0.6)
        seed = st.sidebar.number_input("Seed", min_value=0, value=0)
        if st.sidebar.button("Generate"):
            city = synth_city(SynthSpec(n_segments=int(n_segments), rho_night=rho_night, seed=int(seed)))
            written = city.write(st.session_state.workdir)
            st.session_state.paths = {k: str(v) for k, v in written.items()}
        paths = st.session_state.get("paths", {})
    else:
        streets = st.sidebar.file_uploader("Streets (GeoJSON)", type=["geojson", "json"])
        photos = st.sidebar.file_uploader("Photos (JSON Lines)", type=["jsonl", "json"])
        venues = st.sidebar.file_uploader("Venues (JSON Lines)", type=["jsonl", "json"])
        if streets:
            paths["streets"] = save_upload(streets, "streets.geojson")
        if photos:
            paths["photos"] = save_upload(photos, "photos.jsonl")
        if venues:
            paths["venues"] = save_upload(venues, "venues.jsonl")

    st.sidebar.header("Parameters")
    return {
        "streets_path": paths.get("streets"),
        "photos_path": paths.get("photos"),
        "venues_path": paths.get("venues"),
        "output_dir": os.path.join(st.session_state.workdir, "output"),
        "buffer_radius": st.sidebar.number_input("Buffer radius (m)", min_value=1.0, value=22.5),
        "night_confidence": st.sidebar.slider("Night confidence", 0.5, 1.0, 0.95),
    }


def run_pipeline(overrides: dict) -> None:
    try:
        config = load_settings(overrides=overrides, use_env=False)
        tracker = ProgressTracker()
        with st.spinner("Scoring streets..."):
            orchestrator = ScoringOrchestrator(config, tracker)
            state = orchestrator.run("run")
            orchestrator.write(state, "run")
        st.session_state.state = state
        st.session_state.tracker = tracker
        st.session_state.config = config
    except ScoringFlowError as e:
        st.error(f"{e.step or 'run'}: {e.message}")


def render_results() -> None:
    state = st.session_state.state
    report = report_document(state)
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("Segments", report["inputs"]["segments"])
    col2.metric("Photos", report["inputs"]["photos"])
    col3.metric("Matched photos", report["join"]["matched_photos"])
    col4.metric("Venues", report["inputs"]["venues"])

    tab_map, tab_corr, tab_curves, tab_bins, tab_regress, tab_run = st.tabs(
        ["Map", "Correlations", "Stability", "Bins", "Regressions", "Run"]
    )
    with tab_map:
        st.plotly_chart(street_map_figure(state["segments"], state["scores"]), use_container_width=True)
    with tab_corr:
        if state["correlations"]:
            st.plotly_chart(correlation_figure(state["correlations"]), use_container_width=True)
        for item, reason in sorted(state.get("unavailable", {}).items()):
            st.warning(f"{item}: {reason}")
    with tab_curves:
        for metric, curve in sorted(state["curves"].items()):
            st.plotly_chart(stability_figure(curve, state["knees"].get(metric)), use_container_width=True)
    with tab_bins:
        for metric, summaries in sorted(state["bins"].items()):
            target = "walkability" if metric == "zwalkability" else "safety"
            st.plotly_chart(bins_figure(summaries, metric, target), use_container_width=True)
            st.dataframe(bins_frame(summaries))
    with tab_regress:
        for target, result in sorted(state["regressions"].items()):
            st.plotly_chart(regression_figure(result), use_container_width=True)
            st.dataframe(pd.DataFrame(result.to_dict()["terms"]))
    with tab_run:
        tracker = st.session_state.tracker
        st.dataframe(pd.DataFrame([
            {"stage": step, "seconds": round(info["duration"], 3), **{k: str(v) for k, v in info["details"].items()}}
            for step, info in tracker.summary().items()
        ]))
        st.caption(f"Outputs written to {st.session_state.config.output_dir}")


def main():
    st.title("StreetScore")
    st.caption("Street safety and walkability signals from geotagged photos and venues")
    overrides = render_inputs()
    if st.button("Run pipeline", disabled=not overrides["streets_path"]):
        run_pipeline(overrides)
    if st.session_state.state is not None:
        render_results()


if __name__ == "__main__":
    main()
