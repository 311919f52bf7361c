import argparse
import sys

import streamlit as st

from src.config import APP_DESCRIPTION, APP_TITLE, RUNS_DIR, configure_logging
from src.harness import COLUMNS
from src.harness.suites import load_benchmarks
from src.taskspace import SKILL_KINDS
from src.utils.helpers import delete_run, list_runs, load_run, plan_benchmark, sample_tasks

configure_logging()

# streamlit passes everything after "--" through to the script
parser = argparse.ArgumentParser()
parser.add_argument("--run-dir", default=None)
cli_args, _ = parser.parse_known_args(sys.argv[1:])

# App config
st.set_page_config(
    page_title=APP_TITLE,
    page_icon="🤖",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.session_state.setdefault("run_dir", cli_args.run_dir)

# Sidebar
with st.sidebar:
    st.title(APP_TITLE)
    st.write(APP_DESCRIPTION)

    st.subheader("📁 Runs")
    result = list_runs()
    runs = result.get("runs", [])
    if not result.get("success"):
        st.error(result.get("message", "Failed to list runs"))
    st.metric("Runs in " + str(RUNS_DIR.name), len(runs))

    paths = [r["path"] for r in runs]
    if st.session_state.run_dir and st.session_state.run_dir not in paths:
        paths.insert(0, st.session_state.run_dir)
    if paths:
        st.session_state.run_dir = st.selectbox("Select run:", paths, index=0)

    if st.session_state.run_dir and st.button("Delete Selected Run"):
        outcome = delete_run(st.session_state.run_dir)
        if outcome.get("success"):
            st.success(outcome["message"])
            st.session_state.run_dir = None
            st.rerun()
        else:
            st.error(outcome.get("message", "Failed to delete run"))

metrics_tab, tasks_tab, planner_tab = st.tabs(["Metrics", "Task Prior", "Planner"])

# Metrics Tab
with metrics_tab:
    st.title("📈 Skill Success")
    if not st.session_state.run_dir:
        st.info("No run selected. Train one with `python run.py train --out <dir>`.")
    else:
        run = load_run(st.session_state.run_dir)
        if not run.get("success"):
            st.error(run.get("message", "Failed to load run"))
        else:
            df = run["metrics"]
            success_cols = [f"success_{k.value}" for k in SKILL_KINDS]
            st.line_chart(df.set_index("iteration")[success_cols])

            col1, col2 = st.columns(2)
            with col1:
                st.subheader("Losses")
                loss_cols = ["value_loss"] + [c for c in COLUMNS if c.startswith("bc_loss_")]
                st.line_chart(df.set_index("iteration")[loss_cols])
            with col2:
                st.subheader("Sampler")
                st.line_chart(df.set_index("iteration")[["mean_knn_distance", "reward_fraction"]])

            summary = run.get("summary", {})
            st.subheader("Summary")
            if summary:
                c1, c2, c3 = st.columns(3)
                c1.metric("Iterations", summary.get("iteration", 0))
                c2.metric("Buffer success rate", f"{summary.get('buffer_success_rate', 0.0):.3f}")
                c3.metric("Wall clock (s)", f"{summary.get('wall_clock_seconds', 0.0):.0f}")
                st.json(summary)
            st.dataframe(df)

# Task Prior Tab
with tasks_tab:
    st.title("🎲 Task Prior Samples")
    col1, col2 = st.columns(2)
    with col1:
        seed = st.number_input("Seed", min_value=0, value=0, step=1)
    with col2:
        count = st.slider("Tasks", min_value=1, max_value=20, value=5)
    if st.button("Sample Tasks"):
        with st.spinner("Sampling..."):
            result = sample_tasks(int(seed), int(count))
        if result.get("success"):
            for n, entry in enumerate(result["tasks"]):
                with st.expander(f"Task {n + 1}: {', '.join(entry['contexts'])}"):
                    if entry.get("infeasible"):
                        st.warning(f"Instantiation failed: {entry['infeasible']}")
                    st.write("Relations after instantiation:")
                    st.code("\n".join(entry["relations"]) or "(none)")
                    st.json(entry["task"])
        else:
            st.error(result.get("message", "Failed to sample tasks"))

# Planner Tab
with planner_tab:
    st.title("🧭 Sequential Benchmarks")
    try:
        names = [b.name for b in load_benchmarks()]
    except Exception as e:
        names = []
        st.error(f"Error loading benchmarks: {e}")
    if names:
        name = st.selectbox("Benchmark family:", names)
        layout_seed = st.number_input("Layout seed", min_value=0, value=0, step=1, key="layout_seed")
        if st.button("Plan and Execute"):
            with st.spinner("Planning..."):
                result = plan_benchmark(name, int(layout_seed))
            if result.get("success"):
                st.write("Goal: " + ", ".join(result["goal"]))
                st.subheader("Initial scene graph")
                st.code("\n".join(result["relations"]))
                st.subheader("Plan")
                st.code("\n".join(result["plan"]) or "Goal already satisfied")
                if result["solved"]:
                    st.success(f"Solved closed-loop in {len(result['executed'])} skills")
                else:
                    st.error(f"Not solved; executed {', '.join(result['executed'])}")
            else:
                st.error(result.get("message", "Planning failed"))

# Footer
st.markdown("---")
st.markdown("Built with Streamlit, NumPy and FAISS", unsafe_allow_html=True)
