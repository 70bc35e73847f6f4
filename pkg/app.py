"""
Streamlit app for running SPROCKET time series classification experiments.
"""
import os
import tempfile
import streamlit as st
import pandas as pd

# Import utility modules with relative imports
import sys
sys.path.append(os.path.dirname(os.path.abspath(__file__)))
from utils.ensemble_analysis import accuracy_table, average_ranks, timing_table
from utils.error_logger import ErrorLogger
from utils.errors import SprocketError
from utils.experiment_runner import ExperimentRunner, parse_algorithm, seeds_for
from utils.results_writer import ResultsWriter, records_frame, read_results
from utils.run_config import DISTANCE_PRESETS, RunConfig, parse_distance_spec
from utils.synthetic_data import make_train_test
from utils.ts_parser import TsParser
from utils.zip_exporter import ZipExporter, bundle_readme

# Set page configuration
st.set_page_config(
    page_title="SPROCKET Experiments",
    page_icon="📈",
    layout="wide",
    initial_sidebar_state="expanded"
)

# Initialize session state
if 'initialized' not in st.session_state:
    st.session_state.initialized = True
    st.session_state.run_complete = False
    st.session_state.records = []
    st.session_state.correctness = []
    st.session_state.errors = []
    st.session_state.config_text = ""
    st.session_state.temp_dir = tempfile.mkdtemp()

error_logger = ErrorLogger()
parser = TsParser()
writer = ResultsWriter()

os.makedirs(st.session_state.temp_dir, exist_ok=True)

st.title("SPROCKET Experiments")
st.markdown("""
Fit random convolutional kernels, keep a few training activations per kernel as
prototypes, and classify series by their elastic distances to those prototypes.
Upload a train/test pair (or use the synthetic sine-burst problem) to evaluate.
""")

# Sidebar: run configuration
st.sidebar.header("Run Configuration")
kernel_count = st.sidebar.number_input("Kernels", min_value=1, max_value=10000, value=512, step=64)
distance_choice = st.sidebar.selectbox(
    "Distance",
    ["msm", "twe", "adtw", "dtw", "erp", "wdtw", "euclidean"] + sorted(DISTANCE_PRESETS),
)
selection = st.sidebar.selectbox("Prototype selection", ["random", "stratified", "kmeanspp"])
proto_base = st.sidebar.number_input("Prototype log base", min_value=1.5, value=4.0, step=0.5)
window_rule = st.sidebar.text_input("Window rule", value="sqrt",
                                    help="sqrt, none or fixed:N")
algorithms_text = st.sidebar.text_input("Algorithms", value="sprocket,rocket,rocket+sprocket",
                                        help="comma-separated, parts joined by +")
seed = st.sidebar.number_input("Seed", min_value=0, value=0, step=1)
repeats = st.sidebar.number_input("Repeats", min_value=1, max_value=10, value=1, step=1)
threads = st.sidebar.number_input("Threads", min_value=1, value=os.cpu_count() or 1, step=1)

evaluate_tab, analyze_tab = st.tabs(["Evaluate", "Analyze results"])

with evaluate_tab:
    st.header("Datasets")
    use_synthetic = st.checkbox("Use the synthetic sine-burst problem", value=False)

    col1, col2 = st.columns(2)
    with col1:
        st.subheader("Training split")
        train_file = st.file_uploader("Upload training data (.ts or .csv)", type=["ts", "csv"],
                                      disabled=use_synthetic)
    with col2:
        st.subheader("Test split")
        test_file = st.file_uploader("Upload test data (.ts or .csv)", type=["ts", "csv"],
                                     disabled=use_synthetic)
    csv_layout = st.radio("CSV label column", ["label_last", "label_first"], horizontal=True)

    ready = use_synthetic or (train_file is not None and test_file is not None)
    if st.button("Run Evaluation", disabled=not ready):
        with st.spinner("Transforming and fitting..."):
            try:
                st.session_state.run_complete = False
                st.session_state.records = []
                st.session_state.correctness = []
                st.session_state.errors = []

                if use_synthetic:
                    train, test = make_train_test(seed=int(seed))
                else:
                    def load(upload):
                        if upload.name.lower().endswith(".csv"):
                            return parser.parse_csv(upload, csv_layout)
                        return parser.parse_ts(upload)
                    train, test = load(train_file), load(test_file)

                config = RunConfig(
                    kernel_count=int(kernel_count),
                    distance_spec=parse_distance_spec(distance_choice, int(kernel_count)),
                    selection=selection,
                    prototype_log_base=float(proto_base),
                    window_rule=window_rule,
                    seed=int(seed),
                    thread_count=int(threads),
                )
                algorithms = [a.strip() for a in algorithms_text.split(",") if a.strip()]
                for algorithm in algorithms:
                    parse_algorithm(algorithm)

                st.info(f"{train.name}: {train.n} training and {test.n} test series, "
                        f"{train.channels} channel(s), length {train.length}, "
                        f"{train.class_count} classes")

                runner = ExperimentRunner(config, error_logger, emit_correctness=True)
                output = runner.run_dataset(train, test, algorithms,
                                            seeds_for(int(seed), int(repeats)))

                st.session_state.records = output.records
                st.session_state.correctness = output.correctness
                st.session_state.config_text = config.to_toml()
                st.session_state.run_complete = True
                st.success("Evaluation complete!")

            except SprocketError as e:
                st.session_state.errors.append(error_logger.log_error(
                    "evaluation", str(e), {"exception": e}))
                st.error(f"Error during evaluation: {str(e)}")
            except Exception as e:
                st.session_state.errors.append(error_logger.log_error(
                    "evaluation", f"Unexpected error: {str(e)}", {"exception": e}))
                st.error(f"Error during evaluation: {str(e)}")

    if st.session_state.run_complete:
        st.header("Results")
        frame = records_frame(st.session_state.records)
        st.dataframe(frame)

        st.subheader("Download Results")
        csv_path = os.path.join(st.session_state.temp_dir, "results.csv")
        json_path = os.path.join(st.session_state.temp_dir, "results.json")
        writer.write_results(st.session_state.records, csv_path, "csv")
        writer.write_results(st.session_state.records, json_path, "json")
        correctness_path = os.path.join(st.session_state.temp_dir, "results.correctness.csv")
        writer.write_correctness(st.session_state.correctness, correctness_path)

        with open(csv_path) as f:
            csv_text = f.read()
        with open(json_path) as f:
            json_text = f.read()
        with open(correctness_path) as f:
            correctness_text = f.read()

        col1, col2, col3 = st.columns(3)
        with col1:
            st.download_button(label="Download CSV", data=csv_text,
                               file_name="results.csv", mime="text/csv")
        with col2:
            st.download_button(label="Download JSON", data=json_text,
                               file_name="results.json", mime="application/json")
        with col3:
            bundle = ZipExporter().bundle_bytes(
                {
                    "results.csv": csv_text,
                    "results.json": json_text,
                    "results.config.toml": st.session_state.config_text,
                    "results.correctness.csv": correctness_text,
                },
                bundle_readme(st.session_state.config_text, len(st.session_state.records)),
            )
            st.download_button(label="Download All Files (ZIP)", data=bundle,
                               file_name="sprocket_results.zip", mime="application/zip")

with analyze_tab:
    st.header("Rank and Timing Tables")
    results_file = st.file_uploader("Upload a results file (.csv or .json)", type=["csv", "json"])
    if results_file is not None:
        try:
            path = os.path.join(st.session_state.temp_dir, results_file.name)
            with open(path, "wb") as f:
                f.write(results_file.getbuffer())
            results = records_frame(read_results(path))
            table = accuracy_table(results)

            st.subheader("Accuracy")
            st.dataframe(table)
            if table.shape[0] >= 2:
                st.subheader("Average ranks")
                st.dataframe(average_ranks(table))
            else:
                st.warning("Ranks need at least two algorithms.")
            st.subheader("Wall-clock seconds (transform + fit + predict)")
            st.dataframe(timing_table(results))
        except Exception as e:
            st.session_state.errors.append(error_logger.log_error(
                "analysis", str(e), {"exception": e}))
            st.error(f"Error reading results: {str(e)}")

# Error log section
if st.session_state.errors:
    st.header("Error Log")
    for i, error in enumerate(st.session_state.errors, 1):
        with st.expander(f"Error {i}: {error.get('message', 'Unknown error')}"):
            st.write(f"**Type:** {error.get('type', 'unknown')}")
            st.write(f"**Timestamp:** {error.get('timestamp', '')}")

            context = error.get('context', {})
            if context:
                st.subheader("Context")
                for key, value in context.items():
                    if key != 'traceback' and key != 'exception':
                        st.write(f"**{key}:** {value}")

                if 'traceback' in context:
                    with st.expander("Show Traceback"):
                        st.code(context['traceback'])

# Help section
with st.sidebar.expander("Help & Information"):
    st.markdown("""
    ### How to Use This App

    1. **Datasets**: upload UCR/UEA `.ts` train and test files (or univariate CSV),
       or tick the synthetic problem.
    2. **Configure**: pick the kernel count, distance (or a named distance
       ensemble), prototype selection and window rule in the sidebar.
    3. **Evaluate**: every algorithm in the list is fit on train and scored on test.
    4. **Download**: results as CSV/JSON, or a ZIP with the resolved configuration
       and the per-instance correctness sidecar.

    ### Algorithms

    - `sprocket`: prototype distances with the sidebar distance
    - `sprocket-<measure>` / `sprocket-<preset>`: a fixed distance or ensemble
    - `rocket`: PPV and max pooling baseline
    - `a+b`: concatenated features under one ridge classifier
    - `<algorithm>@K`: override the kernel count

    ### Limitations

    - Equal-length series only; missing values are rejected
    - Elastic distances are slow on long series: start with a few hundred kernels
    """)

# Footer
st.markdown("---")
st.markdown("SPROCKET Experiments | random kernels, prototype distances, ridge classifier")
