# app.py
# Playground for the capture separation calculus: check, run, trace and explore programs
import streamlit as st
import pandas as pd
import logging
import os
from typing import Dict, List

from csc.config import DEFAULTS, corpus_dir
from csc.errors import CscError, LexError, ParseError, TypeCheckError
from csc.metacheck import explore
from csc.runtime import Configuration, run, schedule_from_spec, Scripted, parse_script
from csc.storetyping import typecheck_program
from csc.surface import SourceProgram, parse_program, pretty
from utils.corpus_runner import CorpusRunner, corpus_files, read_expectations
from utils.logger import setup_logging
from utils.report import render_trace, verdict_table

# Setup logging
logger = setup_logging(__name__, log_level=logging.INFO)

SCHEDULES = ["left-first", "right-first", "random", "scripted"]


def main():
    """Main application entry point"""
    logger.info("Starting playground")

    st.set_page_config(
        page_title="Capture Separation Playground",
        layout="wide",
        initial_sidebar_state="expanded"
    )

    initialize_session_state()

    st.title("🧮 Capture Separation Playground")
    st.caption("Typecheck programs, run them under any schedule and explore every interleaving")

    config = sidebar_config()

    tab1, tab2 = st.tabs(["📝 Program", "📊 Corpus"])

    with tab1:
        handle_program(config)

    with tab2:
        handle_corpus(config)

    logger.info("Application fully rendered")


def initialize_session_state():
    """Initialize all session state variables"""
    defaults = {
        'source': '',
        'last_result': None,
        'corpus_results': None,
    }

    for key, default_value in defaults.items():
        if key not in st.session_state:
            st.session_state[key] = default_value
            logger.info(f"Initialized {key} session state")


def sidebar_config() -> Dict:
    """Schedule and budget settings"""
    st.sidebar.header("⚙️ Settings")
    schedule = st.sidebar.selectbox("Schedule", SCHEDULES, index=0)
    seed = st.sidebar.number_input("Random seed", min_value=0, value=DEFAULTS['seed'], step=1)
    script = ""
    if schedule == "scripted":
        script = st.sidebar.text_input("Redex choices", value="0", help="whitespace separated indices")
    max_steps = st.sidebar.number_input("Max steps", min_value=1, value=DEFAULTS['max_steps'], step=100)
    max_states = st.sidebar.number_input("Max states", min_value=1, value=DEFAULTS['max_states'], step=1000)
    unsafe = st.sidebar.checkbox("Run ill-typed programs (unsafe)", value=False)
    return {
        'schedule': schedule,
        'seed': int(seed),
        'script': script,
        'max_steps': int(max_steps),
        'max_states': int(max_states),
        'unsafe': unsafe,
        'corpus_dir': corpus_dir(),
    }


def list_corpus(directory: str) -> List[str]:
    try:
        return corpus_files(directory)
    except OSError as e:
        logger.warning(f"Corpus directory unavailable: {directory} ({e})")
        return []


def check_source(source: str) -> Dict:
    """Parse and typecheck a program; returns a result dict"""
    try:
        program = parse_program(SourceProgram(source, "<playground>"))
    except (LexError, ParseError) as e:
        return {'success': False, 'stage': 'parse', 'code': e.code, 'message': e.to_diagnostic().render("<playground>")}
    try:
        ty = typecheck_program(program)
    except TypeCheckError as e:
        return {'success': False, 'stage': 'check', 'code': e.code, 'program': program,
                'message': e.to_diagnostic().render("<playground>") + (f"\n  hint: {e.hint}" if e.hint else "")}
    return {'success': True, 'stage': 'check', 'type': str(ty), 'program': program}


def _schedule(config: Dict):
    if config['schedule'] == 'scripted':
        return Scripted(parse_script(config['script']), label="scripted")
    return schedule_from_spec(config['schedule'], config['seed'])


def run_source(source: str, config: Dict) -> Dict:
    """Run a program under the configured schedule"""
    checked = check_source(source)
    if not checked['success'] and (checked['stage'] == 'parse' or not config['unsafe']):
        return checked
    program = checked['program']
    cfg = Configuration.initial(program.term, program.store)
    try:
        result = run(cfg, _schedule(config), config['max_steps'], raise_on_failure=False)
    except (CscError, ValueError) as e:
        logger.error(f"Run failed: {str(e)}")
        return {'success': False, 'stage': 'run', 'code': getattr(e, 'code', 'Error'), 'message': str(e)}
    return {
        'success': result.status == 'answer',
        'stage': 'run',
        'status': result.status,
        'answer': pretty(result.answer) if result.status == 'answer' else None,
        'steps': len(result.trace),
        'trace': render_trace(result, width=0),
        'type': checked.get('type'),
    }


def explore_source(source: str, config: Dict) -> Dict:
    """Explore every interleaving of a program"""
    checked = check_source(source)
    if not checked['success'] and (checked['stage'] == 'parse' or not config['unsafe']):
        return checked
    program = checked['program']
    report = explore(Configuration.initial(program.term, program.store), config['max_states'], config['max_steps'])
    return {'success': report.verdict == 'Confluent', 'stage': 'explore', 'report': report}


def handle_program(config: Dict):
    """Editor and actions for one program"""
    files = list_corpus(config['corpus_dir'])
    names = ["(paste a program)"] + [os.path.basename(f) for f in files]
    choice = st.selectbox("Corpus file", names, index=0)
    if choice != names[0]:
        with open(files[names.index(choice) - 1], encoding='utf-8') as fh:
            st.session_state.source = fh.read()
        headers = read_expectations(st.session_state.source)
        if headers.get('origin'):
            st.caption(f"📖 {headers['origin']}")

    source = st.text_area("Program", value=st.session_state.source, height=220, key="program_text")

    col1, col2, col3 = st.columns(3)
    with col1:
        do_check = st.button("✔️ Check", use_container_width=True)
    with col2:
        do_run = st.button("▶️ Run", use_container_width=True)
    with col3:
        do_explore = st.button("🔀 Explore", use_container_width=True)

    if do_check:
        st.session_state.last_result = check_source(source)
    elif do_run:
        st.session_state.last_result = run_source(source, config)
    elif do_explore:
        st.session_state.last_result = explore_source(source, config)

    display_result(st.session_state.last_result)


def display_result(result):
    if not result:
        st.info("Pick a corpus file or paste a program, then choose an action.")
        return
    if result.get('message'):
        st.error(f"❌ {result['code']}")
        st.code(result['message'], language="text")
        return
    if result.get('type'):
        st.success(f"✅ Well typed: `{result['type']}`")
    if result['stage'] == 'run':
        col1, col2 = st.columns(2)
        with col1:
            st.metric("Answer", result['answer'] or result['status'])
        with col2:
            st.metric("Steps", result['steps'])
        with st.expander("Trace", expanded=True):
            st.code(result['trace'], language="text")
    elif result['stage'] == 'explore':
        report = result['report']
        col1, col2, col3, col4 = st.columns(4)
        with col1:
            st.metric("Verdict", report.verdict)
        with col2:
            st.metric("Answers", ", ".join(report.terminal_answers) or "-")
        with col3:
            st.metric("Store classes", report.terminal_store_classes)
        with col4:
            st.metric("States", report.states_visited)
        if report.truncated:
            st.warning("⚠️ Budget exhausted before every interleaving was visited")
        for n, witness in enumerate(report.witnesses, 1):
            with st.expander(f"Witness {n}"):
                st.dataframe(pd.DataFrame(witness, columns=["rule", "focus", "configuration"]),
                             use_container_width=True, hide_index=True)


def handle_corpus(config: Dict):
    """Run the whole corpus and show the verdict matrix"""
    files = list_corpus(config['corpus_dir'])
    st.caption(f"{len(files)} files in {config['corpus_dir']}")

    if st.button("🚀 Run corpus", disabled=not files):
        progress_bar = st.progress(0)
        status_text = st.empty()

        def progress_callback(processed, total, result):
            progress_bar.progress(processed / total)
            status_text.text(f"Processed {processed}/{total}: {result.get('icon', '')} {result.get('file', '')}")

        with st.spinner("Checking, running and exploring the corpus..."):
            runner = CorpusRunner(max_workers=DEFAULTS['workers'], max_steps=config['max_steps'],
                                  max_states=config['max_states'])
            st.session_state.corpus_results = runner.process_corpus(files, progress_callback=progress_callback)

    summary = st.session_state.corpus_results
    if not summary:
        return
    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Files", summary['total'])
    with col2:
        st.metric("Matched", summary['matched'], delta=summary['matched'] - summary['mismatched'])
    with col3:
        st.metric("Time", f"{summary['processing_time_seconds']:.1f}s")
    st.dataframe(verdict_table(summary['results']), use_container_width=True, hide_index=True)


if __name__ == "__main__":
    try:
        logger.info("Playground starting...")
        main()
    except Exception as e:
        logger.critical(f"Critical application error: {str(e)}", exc_info=True)
        st.error(f"A critical error occurred: {str(e)}")
