//! File formats, configuration, reports and the end-to-end pipeline.

mod config;
mod pipeline;
mod plot;
mod recording;
mod report;

pub use config::Config;
pub use pipeline::{
    analyze_recording, run_pair, run_pipeline, ModalityRun, PipelineRun, ReadOptions,
};
pub use plot::{emit_plot_data, PLOT_FILES};
pub use recording::{
    parse_beats, parse_signal, read_beats, read_signal, sniff_format, write_beats, write_beats_to,
    write_signal, write_signal_to, InputFormat, BEATS_HEADER, SPACING_TOLERANCE,
};
pub use report::{
    read_report, timestamp, to_json, write_json, AgreementBlock, ComparisonDocument, DiffBlock,
    ModalityReport, Provenance, Quantity, QuantityMap, ReportDocument, SubjectDiffs,
    SCHEMA_VERSION, TOOL_VERSION,
};
