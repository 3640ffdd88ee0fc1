//! Metrics and analyses: unlabeled span F1, self-F1 across restarts,
//! per-constituent accuracy, the SBAR split-point case study, and report
//! generation.

mod f1;
mod labels;
mod report;
mod sbar;

pub use f1::{
    binarize_gold, binary_pair_f1, corpus_f1, pair_corpus_f1, self_f1, span_f1, Aggregation,
    Conventions, F1Result,
};
pub use labels::{label_accuracy, label_accuracy_single, LabelAccuracyRow};
pub use report::{
    table1_tsv, table2_tsv, table3_tsv, write_report, EnsembleReport, EvalReport, Table1Row,
    Table3Row,
};
pub use sbar::{
    classify_sbar, gold_heights, sample_sbars, sbar_case_study, SbarCase, SbarCaseCounts,
    SbarInstance, VERBAL_POS,
};
