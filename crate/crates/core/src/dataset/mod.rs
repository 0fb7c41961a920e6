//! Answer-record ingestion, cleaning, matrix construction and splitting.

mod csvio;
mod matrix;
mod meta;
mod preprocess;
mod record;
mod split;

pub use matrix::{Observation, ResponseMatrix};
pub use meta::{
    read_answer_meta, read_answer_meta_from, read_question_meta, read_question_meta_from, read_student_meta,
    read_student_meta_from, read_subject_tree, read_subject_tree_from, write_answer_meta, write_question_meta,
    write_student_meta, write_subject_tree, AnswerMeta, Gender, QuestionMeta, StudentMeta, SubjectNode, SubjectTree,
    ANSWER_COLUMNS, QUESTION_COLUMNS, STUDENT_COLUMNS, SUBJECT_COLUMNS,
};
pub use preprocess::{dedupe_latest, filter_min_counts};
pub use record::{parse_records, parse_records_from, write_records, ParsedRecords, ResponseRecord, RECORD_COLUMNS};
pub use split::{split_records, split_students, Split, SplitFractions};

pub(crate) use csvio::{line_of, parse_u64, reader as csv_reader, writer as csv_writer, Columns};
