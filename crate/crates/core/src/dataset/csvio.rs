//! Small helpers shared by the CSV readers and writers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Header-name to column-index lookup for one CSV file.
pub(crate) struct Columns {
    indices: Vec<usize>,
}

impl Columns {
    pub(crate) fn resolve(headers: &csv::StringRecord, names: &[&str], context: &str) -> Result<Self> {
        let indices = names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim().trim_start_matches('\u{feff}') == *name)
                    .ok_or_else(|| Error::MissingColumn {
                        column: (*name).to_string(),
                        context: context.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Columns { indices })
    }

    pub(crate) fn get<'r>(&self, record: &'r csv::StringRecord, slot: usize) -> &'r str {
        record.get(self.indices[slot]).map(str::trim).unwrap_or("")
    }
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input)
}

pub(crate) fn writer<W: Write>(output: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(output)
}

/// Line number of a record, for error messages.
pub(crate) fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

pub(crate) fn parse_u64(field: &str, name: &str, line: usize) -> Result<u64> {
    if let Ok(v) = field.parse::<u64>() {
        return Ok(v);
    }
    // Exports from dataframe tools sometimes write integral values as `12.0`.
    match field.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v >= 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(Error::row(line, format!("{name}: `{field}` is not a non-negative integer"))),
    }
}

pub(crate) fn parse_i64(field: &str, name: &str, line: usize) -> Result<i64> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() <= i64::MAX as f64 => Ok(v as i64),
        _ => Err(Error::row(line, format!("{name}: `{field}` is not an integer"))),
    }
}

pub(crate) fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("nan") || field.eq_ignore_ascii_case("null")
}

pub(crate) fn parse_opt_i64(field: &str, name: &str, line: usize) -> Result<Option<i64>> {
    if is_missing(field) {
        Ok(None)
    } else {
        parse_i64(field, name, line).map(Some)
    }
}
