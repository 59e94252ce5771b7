//! Reading and writing records: the canonical interchange CSV and the
//! spreadsheet shapes of the six regulator templates.

mod canonical;
mod profile;

pub use canonical::{parse_canonical, write_canonical, CANONICAL_HEADER, META_CONTROLLER, META_CREATED};
pub use profile::{
    convert, export_template, export_template_rows, import_template, ConversionLossReport,
    LossReason, LostConcept, TemplateProfileConfig, CONFIG_HEADER, META_RECORD_ID,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: malformed CSV: {reason}")]
    MalformedCsv { line: u64, reason: String },
    #[error("line {line}: duplicate cell ({record_id}, {concept_id}, {value_index})")]
    DuplicateCell {
        line: u64,
        record_id: String,
        concept_id: String,
        value_index: usize,
    },
    #[error("record `{record_id}` lacks metadata row `{field}`")]
    MissingMetadata { record_id: String, field: String },
    #[error("file does not look like this template; missing headers: {}", .missing.join(", "))]
    HeaderMismatch { missing: Vec<String> },
    #[error("invalid template config: {0}")]
    InvalidConfig(String),
}

pub(crate) fn csv_error(e: &csv::Error) -> TemplateError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let reason = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} columns, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => e.to_string(),
    };
    TemplateError::MalformedCsv { line, reason }
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new())
}

/// Strict reader: rejects quoting the csv crate would otherwise tolerate.
pub(crate) fn csv_reader(input: &[u8]) -> Result<csv::Reader<&[u8]>, TemplateError> {
    check_quoting(input)?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input))
}

/// RFC 4180 quoting: a quote may only open a field, `""` escapes a quote
/// inside a quoted field, and a closing quote must end the field.
fn check_quoting(input: &[u8]) -> Result<(), TemplateError> {
    let malformed = |line: u64, reason: &str| TemplateError::MalformedCsv {
        line,
        reason: reason.to_string(),
    };
    let mut line = 1u64;
    let mut field_start = true;
    let mut i = 0;
    while i < input.len() {
        match input[i] {
            b'"' if field_start => {
                let opened = line;
                i += 1;
                loop {
                    match input.get(i) {
                        None => return Err(malformed(opened, "unterminated quoted field")),
                        Some(b'"') if input.get(i + 1) == Some(&b'"') => i += 2,
                        Some(b'"') => break,
                        Some(b'\n') => {
                            line += 1;
                            i += 1;
                        }
                        Some(_) => i += 1,
                    }
                }
                i += 1;
                if !matches!(input.get(i), None | Some(b',' | b'\n' | b'\r')) {
                    return Err(malformed(line, "unexpected character after closing quote"));
                }
                field_start = false;
                continue;
            }
            b'"' => return Err(malformed(line, "quote inside unquoted field")),
            b',' => field_start = true,
            b'\n' => {
                line += 1;
                field_start = true;
            }
            _ => field_start = false,
        }
        i += 1;
    }
    Ok(())
}

/// Escapes a value for a `;`-separated cell.
pub(crate) fn escape_cell_value(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        if c == '\\' || c == ';' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Splits a cell on unescaped `;` and unescapes each piece. Pieces are
/// trimmed and empty pieces dropped.
pub(crate) fn split_cell(cell: &str) -> Vec<String> {
    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut chars = cell.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(next @ ('\\' | ';')) => current.push(next),
                Some(other) => {
                    current.push('\\');
                    current.push(other);
                }
                None => current.push('\\'),
            },
            ';' => pieces.push(std::mem::take(&mut current)),
            other => current.push(other),
        }
    }
    pieces.push(current);
    pieces
        .into_iter()
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Unescapes a single-valued cell.
pub(crate) fn unescape_cell(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    let mut chars = cell.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next @ ('\\' | ';')) => out.push(next),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out.trim().to_string()
}
