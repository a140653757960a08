//! Measurement loading: CSV with one header row, comma separator, `.`
//! decimal point, UTF-8.  One column feeds univariate analysis; `v` columns
//! feed the multivariate pipeline.  Malformed rows are reported with their
//! line numbers.

use std::path::Path;

use capq_core::inference::Sample;
use nalgebra::DMatrix;

use crate::CliError;

/// A parsed data file: header names plus fully numeric rows.
#[derive(Debug)]
pub struct DataFile {
    pub path: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn load(path: &Path) -> Result<DataFile, CliError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => CliError::Io(format!("cannot read '{display}': {io}")),
            _ => CliError::Data(format!("'{display}': {e}")),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("'{display}': {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::Data(format!("'{display}' has no header row")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| record_error(&display, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(headers.len());
        for (column, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "'{display}' line {line}: cannot parse '{cell}' as a number (column '{}')",
                    headers[column]
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "'{display}' line {line}: non-finite value '{cell}' (column '{}')",
                    headers[column]
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("'{display}' has a header but no observations")));
    }
    Ok(DataFile { path: display, headers, rows })
}

fn record_error(display: &str, e: csv::Error) -> CliError {
    if let csv::ErrorKind::UnequalLengths { pos, expected_len, len } = e.kind() {
        let line = pos.as_ref().map_or(0, |p| p.line());
        return CliError::Data(format!(
            "'{display}' line {line}: expected {expected_len} fields, got {len}"
        ));
    }
    CliError::Data(format!("'{display}': {e}"))
}

impl DataFile {
    pub fn observations(&self) -> usize {
        self.rows.len()
    }

    pub fn dimensions(&self) -> usize {
        self.headers.len()
    }

    /// The single measurement column as a sample.
    pub fn univariate(&self) -> Result<Sample, CliError> {
        if self.headers.len() != 1 {
            return Err(CliError::Data(format!(
                "'{}' has {} columns; univariate analysis needs exactly one \
                 (mv-analyze handles matrices)",
                self.path,
                self.headers.len()
            )));
        }
        let values: Vec<f64> = self.rows.iter().map(|r| r[0]).collect();
        Sample::new(values, self.path.clone()).map_err(|e| CliError::Data(e.to_string()))
    }

    /// All columns as an observations-by-axes matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let flat: Vec<f64> = self.rows.iter().flatten().copied().collect();
        DMatrix::from_row_slice(self.rows.len(), self.headers.len(), &flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn single_column_loads_as_a_sample() {
        let file = write_csv("width\n1.5\n2.5\n3.5\n");
        let data = load(file.path()).unwrap();
        assert_eq!(data.dimensions(), 1);
        let sample = data.univariate().unwrap();
        assert_eq!(sample.values(), &[1.5, 2.5, 3.5]);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load(Path::new("/nonexistent/measurements.csv")).unwrap_err();
        assert!(matches!(err, CliError::Io(_)), "{err:?}");
    }

    #[test]
    fn bad_cell_reports_its_line_and_column() {
        let file = write_csv("width\n1.5\noops\n3.5\n");
        let CliError::Data(msg) = load(file.path()).unwrap_err() else { panic!() };
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("'oops'"), "{msg}");
        assert!(msg.contains("column 'width'"), "{msg}");
    }

    #[test]
    fn header_only_file_has_no_observations() {
        let file = write_csv("width\n");
        let CliError::Data(msg) = load(file.path()).unwrap_err() else { panic!() };
        assert!(msg.contains("no observations"), "{msg}");
    }

    #[test]
    fn ragged_rows_report_their_line() {
        let file = write_csv("a,b\n1,2\n3\n");
        let CliError::Data(msg) = load(file.path()).unwrap_err() else { panic!() };
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("expected 2 fields"), "{msg}");
    }

    #[test]
    fn two_columns_route_to_a_matrix() {
        let file = write_csv("a,b\n1,2\n3,4\n5,6\n");
        let data = load(file.path()).unwrap();
        assert_eq!(data.dimensions(), 2);
        let m = data.matrix();
        assert_eq!((m.nrows(), m.ncols()), (3, 2));
        assert_eq!(m[(1, 0)], 3.0);
        assert!(data.univariate().is_err());
    }

    #[test]
    fn non_finite_cells_are_rejected() {
        let file = write_csv("width\n1.5\nNaN\n");
        let CliError::Data(msg) = load(file.path()).unwrap_err() else { panic!() };
        assert!(msg.contains("non-finite"), "{msg}");
    }
}
