//! Input documents: a JSON object holding either `matrix` + `b` or `a` + `b`
//! (plus an optional `label`), or a two-column CSV file `a,b` for the
//! diagonal form.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::bounds::{form_stats, DiagonalForm, FormStats};
use crate::error::Result;
use crate::spectral::{self, Matrix, QuadraticForm};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    matrix: Option<Vec<Vec<f64>>>,
    a: Option<Vec<f64>>,
    b: Vec<f64>,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormKind {
    Diagonal(DiagonalForm),
    Matrix(QuadraticForm),
}

/// A parsed and validated input form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormDocument {
    pub form: FormKind,
    pub label: Option<String>,
}

impl FormDocument {
    pub fn load(path: &Path) -> std::result::Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let is_csv = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
        let parsed = if is_csv {
            Self::from_csv(&text)
        } else {
            Self::from_json(&text)
        };
        parsed.map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, CliError> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        let form = match (raw.matrix, raw.a) {
            (Some(_), Some(_)) => {
                return Err(CliError::Input(
                    "document must contain exactly one of `matrix` or `a`, found both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Input(
                    "document must contain exactly one of `matrix` or `a`, found neither".into(),
                ))
            }
            (Some(rows), None) => {
                let matrix = Matrix::from_rows(&rows).map_err(document_error)?;
                FormKind::Matrix(QuadraticForm::new(matrix, raw.b).map_err(document_error)?)
            }
            (None, Some(a)) => FormKind::Diagonal(DiagonalForm::new(a, raw.b).map_err(document_error)?),
        };
        Ok(Self {
            form,
            label: raw.label,
        })
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "a" || &headers[1] != "b" {
            return Err(CliError::Input("line 1: CSV header must be exactly `a,b`".into()));
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for row in reader.deserialize::<CsvRow>() {
            let row = row.map_err(|e| CliError::Input(e.to_string()))?;
            a.push(row.a);
            b.push(row.b);
        }
        let form = DiagonalForm::new(a, b).map_err(document_error)?;
        Ok(Self {
            form: FormKind::Diagonal(form),
            label: None,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            FormKind::Diagonal(d) => d.dim(),
            FormKind::Matrix(m) => m.dim(),
        }
    }

    /// The diagonal form used for bounds: matrix documents are reduced.
    pub fn diagonal(&self) -> Result<DiagonalForm> {
        match &self.form {
            FormKind::Diagonal(d) => Ok(d.clone()),
            FormKind::Matrix(m) => Ok(spectral::reduce(m)?.diagonal_form()),
        }
    }

    pub fn stats(&self) -> Result<FormStats> {
        Ok(form_stats(&self.diagonal()?))
    }

    pub fn is_deterministic(&self) -> bool {
        match &self.form {
            FormKind::Diagonal(d) => d.is_deterministic(),
            FormKind::Matrix(m) => {
                spectral::symmetrize(m).as_slice().iter().all(|&v| v == 0.0) && m.b().iter().all(|&v| v == 0.0)
            }
        }
    }
}

fn document_error(e: crate::Error) -> CliError {
    CliError::Input(match e {
        crate::Error::Validation(msg) => msg,
        other => other.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_diagonal_json() {
        let d = FormDocument::from_json(r#"{"a":[1,2],"b":[0,0.5],"label":"x"}"#).unwrap();
        assert_eq!(d.label.as_deref(), Some("x"));
        assert_eq!(d.dim(), 2);
        assert!(matches!(d.form, FormKind::Diagonal(_)));
    }

    #[test]
    fn parses_matrix_json() {
        let d = FormDocument::from_json(r#"{"matrix":[[1,2],[0,1]],"b":[0,0]}"#).unwrap();
        assert!(matches!(d.form, FormKind::Matrix(_)));
        let s = d.stats().unwrap();
        assert!((s.mean - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_both_or_neither() {
        assert!(FormDocument::from_json(r#"{"a":[1],"matrix":[[1]],"b":[0]}"#).is_err());
        assert!(FormDocument::from_json(r#"{"b":[0]}"#).is_err());
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = FormDocument::from_json("{\n  \"a\": [1,\n  \"b\": [0]\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_shape_mismatch() {
        let err = FormDocument::from_json(r#"{"matrix":[[1,2]],"b":[0]}"#).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
        assert!(FormDocument::from_json(r#"{"a":[1,2],"b":[0]}"#).is_err());
        assert!(FormDocument::from_json(r#"{"a":[],"b":[]}"#).is_err());
        assert!(FormDocument::from_json(r#"{"a":[1],"b":[0],"extra":1}"#).is_err());
    }

    #[test]
    fn parses_csv() {
        let d = FormDocument::from_csv("a,b\n1,0\n-2, 0.5\n").unwrap();
        assert_eq!(d.diagonal().unwrap().a(), &[1.0, -2.0]);
        assert_eq!(d.diagonal().unwrap().b(), &[0.0, 0.5]);
    }

    #[test]
    fn csv_errors_carry_line() {
        let err = FormDocument::from_csv("a,b\n1,0\n2,oops\n").unwrap_err();
        assert!(err.to_string().contains("line: 3") || err.to_string().contains("line 3"), "{err}");
        assert!(FormDocument::from_csv("x,y\n1,0\n").is_err());
    }
}
