//! JSON file formats: problem files, solution files and secret reports.
//!
//! Matrices are arrays of rows. Ragged rows and non-finite numbers are
//! rejected with the line and column reported by the JSON parser.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::are::{AreProblem, StabilizingSolution};
use crate::error::{Error, Result};
use crate::lqr::{lqr_to_are, LqrProblem};
use crate::numerics::Matrix;
use crate::privacy::PrivacyReport;
use crate::shift::ShiftRecord;

/// Serde adapter storing a matrix as `[[row], [row], ...]`.
pub mod matrix_rows {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::numerics::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(D::Error::custom(format!(
                    "ragged matrix: row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(D::Error::custom(format!(
                    "non-finite entry at row {i}, column {j}"
                )));
            }
        }
        Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreBlock {
    #[serde(rename = "A", with = "matrix_rows")]
    pub a: Matrix,
    #[serde(rename = "Q", with = "matrix_rows")]
    pub q: Matrix,
    #[serde(rename = "D", with = "matrix_rows")]
    pub d: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrBlock {
    #[serde(rename = "A", with = "matrix_rows")]
    pub a: Matrix,
    #[serde(rename = "B", with = "matrix_rows")]
    pub b: Matrix,
    #[serde(rename = "C", with = "matrix_rows")]
    pub c: Matrix,
    #[serde(rename = "R", with = "matrix_rows")]
    pub r: Matrix,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `{"are": {...}}` and/or `{"lqr": {...}}`, with optional `"meta"`.
///
/// When both sections are present the `"are"` section defines the problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub are: Option<AreBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lqr: Option<LqrBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl ProblemFile {
    pub fn from_are(p: &AreProblem) -> Self {
        Self {
            are: Some(AreBlock {
                a: p.a().clone(),
                q: p.q().clone(),
                d: p.d().clone(),
            }),
            ..Self::default()
        }
    }

    pub fn from_lqr(l: &LqrProblem) -> Self {
        Self {
            lqr: Some(LqrBlock {
                a: l.a().clone(),
                b: l.b().clone(),
                c: l.c().clone(),
                r: l.r().clone(),
            }),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        if file.are.is_none() && file.lqr.is_none() {
            return Err(Error::InvalidArgument(
                "problem file needs an \"are\" or \"lqr\" section".into(),
            ));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }

    pub fn lqr_problem(&self) -> Result<Option<LqrProblem>> {
        self.lqr
            .as_ref()
            .map(|l| LqrProblem::new(l.a.clone(), l.b.clone(), l.c.clone(), l.r.clone()))
            .transpose()
    }

    pub fn are_problem(&self) -> Result<AreProblem> {
        if let Some(are) = &self.are {
            return AreProblem::new(are.a.clone(), are.q.clone(), are.d.clone());
        }
        match self.lqr_problem()? {
            Some(l) => lqr_to_are(&l),
            None => Err(Error::InvalidArgument("empty problem file".into())),
        }
    }
}

/// Output of the solving side: `{"P", "residual", "closed_loop_spectrum"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(rename = "P", with = "matrix_rows")]
    pub p: Matrix,
    pub residual: f64,
    pub closed_loop_spectrum: Vec<Complex64>,
}

impl SolutionFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &serde_json::to_string_pretty(self)?)
    }
}

impl From<StabilizingSolution> for SolutionFile {
    fn from(s: StabilizingSolution) -> Self {
        Self {
            p: s.p,
            residual: s.residual,
            closed_loop_spectrum: s.closed_loop,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Unconstrained real shifts.
    Problem1,
    /// One shift keeping Q and D positive semidefinite.
    Problem2,
}

/// Checks of a candidate solution against the original coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySection {
    pub residual: f64,
    pub closed_loop_stable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_match: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_rel_diff: Option<f64>,
}

/// The locally kept report of a disguise run. Never shipped with the
/// disguised problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub mode: Mode,
    pub seed: u64,
    pub shifts: Vec<ShiftRecord>,
    pub privacy: PrivacyReport,
    pub verify: VerifySection,
}

impl ReportFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &serde_json::to_string_pretty(self)?)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut body = text.to_owned();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_are_file() {
        let text = r#"{"are": {"A": [[1.0]], "Q": [[1.0]], "D": [[1.0]]}, "meta": {"name": "scalar"}}"#;
        let file = ProblemFile::from_json(text).unwrap();
        assert_eq!(file.are_problem().unwrap(), AreProblem::scalar(1.0, 1.0, 1.0));
    }

    #[test]
    fn parses_lqr_file() {
        let text = r#"{"lqr": {"A": [[0,1],[0,0]], "B": [[0],[1]], "C": [[1,0]], "R": [[1]]}}"#;
        let p = ProblemFile::from_json(text).unwrap().are_problem().unwrap();
        assert_eq!(p.d()[(1, 1)], 1.0);
        assert_eq!(p.q()[(0, 0)], 1.0);
    }

    #[test]
    fn ragged_rows_report_a_line() {
        let text = "{\"are\": {\n\"A\": [[1.0, 2.0],\n [3.0]],\n\"Q\": [[1]], \"D\": [[1]]}}";
        let err = ProblemFile::from_json(text).unwrap_err().to_string();
        assert!(err.contains("ragged"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        let text = r#"{"are": {"A": [[1e999]], "Q": [[1]], "D": [[1]]}}"#;
        assert!(ProblemFile::from_json(text).is_err());
        let text = r#"{"are": {"A": [[NaN]], "Q": [[1]], "D": [[1]]}}"#;
        assert!(ProblemFile::from_json(text).is_err());
    }

    #[test]
    fn empty_file_rejected() {
        assert!(ProblemFile::from_json("{}").is_err());
        assert!(ProblemFile::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn numbers_round_trip_exactly() {
        let a = Matrix::from_row_slice(1, 2, &[0.1 + 0.2, std::f64::consts::PI / 3.0]);
        let q = Matrix::from_element(2, 2, 1.0 / 3.0);
        let p = AreProblem::new(
            Matrix::from_fn(2, 2, |i, j| a[(0, j)] * (i + 1) as f64),
            q.clone(),
            q,
        )
        .unwrap();
        let text = ProblemFile::from_are(&p).to_json().unwrap();
        let back = ProblemFile::from_json(&text).unwrap().are_problem().unwrap();
        assert_eq!(back, p);
    }
}
