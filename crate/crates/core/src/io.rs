//! File formats: problem and parameter files, measure JSON, density CSV,
//! and a JSON writer with fixed 17-significant-digit floats.

use std::io;

use serde::{Deserialize, Serialize};

use crate::extensions::ExtensionParameter;
use crate::moment_model::MomentSequence;
use crate::solutions::{Atom, AtomicMatrixMeasure, MeasureJson, PerronResult};
use crate::{CMatrix, Error, Result, Tolerances, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// A complex entry, either `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexEntry> for C64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Pair([re, im]) => C64::new(re, im),
            ComplexEntry::Real(re) => C64::new(re, 0.0),
        }
    }
}

pub type MatrixJson = Vec<Vec<ComplexEntry>>;

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Row-major JSON matrix to a dense matrix; every row must have `cols`
/// entries.
pub fn matrix_from_json(rows: &MatrixJson, cols: Option<usize>) -> Result<CMatrix> {
    let ncols = cols.unwrap_or_else(|| rows.first().map(Vec::len).unwrap_or(0));
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::InvalidInput(format!(
            "row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j].into()))
}

/// Extension parameter as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParameterFile {
    Theta { constant_unimodular_theta: f64 },
    Matrix { kind: ParameterKindJson, matrix: MatrixJson },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterKindJson {
    Isometric,
    Contraction,
}

impl ParameterFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("parameter file: {e}")))
    }

    /// The parameter on a `q`-dimensional deficiency space.
    pub fn to_parameter(&self, q: usize) -> Result<ExtensionParameter> {
        match self {
            ParameterFile::Theta { constant_unimodular_theta } => {
                if q != 1 {
                    return Err(Error::ParameterShape { rows: 1, cols: 1, q });
                }
                Ok(ExtensionParameter::unimodular(*constant_unimodular_theta))
            }
            ParameterFile::Matrix { kind, matrix } => {
                let m = matrix_from_json(matrix, None)?;
                Ok(match kind {
                    ParameterKindJson::Isometric => ExtensionParameter::isometric(m),
                    ParameterKindJson::Contraction => ExtensionParameter::contraction(m),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    pub moments: Vec<MatrixJson>,
    #[serde(default)]
    pub parameter: Option<ParameterFile>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ProblemFile {
    /// Parses and validates the schema; no numerics beyond shape and
    /// finiteness checks.
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("problem file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::InvalidInput(format!("unsupported schema_version {v}")));
            }
        }
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        if self.moments.len() < 3 || self.moments.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "expected 2d+1 ≥ 3 moments, got {}",
                self.moments.len()
            )));
        }
        if let Some(d) = self.d {
            if 2 * d + 1 != self.moments.len() {
                return Err(Error::InvalidInput(format!(
                    "d = {d} needs {} moments, got {}",
                    2 * d + 1,
                    self.moments.len()
                )));
            }
        }
        for (k, m) in self.moments.iter().enumerate() {
            if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
                return Err(Error::InvalidInput(format!("moment {k} is not {0}×{0}", self.n)));
            }
        }
        Ok(())
    }

    /// Defaults overridden by the file, then by `overrides`.
    pub fn tolerances(&self, overrides: &[(String, f64)]) -> Result<Tolerances> {
        let mut tol = self.tolerances.unwrap_or_default();
        for (key, value) in overrides {
            tol.set(key, *value)?;
        }
        Ok(tol)
    }

    pub fn sequence(&self, tol: &Tolerances) -> Result<MomentSequence> {
        let entries = self
            .moments
            .iter()
            .map(|m| matrix_from_json(m, Some(self.n)))
            .collect::<Result<Vec<_>>>()?;
        MomentSequence::new(self.n, entries, tol)
    }

    pub fn from_sequence(seq: &MomentSequence) -> Self {
        let moments = seq
            .entries()
            .iter()
            .map(|m| {
                matrix_to_pairs(m)
                    .into_iter()
                    .map(|row| row.into_iter().map(ComplexEntry::Pair).collect())
                    .collect()
            })
            .collect();
        Self {
            schema_version: Some(SCHEMA_VERSION),
            n: seq.dim(),
            d: Some(seq.len() / 2),
            moments,
            parameter: None,
            tolerances: None,
        }
    }
}

impl MeasureJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("measure file: {e}")))
    }

    pub fn to_measure(&self) -> Result<AtomicMatrixMeasure> {
        let n = self.atoms.first().map(|a| a.w.len()).unwrap_or(0);
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let rows: MatrixJson = a
                    .w
                    .iter()
                    .map(|r| r.iter().map(|&p| ComplexEntry::Pair(p)).collect())
                    .collect();
                if rows.len() != n {
                    return Err(Error::InvalidInput(format!("atom at {} is not {n}×{n}", a.t)));
                }
                Ok(Atom {
                    t: a.t,
                    weight: matrix_from_json(&rows, Some(n))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomicMatrixMeasure::new(n, atoms))
    }
}

/// Density CSV: `x` (cell left edge), then the `N²` increment entries in
/// row-major order. Diagonal and upper entries carry the real part
/// (`re_k_l`), strictly lower entries the imaginary part of the mirrored
/// upper entry (`im_l_k`); a Hermitian increment is fully determined by them.
pub fn density_csv(result: &PerronResult) -> String {
    let n = result.increments.first().map(|m| m.nrows()).unwrap_or(0);
    let mut out = String::from("x");
    for k in 0..n {
        for l in 0..n {
            if k <= l {
                out.push_str(&format!(",re_{k}_{l}"));
            } else {
                out.push_str(&format!(",im_{l}_{k}"));
            }
        }
    }
    out.push('\n');
    for (&(lo, _), m) in result.cells.iter().zip(&result.increments) {
        out.push_str(&fmt_f64(lo));
        for k in 0..n {
            for l in 0..n {
                let v = if k <= l { m[(k, l)].re } else { m[(l, k)].im };
                out.push(',');
                out.push_str(&fmt_f64(v));
            }
        }
        out.push('\n');
    }
    out
}

/// `v` with 17 significant digits; non-finite values become `null`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty JSON with every float written by [`fmt_f64`].
struct FixedFloats(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(Default::default()));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_file_round_trip() {
        let text = r#"{"N": 1, "moments": [[[[1, 0]]], [[0]], [[[1, 0]]]]}"#;
        let f = ProblemFile::parse(text).unwrap();
        let seq = f.sequence(&Tolerances::default()).unwrap();
        assert_eq!(seq.len(), 3);
        let again = ProblemFile::from_sequence(&seq);
        let seq2 = again.sequence(&Tolerances::default()).unwrap();
        assert_eq!(seq.entries(), seq2.entries());
    }

    #[test]
    fn malformed_files() {
        assert!(ProblemFile::parse("{").is_err());
        assert!(ProblemFile::parse(r#"{"N": 1, "moments": [[[1]], [[0]]]}"#).is_err());
        assert!(ProblemFile::parse(r#"{"N": 2, "moments": [[[1]], [[0]], [[1]]]}"#).is_err());
        assert!(ProblemFile::parse(r#"{"N": 1, "d": 2, "moments": [[[1]], [[0]], [[1]]]}"#).is_err());
        assert!(ProblemFile::parse(r#"{"N": 1, "moments": [[[1]], [[0]], [[1]]], "extra": 1}"#).is_err());
    }

    #[test]
    fn parameter_files() {
        let p = ParameterFile::parse(r#"{"constant_unimodular_theta": 0.5}"#).unwrap();
        assert_eq!(p.to_parameter(1).unwrap(), ExtensionParameter::unimodular(0.5));
        assert!(p.to_parameter(2).is_err());
        let p = ParameterFile::parse(r#"{"kind": "contraction", "matrix": [[[0.5, 0]]]}"#).unwrap();
        assert_eq!(p.to_parameter(1).unwrap().matrix()[(0, 0)], C64::new(0.5, 0.0));
    }

    #[test]
    fn fixed_float_format() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        let s = to_json(&serde_json::json!({"a": [1.0, -0.25]}));
        assert!(s.contains("-2.5000000000000000e-1"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"][0].as_f64(), Some(1.0));
    }

    #[test]
    fn measure_json_round_trip() {
        let m = AtomicMatrixMeasure::scalar(&[(-1.0, 0.5), (1.0, 0.5)]);
        let back = MeasureJson::parse(&to_json(&m.to_json())).unwrap().to_measure().unwrap();
        assert_eq!(m.distance(&back), 0.0);
    }
}
