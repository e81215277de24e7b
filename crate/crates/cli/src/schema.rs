//! Problem, realization and parameter files.

use std::fmt;

use pickforge_core::{Complex64, ComplexMatrix, ComplexVector, Realization, ToleranceConfig};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;

/// A complex entry: either a bare real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry(pub Complex64);

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an [re, im] pair")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v as f64, 0.0)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v as f64, 0.0)))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Entry, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Entry(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

/// Row-major list of rows; `[]` is an empty matrix whose column count is
/// fixed by context.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: Vec<Vec<Complex64>>,
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<Entry>> = Vec::deserialize(d)?;
        if let Some(first) = rows.first() {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
                return Err(de::Error::custom(format!(
                    "row {i} has {} entries, row 0 has {}; matrices must be rectangular",
                    r.len(),
                    first.len()
                )));
            }
        }
        if rows.iter().flatten().any(|e| !e.0.is_finite()) {
            return Err(de::Error::custom("matrix entries must be finite"));
        }
        Ok(Matrix { rows: rows.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect() })
    }
}

impl Matrix {
    pub fn to_matrix(&self, empty_cols: usize) -> ComplexMatrix {
        let r = self.rows.len();
        let c = self.rows.first().map_or(empty_cols, |row| row.len());
        ComplexMatrix::from_fn(r, c, |i, j| self.rows[i][j])
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }
}

/// A point strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(pub Complex64);

impl<'de> Deserialize<'de> for DiskPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let Entry(z) = Entry::deserialize(d)?;
        if !(z.norm() < 1.0) {
            return Err(de::Error::custom(format!("point {z} is not inside the unit disk")));
        }
        Ok(DiskPoint(z))
    }
}

/// A point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoint(pub Complex64);

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let Entry(z) = Entry::deserialize(d)?;
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(de::Error::custom(format!("t0 = {z} is not on the unit circle")));
        }
        Ok(CirclePoint(z))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationSpec {
    #[serde(default)]
    pub a: Option<Matrix>,
    #[serde(default)]
    pub b: Option<Matrix>,
    #[serde(default)]
    pub c: Option<Matrix>,
    pub d: Matrix,
    /// Ignored on input; written by reports.
    #[serde(default)]
    pub state_dim: Option<usize>,
}

impl RealizationSpec {
    pub fn build(&self) -> pickforge_core::Result<Realization> {
        let d = self.d.to_matrix(0);
        let n = self.a.as_ref().map_or(0, Matrix::row_count);
        let a = self.a.as_ref().map_or_else(|| ComplexMatrix::zeros(0, 0), |m| m.to_matrix(n));
        let b = self.b.as_ref().map_or_else(|| ComplexMatrix::zeros(n, d.ncols()), |m| m.to_matrix(d.ncols()));
        let c = self.c.as_ref().map_or_else(
            || ComplexMatrix::zeros(d.nrows(), n),
            |m| {
                if m.row_count() == 0 {
                    ComplexMatrix::zeros(d.nrows(), n)
                } else {
                    m.to_matrix(n)
                }
            },
        );
        Realization::new(a, b, c, d)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub psd_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub truncation_tol: Option<f64>,
    pub grid_boundary_points: Option<usize>,
    pub grid_interior_points: Option<usize>,
    pub kernel_tuples: Option<usize>,
}

impl Tolerances {
    pub fn apply(&self, cfg: &mut ToleranceConfig) {
        if let Some(v) = self.psd_tol {
            cfg.psd_tol = v;
        }
        if let Some(v) = self.residual_tol {
            cfg.residual_tol = v;
        }
        if let Some(v) = self.truncation_tol {
            cfg.truncation_tol = v;
        }
        if let Some(v) = self.grid_boundary_points {
            cfg.grid_boundary_points = v;
        }
        if let Some(v) = self.grid_interior_points {
            cfg.grid_interior_points = v;
        }
        if let Some(v) = self.kernel_tuples {
            cfg.kernel_tuples = v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    NevanlinnaPick,
    Aip,
    HsInterpolation,
    Boundary,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::NevanlinnaPick => "nevanlinna-pick",
            Kind::Aip => "aip",
            Kind::HsInterpolation => "hs-interpolation",
            Kind::Boundary => "boundary",
        }
    }
}

#[derive(Deserialize)]
struct KindOnly {
    kind: Kind,
}

/// Interior point data: `N` columns given directly.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickProblem {
    pub kind: Kind,
    pub points: Vec<DiskPoint>,
    pub e: Matrix,
    pub n: Matrix,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AipProblem {
    pub kind: Kind,
    pub t: Matrix,
    pub e: Matrix,
    pub n: Matrix,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// `S` plus either interior points (with `N` generated from `S`) or a
/// general `(T, E, N)` triple; `P` defaults to the Stein solution.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsProblem {
    pub kind: Kind,
    pub s: RealizationSpec,
    pub points: Option<Vec<DiskPoint>>,
    pub t: Option<Matrix>,
    pub e: Matrix,
    pub n: Option<Matrix>,
    pub y: Matrix,
    pub p: Option<Matrix>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryProblem {
    pub kind: Kind,
    pub s: RealizationSpec,
    pub t0: CirclePoint,
    pub n: usize,
    pub targets: Vec<Vec<Entry>>,
    pub weight: Option<Vec<Matrix>>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl BoundaryProblem {
    pub fn target_vectors(&self) -> Vec<ComplexVector> {
        self.targets.iter().map(|t| ComplexVector::from_iterator(t.len(), t.iter().map(|e| e.0))).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Problem {
    Pick(PickProblem),
    Aip(AipProblem),
    Hs(HsProblem),
    Boundary(BoundaryProblem),
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self {
            Problem::Pick(_) => Kind::NevanlinnaPick,
            Problem::Aip(_) => Kind::Aip,
            Problem::Hs(_) => Kind::HsInterpolation,
            Problem::Boundary(_) => Kind::Boundary,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Problem::Pick(p) => p.seed,
            Problem::Aip(p) => p.seed,
            Problem::Hs(p) => p.seed,
            Problem::Boundary(p) => p.seed,
        }
    }

    pub fn tolerances(&self) -> &Tolerances {
        match self {
            Problem::Pick(p) => &p.tolerances,
            Problem::Aip(p) => &p.tolerances,
            Problem::Hs(p) => &p.tolerances,
            Problem::Boundary(p) => &p.tolerances,
        }
    }
}

/// Parses a problem file; errors carry serde's line and column.
pub fn parse_problem(text: &str) -> Result<Problem, serde_json::Error> {
    let KindOnly { kind } = serde_json::from_str(text)?;
    Ok(match kind {
        Kind::NevanlinnaPick => Problem::Pick(serde_json::from_str(text)?),
        Kind::Aip => Problem::Aip(serde_json::from_str(text)?),
        Kind::HsInterpolation => Problem::Hs(serde_json::from_str(text)?),
        Kind::Boundary => Problem::Boundary(serde_json::from_str(text)?),
    })
}

pub fn parse_realization(text: &str) -> Result<RealizationSpec, serde_json::Error> {
    serde_json::from_str(text)
}

/// `h = sum_k K(., w_k) c_k` in the parameter space of an `H(S)` solution.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub points: Vec<DiskPoint>,
    pub coeffs: Vec<Vec<Entry>>,
}

pub fn parse_kernel(text: &str) -> Result<KernelSpec, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_accept_reals_and_pairs() {
        let m: Matrix = serde_json::from_str("[[1, [0.5, -2]], [0.25, [0, 1]]]").unwrap();
        let a = m.to_matrix(0);
        assert_eq!(a[(0, 1)], Complex64::new(0.5, -2.0));
        assert_eq!(a[(1, 0)], Complex64::new(0.25, 0.0));
    }

    #[test]
    fn ragged_matrix_reports_position() {
        let text = "{\"kind\": \"aip\", \"t\": [[0]],\n \"e\": [[1, 2],\n [3]], \"n\": [[0]]}";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("rectangular") && err.line() == 3, "{err}");
    }

    #[test]
    fn points_outside_disk_rejected() {
        let text = r#"{"kind": "nevanlinna-pick", "points": [[0.6, 0.9]], "e": [[1]], "n": [[0]]}"#;
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("unit disk"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = "{\"kind\": \"aip\",\n \"t\": [[0]], \"e\": [[1]], \"n\": [[0]],\n \"bogus\": 1}";
        let err = parse_problem(text).unwrap_err();
        assert_eq!(err.line(), 3, "{err}");
    }

    #[test]
    fn constant_realization_shapes() {
        let spec: RealizationSpec = serde_json::from_str(r#"{"d": [[0.5, 0], [0, 0.5]]}"#).unwrap();
        let r = spec.build().unwrap();
        assert_eq!((r.state_dim(), r.out_dim(), r.in_dim()), (0, 2, 2));
        let spec: RealizationSpec =
            serde_json::from_str(r#"{"a": [[0]], "b": [[1]], "c": [[1]], "d": [[0]]}"#).unwrap();
        assert_eq!(spec.build().unwrap().state_dim(), 1);
    }
}
