//! Pollutant weight derivation: an interval type-2 fuzzy pairwise comparison
//! matrix is checked for consistency, then fuzzy geometric means and
//! defuzzification produce normalized crisp weights.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::it2::Trapezoid;

/// Random indices for reciprocal matrices of order 1..=10.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

const POWER_TOLERANCE: f64 = 1e-12;
const POWER_MAX_ITERATIONS: usize = 10_000;

pub const DEFAULT_CR_THRESHOLD: f64 = 0.10;

pub const DEFAULT_MATRIX_TEXT: &str = include_str!("../fixtures/matrix.txt");

#[derive(Debug, Error)]
pub enum FahpError {
    #[error("judgment support must be strictly positive for reciprocals to exist")]
    NonPositiveSupport,
    #[error("matrix order {0} exceeds 10 (no random index is defined)")]
    OrderTooLarge(usize),
    #[error("matrix must have at least one criterion")]
    Empty,
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("matrix rejected: CR = {cr:.4} exceeds the threshold {threshold:.2}")]
    Inconsistent { cr: f64, threshold: f64 },
    #[error("fuzzy geometric mean of an empty row")]
    EmptyRow,
    #[error("all defuzzified weights are zero")]
    DegenerateWeights,
    #[error("matrix line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("diagonal of row {0} must be JE")]
    BadDiagonal(usize),
    #[error(transparent)]
    It2(#[from] crate::it2::It2Error),
}

/// An interval type-2 trapezoidal fuzzy number on the 1-9 importance scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Judgment {
    pub umf: Trapezoid,
    pub lmf: Trapezoid,
}

impl Judgment {
    pub fn new(umf: Trapezoid, lmf: Trapezoid) -> Result<Self, FahpError> {
        if umf.a <= 0.0 || lmf.a <= 0.0 {
            return Err(FahpError::NonPositiveSupport);
        }
        Ok(Judgment { umf, lmf })
    }

    fn from_tuples(u: [f64; 5], l: [f64; 5]) -> Judgment {
        Judgment {
            umf: Trapezoid::new(u[0], u[1], u[2], u[3], u[4]).expect("scale tuples are valid"),
            lmf: Trapezoid::new(l[0], l[1], l[2], l[3], l[4]).expect("scale tuples are valid"),
        }
    }
}

/// Linguistic importance scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleLabel {
    JustEqual,
    WeaklyImportant,
    BetweenWeaklyStrongly,
    StronglyImportant,
    BetweenStronglyVeryStrongly,
    VeryStronglyImportant,
    BetweenVeryStronglyAbsolutely,
    AbsolutelyImportant,
}

impl ScaleLabel {
    pub const ALL: [ScaleLabel; 8] = [
        ScaleLabel::JustEqual,
        ScaleLabel::WeaklyImportant,
        ScaleLabel::BetweenWeaklyStrongly,
        ScaleLabel::StronglyImportant,
        ScaleLabel::BetweenStronglyVeryStrongly,
        ScaleLabel::VeryStronglyImportant,
        ScaleLabel::BetweenVeryStronglyAbsolutely,
        ScaleLabel::AbsolutelyImportant,
    ];

    pub fn short(self) -> &'static str {
        match self {
            ScaleLabel::JustEqual => "JE",
            ScaleLabel::WeaklyImportant => "WI",
            ScaleLabel::BetweenWeaklyStrongly => "BWSI",
            ScaleLabel::StronglyImportant => "SI",
            ScaleLabel::BetweenStronglyVeryStrongly => "BSVI",
            ScaleLabel::VeryStronglyImportant => "VSI",
            ScaleLabel::BetweenVeryStronglyAbsolutely => "BVAI",
            ScaleLabel::AbsolutelyImportant => "AI",
        }
    }

    /// The trapezoidal interval type-2 number for this label.
    pub fn judgment(self) -> Judgment {
        match self {
            ScaleLabel::JustEqual => {
                Judgment::from_tuples([1.0, 1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0, 0.8])
            }
            ScaleLabel::WeaklyImportant => {
                Judgment::from_tuples([1.0, 2.0, 3.0, 4.0, 1.0], [1.4, 2.4, 2.6, 3.6, 0.8])
            }
            ScaleLabel::BetweenWeaklyStrongly => {
                Judgment::from_tuples([2.0, 3.0, 4.0, 5.0, 1.0], [2.4, 3.4, 3.6, 4.6, 0.8])
            }
            ScaleLabel::StronglyImportant => {
                Judgment::from_tuples([3.0, 4.0, 5.0, 6.0, 1.0], [3.4, 4.4, 4.6, 5.6, 0.8])
            }
            ScaleLabel::BetweenStronglyVeryStrongly => {
                Judgment::from_tuples([4.0, 5.0, 6.0, 7.0, 1.0], [4.4, 5.4, 5.6, 6.6, 0.8])
            }
            ScaleLabel::VeryStronglyImportant => {
                Judgment::from_tuples([5.0, 6.0, 7.0, 8.0, 1.0], [5.4, 6.4, 6.6, 7.6, 0.8])
            }
            ScaleLabel::BetweenVeryStronglyAbsolutely => {
                Judgment::from_tuples([6.0, 7.0, 8.0, 9.0, 1.0], [6.4, 7.4, 7.6, 8.6, 0.8])
            }
            ScaleLabel::AbsolutelyImportant => {
                Judgment::from_tuples([7.0, 8.0, 9.0, 9.0, 1.0], [7.4, 8.4, 8.6, 9.0, 0.8])
            }
        }
    }
}

impl FromStr for ScaleLabel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "JE" => Ok(ScaleLabel::JustEqual),
            "WI" => Ok(ScaleLabel::WeaklyImportant),
            "BWSI" => Ok(ScaleLabel::BetweenWeaklyStrongly),
            "SI" => Ok(ScaleLabel::StronglyImportant),
            "BSVI" => Ok(ScaleLabel::BetweenStronglyVeryStrongly),
            "VSI" => Ok(ScaleLabel::VeryStronglyImportant),
            "BVAI" => Ok(ScaleLabel::BetweenVeryStronglyAbsolutely),
            "AI" => Ok(ScaleLabel::AbsolutelyImportant),
            _ => Err(()),
        }
    }
}

/// Reciprocal judgment: both trapezoids are inverted and reversed, heights kept.
pub fn reciprocal(j: &Judgment) -> Result<Judgment, FahpError> {
    if j.umf.a <= 0.0 || j.lmf.a <= 0.0 {
        return Err(FahpError::NonPositiveSupport);
    }
    let flip = |t: &Trapezoid| Trapezoid {
        a: 1.0 / t.d,
        b: 1.0 / t.c,
        c: 1.0 / t.b,
        d: 1.0 / t.a,
        h: t.h,
    };
    Ok(Judgment { umf: flip(&j.umf), lmf: flip(&j.lmf) })
}

fn dtrat_part(t: &Trapezoid) -> f64 {
    ((t.d - t.a) + (t.h * t.b - t.a) + (t.h * t.c - t.a)) / 4.0 + t.a
}

/// Crisp value of a trapezoidal interval type-2 number: the mean of the
/// left-anchored averages of the upper and lower trapezoids.
pub fn dtrat(j: &Judgment) -> f64 {
    (dtrat_part(&j.umf) + dtrat_part(&j.lmf)) / 2.0
}

/// Pairwise comparison matrix stored as its upper triangle (diagonal included);
/// the lower triangle is always derived by reciprocity.
#[derive(Debug, Clone)]
pub struct ComparisonMatrix {
    criteria: Vec<String>,
    /// `upper[i][k]` is the judgment for cell `(i, i + k)`.
    upper: Vec<Vec<Judgment>>,
}

impl ComparisonMatrix {
    pub fn from_upper(criteria: Vec<String>, upper: Vec<Vec<Judgment>>) -> Result<Self, FahpError> {
        let n = criteria.len();
        if n == 0 {
            return Err(FahpError::Empty);
        }
        if upper.len() != n {
            return Err(FahpError::Parse {
                line: 0,
                message: format!("expected {n} rows, got {}", upper.len()),
            });
        }
        let je = ScaleLabel::JustEqual.judgment();
        for (i, row) in upper.iter().enumerate() {
            if row.len() != n - i {
                return Err(FahpError::Parse {
                    line: 0,
                    message: format!("row {} must have {} cells, got {}", i + 1, n - i, row.len()),
                });
            }
            if row[0] != je {
                return Err(FahpError::BadDiagonal(i + 1));
            }
        }
        Ok(ComparisonMatrix { criteria, upper })
    }

    pub fn order(&self) -> usize {
        self.criteria.len()
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    /// Judgment at `(i, j)`; the lower triangle is the exact reciprocal of the
    /// upper one.
    pub fn cell(&self, i: usize, j: usize) -> Judgment {
        if i <= j {
            self.upper[i][j - i]
        } else {
            reciprocal(&self.upper[j][i - j]).expect("scale judgments have positive support")
        }
    }

    /// Replace the judgment at upper-triangle cell `(i, j)`, `i < j`, with its
    /// reciprocal. Used to build perturbed matrices in consistency tests.
    pub fn flip_to_reciprocal(&self, i: usize, j: usize) -> Result<ComparisonMatrix, FahpError> {
        assert!(i < j && j < self.order(), "flip must target a strict upper cell");
        let mut upper = self.upper.clone();
        upper[i][j - i] = reciprocal(&upper[i][j - i])?;
        Ok(ComparisonMatrix { criteria: self.criteria.clone(), upper })
    }

    /// The bundled expert matrix over the seven pollutants.
    pub fn default_matrix() -> ComparisonMatrix {
        parse_matrix(DEFAULT_MATRIX_TEXT).expect("embedded default matrix must be valid")
    }
}

/// Parse the upper-triangle matrix format: an `order:` line naming the
/// criteria, then one row per criterion from the diagonal rightwards.
/// Cells are scale labels, or `1/<label>` for reciprocal judgments.
pub fn parse_matrix(text: &str) -> Result<ComparisonMatrix, FahpError> {
    let mut criteria: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<Judgment>> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("order:") {
            if criteria.is_some() {
                return Err(FahpError::Parse {
                    line: line_no,
                    message: "duplicate order line".to_string(),
                });
            }
            criteria = Some(rest.split_whitespace().map(str::to_string).collect());
            continue;
        }
        let Some((_, cells)) = line.split_once(':') else {
            return Err(FahpError::Parse {
                line: line_no,
                message: "expected `<criterion>: <cells>`".to_string(),
            });
        };
        let mut row = Vec::new();
        for token in cells.split_whitespace() {
            row.push(parse_cell(token).ok_or_else(|| FahpError::Parse {
                line: line_no,
                message: format!("unknown judgment label {token:?}"),
            })?);
        }
        rows.push(row);
    }
    let criteria = criteria.ok_or(FahpError::Parse {
        line: 0,
        message: "missing order line".to_string(),
    })?;
    ComparisonMatrix::from_upper(criteria, rows)
}

fn parse_cell(token: &str) -> Option<Judgment> {
    if let Some(rest) = token.strip_prefix("1/") {
        let label: ScaleLabel = rest.parse().ok()?;
        Some(reciprocal(&label.judgment()).expect("scale judgments have positive support"))
    } else {
        let label: ScaleLabel = token.parse().ok()?;
        Some(label.judgment())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Consistency {
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
}

/// Consistency of the defuzzified matrix.
///
/// Every cell of the upper triangle (diagonal included) is defuzzified with
/// [`dtrat`]; the strict lower triangle is then re-reciprocalized as
/// `1 / upper` so the crisp matrix is exactly reciprocal off the diagonal.
#[allow(clippy::needless_range_loop)] // triangular fill reads clearest with indices
pub fn consistency(m: &ComparisonMatrix) -> Result<Consistency, FahpError> {
    let n = m.order();
    if n > 10 {
        return Err(FahpError::OrderTooLarge(n));
    }
    let mut crisp = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = dtrat(&m.cell(i, j));
            crisp[i][j] = v;
            if i != j {
                crisp[j][i] = 1.0 / v;
            }
        }
    }
    let lambda_max = principal_eigenvalue(&crisp)?;
    let ci = if n <= 2 { 0.0 } else { (lambda_max - n as f64) / (n as f64 - 1.0) };
    let cr = if n <= 2 { 0.0 } else { ci / RANDOM_INDEX[n - 1] };
    Ok(Consistency { lambda_max, ci, cr })
}

/// Dominant eigenvalue by normalized power iteration, returned as the
/// Rayleigh quotient of the converged vector.
fn principal_eigenvalue(m: &[Vec<f64>]) -> Result<f64, FahpError> {
    let n = m.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..POWER_MAX_ITERATIONS {
        let w: Vec<f64> = m.iter().map(|row| dot(row, &v)).collect();
        let norm = dot(&w, &w).sqrt();
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < POWER_TOLERANCE {
            let mv: Vec<f64> = m.iter().map(|row| dot(row, &v)).collect();
            return Ok(dot(&v, &mv) / dot(&v, &v));
        }
    }
    Err(FahpError::NonConvergence(POWER_MAX_ITERATIONS))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Component-wise fuzzy geometric mean of a row of judgments; heights take
/// the row minimum.
pub fn fuzzy_geometric_mean(row: &[Judgment]) -> Result<Judgment, FahpError> {
    if row.is_empty() {
        return Err(FahpError::EmptyRow);
    }
    let exp = 1.0 / row.len() as f64;
    let mut acc_u = [1.0f64; 4];
    let mut acc_l = [1.0f64; 4];
    let mut h_u: f64 = 1.0;
    let mut h_l: f64 = 1.0;
    for j in row {
        if j.umf.a <= 0.0 || j.lmf.a <= 0.0 {
            return Err(FahpError::NonPositiveSupport);
        }
        for (acc, t) in [(&mut acc_u, &j.umf), (&mut acc_l, &j.lmf)] {
            acc[0] *= t.a;
            acc[1] *= t.b;
            acc[2] *= t.c;
            acc[3] *= t.d;
        }
        h_u = h_u.min(j.umf.h);
        h_l = h_l.min(j.lmf.h);
    }
    let powed = |acc: [f64; 4], h: f64| {
        Trapezoid::new(acc[0].powf(exp), acc[1].powf(exp), acc[2].powf(exp), acc[3].powf(exp), h)
    };
    Ok(Judgment { umf: powed(acc_u, h_u)?, lmf: powed(acc_l, h_l)? })
}

/// Crisp criterion weights, normalized to sum to one.
#[derive(Debug, Clone)]
pub struct WeightVector {
    entries: Vec<(String, f64)>,
}

impl WeightVector {
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, w)| *w)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, w)| *w)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, w) in &self.entries {
            writeln!(f, "{name:7} {w:.6}")?;
        }
        Ok(())
    }
}

pub struct WeightOptions {
    pub cr_threshold: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        WeightOptions { cr_threshold: DEFAULT_CR_THRESHOLD }
    }
}

/// Buckley-style weight extraction: row fuzzy geometric means, fuzzy division
/// by their sum, defuzzification and normalization. The matrix must pass the
/// consistency gate first.
pub fn compute_weights(
    m: &ComparisonMatrix,
    options: &WeightOptions,
) -> Result<(WeightVector, Consistency), FahpError> {
    let cons = consistency(m)?;
    if cons.cr > options.cr_threshold {
        return Err(FahpError::Inconsistent { cr: cons.cr, threshold: options.cr_threshold });
    }
    let n = m.order();
    let mut means = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<Judgment> = (0..n).map(|j| m.cell(i, j)).collect();
        means.push(fuzzy_geometric_mean(&row)?);
    }
    let mut sum_u = [0.0f64; 4];
    let mut sum_l = [0.0f64; 4];
    for g in &means {
        for (sum, t) in [(&mut sum_u, &g.umf), (&mut sum_l, &g.lmf)] {
            sum[0] += t.a;
            sum[1] += t.b;
            sum[2] += t.c;
            sum[3] += t.d;
        }
    }
    // (sum)^-1 has reversed reciprocal components; multiplying component-wise
    // pairs the smallest numerator with the largest denominator.
    let mut crisp = Vec::with_capacity(n);
    for g in &means {
        let w = Judgment {
            umf: Trapezoid::new(
                g.umf.a / sum_u[3],
                g.umf.b / sum_u[2],
                g.umf.c / sum_u[1],
                g.umf.d / sum_u[0],
                g.umf.h,
            )?,
            lmf: Trapezoid::new(
                g.lmf.a / sum_l[3],
                g.lmf.b / sum_l[2],
                g.lmf.c / sum_l[1],
                g.lmf.d / sum_l[0],
                g.lmf.h,
            )?,
        };
        crisp.push(dtrat(&w));
    }
    let total: f64 = crisp.iter().sum();
    if total <= 0.0 {
        return Err(FahpError::DegenerateWeights);
    }
    let entries = m
        .criteria
        .iter()
        .zip(&crisp)
        .map(|(name, w)| (name.clone(), w / total))
        .collect();
    Ok((WeightVector { entries }, cons))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn je_is_self_reciprocal() {
        let je = ScaleLabel::JustEqual.judgment();
        assert_eq!(reciprocal(&je).unwrap(), je);
    }

    #[test]
    fn reciprocal_of_wi_upper() {
        let wi = ScaleLabel::WeaklyImportant.judgment();
        let r = reciprocal(&wi).unwrap();
        assert!((r.umf.a - 0.25).abs() < 1e-15);
        assert!((r.umf.b - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.umf.c - 0.5).abs() < 1e-15);
        assert!((r.umf.d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_is_an_involution_on_the_scale() {
        for label in ScaleLabel::ALL {
            let j = label.judgment();
            let back = reciprocal(&reciprocal(&j).unwrap()).unwrap();
            for (x, y) in [
                (j.umf.a, back.umf.a),
                (j.umf.b, back.umf.b),
                (j.umf.c, back.umf.c),
                (j.umf.d, back.umf.d),
                (j.lmf.a, back.lmf.a),
                (j.lmf.d, back.lmf.d),
            ] {
                assert!((x - y).abs() < 1e-12, "{label:?}");
            }
        }
    }

    #[test]
    fn reciprocal_rejects_zero_support() {
        let j = Judgment {
            umf: Trapezoid::new(0.0, 1.0, 2.0, 3.0, 1.0).unwrap(),
            lmf: Trapezoid::new(0.5, 1.0, 2.0, 2.5, 0.8).unwrap(),
        };
        assert!(matches!(reciprocal(&j), Err(FahpError::NonPositiveSupport)));
    }

    #[test]
    fn dtrat_reference_values() {
        assert!((dtrat(&ScaleLabel::JustEqual.judgment()) - 0.95).abs() < 1e-12);
        assert!((dtrat(&ScaleLabel::WeaklyImportant.judgment()) - 2.375).abs() < 1e-12);
    }

    #[test]
    fn dtrat_of_singleton_is_the_point() {
        let k = 3.7;
        let t = Trapezoid::new(k, k, k, k, 1.0).unwrap();
        let j = Judgment { umf: t, lmf: t };
        assert!((dtrat(&j) - k).abs() < 1e-12);
    }

    #[test]
    fn dtrat_is_monotone_across_the_scale() {
        let mut prev = f64::NEG_INFINITY;
        for label in ScaleLabel::ALL {
            let v = dtrat(&label.judgment());
            assert!(v > prev, "{label:?}: {v} <= {prev}");
            prev = v;
        }
    }

    fn all_je(n: usize) -> ComparisonMatrix {
        let je = ScaleLabel::JustEqual.judgment();
        let rows = (0..n).map(|i| vec![je; n - i]).collect();
        ComparisonMatrix::from_upper((0..n).map(|i| format!("c{i}")).collect(), rows).unwrap()
    }

    #[test]
    fn all_je_matrix_passes_the_consistency_gate() {
        // The defuzzified all-JE matrix has 0.95 on the diagonal, so its
        // dominant eigenvalue sits slightly below n; it is accepted as
        // consistent but lambda_max is not exactly n.
        let c = consistency(&all_je(3)).unwrap();
        assert!(c.cr < DEFAULT_CR_THRESHOLD);
        assert!((c.lambda_max - 2.950292340682).abs() < 1e-9, "{}", c.lambda_max);
        assert!(c.ci < 0.0);
    }

    #[test]
    fn random_index_lookup() {
        assert_eq!(RANDOM_INDEX[6], 1.32);
    }

    #[test]
    fn table_matrix_is_consistent() {
        let m = ComparisonMatrix::default_matrix();
        let c = consistency(&m).unwrap();
        assert!(c.cr < 0.10, "CR = {}", c.cr);
        assert!((c.lambda_max - 7.750145165060).abs() < 1e-9, "{}", c.lambda_max);
        assert!((c.cr - 0.094715298619).abs() < 1e-9, "{}", c.cr);
    }

    #[test]
    fn geometric_mean_of_identical_judgments_is_identity() {
        let si = ScaleLabel::StronglyImportant.judgment();
        let g = fuzzy_geometric_mean(&[si, si, si]).unwrap();
        for (x, y) in [(g.umf.a, si.umf.a), (g.umf.d, si.umf.d), (g.lmf.b, si.lmf.b)] {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_mean_pairs_components() {
        let wi = ScaleLabel::WeaklyImportant.judgment();
        let r = reciprocal(&wi).unwrap();
        let g = fuzzy_geometric_mean(&[wi, r]).unwrap();
        assert!((g.umf.a - (1.0f64 * 0.25).sqrt()).abs() < 1e-12);
        assert!((g.umf.b - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((g.umf.c - (3.0f64 * 0.5).sqrt()).abs() < 1e-12);
        assert!((g.umf.d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_mean_of_empty_row_errors() {
        assert!(matches!(fuzzy_geometric_mean(&[]), Err(FahpError::EmptyRow)));
    }

    #[test]
    fn one_by_one_matrix_weight_is_unity() {
        let (w, c) = compute_weights(&all_je(1), &WeightOptions::default()).unwrap();
        assert_eq!(w.entries().len(), 1);
        assert!((w.entries()[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(c.ci, 0.0);
    }

    #[test]
    fn default_matrix_weights_sum_to_one() {
        let (w, _) = compute_weights(&ComparisonMatrix::default_matrix(), &WeightOptions::default())
            .unwrap();
        let sum: f64 = w.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_matrix_weights_follow_the_dominance_order() {
        let (w, _) = compute_weights(&ComparisonMatrix::default_matrix(), &WeightOptions::default())
            .unwrap();
        let vals: Vec<f64> = w.values().collect();
        for pair in vals.windows(2) {
            assert!(pair[0] > pair[1], "ranking violated: {vals:?}");
        }
        assert_eq!(w.entries()[0].0, "PM2.5");
        assert_eq!(w.entries()[6].0, "NH3");
    }

    #[test]
    fn consistent_crisp_matrix_recovers_weights() {
        // Entries w_i / w_j as degenerate numbers; the pipeline must return w.
        let w = [0.40, 0.25, 0.20, 0.10, 0.05];
        let n = w.len();
        let singleton = |v: f64| Judgment {
            umf: Trapezoid::new(v, v, v, v, 1.0).unwrap(),
            lmf: Trapezoid::new(v, v, v, v, 0.8).unwrap(),
        };
        let rows: Vec<Vec<Judgment>> =
            (0..n).map(|i| (i..n).map(|j| singleton(w[i] / w[j])).collect()).collect();
        let m = ComparisonMatrix::from_upper(
            (0..n).map(|i| format!("c{i}")).collect(),
            rows,
        );
        // the diagonal of a consistent crisp matrix is exactly JE up to heights
        let m = match m {
            Ok(m) => m,
            Err(FahpError::BadDiagonal(_)) => panic!("diagonal must parse as JE"),
            Err(e) => panic!("{e}"),
        };
        let (got, _) = compute_weights(&m, &WeightOptions::default()).unwrap();
        for (expected, (_, actual)) in w.iter().zip(got.entries()) {
            assert!((expected - actual).abs() < 1e-6, "{expected} vs {actual}");
        }
    }

    #[test]
    fn inconsistent_matrix_is_rejected() {
        let m = ComparisonMatrix::default_matrix();
        // flipping the strongest judgment wrecks consistency
        let flipped = m.flip_to_reciprocal(0, 5).unwrap();
        let err = compute_weights(&flipped, &WeightOptions::default()).unwrap_err();
        assert!(matches!(err, FahpError::Inconsistent { .. }), "{err}");
    }

    #[test]
    fn matrix_file_roundtrip_of_default() {
        let m = ComparisonMatrix::default_matrix();
        assert_eq!(m.order(), 7);
        assert_eq!(m.criteria()[0], "PM2.5");
        // reciprocity holds exactly at the fuzzy level
        let c01 = m.cell(0, 1);
        let c10 = m.cell(1, 0);
        assert!((c01.umf.a * c10.umf.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_rejects_unknown_label() {
        let text = "order: a b\na: JE XX\nb: JE\n";
        assert!(matches!(parse_matrix(text), Err(FahpError::Parse { line: 2, .. })));
    }

    #[test]
    fn order_above_ten_rejected() {
        let m = all_je(11);
        assert!(matches!(consistency(&m), Err(FahpError::OrderTooLarge(11))));
    }
}
