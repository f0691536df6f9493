//! Discretized adiabatic schedules for the local intermediate terms.
//!
//! A schedule holds `f_j(i)` for the `M = 2n` local terms (ordered
//! `X_0, Z_0, X_1, Z_1, …`) at grid points `i = 0..=N`, `s = i / N`. The
//! driver and problem weights are fixed to `1 - s` and `s`.

use std::fmt;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpoError};
use crate::pauli::Axis;

/// Slack allowed on the slew constraint.
pub const SLEW_TOLERANCE: f64 = 1e-12;

/// Number of intermediate terms for `n` qubits.
pub fn local_term_count(n_qubits: usize) -> usize {
    2 * n_qubits
}

/// `(qubit, axis)` of local term `j`.
pub fn local_term(j: usize) -> (usize, Axis) {
    (j / 2, if j % 2 == 0 { Axis::X } else { Axis::Z })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    n_qubits: usize,
    intervals: usize,
    values: Vec<Vec<f64>>,
    f_bound: f64,
    slew: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `f_j(0) = f_j(N) = 0`.
    Boundary,
    /// `|f_j(i)| <= f_bound`.
    Amplitude,
    /// `|f_j(i+1) - f_j(i)| <= slew / N`.
    Slew,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::Boundary => "boundary",
            Constraint::Amplitude => "amplitude",
            Constraint::Slew => "slew",
        };
        f.write_str(s)
    }
}

/// One failed constraint. For slew violations `index` is the left point `i`
/// of the pair `(i, i + 1)`; `magnitude` is the amount by which the bound is
/// exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub term: usize,
    pub index: usize,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violation on f_{} at i={} (excess {:.3e})",
            self.constraint,
            self.term + 2,
            self.index,
            self.magnitude
        )
    }
}

impl Schedule {
    /// Wraps a coefficient table (`M` rows of `N + 1` values). Only the shape
    /// is checked; use [`Schedule::validate`] for the constraints.
    pub fn from_table(
        n_qubits: usize,
        values: Vec<Vec<f64>>,
        f_bound: f64,
        slew: f64,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(SpoError::InvalidArgument("schedule needs at least one qubit".into()));
        }
        let m = local_term_count(n_qubits);
        if values.len() != m {
            return Err(SpoError::InvalidArgument(format!(
                "expected {m} schedule rows for {n_qubits} qubits, got {}",
                values.len()
            )));
        }
        let points = values[0].len();
        if points < 3 {
            return Err(SpoError::InvalidArgument("schedule needs N >= 2".into()));
        }
        if values.iter().any(|row| row.len() != points) {
            return Err(SpoError::InvalidArgument("ragged schedule table".into()));
        }
        check_limits(f_bound, slew)?;
        Ok(Self {
            n_qubits,
            intervals: points - 1,
            values,
            f_bound,
            slew,
        })
    }

    /// The plain linear interpolation: every intermediate coefficient is zero.
    pub fn linear(n_qubits: usize, intervals: usize, f_bound: f64, slew: f64) -> Result<Self> {
        if intervals < 2 {
            return Err(SpoError::InvalidArgument(format!(
                "need at least 2 grid intervals, got {intervals}"
            )));
        }
        Self::from_table(
            n_qubits,
            vec![vec![0.0; intervals + 1]; local_term_count(n_qubits)],
            f_bound,
            slew,
        )
    }

    /// `f_j(i) = s (1 - s) c_j / norm(c)` with `s = i / N`.
    ///
    /// Rejected, not clipped, when the scaled envelope breaks the amplitude or
    /// slew cap.
    pub fn quadratic_random(
        coeffs: &PerturbationCoefficients,
        intervals: usize,
        f_bound: f64,
        slew: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        coeffs.check()?;
        if intervals < 2 {
            return Err(SpoError::InvalidArgument(format!(
                "need at least 2 grid intervals, got {intervals}"
            )));
        }
        let divisor = normalization.divisor(&coeffs.values);
        let n = intervals as f64;
        let values = coeffs
            .values
            .iter()
            .map(|&c| {
                let w = c / divisor;
                (0..=intervals)
                    .map(|i| {
                        let s = i as f64 / n;
                        // s and (N - i) are exact zeros at the two ends
                        (s * ((intervals - i) as f64 / n)) * w
                    })
                    .collect()
            })
            .collect();
        let sched = Self::from_table(coeffs.n_qubits, values, f_bound, slew)?;
        if let Some(v) = sched.validate().first() {
            return Err(SpoError::ScheduleRejected(v.to_string()));
        }
        Ok(sched)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Grid interval count `N`; grid points run `0..=N`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of intermediate terms `M`.
    pub fn n_terms(&self) -> usize {
        self.values.len()
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 / self.intervals as f64
    }

    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    pub fn slew(&self) -> f64 {
        self.slew
    }

    /// Largest allowed change between neighbouring grid points, `slew * ds`.
    pub fn max_step(&self) -> f64 {
        self.slew * self.ds()
    }

    pub fn value(&self, term: usize, i: usize) -> f64 {
        self.values[term][i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// All intermediate coefficients at grid point `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i]).collect()
    }

    pub fn set(&mut self, term: usize, i: usize, value: f64) {
        self.values[term][i] = value;
    }

    pub fn is_linear(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0)
    }

    /// Copy with different caps; values are kept as they are.
    pub fn with_limits(&self, f_bound: f64, slew: f64) -> Result<Self> {
        check_limits(f_bound, slew)?;
        Ok(Self {
            f_bound,
            slew,
            ..self.clone()
        })
    }

    /// Largest `|f_j(i) - other_j(i)|`.
    pub fn max_abs_difference(&self, other: &Schedule) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Moves the table onto the feasible set in place: boundary zeros, the
    /// amplitude box, the slew tent around both ends, then alternating
    /// forward/backward slew clipping until nothing changes.
    pub fn project(&mut self) {
        let last = self.intervals;
        let step = self.max_step();
        let cap = self.f_bound;
        for row in &mut self.values {
            row[0] = 0.0;
            row[last] = 0.0;
            for (i, v) in row.iter_mut().enumerate().take(last).skip(1) {
                let reach = (step * i.min(last - i) as f64).min(cap);
                *v = if v.is_finite() { v.clamp(-reach, reach) } else { 0.0 };
            }
            for _sweep in 0..last + 2 {
                let mut changed = false;
                for i in 1..last {
                    let c = row[i].clamp(row[i - 1] - step, row[i - 1] + step);
                    changed |= c != row[i];
                    row[i] = c;
                }
                for i in (1..last).rev() {
                    let c = row[i].clamp(row[i + 1] - step, row[i + 1] + step);
                    changed |= c != row[i];
                    row[i] = c;
                }
                if !changed {
                    break;
                }
            }
        }
    }

    /// All constraint violations, in (term, index) order per family.
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with_tolerance(SLEW_TOLERANCE)
    }

    pub fn validate_with_tolerance(&self, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let last = self.intervals;
        let step = self.max_step();
        for (j, row) in self.values.iter().enumerate() {
            for i in [0, last] {
                if row[i] != 0.0 {
                    out.push(Violation {
                        constraint: Constraint::Boundary,
                        term: j,
                        index: i,
                        magnitude: row[i].abs(),
                    });
                }
            }
            for (i, &v) in row.iter().enumerate() {
                let excess = v.abs() - self.f_bound;
                if excess > tol || !v.is_finite() {
                    out.push(Violation {
                        constraint: Constraint::Amplitude,
                        term: j,
                        index: i,
                        magnitude: excess,
                    });
                }
            }
            for i in 0..last {
                let excess = (row[i + 1] - row[i]).abs() - step;
                if excess > tol {
                    out.push(Violation {
                        constraint: Constraint::Slew,
                        term: j,
                        index: i,
                        magnitude: excess,
                    });
                }
            }
        }
        out
    }

    /// CSV table `i,s,f_2,…,f_{M+1}` with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,s");
        for j in 0..self.n_terms() {
            out.push_str(&format!(",f_{}", j + 2));
        }
        out.push('\n');
        for i in 0..=self.intervals {
            out.push_str(&format!("{i},{}", sig9(self.s(i))));
            for row in &self.values {
                out.push(',');
                out.push_str(&sig9(row[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`Schedule::to_csv`]. The qubit count is
    /// inferred from the column count.
    pub fn from_csv(text: &str, f_bound: f64, slew: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| SpoError::parse("schedule CSV header", e.to_string()))?
            .clone();
        if headers.len() < 4 || &headers[0] != "i" || &headers[1] != "s" {
            return Err(SpoError::parse(
                "schedule CSV header",
                "expected i,s,f_2,... columns",
            ));
        }
        let m = headers.len() - 2;
        if m % 2 != 0 {
            return Err(SpoError::parse(
                "schedule CSV header",
                format!("odd number of term columns ({m})"),
            ));
        }
        for (k, name) in headers.iter().skip(2).enumerate() {
            if name != format!("f_{}", k + 2) {
                return Err(SpoError::parse(
                    "schedule CSV header",
                    format!("column {} should be f_{}, found {name}", k + 3, k + 2),
                ));
            }
        }
        let mut values = vec![Vec::new(); m];
        for (row_no, record) in reader.records().enumerate() {
            let line = row_no + 2;
            let record =
                record.map_err(|e| SpoError::parse(format!("schedule CSV line {line}"), e.to_string()))?;
            let i: usize = record[0].parse().map_err(|e| {
                SpoError::parse(format!("schedule CSV line {line}, field i"), format!("{e}"))
            })?;
            if i != row_no {
                return Err(SpoError::parse(
                    format!("schedule CSV line {line}, field i"),
                    format!("expected grid index {row_no}, found {i}"),
                ));
            }
            for (k, row) in values.iter_mut().enumerate() {
                let field = &record[k + 2];
                let v: f64 = field.trim().parse().map_err(|_| {
                    SpoError::parse(
                        format!("schedule CSV line {line}, field f_{}", k + 2),
                        format!("not a number: {field:?}"),
                    )
                })?;
                row.push(v);
            }
        }
        Self::from_table(m / 2, values, f_bound, slew)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Schedule = serde_json::from_str(text)
            .map_err(|e| SpoError::parse("schedule JSON", format!("line {} column {}: {e}", e.line(), e.column())))?;
        Self::from_table(s.n_qubits, s.values, s.f_bound, s.slew)
    }

    /// Reads a schedule from `.json` (exact) or `.csv` (9 digits; the caps
    /// must then be supplied).
    pub fn load(path: impl AsRef<Path>, caps: Option<(f64, f64)>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SpoError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "csv") {
            let (f_bound, slew) = caps.ok_or_else(|| {
                SpoError::InvalidArgument("CSV schedules need explicit f_bound and slew".into())
            })?;
            Self::from_csv(&text, f_bound, slew)
        } else {
            let s = Self::from_json(&text)?;
            match caps {
                Some((f_bound, slew)) => s.with_limits(f_bound, slew),
                None => Ok(s),
            }
        }
    }
}

fn check_limits(f_bound: f64, slew: f64) -> Result<()> {
    if !(f_bound >= 0.0 && f_bound.is_finite()) || !(slew >= 0.0 && slew.is_finite()) {
        return Err(SpoError::InvalidArgument(format!(
            "amplitude and slew caps must be finite and nonnegative (got {f_bound}, {slew})"
        )));
    }
    Ok(())
}

/// Nine significant digits in scientific notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.8e}")
    }
}

/// Sign pattern imposed on sampled perturbation coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRestriction {
    /// Uniform on `[-1, 1)`.
    Unrestricted,
    /// Uniform on `(0, 1]`.
    AllPositive,
    /// Uniform on `[-1, 0)`.
    AllNegative,
    /// `X` coefficients positive, `Z` coefficients negative.
    XPosZNeg,
    /// `X` coefficients negative, `Z` coefficients positive.
    XNegZPos,
}

impl SignRestriction {
    pub const ALL: [SignRestriction; 5] = [
        SignRestriction::Unrestricted,
        SignRestriction::AllPositive,
        SignRestriction::AllNegative,
        SignRestriction::XPosZNeg,
        SignRestriction::XNegZPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignRestriction::Unrestricted => "unrestricted",
            SignRestriction::AllPositive => "all_positive",
            SignRestriction::AllNegative => "all_negative",
            SignRestriction::XPosZNeg => "x_pos_z_neg",
            SignRestriction::XNegZPos => "x_neg_z_pos",
        }
    }

    fn sign_for(self, axis: Axis) -> Option<f64> {
        match (self, axis) {
            (SignRestriction::Unrestricted, _) => None,
            (SignRestriction::AllPositive, _) => Some(1.0),
            (SignRestriction::AllNegative, _) => Some(-1.0),
            (SignRestriction::XPosZNeg, Axis::X) | (SignRestriction::XNegZPos, Axis::Z) => Some(1.0),
            (SignRestriction::XPosZNeg, _) | (SignRestriction::XNegZPos, _) => Some(-1.0),
        }
    }
}

impl std::str::FromStr for SignRestriction {
    type Err = SpoError;

    fn from_str(s: &str) -> Result<Self> {
        SignRestriction::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| SpoError::InvalidArgument(format!("unknown sign restriction {s:?}")))
    }
}

impl fmt::Display for SignRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Divisor applied to the random coefficients of the quadratic envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `||c||^2`.
    #[default]
    SquaredNorm,
    /// `||c||`.
    Norm,
}

impl Normalization {
    fn divisor(self, c: &[f64]) -> f64 {
        let sq: f64 = c.iter().map(|v| v * v).sum();
        match self {
            Normalization::SquaredNorm => sq,
            Normalization::Norm => sq.sqrt(),
        }
    }
}

/// Random weights `c_j` for the local terms of a quadratic perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCoefficients {
    n_qubits: usize,
    values: Vec<f64>,
    restriction: SignRestriction,
}

impl PerturbationCoefficients {
    pub fn new(n_qubits: usize, values: Vec<f64>, restriction: SignRestriction) -> Result<Self> {
        let c = Self {
            n_qubits,
            values,
            restriction,
        };
        c.check()?;
        Ok(c)
    }

    /// I.i.d. uniform draws on the interval allowed by `restriction`.
    pub fn sample(n_qubits: usize, restriction: SignRestriction, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..local_term_count(n_qubits))
            .map(|j| {
                let u: f64 = rng.random(); // [0, 1)
                match restriction.sign_for(local_term(j).1) {
                    None => 2.0 * u - 1.0,
                    Some(sign) => sign * (1.0 - u),
                }
            })
            .collect();
        Self {
            n_qubits,
            values,
            restriction,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn restriction(&self) -> SignRestriction {
        self.restriction
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != local_term_count(self.n_qubits) {
            return Err(SpoError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                local_term_count(self.n_qubits),
                self.values.len()
            )));
        }
        if self.values.iter().all(|&v| v == 0.0) {
            return Err(SpoError::InvalidArgument("all perturbation coefficients are zero".into()));
        }
        for (j, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SpoError::InvalidArgument(format!("coefficient {j} is not finite")));
            }
            if let Some(sign) = self.restriction.sign_for(local_term(j).1) {
                if v * sign <= 0.0 {
                    return Err(SpoError::InvalidArgument(format!(
                        "coefficient {j} = {v} breaks the {} restriction",
                        self.restriction
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_schedule_is_zero_and_valid() {
        let s = Schedule::linear(2, 50, 1.0, 2.5).unwrap();
        assert_eq!(s.n_terms(), 4);
        assert_eq!(s.rows()[0].len(), 51);
        assert!(s.is_linear());
        assert!(s.validate().is_empty());
        assert!(Schedule::linear(2, 1, 1.0, 2.5).is_err());
        assert!(Schedule::linear(2, 10, -1.0, 2.5).is_err());
    }

    #[test]
    fn amplitude_violation_is_reported_once() {
        let mut s = Schedule::linear(1, 10, 1.0, 100.0).unwrap();
        s.set(0, 1, 1.1);
        let v = s.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint, Constraint::Amplitude);
        assert_eq!((v[0].term, v[0].index), (0, 1));
        assert!((v[0].magnitude - 0.1).abs() < 1e-12);
    }

    #[test]
    fn slew_violation_is_reported() {
        // max step 5 / 10 = 0.5 allows the ramp up but not the drop from f_bound
        let mut s = Schedule::linear(1, 10, 1.0, 5.0).unwrap();
        s.set(0, 1, 0.5);
        s.set(0, 2, 1.0);
        let v = s.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint, Constraint::Slew);
        assert_eq!((v[0].term, v[0].index), (0, 2));
        assert!((v[0].magnitude - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nonzero_boundary_is_reported() {
        let mut s = Schedule::linear(1, 4, 1.0, 100.0).unwrap();
        s.set(1, 4, 0.01);
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, Constraint::Boundary);
        assert_eq!(v[0].index, 4);
    }

    #[test]
    fn quadratic_envelope_single_qubit() {
        let c = PerturbationCoefficients::new(1, vec![1.0, 0.0], SignRestriction::Unrestricted).unwrap();
        let s = Schedule::quadratic_random(&c, 50, 1.0, 2.5, Normalization::SquaredNorm).unwrap();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert!((s.value(0, i) - x * (1.0 - x)).abs() < 1e-15);
            assert_eq!(s.value(1, i), 0.0);
        }
        assert_eq!(s.value(0, 25), 0.25);
        assert_eq!(s.value(0, 0), 0.0);
        assert_eq!(s.value(0, 50), 0.0);
    }

    #[test]
    fn quadratic_envelope_rejects_large_weights() {
        let c = PerturbationCoefficients::new(1, vec![0.01, 0.01], SignRestriction::AllPositive).unwrap();
        let err = Schedule::quadratic_random(&c, 50, 1.0, 2.5, Normalization::SquaredNorm).unwrap_err();
        assert!(matches!(err, SpoError::ScheduleRejected(_)));
        // the norm variant keeps it small enough
        assert!(Schedule::quadratic_random(&c, 50, 1.0, 2.5, Normalization::Norm).is_ok());
    }

    #[test]
    fn quadratic_envelope_slew_matches_finite_differences() {
        let c = PerturbationCoefficients::sample(3, SignRestriction::Unrestricted, 5);
        let s = Schedule::quadratic_random(&c, 40, 10.0, 10.0, Normalization::SquaredNorm).unwrap();
        let bound = c.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) / c.squared_norm();
        for j in 0..s.n_terms() {
            for i in 0..40 {
                let rate = (s.value(j, i + 1) - s.value(j, i)) / s.ds();
                // derivative of s(1-s) at the midpoint, times the weight
                let mid = (i as f64 + 0.5) / 40.0;
                let expect = c.values()[j] / c.squared_norm() * (1.0 - 2.0 * mid);
                assert!((rate - expect).abs() < 1e-12);
                assert!(rate.abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn sampling_respects_restrictions_and_seed() {
        for r in SignRestriction::ALL {
            let a = PerturbationCoefficients::sample(5, r, 42);
            assert_eq!(a, PerturbationCoefficients::sample(5, r, 42));
            assert!(a.check().is_ok(), "{r}");
            for (j, &v) in a.values().iter().enumerate() {
                assert!((-1.0..=1.0).contains(&v));
                let axis = local_term(j).1;
                match r {
                    SignRestriction::AllPositive => assert!(v > 0.0),
                    SignRestriction::AllNegative => assert!(v < 0.0),
                    SignRestriction::XPosZNeg => assert!(if axis == Axis::X { v > 0.0 } else { v < 0.0 }),
                    SignRestriction::XNegZPos => assert!(if axis == Axis::X { v < 0.0 } else { v > 0.0 }),
                    SignRestriction::Unrestricted => {}
                }
            }
        }
        assert!(PerturbationCoefficients::new(1, vec![0.0, 0.0], SignRestriction::Unrestricted).is_err());
        assert!(PerturbationCoefficients::new(1, vec![-0.5, 0.5], SignRestriction::AllPositive).is_err());
    }

    #[test]
    fn csv_round_trip_within_nine_digits() {
        let c = PerturbationCoefficients::sample(2, SignRestriction::AllPositive, 1);
        let s = Schedule::quadratic_random(&c, 20, 1.0, 2.5, Normalization::SquaredNorm).unwrap();
        let text = s.to_csv();
        assert!(text.starts_with("i,s,f_2,f_3,f_4,f_5\n"));
        assert_eq!(text.lines().count(), 22);
        let back = Schedule::from_csv(&text, 1.0, 2.5).unwrap();
        assert!(back.max_abs_difference(&s) < 1e-9);
        assert!(back.validate_with_tolerance(1e-8).is_empty());
    }

    #[test]
    fn csv_errors_name_line_and_field() {
        let text = "i,s,f_2,f_3\n0,0,0,0\n1,0.5,abc,0\n2,1,0,0\n";
        let msg = Schedule::from_csv(text, 1.0, 1.0).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("f_2"), "{msg}");
    }

    #[test]
    fn json_is_exact() {
        let c = PerturbationCoefficients::sample(2, SignRestriction::Unrestricted, 7);
        let s = Schedule::quadratic_random(&c, 10, 5.0, 5.0, Normalization::SquaredNorm).unwrap();
        assert_eq!(Schedule::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn projection_lands_on_the_feasible_set() {
        let mut s = Schedule::linear(2, 10, 0.3, 1.0).unwrap();
        for j in 0..4 {
            for i in 0..=10 {
                s.set(j, i, if (i + j) % 2 == 0 { 5.0 } else { -5.0 });
            }
        }
        s.project();
        assert!(s.validate().is_empty(), "{:?}", s.validate());
        let mut z = Schedule::linear(1, 6, 0.0, 2.0).unwrap();
        z.set(0, 3, 1.0);
        z.project();
        assert!(z.is_linear());
        // feasible input is a fixed point
        let mut q = Schedule::linear(1, 4, 1.0, 1.0).unwrap();
        q.set(0, 1, 0.25);
        q.set(0, 2, 0.1);
        let before = q.clone();
        q.project();
        assert_eq!(q, before);
    }
}
