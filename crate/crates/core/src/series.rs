//! Radii schedules, the measurement loop over parallel sets, sign screening
//! and the log-scale regression variables.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::distance::{dilate, distance_transform, squared_threshold, DistanceMap};
use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::minkowski::intrinsic_volumes;

/// Below this radius the pixel discretisation dominates the measurements.
pub const DEFAULT_MIN_RADIUS: f64 = 2.0;

/// Generator of a radii schedule, written in terms of `x = -log ε`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    /// `x_j = a0 + a·j`, `j = 0..n`.
    LogArithmetic { a0: f64, a: f64, n: usize },
    /// `x_j = c·j^δ`, `j = 1..=n`.
    Power { c: f64, delta: f64, n: usize },
    /// The first `n` radii at which a lattice disk and a Euclidean disk have
    /// equal area.
    EqualArea { n: usize },
    Explicit(Vec<f64>),
}

impl ScheduleKind {
    /// Log step 0.02 over `x ∈ [-4.5, -1]`, i.e. radii from e^4.5 down to e.
    pub fn default_preset() -> Self {
        Self::log_range(-4.5, -1.0, 0.02)
    }

    /// Evenly spaced `x` from `x_first` to `x_last` (inclusive, up to rounding).
    pub fn log_range(x_first: f64, x_last: f64, step: f64) -> Self {
        let n = ((x_last - x_first) / step).round() as usize + 1;
        ScheduleKind::LogArithmetic {
            a0: x_first,
            a: step,
            n,
        }
    }
}

/// Radii sorted strictly decreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiiSchedule {
    pub kind: ScheduleKind,
    radii: Vec<f64>,
}

impl RadiiSchedule {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `x_j = -log ε_j`.
    pub fn xs(&self) -> Vec<f64> {
        self.radii.iter().map(|e| -e.ln()).collect()
    }

    /// Keeps only radii in `[lo, hi]`.
    pub fn truncated(&self, lo: f64, hi: f64) -> Result<Self> {
        let radii: Vec<f64> = self
            .radii
            .iter()
            .copied()
            .filter(|&e| e >= lo && e <= hi)
            .collect();
        if radii.is_empty() {
            return Err(Error::InvalidSchedule("truncation left no radii".into()));
        }
        Ok(RadiiSchedule {
            kind: ScheduleKind::Explicit(radii.clone()),
            radii,
        })
    }
}

/// Builds a schedule. `min_radius` rejects schedules reaching below it; pass
/// `0.0` for abstract schedules that are not meant for pixel images.
pub fn build_schedule(kind: ScheduleKind, min_radius: f64) -> Result<RadiiSchedule> {
    let mut radii: Vec<f64> = match &kind {
        ScheduleKind::LogArithmetic { a0, a, n } => {
            if !(*a > 0.0) {
                return Err(Error::InvalidSchedule("log step must be positive".into()));
            }
            (0..*n).map(|j| (-(a0 + a * j as f64)).exp()).collect()
        }
        ScheduleKind::Power { c, delta, n } => {
            if !(*c > 0.0 && *delta > 0.0) {
                return Err(Error::InvalidSchedule(
                    "power schedule needs c > 0 and δ > 0".into(),
                ));
            }
            (1..=*n)
                .map(|j| (-c * (j as f64).powf(*delta)).exp())
                .collect()
        }
        ScheduleKind::EqualArea { n } => equal_area_radii(*n),
        ScheduleKind::Explicit(list) => {
            if list.windows(2).any(|w| !(w[0] > w[1])) {
                return Err(Error::InvalidSchedule(
                    "explicit radii must be strictly decreasing".into(),
                ));
            }
            list.clone()
        }
    };
    if radii.is_empty() {
        return Err(Error::InvalidSchedule("empty schedule".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidSchedule("radii must be positive and finite".into()));
    }
    radii.sort_by(|a, b| b.total_cmp(a));
    if radii.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSchedule("duplicate radii".into()));
    }
    let smallest = *radii.last().expect("non-empty");
    if smallest < min_radius {
        return Err(Error::InvalidSchedule(format!(
            "smallest radius {smallest:.4} is below the minimum {min_radius}"
        )));
    }
    Ok(RadiiSchedule { kind, radii })
}

/// Number of lattice points in the closed disk of squared radius `r2`.
fn lattice_disk_count(r2: u64) -> u64 {
    let r = (r2 as f64).sqrt().floor() as i64 + 1;
    let mut count = 0u64;
    for x in -r..=r {
        let rest = r2 as i64 - x * x;
        if rest < 0 {
            continue;
        }
        let mut y = (rest as f64).sqrt().floor() as i64;
        while y * y > rest {
            y -= 1;
        }
        while (y + 1) * (y + 1) <= rest {
            y += 1;
        }
        count += 2 * y as u64 + 1;
    }
    count
}

/// Radii `ρ = sqrt(N/π)` where `N` is a lattice disk count with `N(ρ) = N`.
fn equal_area_radii(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut r2 = 0u64;
    // the lattice count only changes at sums of two squares
    while out.len() < n {
        let count = lattice_disk_count(r2);
        let mut next = r2 + 1;
        while lattice_disk_count(next) == count {
            next += 1;
        }
        let rho2 = count as f64 / std::f64::consts::PI;
        if rho2 >= r2 as f64 && rho2 < next as f64 {
            out.push(rho2.sqrt());
        }
        r2 = next;
    }
    out
}

/// Intrinsic volumes of one parallel set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEntry {
    pub eps: f64,
    pub c0: i64,
    pub c1: f64,
    pub c2: f64,
}

impl SeriesEntry {
    pub fn get(&self, k: usize) -> f64 {
        match k {
            0 => self.c0 as f64,
            1 => self.c1,
            2 => self.c2,
            _ => panic!("index {k} out of range"),
        }
    }

    pub fn x(&self) -> f64 {
        -self.eps.ln()
    }

    /// `log(ε^{-k} |C_k|)`, or `None` when `C_k = 0`.
    pub fn y(&self, k: usize) -> Option<f64> {
        let c = self.get(k).abs();
        (c > 0.0).then(|| c.ln() - k as f64 * self.eps.ln())
    }
}

/// Outcome of the sign screening for one index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignStatus {
    Positive,
    Negative,
    /// Mixed signs, too many zeros or no usable samples.
    Invalid,
    /// Not screened yet.
    Unchecked,
}

impl SignStatus {
    pub fn sign(self) -> Option<f64> {
        match self {
            SignStatus::Positive => Some(1.0),
            SignStatus::Negative => Some(-1.0),
            _ => None,
        }
    }
}

impl fmt::Display for SignStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignStatus::Positive => "+",
            SignStatus::Negative => "-",
            SignStatus::Invalid => "invalid",
            SignStatus::Unchecked => "?",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExclusionReason {
    MixedSigns,
    TooManyZeros,
    NoSamples,
}

/// How strictly the constant-sign requirement is enforced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignRule {
    /// Any sign change excludes the index.
    #[default]
    Strict,
    /// Samples against the majority sign are dropped; the index is kept.
    Majority,
}

/// Fraction of zero samples above which an index is excluded.
pub const MAX_ZERO_FRACTION: f64 = 0.10;

/// Measurements ordered by decreasing radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSeries {
    pub entries: Vec<SeriesEntry>,
    pub signs: [SignStatus; 3],
    /// `(k, j)` samples removed from the regression.
    pub dropped: Vec<(usize, usize)>,
    pub excluded: Vec<(usize, ExclusionReason)>,
    /// Distance from the source set to the canvas border; dilations with a
    /// larger radius touch the border. `None` when unknown.
    pub border_distance: Option<f64>,
}

impl CurvatureSeries {
    pub fn from_entries(entries: Vec<SeriesEntry>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[0].eps > w[1].eps)) {
            return Err(Error::InvalidSchedule(
                "series radii must be strictly decreasing".into(),
            ));
        }
        Ok(CurvatureSeries {
            entries,
            signs: [SignStatus::Unchecked; 3],
            dropped: Vec::new(),
            excluded: Vec::new(),
            border_distance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.entries.iter().map(SeriesEntry::x).collect()
    }

    /// Indices whose sign screening passed.
    pub fn valid_indices(&self) -> Vec<usize> {
        (0..3).filter(|&k| self.signs[k].sign().is_some()).collect()
    }

    /// Radii whose dilation reaches the canvas border.
    pub fn border_contacts(&self) -> Vec<f64> {
        match self.border_distance {
            Some(d) => self
                .entries
                .iter()
                .map(|e| e.eps)
                .filter(|&e| e >= d)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Drops the first (largest-radius) entry.
    pub fn without_largest(&self) -> Result<Self> {
        let mut out = CurvatureSeries::from_entries(self.entries[1..].to_vec())?;
        out.border_distance = self.border_distance;
        Ok(out)
    }

    /// Scales `C_k` by `factor` in every entry; `C0` is rounded.
    pub fn scaled(&self, k: usize, factor: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            match k {
                0 => e.c0 = (e.c0 as f64 * factor).round() as i64,
                1 => e.c1 *= factor,
                _ => e.c2 *= factor,
            }
        }
        out
    }
}

/// Measures the intrinsic volumes of every parallel set in the schedule.
pub fn measure_series(img: &BinaryImage, sched: &RadiiSchedule) -> Result<CurvatureSeries> {
    let dmap = distance_transform(img)?;
    measure_with_map(&dmap, sched)
}

pub fn measure_with_map(dmap: &DistanceMap, sched: &RadiiSchedule) -> Result<CurvatureSeries> {
    let entries: Vec<SeriesEntry> = sched
        .radii()
        .par_iter()
        .map(|&eps| {
            let v = intrinsic_volumes(&dilate(dmap, eps));
            SeriesEntry {
                eps,
                c0: v.c0,
                c1: v.c1,
                c2: v.c2,
            }
        })
        .collect();
    let mut series = CurvatureSeries::from_entries(entries)?;
    series.border_distance = Some(border_distance(dmap));
    Ok(series)
}

/// Smallest radius at which the dilation touches the outer pixel ring.
fn border_distance(dmap: &DistanceMap) -> f64 {
    let (w, h) = (dmap.width(), dmap.height());
    let mut best = u32::MAX;
    for x in 0..w {
        best = best.min(dmap.squared(x, 0)).min(dmap.squared(x, h - 1));
    }
    for y in 0..h {
        best = best.min(dmap.squared(0, y)).min(dmap.squared(w - 1, y));
    }
    f64::from(best).sqrt()
}

/// True if the dilation by `eps` has a black pixel on the canvas border.
pub fn dilation_touches_border(dmap: &DistanceMap, eps: f64) -> bool {
    f64::from(squared_threshold(eps)) >= border_distance(dmap).powi(2)
}

/// Screens each index for a constant sign, recording all exclusions.
pub fn validate_signs(series: &CurvatureSeries, rule: SignRule) -> CurvatureSeries {
    let mut out = series.clone();
    out.dropped.clear();
    out.excluded.clear();
    let n = series.len();
    for k in 0..3 {
        let mut zeros = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (j, e) in series.entries.iter().enumerate() {
            let c = e.get(k);
            if c == 0.0 {
                zeros.push(j);
            } else if c > 0.0 {
                pos.push(j);
            } else {
                neg.push(j);
            }
        }
        out.dropped.extend(zeros.iter().map(|&j| (k, j)));
        let mixed = !pos.is_empty() && !neg.is_empty();
        let status = if pos.is_empty() && neg.is_empty() {
            out.excluded.push((k, ExclusionReason::NoSamples));
            SignStatus::Invalid
        } else if mixed && rule == SignRule::Strict {
            out.excluded.push((k, ExclusionReason::MixedSigns));
            SignStatus::Invalid
        } else {
            let majority_positive = pos.len() >= neg.len();
            let minority = if majority_positive { &neg } else { &pos };
            out.dropped.extend(minority.iter().map(|&j| (k, j)));
            if majority_positive {
                SignStatus::Positive
            } else {
                SignStatus::Negative
            }
        };
        let status = if status != SignStatus::Invalid
            && zeros.len() as f64 > MAX_ZERO_FRACTION * n as f64
        {
            out.excluded.push((k, ExclusionReason::TooManyZeros));
            SignStatus::Invalid
        } else {
            status
        };
        out.signs[k] = status;
    }
    out.dropped.sort_unstable();
    out
}

/// Regression samples of one index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSeries {
    pub k: usize,
    /// Sign of `C_k`, restored onto the curvature estimates.
    pub sign: f64,
    /// `(j, y_kj)` pairs; `j` indexes [`RegressionData::x`].
    pub samples: Vec<(usize, f64)>,
}

impl IndexSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Regression variables `x_j = -log ε_j`, `y_kj = log(ε_j^{-k}|C_k(ε_j)|)` for
/// the indices in `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    pub x: Vec<f64>,
    pub series: Vec<IndexSeries>,
}

impl RegressionData {
    pub fn index_set(&self) -> Vec<usize> {
        self.series.iter().map(|s| s.k).collect()
    }

    pub fn get(&self, k: usize) -> Option<&IndexSeries> {
        self.series.iter().find(|s| s.k == k)
    }

    /// Builds data directly from complete `y` rows (one per index), e.g. for
    /// synthetic experiments. Signs default to `+1`.
    pub fn from_rows(x: Vec<f64>, rows: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        let mut series = Vec::with_capacity(rows.len());
        for (k, y) in rows {
            if y.len() != x.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {k} has {} values for {} abscissae",
                    y.len(),
                    x.len()
                )));
            }
            series.push(IndexSeries {
                k,
                sign: 1.0,
                samples: y.into_iter().enumerate().collect(),
            });
        }
        Ok(RegressionData { x, series })
    }

    /// The same data with `y` rows complete, if no sample was dropped.
    pub fn dense_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.series
            .iter()
            .map(|s| {
                (s.samples.len() == self.x.len()
                    && s.samples.iter().enumerate().all(|(i, &(j, _))| i == j))
                .then(|| s.samples.iter().map(|&(_, y)| y).collect())
            })
            .collect()
    }
}

/// Minimum number of samples per index.
pub const MIN_SAMPLES: usize = 3;

/// Transforms a screened series into regression variables for the index set
/// `j_set`. Passing `None` uses every index that passed screening.
pub fn to_regression(series: &CurvatureSeries, j_set: Option<&[usize]>) -> Result<RegressionData> {
    let valid = series.valid_indices();
    let ks: Vec<usize> = match j_set {
        Some(j) => {
            let mut j = j.to_vec();
            j.sort_unstable();
            j.dedup();
            if let Some(&bad) = j.iter().find(|k| !valid.contains(k)) {
                return Err(Error::MissingIndex(bad));
            }
            j
        }
        None => valid,
    };
    if ks.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let x = series.xs();
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        let sign = series.signs[k].sign().ok_or(Error::MissingIndex(k))?;
        let samples: Vec<(usize, f64)> = series
            .entries
            .iter()
            .enumerate()
            .filter(|(j, _)| series.dropped.binary_search(&(k, *j)).is_err())
            .filter_map(|(j, e)| e.y(k).map(|y| (j, y)))
            .collect();
        if samples.len() < MIN_SAMPLES {
            return Err(Error::SeriesTooShort {
                len: samples.len(),
                min: MIN_SAMPLES,
            });
        }
        out.push(IndexSeries { k, sign, samples });
    }
    Ok(RegressionData { x, series: out })
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const SERIES_HEADER: [&str; 8] = ["eps", "x", "c0", "c1", "c2", "y0", "y1", "y2"];

/// Writes the series CSV: `eps,x,c0,c1,c2,y0,y1,y2`, one row per radius.
/// `y_k` is empty when `C_k = 0`.
pub fn write_series_csv<W: Write>(series: &CurvatureSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for e in &series.entries {
        let y = |k: usize| e.y(k).map(fmt_f64).unwrap_or_default();
        w.write_record([
            fmt_f64(e.eps),
            fmt_f64(e.x()),
            e.c0.to_string(),
            fmt_f64(e.c1),
            fmt_f64(e.c2),
            y(0),
            y(1),
            y(2),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::MalformedCsv(format!("flush failed: {e}")))
}

pub fn read_series_csv<R: Read>(input: R) -> Result<CurvatureSeries> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r
        .headers()
        .map_err(|e| Error::MalformedCsv(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MalformedCsv(format!("missing column '{name}'")))
    };
    let (ie, i0, i1, i2) = (col("eps")?, col("c0")?, col("c1")?, col("c2")?);
    let mut entries = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        let field = |i: usize| {
            rec.get(i)
                .map(str::trim)
                .ok_or_else(|| Error::MalformedCsv(format!("row {}: short record", line + 2)))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?
                .parse::<f64>()
                .map_err(|_| Error::MalformedCsv(format!("row {}: bad number", line + 2)))
        };
        let c0 = field(i0)?
            .parse::<i64>()
            .map_err(|_| Error::MalformedCsv(format!("row {}: c0 must be an integer", line + 2)))?;
        entries.push(SeriesEntry {
            eps: num(ie)?,
            c0,
            c1: num(i1)?,
            c2: num(i2)?,
        });
    }
    if entries.is_empty() {
        return Err(Error::MalformedCsv("no data rows".into()));
    }
    CurvatureSeries::from_entries(entries)
        .map_err(|e| Error::MalformedCsv(format!("invalid series: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(eps: f64, c0: i64, c1: f64, c2: f64) -> SeriesEntry {
        SeriesEntry { eps, c0, c1, c2 }
    }

    #[test]
    fn default_schedule_matches_experiment_setup() {
        let s = build_schedule(ScheduleKind::default_preset(), DEFAULT_MIN_RADIUS).unwrap();
        assert_eq!(s.len(), 176);
        assert!((s.radii()[0] - 4.5f64.exp()).abs() < 1e-9);
        assert!((s.radii()[0] - 90.017).abs() < 1e-3);
        assert!((s.radii()[175] - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn power_schedule() {
        let s = build_schedule(
            ScheduleKind::Power {
                c: 1.0,
                delta: 0.4,
                n: 10,
            },
            0.0,
        )
        .unwrap();
        let xs = s.xs();
        for (i, x) in xs.iter().enumerate() {
            assert!((x - ((i + 1) as f64).powf(0.4)).abs() < 1e-12);
        }
        assert!(build_schedule(
            ScheduleKind::Power {
                c: 1.0,
                delta: 0.4,
                n: 10
            },
            DEFAULT_MIN_RADIUS
        )
        .is_err());
    }

    #[test]
    fn equal_area_radii_are_fixed_points() {
        let s = build_schedule(ScheduleKind::EqualArea { n: 8 }, 0.0).unwrap();
        let mut r: Vec<f64> = s.radii().to_vec();
        r.reverse();
        let pi = std::f64::consts::PI;
        let counts = [1.0, 5.0, 9.0, 13.0, 21.0, 29.0, 37.0, 45.0];
        for (rho, n) in r.iter().zip(counts) {
            assert!((rho - (n / pi).sqrt()).abs() < 1e-12, "{rho} vs {n}");
            // lattice disk of radius rho has exactly n points
            assert_eq!(lattice_disk_count(squared_threshold(*rho) as u64) as f64, n);
        }
    }

    #[test]
    fn schedule_errors() {
        assert!(build_schedule(ScheduleKind::Explicit(vec![]), 0.0).is_err());
        assert!(build_schedule(ScheduleKind::Explicit(vec![3.0, 4.0]), 0.0).is_err());
        assert!(build_schedule(ScheduleKind::Explicit(vec![3.0, 1.0]), 2.0).is_err());
        assert!(build_schedule(
            ScheduleKind::LogArithmetic {
                a0: 0.0,
                a: 0.0,
                n: 3
            },
            0.0
        )
        .is_err());
    }

    #[test]
    fn regression_variables() {
        let e = std::f64::consts::E;
        let s = CurvatureSeries::from_entries(vec![entry(e, 1, 1.0, e * e)]).unwrap();
        assert_eq!(s.entries[0].y(2), Some(0.0));
        assert_eq!(s.entries[0].x(), -1.0);
        let s = CurvatureSeries::from_entries(vec![entry(1.0, -5, 1.0, 1.0)]).unwrap();
        assert!((s.entries[0].y(0).unwrap() - 5f64.ln()).abs() < 1e-15);
        let v = validate_signs(&s, SignRule::Strict);
        assert_eq!(v.signs[0], SignStatus::Negative);
    }

    #[test]
    fn alternating_euler_is_excluded() {
        let entries = (0..10)
            .map(|j| {
                entry(
                    10.0 - j as f64,
                    if j % 2 == 0 { 3 } else { -2 },
                    5.0,
                    50.0,
                )
            })
            .collect();
        let s = validate_signs(&CurvatureSeries::from_entries(entries).unwrap(), SignRule::Strict);
        assert_eq!(s.signs[0], SignStatus::Invalid);
        assert_eq!(s.valid_indices(), vec![1, 2]);
        assert!(s.excluded.contains(&(0, ExclusionReason::MixedSigns)));
        let data = to_regression(&s, None).unwrap();
        assert_eq!(data.index_set(), vec![1, 2]);
        assert!(matches!(
            to_regression(&s, Some(&[0])),
            Err(Error::MissingIndex(0))
        ));

        let m = validate_signs(&CurvatureSeries::from_entries(s.entries.clone()).unwrap(), SignRule::Majority);
        assert_eq!(m.signs[0], SignStatus::Positive);
        assert_eq!(m.dropped.iter().filter(|(k, _)| *k == 0).count(), 5);
    }

    #[test]
    fn zero_samples_are_dropped_or_exclude() {
        // one zero out of 20: dropped, index kept
        let entries: Vec<_> = (0..20)
            .map(|j| entry(30.0 - j as f64, if j == 4 { 0 } else { -3 }, 5.0, 50.0))
            .collect();
        let s = validate_signs(&CurvatureSeries::from_entries(entries.clone()).unwrap(), SignRule::Strict);
        assert_eq!(s.signs[0], SignStatus::Negative);
        assert_eq!(s.dropped, vec![(0, 4)]);
        let d = to_regression(&s, None).unwrap();
        assert_eq!(d.get(0).unwrap().len(), 19);
        assert_eq!(d.get(0).unwrap().sign, -1.0);

        // three zeros out of 20 (15 %): excluded
        let entries: Vec<_> = (0..20)
            .map(|j| entry(30.0 - j as f64, if j < 3 { 0 } else { -3 }, 5.0, 50.0))
            .collect();
        let s = validate_signs(&CurvatureSeries::from_entries(entries).unwrap(), SignRule::Strict);
        assert_eq!(s.signs[0], SignStatus::Invalid);
        assert!(s.excluded.contains(&(0, ExclusionReason::TooManyZeros)));
    }

    #[test]
    fn screening_is_idempotent() {
        let entries: Vec<_> = (0..12)
            .map(|j| entry(20.0 - j as f64, if j == 2 { 0 } else { -1 - j }, 4.0 + j as f64, 9.0))
            .collect();
        let once = validate_signs(&CurvatureSeries::from_entries(entries).unwrap(), SignRule::Strict);
        let twice = validate_signs(&once, SignRule::Strict);
        assert_eq!(once, twice);
        assert_eq!(to_regression(&once, None).unwrap(), to_regression(&twice, None).unwrap());
    }

    #[test]
    fn empty_index_set() {
        let entries: Vec<_> = (0..5).map(|j| entry(9.0 - j as f64, 0, 0.0, 0.0)).collect();
        let s = validate_signs(&CurvatureSeries::from_entries(entries).unwrap(), SignRule::Strict);
        assert!(matches!(to_regression(&s, None), Err(Error::EmptyIndexSet)));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let entries = vec![
            entry(90.01713130052181, -12, 1234.5678901234567, 987654.0),
            entry(std::f64::consts::E, 1, 0.1 + 0.2, 1e-300),
        ];
        let s = CurvatureSeries::from_entries(entries).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).unwrap();
        let back = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.entries, s.entries);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,x,c0,c1,c2,y0,y1,y2\n"));
    }

    #[test]
    fn malformed_csv() {
        assert!(read_series_csv("eps,c0,c1\n1,2,3\n".as_bytes()).is_err());
        assert!(read_series_csv("eps,x,c0,c1,c2\n1,0,1.5,2,3\n".as_bytes()).is_err());
        assert!(read_series_csv("eps,x,c0,c1,c2\n".as_bytes()).is_err());
        assert!(read_series_csv("eps,x,c0,c1,c2\n1,0,1,2,3\n2,0,1,2,3\n".as_bytes()).is_err());
    }
}
