//! Knot sequences on an interval and on the torus `T = R/Z`.
//!
//! A [`KnotVector`] is a clamped, non-decreasing sequence `(t_i)` with no knot of multiplicity
//! larger than the order `k`. Indices are signed: `knots[0]` carries the index stored in
//! `offset`, so sequences produced by [`PeriodicKnotVector::lift_window`] keep the index of
//! `s_i` at zero and their boundary copies at negative indices.
//!
//! A [`PeriodicKnotVector`] holds `s_0 <= ... <= s_{n-1}` in `[0, 1)` and extends them by
//! `s_{rn+j} = r + s_j`. The extension is computed on demand.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Clamped knot sequence of order `k` on `[t_l, t_{r+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector<T = f64> {
    order: usize,
    knots: Vec<T>,
    offset: isize,
}

/// Knot sequence `(s_j)_{j=0}^{n-1}` on the torus identified with `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicKnotVector<T = f64> {
    order: usize,
    knots: Vec<T>,
}

/// Boundary treatment requested from [`validate_knots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnotMode {
    Clamped,
    Periodic,
}

impl fmt::Display for KnotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnotMode::Clamped => f.write_str("clamped"),
            KnotMode::Periodic => f.write_str("periodic"),
        }
    }
}

impl FromStr for KnotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamped" => Ok(KnotMode::Clamped),
            "periodic" => Ok(KnotMode::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown knot mode `{other}`"))),
        }
    }
}

/// Either kind of validated knot sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Knots<T = f64> {
    Clamped(KnotVector<T>),
    Periodic(PeriodicKnotVector<T>),
}

impl<T: Real> Knots<T> {
    pub fn order(&self) -> usize {
        match self {
            Knots::Clamped(kv) => kv.order(),
            Knots::Periodic(pk) => pk.order(),
        }
    }

    pub fn mode(&self) -> KnotMode {
        match self {
            Knots::Clamped(_) => KnotMode::Clamped,
            Knots::Periodic(_) => KnotMode::Periodic,
        }
    }
}

/// Validates `raw` as a knot sequence of order `k` in the requested mode.
pub fn validate_knots<T: Real>(raw: &[T], k: usize, mode: KnotMode) -> Result<Knots<T>> {
    match mode {
        KnotMode::Clamped => KnotVector::new(raw.to_vec(), k).map(Knots::Clamped),
        KnotMode::Periodic => PeriodicKnotVector::new(raw.to_vec(), k).map(Knots::Periodic),
    }
}

fn check_common<T: Real>(raw: &[T], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidOrder(k));
    }
    if raw.is_empty() {
        return Err(Error::EmptyKnots);
    }
    if let Some(index) = raw.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFiniteKnot { index });
    }
    Ok(())
}

fn check_sorted<T: Real>(raw: &[T]) -> Result<()> {
    match raw.windows(2).position(|w| w[0] > w[1]) {
        Some(index) => Err(Error::NotSorted { index }),
        None => Ok(()),
    }
}

/// Number of leading entries equal to the first one.
fn leading_multiplicity<T: Real>(values: &[T]) -> usize {
    values.iter().take_while(|&&v| v == values[0]).count()
}

fn trailing_multiplicity<T: Real>(values: &[T]) -> usize {
    let last = values[values.len() - 1];
    values.iter().rev().take_while(|&&v| v == last).count()
}

/// Clamps a non-decreasing run of knots so both end points reach multiplicity `k`.
///
/// Returns the knots and the number of copies prepended on the left.
fn clamp_segment<T: Real>(segment: &[T], k: usize) -> (Vec<T>, usize) {
    let left = k.saturating_sub(leading_multiplicity(segment));
    let right = k.saturating_sub(trailing_multiplicity(segment));
    let mut knots = Vec::with_capacity(segment.len() + left + right);
    knots.extend(std::iter::repeat_n(segment[0], left));
    knots.extend_from_slice(segment);
    knots.extend(std::iter::repeat_n(segment[segment.len() - 1], right));
    (knots, left)
}

impl<T: Real> KnotVector<T> {
    /// Validates a clamped knot sequence; the first knot gets index 0.
    pub fn new(raw: Vec<T>, k: usize) -> Result<Self> {
        Self::with_offset(raw, k, 0)
    }

    /// Validates a clamped knot sequence whose first knot carries index `offset`.
    pub fn with_offset(raw: Vec<T>, k: usize, offset: isize) -> Result<Self> {
        check_common(&raw, k)?;
        if raw.len() < 2 * k {
            return Err(Error::TooFewKnots {
                got: raw.len(),
                needed: 2 * k,
            });
        }
        check_sorted(&raw)?;
        if let Some(i) = (0..raw.len() - k).find(|&i| raw[i] >= raw[i + k]) {
            return Err(Error::MultiplicityViolation {
                index: i as isize + offset,
            });
        }
        if leading_multiplicity(&raw) != k {
            return Err(Error::NotClamped { end: "left" });
        }
        if trailing_multiplicity(&raw) != k {
            return Err(Error::NotClamped { end: "right" });
        }
        Ok(Self {
            order: k,
            knots: raw,
            offset,
        })
    }

    /// Uniform clamped knots on `[a, b]` with `cells` intervals.
    pub fn uniform(cells: usize, k: usize, a: T, b: T) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("need at least one cell".into()));
        }
        let h = (b - a) / T::from_usize_lossy(cells);
        let interior: Vec<T> = (0..=cells)
            .map(|j| {
                if j == cells {
                    b
                } else {
                    a + h * T::from_usize_lossy(j)
                }
            })
            .collect();
        Self::from_breakpoints(&interior, k)
    }

    /// Clamps a strictly or weakly increasing list of breakpoints (ends repeated to multiplicity k).
    pub fn from_breakpoints(breakpoints: &[T], k: usize) -> Result<Self> {
        check_common(breakpoints, k)?;
        check_sorted(breakpoints)?;
        let (knots, left) = clamp_segment(breakpoints, k);
        Self::with_offset(knots, k, -(left as isize))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Raw knot storage, `knots()[0]` has index [`Self::offset`].
    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Index of the first stored knot, which is also the first basis index `l`.
    pub fn offset(&self) -> isize {
        self.offset
    }

    /// First basis index `l`.
    pub fn first_index(&self) -> isize {
        self.offset
    }

    /// Last basis index `r`.
    pub fn last_index(&self) -> isize {
        self.offset + self.dim() as isize - 1
    }

    /// Number of B-splines, `r - l + 1 = #knots - k`.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.order
    }

    /// Knot `t_i` by global index.
    ///
    /// # Panics
    /// If `i` is outside the stored range.
    #[inline]
    pub fn t(&self, i: isize) -> T {
        self.knots[(i - self.offset) as usize]
    }

    pub fn domain(&self) -> (T, T) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// `|Delta| = max (t_{j+1} - t_j)`.
    pub fn mesh_width(&self) -> T {
        self.knots
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), T::max)
    }

    /// Number of knot intervals `[t_m, t_{m+1}]` inside the domain, including empty ones.
    pub fn cell_count(&self) -> usize {
        self.knots.len() + 1 - 2 * self.order
    }

    /// End points of the `c`-th knot interval of the domain (`c = 0..cell_count()`).
    pub fn cell(&self, c: usize) -> (T, T) {
        let m = self.order - 1 + c;
        (self.knots[m], self.knots[m + 1])
    }
}

impl<T: Real> PeriodicKnotVector<T> {
    pub fn new(raw: Vec<T>, k: usize) -> Result<Self> {
        check_common(&raw, k)?;
        if let Some(index) = raw.iter().position(|&s| s < T::zero() || s >= T::one()) {
            return Err(Error::OutOfRange {
                index,
                value: raw[index].as_f64(),
            });
        }
        if raw.len() < k {
            return Err(Error::TooFewKnots {
                got: raw.len(),
                needed: k,
            });
        }
        check_sorted(&raw)?;
        let pk = Self {
            order: k,
            knots: raw,
        };
        let n = pk.n() as isize;
        if let Some(j) = (0..n).find(|&j| pk.s(j) >= pk.s(j + k as isize)) {
            return Err(Error::MultiplicityViolation { index: j });
        }
        Ok(pk)
    }

    /// `s_j = j / n`.
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        let nn = T::from_usize_lossy(n);
        Self::new((0..n).map(|j| T::from_usize_lossy(j) / nn).collect(), k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Extended knot `s_{rn+j} = r + s_j` for any integer index.
    #[inline]
    pub fn s(&self, j: isize) -> T {
        let n = self.n() as isize;
        let r = j.div_euclid(n);
        let base = self.knots[j.rem_euclid(n) as usize];
        if r == 0 {
            base
        } else {
            T::from_isize_lossy(r) + base
        }
    }

    /// Periodic mesh width `max_j (s_{j+1} - s_j)`.
    pub fn mesh_width(&self) -> T {
        (0..self.n() as isize)
            .map(|j| self.s(j + 1) - self.s(j))
            .fold(T::zero(), T::max)
    }

    /// Clamped sequence on `[s_i, s_{i+n+1}]` with `t_j = s_{i+j}` for `j = 0..=n+1`.
    ///
    /// Each end point is repeated until it has multiplicity `k`; for `s_i < s_{i+1}` this is
    /// exactly `k - 1` extra copies on either side, so the basis is indexed `-k+1..=n`.
    pub fn lift_window(&self, i: usize) -> Result<KnotVector<T>> {
        let n = self.n();
        if i >= n {
            return Err(Error::IndexOutOfRange {
                index: i as isize,
                lo: 0,
                hi: n as isize - 1,
            });
        }
        let segment: Vec<T> = (0..=n + 1).map(|j| self.s((i + j) as isize)).collect();
        let (knots, left) = clamp_segment(&segment, self.order);
        KnotVector::with_offset(knots, self.order, -(left as isize))
    }

    /// Clamped sequence on `[0, 1]`: `t_j = s_j` for `j = 0..n`, the point 0 completed to
    /// multiplicity `k` on the left and the point 1 repeated `k` times on the right.
    pub fn lift_cut(&self) -> Result<KnotVector<T>> {
        let mut segment = Vec::with_capacity(self.n() + 2);
        let zero_absent = self.knots[0] > T::zero();
        if zero_absent {
            segment.push(T::zero());
        }
        segment.extend_from_slice(&self.knots);
        segment.push(T::one());
        let (knots, left) = clamp_segment(&segment, self.order);
        let before_s0 = left + usize::from(zero_absent);
        KnotVector::with_offset(knots, self.order, -(before_s0 as isize))
    }

    /// Number of leading copies of the point 0 that [`Self::lift_cut`] adds (the integer `m`).
    pub fn cut_multiplicity(&self) -> usize {
        let zeros = self.knots.iter().filter(|&&s| s == T::zero()).count();
        self.order - zeros
    }
}

/// Parses the text knot format:
///
/// ```text
/// # comment
/// k 3 periodic
/// 0.0
/// 0.25
/// ```
pub fn parse_knot_file(text: &str) -> Result<Knots<f64>> {
    let mut header: Option<(usize, KnotMode)> = None;
    let mut values = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if header.is_none() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::KnotFile {
                line: line_no,
                msg: msg.to_string(),
            };
            if fields.len() != 3 || fields[0] != "k" {
                return Err(bad("expected header `k <order> <clamped|periodic>`"));
            }
            let k: usize = fields[1].parse().map_err(|_| bad("order is not an integer"))?;
            let mode: KnotMode = fields[2]
                .parse()
                .map_err(|_| bad("mode must be `clamped` or `periodic`"))?;
            header = Some((k, mode));
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::KnotFile {
            line: line_no,
            msg: format!("`{line}` is not a decimal number"),
        })?;
        values.push(v);
    }
    let (k, mode) = header.ok_or(Error::KnotFile {
        line: 0,
        msg: "missing header line".into(),
    })?;
    validate_knots(&values, k, mode)
}

/// Inverse of [`parse_knot_file`].
pub fn format_knot_file(knots: &Knots<f64>) -> String {
    let (k, mode, values) = match knots {
        Knots::Clamped(kv) => (kv.order(), KnotMode::Clamped, kv.knots()),
        Knots::Periodic(pk) => (pk.order(), KnotMode::Periodic, pk.knots()),
    };
    let mut out = format!("k {k} {mode}\n");
    for v in values {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_example() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.5, 1.0, 1.0], 2).unwrap();
        assert_eq!(kv.dim(), 3);
        assert_eq!(kv.first_index(), 0);
        assert_eq!(kv.last_index(), 2);
        assert_eq!(kv.domain(), (0.0, 1.0));
        assert_eq!(kv.mesh_width(), 0.5);
        assert_eq!(kv.cell_count(), 2);
    }

    #[test]
    fn clamped_errors() {
        assert_eq!(
            KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0], 2),
            Err(Error::MultiplicityViolation { index: 0 })
        );
        assert_eq!(
            KnotVector::new(vec![0.0, 0.0, 0.7, 0.5, 1.0, 1.0], 2),
            Err(Error::NotSorted { index: 2 })
        );
        assert!(matches!(
            KnotVector::new(vec![0.0, 1.0, 1.0], 2),
            Err(Error::TooFewKnots { got: 3, needed: 4 })
        ));
        assert_eq!(
            KnotVector::new(vec![0.0, 0.2, 0.5, 1.0, 1.0], 2),
            Err(Error::NotClamped { end: "left" })
        );
        assert_eq!(KnotVector::<f64>::new(vec![0.0], 0), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn periodic_extension() {
        let pk = PeriodicKnotVector::new(vec![0.0, 0.25, 0.5, 0.75], 2).unwrap();
        assert_eq!(pk.s(4), 1.0);
        assert_eq!(pk.s(-1), -0.25);
        assert_eq!(pk.s(9), 2.25);
        assert_eq!(pk.mesh_width(), 0.25);
    }

    #[test]
    fn periodic_multiplicity_boundary() {
        assert!(PeriodicKnotVector::new(vec![0.0, 0.0, 0.0, 0.5], 3).is_ok());
        assert_eq!(
            PeriodicKnotVector::new(vec![0.0, 0.0, 0.0, 0.5], 2),
            Err(Error::MultiplicityViolation { index: 0 })
        );
        assert!(matches!(
            PeriodicKnotVector::new(vec![0.0, 1.0], 2),
            Err(Error::OutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            PeriodicKnotVector::new(vec![0.0, 0.5], 3),
            Err(Error::TooFewKnots { got: 2, needed: 3 })
        ));
    }

    #[test]
    fn lift_window_example() {
        let pk = PeriodicKnotVector::new(vec![0.0, 0.25, 0.5, 0.75], 2).unwrap();
        let kv = pk.lift_window(1).unwrap();
        assert_eq!(
            kv.knots(),
            &[0.25, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.5]
        );
        assert_eq!(kv.first_index(), -1);
        assert_eq!(kv.last_index(), 4);
        assert_eq!(kv.t(0), 0.25);
    }

    #[test]
    fn lift_window_domain_uniform() {
        let pk = PeriodicKnotVector::<f64>::uniform(8, 3).unwrap();
        let kv = pk.lift_window(0).unwrap();
        assert_eq!(kv.domain(), (0.0, 1.125));
        assert_eq!(kv.first_index(), -2);
        assert_eq!(kv.last_index(), 8);
    }

    #[test]
    fn lift_window_degenerate_cell_is_valid() {
        let pk = PeriodicKnotVector::new(vec![0.0, 0.0, 0.5], 2).unwrap();
        for i in 0..pk.n() {
            let kv = pk.lift_window(i).unwrap();
            assert_eq!(kv.t(0), pk.s(i as isize));
            assert_eq!(kv.t(pk.n() as isize + 1), pk.s((i + pk.n() + 1) as isize));
        }
    }

    #[test]
    fn lift_cut_examples() {
        let pk = PeriodicKnotVector::new(vec![0.0, 0.5], 2).unwrap();
        let kv = pk.lift_cut().unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(pk.cut_multiplicity(), 1);
        assert_eq!(kv.first_index(), -1);

        let pk = PeriodicKnotVector::new(vec![0.1, 0.6], 2).unwrap();
        let kv = pk.lift_cut().unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.1, 0.6, 1.0, 1.0]);
        assert_eq!(pk.cut_multiplicity(), 2);
        assert_eq!(kv.first_index(), -2);
        assert_eq!(kv.t(0), 0.1);

        let pk = PeriodicKnotVector::new(vec![0.0, 0.0, 0.5], 3).unwrap();
        let kv = pk.lift_cut().unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(pk.cut_multiplicity(), 1);
        assert_eq!(kv.dim(), kv.knots().len() - 3);
    }

    #[test]
    fn knot_file_roundtrip() {
        let text = "# test\nk 2 periodic\n0.0\n0.25 # trailing\n\n0.5\n0.75\n";
        let parsed = parse_knot_file(text).unwrap();
        assert_eq!(parsed.mode(), KnotMode::Periodic);
        let again = parse_knot_file(&format_knot_file(&parsed)).unwrap();
        assert_eq!(parsed, again);
    }

    #[test]
    fn knot_file_errors() {
        assert!(matches!(
            parse_knot_file("k 2 clamped\n0\n0\n0\n1\n1\n"),
            Err(Error::MultiplicityViolation { .. })
        ));
        assert!(matches!(
            parse_knot_file("k two clamped\n"),
            Err(Error::KnotFile { line: 1, .. })
        ));
        assert!(matches!(
            parse_knot_file("k 1 clamped\n0,5\n"),
            Err(Error::KnotFile { line: 2, .. })
        ));
    }
}
