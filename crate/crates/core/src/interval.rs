use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite union of disjoint open intervals, sorted, with `±∞` endpoints allowed.
///
/// Serialises as a list of `[lo, hi]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl From<Vec<[f64; 2]>> for IntervalSet {
    fn from(v: Vec<[f64; 2]>) -> Self {
        IntervalSet::new(v.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(s: IntervalSet) -> Self {
        s.intervals.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

impl IntervalSet {
    /// Normalises arbitrary pairs: empty or NaN pieces dropped, overlaps merged.
    /// Touching open intervals such as `(0,1)` and `(1,2)` stay separate.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| a < b);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        IntervalSet::new(vec![(lo, hi)])
    }

    pub fn real_line() -> Self {
        IntervalSet::single(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                out.push((a.max(c), b.min(d)));
            }
        }
        IntervalSet::new(out)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::new(all)
    }

    /// Infimum and supremum of the set.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    /// The piece containing `x`, if any.
    pub fn component_of(&self, x: f64) -> Option<(f64, f64)> {
        self.intervals.iter().copied().find(|&(a, b)| a < x && x < b)
    }
}

fn fmt_end(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if x == f64::INFINITY {
        write!(f, "inf")
    } else if x == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else if x.abs() < 1e-9 {
        write!(f, "0")
    } else {
        write!(f, "{}", format_sig(x, 6))
    }
}

/// `x` rounded to `digits` significant digits, without exponent for ordinary magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..=15).contains(&mag) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, &(a, b)) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " U ")?;
            }
            write!(f, "(")?;
            fmt_end(a, f)?;
            write!(f, ", ")?;
            fmt_end(b, f)?;
            write!(f, ")")?;
        }
        Ok(())
    }
}
