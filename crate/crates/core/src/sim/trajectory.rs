use std::io::{self, Write};

use crate::error::{Error, Result};

/// Which samples a period average uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// The common period centred on the sample.
    Centered,
    /// The common period ending at the sample.
    Trailing,
}

/// Uniform samples of `(t, x, u, δ, J)`.
///
/// Columns of a row are `x1..xN, u1..uN, δ per deceiver, J1..JN`. Alongside
/// each row the running trapezoidal integral of every column is kept, so the
/// mean over one exact common period is a difference of two stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: usize,
    deceivers: Vec<usize>,
    period: f64,
    window: usize,
    t: Vec<f64>,
    rows: Vec<f64>,
    integrals: Vec<f64>,
    unstable: bool,
}

impl Trajectory {
    pub(crate) fn new(n: usize, deceivers: Vec<usize>, period: f64, window: usize) -> Self {
        Trajectory { n, deceivers, period, window, t: vec![], rows: vec![], integrals: vec![], unstable: false }
    }

    pub(crate) fn push(&mut self, t: f64, row: &[f64], integral: &[f64]) {
        debug_assert_eq!(row.len(), self.width());
        self.t.push(t);
        self.rows.extend_from_slice(row);
        self.integrals.extend_from_slice(integral);
    }

    pub(crate) fn mark_unstable(&mut self) {
        self.unstable = true;
    }

    /// Number of data columns (excluding `t`).
    pub fn width(&self) -> usize {
        3 * self.n + self.deceivers.len()
    }

    pub fn players(&self) -> usize {
        self.n
    }

    /// Player indices owning the δ columns.
    pub fn deceivers(&self) -> &[usize] {
        &self.deceivers
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// True when the run was cut short by the blow-up threshold.
    pub fn is_unstable(&self) -> bool {
        self.unstable
    }

    /// Common probe period used for averages.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Samples per common period.
    pub fn samples_per_window(&self) -> usize {
        self.window
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.rows[k * w..(k + 1) * w]
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.row(k)[..self.n]
    }

    pub fn u(&self, k: usize) -> &[f64] {
        &self.row(k)[self.n..2 * self.n]
    }

    pub fn delta(&self, k: usize) -> &[f64] {
        &self.row(k)[2 * self.n..2 * self.n + self.deceivers.len()]
    }

    pub fn cost(&self, k: usize) -> &[f64] {
        &self.row(k)[2 * self.n + self.deceivers.len()..]
    }

    /// One column over time.
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.row(k)[c]).collect()
    }

    /// Column index of `name` in the CSV header, `t` excluded.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header().iter().skip(1).position(|h| h == name)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=self.n).map(|i| format!("x{i}")));
        h.extend((1..=self.n).map(|i| format!("u{i}")));
        h.extend(self.deceivers.iter().map(|d| format!("delta{}", d + 1)));
        h.extend((1..=self.n).map(|i| format!("J{i}")));
        h
    }

    fn integral(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.integrals[k * w..(k + 1) * w]
    }

    /// Mean of every column over one common period, or `None` if the window
    /// does not fit inside the recorded samples.
    pub fn average(&self, k: usize, window: Window) -> Option<Vec<f64>> {
        let (lo, hi) = match window {
            Window::Centered => (k.checked_sub(self.window / 2)?, k + self.window / 2),
            Window::Trailing => (k.checked_sub(self.window)?, k),
        };
        if hi >= self.len() {
            return None;
        }
        let span = self.t[hi] - self.t[lo];
        Some(self.integral(hi).iter().zip(self.integral(lo)).map(|(b, a)| (b - a) / span).collect())
    }

    /// Mean over the last recorded common period.
    pub fn final_average(&self) -> Option<Vec<f64>> {
        self.average(self.len().checked_sub(1)?, Window::Trailing)
    }

    /// Writes the CSV form with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header().join(","))?;
        let mut line = String::new();
        for k in 0..self.len() {
            line.clear();
            line.push_str(&format!("{:.16e}", self.t[k]));
            for v in self.row(k) {
                line.push(',');
                line.push_str(&format!("{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save_csv(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(io::BufWriter::new(f))?;
        Ok(())
    }
}
