//! Accuracy and confusion-matrix bookkeeping.

use crate::{Error, Result};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    class_count: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(class_count: usize) -> Self {
        ConfusionMatrix {
            class_count,
            counts: vec![0; class_count * class_count],
        }
    }

    pub fn from_predictions(
        class_count: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut cm = Self::new(class_count);
        for (truth, predicted) in pairs {
            cm.record(truth, predicted)?;
        }
        Ok(cm)
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= self.class_count || predicted >= self.class_count {
            return Err(Error::Data(format!(
                "class pair ({truth}, {predicted}) out of range for {} classes",
                self.class_count
            )));
        }
        self.counts[truth * self.class_count + predicted] += 1;
        Ok(())
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.class_count + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.class_count..(truth + 1) * self.class_count]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.class_count).map(|c| self.get(c, c)).sum()
    }

    /// Per-true-class sample counts.
    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.class_count).map(|c| self.row(c).iter().sum()).collect()
    }

    /// `trace / total`; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    /// Each row divided by its sum; empty rows stay zero.
    pub fn normalize_rows(&self) -> Vec<Vec<f64>> {
        (0..self.class_count)
            .map(|c| {
                let row = self.row(c);
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&v| if sum == 0 { 0.0 } else { v as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }

    /// Elementwise sum with a matrix accumulated on another shard.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.class_count != self.class_count {
            return Err(Error::shape(
                "confusion matrix merge",
                self.class_count,
                other.class_count,
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// CSV with a header row of class names; one row per true class.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let name = |c: usize| {
            class_names
                .get(c)
                .cloned()
                .unwrap_or_else(|| c.to_string())
        };
        let mut out = String::from("true\\predicted");
        for c in 0..self.class_count {
            out.push(',');
            out.push_str(&csv_escape(&name(c)));
        }
        out.push('\n');
        for t in 0..self.class_count {
            out.push_str(&csv_escape(&name(t)));
            for v in self.row(t) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
