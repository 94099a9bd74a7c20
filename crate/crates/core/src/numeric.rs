//! Small numeric helpers used by the aggregations.

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges a partial sum computed elsewhere.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Running mean built on [`CompensatedSum`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAccumulator {
    sum: CompensatedSum,
    count: u64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        self.sum.add(value);
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `None` when nothing was added.
    pub fn mean(&self) -> Option<f64> {
        if self.count == 0 {
            None
        } else {
            Some(self.sum.value() / self.count as f64)
        }
    }
}

/// Mean of a slice; `None` for an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let sum: CompensatedSum = values.iter().copied().collect();
    Some(sum.value() / values.len() as f64)
}

/// Population standard deviation; `None` for an empty slice.
pub fn population_std(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    let squares: CompensatedSum = values.iter().map(|v| (v - m) * (v - m)).collect();
    Some((squares.value() / values.len() as f64).sqrt())
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let squares: CompensatedSum = values.iter().map(|v| (v - m) * (v - m)).collect();
    Some((squares.value() / (values.len() - 1) as f64).sqrt())
}

/// Cosine similarity; `None` when either vector has zero norm or lengths differ.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut dot = CompensatedSum::new();
    let mut na = CompensatedSum::new();
    let mut nb = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        dot.add(x * y);
        na.add(x * x);
        nb.add(y * y);
    }
    let denom = na.value().sqrt() * nb.value().sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((dot.value() / denom).clamp(-1.0, 1.0))
    }
}
