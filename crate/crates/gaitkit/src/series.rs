//! Small time-series helpers shared by event detection, synchronization and
//! validation: sorted (t, value) samples with linear interpolation.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, v: f64) {
        debug_assert!(self.t.last().is_none_or(|last| t > *last));
        self.t.push(t);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn first_t(&self) -> Option<f64> {
        self.t.first().copied()
    }

    pub fn last_t(&self) -> Option<f64> {
        self.t.last().copied()
    }

    /// Linear interpolation at `q`. Returns `None` outside [first, last].
    pub fn interp(&self, q: f64) -> Option<f64> {
        if self.t.is_empty() || q < self.t[0] || q > *self.t.last().unwrap() {
            return None;
        }
        match self.t.binary_search_by(|x| x.partial_cmp(&q).unwrap()) {
            Ok(i) => Some(self.v[i]),
            Err(i) => {
                // i >= 1 and i < len because q is inside the range
                let (t0, t1) = (self.t[i - 1], self.t[i]);
                let (v0, v1) = (self.v[i - 1], self.v[i]);
                let u = (q - t0) / (t1 - t0);
                Some(v0 + u * (v1 - v0))
            }
        }
    }

    /// Central-difference derivative; one-sided at the ends.
    pub fn derivative(&self) -> TimeSeries {
        let n = self.len();
        let mut out = TimeSeries { t: self.t.clone(), v: vec![0.0; n] };
        if n < 2 {
            if n == 1 {
                out.v[0] = 0.0;
            }
            return out;
        }
        for i in 0..n {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            out.v[i] = (self.v[b] - self.v[a]) / (self.t[b] - self.t[a]);
        }
        out
    }
}

/// Median of a slice (linear interpolation of the two middle order
/// statistics for even lengths). Empty input returns NaN.
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile at position p*(n-1) over the sorted data
/// (the "inclusive" convention). Empty input returns NaN.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
