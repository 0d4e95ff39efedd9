/// Online statistics of a single arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmState {
    pulls: u64,
    sum: f64,
}

impl ArmState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, reward: f64) {
        debug_assert!((0.0..=1.0).contains(&reward));
        self.pulls += 1;
        self.sum += reward;
    }

    /// Records `count` pulls whose rewards add up to `sum`.
    pub fn record_batch(&mut self, count: u64, sum: f64) {
        debug_assert!(sum >= 0.0 && sum <= count as f64);
        self.pulls += count;
        self.sum += sum;
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Empirical mean, `None` before the first pull.
    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.sum / self.pulls as f64)
    }
}
