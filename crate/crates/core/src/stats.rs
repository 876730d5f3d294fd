//! Sample mean, standard deviation and standard error.

/// Summary statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// Sample size.
    pub n: usize,
    /// Arithmetic mean (NaN for an empty sample).
    pub mean: f64,
    /// Unbiased standard deviation (0 for fewer than two values).
    pub sd: f64,
}

impl Summary {
    /// Summarises `xs` in one pass (Welford).
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for x in xs {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                sd: 0.0,
            };
        }
        let sd = if n > 1 {
            libm::sqrt(m2 / (n - 1) as f64)
        } else {
            0.0
        };
        Self { n, mean, sd }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sd / libm::sqrt(self.n as f64)
        }
    }
}
