use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant through strictly increasing data.
///
/// Node slopes are either supplied or estimated with the Fritsch-Carlson
/// harmonic-mean rule. In both cases slopes are limited so that every
/// cubic piece is monotone (`alpha^2 + beta^2 <= 9`).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidMap(format!(
                "interpolation needs matching x/y arrays with at least 2 points (got {} and {})",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || y.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMap("tabulated samples must be strictly increasing".into()));
        }
        let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = match slopes {
            Some(d) => {
                if d.len() != n {
                    return Err(Error::InvalidMap("derivative samples must match x samples".into()));
                }
                d
            }
            None => estimate_slopes(&x, &secants),
        };
        for (i, s) in secants.iter().enumerate() {
            let a = d[i] / s;
            let b = d[i + 1] / s;
            let r2 = a * a + b * b;
            if r2 > 9.0 * (1.0 + 1e-12) {
                let tau = 3.0 / r2.sqrt();
                d[i] = tau * a * s;
                d[i + 1] = tau * b * s;
            }
        }
        Ok(Self { x, y, d })
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }
    pub fn ys(&self) -> &[f64] {
        &self.y
    }
    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.x.partition_point(|&xi| xi <= t);
        i.clamp(1, self.x.len() - 1) - 1
    }

    /// Value and derivative at `t` (extrapolates cubically outside the nodes).
    pub fn eval_with_deriv(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, deriv)
    }
}

fn estimate_slopes(x: &[f64], secants: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    d[0] = secants[0];
    d[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (s0, s1) = (secants[i - 1], secants[i]);
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let w0 = 2.0 * h1 + h0;
        let w1 = h1 + 2.0 * h0;
        d[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
    }
    d
}
