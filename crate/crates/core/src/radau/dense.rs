use super::tableau::{C1, C1M1, C1MC2, C2, C2M1};
use crate::error::{Error, Result};

/// Collocation polynomial of one step, stored for the first `y.len()` components.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t_left: f64,
    pub h: f64,
    /// State at `t_left + h`.
    pub y: Vec<f64>,
    /// Newton-form coefficients, three per component.
    pub cont: Vec<[f64; 3]>,
}

impl StepRecord {
    /// Builds the polynomial through `y_old` at `t_left` and `y_old + z_k` at the nodes.
    pub fn from_stages(t_left: f64, h: f64, y_old: &[f64], z: [&[f64]; 3], n: usize) -> Self {
        let [z1, z2, z3] = z;
        let mut y = Vec::with_capacity(n);
        let mut cont = Vec::with_capacity(n);
        for i in 0..n {
            let c1 = (z2[i] - z3[i]) / C2M1;
            let ak = (z1[i] - z2[i]) / C1MC2;
            let acont3 = (ak - z1[i] / C1) / C2;
            let c2 = (ak - c1) / C1M1;
            y.push(y_old[i] + z3[i]);
            cont.push([c1, c2, c2 - acont3]);
        }
        Self { t_left, h, y, cont }
    }

    pub fn t_right(&self) -> f64 {
        self.t_left + self.h
    }

    pub fn comps(&self) -> usize {
        self.y.len()
    }

    /// Polynomial value; valid (as an extrapolation) outside the step too.
    pub fn eval(&self, t: f64, comp: usize) -> f64 {
        let s = (t - self.t_right()) / self.h;
        let [a, b, c] = self.cont[comp];
        self.y[comp] + s * (a + (s - C2M1) * (b + (s - C1M1) * c))
    }
}

/// Piecewise cubic interpolant of an integration run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseOutput {
    pub records: Vec<StepRecord>,
}

impl DenseOutput {
    pub fn t_start(&self) -> Option<f64> {
        self.records.first().map(|r| r.t_left)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.records.last().map(StepRecord::t_right)
    }

    /// Step covering `t` (the left one at mesh points).
    pub fn locate(&self, t: f64) -> Result<&StepRecord> {
        locate(self.records.len(), |k| &self.records[k], t).ok_or(Error::OutOfRange {
            t,
            lo: self.t_start().unwrap_or(f64::NAN),
            hi: self.t_end().unwrap_or(f64::NAN),
        })
    }

    pub fn eval(&self, t: f64, comp: usize) -> Result<f64> {
        let r = self.locate(t)?;
        if comp >= r.comps() {
            return Err(Error::Domain(format!("component {comp} not stored")));
        }
        Ok(r.eval(t, comp))
    }
}

/// Binary search over `n` contiguous records accessed by index.
pub(crate) fn locate<'a>(n: usize, get: impl Fn(usize) -> &'a StepRecord, t: f64) -> Option<&'a StepRecord> {
    if n == 0 || t < get(0).t_left || t > get(n - 1).t_right() {
        return None;
    }
    let (mut lo, mut hi) = (0, n - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if get(mid).t_right() < t {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Some(get(lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_for(f: impl Fn(f64) -> f64, t: f64, h: f64) -> StepRecord {
        let y0 = [f(t)];
        let z: Vec<[f64; 1]> = [C1, C2, 1.0].iter().map(|c| [f(t + c * h) - y0[0]]).collect();
        StepRecord::from_stages(t, h, &y0, [&z[0], &z[1], &z[2]], 1)
    }

    #[test]
    fn reproduces_cubics() {
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let r = record_for(f, 0.3, 0.7);
        for k in 0..=10 {
            let t = 0.3 + 0.07 * k as f64;
            assert!((r.eval(t, 0) - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn endpoints() {
        let f = |t: f64| (-t).exp();
        let r = record_for(f, 1.0, 0.25);
        assert!((r.eval(1.0, 0) - f(1.0)).abs() < 1e-15);
        assert_eq!(r.eval(1.25, 0), r.y[0]);
    }

    #[test]
    fn interpolation_error_is_fourth_order() {
        let f = |t: f64| (-t).exp();
        let err = |h: f64| (record_for(f, 0.0, h).eval(h / 2.0, 0) - f(h / 2.0)).abs();
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 14.0, "{ratio}");
    }

    #[test]
    fn lookup() {
        let d = DenseOutput { records: vec![record_for(|t| t, 0.0, 1.0), record_for(|t| t, 1.0, 0.5)] };
        assert!((d.eval(1.2, 0).unwrap() - 1.2).abs() < 1e-14);
        assert_eq!(d.locate(1.0).unwrap().t_left, 0.0);
        assert!(d.eval(1.6, 0).is_err());
        assert!(d.eval(-0.1, 0).is_err());
    }
}
