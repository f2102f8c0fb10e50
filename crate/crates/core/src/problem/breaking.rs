use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(PartialEq, PartialOrd)]
struct Key(f64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The smallest `max_count` positive values of `Σ i_k·lags[k]` (nonnegative integers `i_k`) in `(0, t_f]`.
///
/// Zero lags are ignored; values closer than a relative `1e-12` are merged.
pub fn lattice_points(lags: &[f64], t_f: f64, max_count: usize) -> Vec<f64> {
    let lags: Vec<f64> = lags.iter().copied().filter(|&l| l > 0.0 && l.is_finite()).collect();
    let mut out: Vec<f64> = Vec::new();
    if lags.is_empty() || max_count == 0 {
        return out;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Key(0.0)));
    let mut last = 0.0f64;
    while let Some(Reverse(Key(v))) = heap.pop() {
        if v > t_f * (1.0 + 1e-14) {
            break;
        }
        if v > 0.0 && (v - last).abs() <= 1e-12 * v.max(1.0) {
            continue;
        }
        if v > 0.0 {
            out.push(v);
            if out.len() == max_count {
                break;
            }
        }
        last = v;
        for &l in &lags {
            heap.push(Reverse(Key(v + l)));
        }
    }
    out
}

/// Breaking points `iτ + jβ` in `(0, t_f]`, the smallest `max_count` of them.
pub fn breaking_points(tau: f64, beta: f64, t_f: f64, max_count: usize) -> Vec<f64> {
    lattice_points(&[tau, beta], t_f, max_count)
}
