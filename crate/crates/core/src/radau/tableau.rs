//! Constants of the 3-stage Radau IIA method and of the similarity transform
//! that block-diagonalizes the inverse coefficient matrix.

use nalgebra::{Matrix3, Vector3};

const SQ6: f64 = 2.449_489_742_783_178;

/// Collocation nodes.
pub const C1: f64 = (4.0 - SQ6) / 10.0;
pub const C2: f64 = (4.0 + SQ6) / 10.0;
pub const C1M1: f64 = C1 - 1.0;
pub const C2M1: f64 = C2 - 1.0;
pub const C1MC2: f64 = C1 - C2;

/// Embedded error estimate weights.
pub const DD1: f64 = -(13.0 + 7.0 * SQ6) / 3.0;
pub const DD2: f64 = (-13.0 + 7.0 * SQ6) / 3.0;
pub const DD3: f64 = -1.0 / 3.0;

pub const T: [[f64; 3]; 3] = [
    [9.123_239_487_089_294_279_2e-2, -0.141_255_295_020_954_208_43, -3.002_919_410_514_742_449_2e-2],
    [0.241_717_932_707_107_018_96, 0.204_129_352_293_799_931_99, 0.382_942_112_757_261_937_79],
    [0.966_048_182_615_092_936_19, 1.0, 0.0],
];

pub const TI: [[f64; 3]; 3] = [
    [4.325_579_890_063_155_351, 0.339_199_251_815_809_869_54, 0.541_770_539_935_874_871_19],
    [-4.178_718_591_551_904_727_3, -0.327_682_820_761_062_387_08, 0.476_623_554_500_550_451_96],
    [-0.502_872_634_945_786_875_95, 2.571_926_949_855_605_429_2, -0.596_039_204_828_224_924_97],
];

/// Eigenvalues of `A⁻¹`: the real one and the complex pair `alph ± i·beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    pub u1: f64,
    pub alph: f64,
    pub beta: f64,
}

pub fn eigenvalues() -> Eigen {
    let c81 = 81f64.cbrt();
    let c9 = 9f64.cbrt();
    let u1 = (6.0 + c81 - c9) / 30.0;
    let alph = (12.0 - c81 + c9) / 60.0;
    let beta = (c81 + c9) * 3f64.sqrt() / 60.0;
    let cno = alph * alph + beta * beta;
    Eigen { u1: 1.0 / u1, alph: alph / cno, beta: beta / cno }
}

/// Butcher coefficient matrix.
pub fn coefficients() -> Matrix3<f64> {
    let s = 6f64.sqrt();
    Matrix3::new(
        (88.0 - 7.0 * s) / 360.0,
        (296.0 - 169.0 * s) / 1800.0,
        (-2.0 + 3.0 * s) / 225.0,
        (296.0 + 169.0 * s) / 1800.0,
        (88.0 + 7.0 * s) / 360.0,
        (-2.0 - 3.0 * s) / 225.0,
        (16.0 - s) / 36.0,
        (16.0 + s) / 36.0,
        1.0 / 9.0,
    )
}

pub fn nodes() -> Vector3<f64> {
    Vector3::new(C1, C2, 1.0)
}

pub fn transform() -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| T[i][j])
}

pub fn inverse_transform() -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| TI[i][j])
}

/// Largest violation among: `TI·T = I`, `T⁻¹A⁻¹T` block structure, row sums,
/// the simplifying assumption C(2) and the quadrature conditions B(5).
pub fn self_check() -> f64 {
    let a = coefficients();
    let c = nodes();
    let b = a.row(2).transpose();
    let t = transform();
    let ti = inverse_transform();
    let e = eigenvalues();
    let mut worst = (ti * t - Matrix3::identity()).abs().max();
    let ainv = a.try_inverse().expect("Radau IIA matrix is invertible");
    let blocks = Matrix3::new(e.u1, 0.0, 0.0, 0.0, e.alph, -e.beta, 0.0, e.beta, e.alph);
    worst = worst.max((ti * ainv * t - blocks).abs().max() / e.u1);
    for i in 0..3 {
        let row = a.row(i);
        worst = worst.max((row.sum() - c[i]).abs());
        let c2: f64 = (0..3).map(|j| row[j] * c[j]).sum();
        worst = worst.max((c2 - c[i] * c[i] / 2.0).abs());
    }
    for k in 1..=5 {
        let q: f64 = (0..3).map(|j| b[j] * c[j].powi(k as i32 - 1)).sum();
        worst = worst.max((q - 1.0 / k as f64).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_consistent() {
        assert!(self_check() < 1e-14, "{}", self_check());
    }

    #[test]
    fn b5_fails_at_order_six() {
        let a = coefficients();
        let c = nodes();
        let q: f64 = (0..3).map(|j| a[(2, j)] * c[j].powi(5)).sum();
        assert!((q - 1.0 / 6.0).abs() > 1e-4);
    }
}
