#![allow(dead_code)]

use bifrac::RationalMatrix;
use num::{BigInt, BigRational, Zero};
use rand::Rng;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Entries `k/2` with `|k| <= 6`, so values lie in `[-3, 3]`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, zero_bias: f64) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if !rng.gen_bool(zero_bias) {
                m.set(i, j, rat(rng.gen_range(-6..=6), 2));
            }
        }
    }
    m
}

pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> RationalMatrix {
    loop {
        let m = random_matrix(rng, n, n, 0.0);
        if !bifrac::matrices::det(&m).unwrap().is_zero() {
            return m;
        }
    }
}

/// A random homogeneous configuration with `1/p_i, 1/q ∈ {0, 1/4, …, 1}` and dimensions up to 3.
pub fn random_config<R: Rng>(rng: &mut R) -> bifrac::OperatorConfig {
    use bifrac::Exponent;
    let (n1, n2, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
    let d1 = random_matrix(rng, n1, m, 0.3);
    let d2 = random_matrix(rng, n2, m, 0.3);
    let mut e = || Exponent::from_recip(rat(rng.gen_range(0..=4), 4)).unwrap();
    let (p1, p2, q) = (e(), e(), e());
    bifrac::OperatorConfig::homogeneous(n1, n2, m, d1, d2, p1, p2, q).unwrap()
}
