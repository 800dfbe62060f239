//! Polygamma and Hurwitz zeta for complex arguments.

use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

/// B_{2j} for j = 1..=10.
const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta ζ(m, z) = Σ_{k≥0} (z + k)^{-m} for integer m ≥ 2.
///
/// Shifts z upward until |z| is large, then applies the Euler-Maclaurin tail
/// with ten Bernoulli corrections.
pub fn hurwitz_zeta(m: u32, z: Complex64) -> Result<Complex64> {
    if m < 2 {
        return Err(Error::invalid("Hurwitz zeta needs integer order m >= 2"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("polygamma argument"));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PoleHit);
    }
    let mi = m as i32;
    let threshold = 20.0_f64.max(2.0 * m as f64);
    let mut w = z;
    let mut head = Complex64::new(0.0, 0.0);
    while w.norm() < threshold || w.re < 1.0 {
        head += w.powi(-mi);
        w += 1.0;
    }

    let inv = w.inv();
    let inv2 = inv * inv;
    let mf = m as f64;
    let wm = w.powi(-mi);
    let mut tail = w * wm / (mf - 1.0) + 0.5 * wm;
    // term_j = B_2j/(2j)! · m(m+1)…(m+2j−2) · w^{−m−2j+1}
    let mut coef = mf; // rising factorial over (2j)!
    let mut pw = wm * inv;
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        let k = 2 * j as u32 + 1;
        if j > 0 {
            coef *= (mf + k as f64 - 2.0) * (mf + k as f64 - 1.0);
            pw *= inv2;
        }
        let fact = factorial(2 * (j as u32 + 1));
        tail += pw * (b * coef / fact);
    }
    Ok(head + tail)
}

/// ψ_s(z) = (−1)^{s+1} s! ζ(s+1, z) for integer s ≥ 1.
pub fn polygamma(s: u32, z: Complex64) -> Result<Complex64> {
    if s == 0 {
        return Err(Error::Unsupported("polygamma of order 0"));
    }
    let zeta = hurwitz_zeta(s + 1, z)?;
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    Ok(zeta * (sign * factorial(s)))
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
