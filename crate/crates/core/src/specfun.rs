//! Error function family in double precision.
//!
//! Three evaluation routes are combined:
//!
//! * the Maclaurin series `erf z = 2/√π Σ (-1)ⁿ z²ⁿ⁺¹ / (n! (2n+1))`, which is
//!   free of cancellation close to the imaginary axis,
//! * the Kummer series `erf z = 2/√π e^{-z²} Σ 2ⁿ z²ⁿ⁺¹ / (2n+1)!!`, which is
//!   free of cancellation close to the real axis,
//! * the Laplace continued fraction for the Faddeeva function
//!   `w(z) = e^{-z²} erfc(-iz)` in the upper half plane, used once `|z|` is
//!   large enough that both series lose digits.
//!
//! The series are picked per argument by comparing the size of their largest
//! term to the size of the result (the number of digits each would cancel);
//! the continued fraction takes over when both estimates exceed
//! [`SERIES_CANCELLATION_LIMIT`] or `|z|` exceeds [`SERIES_RADIUS`].

use num_complex::Complex64;
use std::f64::consts::FRAC_2_SQRT_PI;
use thiserror::Error;

/// Complex number used throughout the crate.
pub type ComplexValue = Complex64;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Natural log of the tolerated ratio between the largest series term and
/// the result. `e^3 ≈ 20` costs about one and a half bits.
const SERIES_CANCELLATION_LIMIT: f64 = 3.0;

/// Beyond this modulus the continued fraction is always used.
const SERIES_RADIUS: f64 = 6.0;

/// Below this value erfc(x) = 1 - erf(x) loses at most two digits.
const ERFC_SERIES_LIMIT: f64 = 1.5;

/// Largest `ln|·|` we allow before reporting overflow.
const LN_MAX: f64 = 709.0;

const MAX_CF_TERMS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("argument {0} is not finite")]
    NonFinite(ComplexValue),
    #[error("result for argument {0} overflows double precision")]
    Overflow(ComplexValue),
}

fn check_finite(z: ComplexValue) -> Result<(), SpecialFunctionError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(SpecialFunctionError::NonFinite(z))
    }
}

fn split_square(x: f64) -> (f64, f64) {
    let hi = (x * 4096.0).trunc() / 4096.0;
    (hi * hi, (x - hi) * (x + hi))
}

/// `exp(-x²)` with the square split into an exactly representable high part,
/// so that the rounding of `x²` does not leak into the exponent for large `x`.
pub(crate) fn exp_neg_sq(x: f64) -> f64 {
    let (hi, lo) = split_square(x);
    (-hi).exp() * (-lo).exp()
}

/// `exp(-z²)` for complex `z`, same splitting on the real and imaginary parts.
fn cexp_neg_sq(z: ComplexValue) -> ComplexValue {
    let (x, y) = (z.re, z.im);
    let (xh, xl) = split_square(x);
    let (yh, yl) = split_square(y);
    let modulus = ((yh - xh) + (yl - xl)).exp();
    let phase = -2.0 * x * y;
    ComplexValue::new(modulus * phase.cos(), modulus * phase.sin())
}

fn maclaurin_erf(z: ComplexValue) -> ComplexValue {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    let r2 = z.norm_sqr();
    let mut n = 1.0;
    loop {
        power *= -z2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if n > r2 && term.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
        n += 1.0;
    }
    sum * FRAC_2_SQRT_PI
}

fn kummer_erf(z: ComplexValue) -> ComplexValue {
    let two_z2 = 2.0 * z * z;
    let mut term = z;
    let mut sum = z;
    let r2 = z.norm_sqr();
    let mut n = 1.0;
    loop {
        term *= two_z2 / (2.0 * n + 1.0);
        sum += term;
        if n > r2 && term.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
        n += 1.0;
    }
    sum * cexp_neg_sq(z) * FRAC_2_SQRT_PI
}

/// Laplace continued fraction `w(z) = (i/√π) / (z - ½/(z - 1/(z - ³⁄₂/(z - …))))`
/// evaluated with the modified Lentz algorithm. Valid for `Im z ≥ 0`.
fn faddeeva_continued_fraction(z: ComplexValue) -> ComplexValue {
    const TINY: f64 = 1e-300;
    let tiny = ComplexValue::new(TINY, 0.0);
    let mut f = if z == ComplexValue::new(0.0, 0.0) { tiny } else { z };
    let mut c = f;
    let mut d = ComplexValue::new(0.0, 0.0);
    for k in 1..=MAX_CF_TERMS {
        let a = -0.5 * k as f64;
        d = z + a * d;
        if d.norm() < TINY {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 0.5 * f64::EPSILON {
            break;
        }
    }
    ComplexValue::i() * FRAC_1_SQRT_PI / f
}

/// erf on the closed first quadrant, `x ≥ 0`, `y ≥ 0`.
fn erf_first_quadrant(z: ComplexValue) -> Result<ComplexValue, SpecialFunctionError> {
    let (x, y) = (z.re, z.im);
    if y * y - x * x > LN_MAX {
        return Err(SpecialFunctionError::Overflow(z));
    }
    if x == 0.0 {
        // Purely imaginary: the Maclaurin series has positive terms only.
        return Ok(ComplexValue::new(0.0, maclaurin_erf(z).im));
    }
    let r2 = x * x + y * y;
    if r2 < SERIES_RADIUS * SERIES_RADIUS {
        let maclaurin_cost = if y >= x { 2.0 * x * x } else { r2 };
        let kummer_cost = if x >= y { 2.0 * y * y } else { r2 };
        if maclaurin_cost.min(kummer_cost) <= SERIES_CANCELLATION_LIMIT {
            return Ok(if maclaurin_cost <= kummer_cost {
                maclaurin_erf(z)
            } else {
                kummer_erf(z)
            });
        }
    }
    // erf z = 1 - e^{-z²} w(iz); Im(iz) = x ≥ 0.
    let w = faddeeva_continued_fraction(ComplexValue::new(-y, x));
    let tail = (-(z * z) + w.ln()).exp();
    let value = ComplexValue::new(1.0, 0.0) - tail;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(SpecialFunctionError::Overflow(z))
    }
}

/// The error function `erf z = 2/√π ∫₀ᶻ e^{-t²} dt` at complex argument.
///
/// Fails with [`SpecialFunctionError::Overflow`] when `|erf z|` exceeds the
/// double range, which happens once `(Im z)² − (Re z)² ≳ 709`.
pub fn erf_complex(z: ComplexValue) -> Result<ComplexValue, SpecialFunctionError> {
    check_finite(z)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(z);
    }
    let flip_sign = z.re < 0.0;
    let w = if flip_sign { -z } else { z };
    let conjugate = w.im < 0.0;
    let w = if conjugate { w.conj() } else { w };
    let mut value = erf_first_quadrant(w)?;
    if conjugate {
        value = value.conj();
    }
    if flip_sign {
        value = -value;
    }
    Ok(value)
}

/// Real error function.
pub fn erf_real(x: f64) -> Result<f64, SpecialFunctionError> {
    if !x.is_finite() {
        return Err(SpecialFunctionError::NonFinite(ComplexValue::new(x, 0.0)));
    }
    if x.abs() < ERFC_SERIES_LIMIT {
        Ok(kummer_erf(ComplexValue::new(x, 0.0)).re)
    } else {
        Ok(x.signum() * (1.0 - erfc_real(x.abs())?))
    }
}

/// Complementary error function `erfc x = 1 − erf x` for real `x`.
pub fn erfc_real(x: f64) -> Result<f64, SpecialFunctionError> {
    if !x.is_finite() {
        return Err(SpecialFunctionError::NonFinite(ComplexValue::new(x, 0.0)));
    }
    if x < 0.0 {
        return Ok(2.0 - erfc_real(-x)?);
    }
    if x < ERFC_SERIES_LIMIT {
        return Ok(1.0 - kummer_erf(ComplexValue::new(x, 0.0)).re);
    }
    // w(ix) = erfcx(x) is real.
    let scaled = faddeeva_continued_fraction(ComplexValue::new(0.0, x)).re;
    Ok(exp_neg_sq(x) * scaled)
}

/// Faddeeva function `w(z) = e^{-z²} erfc(−iz)`.
///
/// This is the overflow-free way to evaluate products such as
/// `e^{-y²} erf(x + iy)` for large `y`.
pub fn faddeeva(z: ComplexValue) -> Result<ComplexValue, SpecialFunctionError> {
    check_finite(z)?;
    if z.im < 0.0 {
        // w(z) = 2 e^{-z²} − w(−z)
        let e = -(z * z);
        if e.re > LN_MAX {
            return Err(SpecialFunctionError::Overflow(z));
        }
        return Ok(2.0 * cexp_neg_sq(z) - faddeeva_upper(-z));
    }
    Ok(faddeeva_upper(z))
}

fn faddeeva_upper(z: ComplexValue) -> ComplexValue {
    let (x, y) = (z.re, z.im);
    let r2 = x * x + y * y;
    if r2 >= SERIES_RADIUS * SERIES_RADIUS || y >= ERFC_SERIES_LIMIT {
        let w = faddeeva_continued_fraction(z);
        if y == 0.0 {
            // On the real axis the fraction only carries the Dawson part.
            return ComplexValue::new(exp_neg_sq(x), w.im);
        }
        return w;
    }
    // w(z) = e^{-z²} (1 − erf(−iz)); −iz = y − ix lies in the right half plane
    // with real part below the erfc series limit, so the subtraction is mild.
    let erf = erf_complex(ComplexValue::new(y, -x))
        .expect("argument inside the series radius cannot overflow");
    cexp_neg_sq(z) * (ComplexValue::new(1.0, 0.0) - erf)
}

/// `1/x² − 1/sinh²x`, regular at the origin where it tends to `1/3`.
pub fn inv_sq_minus_inv_sinh_sq(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.5 {
        // Σ_{k≥1} c_k x^{2k-2}, from the Laurent series of 1/sinh²x.
        const COEFFS: [f64; 12] = [
            1.0 / 3.0,
            -1.0 / 15.0,
            2.0 / 189.0,
            -1.0 / 675.0,
            2.0 / 10_395.0,
            -1382.0 / 58_046_625.0,
            4.0 / 1_403_325.0,
            -3617.0 / 10_854_718_875.0,
            87_734.0 / 2_292_899_734_125.0,
            -349_222.0 / 80_596_287_646_875.0,
            310_732.0 / 640_374_140_030_625.0,
            -472_728_182.0 / 8_779_111_824_511_153_125.0,
        ];
        let x2 = x * x;
        COEFFS.iter().rev().fold(0.0, |acc, c| acc * x2 + c)
    } else {
        let s = x.sinh();
        1.0 / (x * x) - 1.0 / (s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    fn rel(a: ComplexValue, b: ComplexValue) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn erf_at_zero_is_zero() {
        assert_eq!(erf_complex(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn erf_reference_points() {
        assert!(rel(erf_complex(c(1.0, 0.0)).unwrap(), c(0.842700792949715, 0.0)) < 1e-14);
        let v = erf_complex(c(0.0, 1.0)).unwrap();
        assert_eq!(v.re, 0.0);
        assert!((v.im - 1.650425758797543).abs() < 1e-14);
    }

    #[test]
    fn erfc_reference_points() {
        assert_eq!(erfc_real(0.0).unwrap(), 1.0);
        assert!((erfc_real(0.1).unwrap() - 0.887537083981715).abs() < 1e-15);
        assert!(erfc_real(10.0).unwrap() < 1e-44);
        assert!(erfc_real(10.0).unwrap() > 0.0);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            erf_complex(c(0.5, 40.0)),
            Err(SpecialFunctionError::Overflow(_))
        ));
        assert!(matches!(
            erf_complex(c(f64::NAN, 0.0)),
            Err(SpecialFunctionError::NonFinite(_))
        ));
        assert!(erfc_real(f64::INFINITY).is_err());
    }

    #[test]
    fn faddeeva_on_real_axis() {
        // w(x) = e^{-x²} + 2i D(x)/√π; D(1) = 0.5380795069127684.
        let w = faddeeva(c(1.0, 0.0)).unwrap();
        assert!((w.re - (-1.0f64).exp()).abs() < 1e-15);
        assert!((w.im - 2.0 * 0.538_079_506_912_768_4 * FRAC_1_SQRT_PI).abs() < 1e-14);
    }

    #[test]
    fn laurent_remainder_is_regular() {
        assert!((inv_sq_minus_inv_sinh_sq(0.0) - 1.0 / 3.0).abs() < 1e-16);
        // Two series terms are exact to double precision here.
        let x = 1e-6f64;
        assert_eq!(inv_sq_minus_inv_sinh_sq(x), 1.0 / 3.0 - x * x / 15.0);
        for &x in &[0.05f64, 0.3, 0.49, 0.5, 0.51, 2.0] {
            let s = x.sinh();
            let direct = 1.0 / (x * x) - 1.0 / (s * s);
            let tol = if x < 0.1 { 1e-10 } else { 1e-13 };
            assert!((inv_sq_minus_inv_sinh_sq(x) - direct).abs() < tol, "{x}");
        }
        // Continuity across the branch switch.
        let below = inv_sq_minus_inv_sinh_sq(0.5 - 1e-15);
        let above = inv_sq_minus_inv_sinh_sq(0.5 + 1e-15);
        assert!((below - above).abs() < 1e-14);
    }
}
