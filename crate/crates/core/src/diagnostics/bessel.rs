//! Modified Bessel function `K0` and the density of a product of two
//! coordinates of independent random unit vectors.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Chebyshev coefficients, highest order first.
// x in (0, 2]: K0(x) = cheb(x² − 2, SMALL) − ln(x/2)·I0(x)
#[allow(clippy::excessive_precision)]
const SMALL: [f64; 10] = [
    1.374_465_435_880_750_896_9e-16,
    4.259_816_142_791_082_576_5e-14,
    1.034_969_525_763_362_458_5e-11,
    1.904_516_377_220_208_859e-9,
    2.534_791_079_026_149_457_3e-7,
    2.286_212_103_119_451_786_1e-5,
    1.264_615_411_446_925_923_4e-3,
    3.597_993_651_536_150_162_7e-2,
    3.442_898_999_246_284_868_9e-1,
    -5.353_273_932_339_027_687_2e-1,
];

// x > 2: K0(x) = e^{−x}/√x · cheb(8/x − 2, LARGE)
#[allow(clippy::excessive_precision)]
const LARGE: [f64; 26] = [
    -1.733_171_200_582_100_027_8e-18,
    5.300_433_771_177_335_771e-18,
    -1.647_580_593_984_263_281_5e-17,
    5.210_391_777_643_554_112_5e-17,
    -1.678_231_125_754_900_638_3e-16,
    5.512_055_999_404_333_364_9e-16,
    -1.848_593_377_920_907_169_4e-15,
    6.340_076_476_276_645_966_1e-15,
    -2.227_513_326_746_296_360_4e-14,
    8.032_890_775_068_374_369_4e-14,
    -2.980_096_923_148_178_354_8e-13,
    1.140_340_588_207_344_234_7e-12,
    -4.514_597_883_374_519_175_1e-12,
    1.855_949_114_954_926_555e-11,
    -7.957_489_244_477_397_037_7e-11,
    3.577_397_281_400_328_447_2e-10,
    -1.697_534_509_389_061_515_6e-9,
    8.574_034_017_414_226_085_8e-9,
    -4.660_489_897_687_947_665_6e-8,
    2.766_813_639_445_015_076_1e-7,
    -1.831_755_522_719_119_484_8e-6,
    1.394_981_371_887_649_936_4e-5,
    -1.284_954_958_162_780_263_8e-4,
    1.569_883_885_730_053_374_9e-3,
    -3.144_810_131_196_450_054_3e-2,
    2.440_303_082_065_955_454_7,
];

fn chbevl(x: f64, coef: &[f64]) -> f64 {
    let mut b0 = coef[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coef[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x * b1 - b2 + c;
    }
    0.5 * (b0 - b2)
}

/// `I0(x)` by its power series; only used for `x ≤ 2`.
fn bessel_i0_small(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `K0(x)` without argument checks; `+∞` at zero.
pub(crate) fn k0(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else if x <= 2.0 {
        chbevl(x * x - 2.0, &SMALL) - (0.5 * x).ln() * bessel_i0_small(x)
    } else {
        (-x).exp() / x.sqrt() * chbevl(8.0 / x - 2.0, &LARGE)
    }
}

/// Modified Bessel function of the second kind, order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("K0 needs a positive finite argument, got {x}")));
    }
    Ok(k0(x))
}

/// `(d/π)·K0(d·|z|)`, the density of `a·b` for `a, b ~ N(0, 1/d)` independent.
pub fn product_density(z: f64, d: usize) -> Result<f64> {
    if z == 0.0 || !z.is_finite() {
        return Err(Error::invalid("product density is singular at 0"));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let d = d as f64;
    Ok(d / PI * k0(d * z.abs()))
}

/// `(1/π)·∫₀^x K0(u) du`; tends to 1/2 as `x → ∞`.
pub(crate) fn half_mass(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // Past u = 40 the remaining mass is below 1e-18.
    let upper = x.min(40.0);
    let out = quadrature::double_exponential::integrate(k0, 0.0, upper, 1e-14);
    (out.integral / PI).min(0.5)
}

/// Distribution function of the product density.
pub(crate) fn product_cdf(z: f64, d: usize) -> f64 {
    let m = half_mass(d as f64 * z.abs());
    if z < 0.0 {
        0.5 - m
    } else {
        0.5 + m
    }
}
