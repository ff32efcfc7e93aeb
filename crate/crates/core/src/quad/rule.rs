//! 10-point Gauss / 21-point Kronrod pair with the QUADPACK error heuristic.

use crate::ComplexValue;

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Number of integrand evaluations per application of the rule.
pub(crate) const NODES: usize = 21;

/// Abscissae of the rule mapped onto `[a, b]`, in the order expected by
/// [`combine`].
pub(crate) fn nodes(a: f64, b: f64) -> [f64; NODES] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut x = [center; NODES];
    for j in 0..10 {
        x[2 * j] = center - half * XGK[j];
        x[2 * j + 1] = center + half * XGK[j];
    }
    x
}

/// Integral estimate and error estimate from integrand values at [`nodes`].
pub(crate) fn combine(a: f64, b: f64, fv: &[ComplexValue; NODES]) -> (ComplexValue, f64) {
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let fc = fv[20];
    let mut res_k = fc * WGK[10];
    let mut res_g = ComplexValue::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    for j in 0..10 {
        let (f1, f2) = (fv[2 * j], fv[2 * j + 1]);
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm());
    }
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Kronrod-weighted sum of per-node magnitudes, on the reference interval.
pub(crate) fn weighted_sum(values: &[f64; NODES]) -> f64 {
    let mut sum = values[20] * WGK[10];
    for j in 0..10 {
        sum += (values[2 * j] + values[2 * j + 1]) * WGK[j];
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_error(k: i32, gauss_only: bool) -> f64 {
        let f = |x: f64| ComplexValue::new(x.powi(k), 0.0);
        let x = nodes(-1.0, 1.0);
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        let approx: f64 = if gauss_only {
            (0..5)
                .map(|j| (f(x[4 * j + 2]).re + f(x[4 * j + 3]).re) * WG[j])
                .sum()
        } else {
            (0..10)
                .map(|j| (f(x[2 * j]).re + f(x[2 * j + 1]).re) * WGK[j])
                .sum::<f64>()
                + f(0.0).re * WGK[10]
        };
        (approx - exact).abs()
    }

    #[test]
    fn kronrod_rule_is_exact_through_degree_31() {
        for k in 0..=31 {
            assert!(monomial_error(k, false) < 1e-15, "degree {k}");
        }
        assert!(monomial_error(32, false) > 1e-15);
    }

    #[test]
    fn gauss_rule_is_exact_through_degree_19() {
        for k in 0..=19 {
            assert!(monomial_error(k, true) < 1e-15, "degree {k}");
        }
        assert!(monomial_error(20, true) > 1e-15);
    }
}
