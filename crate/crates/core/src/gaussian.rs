//! Standard normal density, distribution function and quantile.
//!
//! The distribution function goes through the complementary error function:
//! a positive-term series for `erf` on small arguments and a continued
//! fraction for `erfc` in the tails. The quantile starts from Wichura's
//! AS241 rational approximation and takes one Newton step on [`cdf`], so that
//! `cdf(quantile(u))` is consistent with this module's own `cdf`.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868_5;
#[allow(clippy::excessive_precision)]
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_585_8;

/// Below this argument `erf` is summed as a series, above it `erfc` comes
/// from the continued fraction.
const ERF_SERIES_LIMIT: f64 = 2.5;

/// The standard normal law N(0, 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StandardNormal;

impl StandardNormal {
    pub fn pdf(&self, y: f64) -> f64 {
        pdf(y)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        cdf(y)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        quantile(u)
    }
}

/// Density `exp(-y^2/2) / sqrt(2 pi)`.
#[inline]
pub fn pdf(y: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * y * y).exp()
}

/// `erf(x)` for `0 <= x <= ERF_SERIES_LIMIT`:
/// `2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))`.
/// Every term is positive, so there is no cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    loop {
        term *= 2.0 * x2 / (2.0 * k + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    2.0 * FRAC_1_SQRT_PI * (-x2).exp() * sum
}

/// `erfc(x)` for `x >= ERF_SERIES_LIMIT` by the Laplace continued fraction
/// `sqrt(pi) exp(x^2) erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..500 {
        let a = if k == 1 { 1.0 } else { 0.5 * (k - 1) as f64 };
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI * (-x * x).exp() * f
}

/// Distribution function of N(0, 1).
pub fn cdf(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    let x = y.abs() * std::f64::consts::FRAC_1_SQRT_2;
    if x > 27.5 {
        // erfc(x) is below the smallest subnormal.
        return if y < 0.0 { 0.0 } else { 1.0 };
    }
    if x < ERF_SERIES_LIMIT {
        let e = erf_series(x);
        if y < 0.0 {
            0.5 - 0.5 * e
        } else {
            0.5 + 0.5 * e
        }
    } else {
        let c = erfc_continued_fraction(x);
        if y < 0.0 {
            0.5 * c
        } else {
            1.0 - 0.5 * c
        }
    }
}

/// Quantile of N(0, 1). Fails unless `0 < u < 1`.
pub fn quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid(format!(
            "normal quantile requires 0 < u < 1, got {u}"
        )));
    }
    Ok(quantile_unchecked(u))
}

/// [`quantile`] without the domain check; callers guarantee `0 < u < 1`.
#[inline]
pub(crate) fn quantile_unchecked(u: f64) -> f64 {
    if u == 0.5 {
        0.0
    } else if u < 0.5 {
        lower_quantile(u)
    } else {
        // 1 - u is exact for u > 1/2.
        -lower_quantile(1.0 - u)
    }
}

/// Quantile for `0 < u < 1/2`: AS241 followed by one Newton step.
fn lower_quantile(u: f64) -> f64 {
    let y = as241(u);
    let density = pdf(y);
    if density > 0.0 {
        y - (cdf(y) - u) / density
    } else {
        y
    }
}

/// Wichura (1988), Algorithm AS241 PPND16.
#[allow(clippy::excessive_precision)]
fn as241(p: f64) -> f64 {
    const SPLIT1: f64 = 0.425;
    const SPLIT2: f64 = 5.0;
    const CONST1: f64 = 0.180625;
    const CONST2: f64 = 1.6;

    const A: [f64; 8] = [
        3.387_132_872_796_366_608_0e0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083_0e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061_0e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561_0e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34e0,
        4.630_337_846_156_545_295_90e0,
        5.769_497_221_460_691_405_50e0,
        3.647_848_324_763_204_605_04e0,
        1.270_458_252_452_368_382_58e0,
        2.417_807_251_774_506_117_70e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_40e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87e0,
        1.676_384_830_183_803_849_40e0,
        6.897_673_349_851_000_045_50e-1,
        1.481_039_764_274_800_745_90e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946_00e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_20e0,
        5.463_784_911_164_114_369_90e0,
        1.784_826_539_917_291_335_80e0,
        2.965_605_718_285_048_912_30e-1,
        2.653_218_952_657_612_309_30e-2,
        1.242_660_947_388_078_438_60e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_90e-1,
        1.369_298_809_227_358_053_10e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591_00e-4,
        1.846_318_317_510_054_681_80e-5,
        1.421_511_758_316_445_888_70e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let value = if r <= SPLIT2 {
        r -= CONST2;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= SPLIT2;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
