mod common;

use common::{two_lognormal_cdf, two_lognormal_pdf};
use preint::harness::{estimate_point, Sampling};
use preint::model::pca_factorize;
use preint::{CovarianceSpec, Executor, GeneratingVector, Kind, LognormalSum};

// 40-digit reference values of P(e^Y0 + e^Y1 <= 2), its density, and the
// central difference with h = 1e-4.
const CDF_2: f64 = 0.394_155_432_306_628_81;
const PDF_2: f64 = 0.258_844_039_918_985_89;
const DIFF_2: f64 = 0.258_844_039_840_245_37;

#[test]
fn quadrature_matches_reference_values() {
    assert!((two_lognormal_cdf(2.0) - CDF_2).abs() < 1e-12);
    assert!((two_lognormal_pdf(2.0, 1e-4) - DIFF_2).abs() < 1e-8);
    assert!((DIFF_2 - PDF_2).abs() < 1e-9);
}

#[test]
fn estimator_agrees_with_quadrature_across_seeds() {
    let model = LognormalSum::new(pca_factorize(&CovarianceSpec::equicorrelated(2, 1.0, 0.0)).unwrap()).unwrap();
    let z = GeneratingVector::default_builtin();
    let exec = Executor::sequential();
    for seed in [3, 17, 99] {
        let s = Sampling::new(&z, 1 << 12, 8, seed, &exec);
        for (t, want) in [(2.0, CDF_2), (5.0, two_lognormal_cdf(5.0))] {
            let e = estimate_point(&model, Kind::Cdf, t, &s).unwrap();
            assert!((e.mean - want).abs() <= 4.0 * e.stderr.max(1e-14), "t = {t}: {} vs {want}", e.mean);
        }
        let e = estimate_point(&model, Kind::Pdf, 2.0, &s).unwrap();
        assert!((e.mean - PDF_2).abs() <= 4.0 * e.stderr.max(1e-12), "{} vs {PDF_2}", e.mean);
    }
}
