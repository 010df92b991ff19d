#![allow(dead_code)]

use garchx::garch::{Distribution, GarchParams};
use garchx::market_data::DummySeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lanczos approximation (g = 7, nine terms), independent of the crate's
/// special-function backend.
pub fn lanczos_ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - lanczos_ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Textbook log-likelihood written as a plain loop over the densities.
pub fn naive_log_likelihood(
    p: &GarchParams,
    y: &[f64],
    x: &[f64],
    d: &[f64],
    dist: Distribution,
    initial_variance: f64,
) -> f64 {
    let pi = std::f64::consts::PI;
    let mut total = 0.0;
    let mut prev_e = 0.0;
    let mut prev_s2 = 0.0;
    for t in 0..y.len() {
        let e = y[t] - p.c1 - p.c2 * x[t];
        let s2 = if t == 0 {
            initial_variance
        } else {
            (p.c3 + p.c4 * prev_e * prev_e + p.c5 * prev_s2 + p.c6 * d[t]).max(1e-12)
        };
        let z = e / s2.sqrt();
        let log_f = match dist {
            Distribution::Gaussian => -0.5 * (2.0 * pi).ln() - 0.5 * z * z,
            Distribution::StudentT => {
                let nu = p.nu.unwrap();
                lanczos_ln_gamma((nu + 1.0) / 2.0)
                    - lanczos_ln_gamma(nu / 2.0)
                    - 0.5 * (pi * (nu - 2.0)).ln()
                    - (nu + 1.0) / 2.0 * (1.0 + z * z / (nu - 2.0)).ln()
            }
            Distribution::Ged => {
                let nu = p.nu.unwrap();
                let lambda = (2f64.powf(-2.0 / nu) * (lanczos_ln_gamma(1.0 / nu)
                    - lanczos_ln_gamma(3.0 / nu))
                .exp())
                .sqrt();
                nu.ln() - 0.5 * (z.abs() / lambda).powf(nu)
                    - lambda.ln()
                    - (1.0 + 1.0 / nu) * 2f64.ln()
                    - lanczos_ln_gamma(1.0 / nu)
            }
        };
        total += log_f - 0.5 * s2.ln();
        prev_e = e;
        prev_s2 = s2;
    }
    total
}

/// Random inputs for likelihood comparisons.
pub struct RandomCase {
    pub params: GarchParams,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub dummy: DummySeries,
    pub initial_variance: f64,
}

pub fn random_case(seed: u64, n: usize) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let start = rng.random_range(0..n / 2);
    let len = rng.random_range(1..n / 4);
    let dummy = DummySeries::from_values(
        (0..n)
            .map(|i| if (start..start + len).contains(&i) { 1.0 } else { 0.0 })
            .collect(),
    )
    .unwrap();
    let params = GarchParams::new(
        rng.random_range(-0.5..0.5),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.01..0.5),
        rng.random_range(0.0..0.3),
        rng.random_range(0.0..0.69),
        rng.random_range(-0.05..0.5),
    );
    RandomCase {
        params,
        y,
        x,
        dummy,
        initial_variance: rng.random_range(0.2..3.0),
    }
}
