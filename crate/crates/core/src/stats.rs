//! Small numeric helpers and tail probabilities.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the n-1 denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Central moment of the given order with the 1/n denominator.
pub fn central_moment(x: &[f64], order: i32) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(order)).sum::<f64>() / x.len() as f64
}

/// Right-tail probability of a chi-square variate.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    ChiSquared::new(df).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

/// Right-tail probability of an F(df1, df2) variate.
pub fn f_sf(stat: f64, df1: f64, df2: f64) -> f64 {
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    FisherSnedecor::new(df1, df2)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN)
}

/// Two-sided Student-t probability.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Two-sided standard normal probability.
pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    (2.0 * standard_normal().sf(z.abs())).min(1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
