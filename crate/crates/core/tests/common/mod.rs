//! Independent reference computations for the integration tests: CDFs by
//! adaptive Gauss–Kronrod quadrature of the densities, with normalizing
//! constants from the exact half-integer gamma recurrence.

#![allow(dead_code)]

use std::f64::consts::PI;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_KRONROD[7] * fc;
    let mut gauss = GK_GAUSS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_KRONROD[i] * s;
        if i % 2 == 1 {
            gauss += GK_GAUSS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || (b - a).abs() < 1e-12 {
        return value;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// ∫_a^b f with absolute tolerance ~1e-15.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    adapt(&f, a, b, 1e-15, 40)
}

/// Γ(k/2) for positive integer k, by exact recurrence.
pub fn gamma_half(k: u32) -> f64 {
    let mut g = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut a = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while a < k as f64 / 2.0 {
        g *= a;
        a += 1.0;
    }
    g
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    let half_mass = integrate(normal_density, 0.0, x.abs());
    if x >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

pub fn t_density(df: u32, x: f64) -> f64 {
    let nu = df as f64;
    let c = gamma_half(df + 1) / ((nu * PI).sqrt() * gamma_half(df));
    c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

pub fn t_cdf(df: u32, x: f64) -> f64 {
    let half_mass = integrate(|t| t_density(df, t), 0.0, x.abs());
    if x >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

pub fn chi2_cdf(df: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df as f64;
    let c = 2.0 / (2f64.powf(k / 2.0) * gamma_half(df));
    // substitution t = u² removes the df = 1 singularity at the origin
    integrate(|u| c * u.powf(k - 1.0) * (-0.5 * u * u).exp(), 0.0, x.sqrt())
}

/// Bisection on an increasing function to find f(x) = target.
pub fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov distance between the empirical CDF of `draws` and `cdf`.
pub fn ks_distance(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = draws.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < draws.len() {
        let mut j = i;
        while j + 1 < draws.len() && draws[j + 1] == draws[i] {
            j += 1;
        }
        let f = cdf(draws[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// Three binomial standard errors of a proportion p over r replicates.
pub fn three_se(p: f64, r: usize) -> f64 {
    3.0 * (p * (1.0 - p) / r as f64).sqrt()
}

pub mod rules;
