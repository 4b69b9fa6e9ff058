//! Small statistics helpers: KS distances, binomial intervals, medians, fits.

/// Two-sided KS distance between the empirical CDF of `sorted` and a
/// continuous CDF. `sorted` must be ascending and non-empty.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    d.clamp(0.0, 1.0)
}

/// Signed one-sided two-sample statistic `max_x (F_a(x) - F_b(x))` over all
/// sample points. Both inputs ascending.
pub fn one_sided_margin(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.partition_point(|&v| v <= x) as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| ecdf(a, x) - ecdf(b, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Two-sample KS critical value at the 1% level, `1.6276 sqrt((m+n)/(mn))`.
pub fn ks_two_sample_critical_1pct(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    1.6276 * ((m + n) / (m * n)).sqrt()
}

/// One-sample KS critical value at the 5% level, `1.36 / sqrt(m)`.
pub fn ks_critical_5pct(m: usize) -> f64 {
    1.36 / (m as f64).sqrt()
}

pub fn binomial_se(p: f64, trials: f64) -> f64 {
    (p * (1.0 - p) / trials).sqrt()
}

/// Wilson score interval for `successes / trials` at `z` standard errors.
pub fn wilson_interval(successes: f64, trials: f64, z: f64) -> (f64, f64) {
    if trials <= 0.0 {
        return (0.0, 1.0);
    }
    let p = successes / trials;
    let z2 = z * z;
    let denom = 1.0 + z2 / trials;
    let center = (p + z2 / (2.0 * trials)) / denom;
    let half = z * (p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of a slice; `+inf` entries are allowed and sort last.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
