//! Two-sided Mann-Whitney U test.

use statrs::function::erf::erfc;
use thiserror::Error;

/// Both samples need at least this many observations for the normal
/// approximation to be used; smaller samples get the exact null distribution.
pub const NORMAL_MIN_SAMPLE: usize = 8;

pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample {0} is empty")]
    EmptySample(char),
    #[error("sample contains NaN")]
    NotANumber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// U of the first sample: the number of (a, b) pairs with a > b, ties
    /// counting one half.
    pub u_statistic: f64,
    pub p_value: f64,
    pub significant_at_01: bool,
    pub method: Method,
}

impl TestResult {
    fn new(u_statistic: f64, p_value: f64, method: Method) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            u_statistic,
            p_value,
            significant_at_01: p_value < SIGNIFICANCE,
            method,
        }
    }
}

/// Pooled midranks, doubled so they are integers: a tie group covering
/// 1-based positions `i..=j` gets `i + j`.
struct Ranked {
    doubled: Vec<u64>,
    n_a: usize,
    /// Sum of `t^3 - t` over tie groups.
    tie_term: f64,
}

impl Ranked {
    fn new(a: &[f64], b: &[f64]) -> Result<Self, StatsError> {
        if a.is_empty() {
            return Err(StatsError::EmptySample('A'));
        }
        if b.is_empty() {
            return Err(StatsError::EmptySample('B'));
        }
        if a.iter().chain(b).any(|v| v.is_nan()) {
            return Err(StatsError::NotANumber);
        }
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let mut order: Vec<usize> = (0..pooled.len()).collect();
        order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));

        let mut doubled = vec![0u64; pooled.len()];
        let mut tie_term = 0.0;
        let mut start = 0;
        while start < order.len() {
            let mut end = start;
            while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[start]] {
                end += 1;
            }
            let rank2 = (start + 1 + end + 1) as u64;
            for &i in &order[start..=end] {
                doubled[i] = rank2;
            }
            let t = (end - start + 1) as f64;
            tie_term += t * t * t - t;
            start = end + 1;
        }
        Ok(Self {
            doubled,
            n_a: a.len(),
            tie_term,
        })
    }

    fn n_b(&self) -> usize {
        self.doubled.len() - self.n_a
    }

    /// `2 * U_A`, exact.
    fn doubled_u(&self) -> i64 {
        let r2: u64 = self.doubled[..self.n_a].iter().sum();
        r2 as i64 - (self.n_a * (self.n_a + 1)) as i64
    }

    fn all_tied(&self) -> bool {
        self.doubled.iter().all(|&r| r == self.doubled[0])
    }
}

/// Picks the exact test when either sample is smaller than
/// [`NORMAL_MIN_SAMPLE`], the normal approximation otherwise.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < NORMAL_MIN_SAMPLE || b.len() < NORMAL_MIN_SAMPLE {
        mann_whitney_exact(a, b)
    } else {
        mann_whitney_normal(a, b)
    }
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
pub fn mann_whitney_normal(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    let ranked = Ranked::new(a, b)?;
    let u = ranked.doubled_u() as f64 / 2.0;
    if ranked.all_tied() {
        return Ok(TestResult::new(u, 1.0, Method::Normal));
    }
    let (na, nb) = (ranked.n_a as f64, ranked.n_b() as f64);
    let n = na + nb;
    let mean = na * nb / 2.0;
    let variance = na * nb / 12.0 * ((n + 1.0) - ranked.tie_term / (n * (n - 1.0)));
    let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    Ok(TestResult::new(
        u,
        erfc(z / std::f64::consts::SQRT_2),
        Method::Normal,
    ))
}

/// Exact permutation distribution of U (midranks, ties included), by
/// dynamic programming over subset rank sums of the smaller sample.
/// Two-sided p is `min(1, 2 * min(P[U <= u], P[U >= u]))`.
pub fn mann_whitney_exact(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    let ranked = Ranked::new(a, b)?;
    let u2 = ranked.doubled_u();
    let u = u2 as f64 / 2.0;
    if ranked.all_tied() {
        return Ok(TestResult::new(u, 1.0, Method::Exact));
    }
    let n = ranked.doubled.len();
    let na = ranked.n_a;
    // Work on whichever side is smaller; U_B = nA nB - U_A.
    let (m, observed2) = if na <= n - na {
        (na, u2)
    } else {
        (n - na, (2 * na * (n - na)) as i64 - u2)
    };
    let max_sum = 2 * n * m;
    // ways[j][s]: subsets of size j among the items seen so far whose
    // doubled ranks sum to s.
    let mut ways = vec![vec![0f64; max_sum + 1]; m + 1];
    ways[0][0] = 1.0;
    for (seen, &r) in ranked.doubled.iter().enumerate() {
        let r = r as usize;
        for j in (1..=m.min(seen + 1)).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            let prev = &lower[j - 1];
            let cur = &mut upper[0];
            for s in (r..=max_sum).rev() {
                let w = prev[s - r];
                if w != 0.0 {
                    cur[s] += w;
                }
            }
        }
    }
    let offset = (m * (m + 1)) as i64;
    let (mut total, mut le, mut ge) = (0.0, 0.0, 0.0);
    for (s, &w) in ways[m].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let stat2 = s as i64 - offset;
        total += w;
        if stat2 <= observed2 {
            le += w;
        }
        if stat2 >= observed2 {
            ge += w;
        }
    }
    let p = (2.0 * le.min(ge) / total).min(1.0);
    Ok(TestResult::new(u, p, Method::Exact))
}
