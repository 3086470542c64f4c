//! Closed-form and numerically solved quantities for percolation on Q^d.
//!
//! With `p = c/d` and `c > 1` the giant component occupies a fraction `y(c)`
//! of the cube, where `y` is the root in `(0, 1)` of `y = 1 - exp(-c y)`.
//! The same `y` is the limiting survival probability of a Galton-Watson
//! tree with `Bin(d, c/d)` offspring.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest `c` accepted by [`solve_y`].
pub const MIN_SUPERCRITICAL_C: f64 = 1.0 + 1e-9;

const Y_RESIDUAL: f64 = 1e-12;
const GW_TOLERANCE: f64 = 1e-14;

/// Survival fraction: the unique root of `y = 1 - exp(-c y)` in `(0, 1)`.
///
/// Bisection on `g(y) = y - 1 + exp(-c y)`, which is negative just above 0
/// and positive at 1 for every `c > 1`.
pub fn solve_y(c: f64) -> Result<f64> {
    if !c.is_finite() || c < MIN_SUPERCRITICAL_C {
        return Err(Error::domain(format!(
            "y(c) has no root in (0, 1) for c = {c}; need c > 1"
        )));
    }
    // y - (1 - exp(-c y)), accurate for small y
    let g = |y: f64| y + (-c * y).exp_m1();
    let (mut lo, mut hi) = (1e-12_f64, 1.0_f64);
    // Near c = 1 the root is ~2(c - 1); shrink the lower end until the
    // bracket changes sign.
    while g(lo) >= 0.0 && lo > f64::MIN_POSITIVE {
        lo *= 1e-3;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if g(mid).abs() <= Y_RESIDUAL * mid.min(1.0) || mid == lo || mid == hi {
            return Ok(mid);
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `y ~ 2 eps` for `c = 1 + eps` with small `eps`.
pub fn y_small_eps_approx(eps: f64) -> f64 {
    2.0 * eps
}

/// Upper bound `d / (c - 1 - ln c)` on every non-giant component.
pub fn second_component_bound(c: f64, d: u32) -> Result<f64> {
    if !c.is_finite() || c <= 1.0 {
        return Err(Error::domain(format!(
            "second component bound needs c > 1, got {c}"
        )));
    }
    Ok(f64::from(d) / second_bound_denominator(c))
}

/// `c - 1 - ln c`; zero at `c = 1` and positive elsewhere on `c > 0`.
pub fn second_bound_denominator(c: f64) -> f64 {
    c - 1.0 - c.ln()
}

/// `9 ln n / eps^2` with `n = 2^d`: the largest component size at
/// `p = (1 - eps)/(d - 1)`.
pub fn subcritical_bound(d: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(9.0 * f64::from(d) * std::f64::consts::LN_2 / (eps * eps))
}

/// Chernoff-type bound `exp(-eps^2 k / 4)`.
pub fn chernoff_bound(eps: f64, k: u64) -> f64 {
    (-eps * eps * k as f64 / 4.0).exp()
}

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)` for integer `n`.
#[allow(clippy::excessive_precision)]
fn stirling_remainder(n: u64) -> f64 {
    const SMALL: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258_219_670_2,
        0.041_340_695_955_409_294_093_822_1,
        0.027_677_925_684_998_339_148_789_29,
        0.020_790_672_103_765_093_111_522_77,
        0.016_644_691_189_821_192_163_194_87,
        0.013_876_128_823_070_747_998_745_73,
        0.011_896_709_945_891_770_095_055_72,
        0.010_411_265_261_972_096_497_478_567,
        0.009_255_462_182_712_732_917_728_637,
        0.008_330_563_433_362_871_256_469_318,
        0.007_573_675_487_951_840_794_972_024,
        0.006_942_840_107_209_529_865_664_152,
        0.006_408_994_188_004_207_068_439_631,
        0.005_951_370_112_758_847_735_624_416,
        0.005_554_733_551_962_801_371_038_690,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n < 16 {
        return SMALL[n as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, by series when `x` is close to
/// `np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / f64::from(2 * j + 1);
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `P[Bin(nn, q) = j]` in saddle-point form, accurate to a few ulps
/// relative for `nn` in the tens of thousands.
fn binomial_pmf(nn: u64, q: f64, j: u64) -> f64 {
    let p_fail = 1.0 - q;
    let n = nn as f64;
    if j == 0 {
        let lc = if q < 0.1 {
            -deviance(n, n * p_fail) - n * q
        } else {
            n * p_fail.ln()
        };
        return lc.exp();
    }
    if j == nn {
        let lc = if p_fail < 0.1 {
            -deviance(n, n * q) - n * p_fail
        } else {
            n * q.ln()
        };
        return lc.exp();
    }
    let x = j as f64;
    let lc = stirling_remainder(nn)
        - stirling_remainder(j)
        - stirling_remainder(nn - j)
        - deviance(x, n * q)
        - deviance(n - x, n * p_fail);
    let lf = (2.0 * std::f64::consts::PI).ln() + x.ln() + (-x / n).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in terms {
        let s = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - s) + x
        } else {
            (x - s) + sum
        };
        sum = s;
    }
    sum + comp
}

/// `P[Bin(nn, q) >= k]`.
///
/// Each term is evaluated in log space (Stirling remainder plus deviance)
/// and the terms are summed with compensation, smallest first. The side of
/// the distribution away from the mean is summed; the upper tail is
/// recovered as a complement when `k` sits below the mean.
pub fn binom_tail_geq(nn: u64, q: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::input(format!("probability {q} outside [0, 1]")));
    }
    if k > nn + 1 {
        return Err(Error::input(format!("k = {k} exceeds nn + 1 = {}", nn + 1)));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k == nn + 1 || q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let mean = nn as f64 * q;
    let tail = if k as f64 >= mean {
        compensated_sum((k..=nn).rev().map(|j| binomial_pmf(nn, q, j)))
    } else {
        1.0 - compensated_sum((0..k).map(|j| binomial_pmf(nn, q, j)))
    };
    Ok(tail.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwParams {
    pub d: u32,
    pub p: f64,
    pub extinction: f64,
    pub survival: f64,
}

/// Extinction probability of a Galton-Watson tree with `Bin(d, p)` offspring:
/// the smallest fixed point of `f(s) = (1 - p + p s)^d` on `[0, 1]`, reached
/// by iterating `f` from 0.
pub fn gw_extinction(d: u32, p: f64) -> Result<GwParams> {
    if d == 0 {
        return Err(Error::input("offspring trial count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} outside [0, 1]")));
    }
    let extinction = if p == 1.0 {
        // Every node has exactly d >= 1 children.
        0.0
    } else if f64::from(d) * p <= 1.0 {
        1.0
    } else {
        let f = |s: f64| (1.0 - p + p * s).powi(d as i32);
        let mut s = 0.0f64;
        loop {
            let next = f(s);
            if (next - s).abs() <= GW_TOLERANCE {
                break next;
            }
            s = next;
        }
    };
    Ok(GwParams {
        d,
        p,
        extinction,
        survival: 1.0 - extinction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwLimitRow {
    pub d: u32,
    pub survival: f64,
    pub y: f64,
    pub deviation: f64,
}

/// Exact survival at `p = c/d` for each `d`, against the limit `y(c)`.
pub fn gw_survival_limit_check(c: f64, ds: &[u32]) -> Result<Vec<GwLimitRow>> {
    let y = solve_y(c)?;
    ds.iter()
        .map(|&d| {
            if d < 2 {
                return Err(Error::input(format!("d must be at least 2, got {d}")));
            }
            let p = c / f64::from(d);
            if p > 1.0 {
                return Err(Error::input(format!("c/d = {p} exceeds 1 for d = {d}")));
            }
            let survival = gw_extinction(d, p)?.survival;
            Ok(GwLimitRow {
                d,
                survival,
                y,
                deviation: (survival - y).abs(),
            })
        })
        .collect()
}

/// Bounds on the number of `k`-vertex subtrees containing a fixed vertex in
/// a graph of maximum degree `d`, kept in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeCountBound {
    /// `ln((e d)^(k-1))`
    pub ln_loose: f64,
    /// `ln(k^(k-2) / (k-1)! * d^(k-1))`
    pub ln_sharp: f64,
}

impl TreeCountBound {
    /// May be infinite for large `k`; use the log fields then.
    pub fn loose(&self) -> f64 {
        self.ln_loose.exp()
    }

    pub fn sharp(&self) -> f64 {
        self.ln_sharp.exp()
    }
}

pub fn tree_count_bound(d: u32, k: u64) -> Result<TreeCountBound> {
    if d == 0 || k == 0 {
        return Err(Error::input("tree count bound needs d >= 1 and k >= 1"));
    }
    let km1 = (k - 1) as f64;
    let ln_d = f64::from(d).ln();
    let kf = k as f64;
    Ok(TreeCountBound {
        ln_loose: km1 * (1.0 + ln_d),
        ln_sharp: (kf - 2.0) * kf.ln() - ln_gamma(kf) + km1 * ln_d,
    })
}

/// Every theory value a configuration can be judged against.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TheoryValues {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_small_eps_approx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcritical_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gw_survival: Option<f64>,
}

impl TheoryValues {
    /// Computes whatever the given parameters determine. `c <= 1` is a
    /// domain error since every `c`-dependent value is supercritical-only.
    pub fn compute(c: Option<f64>, d: Option<u32>, eps: Option<f64>) -> Result<Self> {
        let mut out = TheoryValues {
            c,
            d,
            eps,
            ..Default::default()
        };
        if let Some(c) = c {
            out.y = Some(solve_y(c)?);
            out.y_small_eps_approx = Some(y_small_eps_approx(c - 1.0));
            if let Some(d) = d {
                out.second_bound = Some(second_component_bound(c, d)?);
                let p = c / f64::from(d);
                if p <= 1.0 {
                    out.gw_survival = Some(gw_extinction(d, p)?.survival);
                }
            }
        }
        if let (Some(d), Some(eps)) = (d, eps) {
            out.subcritical_k = Some(subcritical_bound(d, eps)?);
        }
        Ok(out)
    }
}
