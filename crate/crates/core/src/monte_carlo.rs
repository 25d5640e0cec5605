//! Chaos samplers and empirical `L_p` moments.
//!
//! Sampling is split into batches of `cfg.batch` draws; batch `b` of a chaos
//! with tag `t` reads the stream `(seed, t, b)`. Norms are collected in batch
//! order and reduced sequentially, so estimates do not depend on the number
//! of worker threads.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{lower_sum, upper_sum};
use crate::error::{invalid, Error, Result};
use crate::hermite::{expand, PolynomialSpec};
use crate::norms::OptimizerConfig;
use crate::rng::{self, StreamRng};
use crate::tensor::{contract_leading, for_each_index, CoeffTensor};

const Z95: f64 = 1.959963984540054;
const BOOTSTRAP_RESAMPLES: u64 = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCConfig {
    pub samples: usize,
    pub p_values: Vec<f64>,
    pub seed: u64,
    pub batch: usize,
    /// Percentile bootstrap intervals instead of the CLT interval.
    pub bootstrap: bool,
}

impl Default for MCConfig {
    fn default() -> Self {
        MCConfig {
            samples: 100_000,
            p_values: vec![2.0],
            seed: 0,
            batch: 4096,
            bootstrap: false,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(invalid("at least 2 samples required"));
        }
        if self.batch == 0 {
            return Err(invalid("batch size must be at least 1"));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
            return Err(invalid(format!("moment order p = {p} must be ≥ 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    /// `(mean |S|^p)^(1/p)`.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Ratio of two moment estimates with a delta-method standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpMode {
    /// Symmetric exponentials by inverse CDF with a random sign.
    Direct,
    /// `eps * g * g'` in place of each exponential.
    GaussProduct,
}

/// What to sample.
#[derive(Clone, Copy, Debug)]
pub enum Chaos<'a> {
    /// `sum_i a_i g^1_{i_1} .. g^d_{i_d}`.
    Decoupled(&'a CoeffTensor),
    /// `sum_{i_1 < .. < i_d} a_i g_{i_1} .. g_{i_d}`.
    Undecoupled(&'a CoeffTensor),
    /// `sum_i a_i E^1_{i_1} .. E^d_{i_d}` with exponential variables.
    Exponential(&'a CoeffTensor, ExpMode),
    /// `f(G) - E f(G)`.
    Polynomial(&'a PolynomialSpec),
}

impl Chaos<'_> {
    fn tag(&self) -> &'static str {
        match self {
            // the Gaussian samplers share draws: the first vector of the
            // decoupled chaos is the vector of the undecoupled one
            Chaos::Decoupled(_) | Chaos::Undecoupled(_) => "gauss",
            Chaos::Exponential(_, ExpMode::Direct) => "exp-direct",
            Chaos::Exponential(_, ExpMode::GaussProduct) => "exp-gg",
            Chaos::Polynomial(_) => "poly",
        }
    }

    /// Norms of `cfg.samples` independent realizations, in sample order.
    pub fn sample_norms(&self, cfg: &MCConfig) -> Result<Vec<f64>> {
        cfg.validate()?;
        let prepared = Prepared::new(self)?;
        let batches = cfg.samples.div_ceil(cfg.batch);
        let tag = self.tag();
        let norms: Vec<Vec<f64>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng::stream(cfg.seed, tag, b as u64);
                let len = cfg.batch.min(cfg.samples - b * cfg.batch);
                (0..len).map(|_| prepared.sample_norm(&mut rng)).collect()
            })
            .collect();
        let norms: Vec<f64> = norms.into_iter().flatten().collect();
        if let Some(v) = norms.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("sampled norm evaluated to {v}")));
        }
        Ok(norms)
    }
}

/// Per-chaos data computed once before sampling.
enum Prepared<'a> {
    Decoupled(&'a CoeffTensor),
    Undecoupled(&'a CoeffTensor, Vec<(usize, Vec<usize>)>),
    Exponential(&'a CoeffTensor, ExpMode),
    Polynomial(&'a PolynomialSpec, Vec<f64>),
}

impl<'a> Prepared<'a> {
    fn new(chaos: &Chaos<'a>) -> Result<Self> {
        Ok(match *chaos {
            Chaos::Decoupled(a) => Prepared::Decoupled(a),
            Chaos::Undecoupled(a) => Prepared::Undecoupled(a, increasing_indices(a.order(), a.dim())),
            Chaos::Exponential(a, mode) => Prepared::Exponential(a, mode),
            Chaos::Polynomial(f) => Prepared::Polynomial(f, expand(f)?.mean()),
        })
    }

    fn sample_norm(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Prepared::Decoupled(a) => a.space().norm(&sample_decoupled(a, rng)),
            Prepared::Undecoupled(a, idx) => a.space().norm(&undecoupled_with(a, idx, rng)),
            Prepared::Exponential(a, mode) => a.space().norm(&sample_exponential(a, rng, *mode)),
            Prepared::Polynomial(f, mean) => {
                let x = rng::gaussian_vec(rng, f.n);
                let mut y = f.evaluate(&x);
                y.iter_mut().zip(mean).for_each(|(v, m)| *v -= m);
                f.space.norm(&y)
            }
        }
    }
}

fn contract_all(a: &CoeffTensor, vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut cur = contract_leading(a.values(), &vectors[0]);
    for v in &vectors[1..] {
        cur = contract_leading(&cur, v);
    }
    cur
}

/// One draw of the decoupled Gaussian chaos.
pub fn sample_decoupled(a: &CoeffTensor, rng: &mut StreamRng) -> Vec<f64> {
    let g: Vec<Vec<f64>> = (0..a.order()).map(|_| rng::gaussian_vec(rng, a.dim())).collect();
    contract_all(a, &g)
}

fn increasing_indices(order: usize, dim: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = vec![];
    for_each_index(order, dim, |flat, idx| {
        if idx.windows(2).all(|w| w[0] < w[1]) {
            out.push((flat, idx.to_vec()));
        }
    });
    out
}

fn undecoupled_with(a: &CoeffTensor, idx: &[(usize, Vec<usize>)], rng: &mut StreamRng) -> Vec<f64> {
    let g = rng::gaussian_vec(rng, a.dim());
    let m = a.value_dim();
    let mut out = vec![0.0; m];
    for (flat, i) in idx {
        let w: f64 = i.iter().map(|&k| g[k]).product();
        for (o, v) in out.iter_mut().zip(&a.values()[flat * m..flat * m + m]) {
            *o += w * v;
        }
    }
    out
}

/// One draw of the tetrahedral chaos over strictly increasing indices.
pub fn sample_undecoupled(a: &CoeffTensor, rng: &mut StreamRng) -> Vec<f64> {
    undecoupled_with(a, &increasing_indices(a.order(), a.dim()), rng)
}

/// A standard symmetric exponential variable (density `exp(-|t|)/2`).
pub fn symmetric_exponential(rng: &mut StreamRng) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if rng.random::<bool>() {
        e
    } else {
        -e
    }
}

/// One draw of the decoupled exponential chaos.
pub fn sample_exponential(a: &CoeffTensor, rng: &mut StreamRng, mode: ExpMode) -> Vec<f64> {
    let n = a.dim();
    let vars: Vec<Vec<f64>> = (0..a.order())
        .map(|_| match mode {
            ExpMode::Direct => (0..n).map(|_| symmetric_exponential(rng)).collect(),
            ExpMode::GaussProduct => {
                let g = rng::gaussian_vec(rng, n);
                let h = rng::gaussian_vec(rng, n);
                g.iter()
                    .zip(&h)
                    .map(|(x, y)| if rng.random::<bool>() { x * y } else { -x * y })
                    .collect()
            }
        })
        .collect();
    contract_all(a, &vars)
}

/// Moments of a sample of norms, one estimate per `p`.
pub fn moments_from_norms(norms: &[f64], cfg: &MCConfig) -> Result<Vec<MomentEstimate>> {
    cfg.validate()?;
    let max = norms.iter().cloned().fold(0.0, f64::max);
    if !max.is_finite() {
        return Err(Error::Numeric("non-finite sampled norm".into()));
    }
    let k = norms.len() as f64;
    cfg.p_values
        .iter()
        .map(|&p| {
            if max == 0.0 {
                return Ok(MomentEstimate {
                    p,
                    value: 0.0,
                    stderr: 0.0,
                    ci_low: 0.0,
                    ci_high: 0.0,
                    samples: norms.len(),
                    seed: cfg.seed,
                });
            }
            // powers of norms scaled by the max stay in [0, 1]
            let pw: Vec<f64> = norms.iter().map(|x| (x / max).powf(p)).collect();
            let mu = pw.iter().sum::<f64>() / k;
            let var = pw.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (k - 1.0);
            let se_mu = (var / k).sqrt();
            let value = max * mu.powf(1.0 / p);
            let stderr = max * mu.powf(1.0 / p - 1.0) * se_mu / p;
            let (lo, hi) = if cfg.bootstrap {
                bootstrap_interval(&pw, cfg.seed, p)
            } else {
                ((mu - Z95 * se_mu).max(0.0), mu + Z95 * se_mu)
            };
            Ok(MomentEstimate {
                p,
                value,
                stderr,
                ci_low: (max * lo.powf(1.0 / p)).min(value),
                ci_high: (max * hi.powf(1.0 / p)).max(value),
                samples: norms.len(),
                seed: cfg.seed,
            })
        })
        .collect()
}

fn bootstrap_interval(pw: &[f64], seed: u64, p: f64) -> (f64, f64) {
    let len = pw.len();
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &format!("bootstrap:{p}"), b);
            (0..len).map(|_| pw[rng.random_range(0..len)]).sum::<f64>() / len as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |f: f64| means[((f * (means.len() - 1) as f64).round()) as usize];
    (at(0.025), at(0.975))
}

/// Empirical `||S||_p` for every `p` in `cfg.p_values` on one shared sample.
pub fn empirical_moment(chaos: &Chaos<'_>, cfg: &MCConfig) -> Result<Vec<MomentEstimate>> {
    moments_from_norms(&chaos.sample_norms(cfg)?, cfg)
}

/// `(mean x^a)^(1/a) / (mean y^b)^(1/b)` on paired samples, with the
/// delta-method error of the log-ratio.
pub fn paired_ratio(x: &[f64], a: f64, y: &[f64], b: f64) -> RatioEstimate {
    let k = x.len() as f64;
    let sx = x.iter().cloned().fold(0.0, f64::max);
    let sy = y.iter().cloned().fold(0.0, f64::max);
    if sx == 0.0 && sy == 0.0 {
        return RatioEstimate { ratio: 1.0, stderr: 0.0, samples: x.len() };
    }
    let px: Vec<f64> = x.iter().map(|v| (v / sx).powf(a)).collect();
    let py: Vec<f64> = y.iter().map(|v| (v / sy).powf(b)).collect();
    let mx = px.iter().sum::<f64>() / k;
    let my = py.iter().sum::<f64>() / k;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (u, v) in px.iter().zip(&py) {
        vx += (u - mx) * (u - mx);
        vy += (v - my) * (v - my);
        cxy += (u - mx) * (v - my);
    }
    let d = k - 1.0;
    let (vx, vy, cxy) = (vx / d, vy / d, cxy / d);
    let ratio = sx * mx.powf(1.0 / a) / (sy * my.powf(1.0 / b));
    let var_log = vx / (a * a * mx * mx) + vy / (b * b * my * my) - 2.0 * cxy / (a * b * mx * my);
    RatioEstimate {
        ratio,
        stderr: ratio * (var_log.max(0.0) / k).sqrt(),
        samples: x.len(),
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// `||sum_{i} a_i g_{i_1} .. g_{i_d}||_p / ||S'||_p` for a symmetric tensor
/// with vanishing generalized diagonal.
///
/// The numerator sums over all of `[n]^d`; for such tensors that is `d!` times
/// the sum over strictly increasing indices.
pub fn decoupling_ratio(a: &CoeffTensor, p: f64, cfg: &MCConfig) -> Result<RatioEstimate> {
    if !a.is_symmetric(1e-12) {
        return Err(invalid("decoupling needs a symmetric tensor"));
    }
    if !a.is_offdiagonal() {
        return Err(invalid("decoupling needs a tensor vanishing on the generalized diagonal"));
    }
    let full = factorial(a.order());
    let und: Vec<f64> = Chaos::Undecoupled(a)
        .sample_norms(cfg)?
        .into_iter()
        .map(|v| v * full)
        .collect();
    let dec = Chaos::Decoupled(a).sample_norms(cfg)?;
    Ok(paired_ratio(&und, p, &dec, p))
}

/// `||S'||_q / ((q/p)^(d/2) ||S'||_p)` on one sample.
pub fn hypercontractivity_ratio(a: &CoeffTensor, p: f64, q: f64, cfg: &MCConfig) -> Result<RatioEstimate> {
    if !(p >= 1.0 && p < q) {
        return Err(invalid(format!("need 1 ≤ p < q, got p = {p}, q = {q}")));
    }
    let norms = Chaos::Decoupled(a).sample_norms(cfg)?;
    let mut r = paired_ratio(&norms, q, &norms, p);
    let scale = (q / p).powf(a.order() as f64 / 2.0);
    r.ratio /= scale;
    r.stderr /= scale;
    Ok(r)
}

/// `E||sum b_ij g_ij|| / E||sum b_ij g_i g'_j||` for an order-2 tensor.
pub fn alpha_plus_ratio(b: &CoeffTensor, cfg: &MCConfig) -> Result<RatioEstimate> {
    if b.order() != 2 {
        return Err(invalid(format!("order-2 tensor required, got d = {}", b.order())));
    }
    cfg.validate()?;
    let n = b.dim();
    let m = b.value_dim();
    let batches = cfg.samples.div_ceil(cfg.batch);
    let pairs: Vec<Vec<(f64, f64)>> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(cfg.seed, "alpha-plus", k as u64);
            let len = cfg.batch.min(cfg.samples - k * cfg.batch);
            (0..len)
                .map(|_| {
                    let gij = rng::gaussian_vec(&mut rng, n * n);
                    let mut y = vec![0.0; m];
                    for (w, chunk) in gij.iter().zip(b.values().chunks_exact(m)) {
                        y.iter_mut().zip(chunk).for_each(|(o, v)| *o += w * v);
                    }
                    let lhs = b.space().norm(&y);
                    (lhs, b.space().norm(&sample_decoupled(b, &mut rng)))
                })
                .collect()
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().flatten().unzip();
    Ok(paired_ratio(&x, 1.0, &y, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichRecord {
    pub p: f64,
    pub empirical: MomentEstimate,
    pub lower_sum: f64,
    pub upper_sum: f64,
    /// `lower_sum / ||S'||_p`.
    pub ratio_lower: f64,
    /// `||S'||_p / upper_sum`.
    pub ratio_upper: f64,
}

/// Compares the empirical moment of the decoupled chaos with both
/// structural sums. Zero ratios `0/0` are reported as 1.
pub fn sandwich_check(a: &CoeffTensor, p: f64, cfg: &MCConfig, norm_cfg: &OptimizerConfig) -> Result<SandwichRecord> {
    let mc = MCConfig {
        p_values: vec![p],
        ..cfg.clone()
    };
    let empirical = empirical_moment(&Chaos::Decoupled(a), &mc)?.remove(0);
    let lower = lower_sum(a, p, norm_cfg)?.structural_sum;
    let upper = upper_sum(a, p, norm_cfg)?.structural_sum;
    let div = |x: f64, y: f64| if x == 0.0 && y == 0.0 { 1.0 } else { x / y };
    Ok(SandwichRecord {
        p,
        ratio_lower: div(lower, empirical.value),
        ratio_upper: div(empirical.value, upper),
        empirical,
        lower_sum: lower,
        upper_sum: upper,
    })
}
