//! Structural moment sums, tail exponents and their specializations.
//!
//! Every bound is reported as a table of terms `(label, power, value)` and a
//! structural sum `sum_t weight_t * p^power_t * value_t`. The unspecified
//! constants of the underlying inequalities are kept out of the sum and
//! recorded in a [`ConstantPolicy`]; `bound = factor * structural_sum`,
//! further multiplied (upper side) or divided (lower side) by `C(d)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{dimension, invalid, Error, Result};
use crate::hermite::{expected_gradient_tensor, PolynomialSpec};
use crate::monte_carlo::{empirical_moment, Chaos, MCConfig, MomentEstimate};
use crate::norms::{lq_m_norm, lq_triple_norm, mixed_norm, real_chaos_sup, triple_norm, OptimizerConfig};
use crate::partitions::{
    enumerate_m, enumerate_partition_pairs, enumerate_partitions, enumerate_subset_partitions,
    subsets, ExpTriple, Partition, PartitionPair,
};
use crate::space::ValueSpace;
use crate::tensor::{for_each_index, CoeffTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
    Tail,
}

/// User-chosen values of the constants the inequalities leave open.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantPolicy {
    /// `C(d)`; divides the lower bound and multiplies the upper bound.
    pub c_d: f64,
    /// `K` of the Gaussian (alpha+) comparison, when used.
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// The absolute constant `c` in `K = c sqrt(q)`.
    pub calibration: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl Default for ConstantPolicy {
    fn default() -> Self {
        ConstantPolicy {
            c_d: 1.0,
            k: None,
            calibration: 1.0,
            q: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub power: f64,
    pub weight: f64,
    pub value: f64,
    pub stderr: f64,
}

impl Term {
    fn new(label: String, power: f64, value: f64, stderr: f64) -> Self {
        Term {
            label,
            power,
            weight: 1.0,
            value,
            stderr,
        }
    }

    pub fn contribution(&self, p: f64) -> f64 {
        self.weight * p.powf(self.power) * self.value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub side: Side,
    pub p: f64,
    pub terms: Vec<Term>,
    pub structural_sum: f64,
    /// Known factor in front of the sum (powers of `K` or `q`).
    pub factor: f64,
    pub bound: f64,
    pub constant_policy: ConstantPolicy,
    pub optimizer: OptimizerConfig,
}

impl BoundReport {
    fn assemble(
        name: &str,
        side: Side,
        p: f64,
        terms: Vec<Term>,
        factor: f64,
        constant_policy: ConstantPolicy,
        optimizer: &OptimizerConfig,
    ) -> Self {
        let structural_sum = terms.iter().map(|t| t.contribution(p)).sum::<f64>();
        let bound = match side {
            Side::Lower => factor * structural_sum / constant_policy.c_d,
            _ => factor * structural_sum * constant_policy.c_d,
        };
        BoundReport {
            name: name.to_string(),
            side,
            p,
            terms,
            structural_sum,
            factor,
            bound,
            constant_policy,
            optimizer: optimizer.clone(),
        }
    }

    /// The same terms with a different side, factor and policy.
    fn restate(&self, name: &str, side: Side, factor: f64, policy: ConstantPolicy) -> Self {
        Self::assemble(name, side, self.p, self.terms.clone(), factor, policy, &self.optimizer)
    }

    /// CSV rows `section,term,power,value,stderr`, without a header.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for t in &self.terms {
            w.write_record([
                self.name.as_str(),
                t.label.as_str(),
                &t.power.to_string(),
                &t.value.to_string(),
                &t.stderr.to_string(),
            ])?;
        }
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 5] = ["section", "term", "power", "value", "stderr"];

/// A lower and an upper bound sharing one term table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoSided {
    pub lower: BoundReport,
    pub upper: BoundReport,
}

fn check_p(p: f64, min: f64) -> Result<()> {
    if p >= min && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("moment order p = {p} must be ≥ {min}")))
    }
}

fn lower_label(order: usize, p: &Partition) -> String {
    PartitionPair::for_triple_norm(order, p).to_string()
}

/// Terms `p^{|P|/2} ||A||_{P'|P}` over all partition pairs of `[d]`.
pub fn upper_sum(a: &CoeffTensor, p: f64, cfg: &OptimizerConfig) -> Result<BoundReport> {
    check_p(p, 1.0)?;
    let pairs = enumerate_partition_pairs(a.order());
    let terms = pairs
        .par_iter()
        .map(|pair| {
            let est = mixed_norm(a, pair, cfg)?;
            Ok(Term::new(pair.to_string(), pair.p.len() as f64 / 2.0, est.value, est.stderr))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::assemble("upper", Side::Upper, p, terms, 1.0, ConstantPolicy::default(), cfg))
}

/// Terms `p^{|P|/2} |||A|||_P` over `J ⊆ [d]` and `P ∈ P(J)`, labelled by
/// the equivalent pair `(P, singletons of [d] \ J)`.
pub fn lower_sum(a: &CoeffTensor, p: f64, cfg: &OptimizerConfig) -> Result<BoundReport> {
    check_p(p, 1.0)?;
    let terms = lower_terms(a, cfg, false)?;
    Ok(BoundReport::assemble("lower", Side::Lower, p, terms, 1.0, ConstantPolicy::default(), cfg))
}

fn lower_terms(a: &CoeffTensor, cfg: &OptimizerConfig, nonempty_only: bool) -> Result<Vec<Term>> {
    let list: Vec<(Vec<usize>, Partition)> = enumerate_subset_partitions(a.order())
        .into_iter()
        .filter(|(j, _)| !nonempty_only || !j.is_empty())
        .collect();
    list.par_iter()
        .map(|(j, part)| {
            let est = triple_norm(a, j, part, cfg)?;
            Ok(Term::new(
                lower_label(a.order(), part),
                part.len() as f64 / 2.0,
                est.value,
                est.stderr,
            ))
        })
        .collect()
}

/// One admissible term of a tail exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailTerm {
    pub label: String,
    /// `|P|`.
    pub blocks: usize,
    pub value: f64,
}

/// Norms entering a tail exponent, computed once for a grid of `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailTable {
    pub side: Side,
    pub terms: Vec<TailTerm>,
    /// Upper side: `sum_{P'} ||A||_{P'|∅}`; the bound holds for `t > C(d)`
    /// times this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailExponent {
    pub t: f64,
    /// `min (t / norm)^{2/|P|}`; infinite when every norm vanishes.
    pub exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub template: &'static str,
}

const UPPER_TEMPLATE: &str = "P(|S'| >= t) <= 2 exp(-exponent / C(d)) for t > C(d) * threshold";
const LOWER_TEMPLATE: &str =
    "P(|S'| >= E|S'| / C(d) + t) >= exp(-C(d) * exponent) / C(d); C(d) is unknown, so only the exponent is computed";

impl TailTable {
    pub fn exponent(&self, t: f64) -> Result<TailExponent> {
        match self.side {
            Side::Upper if !(t > 0.0) => return Err(invalid(format!("t = {t} must be positive"))),
            _ if !(t >= 0.0) => return Err(invalid(format!("t = {t} must be nonnegative"))),
            _ => {}
        }
        let mut best = f64::INFINITY;
        let mut argmin = None;
        for term in &self.terms {
            if term.value == 0.0 {
                continue;
            }
            let e = (t / term.value).powf(2.0 / term.blocks as f64);
            if e < best || argmin.is_none() {
                best = e;
                argmin = Some(term.label.clone());
            }
        }
        Ok(TailExponent {
            t,
            exponent: best,
            argmin,
            threshold: self.threshold,
            template: if self.side == Side::Upper { UPPER_TEMPLATE } else { LOWER_TEMPLATE },
        })
    }
}

/// Norms of the upper tail: every pair with `|P| > 0`, plus the threshold.
pub fn upper_tail_table(a: &CoeffTensor, cfg: &OptimizerConfig) -> Result<TailTable> {
    let pairs = enumerate_partition_pairs(a.order());
    let values = pairs
        .par_iter()
        .map(|pair| mixed_norm(a, pair, cfg).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let mut terms = vec![];
    let mut threshold = 0.0;
    for (pair, v) in pairs.iter().zip(values) {
        if pair.p.is_empty() {
            threshold += v;
        } else {
            terms.push(TailTerm {
                label: pair.to_string(),
                blocks: pair.p.len(),
                value: v,
            });
        }
    }
    Ok(TailTable {
        side: Side::Upper,
        terms,
        threshold: Some(threshold),
    })
}

/// Norms of the lower tail: `|||A|||_P` over nonempty `J` and `P ∈ P(J)`.
pub fn lower_tail_table(a: &CoeffTensor, cfg: &OptimizerConfig) -> Result<TailTable> {
    let terms = lower_terms(a, cfg, true)?
        .into_iter()
        .map(|t| TailTerm {
            blocks: (2.0 * t.power).round() as usize,
            label: t.label,
            value: t.value,
        })
        .collect();
    Ok(TailTable {
        side: Side::Lower,
        terms,
        threshold: None,
    })
}

pub fn tail_exponent_upper(a: &CoeffTensor, t: f64, cfg: &OptimizerConfig) -> Result<TailExponent> {
    if !(t > 0.0) {
        return Err(invalid(format!("t = {t} must be positive")));
    }
    upper_tail_table(a, cfg)?.exponent(t)
}

pub fn tail_exponent_lower(a: &CoeffTensor, t: f64, cfg: &OptimizerConfig) -> Result<TailExponent> {
    if !(t >= 0.0) {
        return Err(invalid(format!("t = {t} must be nonnegative")));
    }
    lower_tail_table(a, cfg)?.exponent(t)
}

fn check_k(k: f64) -> Result<()> {
    if k >= 1.0 && k.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("K = {k} must be ≥ 1")))
    }
}

/// `K^{d-1}` times the lower structural sum, for spaces with the Gaussian
/// (alpha+) property.
pub fn special_space_upper(a: &CoeffTensor, p: f64, k: f64, cfg: &OptimizerConfig) -> Result<BoundReport> {
    check_k(k)?;
    let lower = lower_sum(a, p, cfg)?;
    let policy = ConstantPolicy {
        k: Some(k),
        q: a.space().q(),
        ..ConstantPolicy::default()
    };
    Ok(lower.restate("special_upper", Side::Upper, k.powi(a.order() as i32 - 1), policy))
}

/// `K` for the tensor's space: `c sqrt(q)` on `L_q`, the given value otherwise.
pub fn resolve_k(space: &ValueSpace, k: Option<f64>, calibration: f64) -> Result<f64> {
    match k {
        Some(k) => Ok(k),
        None => space.type2_k(calibration),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TakieRatio {
    pub pair: String,
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `|∪P'| - |P'|`.
    pub k_power: usize,
}

/// `||A||_{P'|P} / (K^{|∪P'| - |P'|} |||A|||_P)`, with `0/0 = 0`.
pub fn takie_ratio(a: &CoeffTensor, pair: &PartitionPair, k: f64, cfg: &OptimizerConfig) -> Result<TakieRatio> {
    pair.validate(a.order())?;
    let num = mixed_norm(a, pair, cfg)?.value;
    let p = Partition::new(pair.p.clone())?;
    let den = triple_norm(a, &pair.deterministic_axes(), &p, cfg)?.value;
    let k_power = pair.gaussian_axes().len() - pair.p_prime.len();
    let scaled = k.powi(k_power as i32) * den;
    Ok(TakieRatio {
        pair: pair.to_string(),
        ratio: if num == 0.0 && scaled == 0.0 { 0.0 } else { num / scaled },
        numerator: num,
        denominator: den,
        k,
        k_power,
    })
}

fn lq_q(a: &CoeffTensor) -> Result<f64> {
    a.space()
        .q()
        .ok_or_else(|| Error::Unsupported("L_q value space required".into()))
}

/// The `L_q` two-sided bound with factors `q^{(1-d)/2}` and `q^{d-1/2}`.
pub fn lq_bound(a: &CoeffTensor, p: f64, cfg: &OptimizerConfig) -> Result<TwoSided> {
    check_p(p, 1.0)?;
    let q = lq_q(a)?;
    let d = a.order() as f64;
    let list = enumerate_subset_partitions(a.order());
    let terms = list
        .par_iter()
        .map(|(j, part)| {
            let est = lq_triple_norm(a, j, part, cfg)?;
            Ok(Term::new(lower_label(a.order(), part), part.len() as f64 / 2.0, est.value, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let policy = ConstantPolicy {
        q: Some(q),
        ..ConstantPolicy::default()
    };
    let lower = BoundReport::assemble("lq_lower", Side::Lower, p, terms, q.powf((1.0 - d) / 2.0), policy.clone(), cfg);
    let upper = lower.restate("lq_upper", Side::Upper, q.powf(d - 0.5), policy);
    Ok(TwoSided { lower, upper })
}

/// All triples `(I, J, P)` with `I`, `J` disjoint and `P ∈ P([d] \ (I ∪ J))`.
pub fn exp_triples(order: usize) -> Vec<ExpTriple> {
    let mut out = vec![];
    for i in subsets(order) {
        let rest: Vec<usize> = (0..order).filter(|x| !i.contains(x)).collect();
        for mask in 0..1usize << rest.len() {
            let j: Vec<usize> = rest.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &x)| x).collect();
            let ground: Vec<usize> = rest.iter().filter(|x| !j.contains(x)).cloned().collect();
            for p in enumerate_partitions(&ground) {
                out.push(ExpTriple {
                    i: i.clone(),
                    j: j.clone(),
                    p,
                });
            }
        }
    }
    out
}

/// `max_{i_I} |||(a_i)_{i_{I^c}}|||^{L_q}_P` for one triple.
fn exp_term_value(a: &CoeffTensor, t: &ExpTriple, cfg: &OptimizerConfig) -> Result<f64> {
    let rest: Vec<usize> = (0..a.order()).filter(|x| !t.i.contains(x)).collect();
    // axes of the slice are the remaining axes renumbered from 0
    let pos = |x: &usize| rest.iter().position(|r| r == x).expect("axis outside I");
    let ground: Vec<usize> = t.p.ground().iter().map(pos).collect();
    let blocks: Vec<Vec<usize>> = t.p.blocks().iter().map(|b| b.iter().map(pos).collect()).collect();
    let part = Partition::new(blocks)?;
    let mut fixed: Vec<Vec<usize>> = vec![];
    for_each_index(t.i.len(), a.dim(), |_, idx| fixed.push(idx.to_vec()));
    let values = fixed
        .par_iter()
        .map(|idx| {
            let slice = a.slice_fix(&t.i, idx)?;
            lq_triple_norm(&slice, &ground, &part, cfg).map(|e| e.value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// The exponential-chaos bound. With `full_m` the terms run over the whole
/// covering family `M([d])` with powers `(|M| - 1)/2`; otherwise over the
/// triples `(I, J, P)` with powers `|I| + |P|/2`.
pub fn exp_chaos_bound(a: &CoeffTensor, p: f64, full_m: bool, cfg: &OptimizerConfig) -> Result<TwoSided> {
    check_p(p, 1.0)?;
    let q = lq_q(a)?;
    if q < 2.0 {
        return Err(invalid(format!("exponential chaos bounds need q ≥ 2, got q = {q}")));
    }
    let terms = if full_m {
        enumerate_m(a.order())
            .par_iter()
            .map(|m| {
                let est = lq_m_norm(a, m, cfg)?;
                Ok(Term::new(m.to_string(), (m.size() - 1) as f64 / 2.0, est.value, 0.0))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        exp_triples(a.order())
            .par_iter()
            .map(|t| {
                let v = exp_term_value(a, t, cfg)?;
                Ok(Term::new(t.to_string(), t.i.len() as f64 + t.p.len() as f64 / 2.0, v, 0.0))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let d = a.order() as f64;
    let policy = ConstantPolicy {
        q: Some(q),
        ..ConstantPolicy::default()
    };
    let name = if full_m { "exp_full_m" } else { "exp" };
    let lower = BoundReport::assemble(
        &format!("{name}_lower"),
        Side::Lower,
        p,
        terms,
        q.powf(0.5 - d),
        policy.clone(),
        cfg,
    );
    let upper = lower.restate(&format!("{name}_upper"), Side::Upper, q.powf(2.0 * d - 0.5), policy);
    Ok(TwoSided { lower, upper })
}

/// `sum_{P ∈ P([d])} p^{|P|/2} sup {sum a_i prod x^r}` for a real tensor;
/// both sides carry the same sum.
pub fn real_moment_twosided(a: &CoeffTensor, p: f64, cfg: &OptimizerConfig) -> Result<TwoSided> {
    check_p(p, 2.0)?;
    if a.value_dim() != 1 {
        return Err(dimension(format!("real chaos needs m = 1, got m = {}", a.value_dim())));
    }
    let all: Vec<usize> = (0..a.order()).collect();
    let terms = enumerate_partitions(&all)
        .par_iter()
        .map(|part| {
            let est = real_chaos_sup(a, part, cfg)?;
            Ok(Term::new(part.to_string(), part.len() as f64 / 2.0, est.value, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let lower = BoundReport::assemble("real_lower", Side::Lower, p, terms, 1.0, ConstantPolicy::default(), cfg);
    let upper = lower.restate("real_upper", Side::Upper, 1.0, ConstantPolicy::default());
    Ok(TwoSided { lower, upper })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureGap {
    pub p: f64,
    pub empirical: MomentEstimate,
    pub lower_sum: f64,
    /// `||S'||_p / lower_sum`.
    pub gap: f64,
}

/// Empirical moment of the decoupled chaos over the lower structural sum.
pub fn conjecture_gap(a: &CoeffTensor, p: f64, mc: &MCConfig, cfg: &OptimizerConfig) -> Result<ConjectureGap> {
    let lower = lower_sum(a, p, cfg)?.structural_sum;
    let mc = MCConfig {
        p_values: vec![p],
        ..mc.clone()
    };
    let empirical = empirical_moment(&Chaos::Decoupled(a), &mc)?.remove(0);
    let gap = if empirical.value == 0.0 && lower == 0.0 {
        1.0
    } else {
        empirical.value / lower
    };
    Ok(ConjectureGap {
        p,
        empirical,
        lower_sum: lower,
        gap,
    })
}

/// Bounds for `||f(G) - E f(G)||_p` built from `A_d = E nabla^d f(G)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyBounds {
    pub degree: usize,
    /// `E ||f(G) - E f(G)||`, estimated by sampling.
    pub mean_deviation: MomentEstimate,
    /// Nonzero-`T` terms of each `A_d`, labelled `d=<d> <pair>`.
    pub lower: BoundReport,
    /// `K^{D-1}` times the lower sum; absent when `K` is unknown.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<BoundReport>,
    /// The `L_q` version with per-degree factors folded into term weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lq: Option<TwoSided>,
    pub eta_terms: Vec<TailTerm>,
}

impl PolyBounds {
    /// `eta_f(t) = min_{d,T,P} (t / |||A_d|||_P)^{2/|P|}`.
    pub fn eta(&self, t: f64) -> Result<TailExponent> {
        TailTable {
            side: Side::Lower,
            terms: self.eta_terms.clone(),
            threshold: None,
        }
        .exponent(t)
    }
}

pub fn general_poly_bounds(
    f: &PolynomialSpec,
    p: f64,
    k: Option<f64>,
    mc: &MCConfig,
    cfg: &OptimizerConfig,
) -> Result<PolyBounds> {
    check_p(p, 1.0)?;
    f.validate()?;
    let mc1 = MCConfig {
        p_values: vec![1.0],
        ..mc.clone()
    };
    let mean_deviation = empirical_moment(&Chaos::Polynomial(f), &mc1)?.remove(0);
    let mean_term = Term::new("E|f-Ef|".into(), 0.0, mean_deviation.value, mean_deviation.stderr);
    let tensors = (1..=f.degree)
        .map(|d| expected_gradient_tensor(f, d))
        .collect::<Result<Vec<_>>>()?;

    let mut terms = vec![mean_term.clone()];
    let mut eta_terms = vec![];
    for (d, a) in tensors.iter().enumerate() {
        for t in lower_terms(a, cfg, true)? {
            let label = format!("d={} {}", d + 1, t.label);
            eta_terms.push(TailTerm {
                label: label.clone(),
                blocks: (2.0 * t.power).round() as usize,
                value: t.value,
            });
            terms.push(Term { label, ..t });
        }
    }
    let lower = BoundReport::assemble("poly_lower", Side::Lower, p, terms, 1.0, ConstantPolicy::default(), cfg);
    let upper = match resolve_k(&f.space, k, 1.0) {
        Ok(k) => {
            check_k(k)?;
            let policy = ConstantPolicy {
                k: Some(k),
                q: f.space.q(),
                ..ConstantPolicy::default()
            };
            let factor = k.powi(f.degree.max(1) as i32 - 1);
            Some(lower.restate("poly_upper", Side::Upper, factor, policy))
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };

    let lq = match f.space.q() {
        None => None,
        Some(q) => {
            let mut lo = vec![];
            let mut hi = vec![];
            for (d, a) in tensors.iter().enumerate() {
                let order = (d + 1) as f64;
                for (j, part) in enumerate_subset_partitions(d + 1) {
                    let v = lq_triple_norm(a, &j, &part, cfg)?.value;
                    let label = format!("d={} {}", d + 1, lower_label(d + 1, &part));
                    let power = part.len() as f64 / 2.0;
                    lo.push(Term {
                        weight: q.powf((1.0 - order) / 2.0),
                        ..Term::new(label.clone(), power, v, 0.0)
                    });
                    hi.push(Term {
                        weight: q.powf(order - 0.5),
                        ..Term::new(label, power, v, 0.0)
                    });
                }
            }
            let policy = ConstantPolicy {
                q: Some(q),
                ..ConstantPolicy::default()
            };
            Some(TwoSided {
                lower: BoundReport::assemble("poly_lq_lower", Side::Lower, p, lo, 1.0, policy.clone(), cfg),
                upper: BoundReport::assemble("poly_lq_upper", Side::Upper, p, hi, 1.0, policy, cfg),
            })
        }
    };
    Ok(PolyBounds {
        degree: f.degree,
        mean_deviation,
        lower,
        upper,
        lq,
        eta_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MonomialTerm;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            seed: 5,
            saa_samples: 64,
            eval_samples: 20_000,
            ..OptimizerConfig::default()
        }
    }

    fn lq(q: f64, m: usize) -> ValueSpace {
        ValueSpace::lq(q, vec![1.0; m]).unwrap()
    }

    fn random(order: usize, n: usize, space: ValueSpace, seed: u64) -> CoeffTensor {
        let mut rng = crate::rng::stream(seed, "bounds-test", 0);
        let len = n.pow(order as u32) * space.dim();
        CoeffTensor::new(order, n, space.dim(), crate::rng::gaussian_vec(&mut rng, len), space).unwrap()
    }

    #[test]
    fn d1_upper_sum() {
        let a = CoeffTensor::scalar(1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        let r = upper_sum(&a, 4.0, &cfg()).unwrap();
        assert_eq!(r.terms.len(), 2);
        let mc = r.terms.iter().find(|t| t.power == 0.0).unwrap();
        let want = 2.0 + (2.0 / std::f64::consts::PI).sqrt();
        assert!((r.structural_sum - want).abs() < 3.0 * mc.stderr, "{}", r.structural_sum);
        let direct: f64 = r.terms.iter().map(|t| 4f64.powf(t.power) * t.value).sum();
        assert_eq!(direct, r.structural_sum);
    }

    #[test]
    fn counts_and_zero_tensor() {
        let z = CoeffTensor::zeros(2, 2, lq(3.0, 2)).unwrap();
        let up = upper_sum(&z, 2.0, &cfg()).unwrap();
        let lo = lower_sum(&z, 2.0, &cfg()).unwrap();
        assert_eq!((up.terms.len(), lo.terms.len()), (6, 5));
        assert_eq!((up.structural_sum, lo.structural_sum), (0.0, 0.0));
        let e = exp_chaos_bound(&z, 2.0, false, &cfg()).unwrap();
        assert_eq!(e.upper.structural_sum, 0.0);
    }

    #[test]
    fn lower_terms_reappear_in_upper_sum() {
        let a = random(3, 2, lq(3.0, 2), 1);
        let c = OptimizerConfig { eval_samples: 512, ..cfg() };
        let up = upper_sum(&a, 3.0, &c).unwrap();
        let lo = lower_sum(&a, 3.0, &c).unwrap();
        for t in &lo.terms {
            let u = up.terms.iter().find(|u| u.label == t.label).expect("label present");
            assert_eq!(u.value, t.value, "{}", t.label);
        }
        assert!(up.structural_sum >= lo.structural_sum);
    }

    #[test]
    fn tail_examples() {
        let a = CoeffTensor::scalar(1, 1, vec![1.0]).unwrap();
        assert_eq!(tail_exponent_upper(&a, 3.0, &cfg()).unwrap().exponent, 9.0);
        assert_eq!(tail_exponent_lower(&a, 2.0, &cfg()).unwrap().exponent, 4.0);
        assert_eq!(tail_exponent_lower(&a, 0.0, &cfg()).unwrap().exponent, 0.0);
        assert!(tail_exponent_upper(&a, 0.0, &cfg()).is_err());
        let d = CoeffTensor::scalar(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let table = upper_tail_table(&d, &cfg()).unwrap();
        assert_eq!(table.terms.len(), 4);
        // spectral norm 1 with |P| = 2 and Frobenius sqrt(2) with |P| = 1
        let e = table.exponent(0.5).unwrap();
        assert!(e.exponent <= (0.5f64 / 2f64.sqrt()).powi(2) + 1e-9);
    }

    #[test]
    fn special_space_factor() {
        let a = random(2, 2, lq(4.0, 2), 2);
        let lo = lower_sum(&a, 2.0, &cfg()).unwrap();
        let sp = special_space_upper(&a, 2.0, 2.0, &cfg()).unwrap();
        assert_eq!(sp.bound, 2.0 * lo.structural_sum);
        assert!(special_space_upper(&a, 2.0, 0.5, &cfg()).is_err());
        assert_eq!(resolve_k(a.space(), None, 1.0).unwrap(), 2.0);
        let b = random(1, 2, lq(4.0, 2), 2);
        let sp = special_space_upper(&b, 2.0, 1.0, &cfg()).unwrap();
        assert_eq!(sp.bound, lower_sum(&b, 2.0, &cfg()).unwrap().structural_sum);
    }

    #[test]
    fn takie_conventions() {
        let a = random(2, 2, lq(2.0, 1), 3);
        let r = takie_ratio(&a, &"{1}|{2}".parse().unwrap(), 1.5, &cfg()).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.k_power, 0);
        let r = takie_ratio(&a, &"{1,2}|∅".parse().unwrap(), 1.5, &cfg()).unwrap();
        assert_eq!(r.k_power, 1);
        let z = CoeffTensor::zeros(2, 2, lq(2.0, 1)).unwrap();
        assert_eq!(takie_ratio(&z, &"{1,2}|∅".parse().unwrap(), 1.5, &cfg()).unwrap().ratio, 0.0);
    }

    #[test]
    fn lq_bound_d1_example() {
        let a = CoeffTensor::new(1, 2, 1, vec![1.0, 0.0], lq(2.0, 1)).unwrap();
        let b = lq_bound(&a, 4.0, &cfg()).unwrap();
        assert!((b.lower.bound - 3.0).abs() < 1e-9);
        assert!((b.upper.bound - 2f64.sqrt() * 3.0).abs() < 1e-9);
        let c = random(2, 2, lq(3.0, 2), 4);
        let b = lq_bound(&c, 2.0, &cfg()).unwrap();
        let want = 3f64.powf(2.0);
        assert!((b.upper.factor / b.lower.factor - want).abs() < 1e-12 * want);
        assert_eq!(b.upper.structural_sum, b.lower.structural_sum);
        let q1 = lq_bound(&a.with_space(lq(1.0, 1)).unwrap(), 2.0, &cfg()).unwrap();
        assert_eq!((q1.lower.factor, q1.upper.factor), (1.0, 1.0));
    }

    #[test]
    fn exp_bound_shapes() {
        let a = CoeffTensor::new(1, 1, 1, vec![1.0], lq(2.0, 1)).unwrap();
        let b = exp_chaos_bound(&a, 4.0, false, &cfg()).unwrap();
        assert!((b.lower.structural_sum - (4.0 + 2.0 + 1.0)).abs() < 1e-12);
        let c = random(2, 3, lq(4.0, 2), 5);
        let b = exp_chaos_bound(&c, 2.0, false, &cfg()).unwrap();
        assert_eq!(b.lower.terms.len(), 10);
        let mut shapes: Vec<_> = exp_triples(2).iter().map(ExpTriple::shape).collect();
        shapes.sort();
        shapes.dedup();
        assert_eq!(shapes.len(), 7);
        let top = b.lower.terms.iter().find(|t| t.power == 2.0).unwrap();
        let want = c
            .values()
            .chunks(2)
            .map(|v| c.space().norm(v))
            .fold(0.0, f64::max);
        assert!((top.value - want).abs() < 1e-12);
        assert!(exp_chaos_bound(&c.with_space(lq(1.5, 2)).unwrap(), 2.0, false, &cfg()).is_err());
        let full = exp_chaos_bound(&c, 2.0, true, &cfg()).unwrap();
        assert_eq!(full.lower.terms.len(), crate::partitions::enumerate_m(2).len());
    }

    #[test]
    fn real_identity() {
        let n = 4;
        let mut v = vec![0.0; n * n];
        (0..n).for_each(|i| v[i * n + i] = 1.0);
        let a = CoeffTensor::scalar(2, n, v).unwrap();
        let r = real_moment_twosided(&a, 9.0, &cfg()).unwrap();
        assert!((r.lower.structural_sum - (9.0 + 3.0 * 2.0)).abs() < 1e-6);
        assert!(real_moment_twosided(&a, 1.0, &cfg()).is_err());
    }

    #[test]
    fn polynomial_bounds() {
        let space = lq(2.0, 1);
        let linear = PolynomialSpec {
            n: 2,
            degree: 1,
            m: 1,
            terms: vec![
                MonomialTerm { exps: vec![1, 0], coeff: vec![3.0] },
                MonomialTerm { exps: vec![0, 1], coeff: vec![4.0] },
            ],
            space: space.clone(),
        };
        let mc = MCConfig { samples: 20_000, ..MCConfig::default() };
        let b = general_poly_bounds(&linear, 4.0, None, &mc, &cfg()).unwrap();
        // E|5g| plus sqrt(p) * 5
        assert_eq!(b.lower.terms.len(), 2);
        assert!((b.lower.terms[1].value - 5.0).abs() < 1e-9);
        assert_eq!(b.upper.as_ref().unwrap().factor, 1.0);
        assert!((b.eta(10.0).unwrap().exponent - 4.0).abs() < 1e-9);
        let constant = PolynomialSpec {
            degree: 0,
            terms: vec![MonomialTerm { exps: vec![0, 0], coeff: vec![2.0] }],
            ..linear
        };
        let b = general_poly_bounds(&constant, 4.0, None, &mc, &cfg()).unwrap();
        assert_eq!(b.lower.structural_sum, 0.0);
        assert_eq!(b.lq.unwrap().upper.structural_sum, 0.0);
    }
}
