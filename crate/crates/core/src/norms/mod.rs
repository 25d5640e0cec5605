//! Estimators for the norms consumed by the bounds.
//!
//! * [`mixed_norm`]: `||A||_{P'|P}`, a supremum over unit vectors on the
//!   blocks of `P` of the expected norm of `A` contracted with jointly indexed
//!   Gaussians on the blocks of `P'`.
//! * [`triple_norm`]: `|||A|||_P`, the mixed norm with `P'` the singletons
//!   outside `P`.
//! * [`lq_triple_norm`] and [`lq_m_norm`]: the expectation-free norms of
//!   `L_q`-valued tensors.
//! * [`real_chaos_sup`]: the injective-type suprema of a real tensor.
//!
//! All suprema are approximated from below by alternating maximization with
//! random restarts. Expectations use sample-average approximation: one frozen
//! Gaussian sample set during optimization, and a fresh sample set for the
//! reported value.

mod sphere;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{dimension, invalid, Error, Result};
use crate::partitions::{fmt_block, MSequence, Partition, PartitionPair};
use crate::rng;
use crate::space::ValueSpace;
use crate::tensor::{contract_raw, CoeffTensor, Factor};
use sphere::{Outer, SphereProblem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Gaussian draws frozen while optimizing.
    pub saa_samples: usize,
    /// Fresh draws used for the reported value.
    pub eval_samples: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 8,
            saa_samples: 256,
            eval_samples: 4096,
            max_sweeps: 100,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.saa_samples == 0 || self.eval_samples == 0 || self.max_sweeps == 0 {
            return Err(invalid("optimizer counts must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("optimizer tolerance must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        OptimizerConfig { seed, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockVector {
    #[serde(serialize_with = "ser_block")]
    pub block: Vec<usize>,
    pub x: Vec<f64>,
}

fn ser_block<S: serde::Serializer>(b: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_block(b))
}

/// Value of one norm together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Monte-Carlo standard error of `value`; zero for deterministic norms.
    pub stderr: f64,
    pub restarts_used: usize,
    pub saa_samples: usize,
    pub eval_samples: usize,
    /// Largest sweep count over the restarts.
    pub sweeps: usize,
    pub best_vectors: Vec<BlockVector>,
}

impl NormEstimate {
    fn zero(blocks: &[Vec<usize>], dim: usize) -> Self {
        NormEstimate {
            value: 0.0,
            stderr: 0.0,
            restarts_used: 0,
            saa_samples: 0,
            eval_samples: 0,
            sweeps: 0,
            best_vectors: blocks
                .iter()
                .map(|b| {
                    let mut x = vec![0.0; dim.pow(b.len() as u32)];
                    x[0] = 1.0;
                    BlockVector { block: b.clone(), x }
                })
                .collect(),
        }
    }

    fn exact(value: f64) -> Self {
        NormEstimate {
            value,
            stderr: 0.0,
            restarts_used: 0,
            saa_samples: 0,
            eval_samples: 0,
            sweeps: 0,
            best_vectors: vec![],
        }
    }
}

/// Position of each axis of `axes` inside the sorted list `within`.
fn remap(axes: &[usize], within: &[usize]) -> Vec<usize> {
    axes.iter()
        .map(|a| within.iter().position(|w| w == a).expect("axis present"))
        .collect()
}

struct Restart {
    vectors: Vec<Vec<f64>>,
    sweeps: usize,
}

fn run_restarts(
    problem: &SphereProblem<'_>,
    dim: usize,
    cfg: &OptimizerConfig,
    tag: &str,
) -> Result<Vec<(Restart, f64)>> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let init = problem.random_start(dim, cfg.seed, tag, r as u64);
            let best = problem.maximize(init, cfg.max_sweeps, cfg.tol)?;
            Ok((
                Restart {
                    vectors: best.vectors,
                    sweeps: best.sweeps,
                },
                best.value,
            ))
        })
        .collect()
}

/// Index of the largest value, first on ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Estimates `||A||_{P'|P}`.
///
/// The returned value is attained by the reported vectors, so for
/// deterministic pairs (`P' = ∅`) it never exceeds the true supremum. With
/// Gaussian blocks it is the mean over `eval_samples` fresh draws, and the
/// largest such mean over restarts is reported.
pub fn mixed_norm(a: &CoeffTensor, pair: &PartitionPair, cfg: &OptimizerConfig) -> Result<NormEstimate> {
    pair.validate(a.order())?;
    cfg.validate()?;
    let n = a.dim();
    let m = a.value_dim();
    if a.is_zero() {
        return Ok(NormEstimate::zero(&pair.p, n));
    }
    let tag = format!("mixed:{pair}");
    let det_axes = pair.deterministic_axes();
    let gauss_axes = pair.gaussian_axes();

    if pair.p.is_empty() {
        let (mean, stderr) = gaussian_mean_norm(a, &pair.p_prime, cfg, &tag)?;
        return Ok(NormEstimate {
            value: mean,
            stderr,
            restarts_used: 0,
            saa_samples: 0,
            eval_samples: cfg.eval_samples,
            sweeps: 0,
            best_vectors: vec![],
        });
    }

    // frozen sample set, pre-contracted over the Gaussian blocks
    let reduced: Vec<Vec<f64>> = if pair.p_prime.is_empty() {
        vec![a.values().to_vec()]
    } else {
        (0..cfg.saa_samples)
            .into_par_iter()
            .map(|s| {
                let draws = draw_blocks(&pair.p_prime, n, cfg.seed, &format!("{tag}:saa"), s as u64);
                let factors: Vec<Factor<'_>> = pair
                    .p_prime
                    .iter()
                    .zip(&draws)
                    .map(|(b, w)| Factor { axes: b, weights: w })
                    .collect();
                let mut out = vec![0.0; n.pow(det_axes.len() as u32) * m];
                contract_raw(a.values(), a.order(), n, m, &factors, &det_axes, &mut out);
                out
            })
            .collect()
    };
    let blocks: Vec<Vec<usize>> = pair.p.iter().map(|b| remap(b, &det_axes)).collect();
    let problem = SphereProblem::new(
        reduced,
        det_axes.len(),
        n,
        m,
        blocks,
        &[],
        Outer::Space(a.space()),
    );
    let restarts = run_restarts(&problem, n, cfg, &tag)?;
    let sweeps = restarts.iter().map(|(r, _)| r.sweeps).max().unwrap_or(0);

    let (values, stderrs): (Vec<f64>, Vec<f64>) = if pair.p_prime.is_empty() {
        restarts.iter().map(|(_, v)| (*v, 0.0)).unzip()
    } else {
        let eval_draws: Vec<Vec<Vec<f64>>> = (0..cfg.eval_samples)
            .into_par_iter()
            .map(|s| draw_blocks(&pair.p_prime, n, cfg.seed, &format!("{tag}:eval"), s as u64))
            .collect();
        let gauss_blocks: Vec<Vec<usize>> = pair.p_prime.iter().map(|b| remap(b, &gauss_axes)).collect();
        restarts
            .par_iter()
            .map(|(r, _)| {
                // contract the unit vectors first, then each fresh draw
                let factors: Vec<Factor<'_>> = pair
                    .p
                    .iter()
                    .zip(&r.vectors)
                    .map(|(b, x)| Factor { axes: b, weights: x })
                    .collect();
                let mut reduced = vec![0.0; n.pow(gauss_axes.len() as u32) * m];
                contract_raw(a.values(), a.order(), n, m, &factors, &gauss_axes, &mut reduced);
                let norms: Vec<f64> = eval_draws
                    .iter()
                    .map(|draws| {
                        let factors: Vec<Factor<'_>> = gauss_blocks
                            .iter()
                            .zip(draws)
                            .map(|(b, w)| Factor { axes: b, weights: w })
                            .collect();
                        let mut y = vec![0.0; m];
                        contract_raw(&reduced, gauss_axes.len(), n, m, &factors, &[], &mut y);
                        a.space().norm(&y)
                    })
                    .collect();
                mean_and_stderr(&norms)
            })
            .unzip()
    };
    let best = argmax(&values);
    Ok(NormEstimate {
        value: values[best],
        stderr: stderrs[best],
        restarts_used: cfg.restarts,
        saa_samples: if pair.p_prime.is_empty() { 0 } else { cfg.saa_samples },
        eval_samples: if pair.p_prime.is_empty() { 0 } else { cfg.eval_samples },
        sweeps,
        best_vectors: pair
            .p
            .iter()
            .zip(&restarts[best].0.vectors)
            .map(|(b, x)| BlockVector {
                block: b.clone(),
                x: x.clone(),
            })
            .collect(),
    })
}

/// `E || sum_i a_i prod_l g^l_{i_{J_l}} ||` over `eval_samples` draws.
fn gaussian_mean_norm(
    a: &CoeffTensor,
    gauss: &[Vec<usize>],
    cfg: &OptimizerConfig,
    tag: &str,
) -> Result<(f64, f64)> {
    let n = a.dim();
    let m = a.value_dim();
    let norms: Vec<f64> = (0..cfg.eval_samples)
        .into_par_iter()
        .map(|s| {
            let draws = draw_blocks(gauss, n, cfg.seed, &format!("{tag}:eval"), s as u64);
            let factors: Vec<Factor<'_>> = gauss
                .iter()
                .zip(&draws)
                .map(|(b, w)| Factor { axes: b, weights: w })
                .collect();
            let mut y = vec![0.0; m];
            contract_raw(a.values(), a.order(), n, m, &factors, &[], &mut y);
            a.space().norm(&y)
        })
        .collect();
    let (mean, se) = mean_and_stderr(&norms);
    if !mean.is_finite() {
        return Err(Error::Numeric(format!("Gaussian mean evaluated to {mean}")));
    }
    Ok((mean, se))
}

fn draw_blocks(blocks: &[Vec<usize>], n: usize, seed: u64, tag: &str, index: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, tag, index);
    blocks
        .iter()
        .map(|b| rng::gaussian_vec(&mut rng, n.pow(b.len() as u32)))
        .collect()
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// `|||A|||_P` for a partition `P` of `J ⊆ [d]`: the mixed norm with the
/// axes outside `J` carried by independent Gaussian vectors.
pub fn triple_norm(
    a: &CoeffTensor,
    j: &[usize],
    p: &Partition,
    cfg: &OptimizerConfig,
) -> Result<NormEstimate> {
    if !p.is_partition_of(j) {
        return Err(invalid(format!("{p} does not partition {}", fmt_block(j))));
    }
    mixed_norm(a, &PartitionPair::for_triple_norm(a.order(), p), cfg)
}

fn lq_parts(a: &CoeffTensor) -> Result<(f64, &[f64])> {
    match a.space() {
        ValueSpace::Lq { q, weights } => Ok((*q, weights.as_slice())),
        ValueSpace::FiniteSup { .. } => Err(Error::Unsupported(
            "this norm is defined for L_q-valued tensors only".into(),
        )),
    }
}

fn deterministic_sup(
    a: &CoeffTensor,
    blocks: &[Vec<usize>],
    out_axes: &[usize],
    outer: Outer<'_>,
    cfg: &OptimizerConfig,
    tag: &str,
) -> Result<NormEstimate> {
    cfg.validate()?;
    let n = a.dim();
    if a.is_zero() {
        return Ok(NormEstimate::zero(blocks, n));
    }
    let problem = SphereProblem::new(
        vec![a.values().to_vec()],
        a.order(),
        n,
        a.value_dim(),
        blocks.to_vec(),
        out_axes,
        outer,
    );
    if blocks.is_empty() {
        let v = problem.objective(&[]);
        if !v.is_finite() {
            return Err(Error::Numeric(format!("norm evaluated to {v}")));
        }
        return Ok(NormEstimate::exact(v));
    }
    let restarts = run_restarts(&problem, n, cfg, tag)?;
    let values: Vec<f64> = restarts.iter().map(|(_, v)| *v).collect();
    let best = argmax(&values);
    Ok(NormEstimate {
        value: values[best],
        stderr: 0.0,
        restarts_used: cfg.restarts,
        saa_samples: 0,
        eval_samples: 0,
        sweeps: restarts.iter().map(|(r, _)| r.sweeps).max().unwrap_or(0),
        best_vectors: blocks
            .iter()
            .zip(&restarts[best].0.vectors)
            .map(|(b, x)| BlockVector {
                block: b.clone(),
                x: x.clone(),
            })
            .collect(),
    })
}

/// `|||A|||^{L_q}_P`: sup over unit block vectors on `P` of
/// `|| sqrt( sum_{i outside J} (sum_{i_J} a_i prod x)^2 ) ||_{L_q}`.
pub fn lq_triple_norm(
    a: &CoeffTensor,
    j: &[usize],
    p: &Partition,
    cfg: &OptimizerConfig,
) -> Result<NormEstimate> {
    let (q, weights) = lq_parts(a)?;
    if j.iter().any(|&x| x >= a.order()) || !p.is_partition_of(j) {
        return Err(invalid(format!("{p} does not partition {} within [{}]", fmt_block(j), a.order())));
    }
    let free: Vec<usize> = (0..a.order()).filter(|x| !j.contains(x)).collect();
    let tag = format!("lq:{}:{p}", fmt_block(j));
    deterministic_sup(a, p.blocks(), &free, Outer::LqOfL2 { q, weights }, cfg, &tag)
}

/// `|||A|||^{L_q}_M` for a covering sequence `M = (J, I_1, .., I_k)`: the
/// `l_2` sum runs over `i_J`, the inner sum over the remaining indices, and
/// each `I_r` carries a unit vector. Blocks may share axes; their entries
/// then multiply.
pub fn lq_m_norm(a: &CoeffTensor, seq: &MSequence, cfg: &OptimizerConfig) -> Result<NormEstimate> {
    let (q, weights) = lq_parts(a)?;
    seq.validate(a.order())?;
    let tag = format!("lqM:{seq}");
    deterministic_sup(a, &seq.blocks, &seq.j, Outer::LqOfL2 { q, weights }, cfg, &tag)
}

/// `sup { sum_i a_i prod_r x^r_{i_{I_r}} : |x^r|_2 <= 1 }` for a real tensor
/// and a partition `P = (I_1, .., I_k)` of `[d]`.
pub fn real_chaos_sup(a: &CoeffTensor, p: &Partition, cfg: &OptimizerConfig) -> Result<NormEstimate> {
    if a.value_dim() != 1 {
        return Err(dimension(format!("real chaos needs m = 1, got m = {}", a.value_dim())));
    }
    let all: Vec<usize> = (0..a.order()).collect();
    if !p.is_partition_of(&all) {
        return Err(invalid(format!("{p} does not partition [{}]", a.order())));
    }
    let tag = format!("real:{p}");
    deterministic_sup(a, p.blocks(), &[], Outer::Euclidean, cfg, &tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;
    use crate::rng::gaussian_vec;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            seed: 11,
            ..OptimizerConfig::default()
        }
    }

    fn pair(s: &str) -> PartitionPair {
        s.parse().unwrap()
    }

    fn random_tensor(order: usize, n: usize, space: ValueSpace, seed: u64) -> CoeffTensor {
        let m = space.dim();
        let mut rng = rng::stream(seed, "test-tensor", 0);
        let v = gaussian_vec(&mut rng, n.pow(order as u32) * m);
        CoeffTensor::new(order, n, m, v, space).unwrap()
    }

    #[test]
    fn deterministic_d1_is_l2_norm() {
        let a = CoeffTensor::scalar(1, 2, vec![3.0, 4.0]).unwrap();
        let est = mixed_norm(&a, &pair("∅|{1}"), &cfg()).unwrap();
        assert!((est.value - 5.0).abs() < 1e-12);
        assert_eq!(est.stderr, 0.0);
        let x = &est.best_vectors[0].x;
        assert!((x[0].abs() - 0.6).abs() < 1e-9 && (x[1].abs() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn gaussian_d1_is_mean_abs() {
        let a = CoeffTensor::scalar(1, 2, vec![1.0, 0.0]).unwrap();
        let est = mixed_norm(&a, &pair("{1}|∅"), &cfg()).unwrap();
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((est.value - want).abs() < 4.0 * est.stderr, "{} ± {}", est.value, est.stderr);
        assert_eq!(est.eval_samples, 4096);
    }

    #[test]
    fn rank_one_spectral_norm() {
        let u = [0.6, 0.8];
        let v = [1.0, 0.0];
        let w = [0.0, -1.0];
        let a = CoeffTensor::from_fn(3, 2, ValueSpace::euclidean(1), |i, out| {
            out[0] = u[i[0]] * v[i[1]] * w[i[2]]
        })
        .unwrap();
        let est = mixed_norm(&a, &pair("∅|{1},{2},{3}"), &cfg()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diag_spectral_and_frobenius() {
        let a = CoeffTensor::scalar(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        let spec = real_chaos_sup(&a, &"{1},{2}".parse().unwrap(), &cfg()).unwrap();
        assert!((spec.value - 2.0).abs() < 1e-6, "{}", spec.value);
        let frob = real_chaos_sup(&a, &"{1,2}".parse().unwrap(), &cfg()).unwrap();
        assert!((frob.value - 5f64.sqrt()).abs() < 1e-12);
        let tri = triple_norm(&a, &[0, 1], &"{1},{2}".parse().unwrap(), &cfg()).unwrap();
        assert!((tri.value - 2.0).abs() < 1e-6, "{}", tri.value);
        assert!(real_chaos_sup(&a, &"{1}".parse().unwrap(), &cfg()).is_err());
    }

    #[test]
    fn triple_norm_is_the_singleton_alias() {
        let a = random_tensor(3, 3, ValueSpace::lq(3.0, vec![1.0, 0.5]).unwrap(), 3);
        let p: Partition = "{2}".parse().unwrap();
        let t = triple_norm(&a, &[1], &p, &cfg()).unwrap();
        let m = mixed_norm(&a, &pair("{1},{3}|{2}"), &cfg()).unwrap();
        assert_eq!(t, m);
    }

    #[test]
    fn zero_tensor_short_circuits() {
        let a = CoeffTensor::zeros(2, 3, ValueSpace::euclidean(2)).unwrap();
        for pr in crate::partitions::enumerate_partition_pairs(2) {
            assert_eq!(mixed_norm(&a, &pr, &cfg()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn lq_triple_examples() {
        let a = CoeffTensor::new(1, 2, 1, vec![3.0, 4.0], ValueSpace::lq(2.0, vec![1.0]).unwrap()).unwrap();
        let v = lq_triple_norm(&a, &[], &Partition::empty(), &cfg()).unwrap();
        assert!((v.value - 5.0).abs() < 1e-12);
        // a_i = e_i with m = n: sup_x |x|_{L_2} = 1
        let e = CoeffTensor::new(1, 3, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.], ValueSpace::euclidean(3)).unwrap();
        let v = lq_triple_norm(&e, &[0], &"{1}".parse().unwrap(), &cfg()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-9);
        let b = random_tensor(2, 3, ValueSpace::lq(4.0, vec![1.0, 2.0]).unwrap(), 5);
        let p: Partition = "{2}".parse().unwrap();
        let v1 = lq_triple_norm(&b, &[1], &p, &cfg()).unwrap().value;
        let v2 = lq_triple_norm(&b.scaled(2.0), &[1], &p, &cfg()).unwrap().value;
        assert_eq!(v2, 2.0 * v1);
        let sup = CoeffTensor::new(1, 1, 1, vec![1.0], ValueSpace::finite_sup(vec![vec![1.0], vec![-1.0]]).unwrap()).unwrap();
        assert!(matches!(
            lq_triple_norm(&sup, &[], &Partition::empty(), &cfg()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn lq_m_norm_full_j_is_pointwise_l2() {
        let a = random_tensor(2, 3, ValueSpace::lq(3.0, vec![0.5, 1.5]).unwrap(), 9);
        let seq = MSequence::new(vec![0, 1], vec![]);
        let v = lq_m_norm(&a, &seq, &cfg()).unwrap().value;
        let mut cols = [0.0f64; 2];
        for (k, x) in a.values().iter().enumerate() {
            cols[k % 2] += x * x;
        }
        let want = (0.5 * cols[0].sqrt().powi(3) + 1.5 * cols[1].sqrt().powi(3)).powf(1.0 / 3.0);
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn doubled_singletons_pick_the_largest_entry() {
        let a = random_tensor(2, 3, ValueSpace::lq(2.0, vec![1.0, 1.0]).unwrap(), 4);
        let seq = MSequence::new(vec![], vec![vec![0], vec![0], vec![1], vec![1]]);
        let v = lq_m_norm(&a, &seq, &cfg()).unwrap().value;
        let want = a
            .values()
            .chunks(2)
            .map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt())
            .fold(0.0, f64::max);
        assert!((v - want).abs() < 1e-6 * want, "{v} vs {want}");
    }

    #[test]
    fn coarser_partitions_have_larger_sups() {
        let a = random_tensor(3, 3, ValueSpace::euclidean(1), 21);
        let all = enumerate_partitions(&[0, 1, 2]);
        let fine = real_chaos_sup(&a, &Partition::singletons(&[0, 1, 2]), &cfg()).unwrap().value;
        let frob = a.frobenius();
        for p in &all {
            let v = real_chaos_sup(&a, p, &cfg()).unwrap().value;
            assert!(fine <= v * (1.0 + 1e-6), "{p}: {v} < {fine}");
            assert!(v <= frob * (1.0 + 1e-12));
        }
    }

    #[test]
    fn restarts_are_monotone() {
        let a = random_tensor(3, 4, ValueSpace::lq(3.0, vec![1.0, 1.0]).unwrap(), 8);
        let pr = pair("{3}|{1},{2}");
        let mut last = 0.0;
        for r in 1..=6 {
            let c = OptimizerConfig {
                restarts: r,
                saa_samples: 32,
                eval_samples: 256,
                ..cfg()
            };
            let v = mixed_norm(&a, &pr, &c).unwrap().value;
            assert!(v >= last, "restarts {r}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn homogeneity_with_shared_seed() {
        let a = random_tensor(3, 3, ValueSpace::lq(3.0, vec![1.0, 2.0]).unwrap(), 2);
        let c = OptimizerConfig {
            saa_samples: 32,
            eval_samples: 256,
            ..cfg()
        };
        for pr in crate::partitions::enumerate_partition_pairs(3) {
            let v = mixed_norm(&a, &pr, &c).unwrap().value;
            let w = mixed_norm(&a.scaled(-3.0), &pr, &c).unwrap().value;
            assert!((w - 3.0 * v).abs() <= 1e-6 * w, "{pr}: {w} vs {}", 3.0 * v);
        }
    }

    #[test]
    fn permutation_equivariance_of_deterministic_norms() {
        let a = random_tensor(3, 3, ValueSpace::lq(3.0, vec![1.0, 2.0]).unwrap(), 12);
        let perm = [2, 0, 1];
        let b = a.permute_axes(&perm).unwrap();
        // axis k of b is axis perm[k] of a, so block {perm[k]} of a becomes {k} of b
        let inv = |ax: usize| perm.iter().position(|&p| p == ax).unwrap();
        for p in enumerate_partitions(&[0, 1, 2]) {
            let blocks: Vec<Vec<usize>> = p.blocks().iter().map(|bl| bl.iter().map(|&x| inv(x)).collect()).collect();
            let q = Partition::new(blocks).unwrap();
            let pa = PartitionPair::new(p.blocks().to_vec(), vec![]).unwrap();
            let pb = PartitionPair::new(q.blocks().to_vec(), vec![]).unwrap();
            let va = mixed_norm(&a, &pa, &cfg()).unwrap().value;
            let vb = mixed_norm(&b, &pb, &cfg()).unwrap().value;
            assert!((va - vb).abs() <= 1e-6 * va, "{p}: {va} vs {vb}");
        }
    }
}
