//! Alternating maximization over products of Euclidean unit spheres.
//!
//! The objective is `x -> mean_s Phi(L_s(x^1, .., x^k))` where each `L_s`
//! contracts a tensor against the block vectors and `Phi` is a norm on the
//! image. With all blocks but one held fixed the objective is a convex,
//! positively 1-homogeneous function of the free block, so replacing that
//! block by its normalized gradient never decreases it. Sweeping over blocks
//! is the higher-order power method generalized to arbitrary outer norms.

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::space::ValueSpace;
use crate::tensor::offsets_table;

pub(crate) enum Outer<'a> {
    /// Image in `R^m`, measured by the value space.
    Space(&'a ValueSpace),
    /// Image in `R^{F x m}`: `l_2` over the free indices, then weighted `l_q`.
    LqOfL2 { q: f64, weights: &'a [f64] },
    /// Plain Euclidean norm of the whole image.
    Euclidean,
}

pub(crate) struct SphereProblem<'a> {
    tensors: Vec<Vec<f64>>,
    m: usize,
    entries: usize,
    blocks: Vec<Vec<usize>>,
    block_offsets: Vec<Vec<usize>>,
    out_offsets: Vec<usize>,
    out_len: usize,
    outer: Outer<'a>,
}

pub(crate) struct Maximum {
    pub vectors: Vec<Vec<f64>>,
    pub value: f64,
    pub sweeps: usize,
}

impl<'a> SphereProblem<'a> {
    /// `tensors` share the shape `dim^order x m`. Block axes may overlap with
    /// each other and with `out_axes`.
    pub fn new(
        tensors: Vec<Vec<f64>>,
        order: usize,
        dim: usize,
        m: usize,
        blocks: Vec<Vec<usize>>,
        out_axes: &[usize],
        outer: Outer<'a>,
    ) -> Self {
        let block_offsets = blocks.iter().map(|b| offsets_table(b, order, dim)).collect();
        SphereProblem {
            tensors,
            m,
            entries: dim.pow(order as u32),
            block_offsets,
            out_offsets: offsets_table(out_axes, order, dim),
            out_len: dim.pow(out_axes.len() as u32),
            outer,
            blocks,
        }
    }

    pub fn block_len(&self, r: usize, dim: usize) -> usize {
        dim.pow(self.blocks[r].len() as u32)
    }

    fn image(&self, s: usize, xs: &[Vec<f64>], buf: &mut [f64]) {
        buf.iter_mut().for_each(|b| *b = 0.0);
        let a = &self.tensors[s];
        let m = self.m;
        'entries: for flat in 0..self.entries {
            let mut w = 1.0;
            for (x, off) in xs.iter().zip(&self.block_offsets) {
                w *= x[off[flat]];
                if w == 0.0 {
                    continue 'entries;
                }
            }
            let o = self.out_offsets[flat] * m;
            for (d, v) in buf[o..o + m].iter_mut().zip(&a[flat * m..flat * m + m]) {
                *d += w * v;
            }
        }
    }

    fn outer_value(&self, y: &[f64]) -> f64 {
        match &self.outer {
            Outer::Space(space) => space.norm(y),
            Outer::Euclidean => y.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Outer::LqOfL2 { q, weights } => {
                let cols = column_l2(y, self.m);
                weights
                    .iter()
                    .zip(&cols)
                    .map(|(w, c)| w * c.powf(*q))
                    .sum::<f64>()
                    .powf(1.0 / q)
            }
        }
    }

    fn outer_gradient(&self, y: &[f64], g: &mut [f64]) {
        match &self.outer {
            Outer::Space(space) => space.subgradient(y, g),
            Outer::Euclidean => {
                let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (gi, yi) in g.iter_mut().zip(y) {
                    *gi = if n > 0.0 { yi / n } else { 0.0 };
                }
            }
            Outer::LqOfL2 { q, weights } => {
                let m = self.m;
                let cols = column_l2(y, m);
                let phi = self.outer_value(y);
                g.iter_mut().for_each(|v| *v = 0.0);
                if phi == 0.0 {
                    return;
                }
                // d phi / d y[f, j] = w_j (s_j / phi)^(q-1) y[f, j] / s_j
                let coef: Vec<f64> = cols
                    .iter()
                    .zip(weights.iter())
                    .map(|(&s, &w)| {
                        if s > 0.0 {
                            w * (s / phi).powf(q - 1.0) / s
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (k, (gi, yi)) in g.iter_mut().zip(y).enumerate() {
                    *gi = coef[k % m] * yi;
                }
            }
        }
    }

    pub fn objective(&self, xs: &[Vec<f64>]) -> f64 {
        let mut buf = vec![0.0; self.out_len * self.m];
        let mut total = 0.0;
        for s in 0..self.tensors.len() {
            self.image(s, xs, &mut buf);
            total += self.outer_value(&buf);
        }
        total / self.tensors.len() as f64
    }

    fn block_gradient(&self, r: usize, xs: &[Vec<f64>], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let m = self.m;
        let mut y = vec![0.0; self.out_len * m];
        let mut u = vec![0.0; self.out_len * m];
        for s in 0..self.tensors.len() {
            self.image(s, xs, &mut y);
            self.outer_gradient(&y, &mut u);
            let a = &self.tensors[s];
            'entries: for flat in 0..self.entries {
                let o = self.out_offsets[flat] * m;
                let c: f64 = a[flat * m..flat * m + m]
                    .iter()
                    .zip(&u[o..o + m])
                    .map(|(x, y)| x * y)
                    .sum();
                if c == 0.0 {
                    continue;
                }
                let mut w = c;
                for (b, (x, off)) in xs.iter().zip(&self.block_offsets).enumerate() {
                    if b != r {
                        w *= x[off[flat]];
                        if w == 0.0 {
                            continue 'entries;
                        }
                    }
                }
                grad[self.block_offsets[r][flat]] += w;
            }
        }
    }

    /// Block-coordinate ascent from `init` until the relative improvement of a
    /// full sweep drops below `tol` or `max_sweeps` is reached.
    pub fn maximize(&self, init: Vec<Vec<f64>>, max_sweeps: usize, tol: f64) -> Result<Maximum> {
        let mut xs = init;
        let mut value = self.objective(&xs);
        check_finite(value)?;
        let mut sweeps = 0;
        if xs.is_empty() {
            return Ok(Maximum { vectors: xs, value, sweeps });
        }
        let mut grad: Vec<Vec<f64>> = xs.iter().map(|x| vec![0.0; x.len()]).collect();
        while sweeps < max_sweeps {
            sweeps += 1;
            let before = xs.clone();
            for r in 0..xs.len() {
                self.block_gradient(r, &xs, &mut grad[r]);
                let norm = grad[r].iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > 0.0 && norm.is_finite() {
                    for (x, g) in xs[r].iter_mut().zip(&grad[r]) {
                        *x = g / norm;
                    }
                }
            }
            let next = self.objective(&xs);
            check_finite(next)?;
            if next < value {
                // rounding-level regression; keep the previous iterate
                xs = before;
                break;
            }
            let gain = next - value;
            value = next;
            if gain <= tol * value.abs() {
                break;
            }
        }
        Ok(Maximum { vectors: xs, value, sweeps })
    }

    /// Random unit starting vectors for restart `restart`.
    pub fn random_start(&self, dim: usize, seed: u64, tag: &str, restart: u64) -> Vec<Vec<f64>> {
        let mut rng: StreamRng = rng::stream(seed, &format!("{tag}:init"), restart);
        (0..self.blocks.len())
            .map(|r| {
                let mut x = rng::gaussian_vec(&mut rng, self.block_len(r, dim));
                normalize(&mut x);
                x
            })
            .collect()
    }
}

fn column_l2(y: &[f64], m: usize) -> Vec<f64> {
    let mut cols = vec![0.0; m];
    for (k, v) in y.iter().enumerate() {
        cols[k % m] += v * v;
    }
    cols.iter_mut().for_each(|c| *c = c.sqrt());
    cols
}

pub(crate) fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    } else if let Some(first) = x.first_mut() {
        *first = 1.0;
    }
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("objective evaluated to {v}")))
    }
}
