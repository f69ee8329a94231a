//! Skip-gram negative-sampling objective and its SGD update.
//!
//! For a center input vector `v`, an observed context output vector `u_o` and
//! negative output vectors `u_k`:
//!
//! ```text
//! loss = -ln σ(u_o · v) - Σ_k ln σ(-u_k · v)
//! ```

use std::sync::atomic::{AtomicU32, Ordering};

use num_traits::Float;

/// σ is clamped into `[SIGMOID_EPS, 1 - SIGMOID_EPS]` before taking logs.
pub const SIGMOID_EPS: f64 = 1e-7;

#[inline]
pub fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

#[inline]
fn neg_log_clamped<F: Float>(p: F) -> F {
    let eps = F::from(SIGMOID_EPS).unwrap();
    -(p.max(eps).min(F::one() - eps)).ln()
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Loss and exact gradients for one (center, context, negatives) example.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients<F> {
    pub loss: F,
    pub center: Vec<F>,
    pub context: Vec<F>,
    pub negatives: Vec<Vec<F>>,
}

pub fn sgns_pair_loss<F: Float>(center: &[F], context: &[F], negatives: &[&[F]]) -> PairGradients<F> {
    let d = center.len();
    assert_eq!(context.len(), d, "context dimension");
    let mut grad_center = vec![F::zero(); d];

    let s = sigmoid(dot(context, center));
    let mut loss = neg_log_clamped(s);
    // d/dx -ln σ(x) = σ(x) - 1
    let g = s - F::one();
    for i in 0..d {
        grad_center[i] = grad_center[i] + g * context[i];
    }
    let grad_context = center.iter().map(|&c| g * c).collect();

    let grad_negatives = negatives
        .iter()
        .map(|neg| {
            assert_eq!(neg.len(), d, "negative dimension");
            let s = sigmoid(dot(neg, center));
            loss = loss + neg_log_clamped(F::one() - s);
            // d/dx -ln σ(-x) = σ(x)
            for i in 0..d {
                grad_center[i] = grad_center[i] + s * neg[i];
            }
            center.iter().map(|&c| s * c).collect()
        })
        .collect();

    PairGradients {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    }
}

/// Row-addressable parameter table.
pub(crate) trait Rows {
    fn read(&self, row: u32, out: &mut [f32]);
    fn dot(&self, row: u32, v: &[f32]) -> f32;
    /// `acc += a * table[row]`
    fn accumulate(&self, row: u32, a: f32, acc: &mut [f32]);
    /// `table[row] += a * v`
    fn add_scaled(&mut self, row: u32, a: f32, v: &[f32]);
}

pub(crate) struct DenseRows<'a> {
    pub data: &'a mut [f32],
    pub dim: usize,
}

impl DenseRows<'_> {
    #[inline]
    fn row(&self, r: u32) -> &[f32] {
        let s = r as usize * self.dim;
        &self.data[s..s + self.dim]
    }
}

impl Rows for DenseRows<'_> {
    fn read(&self, row: u32, out: &mut [f32]) {
        out.copy_from_slice(self.row(row));
    }

    #[inline]
    fn dot(&self, row: u32, v: &[f32]) -> f32 {
        dot(self.row(row), v)
    }

    #[inline]
    fn accumulate(&self, row: u32, a: f32, acc: &mut [f32]) {
        for (x, &r) in acc.iter_mut().zip(self.row(row)) {
            *x += a * r;
        }
    }

    #[inline]
    fn add_scaled(&mut self, row: u32, a: f32, v: &[f32]) {
        let s = row as usize * self.dim;
        for (x, &y) in self.data[s..s + self.dim].iter_mut().zip(v) {
            *x += a * y;
        }
    }
}

/// Shared view for lock-free parallel training. Individual entries are
/// read and written atomically (relaxed); concurrent read-modify-write of
/// the same entry may lose an update, which asynchronous SGD tolerates.
#[derive(Clone, Copy)]
pub(crate) struct SharedRows<'a> {
    pub data: &'a [AtomicU32],
    pub dim: usize,
}

impl<'a> SharedRows<'a> {
    pub fn new(data: &'a mut [f32], dim: usize) -> Self {
        // SAFETY: AtomicU32 has the size and alignment of u32, which match
        // f32, and we hold the unique borrow for 'a.
        let data = unsafe { &*(data as *mut [f32] as *const [AtomicU32]) };
        SharedRows { data, dim }
    }

    #[inline]
    fn row(&self, r: u32) -> &[AtomicU32] {
        let s = r as usize * self.dim;
        &self.data[s..s + self.dim]
    }
}

#[inline]
fn load(a: &AtomicU32) -> f32 {
    f32::from_bits(a.load(Ordering::Relaxed))
}

impl Rows for SharedRows<'_> {
    fn read(&self, row: u32, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.row(row)) {
            *o = load(a);
        }
    }

    #[inline]
    fn dot(&self, row: u32, v: &[f32]) -> f32 {
        self.row(row).iter().zip(v).fold(0.0, |acc, (a, &y)| acc + load(a) * y)
    }

    #[inline]
    fn accumulate(&self, row: u32, a: f32, acc: &mut [f32]) {
        for (x, r) in acc.iter_mut().zip(self.row(row)) {
            *x += a * load(r);
        }
    }

    #[inline]
    fn add_scaled(&mut self, row: u32, a: f32, v: &[f32]) {
        for (x, &y) in self.row(row).iter().zip(v) {
            x.store((load(x) + a * y).to_bits(), Ordering::Relaxed);
        }
    }
}

/// One SGD step on a (center, context, negatives) example.
///
/// `center` holds a copy of the center input vector. Output rows are updated
/// in place; the center-vector update (already scaled by `lr`) is left in
/// `grad` for the caller to apply. Returns the example's loss.
pub(crate) fn sgns_step<O: Rows>(
    center: &[f32],
    grad: &mut [f32],
    output: &mut O,
    context: u32,
    negatives: &[u32],
    lr: f32,
) -> f64 {
    grad.fill(0.0);
    let eps = SIGMOID_EPS;
    let mut loss = 0.0f64;
    let targets = std::iter::once((context, 1.0f32)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (target, label) in targets {
        let s = sigmoid(output.dot(target, center));
        let p = f64::from(if label > 0.0 { s } else { 1.0 - s });
        loss -= p.clamp(eps, 1.0 - eps).ln();
        let g = (label - s) * lr;
        output.accumulate(target, g, grad);
        output.add_scaled(target, g, center);
    }
    loss
}
