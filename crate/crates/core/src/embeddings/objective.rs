//! Skip-gram negative-sampling objective for one (center, context, negatives)
//! triple:
//!
//! `L = -ln σ(u₊·h) - Σₙ ln σ(-uₙ·h)`
//!
//! where `h` is the center word's input vector, `u₊` the context word's
//! output vector and `uₙ` the output vectors of the sampled noise words.

use num_traits::Float;

/// `ln σ(x)`, stable for large |x|.
pub fn log_sigmoid<F: Float>(x: F) -> F {
    // ln σ(x) = -softplus(-x)
    let z = -x;
    -(z.max(F::zero()) + (F::one() + (-z.abs()).exp()).ln())
}

pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn loss<F: Float>(center: &[F], positive: &[F], negatives: &[&[F]]) -> F {
    let mut l = -log_sigmoid(dot(positive, center));
    for n in negatives {
        l = l - log_sigmoid(-dot(n, center));
    }
    l
}

#[derive(Clone, Debug)]
pub struct Gradients<F> {
    pub loss: F,
    pub center: Vec<F>,
    pub positive: Vec<F>,
    pub negatives: Vec<Vec<F>>,
}

/// Analytic gradients of [`loss`] with respect to every argument.
pub fn gradients<F: Float>(center: &[F], positive: &[F], negatives: &[&[F]]) -> Gradients<F> {
    let mut g_center = vec![F::zero(); center.len()];
    let s = dot(positive, center);
    // dL/ds₊ = σ(s₊) - 1
    let c = sigmoid(s) - F::one();
    for (g, &u) in g_center.iter_mut().zip(positive) {
        *g = *g + c * u;
    }
    let g_pos = center.iter().map(|&h| c * h).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        // dL/dsₙ = σ(sₙ)
        let c = sigmoid(dot(n, center));
        for (g, &u) in g_center.iter_mut().zip(n.iter()) {
            *g = *g + c * u;
        }
        g_negs.push(center.iter().map(|&h| c * h).collect());
    }
    Gradients {
        loss: loss(center, positive, negatives),
        center: g_center,
        positive: g_pos,
        negatives: g_negs,
    }
}

/// One logistic unit of the objective, applied in place as an SGD step.
///
/// Updates `output` by `-lr · ∂L/∂u`, adds `-lr · ∂L/∂h` into
/// `hidden_step` and returns this unit's loss contribution.
pub(crate) fn logistic_step<F: Float>(
    hidden: &[F],
    output: &mut [F],
    positive: bool,
    lr: F,
    hidden_step: &mut [F],
) -> F {
    let s = dot(output, hidden);
    let (coef, l) = if positive {
        (F::one() - sigmoid(s), -log_sigmoid(s))
    } else {
        (-sigmoid(s), -log_sigmoid(-s))
    };
    let alpha = lr * coef;
    for (hs, &u) in hidden_step.iter_mut().zip(output.iter()) {
        *hs = *hs + alpha * u;
    }
    for (u, &h) in output.iter_mut().zip(hidden) {
        *u = *u + alpha * h;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0f64) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(-1000.0f64).is_finite());
        assert_eq!(log_sigmoid(1000.0f64), 0.0);
    }

    #[test]
    fn step_matches_gradient_descent() {
        let h = [0.3, -0.2, 0.5];
        let p = [0.1, 0.4, -0.3];
        let n = [-0.2, 0.1, 0.6];
        let g = gradients(&h, &p, &[&n]);
        let lr = 0.01;

        let mut hs = [0.0; 3];
        let mut p2 = p;
        let mut n2 = n;
        let l = logistic_step(&h, &mut p2, true, lr, &mut hs)
            + logistic_step(&h, &mut n2, false, lr, &mut hs);
        assert!((l - g.loss).abs() < 1e-12);
        for i in 0..3 {
            assert!((p2[i] - (p[i] - lr * g.positive[i])).abs() < 1e-15);
            assert!((n2[i] - (n[i] - lr * g.negatives[0][i])).abs() < 1e-15);
            assert!((hs[i] + lr * g.center[i]).abs() < 1e-15);
        }
    }
}
