//! Pairwise probability-consistency loss.
//!
//! For two foreground probabilities `a` and `b`, the chance they agree
//! (both foreground or both background, treated independently) is
//! `q = a*b + (1-a)(1-b)`; the loss is `-log q`. It is zero exactly when
//! both are 0 or both are 1, and `log 2` at the maximally undecided point
//! `(0.5, 0.5)`.

/// Value and partials of one consistency term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyTerm {
    pub value: f64,
    pub grad_a: f64,
    pub grad_b: f64,
}

/// Computes `-log q` with `q` clamped into `[clamp_eps, 1]`. Wherever the
/// clamp engages (total disagreement pushing `q` below `clamp_eps`, or
/// exact agreement at `q = 1`) the partials are defined as zero.
pub fn consistency_loss(m_a: f64, m_b: f64, clamp_eps: f64) -> ConsistencyTerm {
    debug_assert!((0.0..=1.0).contains(&m_a) && (0.0..=1.0).contains(&m_b));
    debug_assert!(clamp_eps > 0.0 && clamp_eps < 1.0);
    let q_raw = m_a * m_b + (1.0 - m_a) * (1.0 - m_b);
    let q = q_raw.clamp(clamp_eps, 1.0);
    let value = -q.ln();
    if q_raw < clamp_eps || q_raw >= 1.0 {
        return ConsistencyTerm { value, grad_a: 0.0, grad_b: 0.0 };
    }
    ConsistencyTerm {
        value,
        grad_a: -(2.0 * m_b - 1.0) / q,
        grad_b: -(2.0 * m_a - 1.0) / q,
    }
}
