//! Property tests for the agreement loss: symmetry, nonnegativity, finite
//! clamped extremes, and gradient behavior in and out of the clamp region.

use proptest::prelude::*;

use mfvis_core::losses::{consistency_loss, DEFAULT_CLAMP_EPS};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn symmetric_and_nonnegative(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let ab = consistency_loss(a, b, DEFAULT_CLAMP_EPS);
        let ba = consistency_loss(b, a, DEFAULT_CLAMP_EPS);
        prop_assert_eq!(ab.value, ba.value, "value must be exactly symmetric");
        prop_assert_eq!(ab.grad_a, ba.grad_b);
        prop_assert_eq!(ab.grad_b, ba.grad_a);
        prop_assert!(ab.value >= 0.0);
        prop_assert!(ab.value.is_finite());
        prop_assert!(ab.grad_a.is_finite() && ab.grad_b.is_finite());
    }

    #[test]
    fn extremes_stay_finite_and_flat(a in prop_oneof![Just(0.0), Just(1.0)], b in 0.0f64..=1.0) {
        // Whatever the partner value, an exact 0 or 1 never produces an
        // infinite loss or an unbounded gradient.
        let term = consistency_loss(a, b, DEFAULT_CLAMP_EPS);
        prop_assert!(term.value.is_finite());
        prop_assert!(term.value <= -(DEFAULT_CLAMP_EPS.ln()) + 1e-9);
        if b == a {
            prop_assert_eq!(term.value, 0.0);
            prop_assert_eq!((term.grad_a, term.grad_b), (0.0, 0.0));
        }
        if b == 1.0 - a {
            // Full disagreement hits the lower clamp; gradients shut off.
            prop_assert_eq!((term.grad_a, term.grad_b), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_only_at_agreeing_extremes(a in 0.001f64..=0.999, b in 0.001f64..=0.999) {
        let term = consistency_loss(a, b, DEFAULT_CLAMP_EPS);
        prop_assert!(term.value > 0.0, "interior values always disagree a little");
    }
}
