//! Finite-difference validation of every analytic gradient. Each loss is
//! probed at randomly chosen entries of random mask fields over random
//! tubes; probe entries are filtered to sit away from clamp boundaries and
//! argmax ties, where the losses are differentiable.

use ndarray::{Array3, Array4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mfvis_core::correspondence::{compute_tube_matches, ConnectionScheme, PatchConfig};
use mfvis_core::losses::{
    build_color_edges, consistency_loss, finite_diff_gradient, pairwise_loss, projection_loss,
    relative_error, tk_loss, tk_loss_with_matches, total_loss, EdgeTopology, LossWeights,
    DEFAULT_CLAMP_EPS,
};
use mfvis_core::video::{BoundingBox, Frame, MaskField, Tube};

const H_STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;
const ENTRIES_PER_CASE: usize = 20;

fn random_frame(rng: &mut StdRng, h: usize, w: usize) -> Frame {
    let rgb = Array3::from_shape_fn((h, w, 3), |_| rng.gen::<u8>());
    Frame::from_rgb(rgb).unwrap()
}

fn random_tube(rng: &mut StdRng, n: usize, t: usize, h: usize, w: usize) -> Tube {
    let frames = (0..t).map(|_| random_frame(rng, h, w)).collect();
    let boxes = (0..t)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let x0 = rng.gen_range(0..w as u32 - 2);
                    let y0 = rng.gen_range(0..h as u32 - 2);
                    let x1 = rng.gen_range(x0 + 2..=w as u32);
                    let y1 = rng.gen_range(y0 + 2..=h as u32);
                    BoundingBox::new(x0, y0, x1, y1)
                })
                .collect()
        })
        .collect();
    Tube::new(frames, boxes, None).unwrap()
}

fn random_mask(rng: &mut StdRng, n: usize, t: usize, h: usize, w: usize) -> MaskField {
    let values = Array4::from_shape_fn((n, t, h, w), |_| rng.gen_range(0.1..0.9));
    MaskField::new(values).unwrap()
}

/// True when the entry's column and row maxima are attained with a margin,
/// so a +-h probe cannot flip any argmax the projection loss routed
/// through.
fn projection_safe(values: &Array4<f64>, entry: [usize; 4], margin: f64) -> bool {
    let [i, t, y, x] = entry;
    let (_, _, h, w) = values.dim();
    let v = values[[i, t, y, x]];

    let col_max = (0..h).map(|yy| values[[i, t, yy, x]]).fold(f64::MIN, f64::max);
    let col_runner = (0..h)
        .filter(|&yy| yy != y)
        .map(|yy| values[[i, t, yy, x]])
        .fold(f64::MIN, f64::max);
    let col_ok = if v >= col_max { v - col_runner > margin } else { col_max - v > margin };

    let row_max = (0..w).map(|xx| values[[i, t, y, xx]]).fold(f64::MIN, f64::max);
    let row_runner = (0..w)
        .filter(|&xx| xx != x)
        .map(|xx| values[[i, t, y, xx]])
        .fold(f64::MIN, f64::max);
    let row_ok = if v >= row_max { v - row_runner > margin } else { row_max - v > margin };

    col_ok && row_ok
}

fn pick_entries(
    rng: &mut StdRng,
    mask: &MaskField,
    needs_projection_safety: bool,
) -> Vec<[usize; 4]> {
    let (n, t, h, w) = mask.values().dim();
    let mut entries = Vec::new();
    let mut attempts = 0;
    while entries.len() < ENTRIES_PER_CASE && attempts < 10_000 {
        attempts += 1;
        let entry = [
            rng.gen_range(0..n),
            rng.gen_range(0..t),
            rng.gen_range(0..h),
            rng.gen_range(0..w),
        ];
        if entries.contains(&entry) {
            continue;
        }
        if needs_projection_safety && !projection_safe(mask.values(), entry, 100.0 * H_STEP) {
            continue;
        }
        entries.push(entry);
    }
    assert!(
        entries.len() >= ENTRIES_PER_CASE,
        "could not find enough differentiable probe entries"
    );
    entries
}

fn check_gradient(
    name: &str,
    mask: &MaskField,
    analytic: &Array4<f64>,
    entries: &[[usize; 4]],
    loss_fn: impl Fn(&MaskField) -> mfvis_core::Result<f64>,
) {
    let numeric = finite_diff_gradient(&loss_fn, mask, entries, H_STEP).unwrap();
    for (entry, numeric) in entries.iter().zip(numeric) {
        let a = analytic[*entry];
        let err = relative_error(a, numeric);
        assert!(
            err < TOLERANCE,
            "{name} gradient at {entry:?}: analytic {a}, numeric {numeric}, rel err {err}"
        );
    }
}

#[test]
fn consistency_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..10 {
        let a = rng.gen_range(0.1..0.9);
        let b = rng.gen_range(0.1..0.9);
        let term = consistency_loss(a, b, DEFAULT_CLAMP_EPS);
        let h = 1e-6;
        let num_a = (consistency_loss(a + h, b, DEFAULT_CLAMP_EPS).value
            - consistency_loss(a - h, b, DEFAULT_CLAMP_EPS).value)
            / (2.0 * h);
        let num_b = (consistency_loss(a, b + h, DEFAULT_CLAMP_EPS).value
            - consistency_loss(a, b - h, DEFAULT_CLAMP_EPS).value)
            / (2.0 * h);
        assert!(relative_error(term.grad_a, num_a) < TOLERANCE);
        assert!(relative_error(term.grad_b, num_b) < TOLERANCE);
    }
}

#[test]
fn projection_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(42);
    for case in 0..10 {
        let tube = random_tube(&mut rng, 2, 2, 7, 6);
        let mask = random_mask(&mut rng, 2, 2, 7, 6);
        let (_, grad) = projection_loss(&mask, &tube).unwrap();
        let entries = pick_entries(&mut rng, &mask, true);
        check_gradient(
            &format!("projection (case {case})"),
            &mask,
            &grad,
            &entries,
            |m| projection_loss(m, &tube).map(|(v, _)| v),
        );
    }
}

#[test]
fn pairwise_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(43);
    let topology = EdgeTopology::default();
    for case in 0..10 {
        let tube = random_tube(&mut rng, 1, 3, 6, 6);
        // A permissive similarity threshold keeps plenty of edges alive on
        // noise frames.
        let edges: Vec<_> = tube
            .frames()
            .iter()
            .map(|f| build_color_edges(f, 0.01, &topology).unwrap())
            .collect();
        assert!(edges.iter().any(|e| !e.is_empty()), "case {case} built no edges");
        let mask = random_mask(&mut rng, 1, 3, 6, 6);
        let (_, grad) = pairwise_loss(&mask, &edges, DEFAULT_CLAMP_EPS);
        let entries = pick_entries(&mut rng, &mask, false);
        check_gradient(&format!("pairwise (case {case})"), &mask, &grad, &entries, |m| {
            Ok(pairwise_loss(m, &edges, DEFAULT_CLAMP_EPS).0)
        });
    }
}

#[test]
fn temporal_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(44);
    let config = PatchConfig { distance_threshold: 0.5, ..PatchConfig::default() };
    for case in 0..10 {
        let tube = random_tube(&mut rng, 2, 3, 6, 6);
        let matches = compute_tube_matches(&tube, &config, ConnectionScheme::Cyclic).unwrap();
        assert!(matches.iter().any(|ms| ms.n_matches() > 0), "case {case} found no matches");
        let mask = random_mask(&mut rng, 2, 3, 6, 6);
        let (_, grad) = tk_loss_with_matches(&mask, &matches, DEFAULT_CLAMP_EPS).unwrap();
        let entries = pick_entries(&mut rng, &mask, false);
        check_gradient(&format!("temporal (case {case})"), &mask, &grad, &entries, |m| {
            tk_loss_with_matches(m, &matches, DEFAULT_CLAMP_EPS).map(|(v, _)| v)
        });
    }
}

#[test]
fn total_gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(45);
    let config = PatchConfig { distance_threshold: 0.5, ..PatchConfig::default() };
    let weights = LossWeights::default();
    for case in 0..10 {
        let tube = random_tube(&mut rng, 2, 2, 6, 6);
        let mask = random_mask(&mut rng, 2, 2, 6, 6);
        let report = total_loss(&mask, &tube, &config, &weights, ConnectionScheme::Cyclic)
            .unwrap();
        let entries = pick_entries(&mut rng, &mask, true);
        check_gradient(&format!("total (case {case})"), &mask, &report.grad, &entries, |m| {
            total_loss(m, &tube, &config, &weights, ConnectionScheme::Cyclic)
                .map(|r| r.l_seg)
        });
    }
}

#[test]
fn tk_loss_equals_its_precomputed_variant() {
    let mut rng = StdRng::seed_from_u64(46);
    let config = PatchConfig { distance_threshold: 0.3, ..PatchConfig::default() };
    let tube = random_tube(&mut rng, 2, 4, 8, 8);
    let mask = random_mask(&mut rng, 2, 4, 8, 8);
    let (direct, grad_direct) =
        tk_loss(&mask, &tube, &config, ConnectionScheme::Dense, DEFAULT_CLAMP_EPS).unwrap();
    let matches = compute_tube_matches(&tube, &config, ConnectionScheme::Dense).unwrap();
    let (via_matches, grad_via) =
        tk_loss_with_matches(&mask, &matches, DEFAULT_CLAMP_EPS).unwrap();
    assert_eq!(direct, via_matches);
    assert_eq!(grad_direct, grad_via);
}
