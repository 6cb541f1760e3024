//! Release gate for the whole workspace. Each test checks one shipping
//! criterion end to end and prints a single PASS or FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see them all.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array2, Array3, Array4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mfvis_core::correspondence::{
    build_tube_connections, compute_tube_matches, correspondence_accuracy, find_matches,
    find_matches_bruteforce, ConnectionScheme, Metric, PatchConfig,
};
use mfvis_core::losses::{
    build_color_edges, consistency_loss, finite_diff_gradient, pairwise_loss, projection_loss,
    relative_error, tk_loss_with_matches, total_loss, EdgeTopology, LossWeights,
    DEFAULT_CLAMP_EPS,
};
use mfvis_core::matching_cost::{
    hungarian_assign, mask_to_boxmask, st_boxmask_cost, st_boxmask_cost_exhaustive,
    BoxMaskSequence, CostMatrix, SamplePolicy,
};
use mfvis_core::video::{
    generate_synthetic_tube, BoundingBox, Frame, InstanceSpec, MaskField, ShapeKind,
    SyntheticSpec, Tube,
};

fn criterion(n: u32, name: &str, budget: Duration, f: impl FnOnce() -> Result<(), String>) {
    let started = Instant::now();
    let outcome = f();
    let elapsed = started.elapsed();
    let outcome = outcome.and_then(|()| {
        if elapsed <= budget {
            Ok(())
        } else {
            Err(format!("took {elapsed:.1?}, budget {budget:.1?}"))
        }
    });
    match outcome {
        Ok(()) => println!("criterion {n} ({name}): PASS [{elapsed:.1?}]"),
        Err(msg) => {
            println!("criterion {n} ({name}): FAIL {msg}");
            panic!("criterion {n} ({name}) failed: {msg}");
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_frame(rng: &mut StdRng, h: usize, w: usize) -> Frame {
    Frame::from_rgb(Array3::from_shape_fn((h, w, 3), |_| rng.gen::<u8>())).unwrap()
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
    MaskField::new(Array4::from_shape_fn((n, t, h, w), |_| rng.gen_range(0.1..0.9))).unwrap()
}

#[test]
fn criterion_01_matching_oracle_equivalence() {
    criterion(1, "matching oracle equivalence", Duration::from_secs(60), || {
        let mut rng = StdRng::seed_from_u64(101);
        let metrics = [Metric::L1, Metric::L2, Metric::Ncc];
        let ks = [1u32, 3, 5];
        let rs = [1u32, 2];
        let dils = [1u32, 3];
        let thresholds = [0.02, 0.05, 0.3];
        for case in 0..200usize {
            let h = rng.gen_range(4..=24);
            let w = rng.gen_range(4..=24);
            let source = random_frame(&mut rng, h, w);
            let target = random_frame(&mut rng, h, w);
            let config = PatchConfig {
                patch_size: 3,
                radius: rs[case % 2],
                max_matches: ks[case % 3],
                distance_threshold: thresholds[case % 3],
                dilation: dils[(case / 2) % 2],
                metric: metrics[(case / 3) % 3],
            };
            let fast = find_matches(&source, &target, &config).map_err(|e| e.to_string())?;
            let slow =
                find_matches_bruteforce(&source, &target, &config).map_err(|e| e.to_string())?;
            for (i, (lf, ls)) in fast.lists().iter().zip(slow.lists()).enumerate() {
                check(lf.len() == ls.len(), || {
                    format!("case {case} pixel {i}: {} vs {} matches", lf.len(), ls.len())
                })?;
                for (mf, msl) in lf.iter().zip(ls) {
                    check(
                        mf.x == msl.x
                            && mf.y == msl.y
                            && (mf.distance - msl.distance).abs() < 1e-12,
                        || format!("case {case} pixel {i}: {mf:?} vs {msl:?}"),
                    )?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_02_gradient_suite() {
    criterion(2, "analytic gradients vs finite differences", Duration::from_secs(120), || {
        const H: f64 = 1e-5;
        const TOL: f64 = 1e-4;
        const ENTRIES: usize = 20;
        const CASES: usize = 10;

        fn projection_safe(values: &Array4<f64>, e: [usize; 4], margin: f64) -> bool {
            let [i, t, y, x] = e;
            let (_, _, h, w) = values.dim();
            let v = values[[i, t, y, x]];
            let axis_ok = |max: f64, runner: f64| {
                if v >= max {
                    v - runner > margin
                } else {
                    max - v > margin
                }
            };
            let col_max = (0..h).map(|yy| values[[i, t, yy, x]]).fold(f64::MIN, f64::max);
            let col_runner = (0..h)
                .filter(|&yy| yy != y)
                .map(|yy| values[[i, t, yy, x]])
                .fold(f64::MIN, f64::max);
            let row_max = (0..w).map(|xx| values[[i, t, y, xx]]).fold(f64::MIN, f64::max);
            let row_runner = (0..w)
                .filter(|&xx| xx != x)
                .map(|xx| values[[i, t, y, xx]])
                .fold(f64::MIN, f64::max);
            axis_ok(col_max, col_runner) && axis_ok(row_max, row_runner)
        }

        fn pick(rng: &mut StdRng, mask: &MaskField, safe: bool) -> Result<Vec<[usize; 4]>, String> {
            let (n, t, h, w) = mask.values().dim();
            let mut entries = Vec::new();
            for _ in 0..10_000 {
                if entries.len() == ENTRIES {
                    break;
                }
                let e = [
                    rng.gen_range(0..n),
                    rng.gen_range(0..t),
                    rng.gen_range(0..h),
                    rng.gen_range(0..w),
                ];
                if entries.contains(&e) {
                    continue;
                }
                if safe && !projection_safe(mask.values(), e, 100.0 * H) {
                    continue;
                }
                entries.push(e);
            }
            check(entries.len() == ENTRIES, || "not enough probe entries".to_string())?;
            Ok(entries)
        }

        fn verify(
            name: &str,
            mask: &MaskField,
            analytic: &Array4<f64>,
            entries: &[[usize; 4]],
            f: impl Fn(&MaskField) -> mfvis_core::Result<f64>,
        ) -> Result<(), String> {
            let numeric =
                finite_diff_gradient(&f, mask, entries, H).map_err(|e| e.to_string())?;
            for (e, num) in entries.iter().zip(numeric) {
                let a = analytic[*e];
                let err = relative_error(a, num);
                check(err < TOL, || {
                    format!("{name} at {e:?}: analytic {a}, numeric {num}, rel err {err}")
                })?;
            }
            Ok(())
        }

        let mut rng = StdRng::seed_from_u64(202);

        // Scalar agreement loss, probed directly.
        for _ in 0..CASES {
            let (a, b) = (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
            let term = consistency_loss(a, b, DEFAULT_CLAMP_EPS);
            let num = (consistency_loss(a + H, b, DEFAULT_CLAMP_EPS).value
                - consistency_loss(a - H, b, DEFAULT_CLAMP_EPS).value)
                / (2.0 * H);
            check(relative_error(term.grad_a, num) < TOL, || {
                format!("consistency at ({a}, {b}): {} vs {num}", term.grad_a)
            })?;
        }

        for case in 0..CASES {
            let tube = random_tube(&mut rng, 2, 2, 7, 6);
            let mask = random_mask(&mut rng, 2, 2, 7, 6);
            let (_, grad) = projection_loss(&mask, &tube).map_err(|e| e.to_string())?;
            let entries = pick(&mut rng, &mask, true)?;
            verify(&format!("projection case {case}"), &mask, &grad, &entries, |m| {
                projection_loss(m, &tube).map(|(v, _)| v)
            })?;
        }

        let topology = EdgeTopology::default();
        for case in 0..CASES {
            let tube = random_tube(&mut rng, 1, 3, 6, 6);
            let edges: Vec<_> = tube
                .frames()
                .iter()
                .map(|f| build_color_edges(f, 0.01, &topology))
                .collect::<mfvis_core::Result<_>>()
                .map_err(|e| e.to_string())?;
            let mask = random_mask(&mut rng, 1, 3, 6, 6);
            let (_, grad) = pairwise_loss(&mask, &edges, DEFAULT_CLAMP_EPS);
            let entries = pick(&mut rng, &mask, false)?;
            verify(&format!("pairwise case {case}"), &mask, &grad, &entries, |m| {
                Ok(pairwise_loss(m, &edges, DEFAULT_CLAMP_EPS).0)
            })?;
        }

        let loose = PatchConfig { distance_threshold: 0.5, ..PatchConfig::default() };
        for case in 0..CASES {
            let tube = random_tube(&mut rng, 2, 3, 6, 6);
            let matches = compute_tube_matches(&tube, &loose, ConnectionScheme::Cyclic)
                .map_err(|e| e.to_string())?;
            let mask = random_mask(&mut rng, 2, 3, 6, 6);
            let (_, grad) =
                tk_loss_with_matches(&mask, &matches, DEFAULT_CLAMP_EPS).map_err(|e| e.to_string())?;
            let entries = pick(&mut rng, &mask, false)?;
            verify(&format!("temporal case {case}"), &mask, &grad, &entries, |m| {
                tk_loss_with_matches(m, &matches, DEFAULT_CLAMP_EPS).map(|(v, _)| v)
            })?;
        }

        let weights = LossWeights::default();
        for case in 0..CASES {
            let tube = random_tube(&mut rng, 2, 2, 6, 6);
            let mask = random_mask(&mut rng, 2, 2, 6, 6);
            let report = total_loss(&mask, &tube, &loose, &weights, ConnectionScheme::Cyclic)
                .map_err(|e| e.to_string())?;
            let entries = pick(&mut rng, &mask, true)?;
            verify(&format!("total case {case}"), &mask, &report.grad, &entries, |m| {
                total_loss(m, &tube, &loose, &weights, ConnectionScheme::Cyclic).map(|r| r.l_seg)
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_03_connection_counts() {
    criterion(3, "tube connection counts", Duration::from_secs(10), || {
        let at5 = |scheme| build_tube_connections(5, scheme).unwrap().len();
        check(at5(ConnectionScheme::Dense) == 10, || "dense at T=5".to_string())?;
        check(at5(ConnectionScheme::Sequential) == 4, || "sequential at T=5".to_string())?;
        check(at5(ConnectionScheme::Cyclic) == 5, || "cyclic at T=5".to_string())?;
        for t in 2..=10usize {
            let dense = build_tube_connections(t, ConnectionScheme::Dense).unwrap().len();
            let seq = build_tube_connections(t, ConnectionScheme::Sequential).unwrap().len();
            let cyc = build_tube_connections(t, ConnectionScheme::Cyclic).unwrap().len();
            check(dense == t * (t - 1) / 2, || format!("dense formula at T={t}"))?;
            check(seq == t - 1, || format!("sequential formula at T={t}"))?;
            check(cyc == t, || format!("cyclic formula at T={t}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_04_consistency_anchors() {
    criterion(4, "agreement loss anchors and symmetry", Duration::from_secs(10), || {
        let eps = DEFAULT_CLAMP_EPS;
        check(consistency_loss(0.0, 0.0, eps).value == 0.0, || "L(0,0)".to_string())?;
        check(consistency_loss(1.0, 1.0, eps).value == 0.0, || "L(1,1)".to_string())?;
        let mid = consistency_loss(0.5, 0.5, eps).value;
        check((mid - std::f64::consts::LN_2).abs() < 1e-9, || {
            format!("L(0.5,0.5) = {mid}, want ln 2")
        })?;
        let mut rng = StdRng::seed_from_u64(404);
        for _ in 0..10_000 {
            let (a, b) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let ab = consistency_loss(a, b, eps).value;
            let ba = consistency_loss(b, a, eps).value;
            check(ab == ba, || format!("asymmetry at ({a}, {b}): {ab} vs {ba}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_05_correspondence_accuracy() {
    criterion(5, "synthetic rigid-motion accuracy", Duration::from_secs(60), || {
        let disk = |cx: f64, cy: f64, r: f64| ShapeKind::Disk(mfvis_core::video::synth::DiskShape {
            cx,
            cy,
            radius: r,
        });
        let rect = |x: f64, y: f64, w: f64, h: f64| {
            ShapeKind::Rectangle(mfvis_core::video::synth::RectShape { x, y, w, h })
        };
        let instance = |shape, velocity, color| InstanceSpec { shape, velocity, color: Some(color) };
        let spec = |instances, occluder, seed| SyntheticSpec {
            width: 64,
            height: 64,
            frames: 5,
            instances,
            noise_sigma: 0.01,
            occluder,
            seed,
            background: [210, 210, 210],
        };

        let suite = [
            spec(vec![instance(disk(20.0, 30.0, 9.0), (2.0, 0.0), [200, 50, 50])], None, 1),
            spec(vec![instance(rect(34.0, 14.0, 16.0, 12.0), (-2.0, 1.0), [50, 90, 220])], None, 2),
            spec(
                vec![instance(
                    ShapeKind::Polygon(mfvis_core::video::synth::PolygonShape {
                        vertices: vec![(20.0, 16.0), (36.0, 22.0), (24.0, 36.0)],
                    }),
                    (1.0, 2.0),
                    [60, 170, 70],
                )],
                None,
                3,
            ),
            spec(
                vec![
                    instance(disk(18.0, 18.0, 8.0), (2.0, -1.0), [220, 170, 60]),
                    instance(disk(44.0, 44.0, 9.0), (-1.0, 2.0), [150, 60, 200]),
                ],
                None,
                4,
            ),
            spec(
                vec![instance(rect(10.0, 26.0, 18.0, 14.0), (2.0, 2.0), [210, 90, 40])],
                Some(BoundingBox::new(30, 24, 44, 44)),
                5,
            ),
        ];

        let config = PatchConfig::default();
        let mut total = 0.0;
        for (i, spec) in suite.iter().enumerate() {
            let tube = generate_synthetic_tube(spec).map_err(|e| format!("tube {i}: {e}"))?;
            let sets = compute_tube_matches(&tube, &config, ConnectionScheme::Cyclic)
                .map_err(|e| e.to_string())?;
            let labels: Vec<Array2<u8>> = (0..tube.n_frames())
                .map(|t| tube.instance_labels(t))
                .collect::<mfvis_core::Result<_>>()
                .map_err(|e| e.to_string())?;
            let accuracy =
                correspondence_accuracy(&sets, &labels).map_err(|e| e.to_string())?;
            total += accuracy;
        }
        let mean = total / suite.len() as f64;
        check(mean >= 0.95, || format!("mean accuracy {mean:.4} below 0.95"))
    });
}

fn mfvis_env(args: &[&str], envs: &[(&str, &str)]) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfvis"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "mfvis {args:?} failed with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn shipped_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn criterion_06_toy_mask_emergence() {
    criterion(6, "mask recovery and ablation ordering", Duration::from_secs(600), || {
        let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        let configs = ["moving_disk.json", "two_rects.json"];
        let mut suite = [0.0f64; 3];
        for name in configs {
            let config = shipped_config(name);
            let config = config.to_str().unwrap();
            let parsed: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(config).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let steps = parsed["train"]["steps"].as_u64().unwrap_or(500);
            check(steps <= 2000, || format!("{name} uses {steps} steps, budget is 2000"))?;

            let tube = tmp.path().join(name).with_extension("tube");
            let tube = tube.to_str().unwrap();
            mfvis_env(&["gen", "--config", config, "--out", tube], &[])?;

            let arms: [(&str, &[&str]); 3] = [
                ("full", &[]),
                ("proj+pair", &["--disable-temp"]),
                ("proj", &["--disable-temp", "--disable-pair"]),
            ];
            for (i, (arm, flags)) in arms.iter().enumerate() {
                let out = tmp.path().join(format!("{name}.{arm}"));
                let mut args = vec![
                    "train", "--tube", tube, "--out", out.to_str().unwrap(), "--config", config,
                ];
                args.extend_from_slice(flags);
                mfvis_env(&args, &[])?;
                let report: serde_json::Value = serde_json::from_str(
                    &std::fs::read_to_string(out.join("iou_report.json"))
                        .map_err(|e| e.to_string())?,
                )
                .map_err(|e| e.to_string())?;
                let mean = report["mean"].as_f64().unwrap();
                if i == 0 {
                    check(mean >= 0.80, || {
                        format!("{name} full-loss IoU {mean:.3} below 0.80")
                    })?;
                }
                suite[i] += mean / configs.len() as f64;
            }
        }
        let (full, pp, proj) = (suite[0], suite[1], suite[2]);
        check(full > pp && pp > proj, || {
            format!("ablation ordering broken: full {full:.3}, proj+pair {pp:.3}, proj {proj:.3}")
        })
    });
}

#[test]
fn criterion_07_hungarian_optimality() {
    criterion(7, "assignment equals permutation minimum", Duration::from_secs(30), || {
        fn brute(costs: &Array2<f64>) -> f64 {
            fn permute(cols: &mut Vec<usize>, k: usize, costs: &Array2<f64>, best: &mut f64) {
                if k == costs.nrows().min(costs.ncols()) {
                    let total: f64 = (0..k).map(|r| costs[[r, cols[r]]]).sum();
                    *best = best.min(total);
                    return;
                }
                for i in k..cols.len() {
                    cols.swap(k, i);
                    permute(cols, k + 1, costs, best);
                    cols.swap(k, i);
                }
            }
            let oriented = if costs.nrows() <= costs.ncols() {
                costs.clone()
            } else {
                costs.t().to_owned()
            };
            let mut cols: Vec<usize> = (0..oriented.ncols()).collect();
            let mut best = f64::INFINITY;
            permute(&mut cols, 0, &oriented, &mut best);
            best
        }

        let mut rng = StdRng::seed_from_u64(707);
        for case in 0..100 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let costs = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(0.0..10.0));
            let assignment = hungarian_assign(&CostMatrix::new(costs.clone()).unwrap())
                .map_err(|e| e.to_string())?;
            let best = brute(&costs);
            check((assignment.total_cost - best).abs() < 1e-9, || {
                format!(
                    "case {case} ({rows}x{cols}): solver {} vs brute force {best}",
                    assignment.total_cost
                )
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_08_set_matching_sampling() {
    criterion(8, "sampled set cost fidelity", Duration::from_secs(60), || {
        let mut rng = StdRng::seed_from_u64(808);
        let random_seq = |rng: &mut StdRng| {
            let frames = (0..3)
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        None
                    } else {
                        let x0 = rng.gen_range(0..30u32);
                        let y0 = rng.gen_range(0..30u32);
                        let x1 = rng.gen_range(x0 + 1..=32);
                        let y1 = rng.gen_range(y0 + 1..=32);
                        Some(BoundingBox::new(x0, y0, x1, y1))
                    }
                })
                .collect();
            BoxMaskSequence::new(32, 32, frames).unwrap()
        };
        for case in 0..50 {
            let a = random_seq(&mut rng);
            let b = random_seq(&mut rng);
            let exact = st_boxmask_cost_exhaustive(&a, &b).map_err(|e| e.to_string())?;
            let sampled = st_boxmask_cost(&a, &b, 4096, case as u64, SamplePolicy::WholeFrame)
                .map_err(|e| e.to_string())?;
            check((sampled - exact).abs() <= 0.05, || {
                format!("case {case}: sampled {sampled:.4} vs exhaustive {exact:.4}")
            })?;
        }

        // Box abstraction: two soft fields with the same binarized support
        // must price identically under a shared seed.
        let boxes = [
            Some(BoundingBox::new(3, 4, 12, 13)),
            Some(BoundingBox::new(5, 5, 14, 15)),
            None,
        ];
        let mut crisp = Array4::zeros((1, 3, 16, 16));
        let mut soft = Array4::zeros((1, 3, 16, 16));
        for (t, b) in boxes.iter().enumerate() {
            for y in 0..16 {
                for x in 0..16 {
                    let inside = b.is_some_and(|b| b.contains(x as u32, y as u32));
                    crisp[[0, t, y, x]] = if inside { 1.0 } else { 0.0 };
                    soft[[0, t, y, x]] = if inside { 0.7 } else { 0.2 };
                }
            }
        }
        let crisp = mask_to_boxmask(&MaskField::new(crisp).unwrap(), 0, 0.5).unwrap();
        let soft = mask_to_boxmask(&MaskField::new(soft).unwrap(), 0, 0.5).unwrap();
        let reference = BoxMaskSequence::new(
            16,
            16,
            vec![Some(BoundingBox::new(2, 2, 13, 13)); 3],
        )
        .unwrap();
        let c_crisp = st_boxmask_cost(&crisp, &reference, 512, 9, SamplePolicy::WholeFrame)
            .map_err(|e| e.to_string())?;
        let c_soft = st_boxmask_cost(&soft, &reference, 512, 9, SamplePolicy::WholeFrame)
            .map_err(|e| e.to_string())?;
        check(c_crisp == c_soft, || {
            format!("box abstraction leaked probabilities: {c_crisp} vs {c_soft}")
        })
    });
}

#[test]
fn criterion_09_defaults_audit() {
    criterion(9, "shipped defaults audit", Duration::from_secs(10), || {
        let text = std::fs::read_to_string(shipped_config("default.json"))
            .map_err(|e| e.to_string())?;
        let parsed: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;

        let patch = &parsed["patch"];
        check(patch["patch_size"] == 3, || "patch_size".to_string())?;
        check(patch["radius"] == 5, || "radius".to_string())?;
        check(patch["max_matches"] == 5, || "max_matches".to_string())?;
        check(patch["distance_threshold"] == 0.05, || "distance_threshold".to_string())?;
        check(patch["dilation"] == 3, || "dilation".to_string())?;
        check(patch["metric"] == "l2", || "metric".to_string())?;
        check(parsed["weights"]["lambda_pair"] == 1.0, || "lambda_pair".to_string())?;
        check(parsed["weights"]["lambda_temp"] == 0.1, || "lambda_temp".to_string())?;
        check(parsed["synthetic"]["frames"] == 5, || "tube length".to_string())?;

        // The config file must mirror the compiled defaults.
        let defaults = PatchConfig::default();
        let from_file: PatchConfig =
            serde_json::from_value(patch.clone()).map_err(|e| e.to_string())?;
        check(from_file == defaults, || "config patch section drifted from compiled defaults".to_string())?;
        let weights = LossWeights::default();
        check(weights.lambda_pair == 1.0 && weights.lambda_temp == 0.1, || {
            "compiled weight defaults".to_string()
        })
    });
}

#[test]
fn criterion_10_determinism_across_threads() {
    criterion(10, "byte-identical runs across thread counts", Duration::from_secs(120), || {
        let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        let config = shipped_config("moving_disk.json");
        let config = config.to_str().unwrap();
        let tube = tmp.path().join("tube");
        let tube = tube.to_str().unwrap();
        mfvis_env(&["gen", "--config", config, "--out", tube], &[])?;

        let compare_dirs = |a: &Path, b: &Path| -> Result<(), String> {
            let mut names: Vec<String> = std::fs::read_dir(a)
                .map_err(|e| e.to_string())?
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect();
            names.sort();
            check(!names.is_empty(), || "no artifacts to compare".to_string())?;
            for name in names {
                let bytes_a = std::fs::read(a.join(&name)).map_err(|e| e.to_string())?;
                let bytes_b = std::fs::read(b.join(&name)).map_err(|e| e.to_string())?;
                check(bytes_a == bytes_b, || format!("{name} differs between runs"))?;
            }
            Ok(())
        };

        let runs = [("1", "a"), ("4", "b"), ("1", "c")];
        for (threads, tag) in runs {
            let m = tmp.path().join(format!("match_{tag}"));
            mfvis_env(
                &["match", "--tube", tube, "--out", m.to_str().unwrap()],
                &[("MFVIS_THREADS", threads)],
            )?;
            let t = tmp.path().join(format!("train_{tag}"));
            mfvis_env(
                &[
                    "train", "--tube", tube, "--out", t.to_str().unwrap(), "--config", config,
                    "--steps", "40",
                ],
                &[("MFVIS_THREADS", threads)],
            )?;
        }
        for tag in ["b", "c"] {
            compare_dirs(&tmp.path().join("match_a"), &tmp.path().join(format!("match_{tag}")))?;
            compare_dirs(&tmp.path().join("train_a"), &tmp.path().join(format!("train_{tag}")))?;
        }
        Ok(())
    });
}
