//! End-to-end acceptance checks. Each test prints one PASS or FAIL line.
//!
//! The tests share one lock so that their wall-clock budgets are measured
//! without competing for the CPU.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use common::{assert_dual_constraints, exhaustive_dual, xor};
use flownav::eval::{capture_adjusted_fps, crossval, fps, summarize, ConfusionMatrix};
use flownav::features::{label_from_range, Dataset, Label};
use flownav::flow::{lk_track_pyramids, LkParams, Pyramid, TrackStatus};
use flownav::imgcore::{gaussian3x3, GrayImage};
use flownav::learn::{svm_train_with_report, ClassWeights, Gamma, SvmParams};
use flownav::nav::{
    apply_command, decide_from_means, velocity_components, HalfMeans, SteerDecision, VelocityCommand, WheelDir,
    EVADE_MS,
};
use flownav::pipeline::{Classifier, FeatureExtractor, LearnerConfig, PipelineConfig, TrainedModel};
use flownav::reduce::pca_fit;
use flownav::sim::{
    perturbed_start, record_dataset, run_closed_loop, CameraModel, ClosedLoopConfig, RecordingScript, Scene, Side,
    Termination, EPISODE_GAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line, then fails the test if any check failed.
fn report(name: &str, elapsed: Duration, budget: Duration, failures: Vec<String>) {
    let mut failures = failures;
    if elapsed > budget {
        failures.push(format!("took {elapsed:.1?}, budget {budget:?}"));
    }
    // written past the test harness capture so the verdict shows for passing tests too
    let mut out = std::io::stdout().lock();
    if failures.is_empty() {
        writeln!(out, "PASS {name} ({elapsed:.1?})").unwrap();
    } else {
        writeln!(out, "FAIL {name} ({elapsed:.1?}): {}", failures.join("; ")).unwrap();
        drop(out);
        panic!("{name}: {}", failures.join("; "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

/// The default recorded dataset and the SVM trained on all of it.
struct Trained {
    data: Dataset,
    model: TrainedModel,
    build_time: Duration,
}

fn trained() -> &'static Trained {
    static T: OnceLock<Trained> = OnceLock::new();
    T.get_or_init(|| {
        let t = Instant::now();
        let cfg = PipelineConfig::default();
        let camera = CameraModel::default();
        let extractor = FeatureExtractor::new(&cfg.extraction, camera.width, camera.height).unwrap();
        let data = record_dataset(&RecordingScript::default(), &camera, &extractor, 1).unwrap();
        let model = TrainedModel::fit_dataset(&data, &cfg).unwrap();
        Trained {
            data,
            model,
            build_time: t.elapsed(),
        }
    })
}

#[test]
fn c1_metric_reproduction() {
    let _g = serial();
    let t = Instant::now();
    let folds = [
        (610, 131, 3827, 329),
        (432, 213, 2876, 250),
        (485, 102, 3947, 309),
        (501, 230, 4060, 336),
        (541, 144, 4012, 266),
        (574, 249, 3740, 285),
        (435, 130, 4045, 373),
        (458, 133, 3788, 349),
    ]
    .map(|(tp, fp, tn, fn_)| ConfusionMatrix::new(tp, fp, tn, fn_));
    let s = summarize(&folds);
    let mut failures = vec![];
    let expected = [
        ("precision", s.precision, 75.46, 6.21),
        ("recall", s.recall, 61.71, 4.75),
        ("f_measure", s.f_measure, 68.00, 3.75),
        ("accuracy", s.accuracy, 89.90, 1.36),
    ];
    for (name, got, mean, std) in expected {
        let got = got.unwrap();
        let (m, sd) = (100.0 * got.mean, 100.0 * got.std);
        check(&mut failures, (m - mean).abs() <= 0.01 + 1e-9 && (sd - std).abs() <= 0.01 + 1e-9, || {
            format!("{name} {m:.4} ± {sd:.4}, expected {mean:.2} ± {std:.2}")
        });
    }
    report("C1 metric reproduction", t.elapsed(), Duration::from_secs(1), failures);
}

#[test]
fn c2_throughput_formula() {
    let _g = serial();
    let t = Instant::now();
    let rate = fps(&[50.50, 0.72, 15.97]);
    let adjusted = capture_adjusted_fps(rate, 25.28);
    let mut failures = vec![];
    check(&mut failures, (rate - 14.88).abs() <= 0.01, || format!("fps {rate:.4}"));
    check(&mut failures, (adjusted - 9.4).abs() <= 0.05, || format!("capture-adjusted {adjusted:.4}"));
    report("C2 throughput formula", t.elapsed(), Duration::from_secs(1), failures);
}

/// Smoothed uniform noise, larger than the frame so that shifted crops stay inside.
fn texture(seed: u64, w: usize, h: usize) -> GrayImage<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0));
    gaussian3x3(&gaussian3x3(&noise))
}

fn crop(img: &GrayImage<f64>, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage<f64> {
    GrayImage::from_fn(w, h, |x, y| img.get(x0 + x, y0 + y))
}

#[test]
fn c3_lk_recovers_integer_shifts() {
    let _g = serial();
    let t = Instant::now();
    let (w, h, pad) = (320, 240, 8);
    let params = LkParams::<f64>::default();
    assert_eq!((params.window, params.levels, params.max_iter, params.eps), (31, 3, 10, 0.03));
    // far enough from the border that the window never leaves the frame
    let margin = 40;
    let points: Vec<[f64; 2]> = (margin..=w - margin)
        .step_by(24)
        .flat_map(|x| (margin..=h - margin).step_by(24).map(move |y| [x as f64, y as f64]))
        .collect();
    let (mut good, mut total) = (0usize, 0usize);
    for seed in 0..10 {
        let big = texture(seed, w + 2 * pad, h + 2 * pad);
        let prev = Pyramid::new(&crop(&big, pad, pad, w, h), params.levels);
        for dx in -4i64..=4 {
            for dy in -4i64..=4 {
                // next(x, y) = prev(x - dx, y - dy)
                let next = crop(&big, (pad as i64 - dx) as usize, (pad as i64 - dy) as usize, w, h);
                let flow = lk_track_pyramids(&prev, &Pyramid::new(&next, params.levels), &points, &params).unwrap();
                for (d, status) in flow.displacements.iter().zip(&flow.status) {
                    if *status != TrackStatus::Tracked {
                        continue;
                    }
                    total += 1;
                    if (d[0] - dx as f64).hypot(d[1] - dy as f64) <= 0.25 {
                        good += 1;
                    }
                }
            }
        }
    }
    let rate = good as f64 / total.max(1) as f64;
    let mut failures = vec![];
    check(&mut failures, total > 0 && rate >= 0.95, || format!("{good}/{total} within 0.25 px"));
    report("C3 LK oracle", t.elapsed(), Duration::from_secs(30), failures);
}

#[test]
fn c4_pca_properties() {
    let _g = serial();
    let t = Instant::now();
    let mut failures = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // correlated data: a few latent factors mixed into 12 dimensions plus noise
    let mix: Vec<Vec<f64>> = (0..3).map(|_| (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let samples: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let z: Vec<f64> = (0..3).map(|k| rng.gen_range(-1.0..1.0) * (3 - k) as f64).collect();
            (0..12)
                .map(|j| (0..3).map(|k| z[k] * mix[k][j]).sum::<f64>() + rng.gen_range(-0.05..0.05) + j as f64)
                .collect()
        })
        .collect();
    let model = pca_fit(&samples, 0.9).unwrap();
    let q = model.output_dim();
    for a in 0..q {
        for b in 0..q {
            let dot: f64 = model.components[a].iter().zip(&model.components[b]).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            check(&mut failures, (dot - want).abs() <= 1e-8, || format!("<c{a}, c{b}> = {dot:e}"));
        }
    }
    check(&mut failures, model.explained_ratio() >= 0.9, || {
        format!("explained {}", model.explained_ratio())
    });
    let at_mean = model.project(&model.mean).unwrap();
    check(&mut failures, at_mean.iter().all(|v| v.abs() <= 1e-10), || format!("mean projects to {at_mean:?}"));

    let direction: Vec<f64> = (0..12).map(|j| (j as f64 - 5.5) / 10.0).collect();
    let rank1: Vec<Vec<f64>> = (0..50)
        .map(|i| direction.iter().map(|d| 2.0 + (i as f64 - 25.0) * d).collect())
        .collect();
    let one = pca_fit(&rank1, 0.9).unwrap();
    check(&mut failures, one.output_dim() == 1, || format!("rank-1 data kept {} components", one.output_dim()));
    report("C4 PCA properties", t.elapsed(), Duration::from_secs(5), failures);
}

#[test]
fn c5_svm_matches_the_dual_oracle() {
    let _g = serial();
    let t = Instant::now();
    let mut failures = vec![];
    let (x, y) = xor();
    let params = SvmParams {
        c: 100.0,
        gamma: Gamma::Value(1.0),
        ..SvmParams::default()
    };
    let (model, rep) = svm_train_with_report(&x, &y, &params, &ClassWeights::uniform()).unwrap();
    let oracle = exhaustive_dual(&x, &y, &[100.0; 4], 1.0);
    check(&mut failures, (rep.dual_objective - oracle).abs() <= 1e-3, || {
        format!("dual {} vs oracle {oracle}", rep.dual_objective)
    });
    for (xi, &yi) in x.iter().zip(&y) {
        check(&mut failures, model.predict(xi).unwrap() == yi, || format!("{xi:?} misclassified"));
    }
    assert_dual_constraints(&model, 1e-6);
    let elapsed = t.elapsed();

    // the end-to-end model obeys the same constraints
    let Classifier::Svm { model: svm } = &trained().model.classifier else {
        panic!("default learner is not the SVM");
    };
    assert_dual_constraints(svm, 1e-6);
    report("C5 SVM oracle", elapsed, Duration::from_secs(1), failures);
}

#[test]
fn c6_end_to_end_classification() {
    let _g = serial();
    let t = Instant::now();
    let shared = trained();
    let data = &shared.data;
    let mut failures = vec![];
    let cfg = PipelineConfig::default();
    let svm = crossval(data, &cfg).unwrap();
    let perceptron = crossval(
        data,
        &PipelineConfig {
            learner: LearnerConfig::perceptron(),
            ..cfg
        },
    )
    .unwrap();
    let (pos, neg) = data.class_counts();
    let majority = pos.max(neg) as f64 / data.len() as f64;
    let acc = svm.summary.accuracy.unwrap().mean;
    let f_svm = svm.summary.f_measure.unwrap().mean;
    let f_perceptron = perceptron.summary.f_measure.map_or(0.0, |m| m.mean);
    check(&mut failures, data.spans().len() == 8, || format!("{} recordings", data.spans().len()));
    check(&mut failures, svm.folds.len() == 8, || format!("{} folds", svm.folds.len()));
    check(&mut failures, acc > majority, || format!("accuracy {acc:.4} vs majority {majority:.4}"));
    check(&mut failures, f_svm > 0.5, || format!("F {f_svm:.4}"));
    check(&mut failures, f_perceptron < f_svm, || {
        format!("perceptron F {f_perceptron:.4} vs SVM {f_svm:.4}")
    });
    println!(
        "svm accuracy {:.2} % (majority {:.2} %), F {:.2} %; perceptron F {:.2} %",
        100.0 * acc,
        100.0 * majority,
        100.0 * f_svm,
        100.0 * f_perceptron
    );
    report(
        "C6 end-to-end classification",
        shared.build_time + t.elapsed(),
        Duration::from_secs(600),
        failures,
    );
}

/// Side the robot should evade toward for an obstacle at `(x, y)`, seen from `(0, 0)` facing +x.
fn expected_side(y: f64) -> Side {
    if y >= 0.0 {
        Side::Right
    } else {
        Side::Left
    }
}

#[test]
fn c7_closed_loop_navigation() {
    let _g = serial();
    let model = &trained().model;
    let t = Instant::now();
    let scene = Scene::staggered_circuit();
    let cfg = ClosedLoopConfig::default();
    let extractor = FeatureExtractor::new(&model.config.extraction, cfg.camera.width, cfg.camera.height).unwrap();
    let expected: Vec<Side> = scene.obstacles.iter().map(|o| expected_side(o.y)).collect();
    let last_x = scene.obstacles.iter().map(|o| o.x).fold(f64::MIN, f64::max);
    let mut failures = vec![];
    for seed in 0..5 {
        let start = perturbed_start(Scene::staggered_start(), seed);
        let out = run_closed_loop(&scene, start, model, &extractor, &cfg).unwrap();
        let seq = out.swerve_sequence(EPISODE_GAP);
        let alternating = seq.len() >= 3 && seq.iter().zip(expected.iter().cycle()).all(|(a, b)| a == b);
        let completed = out.termination == Termination::ArenaExit && out.final_pose.x > last_x;
        println!(
            "seed {seed}: {:?}, {} collisions, {} evades, swerves {seq:?}",
            out.termination,
            out.collisions,
            out.evades.len()
        );
        check(&mut failures, out.collisions == 0, || format!("seed {seed}: {} collisions", out.collisions));
        check(&mut failures, completed, || format!("seed {seed}: ended {:?} at {:?}", out.termination, out.final_pose));
        check(&mut failures, out.evades.len() >= 3 && alternating, || {
            format!("seed {seed}: swerves {seq:?}, expected {expected:?}")
        });
    }
    report("C7 closed-loop navigation", t.elapsed(), Duration::from_secs(300), failures);
}

#[test]
fn c8_label_rule_and_policy() {
    let _g = serial();
    let t = Instant::now();
    let mut failures = vec![];
    let cases = [
        (9.999, Label::Negative),
        (10.0, Label::Positive),
        (70.0, Label::Positive),
        (70.001, Label::Negative),
    ];
    for (m, want) in cases {
        check(&mut failures, label_from_range(m, 10.0, 70.0) == want, || format!("label at {m}"));
    }

    let right = SteerDecision::EvadeRight { duration_ms: EVADE_MS };
    let left = SteerDecision::EvadeLeft { duration_ms: EVADE_MS };
    for scale in [1e-3, 1.0, 7.5, 1e4] {
        let more_left = HalfMeans { left: 3.0 * scale, right: 1.0 * scale };
        let more_right = HalfMeans { left: 1.0 * scale, right: 3.0 * scale };
        check(&mut failures, decide_from_means(more_left, Label::Positive) == right, || format!("scale {scale}"));
        check(&mut failures, decide_from_means(more_right, Label::Positive) == left, || format!("scale {scale}"));
        check(&mut failures, decide_from_means(more_right, Label::Negative) == SteerDecision::Straight, || {
            format!("negative at scale {scale}")
        });
    }
    let tie = HalfMeans { left: 2.0, right: 2.0 };
    check(&mut failures, decide_from_means(tie, Label::Positive) == right, || "tie".into());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let cmd = VelocityCommand::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
        let (v_l, v_a) = velocity_components(cmd);
        let err = v_l * v_l + v_a * v_a - cmd.magnitude_pct * cmd.magnitude_pct;
        check(&mut failures, err.abs() <= 1e-9 * cmd.magnitude_pct.powi(2).max(1.0), || {
            format!("{cmd:?}: residual {err:e}")
        });
    }
    // exact on the axis-aligned commands the policy issues
    for theta in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
        let (v_l, v_a) = velocity_components(VelocityCommand::new(60.0, theta).unwrap());
        check(&mut failures, v_l * v_l + v_a * v_a == 3600.0, || format!("theta {theta}"));
    }

    let cruise = apply_command(SteerDecision::Straight.command());
    check(&mut failures, cruise.left_duty == 50.0 && cruise.right_duty == 50.0, || format!("cruise {cruise:?}"));
    check(&mut failures, cruise.left_dir == WheelDir::Forward && cruise.right_dir == WheelDir::Forward, || {
        format!("cruise {cruise:?}")
    });
    check(&mut failures, right.duration_ms() == Some(200) && left.duration_ms() == Some(200), || {
        "evade duration".into()
    });
    let r = apply_command(right.command());
    let l = apply_command(left.command());
    check(&mut failures, r.left_duty == 60.0 && r.right_duty == 0.0, || format!("evade right {r:?}"));
    check(&mut failures, l.left_duty == 0.0 && l.right_duty == 60.0, || format!("evade left {l:?}"));
    check(&mut failures, right.command() == VelocityCommand { magnitude_pct: 60.0, theta: FRAC_PI_2 }, || {
        "evade right command".into()
    });
    check(&mut failures, left.command() == VelocityCommand { magnitude_pct: 60.0, theta: 3.0 * FRAC_PI_2 }, || {
        "evade left command".into()
    });
    report("C8 label rule and policy", t.elapsed(), Duration::from_secs(1), failures);
}
