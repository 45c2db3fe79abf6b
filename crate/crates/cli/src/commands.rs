use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use flownav::eval::{self, read_confusion_csv, summarize, time_stage, StageTimings};
use flownav::features::{flow_to_feature, Dataset, Label};
use flownav::flow::{Pyramid, RingSpec};
use flownav::imgcore::{pnm, to_grayscale, GrayImage};
use flownav::learn::Gamma;
use flownav::nav::{apply_command, drive_kinematics, half_means, DriveConfig, VelocityCommand};
use flownav::pipeline::{FeatureExtractor, FoldStrategy, LearnerConfig, PipelineConfig, TrainedModel};
use flownav::sim::{
    perturbed_start, record_dataset, record_dataset_in, render, run_closed_loop, RobotPose, Scene,
};

use crate::config::CliConfig;
use crate::error::{CliError, CliResult};
use crate::viz::draw_flow;
use crate::{
    BenchArgs, CrossvalArgs, DataArgs, FlowArgs, GenDatasetArgs, GenPointsArgs, LearnerArgs, LearnerKind,
    MetricsArgs, SimulateArgs, StrategyArg, TrainArgs,
};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::from(e).context(path.display()))
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::from(e).context(path.display()))
}

/// `data.csv` -> `data.manifest.json`.
fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

pub fn gen_points(cfg: &CliConfig, args: &GenPointsArgs) -> CliResult<()> {
    let base = cfg.pipeline.extraction.distribution;
    let spec = RingSpec {
        rings: args.rings.unwrap_or(base.rings),
        per_ring: args.per_ring.map_or(base.per_ring, |n| n as usize),
        growth: args.growth.unwrap_or(base.growth),
    };
    let dist = spec.build().map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(out) = &args.out {
        std::fs::write(out, dist.to_table()).map_err(|e| CliError::from(e).context(out.display()))?;
    }
    println!("{} points", dist.len());
    Ok(())
}

pub fn gen_dataset(cfg: &CliConfig, args: &GenDatasetArgs) -> CliResult<()> {
    let mut script = cfg.script;
    script.laps = args.laps.unwrap_or(script.laps);
    script.recordings = args.recordings.unwrap_or(script.recordings);
    script.stride = args.stride.unwrap_or(script.stride);
    script.side = args.side.unwrap_or(script.side);
    let camera = cfg.camera;
    let extractor = FeatureExtractor::new(&cfg.pipeline.extraction, camera.width, camera.height)?;
    let data = match &args.scene {
        Some(path) => {
            let scene = Scene::load(path).map_err(|e| CliError::from(e).context(path.display()))?;
            record_dataset_in(&scene, &script, &camera, &extractor, args.seed)?
        }
        None => record_dataset(&script, &camera, &extractor, args.seed)?,
    };
    data.write_csv(create(&args.out)?)?;
    let manifest = args.manifest.clone().unwrap_or_else(|| manifest_path(&args.out));
    std::fs::write(&manifest, data.manifest_json()?).map_err(|e| CliError::from(e).context(manifest.display()))?;

    println!("recording  samples  positive");
    for span in data.spans() {
        let pos = data.samples[span.start..span.start + span.len]
            .iter()
            .filter(|s| s.label == Label::Positive)
            .count();
        println!("{:>9} {:>8} {:>9}", span.id, span.len, pos);
    }
    let (pos, neg) = data.class_counts();
    println!("{} samples: {pos} positive, {neg} negative", data.len());
    Ok(())
}

fn load_dataset(args: &DataArgs) -> CliResult<Dataset> {
    let mut data = Dataset::read_csv(open(&args.data)?).map_err(|e| CliError::from(e).context(args.data.display()))?;
    let manifest = match &args.manifest {
        Some(m) => Some(m.clone()),
        None => Some(manifest_path(&args.data)).filter(|m| m.exists()),
    };
    if let Some(m) = manifest {
        let text = std::fs::read_to_string(&m).map_err(|e| CliError::from(e).context(m.display()))?;
        data.apply_manifest(&text).map_err(|e| CliError::from(e).context(m.display()))?;
    }
    Ok(data)
}

fn apply_learner_args(mut cfg: PipelineConfig, args: &LearnerArgs) -> CliResult<PipelineConfig> {
    if let Some(kind) = args.learner {
        let same = matches!(
            (kind, &cfg.learner),
            (LearnerKind::Svm, LearnerConfig::Svm { .. })
                | (LearnerKind::Perceptron, LearnerConfig::Perceptron { .. })
                | (LearnerKind::Svr, LearnerConfig::Svr { .. })
        );
        if !same {
            cfg.learner = match kind {
                LearnerKind::Svm => LearnerConfig::default(),
                LearnerKind::Perceptron => LearnerConfig::perceptron(),
                LearnerKind::Svr => LearnerConfig::svr(),
            };
        }
    }
    match &mut cfg.learner {
        LearnerConfig::Svm { params, balanced } => {
            params.c = args.c.unwrap_or(params.c);
            if let Some(g) = args.gamma {
                params.gamma = Gamma::Value(g);
            }
            *balanced &= !args.unbalanced;
        }
        LearnerConfig::Svr { params } => {
            params.c = args.c.unwrap_or(params.c);
            if let Some(g) = args.gamma {
                params.gamma = Gamma::Value(g);
            }
        }
        LearnerConfig::Perceptron { balanced, .. } => {
            if args.c.is_some() || args.gamma.is_some() {
                return Err(CliError::usage("--c and --gamma do not apply to the perceptron"));
            }
            *balanced &= !args.unbalanced;
        }
    }
    if let Some(p) = args.pca {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CliError::usage(format!("--pca must be in (0, 1], got {p}")));
        }
        cfg.pca_retained = p;
    }
    cfg.normalize &= !args.no_normalize;
    cfg.seed = args.seed;
    Ok(cfg)
}

pub fn train(cfg: &CliConfig, args: &TrainArgs) -> CliResult<()> {
    let pipeline = apply_learner_args(cfg.pipeline, &args.learner)?;
    let data = load_dataset(&args.data)?;
    let model = TrainedModel::fit_dataset(&data, &pipeline)?;
    model.save(&args.out).map_err(|e| CliError::from(e).context(args.out.display()))?;
    let (pos, neg) = data.class_counts();
    println!("trained {} on {} samples ({pos} positive, {neg} negative)", model.kind(), data.len());
    println!(
        "projection: {} -> {} dimensions, {:.2} % of variance",
        model.pca.input_dim(),
        model.pca.output_dim(),
        100.0 * model.pca.explained_ratio()
    );
    if let flownav::pipeline::Classifier::Svm { model: svm } = &model.classifier {
        println!("support vectors: {}  gamma: {:.6}", svm.support_vectors.len(), svm.gamma);
    }
    Ok(())
}

pub fn crossval(cfg: &CliConfig, args: &CrossvalArgs) -> CliResult<()> {
    let base = match &args.model {
        Some(path) => {
            TrainedModel::load(path)
                .map_err(|e| CliError::from(e).context(path.display()))?
                .config
        }
        None => cfg.pipeline,
    };
    let mut pipeline = apply_learner_args(base, &args.learner)?;
    if let Some(k) = args.k {
        pipeline.crossval.k = k;
    }
    if args.grouped {
        pipeline.crossval.strategy = FoldStrategy::Grouped;
    }
    if let Some(s) = args.strategy {
        pipeline.crossval.strategy = match s {
            StrategyArg::Contiguous => FoldStrategy::Contiguous,
            StrategyArg::Grouped => FoldStrategy::Grouped,
            StrategyArg::Shuffled => FoldStrategy::Shuffled,
        };
    }
    let data = load_dataset(&args.data)?;
    let report = eval::crossval(&data, &pipeline)?;
    if let Some(out) = &args.out {
        report.write_csv(create(out)?)?;
    }
    print!("{}", report.to_text());
    let (pos, neg) = data.class_counts();
    println!(
        "majority   {:.2} %",
        100.0 * pos.max(neg) as f64 / data.len().max(1) as f64
    );
    Ok(())
}

fn parse_start(v: &[f64]) -> CliResult<RobotPose> {
    let pose = RobotPose::new(v[0], v[1], v[2]);
    if !pose.is_finite() {
        return Err(CliError::usage("--start must be three finite numbers"));
    }
    Ok(pose)
}

pub fn simulate(cfg: &CliConfig, args: &SimulateArgs) -> CliResult<()> {
    let model = TrainedModel::load(&args.model).map_err(|e| CliError::from(e).context(args.model.display()))?;
    let scene = match &args.scene {
        Some(path) => Scene::load(path).map_err(|e| CliError::from(e).context(path.display()))?,
        None => Scene::staggered_circuit(),
    };
    let base = match &args.start {
        Some(v) => parse_start(v)?,
        None => Scene::staggered_start(),
    };
    let start = perturbed_start(base, args.seed);
    let mut loop_cfg = cfg.closed_loop.clone();
    loop_cfg.max_steps = args.max_steps.unwrap_or(loop_cfg.max_steps);
    if let Some(dir) = &args.frames {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(e).context(dir.display()))?;
        loop_cfg.frame_dir = Some(dir.clone());
    }
    let cam = loop_cfg.camera;
    let extractor = FeatureExtractor::new(&model.config.extraction, cam.width, cam.height)?;
    let out = run_closed_loop(&scene, start, &model, &extractor, &loop_cfg)?;
    if let Some(path) = &args.out {
        out.write_trajectory_csv(create(path)?)?;
    }
    if let Some(path) = &args.decisions {
        out.write_decision_csv(create(path)?)?;
    }
    let p = out.final_pose;
    println!("steps       {}", out.trajectory.len());
    println!("termination {:?}", out.termination);
    println!("collisions  {}", out.collisions);
    println!("evades      {}", out.evades.len());
    let episodes: Vec<String> = out
        .evade_episodes(flownav::sim::EPISODE_GAP)
        .iter()
        .map(|e| format!("{:?}", e.direction()).to_lowercase())
        .collect();
    println!("episodes    {}", episodes.join(" "));
    println!("final pose  x {:.3}  y {:.3}  heading {:.3}", p.x, p.y, p.heading);
    Ok(())
}

fn read_frame(path: &Path) -> CliResult<GrayImage<f64>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let img = match ext.as_str() {
        "pgm" => pnm::read_pgm(path),
        "ppm" => pnm::read_ppm(path).map(|c| to_grayscale(&c)),
        #[cfg(feature = "png")]
        "png" => pnm::read_png(path).map(|c| to_grayscale(&c)),
        _ => return Err(CliError::data(format!("{}: unsupported image type", path.display()))),
    };
    img.map_err(|e| CliError::from(e).context(path.display()))
}

pub fn flow(cfg: &CliConfig, args: &FlowArgs) -> CliResult<()> {
    let first = read_frame(&args.frames[0])?;
    let (w, h) = first.dims();
    let extractor = FeatureExtractor::new(&cfg.pipeline.extraction, w, h)?;
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(e).context(dir.display()))?;
    }
    println!("pair  tracked  mean_px  left_px  right_px");
    let mut prev_frame = first;
    let mut prev = extractor.prepare(&prev_frame);
    for (i, path) in args.frames.iter().enumerate().skip(1) {
        let frame = read_frame(path)?;
        if frame.dims() != (w, h) {
            return Err(CliError::data(format!("{}: frame size differs from the first frame", path.display())));
        }
        let next = extractor.prepare(&frame);
        let field = extractor.flow(&prev, &next)?;
        let tracked = field.tracked_count();
        let mean = field.tracked().map(|(_, d)| d[0].hypot(d[1])).sum::<f64>() / tracked.max(1) as f64;
        let halves = half_means(&field, w);
        println!(
            "{i:>4} {tracked:>8} {mean:>8.3} {:>8.3} {:>9.3}",
            halves.left, halves.right
        );
        if let Some(dir) = &args.out_dir {
            let out = dir.join(format!("flow_{i:05}.ppm"));
            pnm::write_ppm(&out, &draw_flow(&prev_frame, &field, args.scale))
                .map_err(|e| CliError::from(e).context(out.display()))?;
        }
        prev = next;
        prev_frame = frame;
    }
    Ok(())
}

/// Frames from a straight run at the staggered circuit.
fn rendered_frames(cfg: &CliConfig, count: usize) -> CliResult<Vec<GrayImage<f64>>> {
    let scene = Scene::staggered_circuit();
    let drive = DriveConfig::default();
    let mut pose = Scene::staggered_start();
    let mut frames = Vec::with_capacity(count);
    for _ in 0..count {
        frames.push(render(&scene, &pose, &cfg.camera)?);
        pose = drive_kinematics(apply_command(VelocityCommand::CRUISE), pose, 0.1, &drive);
    }
    Ok(frames)
}

pub fn bench(cfg: &CliConfig, args: &BenchArgs) -> CliResult<()> {
    if !(args.capture_fps > 0.0) {
        return Err(CliError::usage("--capture-fps must be positive"));
    }
    let model = TrainedModel::load(&args.model).map_err(|e| CliError::from(e).context(args.model.display()))?;
    let frames = match &args.frames {
        Some(paths) => paths.iter().map(|p| read_frame(p)).collect::<CliResult<Vec<_>>>()?,
        None => rendered_frames(cfg, 8)?,
    };
    let (w, h) = frames[0].dims();
    if frames.iter().any(|f| f.dims() != (w, h)) {
        return Err(CliError::data("frames differ in size"));
    }
    let extractor = FeatureExtractor::new(&model.config.extraction, w, h)?;
    let pyramids: Vec<Pyramid<f64>> = frames.iter().map(|f| extractor.prepare(f)).collect();
    let pairs = frames.len() - 1;

    // per frame: preprocess the new frame and track against the previous one
    let mut i = 0;
    let t_op = time_stage(args.reps, || {
        let k = i % pairs;
        i += 1;
        let next = extractor.prepare(&frames[k + 1]);
        extractor.flow(&pyramids[k], &next)
    });
    let features = (0..pairs)
        .map(|k| Ok(flow_to_feature(&extractor.flow(&pyramids[k], &pyramids[k + 1])?)))
        .collect::<CliResult<Vec<_>>>()?;
    let projected = features
        .iter()
        .map(|f| model.transform(f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut j = 0;
    let t_pca = time_stage(args.reps * 10, || {
        j += 1;
        model.transform(&features[j % pairs])
    });
    let mut m = 0;
    let t_svm = time_stage(args.reps * 10, || {
        m += 1;
        model.classify_projected(&projected[m % pairs])
    });
    let timings = StageTimings {
        t_op: Some(t_op),
        t_pca,
        t_svm,
    };
    let fps = timings.fps();
    let adjusted = eval::capture_adjusted_fps(fps, args.capture_fps);
    println!("frames {w}x{h}, {pairs} pairs, {} reps", args.reps);
    println!("stage      ms");
    println!("t_op   {t_op:>9.3}");
    println!("t_pca  {t_pca:>9.3}");
    println!("t_svm  {t_svm:>9.3}");
    println!("total  {:>9.3}", timings.total_ms());
    println!("fps             {fps:.2}");
    println!("fps at {:.2} Hz capture  {adjusted:.2}", args.capture_fps);
    if let Some(out) = &args.out {
        let mut w = csv::Writer::from_writer(create(out)?);
        let rows = [
            ("t_op_ms", t_op),
            ("t_pca_ms", t_pca),
            ("t_svm_ms", t_svm),
            ("fps", fps),
            ("capture_adjusted_fps", adjusted),
        ];
        w.write_record(["stage", "value"]).map_err(|e| CliError::data(e.to_string()))?;
        for (name, v) in rows {
            w.write_record([name.to_string(), format!("{v:.6}")])
                .map_err(|e| CliError::data(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn metrics(args: &MetricsArgs) -> CliResult<()> {
    let folds = read_confusion_csv(open(&args.confusion)?).map_err(|e| CliError::from(e).context(args.confusion.display()))?;
    let pooled = folds.iter().fold(eval::ConfusionMatrix::default(), |a, c| a.merge(c));
    println!("folds      {}", folds.len());
    print!("{}", summarize(&folds).to_text());
    println!(
        "pooled     tp {}  fp {}  tn {}  fn {}",
        pooled.tp, pooled.fp, pooled.tn, pooled.fn_
    );
    Ok(())
}
