use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use vcount_core::counting::{
    count_tracks, parse_zones, zones_to_json, ClassSource, CountMode, CountOptions, CountReport,
    Zone,
};
use vcount_core::evaluation::{
    build_comparison, category_heatmaps, comparison_table, comparison_to_csv, run_matrix,
    GridSpec, HeatmapMode, MatrixOptions, MatrixStream, RunCounts, DEFAULT_MATCH_IOU,
};
use vcount_core::geometry::Anchor;
use vcount_core::kalman::KalmanConfig;
use vcount_core::stream::{ingest_bytes, read_tracks, stream_to_bytes, tracks_to_bytes};
use vcount_core::synth::{self, corrupt, generate, NoiseModel, Scenario};
use vcount_core::trackers::{
    suppress_duplicates, FinishRule, TrackerConfig, TrackerKind, NMS_IOU,
};
use vcount_core::Frame;

use crate::error::CliError;
use crate::output::{read_bytes, read_text, Manifest, OutDir};
use crate::{
    AnchorArg, BenchArgs, ClassSourceArg, Cli, Command, Common, CountArgs, CountOpts,
    DefaultsArgs, EvaluateArgs, FinishRuleArg, HeatmapArgs, HeatmapModeArg, MatrixArgs,
    SimulateArgs, TrackArgs, TrackerOpts,
};

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.common.jobs == 0 {
        return Err(CliError::invalid("--jobs must be at least 1"));
    }
    match cli.command {
        Command::Simulate(a) => simulate(&cli.common, a),
        Command::Track(a) => track(&cli.common, a),
        Command::Count(a) => count(&cli.common, a),
        Command::Evaluate(a) => evaluate(&cli.common, a),
        Command::Heatmap(a) => heatmap(&cli.common, a),
        Command::Matrix(a) => matrix(&cli.common, a),
        Command::Bench(a) => bench(&cli.common, a),
        Command::Defaults(a) => defaults(a),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config serializes")
}

/// Everything `simulate` needs; `defaults --preset` prints one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub zones: Vec<Zone>,
    #[serde(default)]
    pub noise: NoiseModel,
}

impl From<synth::Preset> for SimConfig {
    fn from(p: synth::Preset) -> Self {
        Self {
            scenario: p.scenario,
            zones: p.zones,
            noise: p.noise,
        }
    }
}

fn simulate(common: &Common, args: SimulateArgs) -> Result<(), CliError> {
    let mut manifest_inputs = Vec::new();
    let mut cfg: SimConfig = match (&args.preset, &common.config) {
        (Some(_), Some(_)) => return Err(CliError::invalid("use either --preset or --config")),
        (Some(name), None) => synth::preset(name)?.into(),
        (None, Some(path)) => {
            let bytes = read_bytes(path)?;
            let cfg = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            manifest_inputs.push((path.clone(), bytes));
            cfg
        }
        (None, None) => return Err(CliError::invalid("simulate needs --preset or --config")),
    };
    if let Some(name) = &args.noise {
        cfg.noise = NoiseModel::preset(name)?;
    }
    if args.zero_noise {
        cfg.noise = NoiseModel::zero();
    }
    vcount_core::counting::validate_zones(&cfg.zones)?;

    let gt = generate(&cfg.scenario, &cfg.zones, common.seed)?;
    let frames = corrupt(&gt, &cfg.scenario.sizes, &cfg.noise, common.seed)?;
    let gt_frames = corrupt(&gt, &cfg.scenario.sizes, &NoiseModel::zero(), common.seed)?;

    let out = OutDir::create(common.out.as_deref())?;
    let files: Vec<(&str, Vec<u8>)> = vec![
        ("detections.ndjson", stream_to_bytes(&frames)),
        ("gt_detections.ndjson", stream_to_bytes(&gt_frames)),
        ("gt_tracks.ndjson", tracks_to_bytes(&gt.tracks())),
        ("gt_counts.csv", gt.counts.to_csv().into_bytes()),
        ("zones.json", zones_to_json(&cfg.zones).into_bytes()),
    ];
    for (name, bytes) in &files {
        out.write(name, bytes)?;
    }
    let mut m = Manifest::new("simulate", common.seed, to_value(&cfg));
    for (p, b) in &manifest_inputs {
        m.input(p, b);
    }
    m.write(&out, &files.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>())?;
    println!(
        "frames={} objects={} detections={} northbound={} southbound={}",
        frames.len(),
        gt.objects.len(),
        frames.iter().map(|f| f.detections.len()).sum::<usize>(),
        gt.counts.direction_total(vcount_core::counting::Direction::Northbound),
        gt.counts.direction_total(vcount_core::counting::Direction::Southbound),
    );
    Ok(())
}

fn parse_kind(name: &str) -> Result<TrackerKind, CliError> {
    name.parse::<TrackerKind>()
        .map_err(|e| CliError::invalid(e.to_string()))
}

/// Tracker from `--config` or `--tracker`, with flag overrides applied.
fn resolve_tracker(
    opts: &TrackerOpts,
    config: Option<&Path>,
    inputs: &mut Vec<(PathBuf, Vec<u8>)>,
) -> Result<TrackerConfig, CliError> {
    let mut cfg = match config {
        Some(path) => {
            let bytes = read_bytes(path)?;
            let cfg: TrackerConfig = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            inputs.push((path.to_path_buf(), bytes));
            if let Some(name) = &opts.tracker {
                let kind = parse_kind(name)?;
                if kind != cfg.kind() {
                    return Err(CliError::invalid(format!(
                        "--tracker {kind} disagrees with config kind {}",
                        cfg.kind()
                    )));
                }
            }
            cfg
        }
        None => parse_kind(opts.tracker.as_deref().unwrap_or("iou"))?.default_config(),
    };
    if let Some(rule) = opts.finish_rule {
        cfg = cfg.with_finish_rule(match rule {
            FinishRuleArg::Or => FinishRule::Or,
            FinishRuleArg::And => FinishRule::And,
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_nms(nms: Option<f64>) -> Result<Option<f64>, CliError> {
    match nms {
        Some(t) if !(t > 0.0 && t <= 1.0) => {
            Err(CliError::invalid(format!("--nms {t} outside (0, 1]")))
        }
        other => Ok(other),
    }
}

fn apply_nms(frames: Vec<Frame>, nms: Option<f64>) -> Vec<Frame> {
    match nms {
        Some(t) => frames.iter().map(|f| suppress_duplicates(f, t)).collect(),
        None => frames,
    }
}

fn read_stream(path: &Path, inputs: &mut Vec<(PathBuf, Vec<u8>)>) -> Result<Vec<Frame>, CliError> {
    let bytes = read_bytes(path)?;
    let frames = ingest_bytes(&bytes)
        .map_err(|e| CliError::from(e).prefixed(path))?;
    inputs.push((path.to_path_buf(), bytes));
    Ok(frames)
}

impl CliError {
    fn prefixed(self, path: &Path) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            CliError::Runtime(m) => CliError::Runtime(format!("{}: {m}", path.display())),
        }
    }
}

fn finish_manifest(
    command: &'static str,
    common: &Common,
    config: Value,
    inputs: &[(PathBuf, Vec<u8>)],
) -> Manifest {
    let mut m = Manifest::new(command, common.seed, config);
    for (p, b) in inputs {
        m.input(p, b);
    }
    m
}

fn track(common: &Common, args: TrackArgs) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let cfg = resolve_tracker(&args.tracker, common.config.as_deref(), &mut inputs)?;
    let nms = check_nms(args.tracker.nms)?;
    let frames = apply_nms(read_stream(&args.input, &mut inputs)?, nms);
    let out = OutDir::create(common.out.as_deref())?;

    let mut tracker = cfg.build()?;
    let start = Instant::now();
    for f in &frames {
        tracker.step(f)?;
    }
    let tracks = tracker.flush();
    let secs = start.elapsed().as_secs_f64();

    out.write("tracks.ndjson", &tracks_to_bytes(&tracks))?;
    let config = json!({ "tracker": cfg, "nms_iou": nms });
    finish_manifest("track", common, config, &inputs).write(&out, &["tracks.ndjson".into()])?;
    println!(
        "tracker={} frames={} tracks_created={} tracks_finished={} wall_ms={:.3} fps={:.1}",
        cfg.kind().display_name(),
        frames.len(),
        tracker.tracks_created(),
        tracks.len(),
        secs * 1e3,
        frames.len() as f64 / secs.max(1e-9),
    );
    Ok(())
}

fn count_options(opts: &CountOpts, base: CountOptions) -> CountOptions {
    let mut o = base;
    if let Some(a) = opts.anchor {
        o.anchor = match a {
            AnchorArg::Center => Anchor::Center,
            AnchorArg::BottomCenter => Anchor::BottomCenter,
        };
    }
    if let Some(c) = opts.class_source {
        o.class_source = match c {
            ClassSourceArg::Majority => ClassSource::Majority,
            ClassSourceArg::Last => ClassSource::Last,
        };
    }
    if opts.include_predicted {
        o.include_predicted = true;
    }
    if opts.entry_exit {
        o.mode = CountMode::EntryExit;
    }
    o
}

fn write_counts(out: &OutDir, prefix: &str, report: &CountReport) -> Result<Vec<String>, CliError> {
    let counts = format!("{prefix}counts.csv");
    let events = format!("{prefix}count_events.ndjson");
    out.write(&counts, report.to_csv().as_bytes())?;
    let mut audit = Vec::new();
    report
        .write_audit(&mut audit)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    out.write(&events, &audit)?;
    Ok(vec![counts, events])
}

fn count(common: &Common, args: CountArgs) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let base = match &common.config {
        Some(p) => {
            let b = read_bytes(p)?;
            let o: CountOptions = serde_json::from_slice(&b)
                .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            inputs.push((p.clone(), b));
            o
        }
        None => CountOptions::default(),
    };
    let options = count_options(&args.count, base);
    let zones_text = read_text(&args.zones)?;
    let zones = parse_zones(&zones_text)?;
    inputs.push((args.zones.clone(), zones_text.into_bytes()));
    let track_bytes = read_bytes(&args.tracks)?;
    let tracks = read_tracks(BufReader::new(&track_bytes[..]))
        .map_err(|e| CliError::from(e).prefixed(&args.tracks))?;
    inputs.push((args.tracks.clone(), track_bytes));

    let report = count_tracks(&tracks, &zones, &options)?;
    let out = OutDir::create(common.out.as_deref())?;
    let files = write_counts(&out, "", &report)?;
    finish_manifest("count", common, to_value(&options), &inputs).write(&out, &files)?;
    print!("{}", report.to_csv());
    Ok(())
}

fn read_counts(path: &Path, inputs: &mut Vec<(PathBuf, Vec<u8>)>) -> Result<CountReport, CliError> {
    let text = read_text(path)?;
    let r = CountReport::from_csv(&text).map_err(|e| CliError::from(e).prefixed(path))?;
    inputs.push((path.to_path_buf(), text.into_bytes()));
    Ok(r)
}

fn evaluate(common: &Common, args: EvaluateArgs) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let auto = read_counts(&args.auto, &mut inputs)?;
    let gt = read_counts(&args.gt, &mut inputs)?;
    let rows = build_comparison(&[RunCounts::from_reports(&args.condition, &args.label, &auto, &gt)]);
    if let Some(dir) = common.out.as_deref() {
        let out = OutDir::create(Some(dir))?;
        out.write("comparison.csv", comparison_to_csv(&rows).as_bytes())?;
        let config = json!({ "condition": args.condition, "label": args.label });
        finish_manifest("evaluate", common, config, &inputs).write(&out, &["comparison.csv".into()])?;
    }
    print!("{}", comparison_table(&rows));
    Ok(())
}

fn heatmap(common: &Common, args: HeatmapArgs) -> Result<(), CliError> {
    if !(args.iou > 0.0 && args.iou <= 1.0) {
        return Err(CliError::invalid(format!("--iou {} outside (0, 1]", args.iou)));
    }
    for (name, v) in [("width", args.width), ("height", args.height), ("cell", args.cell)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::invalid(format!("--{name} must be positive")));
        }
    }
    let mut inputs = Vec::new();
    let dets = read_stream(&args.input, &mut inputs)?;
    let gt = read_stream(&args.gt, &mut inputs)?;
    let spec = GridSpec::for_image(args.width, args.height, args.cell);
    let mode = match args.mode {
        HeatmapModeArg::Footprint => HeatmapMode::Footprint,
        HeatmapModeArg::Center => HeatmapMode::Center,
    };
    let maps = category_heatmaps(&dets, &gt, spec, args.iou, mode)?;
    let out = OutDir::create(common.out.as_deref())?;
    let mut files = Vec::new();
    for (name, grid) in [
        ("fn", &maps.false_negatives),
        ("fp", &maps.false_positives),
        ("tp", &maps.true_positives),
    ] {
        let csv = format!("{name}.csv");
        let pgm = format!("{name}.pgm");
        out.write(&csv, grid.to_csv().as_bytes())?;
        out.write(&pgm, grid.to_pgm().as_bytes())?;
        println!("{name} mass={}", grid.total());
        files.push(csv);
        files.push(pgm);
    }
    let config = json!({ "grid": spec, "iou_threshold": args.iou, "mode": mode });
    finish_manifest("heatmap", common, config, &inputs).write(&out, &files)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSpec {
    preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamSpec {
    label: String,
    condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detections: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt_counts: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    simulate: Option<SimSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum TrackerEntry {
    Name(String),
    Config(TrackerConfig),
}

/// Matrix manifest: streams from files or the simulator, trackers by name or
/// full configuration. Relative paths resolve against the manifest's folder.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zones: Option<PathBuf>,
    streams: Vec<StreamSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trackers: Option<Vec<TrackerEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<CountOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nms_iou: Option<f64>,
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn matrix(common: &Common, args: MatrixArgs) -> Result<(), CliError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| CliError::invalid("matrix needs --config <manifest>"))?;
    let cfg_bytes = read_bytes(path)?;
    let cfg: MatrixConfig = serde_json::from_slice(&cfg_bytes)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
    let mut inputs = vec![(path.to_path_buf(), cfg_bytes)];

    let zones = match &cfg.zones {
        Some(z) => {
            let p = resolve(z);
            let text = read_text(&p)?;
            let zones = parse_zones(&text).map_err(|e| CliError::from(e).prefixed(&p))?;
            inputs.push((p, text.into_bytes()));
            zones
        }
        None => synth::standard_zones(),
    };

    let trackers: Vec<TrackerConfig> = match &cfg.trackers {
        None => TrackerKind::ALL.iter().map(|k| k.default_config()).collect(),
        Some(list) => list
            .iter()
            .map(|t| match t {
                TrackerEntry::Name(n) => parse_kind(n).map(|k| k.default_config()),
                TrackerEntry::Config(c) => c.validate().map(|_| *c).map_err(CliError::from),
            })
            .collect::<Result<_, _>>()?,
    };

    let mut streams = Vec::with_capacity(cfg.streams.len());
    for s in &cfg.streams {
        let (frames, ground_truth) = match (&s.simulate, &s.detections, &s.gt_counts) {
            (Some(sim), None, None) => {
                let p = synth::preset(&sim.preset)?;
                let noise = match &sim.noise {
                    Some(n) => NoiseModel::preset(n)?,
                    None => p.noise,
                };
                let seed = sim.seed.unwrap_or(common.seed);
                let gt = generate(&p.scenario, &zones, seed)?;
                (corrupt(&gt, &p.scenario.sizes, &noise, seed)?, gt.counts)
            }
            (None, Some(d), Some(g)) => {
                let frames = read_stream(&resolve(d), &mut inputs)?;
                (frames, read_counts(&resolve(g), &mut inputs)?)
            }
            _ => {
                return Err(CliError::invalid(format!(
                    "stream `{}` needs either `simulate` or both `detections` and `gt_counts`",
                    s.label
                )))
            }
        };
        streams.push(MatrixStream {
            label: s.label.clone(),
            condition: s.condition.clone(),
            frames,
            ground_truth,
        });
    }

    let options = MatrixOptions {
        count: count_options(&args.count, cfg.count.unwrap_or_default()),
        nms_iou: check_nms(args.nms.or(cfg.nms_iou))?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let result = pool.install(|| run_matrix(&streams, &trackers, &zones, &options))?;

    let out = OutDir::create(common.out.as_deref())?;
    let mut files = vec!["comparison.csv".to_string(), "comparison.txt".to_string()];
    out.write("comparison.csv", comparison_to_csv(&result.rows).as_bytes())?;
    out.write("comparison.txt", comparison_table(&result.rows).as_bytes())?;
    let n_trackers = trackers.len().max(1);
    for (k, run) in result.runs.iter().enumerate() {
        let dir = format!(
            "runs/{:02}-{}/{:02}-{}/",
            k / n_trackers,
            file_stem(&run.stream),
            k % n_trackers,
            run.tracker.as_str()
        );
        let tracks = format!("{dir}tracks.ndjson");
        out.write(&tracks, &tracks_to_bytes(&run.tracks))?;
        files.push(tracks);
        files.extend(write_counts(&out, &dir, &run.counts)?);
    }
    let config = json!({
        "matrix": cfg,
        "trackers": trackers,
        "count": options.count,
        "nms_iou": options.nms_iou,
        "zones": zones,
    });
    finish_manifest("matrix", common, config, &inputs).write(&out, &files)?;
    print!("{}", comparison_table(&result.rows));
    Ok(())
}

#[derive(Debug, Serialize)]
struct BenchReport {
    tracker: &'static str,
    frames: usize,
    detections_per_frame: f64,
    repeat: u32,
    best_fps: f64,
    mean_fps: f64,
    min_fps: f64,
    pass: bool,
}

fn bench(common: &Common, args: BenchArgs) -> Result<(), CliError> {
    if args.repeat == 0 {
        return Err(CliError::invalid("--repeat must be at least 1"));
    }
    if !(args.min_fps.is_finite() && args.min_fps >= 0.0) {
        return Err(CliError::invalid("--min-fps must be finite and non-negative"));
    }
    let mut inputs = Vec::new();
    let cfg = resolve_tracker(&args.tracker, common.config.as_deref(), &mut inputs)?;
    let nms = check_nms(args.tracker.nms)?;
    let frames = match &args.input {
        Some(p) => read_stream(p, &mut inputs)?,
        None => synth::bench_stream(args.frames, common.seed),
    };
    let frames = apply_nms(frames, nms);
    if frames.is_empty() {
        return Err(CliError::invalid("bench needs at least one frame"));
    }

    let mut rates = Vec::with_capacity(args.repeat as usize);
    for _ in 0..args.repeat {
        let mut tracker = cfg.build()?;
        let start = Instant::now();
        for f in &frames {
            tracker.step(f)?;
        }
        std::hint::black_box(tracker.flush());
        rates.push(frames.len() as f64 / start.elapsed().as_secs_f64().max(1e-9));
    }
    let best = rates.iter().copied().fold(0.0, f64::max);
    let report = BenchReport {
        tracker: cfg.kind().display_name(),
        frames: frames.len(),
        detections_per_frame: frames.iter().map(|f| f.detections.len()).sum::<usize>() as f64
            / frames.len() as f64,
        repeat: args.repeat,
        best_fps: best,
        mean_fps: rates.iter().sum::<f64>() / rates.len() as f64,
        min_fps: args.min_fps,
        pass: best >= args.min_fps,
    };
    println!(
        "tracker={} frames={} dets_per_frame={:.2} best_fps={:.0} mean_fps={:.0} gate={:.0} {}",
        report.tracker,
        report.frames,
        report.detections_per_frame,
        report.best_fps,
        report.mean_fps,
        report.min_fps,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if let Some(dir) = common.out.as_deref() {
        let out = OutDir::create(Some(dir))?;
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        out.write("bench.json", text.as_bytes())?;
        let config = json!({
            "tracker": cfg,
            "nms_iou": nms,
            "frames": args.frames,
            "repeat": args.repeat,
            "min_fps": args.min_fps,
        });
        let mut m = finish_manifest("bench", common, config, &inputs);
        m.measurements = Some(to_value(&report));
        m.write(&out, &["bench.json".into()])?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "throughput {best:.0} fps below the {:.0} fps gate",
            args.min_fps
        )))
    }
}

fn defaults(args: DefaultsArgs) -> Result<(), CliError> {
    let value = match &args.preset {
        Some(name) => to_value(&SimConfig::from(synth::preset(name)?)),
        None => {
            let noise: BTreeMap<&str, NoiseModel> = NoiseModel::PRESETS
                .iter()
                .map(|n| (*n, NoiseModel::preset(n).expect("built-in preset")))
                .collect();
            let trackers: Vec<TrackerConfig> =
                TrackerKind::ALL.iter().map(|k| k.default_config()).collect();
            json!({
                "trackers": trackers,
                "kalman": KalmanConfig::default(),
                "nms_iou": NMS_IOU,
                "count": CountOptions::default(),
                "match_iou": DEFAULT_MATCH_IOU,
                "heatmap": { "width": 1280.0, "height": 720.0, "cell": 32.0, "mode": HeatmapMode::default() },
                "noise": noise,
                "presets": synth::PRESET_NAMES,
                "bench": { "frames": 20_000, "repeat": 5, "min_fps": 50_000.0, "tracker": "iou" },
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    Ok(())
}
