//! Detection-level matching, spatial heat maps and the detector by tracker
//! comparison matrix.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::counting::{count_percentage, count_tracks, CountOptions, CountReport, Direction, Zone};
use crate::error::EvalError;
use crate::geometry::{box_center, iou};
use crate::model::{BoundingBox, Detection, Frame, Track};
use crate::synth::GroundTruth;
use crate::trackers::{run_tracker, suppress_duplicates, TrackerConfig, TrackerKind};

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

/// Optimal one-to-one pairing of `a` and `b` on `1 - IOU`. Pairs overlapping
/// less than `threshold` are never matched; an overlap equal to it is.
pub fn match_boxes(a: &[BoundingBox], b: &[BoundingBox], threshold: f64) -> Vec<(usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut costs = Vec::with_capacity(a.len() * b.len());
    let mut gated = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let o = iou(x, y);
            costs.push(1.0 - o);
            gated.push(o < threshold);
        }
    }
    let m = CostMatrix::new(a.len(), b.len(), costs, gated).expect("costs lie in [0, 1]");
    solve_assignment(&m)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub true_positives: Vec<(Detection, BoundingBox)>,
    pub false_positives: Vec<Detection>,
    pub false_negatives: Vec<BoundingBox>,
}

/// Splits one frame into TP pairs, unmatched detections (FP) and unmatched
/// ground truth (FN). `iou_threshold` should lie in (0, 1].
pub fn match_detections(dets: &[Detection], gt: &[BoundingBox], iou_threshold: f64) -> MatchResult {
    let boxes: Vec<BoundingBox> = dets.iter().map(|d| d.bbox).collect();
    let pairs = match_boxes(&boxes, gt, iou_threshold);
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut out = MatchResult::default();
    for &(d, g) in &pairs {
        det_used[d] = true;
        gt_used[g] = true;
        out.true_positives.push((dets[d].clone(), gt[g]));
    }
    out.false_positives = dets
        .iter()
        .zip(&det_used)
        .filter(|(_, u)| !**u)
        .map(|(d, _)| d.clone())
        .collect();
    out.false_negatives = gt
        .iter()
        .zip(&gt_used)
        .filter(|(_, u)| !**u)
        .map(|(g, _)| *g)
        .collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatmapMode {
    /// Each box adds its overlap area with every cell.
    #[default]
    Footprint,
    /// Each box adds one unit to the cell holding its center.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
    /// Cell edge length in pixels.
    pub cell: f64,
}

impl GridSpec {
    /// Smallest grid of `cell`-sized squares covering the image.
    pub fn for_image(width: f64, height: f64, cell: f64) -> Self {
        Self {
            cols: (width / cell).ceil() as usize,
            rows: (height / cell).ceil() as usize,
            cell,
        }
    }
}

/// Per-cell accumulator over an image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    cols: usize,
    rows: usize,
    cell: f64,
    cells: Vec<f64>,
}

impl HeatmapGrid {
    pub fn new(spec: GridSpec) -> Result<Self, EvalError> {
        if spec.cols == 0 || spec.rows == 0 {
            return Err(EvalError::Grid(format!("{}x{} cells", spec.cols, spec.rows)));
        }
        if !(spec.cell.is_finite() && spec.cell > 0.0) {
            return Err(EvalError::Grid(format!("cell size {}", spec.cell)));
        }
        Ok(Self {
            cols: spec.cols,
            rows: spec.rows,
            cell: spec.cell,
            cells: vec![0.0; spec.cols * spec.rows],
        })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            cols: self.cols,
            rows: self.rows,
            cell: self.cell,
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    /// Adds the overlapped area of `b` to every cell, in cell-area units.
    pub fn add_footprint(&mut self, b: &BoundingBox) {
        let (w, h) = (self.cols as f64 * self.cell, self.rows as f64 * self.cell);
        let (x0, y0) = (b.x_min().max(0.0), b.y_min().max(0.0));
        let (x1, y1) = (b.x_max().min(w), b.y_max().min(h));
        if x1 <= x0 || y1 <= y0 {
            return;
        }
        let c0 = (x0 / self.cell).floor() as usize;
        let c1 = ((x1 / self.cell).ceil() as usize).min(self.cols);
        let r0 = (y0 / self.cell).floor() as usize;
        let r1 = ((y1 / self.cell).ceil() as usize).min(self.rows);
        let unit = self.cell * self.cell;
        for r in r0..r1 {
            let cy0 = r as f64 * self.cell;
            let oy = y1.min(cy0 + self.cell) - y0.max(cy0);
            if oy <= 0.0 {
                continue;
            }
            for c in c0..c1 {
                let cx0 = c as f64 * self.cell;
                let ox = x1.min(cx0 + self.cell) - x0.max(cx0);
                if ox > 0.0 {
                    self.cells[r * self.cols + c] += ox * oy / unit;
                }
            }
        }
    }

    /// Adds one unit to the cell containing the box center, if any.
    pub fn add_center(&mut self, b: &BoundingBox) {
        let p = box_center(b);
        if p.x < 0.0 || p.y < 0.0 {
            return;
        }
        let (c, r) = ((p.x / self.cell) as usize, (p.y / self.cell) as usize);
        if c < self.cols && r < self.rows {
            self.cells[r * self.cols + c] += 1.0;
        }
    }

    pub fn add(&mut self, b: &BoundingBox, mode: HeatmapMode) {
        match mode {
            HeatmapMode::Footprint => self.add_footprint(b),
            HeatmapMode::Center => self.add_center(b),
        }
    }

    /// Raw accumulator, one comma-separated line per grid row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.cells.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// Plain graymap scaled so the hottest cell is white.
    pub fn to_pgm(&self) -> String {
        let max = self.max();
        let mut s = format!("P2\n{} {}\n255\n", self.cols, self.rows);
        for row in self.cells.chunks(self.cols) {
            let line: Vec<String> = row
                .iter()
                .map(|v| {
                    let g = if max > 0.0 { (v / max * 255.0).round() } else { 0.0 };
                    (g as u32).to_string()
                })
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Returns `grid` with `boxes` footprints added.
pub fn accumulate_heatmap(mut grid: HeatmapGrid, boxes: &[BoundingBox]) -> HeatmapGrid {
    for b in boxes {
        grid.add_footprint(b);
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryHeatmaps {
    pub false_negatives: HeatmapGrid,
    pub false_positives: HeatmapGrid,
    pub true_positives: HeatmapGrid,
}

/// Matches every frame of `dets` against the frame with the same index in
/// `gt` and accumulates each category. True positives use the detection box.
pub fn category_heatmaps(
    dets: &[Frame],
    gt: &[Frame],
    spec: GridSpec,
    iou_threshold: f64,
    mode: HeatmapMode,
) -> Result<CategoryHeatmaps, EvalError> {
    let empty = HeatmapGrid::new(spec)?;
    let mut out = CategoryHeatmaps {
        false_negatives: empty.clone(),
        false_positives: empty.clone(),
        true_positives: empty,
    };
    let mut by_index: BTreeMap<u64, (&[Detection], Vec<BoundingBox>)> = BTreeMap::new();
    for f in dets {
        by_index.entry(f.index).or_insert((&[], Vec::new())).0 = &f.detections;
    }
    for f in gt {
        by_index.entry(f.index).or_insert((&[], Vec::new())).1 =
            f.detections.iter().map(|d| d.bbox).collect();
    }
    for (d, g) in by_index.values() {
        let m = match_detections(d, g, iou_threshold);
        for (det, _) in &m.true_positives {
            out.true_positives.add(&det.bbox, mode);
        }
        for det in &m.false_positives {
            out.false_positives.add(&det.bbox, mode);
        }
        for b in &m.false_negatives {
            out.false_negatives.add(b, mode);
        }
    }
    Ok(out)
}

/// Counts of one run against its ground truth, per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCounts {
    pub condition: String,
    pub combination: String,
    /// Northbound, southbound.
    pub auto: [u64; 2],
    pub ground_truth: [u64; 2],
}

impl RunCounts {
    pub fn from_reports(
        condition: &str,
        combination: &str,
        auto: &CountReport,
        ground_truth: &CountReport,
    ) -> Self {
        let per_dir = |r: &CountReport| Direction::ALL.map(|d| r.direction_total(d));
        Self {
            condition: condition.to_string(),
            combination: combination.to_string(),
            auto: per_dir(auto),
            ground_truth: per_dir(ground_truth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub condition: String,
    pub combination: String,
    pub northbound_pct: Option<f64>,
    pub southbound_pct: Option<f64>,
}

pub const UNDEFINED_PCT: &str = "NA";

pub fn format_percentage(p: Option<f64>) -> String {
    match p {
        // Debug keeps a trailing `.0` on whole numbers
        Some(v) => format!("{v:?}"),
        None => UNDEFINED_PCT.to_string(),
    }
}

fn parse_percentage(s: &str) -> Result<Option<f64>, EvalError> {
    if s == UNDEFINED_PCT {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| EvalError::Table(format!("percentage `{s}`: {e}")))
}

impl ComparisonRow {
    pub fn table_line(&self) -> String {
        format!(
            "{} | {} | {} | {}",
            self.condition,
            self.combination,
            format_percentage(self.northbound_pct),
            format_percentage(self.southbound_pct)
        )
    }
}

/// One row per run; rows are grouped by condition (in order of first
/// appearance) and otherwise keep input order.
pub fn build_comparison(runs: &[RunCounts]) -> Vec<ComparisonRow> {
    let mut conditions: Vec<&str> = Vec::new();
    for r in runs {
        if !conditions.contains(&r.condition.as_str()) {
            conditions.push(&r.condition);
        }
    }
    conditions
        .iter()
        .flat_map(|c| runs.iter().filter(move |r| r.condition == *c))
        .map(|r| ComparisonRow {
            condition: r.condition.clone(),
            combination: r.combination.clone(),
            northbound_pct: count_percentage(r.auto[0], r.ground_truth[0]),
            southbound_pct: count_percentage(r.auto[1], r.ground_truth[1]),
        })
        .collect()
}

pub const COMPARISON_HEADER: [&str; 4] = ["condition", "combination", "northbound_pct", "southbound_pct"];

pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARISON_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.condition.as_str(),
            r.combination.as_str(),
            &format_percentage(r.northbound_pct),
            &format_percentage(r.southbound_pct),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 input")
}

pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>, EvalError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| EvalError::Table(e.to_string()))?;
    if header.iter().ne(COMPARISON_HEADER) {
        return Err(EvalError::Table(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| EvalError::Table(e.to_string()))?;
            Ok(ComparisonRow {
                condition: rec[0].to_string(),
                combination: rec[1].to_string(),
                northbound_pct: parse_percentage(&rec[2])?,
                southbound_pct: parse_percentage(&rec[3])?,
            })
        })
        .collect()
}

/// Human-readable rendering in the layout of a results table.
pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(
        "Condition | Combination | Northbound Count Percentage | Southbound Count Percentage\n",
    );
    for r in rows {
        s.push_str(&r.table_line());
        s.push('\n');
    }
    s
}

/// How consistently tracks follow ground-truth identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IdentityAudit {
    pub identities: usize,
    /// Identities followed by exactly one track that followed nothing else.
    pub preserved: usize,
}

impl IdentityAudit {
    pub fn rate(&self) -> Option<f64> {
        (self.identities > 0).then(|| self.preserved as f64 / self.identities as f64)
    }
}

/// Matches measured track boxes to ground truth frame by frame and checks
/// which identities kept a single, exclusive track id.
pub fn identity_audit(tracks: &[Track], gt: &GroundTruth, iou_threshold: f64) -> IdentityAudit {
    let mut by_frame: BTreeMap<u64, Vec<(u64, BoundingBox)>> = BTreeMap::new();
    for t in tracks {
        for b in t.measured() {
            by_frame.entry(b.frame).or_default().push((t.id, b.bbox));
        }
    }
    let mut gt_to_tracks: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    let mut track_to_gt: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for (frame, g) in gt.frame_boxes().iter().enumerate() {
        let Some(t) = by_frame.get(&(frame as u64)) else {
            continue;
        };
        let gb: Vec<BoundingBox> = g.iter().map(|(_, b)| *b).collect();
        let tb: Vec<BoundingBox> = t.iter().map(|(_, b)| *b).collect();
        for (i, j) in match_boxes(&gb, &tb, iou_threshold) {
            gt_to_tracks.entry(g[i].0).or_default().insert(t[j].0);
            track_to_gt.entry(t[j].0).or_default().insert(g[i].0);
        }
    }
    let identities = gt.objects.iter().filter(|o| !o.boxes.is_empty()).count();
    let preserved = gt_to_tracks
        .values()
        .filter(|ts| ts.len() == 1 && track_to_gt[ts.first().unwrap()].len() == 1)
        .count();
    IdentityAudit {
        identities,
        preserved,
    }
}

/// A labelled detection stream with its ground-truth counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixStream {
    pub label: String,
    pub condition: String,
    pub frames: Vec<Frame>,
    pub ground_truth: CountReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MatrixOptions {
    pub count: CountOptions,
    /// Duplicate suppression before tracking.
    pub nms_iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRun {
    pub stream: String,
    pub condition: String,
    pub tracker: TrackerKind,
    pub combination: String,
    pub tracks: Vec<Track>,
    pub counts: CountReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixResult {
    pub rows: Vec<ComparisonRow>,
    pub runs: Vec<MatrixRun>,
}

pub fn combination_label(stream: &str, tracker: TrackerKind) -> String {
    format!("{stream} and {}", tracker.display_name())
}

/// Tracks, counts and scores every stream with every tracker. Runs execute
/// on the current rayon pool; results keep stream-major input order.
pub fn run_matrix(
    streams: &[MatrixStream],
    trackers: &[TrackerConfig],
    zones: &[Zone],
    options: &MatrixOptions,
) -> Result<MatrixResult, EvalError> {
    crate::counting::validate_zones(zones)?;
    let prepared: Vec<Vec<Frame>> = streams
        .par_iter()
        .map(|s| match options.nms_iou {
            Some(t) => s.frames.iter().map(|f| suppress_duplicates(f, t)).collect(),
            None => s.frames.clone(),
        })
        .collect();
    let jobs: Vec<(usize, &TrackerConfig)> = (0..streams.len())
        .flat_map(|i| trackers.iter().map(move |t| (i, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, config)| {
            let s = &streams[i];
            let tracks = run_tracker(config, &prepared[i]).map_err(|source| EvalError::Track {
                stream: s.label.clone(),
                tracker: config.kind().to_string(),
                source,
            })?;
            let counts = count_tracks(&tracks, zones, &options.count)?;
            Ok(MatrixRun {
                stream: s.label.clone(),
                condition: s.condition.clone(),
                tracker: config.kind(),
                combination: combination_label(&s.label, config.kind()),
                tracks,
                counts,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let summary: Vec<RunCounts> = runs
        .iter()
        .zip(&jobs)
        .map(|(r, (i, _))| {
            RunCounts::from_reports(&r.condition, &r.combination, &r.counts, &streams[*i].ground_truth)
        })
        .collect();
    Ok(MatrixResult {
        rows: build_comparison(&summary),
        runs,
    })
}
