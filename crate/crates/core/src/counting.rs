//! Directional zone counting. A track is counted once, for the first zone its
//! anchor trajectory enters.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::CountError;
use crate::geometry::{point_in_polygon, trajectory_enters, Anchor, Point, Polygon};
use crate::model::{Track, VehicleClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Northbound,
    Southbound,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Northbound, Direction::Southbound];

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Northbound => "northbound",
            Direction::Southbound => "southbound",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "northbound" => Ok(Direction::Northbound),
            "southbound" => Ok(Direction::Southbound),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZoneRecord", into = "ZoneRecord")]
pub struct Zone {
    pub name: String,
    pub direction: Direction,
    pub polygon: Polygon,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneRecord {
    name: String,
    direction: Direction,
    polygon: Vec<Point>,
}

impl TryFrom<ZoneRecord> for Zone {
    type Error = CountError;

    fn try_from(z: ZoneRecord) -> Result<Self, Self::Error> {
        let polygon = Polygon::new(z.polygon).map_err(|source| CountError::InvalidZone {
            name: z.name.clone(),
            source,
        })?;
        Ok(Zone {
            name: z.name,
            direction: z.direction,
            polygon,
        })
    }
}

impl From<Zone> for ZoneRecord {
    fn from(z: Zone) -> Self {
        ZoneRecord {
            name: z.name,
            direction: z.direction,
            polygon: z.polygon.vertices().to_vec(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZonesFile {
    zones: Vec<ZoneRecord>,
}

/// Rejects zone lists where polygons of opposite directions touch.
pub fn validate_zones(zones: &[Zone]) -> Result<(), CountError> {
    for (i, a) in zones.iter().enumerate() {
        for b in &zones[i + 1..] {
            if a.direction != b.direction && a.polygon.overlaps(&b.polygon) {
                return Err(CountError::OverlappingZones {
                    a: a.name.clone(),
                    b: b.name.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Parses and validates a zones configuration document.
pub fn parse_zones(text: &str) -> Result<Vec<Zone>, CountError> {
    let file: ZonesFile = serde_json::from_str(text).map_err(|e| CountError::Malformed {
        what: "zones file",
        message: e.to_string(),
    })?;
    let zones = file
        .zones
        .into_iter()
        .map(Zone::try_from)
        .collect::<Result<Vec<_>, CountError>>()?;
    validate_zones(&zones)?;
    Ok(zones)
}

pub fn zones_to_json(zones: &[Zone]) -> String {
    let file = ZonesFile {
        zones: zones.iter().cloned().map(ZoneRecord::from).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("zones serialize");
    s.push('\n');
    s
}

/// Which of a track's classes is tallied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassSource {
    #[default]
    Majority,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Count at the first point inside a zone.
    #[default]
    FirstEntry,
    /// Additionally require a later point outside that zone.
    EntryExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountOptions {
    pub anchor: Anchor,
    pub class_source: ClassSource,
    pub mode: CountMode,
    /// Use predicted (coasted) boxes as trajectory points too.
    pub include_predicted: bool,
    /// Tracks with fewer measured boxes are ignored.
    pub min_measured: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            anchor: Anchor::Center,
            class_source: ClassSource::Majority,
            mode: CountMode::FirstEntry,
            include_predicted: false,
            min_measured: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEvent {
    pub track_id: u64,
    pub zone: String,
    pub direction: Direction,
    pub class: VehicleClass,
    pub frame: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountReport {
    counts: BTreeMap<(Direction, VehicleClass), u64>,
    pub events: Vec<CountEvent>,
}

impl CountReport {
    pub fn new() -> Self {
        let mut counts = BTreeMap::new();
        for d in Direction::ALL {
            for c in VehicleClass::ALL {
                counts.insert((d, c), 0);
            }
        }
        Self {
            counts,
            events: Vec::new(),
        }
    }

    pub fn get(&self, direction: Direction, class: VehicleClass) -> u64 {
        self.counts.get(&(direction, class)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, direction: Direction, class: VehicleClass, n: u64) {
        self.counts.insert((direction, class), n);
    }

    pub fn direction_total(&self, direction: Direction) -> u64 {
        VehicleClass::ALL.iter().map(|c| self.get(direction, *c)).sum()
    }

    pub fn total(&self) -> u64 {
        Direction::ALL.iter().map(|d| self.direction_total(*d)).sum()
    }

    pub fn cells(&self) -> impl Iterator<Item = (Direction, VehicleClass, u64)> + '_ {
        Direction::ALL.into_iter().flat_map(move |d| {
            VehicleClass::ALL
                .into_iter()
                .map(move |c| (d, c, self.get(d, c)))
        })
    }

    fn record(&mut self, event: CountEvent) {
        *self.counts.entry((event.direction, event.class)).or_insert(0) += 1;
        self.events.push(event);
    }

    /// `direction,class,count` table with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("direction,class,count\n");
        for (d, c, n) in self.cells() {
            s.push_str(&format!("{d},{c},{n}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, CountError> {
        let malformed = |message: String| CountError::Malformed {
            what: "counts file",
            message,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "direction,class,count" => {}
            other => return Err(malformed(format!("bad header {other:?}"))),
        }
        let mut report = CountReport::new();
        for (i, line) in lines.enumerate() {
            let parts: Vec<&str> = line.trim().split(',').collect();
            let [d, c, n] = parts.as_slice() else {
                return Err(malformed(format!("row {}: expected 3 fields", i + 2)));
            };
            let d: Direction = d.parse().map_err(malformed)?;
            let c: VehicleClass = c.parse().map_err(|e| malformed(format!("{e}")))?;
            let n: u64 = n
                .parse()
                .map_err(|e| malformed(format!("row {}: {e}", i + 2)))?;
            report.set(d, c, n);
        }
        Ok(report)
    }

    /// One JSON object per counting event.
    pub fn write_audit<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            let line = serde_json::to_string(e).expect("event serializes");
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Counts every track at most once, for the zone it enters first. Ties on
/// the entry frame go to the zone listed first.
pub fn count_tracks(
    tracks: &[Track],
    zones: &[Zone],
    options: &CountOptions,
) -> Result<CountReport, CountError> {
    validate_zones(zones)?;
    let mut report = CountReport::new();
    for track in tracks {
        if track.measured_len() < options.min_measured {
            continue;
        }
        let samples: Vec<(u64, Point)> = track
            .boxes
            .iter()
            .filter(|b| options.include_predicted || !b.predicted)
            .map(|b| (b.frame, options.anchor.point(&b.bbox)))
            .collect();
        let points: Vec<Point> = samples.iter().map(|(_, p)| *p).collect();

        let mut best: Option<(u64, &Zone)> = None;
        for zone in zones {
            let Some(idx) = trajectory_enters(&points, &zone.polygon) else {
                continue;
            };
            if options.mode == CountMode::EntryExit
                && !points[idx..]
                    .iter()
                    .any(|p| !point_in_polygon(*p, &zone.polygon))
            {
                continue;
            }
            let frame = samples[idx].0;
            if best.is_none_or(|(f, _)| frame < f) {
                best = Some((frame, zone));
            }
        }

        if let Some((frame, zone)) = best {
            let class = match options.class_source {
                ClassSource::Majority => track.class_majority,
                ClassSource::Last => track.class,
            };
            report.record(CountEvent {
                track_id: track.id,
                zone: zone.name.clone(),
                direction: zone.direction,
                class,
                frame,
            });
        }
    }
    Ok(report)
}

/// `100 * auto / ground_truth`, undefined when the ground truth is zero.
pub fn count_percentage(auto: u64, ground_truth: u64) -> Option<f64> {
    if ground_truth == 0 {
        None
    } else {
        Some(100.0 * auto as f64 / ground_truth as f64)
    }
}
