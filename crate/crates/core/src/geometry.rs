//! Node placement, distances and eight-sector antenna geometry.
//!
//! Sector `k` covers polar angles `[k·45°, (k+1)·45°)` measured counterclockwise
//! from the +x axis. Sector membership is decided with sign and magnitude
//! comparisons only, so exact diagonals and axes land on the documented side
//! of every boundary without trigonometric rounding.

use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SECTOR_COUNT: u8 = 8;

/// Layout re-draw limit when a random placement is not fully connected.
pub const MAX_LAYOUT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorIndex(u8);

impl SectorIndex {
    pub fn new(value: u8) -> Option<Self> {
        (value < SECTOR_COUNT).then_some(SectorIndex(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Sector pointing the opposite way.
    pub fn opposite(self) -> Self {
        SectorIndex((self.0 + SECTOR_COUNT / 2) % SECTOR_COUNT)
    }
}

pub fn distance<S: Scalar>(a: Point<S>, b: Point<S>) -> S {
    (b.x - a.x).hypot(b.y - a.y)
}

/// Sector of the antenna at `origin` that faces `target`.
pub fn sector_of<S: Scalar>(origin: Point<S>, target: Point<S>) -> Result<SectorIndex> {
    let dx = target.x - origin.x;
    let dy = target.y - origin.y;
    let zero = S::zero();
    if dx == zero && dy == zero {
        return Err(Error::CoincidentPoints);
    }
    let (ax, ay) = (dx.abs(), dy.abs());
    let k = if dy >= zero && dx > zero {
        // [0°, 90°)
        if ay < ax {
            0
        } else {
            1
        }
    } else if dy > zero && dx <= zero {
        // [90°, 180°)
        if ax < ay {
            2
        } else {
            3
        }
    } else if dy <= zero && dx < zero {
        // [180°, 270°)
        if ay < ax {
            4
        } else {
            5
        }
    } else {
        // [270°, 360°): dy < 0, dx >= 0
        if ax < ay {
            6
        } else {
            7
        }
    };
    Ok(SectorIndex(k))
}

/// True iff `probe` lies in the wedge `tx` uses to reach `aim` and within `radius`.
pub fn in_beam<S: Scalar>(tx: Point<S>, aim: Point<S>, probe: Point<S>, radius: S) -> bool {
    let (Ok(beam), Ok(probe_sector)) = (sector_of(tx, aim), sector_of(tx, probe)) else {
        return false;
    };
    beam == probe_sector && distance(tx, probe) <= radius
}

/// Static node positions for one run, with cached pairwise distances and sectors.
#[derive(Debug, Clone)]
pub struct NodeLayout<S> {
    positions: Vec<Point<S>>,
    room_width: S,
    room_height: S,
    coverage_radius: S,
    distances: Vec<S>,
    sectors: Vec<u8>,
}

impl<S: Scalar> NodeLayout<S> {
    /// Builds a layout from explicit positions, checking room bounds and full connectivity.
    pub fn new(positions: Vec<Point<S>>, room_width: S, room_height: S, coverage_radius: S) -> Result<Self> {
        check_room(room_width, room_height)?;
        if positions.len() < 2 {
            return Err(Error::TooFewNodes(positions.len()));
        }
        for (node, p) in positions.iter().enumerate() {
            let inside = p.x >= S::zero() && p.x <= room_width && p.y >= S::zero() && p.y <= room_height;
            if !inside {
                return Err(Error::OutsideRoom {
                    node,
                    x: p.x.as_f64(),
                    y: p.y.as_f64(),
                });
            }
        }
        let layout = Self::from_parts(positions, room_width, room_height, coverage_radius);
        if !layout.is_fully_connected() {
            return Err(Error::Disconnected {
                radius: coverage_radius.as_f64(),
                attempts: 1,
            });
        }
        Ok(layout)
    }

    fn from_parts(positions: Vec<Point<S>>, room_width: S, room_height: S, coverage_radius: S) -> Self {
        let n = positions.len();
        let mut distances = vec![S::zero(); n * n];
        let mut sectors = vec![u8::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                distances[i * n + j] = distance(positions[i], positions[j]);
                if let Ok(s) = sector_of(positions[i], positions[j]) {
                    sectors[i * n + j] = s.value();
                }
            }
        }
        NodeLayout {
            positions,
            room_width,
            room_height,
            coverage_radius,
            distances,
            sectors,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point<S>] {
        &self.positions
    }

    pub fn position(&self, node: usize) -> Point<S> {
        self.positions[node]
    }

    pub fn room_width(&self) -> S {
        self.room_width
    }

    pub fn room_height(&self) -> S {
        self.room_height
    }

    pub fn coverage_radius(&self) -> S {
        self.coverage_radius
    }

    pub fn distance(&self, i: usize, j: usize) -> S {
        self.distances[i * self.len() + j]
    }

    /// Sector of node `i` facing node `j`; `None` when the two coincide.
    pub fn sector(&self, i: usize, j: usize) -> Option<SectorIndex> {
        SectorIndex::new(self.sectors[i * self.len() + j])
    }

    /// Node-indexed [`in_beam`]: does `tx` aiming at `aim` illuminate `probe`?
    pub fn beam_covers(&self, tx: usize, aim: usize, probe: usize) -> bool {
        match (self.sector(tx, aim), self.sector(tx, probe)) {
            (Some(beam), Some(s)) => beam == s && self.distance(tx, probe) <= self.coverage_radius,
            _ => false,
        }
    }

    pub fn is_fully_connected(&self) -> bool {
        self.distances.iter().all(|&d| d <= self.coverage_radius)
    }

    /// Mean distance over all unordered node pairs.
    pub fn mean_pair_distance(&self) -> S {
        let n = self.len();
        let mut sum = S::zero();
        let mut pairs = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                sum = sum + self.distance(i, j);
                pairs += 1;
            }
        }
        if pairs == 0 {
            S::zero()
        } else {
            sum / S::from_count(pairs)
        }
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode {
                node,
                count: self.len(),
            })
        }
    }

    /// Writes `node_id,x,y` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node_id", "x", "y"])?;
        for (id, p) in self.positions.iter().enumerate() {
            w.write_record([
                id.to_string(),
                format!("{:.16e}", p.x.as_f64()),
                format!("{:.16e}", p.y.as_f64()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("layout csv", e))?;
        Ok(())
    }

    /// Reads a layout written by [`NodeLayout::write_csv`]. Rows must list node ids `0..N` in order.
    pub fn read_csv<R: Read>(reader: R, room_width: S, room_height: S, coverage_radius: S) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["node_id", "x", "y"] {
            return Err(Error::Invalid(format!(
                "layout csv header must be node_id,x,y, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut positions = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let field = |i: usize, name: &str| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Invalid(format!("layout csv row {}: bad {name}", row + 1)))
            };
            let id = field(0, "node_id")?;
            if id != row as f64 {
                return Err(Error::Invalid(format!(
                    "layout csv row {}: expected node_id {row}, got {id}",
                    row + 1
                )));
            }
            positions.push(Point::new(S::lit(field(1, "x")?), S::lit(field(2, "y")?)));
        }
        Self::new(positions, room_width, room_height, coverage_radius)
    }
}

fn check_room<S: Scalar>(width: S, height: S) -> Result<()> {
    if width > S::zero() && height > S::zero() && width.is_finite() && height.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRoom {
            width: width.as_f64(),
            height: height.as_f64(),
        })
    }
}

/// Draws `count` nodes uniformly over the room, re-drawing disconnected layouts.
pub fn place_nodes<S: Scalar, R: Rng + ?Sized>(
    count: usize,
    room_width: S,
    room_height: S,
    coverage_radius: S,
    rng: &mut R,
) -> Result<NodeLayout<S>> {
    if count < 2 {
        return Err(Error::TooFewNodes(count));
    }
    check_room(room_width, room_height)?;
    let (w, h) = (room_width.as_f64(), room_height.as_f64());
    for _ in 0..MAX_LAYOUT_ATTEMPTS {
        let positions = (0..count)
            .map(|_| {
                let x = S::lit(rng.gen_range(0.0..=w)).min(room_width);
                let y = S::lit(rng.gen_range(0.0..=h)).min(room_height);
                Point::new(x, y)
            })
            .collect();
        let layout = NodeLayout::from_parts(positions, room_width, room_height, coverage_radius);
        if layout.is_fully_connected() {
            return Ok(layout);
        }
    }
    Err(Error::Disconnected {
        radius: coverage_radius.as_f64(),
        attempts: MAX_LAYOUT_ATTEMPTS,
    })
}
