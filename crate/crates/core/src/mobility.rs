//! UE trajectories: a 2-D random walk confined to a roam disc, or a fixed
//! position. One position per interval.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MobilityMode};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn add(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<Point>,
    pub anchor: Point,
    pub roam_radius_m: f64,
}

/// One random-walk step of length `speed_mps * dt_s` in a uniformly drawn
/// direction. A step leaving the roam disc is reflected about the boundary
/// tangent at the exit point.
pub fn random_walk_step<R: Rng + ?Sized>(
    pos: Point,
    speed_mps: f64,
    dt_s: f64,
    anchor: Point,
    roam_radius_m: f64,
    rng: &mut R,
) -> Point {
    let heading = rng.random::<f64>() * TAU;
    let length = speed_mps * dt_s;
    if length == 0.0 {
        return pos;
    }
    let (mut dx, mut dy) = (length * heading.cos(), length * heading.sin());
    let mut cur = pos;

    for _ in 0..16 {
        let next = cur.add(dx, dy);
        if next.distance(anchor) <= roam_radius_m {
            return next;
        }
        // Exit parameter t in (0, 1]: |cur + t d - anchor| = R.
        let (ox, oy) = (cur.x - anchor.x, cur.y - anchor.y);
        let a = dx * dx + dy * dy;
        let b = 2.0 * (ox * dx + oy * dy);
        let c = ox * ox + oy * oy - roam_radius_m * roam_radius_m;
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let t = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
        let exit = cur.add(t * dx, t * dy);
        let (nx, ny) = ((exit.x - anchor.x) / roam_radius_m, (exit.y - anchor.y) / roam_radius_m);
        let (rx, ry) = ((1.0 - t) * dx, (1.0 - t) * dy);
        let dot = rx * nx + ry * ny;
        cur = exit;
        dx = rx - 2.0 * dot * nx;
        dy = ry - 2.0 * dot * ny;
    }
    project_into_disc(cur.add(dx, dy), anchor, roam_radius_m)
}

fn project_into_disc(p: Point, anchor: Point, radius: f64) -> Point {
    let d = p.distance(anchor);
    if d <= radius {
        p
    } else {
        let s = radius / d;
        Point::new(anchor.x + (p.x - anchor.x) * s, anchor.y + (p.y - anchor.y) * s)
    }
}

/// Builds one position per interval. The walk is anchored at the initial UE
/// position; interval 0 uses the initial position itself.
pub fn build_trajectory<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Trajectory {
    let sc = &cfg.scenario;
    let n = sc.interval_count();
    let anchor = sc.ue_initial_position;
    let mut positions = Vec::with_capacity(n);
    let mut pos = anchor;
    for k in 0..n {
        if k > 0 && sc.mobility == MobilityMode::RandomWalk {
            pos = random_walk_step(pos, sc.ue_speed_mps, sc.interval_duration_s, anchor, sc.roam_radius_m, rng);
        }
        positions.push(pos);
    }
    Trajectory {
        positions,
        anchor,
        roam_radius_m: sc.roam_radius_m,
    }
}

impl Trajectory {
    /// CSV with columns `interval,x_m,y_m,distance_bs1_m,distance_bs2_m`.
    pub fn write_csv<W: Write>(&self, bs_positions: [Point; 2], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["interval", "x_m", "y_m", "distance_bs1_m", "distance_bs2_m"])?;
        for (k, p) in self.positions.iter().enumerate() {
            w.serialize((k, p.x, p.y, p.distance(bs_positions[0]), p.distance(bs_positions[1])))?;
        }
        w.flush()?;
        Ok(())
    }
}
