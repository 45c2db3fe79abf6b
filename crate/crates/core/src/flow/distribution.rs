use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::scalar::Scalar;

/// Ring layout parameters. Defaults give 1 + 5x20 = 101 points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub rings: usize,
    pub per_ring: usize,
    /// Ratio between consecutive ring radii (> 1).
    pub growth: f64,
}

impl Default for RingSpec {
    fn default() -> Self {
        Self {
            rings: 5,
            per_ring: 20,
            growth: 2.0,
        }
    }
}

impl RingSpec {
    pub fn build(&self) -> Result<PointDistribution, FlowError> {
        make_ring_distribution(self.rings, self.per_ring, self.growth)
    }
}

/// Points in normalized unit-disc coordinates (y up).
///
/// Order: center, then rings from inner to outer, each ring counter-clockwise
/// starting at angle 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDistribution {
    points: Vec<[f64; 2]>,
}

impl PointDistribution {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self, FlowError> {
        if points.is_empty() {
            return Err(FlowError::InvalidDistribution("no points".into()));
        }
        for p in &points {
            if !p[0].is_finite() || !p[1].is_finite() || p[0].hypot(p[1]) > 1.0 + 1e-9 {
                return Err(FlowError::InvalidDistribution(format!(
                    "point ({}, {}) is outside the unit disc",
                    p[0], p[1]
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `x y` pair per line, shortest round-trip decimal formatting.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for [x, y] in &self.points {
            writeln!(out, "{x} {y}").expect("write to String");
        }
        out
    }

    /// Parses the `x y` table. Blank lines and `#` comments are skipped.
    pub fn from_table(text: &str) -> Result<Self, FlowError> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| FlowError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .ok_or_else(|| err("missing x"))?
                .parse()
                .map_err(|_| err("x is not a number"))?;
            let y: f64 = it
                .next()
                .ok_or_else(|| err("missing y"))?
                .parse()
                .map_err(|_| err("y is not a number"))?;
            if it.next().is_some() {
                return Err(err("expected exactly two columns"));
            }
            points.push([x, y]);
        }
        Self::new(points)
    }
}

pub fn make_ring_distribution(
    rings: usize,
    per_ring: usize,
    growth: f64,
) -> Result<PointDistribution, FlowError> {
    if per_ring == 0 {
        return Err(FlowError::InvalidDistribution(
            "per_ring must be at least 1".into(),
        ));
    }
    if !(growth > 1.0) || !growth.is_finite() {
        return Err(FlowError::InvalidDistribution(format!(
            "growth must be > 1, got {growth}"
        )));
    }
    let mut points = Vec::with_capacity(1 + rings * per_ring);
    points.push([0.0, 0.0]);
    for k in 1..=rings {
        // outermost ring has radius 1, each inner ring shrinks by `growth`
        let radius = growth.powi(k as i32 - rings as i32);
        for j in 0..per_ring {
            let angle = 2.0 * PI * j as f64 / per_ring as f64;
            points.push([radius * angle.cos(), radius * angle.sin()]);
        }
    }
    PointDistribution::new(points)
}

/// Maps the unit disc onto the image: diameter `occupancy * min(w, h)`,
/// centred at `(w/2, h/2)`. Image y grows downward, so normalized y is flipped.
pub fn project_distribution<T: Scalar>(
    dist: &PointDistribution,
    width: usize,
    height: usize,
    occupancy: f64,
) -> Result<Vec<[T; 2]>, FlowError> {
    if !(occupancy > 0.0 && occupancy <= 1.0) {
        return Err(FlowError::InvalidDistribution(format!(
            "occupancy must be in (0, 1], got {occupancy}"
        )));
    }
    let radius = occupancy * width.min(height) as f64 / 2.0;
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    Ok(dist
        .points()
        .iter()
        .map(|&[x, y]| [T::lit(cx + radius * x), T::lit(cy - radius * y)])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_rings() {
        let d = RingSpec::default().build().unwrap();
        assert_eq!(d.len(), 101);
        assert_eq!(d.points()[0], [0.0, 0.0]);
        let radii: Vec<f64> = (0..5).map(|k| {
            let [x, y] = d.points()[1 + 20 * k];
            x.hypot(y)
        }).collect();
        for (r, e) in radii.iter().zip([1.0 / 16.0, 0.125, 0.25, 0.5, 1.0]) {
            assert_abs_diff_eq!(*r, e, epsilon = 1e-15);
        }
        // ring starts at angle 0 and runs counter-clockwise
        let [x1, y1] = d.points()[81];
        let [x2, y2] = d.points()[82];
        assert_eq!((x1, y1), (1.0, 0.0));
        assert!(y2 > 0.0 && x2 > 0.0);
    }

    #[test]
    fn degenerate_rings() {
        let d = make_ring_distribution(0, 20, 2.0).unwrap();
        assert_eq!(d.points(), &[[0.0, 0.0]]);
        let d = make_ring_distribution(1, 4, 2.0).unwrap();
        let expected = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in d.points().iter().zip(expected) {
            assert_abs_diff_eq!(p[0], e[0], epsilon = 1e-15);
            assert_abs_diff_eq!(p[1], e[1], epsilon = 1e-15);
        }
        assert!(make_ring_distribution(5, 0, 2.0).is_err());
        assert!(make_ring_distribution(5, 20, 1.0).is_err());
    }

    #[test]
    fn projection_geometry() {
        let d = RingSpec::default().build().unwrap();
        let px: Vec<[f64; 2]> = project_distribution(&d, 320, 240, 0.8).unwrap();
        assert_eq!(px[0], [160.0, 120.0]);
        assert_abs_diff_eq!(px[81][0], 256.0, epsilon = 1e-12);
        assert_abs_diff_eq!(px[81][1], 120.0, epsilon = 1e-12);

        let full: Vec<[f64; 2]> = project_distribution(&d, 100, 100, 1.0).unwrap();
        let ys = full[81..].iter().map(|p| p[1]);
        let (lo, hi) = ys.fold((f64::MAX, f64::MIN), |(a, b), y| (a.min(y), b.max(y)));
        assert!(lo.abs() < 1.0, "{lo}");
        assert!((hi - 99.0).abs() <= 1.0, "{hi}");
        assert!(project_distribution::<f64>(&d, 10, 10, 0.0).is_err());
        assert!(project_distribution::<f64>(&d, 10, 10, 1.5).is_err());
    }

    #[test]
    fn table_round_trip_is_exact() {
        let d = RingSpec::default().build().unwrap();
        let text = d.to_table();
        assert_eq!(text.lines().count(), 101);
        assert_eq!(PointDistribution::from_table(&text).unwrap(), d);
        assert!(PointDistribution::from_table("0 0\n1 2 3\n").is_err());
        assert!(PointDistribution::from_table("# only a comment\n").is_err());
        assert!(PointDistribution::from_table("2 0\n").is_err());
    }

    #[test]
    fn ordering_is_stable() {
        let a = make_ring_distribution(5, 20, 2.0).unwrap();
        let b = make_ring_distribution(5, 20, 2.0).unwrap();
        assert_eq!(a, b);
    }
}
