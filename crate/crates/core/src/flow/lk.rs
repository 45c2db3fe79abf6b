use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::imgcore::{downsample2x, GrayImage};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tracked,
    Lost,
}

/// Per-point displacements between two frames.
///
/// `points` are positions in the first frame; lost points always carry a
/// zero displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T = f64> {
    pub points: Vec<[T; 2]>,
    pub displacements: Vec<[T; 2]>,
    pub status: Vec<TrackStatus>,
}

impl<T: Scalar> FlowField<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tracked_count(&self) -> usize {
        self.status
            .iter()
            .filter(|s| **s == TrackStatus::Tracked)
            .count()
    }

    /// `(point, displacement)` for tracked points only.
    pub fn tracked(&self) -> impl Iterator<Item = ([T; 2], [T; 2])> + '_ {
        self.points
            .iter()
            .zip(&self.displacements)
            .zip(&self.status)
            .filter(|(_, s)| **s == TrackStatus::Tracked)
            .map(|((p, d), _)| (*p, *d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LkParams<T = f64> {
    /// Odd window side in pixels.
    pub window: usize,
    pub max_iter: usize,
    /// Stop refining once an update is shorter than this (pixels).
    pub eps: T,
    /// Pyramid depth including the full-resolution level.
    pub levels: usize,
    /// Minimum eigenvalue of the normal matrix, per window pixel.
    pub min_eig: T,
}

impl<T: Scalar> Default for LkParams<T> {
    fn default() -> Self {
        Self {
            window: 31,
            max_iter: 10,
            eps: T::lit(0.03),
            levels: 3,
            min_eig: T::lit(1e-4),
        }
    }
}

impl<T: Scalar> LkParams<T> {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.window < 3 || self.window % 2 == 0 {
            return Err(FlowError::InvalidParams(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if self.levels == 0 {
            return Err(FlowError::InvalidParams("levels must be >= 1".into()));
        }
        if !(self.eps > T::zero()) {
            return Err(FlowError::InvalidParams("eps must be > 0".into()));
        }
        if !(self.min_eig >= T::zero()) {
            return Err(FlowError::InvalidParams("min_eig must be >= 0".into()));
        }
        Ok(())
    }
}

struct Level<T> {
    image: GrayImage<T>,
    grad_x: GrayImage<T>,
    grad_y: GrayImage<T>,
}

/// Image pyramid with central-difference gradients per level.
///
/// Level 0 is the input; each further level comes from [`downsample2x`].
/// Construction stops early once a level would drop below 2x2.
pub struct Pyramid<T = f64> {
    levels: Vec<Level<T>>,
}

impl<T: Scalar> Pyramid<T> {
    pub fn new(image: &GrayImage<T>, levels: usize) -> Self {
        let mut out: Vec<Level<T>> = Vec::with_capacity(levels.max(1));
        let mut current = image.clone();
        loop {
            let (gx, gy) = central_gradients(&current);
            let next = if out.len() + 1 < levels {
                downsample2x(&current).ok()
            } else {
                None
            };
            out.push(Level {
                image: current,
                grad_x: gx,
                grad_y: gy,
            });
            match next {
                Some(img) => current = img,
                None => break,
            }
        }
        Self { levels: out }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.levels[0].image.dims()
    }

    pub fn level(&self, l: usize) -> &GrayImage<T> {
        &self.levels[l].image
    }
}

fn central_gradients<T: Scalar>(img: &GrayImage<T>) -> (GrayImage<T>, GrayImage<T>) {
    let half = T::lit(0.5);
    let (w, h) = img.dims();
    let gx = GrayImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        half * (img.get_clamped(x + 1, y) - img.get_clamped(x - 1, y))
    });
    let gy = GrayImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        half * (img.get_clamped(x, y + 1) - img.get_clamped(x, y - 1))
    });
    (gx, gy)
}

/// Bilinear samples on the `(2*half+1)^2` grid centred at `(cx, cy)`.
/// All grid points share the same fractional offset, so weights are computed once.
fn sample_window<T: Scalar>(img: &GrayImage<T>, cx: T, cy: T, half: usize, out: &mut Vec<T>) {
    out.clear();
    let one = T::one();
    let (fx, fy) = (cx.floor(), cy.floor());
    let (ax, ay) = (cx - fx, cy - fy);
    let (w00, w10, w01, w11) = (
        (one - ax) * (one - ay),
        ax * (one - ay),
        (one - ax) * ay,
        ax * ay,
    );
    let x0 = fx.to_isize().unwrap_or(isize::MIN / 4);
    let y0 = fy.to_isize().unwrap_or(isize::MIN / 4);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let hw = half as isize;
    let data = img.data();
    let inside = x0 - hw >= 0 && x0 + hw + 1 < w && y0 - hw >= 0 && y0 + hw + 1 < h;
    for dy in -hw..=hw {
        let y = y0 + dy;
        for dx in -hw..=hw {
            let x = x0 + dx;
            let (p00, p10, p01, p11) = if inside {
                let i = (y * w + x) as usize;
                let wu = w as usize;
                (data[i], data[i + 1], data[i + wu], data[i + wu + 1])
            } else {
                (
                    img.get_clamped(x, y),
                    img.get_clamped(x + 1, y),
                    img.get_clamped(x, y + 1),
                    img.get_clamped(x + 1, y + 1),
                )
            };
            out.push(w00 * p00 + w10 * p10 + w01 * p01 + w11 * p11);
        }
    }
}

fn window_outside<T: Scalar>(cx: T, cy: T, half: usize, w: usize, h: usize) -> bool {
    let hw = T::from_usize_lossy(half);
    let (wf, hf) = (T::from_usize_lossy(w - 1), T::from_usize_lossy(h - 1));
    !(cx + hw >= T::zero() && cx - hw <= wf && cy + hw >= T::zero() && cy - hw <= hf)
}

#[derive(Default)]
struct Scratch<T> {
    i: Vec<T>,
    ix: Vec<T>,
    iy: Vec<T>,
    j: Vec<T>,
}

fn track_point<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    p: [T; 2],
    params: &LkParams<T>,
    s: &mut Scratch<T>,
) -> Option<[T; 2]> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return None;
    }
    let depth = params.levels.min(prev.depth()).min(next.depth());
    let half = params.window / 2;
    let area = T::from_usize_lossy(params.window * params.window);
    let two = T::lit(2.0);
    let eps2 = params.eps * params.eps;
    let mut guess = [T::zero(); 2];

    for l in (0..depth).rev() {
        if l + 1 < depth {
            guess = [guess[0] * two, guess[1] * two];
        }
        let scale = T::one() / T::from_usize_lossy(1usize << l);
        let (cx, cy) = (p[0] * scale, p[1] * scale);
        let lvl = &prev.levels[l];
        let target = &next.levels[l].image;
        let (w, h) = lvl.image.dims();
        if window_outside(cx, cy, half, w, h) {
            if l == 0 {
                return None;
            }
            continue;
        }
        sample_window(&lvl.image, cx, cy, half, &mut s.i);
        sample_window(&lvl.grad_x, cx, cy, half, &mut s.ix);
        sample_window(&lvl.grad_y, cx, cy, half, &mut s.iy);
        let (mut gxx, mut gxy, mut gyy) = (T::zero(), T::zero(), T::zero());
        for (&gx, &gy) in s.ix.iter().zip(&s.iy) {
            gxx += gx * gx;
            gxy += gx * gy;
            gyy += gy * gy;
        }
        let half_tr = (gxx + gyy) * T::lit(0.5);
        let half_diff = (gxx - gyy) * T::lit(0.5);
        let min_eig = half_tr - (half_diff * half_diff + gxy * gxy).sqrt();
        let det = gxx * gyy - gxy * gxy;
        if !(min_eig / area >= params.min_eig) || !(det > T::zero()) {
            if l == 0 {
                return None;
            }
            continue;
        }

        let mut d = guess;
        for _ in 0..params.max_iter {
            let (qx, qy) = (cx + d[0], cy + d[1]);
            if window_outside(qx, qy, half, w, h) {
                if l == 0 {
                    return None;
                }
                break;
            }
            sample_window(target, qx, qy, half, &mut s.j);
            let (mut bx, mut by) = (T::zero(), T::zero());
            for k in 0..s.j.len() {
                let diff = s.i[k] - s.j[k];
                bx += diff * s.ix[k];
                by += diff * s.iy[k];
            }
            let step = [(gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det];
            d = [d[0] + step[0], d[1] + step[1]];
            if !d[0].is_finite() || !d[1].is_finite() {
                return None;
            }
            if step[0] * step[0] + step[1] * step[1] < eps2 {
                break;
            }
        }
        guess = d;
    }

    let (w, h) = prev.dims();
    let (ex, ey) = (p[0] + guess[0], p[1] + guess[1]);
    let inside = ex >= T::zero()
        && ey >= T::zero()
        && ex <= T::from_usize_lossy(w - 1)
        && ey <= T::from_usize_lossy(h - 1);
    inside.then_some(guess)
}

/// Sparse pyramidal Lucas-Kanade between two pyramids of equal size.
pub fn lk_track_pyramids<T: Scalar>(
    prev: &Pyramid<T>,
    next: &Pyramid<T>,
    points: &[[T; 2]],
    params: &LkParams<T>,
) -> Result<FlowField<T>, FlowError> {
    params.validate()?;
    let (pw, ph) = prev.dims();
    let (nw, nh) = next.dims();
    if (pw, ph) != (nw, nh) {
        return Err(FlowError::DimensionMismatch(pw, ph, nw, nh));
    }
    let mut scratch = Scratch::default();
    let mut displacements = Vec::with_capacity(points.len());
    let mut status = Vec::with_capacity(points.len());
    for &p in points {
        match track_point(prev, next, p, params, &mut scratch) {
            Some(d) => {
                displacements.push(d);
                status.push(TrackStatus::Tracked);
            }
            None => {
                displacements.push([T::zero(); 2]);
                status.push(TrackStatus::Lost);
            }
        }
    }
    Ok(FlowField {
        points: points.to_vec(),
        displacements,
        status,
    })
}

pub fn lk_track<T: Scalar>(
    prev: &GrayImage<T>,
    next: &GrayImage<T>,
    points: &[[T; 2]],
    params: &LkParams<T>,
) -> Result<FlowField<T>, FlowError> {
    params.validate()?;
    if prev.dims() != next.dims() {
        let ((a, b), (c, d)) = (prev.dims(), next.dims());
        return Err(FlowError::DimensionMismatch(a, b, c, d));
    }
    if points.is_empty() {
        return Ok(FlowField {
            points: Vec::new(),
            displacements: Vec::new(),
            status: Vec::new(),
        });
    }
    let a = Pyramid::new(prev, params.levels);
    let b = Pyramid::new(next, params.levels);
    lk_track_pyramids(&a, &b, points, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{project_distribution, RingSpec};
    use crate::imgcore::gaussian3x3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Smoothed white noise, larger than the frame so shifted crops stay valid.
    fn noise_canvas(w: usize, h: usize, seed: u64) -> GrayImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0));
        gaussian3x3(&gaussian3x3(&raw))
    }

    fn crop(src: &GrayImage<f64>, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| src.get(x + x0, y + y0))
    }

    /// `next` is `prev` translated by `(dx, dy)`: content at p moves to p + d.
    fn shifted_pair(seed: u64, dx: isize, dy: isize) -> (GrayImage<f64>, GrayImage<f64>) {
        let canvas = noise_canvas(340, 260, seed);
        let prev = crop(&canvas, 10, 10, 320, 240);
        let next = crop(&canvas, (10 - dx) as usize, (10 - dy) as usize, 320, 240);
        (prev, next)
    }

    fn ring_points() -> Vec<[f64; 2]> {
        project_distribution(&RingSpec::default().build().unwrap(), 320, 240, 0.8).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let (prev, _) = shifted_pair(1, 0, 0);
        let f = lk_track(&prev, &prev, &ring_points(), &LkParams::default()).unwrap();
        assert_eq!(f.tracked_count(), 101);
        assert!(f.displacements.iter().all(|d| d[0] == 0.0 && d[1] == 0.0));
    }

    #[test]
    fn recovers_horizontal_shift() {
        let (prev, next) = shifted_pair(2, 2, 0);
        let f = lk_track(&prev, &next, &ring_points(), &LkParams::default()).unwrap();
        let good = f
            .tracked()
            .filter(|(_, d)| (d[0] - 2.0).abs() < 0.25 && d[1].abs() < 0.25)
            .count();
        assert!(good as f64 >= 0.95 * f.len() as f64, "{good}");
    }

    #[test]
    fn textureless_pair_loses_everything() {
        let flat = GrayImage::filled(320, 240, 80.0);
        let f = lk_track(&flat, &flat, &ring_points(), &LkParams::default()).unwrap();
        assert_eq!(f.tracked_count(), 0);
        assert!(f.displacements.iter().all(|d| *d == [0.0, 0.0]));
    }

    #[test]
    fn swap_symmetry() {
        let (prev, next) = shifted_pair(3, 3, -1);
        let pts = ring_points();
        let fwd = lk_track(&prev, &next, &pts, &LkParams::default()).unwrap();
        let bwd = lk_track(&next, &prev, &pts, &LkParams::default()).unwrap();
        for i in 0..pts.len() {
            if fwd.status[i] == TrackStatus::Tracked && bwd.status[i] == TrackStatus::Tracked {
                assert!((fwd.displacements[i][0] + bwd.displacements[i][0]).abs() < 0.5);
                assert!((fwd.displacements[i][1] + bwd.displacements[i][1]).abs() < 0.5);
            }
        }
    }

    #[test]
    fn pyramid_depth_agrees_for_small_shifts() {
        let (prev, next) = shifted_pair(4, 1, 2);
        let pts = ring_points();
        let one = LkParams {
            levels: 1,
            ..LkParams::default()
        };
        let a = lk_track(&prev, &next, &pts, &one).unwrap();
        let b = lk_track(&prev, &next, &pts, &LkParams::default()).unwrap();
        let mut both = 0;
        let mut agree = 0;
        for i in 0..pts.len() {
            if a.status[i] == TrackStatus::Tracked && b.status[i] == TrackStatus::Tracked {
                both += 1;
                let (da, db) = (a.displacements[i], b.displacements[i]);
                if (da[0] - db[0]).abs() < 0.25 && (da[1] - db[1]).abs() < 0.25 {
                    agree += 1;
                }
            }
        }
        assert!(both > 0 && agree as f64 >= 0.9 * both as f64, "{agree}/{both}");
    }

    #[test]
    fn deterministic_and_finite() {
        let (prev, next) = shifted_pair(5, -4, 3);
        let pts = ring_points();
        let a = lk_track(&prev, &next, &pts, &LkParams::default()).unwrap();
        let b = lk_track(&prev, &next, &pts, &LkParams::default()).unwrap();
        assert_eq!(a, b);
        for (d, s) in a.displacements.iter().zip(&a.status) {
            assert!(d[0].is_finite() && d[1].is_finite());
            if *s == TrackStatus::Lost {
                assert_eq!(*d, [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn errors_and_empty_input() {
        let a = GrayImage::filled(10, 10, 0.0);
        let b = GrayImage::filled(11, 10, 0.0);
        assert!(matches!(
            lk_track(&a, &b, &[[1.0, 1.0]], &LkParams::default()),
            Err(FlowError::DimensionMismatch(..))
        ));
        let empty = lk_track(&a, &a, &[], &LkParams::default()).unwrap();
        assert!(empty.is_empty());
        let bad = LkParams {
            window: 4,
            ..LkParams::default()
        };
        assert!(lk_track(&a, &a, &[[1.0, 1.0]], &bad).is_err());
    }

    #[test]
    fn points_far_outside_are_lost() {
        let (prev, next) = shifted_pair(6, 1, 0);
        let f = lk_track(&prev, &next, &[[-100.0, 50.0], [160.0, 120.0]], &LkParams::default()).unwrap();
        assert_eq!(f.status, vec![TrackStatus::Lost, TrackStatus::Tracked]);
    }

    #[test]
    fn works_in_single_precision() {
        let (prev, next) = shifted_pair(7, 2, 1);
        let (p32, n32) = (prev.cast::<f32>(), next.cast::<f32>());
        let pts: Vec<[f32; 2]> =
            project_distribution(&RingSpec::default().build().unwrap(), 320, 240, 0.8).unwrap();
        let f = lk_track(&p32, &n32, &pts, &LkParams::default()).unwrap();
        let good = f
            .tracked()
            .filter(|(_, d)| (d[0] - 2.0).abs() < 0.25 && (d[1] - 1.0).abs() < 0.25)
            .count();
        assert!(good >= 96, "{good}");
    }
}
