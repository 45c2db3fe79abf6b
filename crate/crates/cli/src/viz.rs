use flownav::flow::{FlowField, TrackStatus};
use flownav::imgcore::{ColorImage, GrayImage};

const TRACKED: [u8; 3] = [255, 40, 40];
const LOST: [u8; 3] = [40, 90, 255];
const ORIGIN: [u8; 3] = [40, 230, 40];

/// The frame in gray with each tracked vector drawn `scale` times longer
/// than measured. Lost points are marked in blue.
pub fn draw_flow(frame: &GrayImage<f64>, flow: &FlowField<f64>, scale: f64) -> ColorImage {
    let mut img = ColorImage::from_gray(frame);
    for ((p, d), status) in flow.points.iter().zip(&flow.displacements).zip(&flow.status) {
        match status {
            TrackStatus::Tracked => {
                line(&mut img, *p, [p[0] + scale * d[0], p[1] + scale * d[1]], TRACKED);
                dot(&mut img, *p, ORIGIN);
            }
            _ => dot(&mut img, *p, LOST),
        }
    }
    img
}

fn put(img: &mut ColorImage, x: f64, y: f64, rgb: [u8; 3]) {
    let (xi, yi) = (x.round(), y.round());
    if xi >= 0.0 && yi >= 0.0 && (xi as usize) < img.width() && (yi as usize) < img.height() {
        img.set(xi as usize, yi as usize, rgb);
    }
}

fn dot(img: &mut ColorImage, p: [f64; 2], rgb: [u8; 3]) {
    for (dx, dy) in [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
        put(img, p[0] + dx, p[1] + dy, rgb);
    }
}

fn line(img: &mut ColorImage, a: [f64; 2], b: [f64; 2], rgb: [u8; 3]) {
    let steps = (b[0] - a[0]).abs().max((b[1] - a[1]).abs()).ceil().clamp(1.0, 4096.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        put(img, a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), rgb);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_and_lost_points_are_painted() {
        let frame = GrayImage::filled(40, 30, 100.0);
        let flow = FlowField {
            points: vec![[5.0, 5.0], [30.0, 20.0]],
            displacements: vec![[2.0, 0.0], [0.0, 0.0]],
            status: vec![TrackStatus::Tracked, TrackStatus::Lost],
        };
        let img = draw_flow(&frame, &flow, 4.0);
        assert_eq!(img.get(5, 5), ORIGIN);
        assert_eq!(img.get(13, 5), TRACKED);
        assert_eq!(img.get(30, 20), LOST);
        assert_eq!(img.get(0, 29), [100, 100, 100]);
    }

    #[test]
    fn off_image_vectors_are_clipped() {
        let frame = GrayImage::filled(10, 10, 0.0);
        let flow = FlowField {
            points: vec![[8.0, 8.0]],
            displacements: vec![[50.0, 50.0]],
            status: vec![TrackStatus::Tracked],
        };
        draw_flow(&frame, &flow, 10.0);
    }
}
