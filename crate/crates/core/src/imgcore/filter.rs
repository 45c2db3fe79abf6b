use super::{GrayImage, ImageError};
use crate::scalar::Scalar;

/// Binomial 3x3 smoothing kernel, normalized by 16.
pub const GAUSSIAN_3X3: [[f64; 3]; 3] = [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]];

/// 4-neighbour Laplacian.
pub const LAPLACIAN_4: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

/// 3x3 correlation with replicated borders. `scale` multiplies every tap.
pub fn convolve3x3<T: Scalar>(img: &GrayImage<T>, kernel: &[[f64; 3]; 3], scale: f64) -> GrayImage<T> {
    let k: Vec<T> = kernel
        .iter()
        .flat_map(|row| row.iter().map(|&v| T::lit(v * scale)))
        .collect();
    let (w, h) = img.dims();
    let src = img.data();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)];
        for x in 0..w {
            let cols = [x.saturating_sub(1), x, (x + 1).min(w - 1)];
            let mut acc = T::zero();
            for (ky, &ry) in rows.iter().enumerate() {
                let row = &src[ry * w..(ry + 1) * w];
                for (kx, &cx) in cols.iter().enumerate() {
                    acc += k[ky * 3 + kx] * row[cx];
                }
            }
            out.push(acc);
        }
    }
    GrayImage::new(w, h, out).expect("same dims as input")
}

pub fn gaussian3x3<T: Scalar>(img: &GrayImage<T>) -> GrayImage<T> {
    convolve3x3(img, &GAUSSIAN_3X3, 1.0 / 16.0)
}

/// Signed output; not offset or clamped.
pub fn laplacian<T: Scalar>(img: &GrayImage<T>) -> GrayImage<T> {
    convolve3x3(img, &LAPLACIAN_4, 1.0)
}

/// Smooth then keep every other pixel; output is `ceil(w/2) x ceil(h/2)`.
pub fn downsample2x<T: Scalar>(img: &GrayImage<T>) -> Result<GrayImage<T>, ImageError> {
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(ImageError::TooSmall {
            width: w,
            height: h,
            min: 2,
        });
    }
    let smooth = gaussian3x3(img);
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    Ok(GrayImage::from_fn(ow, oh, |x, y| smooth.get(2 * x, 2 * y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn impulse(w: usize, h: usize, v: f64) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| if x == w / 2 && y == h / 2 { v } else { 0.0 })
    }

    #[test]
    fn gaussian_constant_and_single_pixel() {
        let c = GrayImage::filled(5, 4, 7.0);
        assert!(gaussian3x3(&c).data().iter().all(|&v| v == 7.0));
        let one = GrayImage::filled(1, 1, 3.25);
        assert_eq!(gaussian3x3(&one).get(0, 0), 3.25);
    }

    #[test]
    fn gaussian_impulse_response() {
        let out = gaussian3x3(&impulse(5, 5, 16.0));
        let expected = [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]];
        for y in 0..5 {
            for x in 0..5 {
                let e = if (1..=3).contains(&x) && (1..=3).contains(&y) {
                    expected[y - 1][x - 1]
                } else {
                    0.0
                };
                assert_abs_diff_eq!(out.get(x, y), e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_impulse_constant_and_ramp() {
        let out = laplacian(&impulse(5, 5, 1.0));
        assert_eq!(out.get(2, 2), -4.0);
        for (x, y) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            assert_eq!(out.get(x, y), 1.0);
        }
        assert_eq!(out.get(1, 1), 0.0);

        let c = GrayImage::filled(6, 6, 42.0);
        assert!(laplacian(&c).data().iter().all(|&v| v == 0.0));

        let ramp = GrayImage::from_fn(8, 6, |x, _| x as f64);
        let lap = laplacian(&ramp);
        for y in 0..6 {
            for x in 1..7 {
                assert_eq!(lap.get(x, y), 0.0);
            }
        }
        // replicated border bends the ramp at the edges
        assert_eq!(lap.get(0, 3), 1.0);
    }

    #[test]
    fn downsample_dims_and_constant() {
        let img = GrayImage::filled(320, 240, 9.0);
        let half = downsample2x(&img).unwrap();
        assert_eq!(half.dims(), (160, 120));
        assert!(half.data().iter().all(|&v| v == 9.0));
        let odd = downsample2x(&GrayImage::filled(5, 3, 1.0)).unwrap();
        assert_eq!(odd.dims(), (3, 2));
        assert!(matches!(
            downsample2x(&GrayImage::filled(1, 4, 1.0)),
            Err(ImageError::TooSmall { .. })
        ));
    }

    #[test]
    fn downsample_checkerboard_interior() {
        let board = GrayImage::from_fn(4, 4, |x, y| if (x + y) % 2 == 0 { 0.0 } else { 255.0 });
        let half = downsample2x(&board).unwrap();
        assert_eq!(half.dims(), (2, 2));
        // (1,1) samples source site (2,2), whose 3x3 support is fully interior
        assert_abs_diff_eq!(half.get(1, 1), 127.5, epsilon = 1e-12);
        for &v in half.data().iter() {
            let v: f64 = v;
            assert!((v - 127.5).abs() <= 64.0, "{v}");
        }
    }

    #[test]
    fn inputs_untouched() {
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 3 + y) as f64);
        let copy = img.clone();
        let _ = gaussian3x3(&img);
        let _ = laplacian(&img);
        let _ = downsample2x(&img).unwrap();
        assert_eq!(img, copy);
    }

    fn image_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            (
                Just(w),
                Just(h),
                prop::collection::vec(-255.0f64..255.0, w * h),
                prop::collection::vec(-255.0f64..255.0, w * h),
            )
        })
    }

    proptest! {
        #[test]
        fn filters_are_linear((w, h, a, b) in image_strategy(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let ia = GrayImage::new(w, h, a.clone()).unwrap();
            let ib = GrayImage::new(w, h, b.clone()).unwrap();
            let mix = GrayImage::new(w, h, a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect()).unwrap();
            for f in [gaussian3x3::<f64> as fn(&GrayImage<f64>) -> GrayImage<f64>, laplacian::<f64>] {
                let lhs = f(&mix);
                let (fa, fb) = (f(&ia), f(&ib));
                for i in 0..w * h {
                    let rhs = s * fa.data()[i] + t * fb.data()[i];
                    prop_assert!((lhs.data()[i] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
                }
            }
        }
    }
}
