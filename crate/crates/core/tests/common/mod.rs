use flownav::features::Label;
use flownav::learn::{rbf_kernel, SvmModel};
use nalgebra::{DMatrix, DVector};

/// The 4-point XOR instance.
pub fn xor() -> (Vec<Vec<f64>>, Vec<Label>) {
    (
        vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ],
        vec![
            Label::Negative,
            Label::Negative,
            Label::Positive,
            Label::Positive,
        ],
    )
}

/// Best dual objective over every face of the box: each variable is pinned
/// to 0, pinned to its bound, or free, and the free block is solved together
/// with the equality constraint. The dual is concave so its maximum is the
/// stationary point of one of these faces.
pub fn exhaustive_dual(x: &[Vec<f64>], y: &[Label], bound: &[f64], gamma: f64) -> f64 {
    let n = x.len();
    let s: Vec<f64> = y.iter().map(|l| l.value()).collect();
    let q = DMatrix::from_fn(n, n, |i, j| {
        s[i] * s[j] * rbf_kernel(&x[i], &x[j], gamma).unwrap()
    });
    let dual = |a: &DVector<f64>| a.sum() - 0.5 * (a.transpose() * &q * a)[(0, 0)];
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut c = code;
        for st in state.iter_mut() {
            *st = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a = DVector::from_fn(n, |i, _| if state[i] == 1 { bound[i] } else { 0.0 });
        if !free.is_empty() {
            let m = free.len();
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    kkt[(r, c)] = q[(i, j)];
                }
                kkt[(r, m)] = s[i];
                kkt[(m, r)] = s[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|j| state[*j] == 1)
                        .map(|j| q[(i, j)] * bound[j])
                        .sum::<f64>();
            }
            rhs[m] = -(0..n)
                .filter(|j| state[*j] == 1)
                .map(|j| s[j] * bound[j])
                .sum::<f64>();
            let Some(sol) = kkt.lu().solve(&rhs) else {
                continue;
            };
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
        }
        let eq: f64 = (0..n).map(|i| s[i] * a[i]).sum();
        let feasible = eq.abs() < 1e-9 && (0..n).all(|i| a[i] >= -1e-9 && a[i] <= bound[i] + 1e-9);
        if feasible {
            best = best.max(dual(&a));
        }
    }
    best
}

pub fn assert_dual_constraints(model: &SvmModel<f64>, tol: f64) {
    let sum: f64 = model.dual_coefs.iter().sum();
    assert!(sum.abs() <= tol, "sum of alpha_i y_i = {sum}");
    for &coef in &model.dual_coefs {
        let cap = model.c * model.class_weights.of(Label::from_sign(coef));
        assert!(coef.abs() <= cap + tol, "|{coef}| exceeds box {cap}");
    }
}
