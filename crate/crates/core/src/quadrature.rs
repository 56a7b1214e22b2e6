//! Fixed Gauss–Legendre rules used for cell averages.

/// Five-point Gauss–Legendre nodes on [-1, 1]; exact through degree 9.
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

/// Weights matching [`GL5_NODES`]; they sum to 2.
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Tensor-product average of `f` over the square cell of side `h` centred at
/// `(cx, cy)`. `f` writes one value per channel into its output slice; the
/// averages are accumulated into `out`.
pub fn cell_average<T, F>(cx: f64, cy: f64, h: f64, out: &mut [T], scratch: &mut [T], mut f: F)
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    F: FnMut(f64, f64, &mut [T]),
{
    debug_assert_eq!(out.len(), scratch.len());
    out.iter_mut().for_each(|v| *v = T::default());
    let half = 0.5 * h;
    for (&xi, &wi) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        let x = cx + half * xi;
        for (&yj, &wj) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let y = cy + half * yj;
            f(x, y, scratch);
            // Weights sum to 2 per axis; the 1/4 normalises to an average.
            let w = 0.25 * wi * wj;
            for (o, &s) in out.iter_mut().zip(scratch.iter()) {
                *o += s * w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = GL5_WEIGHTS.iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_degree_nine_exactly() {
        // Average of x^8 y^0 over [-1,1]^2 is 1/9.
        let mut out = [0.0f64];
        let mut scratch = [0.0f64];
        cell_average(0.0, 0.0, 2.0, &mut out, &mut scratch, |x, _y, o| o[0] = x.powi(8));
        assert!((out[0] - 1.0 / 9.0).abs() < 1e-14);
    }
}
