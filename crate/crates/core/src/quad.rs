//! Quadrature rules: adaptive Gauss–Kronrod, Gauss–Legendre nodes and the
//! cumulative (spectral) integration matrix used by the fixed-point solver.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    }
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    const MAX_SEGMENTS: usize = 4000;
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut segs = vec![gk15(&f, a, b)];
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                intervals: segs.len(),
            });
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::numeric(format!(
                "adaptive quadrature on [{a}, {b}] did not converge: value {value:e}, error {error:e}"
            )));
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval cannot be split further in floating point
            return Err(Error::numeric(format!(
                "adaptive quadrature on [{a}, {b}] hit floating-point resolution near {mid:e}"
            )));
        }
        segs.push(gk15(&f, s.a, mid));
        segs.push(gk15(&f, mid, s.b));
    }
}

/// Integrates `f` over `[a, b]` when `f(s) ~ (s − a)^e` near `a` with `e > −1`.
///
/// Uses `s = a + v^{1/(1+e)}`, which turns the endpoint factor into a bounded one.
pub fn integrate_algebraic_start<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    e: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    if e <= -1.0 {
        return Err(Error::domain(format!(
            "endpoint exponent {e} is not integrable"
        )));
    }
    if e >= 0.0 {
        return integrate(f, a, b, rel_tol, 0.0);
    }
    let m = 1.0 / (1.0 + e);
    let vmax = (b - a).powf(1.0 + e);
    integrate(
        |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let s = a + v.powf(m);
            f(s) * m * v.powf(m - 1.0)
        },
        0.0,
        vmax,
        rel_tol,
        0.0,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Legendre polynomial P_n(z) and its derivative.
fn legendre_p(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Lagrange basis polynomial `l` on `nodes`, evaluated at `z`.
fn lagrange_basis(nodes: &[f64], l: usize, z: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != l)
        .map(|(_, &xj)| (z - xj) / (nodes[l] - xj))
        .product()
}

/// Cumulative integration matrix on `[-1, 1]`: `S[j][l] = ∫_{-1}^{x_j} L_l`.
///
/// For values `f_l` at the Gauss–Legendre nodes, `Σ_l S[j][l] f_l` integrates the
/// interpolant from −1 to `x_j`. The last row is `∫_{-1}^{1} L_l`, i.e. the weights.
pub fn cumulative_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let (gx, gw) = gauss_legendre(n);
    let mut rows: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&xj| {
            let h = 0.5 * (xj + 1.0);
            (0..n)
                .map(|l| {
                    gx.iter()
                        .zip(&gw)
                        .map(|(&g, &w)| w * h * lagrange_basis(nodes, l, -1.0 + h * (g + 1.0)))
                        .sum()
                })
                .collect()
        })
        .collect();
    rows.push(
        (0..n)
            .map(|l| gx.iter().zip(&gw).map(|(&g, &w)| w * lagrange_basis(nodes, l, g)).sum())
            .collect(),
    );
    rows
}

/// Pairwise summation; result independent of thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked() {
        let q = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-13, 0.0).unwrap();
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let q = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 0.0).unwrap();
        let r = 1.0 / 1e-4f64.sqrt();
        let exact = 2.0 * r * r.atan();
        assert!((q.value / exact - 1.0).abs() < 1e-11, "{} {}", q.value, exact);
    }

    #[test]
    fn algebraic_start_removes_singularity() {
                let q = integrate_algebraic_start(|s: f64| s.powf(-0.5), 0.0, 1.0, -0.5, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matrix_integrates_interpolant() {
        let (x, _) = gauss_legendre(8);
        let s = cumulative_matrix(&x);
        for (j, &xj) in x.iter().enumerate() {
            let v: f64 = (0..8).map(|l| s[j][l] * 3.0 * x[l] * x[l]).sum();
            assert!((v - (xj.powi(3) + 1.0)).abs() < 1e-14);
        }
        let total: f64 = (0..8).map(|l| s[8][l] * x[l].powi(4)).sum();
        assert!((total - 0.4).abs() < 1e-14);
    }
}
