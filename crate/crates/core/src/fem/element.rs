//! Element-level operators for linear simplices: shape-function gradients,
//! the covariant metric of the parent map, the complex stabilization
//! parameter and the exact element matrices `L`, `G`, `D`, `M`.

use crate::error::{Error, Result};
use crate::mesh::geometry::{max_edge_length, Point};
use crate::mesh::DEGENERACY_TOLERANCE;

use super::config::CaseConfig;

/// Constant gradients of the barycentric shape functions of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeGradients {
    pub dimension: usize,
    /// `grads[a][i] = dN_a/dx_i`; rows beyond `dimension + 1` are zero.
    pub grads: [[f64; 3]; 4],
    /// Volume (3D) or area (2D), always positive.
    pub measure: f64,
    /// `inverse_map[k][i] = d(zeta_k)/d(x_i)` for parent coordinates `zeta_1..zeta_dim`.
    pub inverse_map: [[f64; 3]; 3],
}

/// Gradients and measure of a linear triangle (`dimension = 2`) or
/// tetrahedron (`dimension = 3`) given its vertex coordinates.
pub fn shape_gradients(dimension: usize, coords: &[Point]) -> Result<ShapeGradients> {
    if !(2..=3).contains(&dimension) || coords.len() < dimension + 1 {
        return Err(Error::Invalid(format!(
            "need {} vertices for a {dimension}D simplex",
            dimension + 1
        )));
    }
    // jac[i][k] = d x_i / d zeta_k
    let mut jac = [[0.0; 3]; 3];
    for k in 0..dimension {
        for i in 0..dimension {
            jac[i][k] = coords[k + 1][i] - coords[0][i];
        }
    }
    let (det, inv) = invert(dimension, &jac);
    let factorial = if dimension == 2 { 2.0 } else { 6.0 };
    let measure = det.abs() / factorial;
    let length = max_edge_length(&coords[..dimension + 1]);
    if !measure.is_finite() || measure <= DEGENERACY_TOLERANCE * length.powi(dimension as i32) {
        return Err(Error::DegenerateElement { element: usize::MAX, measure });
    }
    let mut grads = [[0.0; 3]; 4];
    for k in 0..dimension {
        for i in 0..dimension {
            grads[k + 1][i] = inv[k][i];
            grads[0][i] -= inv[k][i];
        }
    }
    Ok(ShapeGradients {
        dimension,
        grads,
        measure,
        inverse_map: inv,
    })
}

/// Determinant and inverse of the leading `n x n` block.
fn invert(n: usize, a: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if n == 2 {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        inv[0][0] = a[1][1] / det;
        inv[0][1] = -a[0][1] / det;
        inv[1][0] = -a[1][0] / det;
        inv[1][1] = a[0][0] / det;
        return (det, inv);
    }
    let c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    let c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    let det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    inv[0][0] = c00 / det;
    inv[1][0] = c01 / det;
    inv[2][0] = c02 / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
    (det, inv)
}

/// Covariant metric `xi_ij = sum_k dzeta_k/dx_i dzeta_k/dx_j` of the map
/// from the standard parent simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariantMetric {
    pub xi: [[f64; 3]; 3],
    /// `xi : xi`, units of 1/length^4.
    pub xi_colon_xi: f64,
}

pub fn covariant_metric(dimension: usize, coords: &[Point]) -> Result<CovariantMetric> {
    Ok(metric_from_gradients(&shape_gradients(dimension, coords)?))
}

pub(crate) fn metric_from_gradients(sg: &ShapeGradients) -> CovariantMetric {
    let n = sg.dimension;
    let mut xi = [[0.0; 3]; 3];
    let mut contraction = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| sg.inverse_map[k][i] * sg.inverse_map[k][j]).sum();
            xi[i][j] = v;
            contraction += v * v;
        }
    }
    CovariantMetric {
        xi,
        xi_colon_xi: contraction,
    }
}

/// Real and imaginary parts of the stabilization parameter
/// `tau = 1 / (mu sqrt(xi:xi) / c - j rho omega / c)`, written out as
///
/// `tau_r = c mu sqrt(xi:xi) / ((rho omega)^2 + mu^2 xi:xi)`,
/// `tau_i = c rho omega / ((rho omega)^2 + mu^2 xi:xi)`.
pub fn stabilization_tau(config: &CaseConfig, xi_colon_xi: f64) -> (f64, f64) {
    debug_assert!(xi_colon_xi > 0.0);
    let rho_omega = config.rho * config.omega;
    let mu = config.mu;
    let denom = rho_omega * rho_omega + mu * mu * xi_colon_xi;
    let tau_r = config.c_stab * mu * xi_colon_xi.sqrt() / denom;
    let tau_i = config.c_stab * rho_omega / denom;
    (tau_r, tau_i)
}

/// Exact element integrals for a linear simplex with `n = dimension + 1`
/// nodes. Only the leading `n x n` entries are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub dimension: usize,
    /// `L_ab = int grad N_a . grad N_b`
    pub l: [[f64; 4]; 4],
    /// `G_ab = int grad N_a N_b`
    pub g: [[[f64; 3]; 4]; 4],
    /// `D_ab = int N_a grad N_b`
    pub d: [[[f64; 3]; 4]; 4],
    /// `M_ab = int N_a N_b`
    pub m: [[f64; 4]; 4],
    pub tau_r: f64,
    pub tau_i: f64,
}

impl ElementMatrices {
    pub fn nodes(&self) -> usize {
        self.dimension + 1
    }
}

/// `int N_a N_b = measure * (1 + delta_ab) * d! / (d + 2)!`.
pub(crate) fn mass_factor(dimension: usize) -> f64 {
    if dimension == 2 {
        1.0 / 12.0
    } else {
        1.0 / 20.0
    }
}

pub fn element_matrices(dimension: usize, coords: &[Point], config: &CaseConfig) -> Result<ElementMatrices> {
    let sg = shape_gradients(dimension, coords)?;
    let metric = metric_from_gradients(&sg);
    let (tau_r, tau_i) = stabilization_tau(config, metric.xi_colon_xi);
    let n = dimension + 1;
    let v = sg.measure;
    let mut out = ElementMatrices {
        dimension,
        l: [[0.0; 4]; 4],
        g: [[[0.0; 3]; 4]; 4],
        d: [[[0.0; 3]; 4]; 4],
        m: [[0.0; 4]; 4],
        tau_r,
        tau_i,
    };
    let mf = mass_factor(dimension) * v;
    let share = v / n as f64;
    for a in 0..n {
        for b in 0..n {
            out.l[a][b] = v * (0..dimension).map(|i| sg.grads[a][i] * sg.grads[b][i]).sum::<f64>();
            out.m[a][b] = if a == b { 2.0 * mf } else { mf };
            for i in 0..dimension {
                out.g[a][b][i] = sg.grads[a][i] * share;
                out.d[a][b][i] = sg.grads[b][i] * share;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const UNIT_TET: [Point; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    fn config(omega: f64) -> CaseConfig {
        CaseConfig::new(1.0, 1.0, omega)
    }

    /// Collapsed-coordinate (Duffy) Gauss-Legendre rule on the unit
    /// tetrahedron; five points per direction integrate quadratics times the
    /// collapse jacobian exactly. Returns (point, weight).
    fn tet_quadrature() -> Vec<([f64; 3], f64)> {
        let mut out = Vec::new();
        let n = 5;
        let (gx, gw) = gauss(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let u = 0.5 * (gx[i] + 1.0);
                    let v = 0.5 * (gx[j] + 1.0);
                    let s = 0.5 * (gx[k] + 1.0);
                    let px = u;
                    let py = (1.0 - u) * v;
                    let pz = (1.0 - u) * (1.0 - v) * s;
                    let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                    out.push(([px, py, pz], gw[i] * gw[j] * gw[k] * jac / 8.0));
                }
            }
        }
        out
    }

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0; n];
        let mut ws = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let dp = {
                        let (mut q0, mut q1) = (1.0, x);
                        for k in 2..=n {
                            let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                            q0 = q1;
                            q1 = q2;
                        }
                        n as f64 * (x * q1 - q0) / (x * x - 1.0)
                    };
                    ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                    break;
                }
            }
            xs[i] = x;
        }
        (xs, ws)
    }

    /// Physical-space quadrature for an arbitrary tetrahedron via the affine map.
    fn quad_on(coords: &[Point; 4]) -> Vec<([f64; 4], f64)> {
        let vol = {
            let e = |k: usize| [coords[k][0] - coords[0][0], coords[k][1] - coords[0][1], coords[k][2] - coords[0][2]];
            let (a, b, c) = (e(1), e(2), e(3));
            (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])).abs()
        };
        tet_quadrature()
            .into_iter()
            .map(|(p, w)| ([1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]], w * vol))
            .collect()
    }

    #[test]
    fn quadrature_integrates_volume() {
        let total: f64 = tet_quadrature().iter().map(|q| q.1).sum();
        assert!((total - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unit_tet_gradients() {
        let sg = shape_gradients(3, &UNIT_TET).unwrap();
        assert_eq!(sg.grads[0], [-1.0, -1.0, -1.0]);
        assert_eq!(sg.grads[1], [1.0, 0.0, 0.0]);
        assert_eq!(sg.grads[2], [0.0, 1.0, 0.0]);
        assert_eq!(sg.grads[3], [0.0, 0.0, 1.0]);
        assert!((sg.measure - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn unit_triangle_gradients() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let sg = shape_gradients(2, &tri).unwrap();
        assert_eq!(&sg.grads[0][..2], &[-1.0, -1.0]);
        assert_eq!(sg.measure, 0.5);
    }

    #[test]
    fn degenerate_rejected() {
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(shape_gradients(3, &flat).is_err());
        assert!(covariant_metric(3, &flat).is_err());
    }

    #[test]
    fn unit_tet_element_matrices_match_quadrature() {
        let em = element_matrices(3, &UNIT_TET, &config(1.0)).unwrap();
        assert!((em.m[0][0] - 1.0 / 60.0).abs() < 1e-15);
        assert!((em.m[0][1] - 1.0 / 120.0).abs() < 1e-15);
        assert!((em.l[0][0] - 0.5).abs() < 1e-15);
        assert!((em.l[0][1] + 1.0 / 6.0).abs() < 1e-15);
        assert!((em.g[1][0][0] - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(em.g[1][0][1], 0.0);
        assert_eq!(em.g[1][0][2], 0.0);
    }

    #[test]
    fn right_tet_metric_matches_hand_map() {
        let h = 0.37;
        let coords = [[0.0, 0.0, 0.0], [h, 0.0, 0.0], [0.0, h, 0.0], [0.0, 0.0, h]];
        let metric = covariant_metric(3, &coords).unwrap();
        // hand map zeta_k = x_k / h, differentiated by central differences
        let zeta = |x: [f64; 3]| [x[0] / h, x[1] / h, x[2] / h];
        let step = 1e-6;
        let mut dzdx = [[0.0; 3]; 3];
        for i in 0..3 {
            let mut xp = [0.1, 0.05, 0.07];
            let mut xm = xp;
            xp[i] += step;
            xm[i] -= step;
            let (zp, zm) = (zeta(xp), zeta(xm));
            for k in 0..3 {
                dzdx[k][i] = (zp[k] - zm[k]) / (2.0 * step);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let fd: f64 = (0..3).map(|k| dzdx[k][i] * dzdx[k][j]).sum();
                let exact = if i == j { 1.0 / (h * h) } else { 0.0 };
                assert!((metric.xi[i][j] - exact).abs() < 1e-12 * exact.abs().max(1.0));
                assert!((fd - exact).abs() < 1e-6 / (h * h));
            }
        }
        assert!((metric.xi_colon_xi - 3.0 / h.powi(4)).abs() < 1e-12 * 3.0 / h.powi(4));
    }

    #[test]
    fn tau_steady_limit() {
        let c = config(0.0);
        let (tr, ti) = stabilization_tau(&c, 4.0);
        assert_eq!(ti, 0.0);
        assert!((tr - c.c_stab / 2.0).abs() < 1e-16);
    }

    #[test]
    fn tau_unit_substitution() {
        let (tr, ti) = stabilization_tau(&config(1.0), 1.0);
        assert_eq!(tr, 0.03125 / 2.0);
        assert_eq!(ti, 0.03125 / 2.0);
    }

    #[test]
    fn tau_high_frequency_decay() {
        let xx = 9.0;
        let crossover = 3.0;
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for k in 0..20 {
            let omega = crossover * 2f64.powi(k);
            let (tr, ti) = stabilization_tau(&config(omega), xx);
            assert!(tr < prev.0 && ti < prev.1);
            assert!((ti - 0.03125 / omega).abs() <= 0.03125 / omega * (crossover / omega).powi(2) * 1.0001);
            prev = (tr, ti);
        }
        assert!(prev.0 < 1e-9 && prev.1 < 1e-6);
    }

    fn arb_tet() -> impl Strategy<Value = [Point; 4]> {
        prop::array::uniform4(prop::array::uniform3(-1.0f64..1.0)).prop_filter("non-degenerate", |c| {
            shape_gradients(3, c).map(|sg| sg.measure > 1e-3).unwrap_or(false)
        })
    }

    fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sc, cc) = c.sin_cos();
        let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
        let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
        let rx = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
        let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
            let mut r = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
                }
            }
            r
        };
        mul(mul(rz, ry), rx)
    }

    proptest! {
        #[test]
        fn gradients_partition_of_unity(c in arb_tet()) {
            let sg = shape_gradients(3, &c).unwrap();
            let scale = sg.grads.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                let s: f64 = (0..4).map(|a| sg.grads[a][i]).sum();
                prop_assert!(s.abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn element_matrices_match_quadrature_oracle(c in arb_tet()) {
            let em = element_matrices(3, &c, &config(2.0)).unwrap();
            let sg = shape_gradients(3, &c).unwrap();
            let q = quad_on(&c);
            for a in 0..4 {
                let mut l_scale: f64 = 0.0;
                for b in 0..4 { l_scale = l_scale.max(em.l[a][b].abs()); }
                for b in 0..4 {
                    let m: f64 = q.iter().map(|(n, w)| n[a] * n[b] * w).sum();
                    prop_assert!((em.m[a][b] - m).abs() <= 1e-12 * em.m[a][b].abs());
                    let l: f64 = q.iter().map(|(_, w)| w * (0..3).map(|i| sg.grads[a][i] * sg.grads[b][i]).sum::<f64>()).sum();
                    prop_assert!((em.l[a][b] - l).abs() <= 1e-12 * l_scale);
                    for i in 0..3 {
                        let g: f64 = q.iter().map(|(n, w)| sg.grads[a][i] * n[b] * w).sum();
                        let gs = sg.grads[a][i].abs() * sg.measure / 4.0;
                        prop_assert!((em.g[a][b][i] - g).abs() <= 1e-12 * gs.max(1e-300));
                        prop_assert_eq!(em.d[b][a][i], em.g[a][b][i]);
                    }
                }
                let row: f64 = (0..4).map(|b| em.l[a][b]).sum();
                prop_assert!(row.abs() <= 1e-12 * l_scale);
            }
            for a in 0..4 {
                for b in 0..4 {
                    prop_assert_eq!(em.l[a][b], em.l[b][a]);
                    prop_assert_eq!(em.m[a][b], em.m[b][a]);
                    prop_assert!(em.m[a][b] > 0.0);
                }
            }
        }

        #[test]
        fn metric_scales_as_inverse_fourth_power(c in arb_tet(), s in 0.1f64..10.0) {
            let base = covariant_metric(3, &c).unwrap().xi_colon_xi;
            let scaled: Vec<Point> = c.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
            let after = covariant_metric(3, &scaled).unwrap().xi_colon_xi;
            prop_assert!((after - base / s.powi(4)).abs() <= 1e-10 * base / s.powi(4));
        }

        #[test]
        fn metric_rotation_invariant(c in arb_tet(), a in 0.0f64..6.3, b in 0.0f64..6.3, g in 0.0f64..6.3) {
            let r = rotation(a, b, g);
            let rotated: Vec<Point> = c.iter().map(|p| {
                let mut q = [0.0; 3];
                for i in 0..3 { q[i] = (0..3).map(|k| r[i][k] * p[k]).sum(); }
                q
            }).collect();
            let before = covariant_metric(3, &c).unwrap().xi_colon_xi;
            let after = covariant_metric(3, &rotated).unwrap().xi_colon_xi;
            prop_assert!((after - before).abs() <= 1e-12 * before * 10.0);
        }

        #[test]
        fn matrices_scale_with_element_size(c in arb_tet(), s in 0.2f64..5.0) {
            let a = element_matrices(3, &c, &config(0.0)).unwrap();
            let scaled: Vec<Point> = c.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
            let b = element_matrices(3, &scaled, &config(0.0)).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((b.l[i][j] - a.l[i][j] * s).abs() <= 1e-10 * (a.l[i][j] * s).abs().max(1e-12));
                    prop_assert!((b.m[i][j] - a.m[i][j] * s.powi(3)).abs() <= 1e-10 * a.m[i][j] * s.powi(3));
                    for k in 0..3 {
                        prop_assert!((b.g[i][j][k] - a.g[i][j][k] * s * s).abs() <= 1e-10 * (a.g[i][j][k] * s * s).abs().max(1e-12));
                    }
                }
            }
        }
    }
}
