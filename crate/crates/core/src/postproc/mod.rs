//! Quantities derived from a solved mode, and file exports.

mod csv;
mod vtk;

use std::sync::Arc;

use num_complex::Complex64;

pub use csv::{profile_rows, write_profile_csv, write_profile_csv_to, ProfileLine, ProfileRow};
pub use vtk::{write_vtk, write_vtk_to};

use crate::error::{Error, Result};
use crate::fem::NodalFields;
use crate::linsolve::SolveReport;
use crate::mesh::geometry::Point;
use crate::mesh::Mesh;
use crate::womersley::{ChannelReference, WomersleyReference};

/// Nodal velocity and pressure of one frequency mode over a mesh.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub mesh: Arc<Mesh>,
    pub u_r: Vec<Point>,
    pub u_i: Vec<Point>,
    pub p_r: Vec<f64>,
    pub p_i: Vec<f64>,
    pub omega: f64,
    pub alpha: Option<f64>,
    pub report: Option<SolveReport>,
}

impl SolutionField {
    pub fn new(mesh: Arc<Mesh>, fields: NodalFields, omega: f64) -> Result<Self> {
        let n = mesh.num_nodes();
        for (name, len) in [
            ("u_r", fields.u_r.len()),
            ("u_i", fields.u_i.len()),
            ("p_r", fields.p_r.len()),
            ("p_i", fields.p_i.len()),
        ] {
            if len != n {
                return Err(Error::Invalid(format!("{name} has {len} entries for {n} nodes")));
            }
        }
        Ok(Self {
            mesh,
            u_r: fields.u_r,
            u_i: fields.u_i,
            p_r: fields.p_r,
            p_i: fields.p_i,
            omega,
            alpha: None,
            report: None,
        })
    }

    /// All-zero field on `mesh`.
    pub fn zeros(mesh: Arc<Mesh>, omega: f64) -> Self {
        let n = mesh.num_nodes();
        Self {
            mesh,
            u_r: vec![[0.0; 3]; n],
            u_i: vec![[0.0; 3]; n],
            p_r: vec![0.0; n],
            p_i: vec![0.0; n],
            omega,
            alpha: None,
            report: None,
        }
    }

    /// Complex velocity component `d` at `node`.
    pub fn velocity(&self, node: usize, d: usize) -> Complex64 {
        Complex64::new(self.u_r[node][d], self.u_i[node][d])
    }

    /// The field multiplied by a real factor.
    pub fn scaled(&self, a: f64) -> Self {
        let sv = |v: &Vec<Point>| v.iter().map(|p| [a * p[0], a * p[1], a * p[2]]).collect();
        let ss = |v: &Vec<f64>| v.iter().map(|x| a * x).collect();
        Self {
            u_r: sv(&self.u_r),
            u_i: sv(&self.u_i),
            p_r: ss(&self.p_r),
            p_i: ss(&self.p_i),
            ..self.clone()
        }
    }
}

/// `q = int_patch u . n dA` using the facet-mean velocity, which is exact
/// for linear fields on flat facets.
pub fn patch_flow_rate(field: &SolutionField, patch: &str) -> Result<Complex64> {
    let mesh = &field.mesh;
    let dim = mesh.dimension();
    let mut q = Complex64::new(0.0, 0.0);
    for facet in mesh.patch(patch)? {
        let geo = mesh.boundary_facet_geometry(facet)?;
        let mut mean = Complex64::new(0.0, 0.0);
        for &n in facet {
            for d in 0..dim {
                mean += field.velocity(n, d) * geo.normal[d];
            }
        }
        q += mean * (geo.measure / facet.len() as f64);
    }
    Ok(q)
}

/// `|sum q| / sum |q|`; zero when every flow rate is zero.
pub fn imbalance(flows: &[Complex64]) -> f64 {
    let total: f64 = flows.iter().map(|q| q.norm()).sum();
    if total == 0.0 {
        return 0.0;
    }
    flows.iter().sum::<Complex64>().norm() / total
}

/// Mass imbalance over the outward flow rates of `patches`.
pub fn mass_imbalance(field: &SolutionField, patches: &[&str]) -> Result<f64> {
    if patches.len() < 2 {
        return Err(Error::Invalid("mass imbalance needs at least two patches".into()));
    }
    let flows = patches
        .iter()
        .map(|p| patch_flow_rate(field, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(imbalance(&flows))
}

/// Nodes of every element touching one of `patches`.
pub fn end_band_nodes(mesh: &Mesh, patches: &[&str]) -> Result<Vec<bool>> {
    let mut on_patch = vec![false; mesh.num_nodes()];
    for p in patches {
        for n in mesh.patch_nodes(p)? {
            on_patch[n] = true;
        }
    }
    let mut band = vec![false; mesh.num_nodes()];
    for conn in mesh.elements() {
        if conn.iter().any(|&n| on_patch[n]) {
            for &n in conn {
                band[n] = true;
            }
        }
    }
    Ok(band)
}

/// Relative nodal 2-norm `||u_d - u_ref|| / ||u_ref||` of the complex velocity
/// component `component`, skipping nodes flagged in `excluded`.
pub fn error_norm_with(
    field: &SolutionField,
    component: usize,
    excluded: &[bool],
    reference: impl Fn(&Point) -> Result<Complex64>,
) -> Result<f64> {
    let (mut err, mut norm) = (0.0, 0.0);
    for (n, p) in field.mesh.nodes().iter().enumerate() {
        if excluded.get(n).copied().unwrap_or(false) {
            continue;
        }
        let r = reference(p)?;
        err += (field.velocity(n, component) - r).norm_sqr();
        norm += r.norm_sqr();
    }
    if norm == 0.0 {
        return Err(Error::Invalid("reference has zero norm on the sampled nodes".into()));
    }
    Ok((err / norm).sqrt())
}

/// Axial (z) velocity error against the pipe reference, with the radius
/// taken from x and y and the element layers at the inlet and outlet
/// excluded.
pub fn pipe_error_norm(field: &SolutionField, reference: &WomersleyReference) -> Result<f64> {
    let excluded = end_band_nodes(&field.mesh, &["inlet", "outlet"])?;
    error_norm_with(field, 2, &excluded, |p| {
        let r = p[0].hypot(p[1]).min(reference.radius);
        reference.velocity(r)
    })
}

/// Streamwise (x) velocity error against the channel reference for a
/// channel occupying `0 <= y <= 2b`.
pub fn channel_error_norm(field: &SolutionField, reference: &ChannelReference) -> Result<f64> {
    let excluded = end_band_nodes(&field.mesh, &["inlet", "outlet"])?;
    let b = reference.half_height;
    error_norm_with(field, 0, &excluded, |p| reference.velocity((p[1] - b).clamp(-b, b)))
}

/// Real nodal velocity and pressure at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeField {
    pub u: Vec<Point>,
    pub p: Vec<f64>,
}

/// `Re[sum_w (u_r + j u_i) exp(j w t)]` over the given modes. A mode with
/// `w = 0` contributes its real part only.
pub fn reconstruct_time(fields: &[&SolutionField], t: f64) -> Result<TimeField> {
    let first = fields.first().ok_or_else(|| Error::Invalid("no modes to sum".into()))?;
    let n = first.mesh.num_nodes();
    let mut out = TimeField {
        u: vec![[0.0; 3]; n],
        p: vec![0.0; n],
    };
    for (k, f) in fields.iter().enumerate() {
        if f.omega < 0.0 {
            return Err(Error::Invalid(format!("mode {k} has negative frequency")));
        }
        if fields[..k].iter().any(|g| g.omega == f.omega) {
            return Err(Error::Invalid(format!("frequency {} appears twice", f.omega)));
        }
        if f.mesh.num_nodes() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: f.mesh.num_nodes(),
            });
        }
        let (c, s) = if f.omega == 0.0 { (1.0, 0.0) } else { ((f.omega * t).cos(), (f.omega * t).sin()) };
        for i in 0..n {
            for d in 0..3 {
                out.u[i][d] += c * f.u_r[i][d] - s * f.u_i[i][d];
            }
            out.p[i] += c * f.p_r[i] - s * f.p_i[i];
        }
    }
    Ok(out)
}

/// Radius and length of a generated pipe aligned with the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeGeometry {
    pub radius: f64,
    pub length: f64,
    pub z_min: f64,
}

impl PipeGeometry {
    pub fn from_mesh(mesh: &Mesh) -> Result<Self> {
        if mesh.dimension() != 3 || mesh.num_nodes() == 0 {
            return Err(Error::Invalid("pipe geometry needs a 3D mesh".into()));
        }
        let radius = mesh.nodes().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
        let z_min = mesh.nodes().iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        let z_max = mesh.nodes().iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            radius,
            length: z_max - z_min,
            z_min,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_channel, generate_pipe};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pipe() -> Arc<Mesh> {
        Arc::new(generate_pipe(1.0, 4.0, 3, 6, 8).unwrap())
    }

    fn sampled(mesh: Arc<Mesh>, reference: &WomersleyReference) -> SolutionField {
        let mut f = SolutionField::zeros(mesh.clone(), reference.omega());
        for (n, p) in mesh.nodes().iter().enumerate() {
            let u = reference.velocity(p[0].hypot(p[1]).min(1.0)).unwrap();
            f.u_r[n][2] = u.re;
            f.u_i[n][2] = u.im;
        }
        f
    }

    #[test]
    fn uniform_flow_through_inlet() {
        let mesh = pipe();
        let mut f = SolutionField::zeros(mesh.clone(), 0.0);
        let area: f64 = mesh
            .patch("inlet")
            .unwrap()
            .map(|fc| mesh.boundary_facet_geometry(fc).unwrap().measure)
            .sum();
        assert_eq!(patch_flow_rate(&f, "inlet").unwrap(), Complex64::new(0.0, 0.0));
        for u in &mut f.u_r {
            u[2] = 1.0;
        }
        let q = patch_flow_rate(&f, "inlet").unwrap();
        // the inlet normal points in -z
        assert!((q.re + area).abs() < 1e-13 && q.im == 0.0);
        let out = patch_flow_rate(&f, "outlet").unwrap();
        assert!((out.re - area).abs() < 1e-13);
        assert!(mass_imbalance(&f, &["inlet", "outlet", "wall"]).unwrap() < 1e-13);
        assert!(matches!(patch_flow_rate(&f, "nope"), Err(Error::UnknownPatch(_))));
    }

    #[test]
    fn flow_rate_is_linear() {
        let mesh = pipe();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut f = SolutionField::zeros(mesh, 1.0);
        for n in 0..f.u_r.len() {
            for d in 0..3 {
                f.u_r[n][d] = rng.gen_range(-1.0..1.0);
                f.u_i[n][d] = rng.gen_range(-1.0..1.0);
            }
        }
        let q = patch_flow_rate(&f, "outlet").unwrap();
        let q3 = patch_flow_rate(&f.scaled(-2.5), "outlet").unwrap();
        assert!((q3 + 2.5 * q).norm() < 1e-13 * q.norm());
    }

    #[test]
    fn imbalance_arithmetic() {
        let q = Complex64::new(0.3, -0.2);
        assert_eq!(imbalance(&[q, -q]), 0.0);
        let v = imbalance(&[Complex64::new(1.0, 0.0), Complex64::new(-0.9, 0.0)]);
        assert!((v - 0.1 / 1.9).abs() < 1e-15);
        assert_eq!(imbalance(&[Complex64::new(0.0, 0.0); 3]), 0.0);
        let f = SolutionField::zeros(pipe(), 0.0);
        assert!(mass_imbalance(&f, &["inlet"]).is_err());
    }

    #[test]
    fn error_norm_homogeneity() {
        let mesh = pipe();
        let reference = WomersleyReference::from_alpha(4.0, 1.0, 1.0, 1.0, 4.0, 1.0).unwrap();
        let f = sampled(mesh, &reference);
        assert_eq!(pipe_error_norm(&f, &reference).unwrap(), 0.0);
        let e = pipe_error_norm(&f.scaled(1.1), &reference).unwrap();
        assert!((e - 0.1).abs() < 1e-12, "{e}");
        let zero = WomersleyReference { h: 0.0, ..reference };
        assert!(pipe_error_norm(&f, &zero).is_err());
    }

    #[test]
    fn end_bands_cover_first_layer() {
        let mesh = pipe();
        let band = end_band_nodes(&mesh, &["inlet", "outlet"]).unwrap();
        for (n, p) in mesh.nodes().iter().enumerate() {
            let near = p[2] < 0.5 + 1e-12 || p[2] > 3.5 - 1e-12;
            assert_eq!(band[n], near, "node {n} at z {}", p[2]);
        }
    }

    #[test]
    fn channel_reference_sampling() {
        let mesh = Arc::new(generate_channel(2.0, 6.0, 8, 12).unwrap());
        let reference = ChannelReference::from_alpha(3.0, 1.0, 1.0, 1.0, 6.0, 1.0).unwrap();
        let mut f = SolutionField::zeros(mesh.clone(), reference.omega());
        for (n, p) in mesh.nodes().iter().enumerate() {
            let u = reference.velocity(p[1] - 1.0).unwrap();
            f.u_r[n][0] = u.re;
            f.u_i[n][0] = u.im;
        }
        assert!(channel_error_norm(&f, &reference).unwrap() < 1e-15);
    }

    #[test]
    fn time_reconstruction() {
        let mesh = Arc::new(generate_channel(1.0, 1.0, 1, 1).unwrap());
        let mut a = SolutionField::zeros(mesh.clone(), 2.0);
        for u in &mut a.u_r {
            u[0] = 1.0;
        }
        let t = 0.37;
        let r = reconstruct_time(&[&a], t).unwrap();
        assert!((r.u[0][0] - (2.0 * t).cos()).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut steady = SolutionField::zeros(mesh.clone(), 0.0);
        let mut b = SolutionField::zeros(mesh.clone(), 5.0);
        for f in [&mut steady, &mut b, &mut a] {
            for n in 0..4 {
                f.u_r[n][1] = rng.gen_range(-1.0..1.0);
                f.u_i[n][1] = rng.gen_range(-1.0..1.0);
                f.p_r[n] = rng.gen_range(-1.0..1.0);
                f.p_i[n] = rng.gen_range(-1.0..1.0);
            }
        }
        let at_zero = reconstruct_time(&[&steady, &a, &b], 0.0).unwrap();
        for n in 0..4 {
            assert_eq!(at_zero.u[n][1], steady.u_r[n][1] + a.u_r[n][1] + b.u_r[n][1]);
        }
        let only_steady = reconstruct_time(&[&steady], 1.7).unwrap();
        assert_eq!(only_steady.p, steady.p_r);
        for _ in 0..10 {
            let t = rng.gen_range(0.0..10.0);
            let r = reconstruct_time(&[&a, &b], t).unwrap();
            for n in 0..4 {
                let direct = (a.velocity(n, 1) * Complex64::from_polar(1.0, a.omega * t)
                    + b.velocity(n, 1) * Complex64::from_polar(1.0, b.omega * t))
                .re;
                assert!((r.u[n][1] - direct).abs() <= 1e-14);
            }
        }
        let dup = SolutionField::zeros(mesh, 2.0);
        assert!(reconstruct_time(&[&a, &dup], 0.0).is_err());
    }

    #[test]
    fn parseval_over_one_period() {
        let mesh = Arc::new(generate_channel(1.0, 1.0, 1, 1).unwrap());
        let mut steady = SolutionField::zeros(mesh.clone(), 0.0);
        let mut m1 = SolutionField::zeros(mesh.clone(), 1.0);
        let mut m3 = SolutionField::zeros(mesh, 3.0);
        steady.u_r[0][0] = 0.4;
        m1.u_r[0][0] = 1.0;
        m1.u_i[0][0] = -0.5;
        m3.u_r[0][0] = 0.2;
        m3.u_i[0][0] = 0.7;
        let period = 2.0 * std::f64::consts::PI;
        let samples = 64;
        let mean = (0..samples)
            .map(|k| {
                let r = reconstruct_time(&[&steady, &m1, &m3], period * k as f64 / samples as f64).unwrap();
                r.u[0][0] * r.u[0][0]
            })
            .sum::<f64>()
            / samples as f64;
        let expected = 0.4f64.powi(2) + 0.5 * (1.0 + 0.25) + 0.5 * (0.04 + 0.49);
        assert!((mean - expected).abs() <= 0.01 * expected, "{mean} vs {expected}");
    }

    #[test]
    fn pipe_geometry_recovered() {
        let g = PipeGeometry::from_mesh(&pipe()).unwrap();
        assert!((g.radius - 1.0).abs() < 1e-12 && (g.length - 4.0).abs() < 1e-12 && g.z_min == 0.0);
    }
}
