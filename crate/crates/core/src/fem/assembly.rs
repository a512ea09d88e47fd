//! Global block system for the real/imaginary split of the stabilized
//! frequency-domain Stokes problem.
//!
//! Unknowns are interleaved per node as `[u_r | p_r | u_i | p_i]`, giving
//! blocks of size `2 (n_sd + 1)`. For a node pair `(A, B)` the block is
//!
//! ```text
//!            u_r         p_r        u_i          p_i
//! u_r  [  mu L d      -G_AB     -rho w M d      0     ]
//! p_r  [ -D_AB       -tau_r L       0        tau_i L  ]
//! u_i  [ -rho w M d     0        -mu L d       G_AB   ]
//! p_i  [   0          tau_i L      D_AB      tau_r L  ]
//! ```
//!
//! where the `tau`-weighted Laplacians are accumulated element by element.
//! The momentum rows of the imaginary part and the continuity rows of the
//! real part carry a flipped sign so that the matrix is symmetric.
//!
//! Dirichlet velocity data is lifted into the right-hand side. Constrained
//! velocity unknowns keep a unit diagonal and zero row, column and
//! right-hand side, which leaves them decoupled at exactly zero during the
//! solve; the prescribed values are re-injected afterwards.

use rayon::prelude::*;

use super::config::CaseConfig;
use super::element::{mass_factor, metric_from_gradients, shape_gradients, stabilization_tau};
use crate::error::{Error, Result};
use crate::linsolve::{BlockPattern, BlockSparseMatrix};
use crate::mesh::geometry::Point;
use crate::mesh::{BoundaryKind, Mesh};

/// Position of each field inside a node's block of unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub dimension: usize,
}

impl DofLayout {
    pub fn block_size(&self) -> usize {
        2 * (self.dimension + 1)
    }
    pub fn u_r(&self, d: usize) -> usize {
        d
    }
    pub fn p_r(&self) -> usize {
        self.dimension
    }
    pub fn u_i(&self, d: usize) -> usize {
        self.dimension + 1 + d
    }
    pub fn p_i(&self) -> usize {
        2 * self.dimension + 1
    }
    pub fn is_velocity(&self, local: usize) -> bool {
        local != self.p_r() && local != self.p_i()
    }
}

/// Structural pattern of one node-pair block: `8 n_sd + 4` slots.
pub fn stokes_pattern(dimension: usize) -> BlockPattern {
    let l = DofLayout { dimension };
    let mut slots = Vec::new();
    for d in 0..dimension {
        slots.extend_from_slice(&[
            (l.u_r(d), l.u_r(d)),
            (l.u_r(d), l.p_r()),
            (l.u_r(d), l.u_i(d)),
            (l.p_r(), l.u_r(d)),
            (l.u_i(d), l.u_r(d)),
            (l.u_i(d), l.u_i(d)),
            (l.u_i(d), l.p_i()),
            (l.p_i(), l.u_i(d)),
        ]);
    }
    slots.extend_from_slice(&[
        (l.p_r(), l.p_r()),
        (l.p_r(), l.p_i()),
        (l.p_i(), l.p_r()),
        (l.p_i(), l.p_i()),
    ]);
    BlockPattern::new(l.block_size(), slots)
}

/// Slot indices of every term kind inside the compact block storage.
#[derive(Debug, Clone)]
struct SlotMap {
    dimension: usize,
    ur_ur: [usize; 3],
    ur_pr: [usize; 3],
    ur_ui: [usize; 3],
    pr_ur: [usize; 3],
    ui_ur: [usize; 3],
    ui_ui: [usize; 3],
    ui_pi: [usize; 3],
    pi_ui: [usize; 3],
    pr_pr: usize,
    pr_pi: usize,
    pi_pr: usize,
    pi_pi: usize,
}

impl SlotMap {
    fn new(layout: DofLayout, pattern: &BlockPattern) -> Self {
        let idx = |r: usize, c: usize| pattern.index_of(r, c).expect("slot is in the Stokes pattern");
        let per_dim = |f: &dyn Fn(usize) -> (usize, usize)| {
            let mut out = [usize::MAX; 3];
            for (d, slot) in out.iter_mut().enumerate().take(layout.dimension) {
                let (r, c) = f(d);
                *slot = idx(r, c);
            }
            out
        };
        let l = layout;
        SlotMap {
            dimension: l.dimension,
            ur_ur: per_dim(&|d| (l.u_r(d), l.u_r(d))),
            ur_pr: per_dim(&|d| (l.u_r(d), l.p_r())),
            ur_ui: per_dim(&|d| (l.u_r(d), l.u_i(d))),
            pr_ur: per_dim(&|d| (l.p_r(), l.u_r(d))),
            ui_ur: per_dim(&|d| (l.u_i(d), l.u_r(d))),
            ui_ui: per_dim(&|d| (l.u_i(d), l.u_i(d))),
            ui_pi: per_dim(&|d| (l.u_i(d), l.p_i())),
            pi_ui: per_dim(&|d| (l.p_i(), l.u_i(d))),
            pr_pr: idx(l.p_r(), l.p_r()),
            pr_pi: idx(l.p_r(), l.p_i()),
            pi_pr: idx(l.p_i(), l.p_r()),
            pi_pi: idx(l.p_i(), l.p_i()),
        }
    }

    /// Adds `scale` times the element contribution for pair (A, B).
    fn add(&self, out: &mut [f64], t: &PairTerms, mu: f64, rho_omega: f64) {
        for d in 0..self.dimension {
            out[self.ur_ur[d]] += mu * t.l;
            out[self.ur_pr[d]] -= t.g_ab[d];
            out[self.ur_ui[d]] -= rho_omega * t.m;
            out[self.pr_ur[d]] -= t.g_ba[d];
            out[self.ui_ur[d]] -= rho_omega * t.m;
            out[self.ui_ui[d]] -= mu * t.l;
            out[self.ui_pi[d]] += t.g_ab[d];
            out[self.pi_ui[d]] += t.g_ba[d];
        }
        out[self.pr_pr] -= t.tau_r_l;
        out[self.pr_pi] += t.tau_i_l;
        out[self.pi_pr] += t.tau_i_l;
        out[self.pi_pi] += t.tau_r_l;
    }
}

/// Element contribution to one node pair before the block layout is applied.
#[derive(Debug, Clone, Copy, Default)]
struct PairTerms {
    l: f64,
    m: f64,
    tau_r_l: f64,
    tau_i_l: f64,
    g_ab: [f64; 3],
    g_ba: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
struct ElementData {
    grads: [[f64; 3]; 4],
    measure: f64,
    tau_r: f64,
    tau_i: f64,
}

impl ElementData {
    fn pair(&self, dimension: usize, a: usize, b: usize) -> PairTerms {
        let v = self.measure;
        let l = v * (0..dimension).map(|i| self.grads[a][i] * self.grads[b][i]).sum::<f64>();
        let mf = mass_factor(dimension) * v;
        let share = v / (dimension + 1) as f64;
        let mut t = PairTerms {
            l,
            m: if a == b { 2.0 * mf } else { mf },
            tau_r_l: self.tau_r * l,
            tau_i_l: self.tau_i * l,
            ..Default::default()
        };
        for i in 0..dimension {
            t.g_ab[i] = self.grads[a][i] * share;
            t.g_ba[i] = self.grads[b][i] * share;
        }
        t
    }
}

/// Whether row work is spread over the rayon pool. Both modes produce
/// bit-identical systems: each block row is summed in ascending element order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssemblyMode {
    #[default]
    Parallel,
    Serial,
}

/// Consistent nodal integrals `int_patch N_A h` of constant boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalLoad {
    pub real: Vec<Point>,
    pub imag: Vec<Point>,
}

/// Distributes constant traction `(h_r, h_i)` on `patch` to its nodes: every
/// facet hands `measure / n_facet_nodes * h` to each of its nodes.
pub fn boundary_load(mesh: &Mesh, patch: &str, h_r: &Point, h_i: &Point) -> Result<NodalLoad> {
    let mut load = NodalLoad {
        real: vec![[0.0; 3]; mesh.num_nodes()],
        imag: vec![[0.0; 3]; mesh.num_nodes()],
    };
    let per_node = 1.0 / mesh.dimension() as f64;
    for facet in mesh.patch(patch)? {
        let share = mesh.boundary_facet_geometry(facet)?.measure * per_node;
        for &n in facet {
            for d in 0..3 {
                load.real[n][d] += share * h_r[d];
                load.imag[n][d] += share * h_i[d];
            }
        }
    }
    Ok(load)
}

/// The assembled, Dirichlet-reduced linear system `K x = -R`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub layout: DofLayout,
    pub matrix: BlockSparseMatrix,
    /// Right-hand side `-R` in the interleaved layout.
    pub rhs: Vec<f64>,
    /// Prescribed `(g_r, g_i)` for Dirichlet nodes.
    pub dirichlet: Vec<Option<(Point, Point)>>,
    /// Per-element `(tau_r, tau_i)`.
    pub element_tau: Vec<(f64, f64)>,
}

impl BlockSystem {
    pub fn num_nodes(&self) -> usize {
        self.dirichlet.len()
    }

    /// Slot of every node among the free-velocity nodes; `None` for
    /// Dirichlet nodes. Pressure unknowns exist at every node.
    pub fn free_node_index(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.dirichlet
            .iter()
            .map(|g| {
                if g.is_some() {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }

    /// Number of genuine unknowns: velocities at free nodes plus both
    /// pressures everywhere.
    pub fn num_unknowns(&self) -> usize {
        let free = self.dirichlet.iter().filter(|g| g.is_none()).count();
        2 * self.layout.dimension * free + 2 * self.num_nodes()
    }

    /// Interleaved indices of the genuine unknowns in segmented order
    /// `[U_r | P_r | U_i | P_i]`, for exporting the system in its textbook
    /// four-segment form.
    pub fn segment_order(&self) -> Vec<usize> {
        let l = self.layout;
        let bs = l.block_size();
        let free: Vec<usize> = (0..self.num_nodes()).filter(|&n| self.dirichlet[n].is_none()).collect();
        let mut order = Vec::with_capacity(self.num_unknowns());
        order.extend(free.iter().flat_map(|&n| (0..l.dimension).map(move |d| n * bs + l.u_r(d))));
        order.extend((0..self.num_nodes()).map(|n| n * bs + l.p_r()));
        order.extend(free.iter().flat_map(|&n| (0..l.dimension).map(move |d| n * bs + l.u_i(d))));
        order.extend((0..self.num_nodes()).map(|n| n * bs + l.p_i()));
        order
    }

    /// Splits an interleaved solution into nodal fields and re-injects the
    /// Dirichlet values.
    pub fn expand_solution(&self, x: &[f64]) -> NodalFields {
        let l = self.layout;
        let bs = l.block_size();
        let n = self.num_nodes();
        let mut out = NodalFields {
            u_r: vec![[0.0; 3]; n],
            u_i: vec![[0.0; 3]; n],
            p_r: vec![0.0; n],
            p_i: vec![0.0; n],
        };
        for node in 0..n {
            let xb = &x[node * bs..(node + 1) * bs];
            match &self.dirichlet[node] {
                Some((gr, gi)) => {
                    out.u_r[node] = *gr;
                    out.u_i[node] = *gi;
                }
                None => {
                    for d in 0..l.dimension {
                        out.u_r[node][d] = xb[l.u_r(d)];
                        out.u_i[node][d] = xb[l.u_i(d)];
                    }
                }
            }
            out.p_r[node] = xb[l.p_r()];
            out.p_i[node] = xb[l.p_i()];
        }
        out
    }
}

/// Nodal real/imaginary velocity and pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFields {
    pub u_r: Vec<Point>,
    pub u_i: Vec<Point>,
    pub p_r: Vec<f64>,
    pub p_i: Vec<f64>,
}

/// Node-to-node adjacency through shared elements, each row sorted and
/// including the diagonal.
pub fn node_adjacency(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.num_nodes()];
    for conn in mesh.elements() {
        for &a in conn {
            adj[a].extend_from_slice(conn);
        }
    }
    adj.par_iter_mut().for_each(|row| {
        row.sort_unstable();
        row.dedup();
    });
    adj
}

fn node_elements(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); mesh.num_nodes()];
    for (e, conn) in mesh.elements().enumerate() {
        for &a in conn {
            out[a].push(e);
        }
    }
    out
}

pub fn assemble(mesh: &Mesh, config: &CaseConfig) -> Result<BlockSystem> {
    assemble_with(mesh, config, AssemblyMode::Parallel)
}

pub fn assemble_with(mesh: &Mesh, config: &CaseConfig, mode: AssemblyMode) -> Result<BlockSystem> {
    config.validate()?;
    let dim = mesh.dimension();
    let layout = DofLayout { dimension: dim };
    let bs = layout.block_size();

    // boundary data
    let mut dirichlet: Vec<Option<(Point, Point)>> = vec![None; mesh.num_nodes()];
    let mut neumann = NodalLoad {
        real: vec![[0.0; 3]; mesh.num_nodes()],
        imag: vec![[0.0; 3]; mesh.num_nodes()],
    };
    for bc in &config.boundary_conditions {
        if !mesh.has_patch(&bc.patch) {
            return Err(Error::UnknownPatch(bc.patch.clone()));
        }
        if bc.value_real.len() != dim || bc.value_imag.len() != dim {
            return Err(Error::Config(format!(
                "condition on `{}` must have {dim} components",
                bc.patch
            )));
        }
        let (real, imag) = bc.values();
        match bc.kind {
            BoundaryKind::Dirichlet => {
                let nodes = mesh.patch_nodes(&bc.patch)?;
                if nodes.is_empty() {
                    return Err(Error::Config(format!(
                        "Dirichlet condition on `{}` which has no facets",
                        bc.patch
                    )));
                }
                for n in nodes {
                    dirichlet[n] = Some((real, imag));
                }
            }
            BoundaryKind::Neumann => {
                let load = boundary_load(mesh, &bc.patch, &real, &imag)?;
                for n in 0..mesh.num_nodes() {
                    for d in 0..3 {
                        neumann.real[n][d] += load.real[n][d];
                        neumann.imag[n][d] += load.imag[n][d];
                    }
                }
            }
        }
    }

    // element data
    let data: Vec<ElementData> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let coords = mesh.element_coords(e);
            let sg = shape_gradients(dim, &coords).map_err(|err| match err {
                Error::DegenerateElement { measure, .. } => Error::DegenerateElement { element: e, measure },
                other => other,
            })?;
            let (tau_r, tau_i) = stabilization_tau(config, metric_from_gradients(&sg).xi_colon_xi);
            Ok(ElementData {
                grads: sg.grads,
                measure: sg.measure,
                tau_r,
                tau_i,
            })
        })
        .collect::<Result<_>>()?;

    let pattern = stokes_pattern(dim);
    let slots = SlotMap::new(layout, &pattern);
    let ns = pattern.len();
    let mut matrix = BlockSparseMatrix::zeros(pattern, &node_adjacency(mesh));
    let node_elems = node_elements(mesh);
    let (mu, rho_omega) = (config.mu, config.rho * config.omega);

    let fill_row = |a: usize, cols: &[usize], vals: &mut [f64]| {
        for &e in &node_elems[a] {
            let conn = mesh.element(e);
            let la = conn.iter().position(|&n| n == a).expect("node is in element");
            for (lb, &b) in conn.iter().enumerate() {
                let k = cols.binary_search(&b).expect("element pair is in adjacency");
                let terms = data[e].pair(dim, la, lb);
                slots.add(&mut vals[k * ns..(k + 1) * ns], &terms, mu, rho_omega);
            }
        }
    };
    match mode {
        AssemblyMode::Parallel => matrix.rows_mut().for_each(|(a, cols, vals)| fill_row(a, cols, vals)),
        AssemblyMode::Serial => {
            for a in 0..mesh.num_nodes() {
                let (cols, vals) = matrix.row_mut(a);
                fill_row(a, cols, vals);
            }
        }
    }

    // right-hand side -R: tractions, then lifting of Dirichlet data
    let mut rhs = vec![0.0; matrix.dim()];
    let mut g_full = vec![0.0; matrix.dim()];
    for n in 0..mesh.num_nodes() {
        for d in 0..dim {
            rhs[n * bs + layout.u_r(d)] = neumann.real[n][d];
            rhs[n * bs + layout.u_i(d)] = -neumann.imag[n][d];
        }
        if let Some((gr, gi)) = &dirichlet[n] {
            for d in 0..dim {
                g_full[n * bs + layout.u_r(d)] = gr[d];
                g_full[n * bs + layout.u_i(d)] = gi[d];
            }
        }
    }
    if g_full.iter().any(|&v| v != 0.0) {
        let mut lifted = vec![0.0; matrix.dim()];
        matrix.matvec(&g_full, &mut lifted)?;
        for (r, k) in rhs.iter_mut().zip(&lifted) {
            *r -= k;
        }
    }

    // decouple constrained velocity unknowns
    let is_fixed = |n: usize| dirichlet[n].is_some();
    let velocity_slots: Vec<(usize, bool, bool)> = matrix
        .pattern()
        .slots()
        .map(|(r, c)| (r * bs + c, layout.is_velocity(r), layout.is_velocity(c)))
        .collect();
    let unit_slots: Vec<usize> = (0..dim)
        .flat_map(|d| [slots.ur_ur[d], slots.ui_ui[d]])
        .collect();
    matrix.rows_mut().for_each(|(a, cols, vals)| {
        let row_fixed = is_fixed(a);
        for (k, &b) in cols.iter().enumerate() {
            let col_fixed = is_fixed(b);
            if !row_fixed && !col_fixed {
                continue;
            }
            let block = &mut vals[k * ns..(k + 1) * ns];
            for (s, &(_, rv, cv)) in velocity_slots.iter().enumerate() {
                if (row_fixed && rv) || (col_fixed && cv) {
                    block[s] = 0.0;
                }
            }
            if a == b {
                for &s in &unit_slots {
                    block[s] = 1.0;
                }
            }
        }
    });
    for n in 0..mesh.num_nodes() {
        if is_fixed(n) {
            for local in 0..bs {
                if layout.is_velocity(local) {
                    rhs[n * bs + local] = 0.0;
                }
            }
        }
    }

    Ok(BlockSystem {
        layout,
        matrix,
        rhs,
        dirichlet,
        element_tau: data.iter().map(|d| (d.tau_r, d.tau_i)).collect(),
    })
}
