//! Fock-state lattices: the graph whose sites are basis states, whose
//! onsite energies are diagonal matrix elements and whose bonds are the
//! nonzero off-diagonal elements of a Hamiltonian.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{ladder_amplitude, spin_ops, Basis, Factor, HilbertError, Operator};

#[derive(Debug, Error)]
pub enum FslError {
    #[error("operator is not Hermitian (defect {0:e})")]
    NonHermitian(f64),
    #[error("unknown graph format {0:?}; expected dot or json")]
    UnknownFormat(String),
    #[error("analytic {what} at m = {m} is {analytic}, matrix gives {matrix}")]
    CrossCheck {
        what: &'static str,
        m: f64,
        analytic: f64,
        matrix: f64,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub const DEFAULT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub kind: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub labels: Vec<Label>,
    pub onsite: f64,
}

/// Directed bond `⟨to|H|from⟩ = weight`; its reverse is stored as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeGraph {
    pub basis: Basis,
    pub threshold: f64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Connected components, each sorted, ordered by their first node.
    pub components: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn components(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    for e in edges {
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

pub fn lattice_from_operator(h: &Operator) -> Result<LatticeGraph, FslError> {
    lattice_with_threshold(h, DEFAULT_THRESHOLD)
}

pub fn lattice_with_threshold(h: &Operator, threshold: f64) -> Result<LatticeGraph, FslError> {
    let defect = h.hermiticity_defect();
    if defect > threshold.max(1e-12) {
        return Err(FslError::NonHermitian(defect));
    }
    let basis = h.basis().clone();
    let nodes = (0..h.dim())
        .map(|i| Node {
            labels: basis
                .factors()
                .iter()
                .zip(basis.labels(i))
                .map(|(f, value)| Label {
                    kind: f.kind_name().to_string(),
                    value,
                })
                .collect(),
            onsite: h.get(i, i).re,
        })
        .collect::<Vec<_>>();
    let edges: Vec<Edge> = h
        .iter()
        .filter(|&(r, c, v)| r != c && v.norm() > threshold)
        .map(|(r, c, v)| Edge {
            from: c,
            to: r,
            weight: v,
        })
        .collect();
    let components = components(nodes.len(), &edges);
    Ok(LatticeGraph {
        basis,
        threshold,
        nodes,
        edges,
        components,
    })
}

impl LatticeGraph {
    /// Rebuild the matrix: onsite energies on the diagonal, bonds off it.
    pub fn to_operator(&self) -> Operator {
        let mut t: Vec<(usize, usize, C64)> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.onsite != 0.0)
            .map(|(i, n)| (i, i, C64::new(n.onsite, 0.0)))
            .collect();
        t.extend(self.edges.iter().map(|e| (e.to, e.from, e.weight)));
        Operator::from_triplets(self.basis.clone(), t)
    }

    /// Weight of the bond `from → to`, if present.
    pub fn weight(&self, from: usize, to: usize) -> Option<C64> {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map(|e| e.weight)
    }

    /// Largest `|w(i→j) - conj(w(j→i))|` over all bonds.
    pub fn pairing_defect(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| match self.weight(e.to, e.from) {
                Some(w) => (e.weight - w.conj()).norm(),
                None => e.weight.norm(),
            })
            .fold(0.0, f64::max)
    }

    /// Distinct label displacements of the bonds, in units of the smallest
    /// quantum-number step (half-units for spins, so `Sx²` moves `m` by 4).
    pub fn bond_steps(&self) -> BTreeSet<Vec<i64>> {
        self.edges
            .iter()
            .map(|e| {
                self.nodes[e.to]
                    .labels
                    .iter()
                    .zip(&self.nodes[e.from].labels)
                    .map(|(a, b)| (2.0 * (a.value - b.value)).round() as i64)
                    .collect()
            })
            .collect()
    }

    /// Every component is a path: node degrees at most two and one bond
    /// fewer than sites.
    pub fn is_chain_union(&self) -> bool {
        let mut deg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            deg[e.from] += 1;
        }
        if deg.iter().any(|&d| d > 2) {
            return false;
        }
        let mut comp_of = vec![0; self.nodes.len()];
        for (k, c) in self.components.iter().enumerate() {
            for &i in c {
                comp_of[i] = k;
            }
        }
        let mut bonds = vec![0usize; self.components.len()];
        for e in &self.edges {
            bonds[comp_of[e.from]] += 1;
        }
        self.components
            .iter()
            .zip(bonds)
            .all(|(c, b)| b / 2 + 1 == c.len())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph fsl {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = n
                .labels
                .iter()
                .map(|l| format!("{}={}", l.kind, l.value))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(s, "  n{i} [label=\"{label}\", onsite={}];", n.onsite);
        }
        for e in self.edges.iter().filter(|e| e.from < e.to) {
            let _ = writeln!(
                s,
                "  n{} -- n{} [weight_re={}, weight_im={}, penwidth={:.3}];",
                e.from,
                e.to,
                e.weight.re,
                e.weight.im,
                1.0 + e.weight.norm().ln_1p()
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Result<String, FslError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, FslError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = FslError;
    fn from_str(s: &str) -> Result<Self, FslError> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(FslError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn export_graph(g: &LatticeGraph, format: GraphFormat) -> Result<String, FslError> {
    match format {
        GraphFormat::Dot => Ok(g.to_dot()),
        GraphFormat::Json => g.to_json(),
    }
}

/// `Δ Sz - (λ/S) Sx² + h Sx`.
pub fn static_lmg(two_s: u32, delta: f64, lambda: f64, field_x: f64) -> Result<Operator, FslError> {
    let ops = spin_ops(two_s)?;
    let s = two_s as f64 / 2.0;
    let mut h = &ops.sz.scale_real(delta) - &ops.sx.matmul(&ops.sx).scale_real(lambda / s);
    if field_x != 0.0 {
        h = &h + &ops.sx.scale_real(field_x);
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmgBond {
    /// Lower end of the bond `m → m+2`.
    pub m: f64,
    /// `α_{m+} α_{m+1,+}`.
    pub t_m: f64,
    /// Matrix element `-(λ/S)(1/4) t_m`.
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmgSite {
    pub m: f64,
    /// `Δ m`.
    pub tilt: f64,
    /// `α_{m+}² + α_{m-}² = 2S(S+1) - 2m²`.
    pub alpha_sum: f64,
    /// `-(λ/S)(1/4) α_sum`, the interaction part of the diagonal.
    pub interaction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmgFsl {
    pub graph: LatticeGraph,
    pub bonds: Vec<LmgBond>,
    pub sites: Vec<LmgSite>,
}

/// Lattice of the static LMG with closed-form rates, checked entrywise
/// against the graph of the built matrix. The `1/4` comes from
/// `Sx = (S+ + S-)/2`.
pub fn lmg_fsl(two_s: u32, delta: f64, lambda: f64) -> Result<LmgFsl, FslError> {
    let graph = lattice_from_operator(&static_lmg(two_s, delta, lambda, 0.0)?)?;
    let s = two_s as f64 / 2.0;
    let d = two_s as usize + 1;
    let alpha = |i: usize, raise: bool| ladder_amplitude(two_s, 2 * i as i64 - two_s as i64, raise);
    let scale = -lambda / s / 4.0;
    let mut bonds = Vec::new();
    let mut sites = Vec::new();
    for i in 0..d {
        let m = i as f64 - s;
        let alpha_sum = alpha(i, true).powi(2) + alpha(i, false).powi(2);
        let site = LmgSite {
            m,
            tilt: delta * m,
            alpha_sum,
            interaction: scale * alpha_sum,
        };
        let matrix = graph.nodes[i].onsite;
        if (site.tilt + site.interaction - matrix).abs() > 1e-12 * (1.0 + matrix.abs()) {
            return Err(FslError::CrossCheck {
                what: "onsite energy",
                m,
                analytic: site.tilt + site.interaction,
                matrix,
            });
        }
        sites.push(site);
        if i + 2 < d {
            let t_m = alpha(i, true) * alpha(i + 1, true);
            let bond = LmgBond {
                m,
                t_m,
                weight: scale * t_m,
            };
            let matrix = graph.weight(i, i + 2).map(|w| w.re).unwrap_or(0.0);
            if (bond.weight - matrix).abs() > 1e-12 * (1.0 + matrix.abs()) {
                return Err(FslError::CrossCheck {
                    what: "bond weight",
                    m,
                    analytic: bond.weight,
                    matrix,
                });
            }
            bonds.push(bond);
        }
    }
    Ok(LmgFsl { graph, bonds, sites })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// A single path.
    Chain,
    /// Several disconnected paths, one per conserved label.
    DecoupledChains { count: usize },
    /// Paths on qubit ⊗ lattice where every lattice hop flips the qubit.
    SpinFlipChain { count: usize },
    /// Independent hops along the physical and the lattice direction.
    SquareLattice,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetFsl {
    pub graph: LatticeGraph,
    pub geometry: Geometry,
}

/// Lattice of an extended-space Floquet operator with its geometry read off
/// from the bond displacements and the component shapes.
pub fn floquet_fsl(hf: &Operator) -> Result<FloquetFsl, FslError> {
    let graph = lattice_from_operator(hf)?;
    let lattice_axis = graph.basis.euclidean_position();
    let steps = graph.bond_steps();
    let geometry = match lattice_axis {
        None => classify_plain(&graph),
        Some(axis) => {
            let pure_lattice = steps
                .iter()
                .any(|v| v[axis] != 0 && v.iter().enumerate().all(|(k, &x)| k == axis || x == 0));
            let pure_physical = steps.iter().any(|v| v[axis] == 0);
            let flips = steps.iter().all(|v| v[axis] == 0 || v.iter().enumerate().any(|(k, &x)| k != axis && x != 0));
            if pure_lattice && pure_physical {
                Geometry::SquareLattice
            } else if graph.is_chain_union() {
                let qubit_only = graph.basis.factors().len() == 2 && graph.basis.factors()[0] == Factor::Qubit;
                let count = graph.components.len();
                if qubit_only && flips && !pure_lattice {
                    Geometry::SpinFlipChain { count }
                } else {
                    classify_plain(&graph)
                }
            } else {
                Geometry::Other
            }
        }
    };
    Ok(FloquetFsl { graph, geometry })
}

fn classify_plain(graph: &LatticeGraph) -> Geometry {
    if !graph.is_chain_union() {
        Geometry::Other
    } else if graph.components.len() == 1 {
        Geometry::Chain
    } else {
        Geometry::DecoupledChains {
            count: graph.components.len(),
        }
    }
}
