use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{rank_on_columns, rank_on_columns_generic, rref};
use super::lattice::{Lattice, StringOperator};
use super::StabilizerError;
use crate::dense::{DensityOperator, FactorSpace, OPERATOR_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Vertex { x: usize, y: usize },
    Plaquette { x: usize, y: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Block {
    gens: Vec<Generator>,
    rows: Vec<Vec<u32>>,
    phase: Vec<u32>,
}

/// Pure CSS stabilizer state of the qudit toric code.
///
/// Generators are the vertex operators `A_v = prod X^{±1}` (one dropped, since their
/// product is the identity) and the plaquette operators `B_p`. Each generator `g`
/// carries a phase `φ` with `g|ψ⟩ = ω^φ |ψ⟩`, `ω = exp(2πi/p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerState {
    lattice: Lattice,
    x: Block,
    z: Block,
}

/// Entropy of a region together with its rank certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionEntropy {
    pub edges: usize,
    /// Dimension over `F_p` of the stabilizer subgroup supported inside the region.
    pub supported_rank: usize,
    /// `S = units · ln p`.
    pub units: usize,
}

impl RegionEntropy {
    pub fn nats(&self, p: u32) -> f64 {
        self.units as f64 * f64::from(p).ln()
    }
}

/// Vertex and plaquette stabilizers of the ground state, all with phase 0.
pub fn build_ground_state(lat: &Lattice) -> Result<StabilizerState, StabilizerError> {
    let e = lat.edges();
    let mut x = Block { gens: vec![], rows: vec![], phase: vec![] };
    for vy in 0..=lat.height {
        for vx in 0..=lat.width {
            if (vx, vy) == (0, 0) {
                continue;
            }
            let mut row = vec![0; e];
            for (edge, s) in lat.star(vx, vy) {
                row[edge] = lat.modp(s);
            }
            x.gens.push(Generator::Vertex { x: vx, y: vy });
            x.rows.push(row);
            x.phase.push(0);
        }
    }
    let mut z = Block { gens: vec![], rows: vec![], phase: vec![] };
    for py in 0..lat.height {
        for px in 0..lat.width {
            let mut row = vec![0; e];
            for (edge, s) in lat.boundary(px, py) {
                row[edge] = lat.modp(s);
            }
            z.gens.push(Generator::Plaquette { x: px, y: py });
            z.rows.push(row);
            z.phase.push(0);
        }
    }
    let state = StabilizerState { lattice: *lat, x, z };
    let rank = state.rank();
    if rank != e || state.x.rows.len() + state.z.rows.len() != e {
        return Err(StabilizerError::RankDeficiency { rank, expected: e });
    }
    Ok(state)
}

impl StabilizerState {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn generator_count(&self) -> usize {
        self.x.rows.len() + self.z.rows.len()
    }

    pub fn generator_labels(&self) -> Vec<Generator> {
        self.x.gens.iter().chain(&self.z.gens).copied().collect()
    }

    /// Symplectic rows `(X-part | Z-part)` of length `2·#edges`.
    pub fn generators(&self) -> Vec<Vec<u32>> {
        let e = self.lattice.edges();
        let zeros = vec![0; e];
        let xs = self.x.rows.iter().map(|r| [r.as_slice(), &zeros].concat());
        let zs = self.z.rows.iter().map(|r| [zeros.as_slice(), r].concat());
        xs.chain(zs).collect()
    }

    pub fn phases(&self) -> Vec<u32> {
        self.x.phase.iter().chain(&self.z.phase).copied().collect()
    }

    /// Row rank of the symplectic generator matrix.
    pub fn rank(&self) -> usize {
        let all: Vec<usize> = (0..self.lattice.edges()).collect();
        rank_on_columns(&self.x.rows, &all, self.lattice.p) + rank_on_columns(&self.z.rows, &all, self.lattice.p)
    }

    /// First pair of generators whose symplectic product is nonzero.
    pub fn first_anticommuting_pair(&self) -> Option<(Generator, Generator)> {
        let p = u64::from(self.lattice.p);
        for (gx, xr) in self.x.gens.iter().zip(&self.x.rows) {
            for (gz, zr) in self.z.gens.iter().zip(&self.z.rows) {
                let dot: u64 = xr.iter().zip(zr).map(|(&a, &b)| u64::from(a) * u64::from(b)).sum();
                if !dot.is_multiple_of(p) {
                    return Some((*gx, *gz));
                }
            }
        }
        None
    }

    /// The state `W |ψ⟩` for `W = X^{op.x} Z^{op.z}`.
    pub fn apply(&self, op: &StringOperator) -> Self {
        let lat = self.lattice;
        let dot = |a: &[u32], b: &[u32]| -> i64 {
            a.iter().zip(b).map(|(&u, &v)| i64::from(u) * i64::from(v)).sum()
        };
        let mut out = self.clone();
        if op.z.iter().any(|&w| w != 0) {
            for (row, ph) in out.x.rows.iter().zip(out.x.phase.iter_mut()) {
                *ph = lat.modp(i64::from(*ph) - dot(row, &op.z));
            }
        }
        if op.x.iter().any(|&w| w != 0) {
            for (row, ph) in out.z.rows.iter().zip(out.z.phase.iter_mut()) {
                *ph = lat.modp(i64::from(*ph) + dot(row, &op.x));
            }
        }
        out
    }

    fn complement(&self, region: &[usize]) -> Vec<usize> {
        let mask = region_mask(&self.lattice, region);
        (0..self.lattice.edges()).filter(|&e| !mask[e]).collect()
    }

    /// `S(R) = (|R| - g_R) ln p` with `g_R = #generators - rank(G restricted to the complement)`.
    ///
    /// Panics if an edge id is out of range.
    pub fn region_entropy(&self, region: &[usize]) -> RegionEntropy {
        let region = normalized(&self.lattice, region);
        let comp = self.complement(&region);
        let p = self.lattice.p;
        let g = self.generator_count() - rank_on_columns(&self.x.rows, &comp, p) - rank_on_columns(&self.z.rows, &comp, p);
        RegionEntropy { edges: region.len(), supported_rank: g, units: region.len() - g }
    }

    /// `rank(G restricted to R) - |R|`, which equals `S(R)/ln p` for a pure state.
    /// Uses the general-`p` eliminator for every `p` as an independent cross-check.
    pub fn region_entropy_dual(&self, region: &[usize]) -> usize {
        let region = normalized(&self.lattice, region);
        let p = self.lattice.p;
        rank_on_columns_generic(&self.x.rows, &region, p) + rank_on_columns_generic(&self.z.rows, &region, p)
            - region.len()
    }

    pub fn reduce(&self, region: &[usize]) -> Reduction {
        RegionReducer::new(self, region).apply(self)
    }

    /// Phase of an X-type operator if it lies in the stabilizer group.
    pub fn x_eigenphase(&self, op: &[u32]) -> Option<u32> {
        self.eigenphase(op, PauliKind::X)
    }

    /// Phase of a Z-type operator if it lies in the stabilizer group.
    pub fn z_eigenphase(&self, op: &[u32]) -> Option<u32> {
        self.eigenphase(op, PauliKind::Z)
    }

    fn eigenphase(&self, op: &[u32], kind: PauliKind) -> Option<u32> {
        let support: Vec<usize> = (0..op.len()).filter(|&e| op[e] != 0).collect();
        let red = self.reduce(&support);
        let target: Vec<u32> = red.region.iter().map(|&e| op[e]).chain([0]).collect();
        red.phase_of(kind, &target, self.lattice.p)
    }

    /// Reduced density operator on a small region, assembled as
    /// `p^{-|R|} sum_g conj(λ_g) g` over the supported subgroup.
    pub fn dense_reduction(&self, region: &[usize]) -> Result<DensityOperator, StabilizerError> {
        let red = self.reduce(region);
        let p = self.lattice.p as usize;
        let k = red.region.len();
        let dim = p.checked_pow(k as u32).filter(|&d| d <= OPERATOR_CAP).ok_or(StabilizerError::RegionTooLarge {
            edges: k,
            cap: OPERATOR_CAP,
        })?;
        let space = FactorSpace::new(red.region.iter().map(|&e| (e, p)).collect(), OPERATOR_CAP)?;
        let basis: Vec<(PauliKind, &Vec<u32>)> = red
            .x
            .iter()
            .map(|r| (PauliKind::X, r))
            .chain(red.z.iter().map(|r| (PauliKind::Z, r)))
            .collect();
        let omega = |k: u64| Complex64::from_polar(1.0, 2.0 * PI * (k % p as u64) as f64 / p as f64);
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let mut coeffs = vec![0usize; basis.len()];
        let norm = 1.0 / dim as f64;
        loop {
            let mut x = vec![0usize; k];
            let mut z = vec![0usize; k];
            let mut phase = 0usize;
            for (&c, (kind, row)) in coeffs.iter().zip(&basis) {
                let target = if *kind == PauliKind::X { &mut x } else { &mut z };
                for j in 0..k {
                    target[j] = (target[j] + c * row[j] as usize) % p;
                }
                phase = (phase + c * row[k] as usize) % p;
            }
            // X^x Z^z |j⟩ = ω^{z·j} |j + x⟩, weighted by conj(ω^phase).
            for col in 0..dim {
                let digits = space.digits(col);
                let zj: usize = digits.iter().zip(&z).map(|(a, b)| a * b).sum();
                let shifted: Vec<usize> = digits.iter().zip(&x).map(|(a, b)| (a + b) % p).collect();
                let row = space.index(&shifted);
                m[(row, col)] += omega((zj + p * p - phase) as u64) * norm;
            }
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    return Ok(DensityOperator::new(space, m)?);
                }
                coeffs[i] += 1;
                if coeffs[i] < p {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }
}

fn region_mask(lat: &Lattice, region: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; lat.edges()];
    for &e in region {
        assert!(e < lat.edges(), "edge {e} is outside the lattice");
        mask[e] = true;
    }
    mask
}

fn normalized(lat: &Lattice, region: &[usize]) -> Vec<usize> {
    let mask = region_mask(lat, region);
    (0..lat.edges()).filter(|&e| mask[e]).collect()
}

/// Subtracts multiples of RREF `rows` (pivots `pivots`) from `target`.
fn reduce_against(target: &mut [u32], rows: &[Vec<u32>], pivots: &[usize], p: u32) {
    for (row, &c) in rows.iter().zip(pivots) {
        let f = target[c];
        if f == 0 {
            continue;
        }
        let m = p - f;
        for (t, r) in target.iter_mut().zip(row) {
            *t = (*t + m * r) % p;
        }
    }
}

/// Canonical form of a reduced state: RREF over the region columns of the supported
/// subgroup, each row followed by its phase. Equal forms mean equal reductions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub region: Vec<usize>,
    pub x: Vec<Vec<u32>>,
    pub z: Vec<Vec<u32>>,
}

/// A group element that tells two reductions apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: PauliKind,
    /// `(edge, exponent)` with nonzero exponents.
    pub support: Vec<(usize, u32)>,
    /// Phase of the element in each of the two states; `None` if it is not in that group.
    pub phases: (Option<u32>, Option<u32>),
}

impl Witness {
    /// Names the operator as a vertex or plaquette stabilizer when it is one (up to a power).
    pub fn describe(&self, lat: &Lattice) -> String {
        let edges: Vec<usize> = self.support.iter().map(|&(e, _)| e).collect();
        let sorted_matches = |mut cand: Vec<usize>| {
            cand.sort_unstable();
            cand == edges
        };
        let named = match self.kind {
            PauliKind::X => (0..=lat.height)
                .flat_map(|y| (0..=lat.width).map(move |x| (x, y)))
                .find(|&(x, y)| sorted_matches(lat.star(x, y).iter().map(|s| s.0).collect()))
                .map(|(x, y)| format!("vertex operator at ({x},{y})")),
            PauliKind::Z => (0..lat.height)
                .flat_map(|y| (0..lat.width).map(move |x| (x, y)))
                .find(|&(x, y)| sorted_matches(lat.boundary(x, y).iter().map(|s| s.0).collect()))
                .map(|(x, y)| format!("plaquette operator at ({x},{y})")),
        };
        let phase = |ph: Option<u32>| ph.map_or("absent".to_string(), |v| v.to_string());
        let what = named.unwrap_or_else(|| {
            let kind = if self.kind == PauliKind::X { "X" } else { "Z" };
            let names: Vec<String> = edges.iter().map(|&e| lat.edge_name(e)).collect();
            format!("{kind}-type loop on {} edges [{}]", edges.len(), names.join(" "))
        });
        format!("{what}, phases {} vs {}", phase(self.phases.0), phase(self.phases.1))
    }
}

impl Reduction {
    pub fn stabilizer_rank(&self) -> usize {
        self.x.len() + self.z.len()
    }

    fn pivots(&self, kind: PauliKind) -> Vec<usize> {
        let rows = if kind == PauliKind::X { &self.x } else { &self.z };
        rows.iter().map(|r| r.iter().position(|&v| v != 0).expect("canonical rows are nonzero")).collect()
    }

    /// First canonical row that differs, or `None` if the reductions are equal.
    pub fn first_difference(&self, other: &Self) -> Option<Witness> {
        assert_eq!(self.region, other.region, "reductions on different regions");
        let k = self.region.len();
        for (kind, a, b) in [(PauliKind::X, &self.x, &other.x), (PauliKind::Z, &self.z, &other.z)] {
            for i in 0..a.len().max(b.len()) {
                let (ra, rb) = (a.get(i), b.get(i));
                if ra == rb {
                    continue;
                }
                let op = ra.or(rb).expect("one side has the row");
                let same_op = matches!((ra, rb), (Some(x), Some(y)) if x[..k] == y[..k]);
                let phases = if same_op {
                    (ra.map(|r| r[k]), rb.map(|r| r[k]))
                } else {
                    (ra.map(|r| r[k]), None)
                };
                return Some(self.witness(kind, &op[..k], phases));
            }
        }
        None
    }

    /// Like [`Self::first_difference`], but prefers a single vertex or plaquette operator
    /// inside the region whose phase differs.
    pub fn local_difference(&self, other: &Self, lat: &Lattice) -> Option<Witness> {
        let fallback = self.first_difference(other)?;
        let pos = |e: usize| self.region.binary_search(&e).ok();
        let stars = (0..=lat.height).flat_map(|y| (0..=lat.width).map(move |x| (x, y)));
        let plaqs = (0..lat.height).flat_map(|y| (0..lat.width).map(move |x| (x, y)));
        let candidates = stars
            .map(|(x, y)| (PauliKind::X, lat.star(x, y)))
            .chain(plaqs.map(|(x, y)| (PauliKind::Z, lat.boundary(x, y).to_vec())));
        for (kind, support) in candidates {
            let mut op = vec![0; self.region.len() + 1];
            let inside = support.iter().all(|&(e, s)| pos(e).map(|i| op[i] = lat.modp(s)).is_some());
            if !inside {
                continue;
            }
            let (a, b) = (self.phase_of(kind, &op, lat.p), other.phase_of(kind, &op, lat.p));
            if a != b {
                return Some(self.witness(kind, &op[..self.region.len()], (a, b)));
            }
        }
        Some(fallback)
    }

    fn phase_of(&self, kind: PauliKind, op: &[u32], p: u32) -> Option<u32> {
        let rows = if kind == PauliKind::X { &self.x } else { &self.z };
        let mut t = op.to_vec();
        reduce_against(&mut t, rows, &self.pivots(kind), p);
        let k = self.region.len();
        t[..k].iter().all(|&v| v == 0).then(|| (p - t[k]) % p)
    }

    /// A group element common to both reductions with different phases; its existence
    /// is equivalent to the two reduced states being orthogonal.
    pub fn orthogonality_witness(&self, other: &Self, p: u32) -> Option<Witness> {
        assert_eq!(self.region, other.region, "reductions on different regions");
        let k = self.region.len();
        for (kind, a, b) in [(PauliKind::X, &self.x, &other.x), (PauliKind::Z, &self.z, &other.z)] {
            let pivots = other.pivots(kind);
            // Residual of each row of `a` modulo the group of `b`, carrying the original row along.
            let mut residual: Vec<Vec<u32>> = a
                .iter()
                .map(|row| {
                    let mut t = row.clone();
                    reduce_against(&mut t, b, &pivots, p);
                    t.extend_from_slice(&row[..k]);
                    t.push(row[k]);
                    t
                })
                .collect();
            let cols: Vec<usize> = (0..k).collect();
            let rank = rref(&mut residual, &cols, p).len();
            if let Some(row) = residual[rank..].iter().find(|r| r[k] != 0) {
                let op = &row[k + 1..2 * k + 1];
                let pa = row[2 * k + 1];
                let pb = (pa + p - row[k]) % p;
                return Some(self.witness(kind, op, (Some(pa), Some(pb))));
            }
        }
        None
    }

    fn witness(&self, kind: PauliKind, op: &[u32], phases: (Option<u32>, Option<u32>)) -> Witness {
        let support = self.region.iter().zip(op).filter(|(_, &v)| v != 0).map(|(&e, &v)| (e, v)).collect();
        Witness { kind, support, phases }
    }
}

/// Precomputed restriction of one generator set to a region.
///
/// Every sector state of a lattice shares its generator rows and differs only in
/// phases, so a reducer built once applies to all of them.
#[derive(Debug, Clone)]
pub struct RegionReducer {
    region: Vec<usize>,
    p: u32,
    x: Vec<(Vec<u32>, Vec<u32>)>,
    z: Vec<(Vec<u32>, Vec<u32>)>,
}

impl RegionReducer {
    pub fn new(state: &StabilizerState, region: &[usize]) -> Self {
        let region = normalized(&state.lattice, region);
        let comp = state.complement(&region);
        let p = state.lattice.p;
        let block = |rows: &[Vec<u32>]| -> Vec<(Vec<u32>, Vec<u32>)> {
            let n = rows.len();
            let mut m: Vec<Vec<u32>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut out: Vec<u32> = comp.iter().chain(&region).map(|&c| r[c]).collect();
                    out.extend((0..n).map(|j| u32::from(i == j)));
                    out
                })
                .collect();
            let comp_cols: Vec<usize> = (0..comp.len()).collect();
            let k = rref(&mut m, &comp_cols, p).len();
            let mut sub: Vec<Vec<u32>> = m.drain(k..).map(|r| r[comp.len()..].to_vec()).collect();
            let region_cols: Vec<usize> = (0..region.len()).collect();
            let g = rref(&mut sub, &region_cols, p).len();
            sub.truncate(g);
            sub.into_iter().map(|r| (r[..region.len()].to_vec(), r[region.len()..].to_vec())).collect()
        };
        let x = block(&state.x.rows);
        let z = block(&state.z.rows);
        Self { region, p, x, z }
    }

    pub fn region(&self) -> &[usize] {
        &self.region
    }

    pub fn apply(&self, state: &StabilizerState) -> Reduction {
        debug_assert_eq!(state.lattice.p, self.p);
        let p = u64::from(self.p);
        let phase_rows = |rows: &[(Vec<u32>, Vec<u32>)], phase: &[u32]| -> Vec<Vec<u32>> {
            rows.iter()
                .map(|(op, comb)| {
                    let ph: u64 = comb.iter().zip(phase).map(|(&c, &f)| u64::from(c) * u64::from(f)).sum::<u64>() % p;
                    let mut r = op.clone();
                    r.push(ph as u32);
                    r
                })
                .collect()
        };
        Reduction {
            region: self.region.clone(),
            x: phase_rows(&self.x, &state.x.phase),
            z: phase_rows(&self.z, &state.z.phase),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::von_neumann_entropy;

    #[test]
    fn ground_state_is_pure_and_commuting() {
        for p in [2, 3] {
            let lat = Lattice::new(4, 4, p).unwrap();
            let st = build_ground_state(&lat).unwrap();
            assert_eq!(st.generator_count(), lat.edges());
            assert_eq!(st.rank(), lat.edges());
            assert!(st.first_anticommuting_pair().is_none());
            let all: Vec<usize> = (0..lat.edges()).collect();
            assert_eq!(st.region_entropy(&all).units, 0);
            assert_eq!(st.region_entropy(&[]).units, 0);
        }
    }

    #[test]
    fn single_edge_and_plaquette_entropies() {
        let lat = Lattice::new(4, 4, 2).unwrap();
        let st = build_ground_state(&lat).unwrap();
        assert_eq!(st.region_entropy(&[lat.h(1, 1)]).units, 1);
        let plaq: Vec<usize> = lat.boundary(1, 1).iter().map(|b| b.0).collect();
        let s = st.region_entropy(&plaq);
        assert_eq!((s.units, s.supported_rank), (3, 1));
        assert_eq!(st.region_entropy_dual(&plaq), 3);
    }

    #[test]
    fn dense_reduction_matches_rank_entropy() {
        for p in [2, 3] {
            let lat = Lattice::new(4, 4, p).unwrap();
            let st = build_ground_state(&lat).unwrap();
            let mut region: Vec<usize> = lat.boundary(1, 1).iter().map(|b| b.0).collect();
            region.push(lat.h(0, 1));
            let rho = st.dense_reduction(&region).unwrap();
            let s = st.region_entropy(&region);
            assert!((von_neumann_entropy(&rho).unwrap() - s.nats(p)).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenphase_of_generators() {
        let lat = Lattice::new(4, 4, 3).unwrap();
        let st = build_ground_state(&lat).unwrap();
        let mut op = vec![0; lat.edges()];
        for (e, s) in lat.star(2, 2) {
            op[e] = lat.modp(s);
        }
        assert_eq!(st.x_eigenphase(&op), Some(0));
        op[lat.h(0, 0)] = 1;
        assert_eq!(st.x_eigenphase(&op), None);
    }
}
