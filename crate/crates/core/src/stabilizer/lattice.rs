use serde::{Deserialize, Serialize};

use super::field::is_prime;
use super::StabilizerError;

/// Planar square lattice of `width × height` plaquettes with one `p`-level qudit per edge.
///
/// All four boundaries are smooth: every boundary edge is present, so boundary
/// plaquettes keep four edges and boundary vertices have two or three.
/// Horizontal edges point in `+x`, vertical edges in `+y`.
///
/// Edge ids: horizontal `h(x, y)` (`x < width`, `y <= height`) come first as
/// `y * width + x`; vertical `v(x, y)` (`x <= width`, `y < height`) follow as
/// `width * (height + 1) + y * (width + 1) + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub width: usize,
    pub height: usize,
    pub p: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Horizontal { x: usize, y: usize },
    Vertical { x: usize, y: usize },
}

impl Lattice {
    pub const MIN_SIDE: usize = 4;

    pub fn new(width: usize, height: usize, p: u32) -> Result<Self, StabilizerError> {
        if width < Self::MIN_SIDE || height < Self::MIN_SIDE {
            return Err(StabilizerError::InvalidLattice(format!(
                "{width}×{height} plaquettes; each side must be at least {}",
                Self::MIN_SIDE
            )));
        }
        if !is_prime(p) {
            return Err(StabilizerError::InvalidLattice(format!("p = {p} is not prime")));
        }
        Ok(Self { width, height, p })
    }

    pub fn edges(&self) -> usize {
        self.width * (self.height + 1) + (self.width + 1) * self.height
    }

    pub fn vertices(&self) -> usize {
        (self.width + 1) * (self.height + 1)
    }

    pub fn h(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y <= self.height);
        y * self.width + x
    }

    pub fn v(&self, x: usize, y: usize) -> usize {
        debug_assert!(x <= self.width && y < self.height);
        self.width * (self.height + 1) + y * (self.width + 1) + x
    }

    pub fn edge(&self, id: usize) -> Edge {
        let nh = self.width * (self.height + 1);
        if id < nh {
            Edge::Horizontal { x: id % self.width, y: id / self.width }
        } else {
            let k = id - nh;
            Edge::Vertical { x: k % (self.width + 1), y: k / (self.width + 1) }
        }
    }

    /// The plaquette whose bottom or left side is this edge; `None` on the top and right boundary.
    pub fn owner(&self, id: usize) -> Option<(usize, usize)> {
        match self.edge(id) {
            Edge::Horizontal { x, y } => (y < self.height).then_some((x, y)),
            Edge::Vertical { x, y } => (x < self.width).then_some((x, y)),
        }
    }

    /// Edges at vertex `(x, y)` with sign `+1` for outgoing and `-1` for incoming.
    pub fn star(&self, x: usize, y: usize) -> Vec<(usize, i64)> {
        let mut out = Vec::with_capacity(4);
        if x < self.width {
            out.push((self.h(x, y), 1));
        }
        if x > 0 {
            out.push((self.h(x - 1, y), -1));
        }
        if y < self.height {
            out.push((self.v(x, y), 1));
        }
        if y > 0 {
            out.push((self.v(x, y - 1), -1));
        }
        out
    }

    /// Plaquette boundary `Z_bottom Z_right Z_top^{-1} Z_left^{-1}` as (edge, exponent).
    pub fn boundary(&self, x: usize, y: usize) -> [(usize, i64); 4] {
        [(self.h(x, y), 1), (self.v(x + 1, y), 1), (self.h(x, y + 1), -1), (self.v(x, y), -1)]
    }

    pub fn edge_name(&self, id: usize) -> String {
        match self.edge(id) {
            Edge::Horizontal { x, y } => format!("h({x},{y})"),
            Edge::Vertical { x, y } => format!("v({x},{y})"),
        }
    }

    pub(crate) fn modp(&self, k: i64) -> u32 {
        k.rem_euclid(i64::from(self.p)) as u32
    }
}

/// Edge sequence with per-edge signs. Open paths have two endpoints; closed ones none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringPath {
    pub steps: Vec<(usize, i64)>,
    pub closed: bool,
}

impl StringPath {
    pub fn open(steps: Vec<(usize, i64)>) -> Self {
        Self { steps, closed: false }
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(e, _)| e)
    }
}

/// Generalized Pauli `X^x Z^z` given by exponent vectors over the edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringOperator {
    pub x: Vec<u32>,
    pub z: Vec<u32>,
}

impl StringOperator {
    pub fn identity(lat: &Lattice) -> Self {
        Self { x: vec![0; lat.edges()], z: vec![0; lat.edges()] }
    }

    /// Multiplies by `Z^{weight·sign}` along `path`.
    pub fn with_z(mut self, lat: &Lattice, path: &StringPath, weight: i64) -> Self {
        for &(e, sign) in &path.steps {
            self.z[e] = lat.modp(i64::from(self.z[e]) + weight * sign);
        }
        self
    }

    /// Multiplies by `X^{weight·sign}` along `path`.
    pub fn with_x(mut self, lat: &Lattice, path: &StringPath, weight: i64) -> Self {
        for &(e, sign) in &path.steps {
            self.x[e] = lat.modp(i64::from(self.x[e]) + weight * sign);
        }
        self
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&e| self.x[e] != 0 || self.z[e] != 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_ids_roundtrip() {
        let lat = Lattice::new(5, 4, 3).unwrap();
        assert_eq!(lat.edges(), 5 * 5 + 6 * 4);
        for id in 0..lat.edges() {
            let back = match lat.edge(id) {
                Edge::Horizontal { x, y } => lat.h(x, y),
                Edge::Vertical { x, y } => lat.v(x, y),
            };
            assert_eq!(back, id);
        }
        assert!(Lattice::new(3, 4, 2).is_err());
        assert!(Lattice::new(4, 4, 4).is_err());
    }

    #[test]
    fn stars_and_plaquettes_commute() {
        let lat = Lattice::new(4, 4, 3).unwrap();
        for vx in 0..=4 {
            for vy in 0..=4 {
                let star = lat.star(vx, vy);
                for px in 0..4 {
                    for py in 0..4 {
                        let pair: i64 = lat
                            .boundary(px, py)
                            .iter()
                            .filter_map(|&(e, c)| star.iter().find(|s| s.0 == e).map(|s| s.1 * c))
                            .sum();
                        assert_eq!(lat.modp(pair), 0);
                    }
                }
            }
        }
    }
}
