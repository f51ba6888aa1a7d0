use serde::{Deserialize, Serialize};

use super::lattice::{Edge, Lattice};
use super::StabilizerError;
use crate::dense::{Partition, Region};

/// Minimum region width in plaquettes.
pub const ELL: usize = 2;

/// Half-open rectangle of plaquettes `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, (x, y): (usize, usize)) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Leaves through the top boundary, crossing A.
    Up,
    /// Leaves through the bottom boundary, crossing C.
    Down,
}

/// L-shaped route of the sector strings: horizontal from the origin to `detour_column`,
/// then vertical to the lattice boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub detour_column: Option<usize>,
    pub direction: Direction,
}

impl Default for Route {
    fn default() -> Self {
        Self { detour_column: None, direction: Direction::Up }
    }
}

/// Rectangular annulus `outer ∖ hole`: A is the strip above the hole, C the strip below,
/// and B the two full-height side strips.
///
/// Each edge belongs to the plaquette that has it as bottom or left side. The edges of
/// A form `2·width_A` layers counted outward from the hole: `h(·, hole.y1)`,
/// `v(·, hole.y1)`, `h(·, hole.y1 + 1)`, ... Thinning by `k` moves the `k` innermost and
/// `k` outermost layers to ENV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusPartition {
    pub lattice: Lattice,
    pub origin: (usize, usize),
    pub hole: Rect,
    pub outer: Rect,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub thinning: usize,
}

impl AnnulusPartition {
    pub fn new(lattice: Lattice, origin: (usize, usize), hole: Rect, outer: Rect) -> Result<Self, StabilizerError> {
        let part = Self { lattice, origin, hole, outer, route: Route::default(), thinning: 0 };
        part.validate()?;
        Ok(part)
    }

    /// 12×12 lattice, hole `[4,9)²`, outer `[2,11)²`, origin `(6,6)`: every width is 2.
    pub fn standard(p: u32) -> Result<Self, StabilizerError> {
        Self::square(p, 12, 2)
    }

    /// `size × size` lattice with an annulus of equal widths, outer rectangle `[2, size - 1)`
    /// and the origin at the centre of the hole.
    pub fn square(p: u32, size: usize, width: usize) -> Result<Self, StabilizerError> {
        let hs = 2 * ELL + 1;
        if size < 3 + 2 * width + hs {
            return Err(StabilizerError::Geometry(format!(
                "a {size}×{size} lattice leaves no {hs}×{hs} hole inside an annulus of width {width}"
            )));
        }
        let hole = Rect::new(2 + width, 2 + width, size - 1 - width, size - 1 - width);
        let origin = ((hole.x0 + hole.x1) / 2, (hole.y0 + hole.y1) / 2);
        Self::new(Lattice::new(size, size, p)?, origin, hole, Rect::new(2, 2, size - 1, size - 1))
    }

    /// Smallest layout with a 5×5 hole, a one-plaquette margin and the given widths.
    pub fn with_widths(p: u32, width_a: usize, width_b: usize, width_c: usize) -> Result<Self, StabilizerError> {
        let hs = 2 * ELL + 1;
        let w = 2 + 2 * width_b + hs;
        let h = 2 + width_c + hs + width_a;
        let hole = Rect::new(1 + width_b, 1 + width_c, 1 + width_b + hs, 1 + width_c + hs);
        let outer = Rect::new(1, 1, w - 1, h - 1);
        let origin = (hole.x0 + ELL, hole.y0 + ELL);
        Self::new(Lattice::new(w, h, p)?, origin, hole, outer)
    }

    /// Layout whose A survives `n + 1` thinnings with two layers left.
    pub fn for_levels(p: u32, n: usize) -> Result<Self, StabilizerError> {
        Self::with_widths(p, n + 2, ELL, ELL)
    }

    pub fn validate(&self) -> Result<(), StabilizerError> {
        let geo = |m: String| Err(StabilizerError::Geometry(m));
        let (o, h, lat) = (self.outer, self.hole, self.lattice);
        if o.x0 < 1 || o.y0 < 1 || o.x1 + 1 > lat.width || o.y1 + 1 > lat.height {
            return geo(format!("outer rectangle {o:?} must keep one plaquette of margin inside the lattice"));
        }
        if !(o.x0 < h.x0 && h.x1 < o.x1 && o.y0 < h.y0 && h.y1 < o.y1) {
            return geo(format!("hole {h:?} must lie strictly inside the outer rectangle {o:?}"));
        }
        for (name, w) in [
            ("A", self.width_a()),
            ("C", h.y0 - o.y0),
            ("B1", h.x0 - o.x0),
            ("B2", o.x1 - h.x1),
        ] {
            if w < ELL {
                return geo(format!("width of {name} is {w}, below {ELL}"));
            }
        }
        let (ox, oy) = self.origin;
        if !h.contains(self.origin) {
            return geo(format!("origin {:?} is not inside the hole", self.origin));
        }
        let dist = (ox - h.x0).min(h.x1 - 1 - ox).min(oy - h.y0).min(h.y1 - 1 - oy);
        if dist < ELL {
            return geo(format!("origin is {dist} plaquettes from the annulus, below {ELL}"));
        }
        self.check_thinning(self.thinning)?;
        if let Some(dx) = self.route.detour_column {
            if dx >= lat.width {
                return geo(format!("detour column {dx} is outside the lattice"));
            }
        }
        Ok(())
    }

    fn check_thinning(&self, k: usize) -> Result<(), StabilizerError> {
        let layers = 2 * self.width_a();
        if layers < 2 * k + 2 {
            return Err(StabilizerError::InsufficientWidth { width: self.width_a(), needed: k + 1, levels: k });
        }
        Ok(())
    }

    /// Copy with A thinned by `k` more layers on each side.
    pub fn thinned(&self, k: usize) -> Result<Self, StabilizerError> {
        self.check_thinning(self.thinning + k)?;
        Ok(Self { thinning: self.thinning + k, ..*self })
    }

    pub fn with_route(&self, route: Route) -> Result<Self, StabilizerError> {
        let part = Self { route, ..*self };
        part.validate()?;
        Ok(part)
    }

    /// Moves the origin without any checks; used to build deliberately broken geometries.
    pub fn with_origin_unchecked(&self, origin: (usize, usize)) -> Self {
        Self { origin, ..*self }
    }

    pub fn width_a(&self) -> usize {
        self.outer.y1 - self.hole.y1
    }

    pub fn rect_a(&self) -> Rect {
        Rect::new(self.hole.x0, self.hole.y1, self.hole.x1, self.outer.y1)
    }

    pub fn rect_c(&self) -> Rect {
        Rect::new(self.hole.x0, self.outer.y0, self.hole.x1, self.hole.y0)
    }

    pub fn rect_b1(&self) -> Rect {
        Rect::new(self.outer.x0, self.outer.y0, self.hole.x0, self.outer.y1)
    }

    pub fn rect_b2(&self) -> Rect {
        Rect::new(self.hole.x1, self.outer.y0, self.outer.x1, self.outer.y1)
    }

    /// Region of an owned plaquette, ignoring thinning.
    pub fn plaquette_region(&self, pq: (usize, usize)) -> Region {
        if self.rect_a().contains(pq) {
            Region::A
        } else if self.rect_c().contains(pq) {
            Region::C
        } else if self.rect_b1().contains(pq) || self.rect_b2().contains(pq) {
            Region::B
        } else {
            Region::Env
        }
    }

    /// Layer index of an edge owned by A, counted outward from the hole.
    pub fn a_layer(&self, edge: usize) -> Option<usize> {
        let owner = self.lattice.owner(edge)?;
        if !self.rect_a().contains(owner) {
            return None;
        }
        Some(match self.lattice.edge(edge) {
            Edge::Horizontal { y, .. } => 2 * (y - self.hole.y1),
            Edge::Vertical { y, .. } => 2 * (y - self.hole.y1) + 1,
        })
    }

    /// Surviving A layers as an inclusive range.
    pub fn a_layer_range(&self) -> (usize, usize) {
        (self.thinning, 2 * self.width_a() - 1 - self.thinning)
    }

    pub fn region_of(&self, edge: usize) -> Region {
        let Some(owner) = self.lattice.owner(edge) else { return Region::Env };
        match self.plaquette_region(owner) {
            Region::A => {
                let layer = self.a_layer(edge).expect("owned by A");
                let (lo, hi) = self.a_layer_range();
                if (lo..=hi).contains(&layer) {
                    Region::A
                } else {
                    Region::Env
                }
            }
            r => r,
        }
    }

    pub fn edges(&self, region: Region) -> Vec<usize> {
        (0..self.lattice.edges()).filter(|&e| self.region_of(e) == region).collect()
    }

    pub fn union(&self, regions: &[Region]) -> Vec<usize> {
        (0..self.lattice.edges()).filter(|&e| regions.contains(&self.region_of(e))).collect()
    }

    /// Edge-level tags, usable with the dense checkers.
    pub fn to_partition(&self) -> Partition {
        Partition::new((0..self.lattice.edges()).map(|e| (e, self.region_of(e))).collect())
    }

    /// Column used by the sector strings.
    pub fn route_column(&self) -> usize {
        self.route.detour_column.unwrap_or(self.origin.0)
    }
}
