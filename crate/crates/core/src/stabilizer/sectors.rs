use std::fmt;

use serde::{Deserialize, Serialize};

use super::annulus::{AnnulusPartition, Direction};
use super::lattice::{StringOperator, StringPath};
use super::state::{build_ground_state, StabilizerState};
use super::StabilizerError;
use crate::dense::Region;

/// Anyon `(charge, flux) ∈ Z_p × Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorLabel {
    pub e: u32,
    pub m: u32,
}

impl SectorLabel {
    pub fn new(e: u32, m: u32) -> Self {
        Self { e, m }
    }

    /// Position in `Z_p × Z_p`, charge-major; matches `FusionCategory::abelian_group(&[p, p])`.
    pub fn index(&self, p: u32) -> usize {
        (self.e * p + self.m) as usize
    }

    pub fn from_index(i: usize, p: u32) -> Self {
        Self { e: i as u32 / p, m: i as u32 % p }
    }

    pub fn all(p: u32) -> Vec<Self> {
        (0..(p * p) as usize).map(|i| Self::from_index(i, p)).collect()
    }

    pub fn fuse(&self, other: &Self, p: u32) -> Self {
        Self { e: (self.e + other.e) % p, m: (self.m + other.m) % p }
    }

    pub fn is_valid(&self, p: u32) -> bool {
        self.e < p && self.m < p
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.e, self.m)
    }
}

/// Primal path from the origin plaquette's lower-left vertex to the boundary, with
/// traversal signs. `Z^{-e·sign}` along it puts charge `e` on the origin vertex.
pub fn charge_path(part: &AnnulusPartition) -> StringPath {
    let lat = part.lattice;
    let (ox, oy) = part.origin;
    let dx = part.route_column();
    let mut steps = vec![];
    if dx > ox {
        steps.extend((ox..dx).map(|x| (lat.h(x, oy), 1)));
    } else {
        steps.extend((dx + 1..=ox).rev().map(|x| (lat.h(x - 1, oy), -1)));
    }
    match part.route.direction {
        Direction::Up => steps.extend((oy..lat.height).map(|y| (lat.v(dx, y), 1))),
        Direction::Down => steps.extend((0..oy).rev().map(|y| (lat.v(dx, y), -1))),
    }
    StringPath::open(steps)
}

/// Dual path from the origin plaquette to the boundary. Each step carries the
/// coefficient of the crossed edge in the plaquette being left, so `X^{m·sign}`
/// along it puts flux `m` on the origin plaquette.
pub fn flux_path(part: &AnnulusPartition) -> StringPath {
    let lat = part.lattice;
    let (ox, oy) = part.origin;
    let dx = part.route_column();
    let mut steps = vec![];
    if dx > ox {
        steps.extend((ox..dx).map(|x| (lat.v(x + 1, oy), 1)));
    } else {
        steps.extend((dx + 1..=ox).rev().map(|x| (lat.v(x, oy), -1)));
    }
    match part.route.direction {
        Direction::Up => steps.extend((oy + 1..=lat.height).map(|y| (lat.h(dx, y), -1))),
        Direction::Down => steps.extend((0..=oy).rev().map(|y| (lat.h(dx, y), 1))),
    }
    StringPath::open(steps)
}

fn check_route(part: &AnnulusPartition, path: &StringPath, kind: &'static str) -> Result<(), StabilizerError> {
    let lat = part.lattice;
    for e in path.edges() {
        let Some(owner) = lat.owner(e) else { continue };
        if part.plaquette_region(owner) == Region::B {
            return Err(StabilizerError::PathBlocked { kind, edge: lat.edge_name(e) });
        }
    }
    Ok(())
}

/// String operator creating `a` at the origin and its antiparticle on the boundary.
pub fn sector_operator(part: &AnnulusPartition, a: SectorLabel) -> Result<StringOperator, StabilizerError> {
    let lat = part.lattice;
    if !a.is_valid(lat.p) {
        return Err(StabilizerError::InvalidSector(format!("{a} is not in Z_{0} × Z_{0}", lat.p)));
    }
    let charge = charge_path(part);
    let flux = flux_path(part);
    check_route(part, &charge, "charge")?;
    check_route(part, &flux, "flux")?;
    Ok(StringOperator::identity(&lat).with_z(&lat, &charge, -i64::from(a.e)).with_x(&lat, &flux, i64::from(a.m)))
}

pub fn create_sector(
    ground: &StabilizerState,
    part: &AnnulusPartition,
    a: SectorLabel,
) -> Result<StabilizerState, StabilizerError> {
    if ground.lattice() != &part.lattice {
        return Err(StabilizerError::Geometry("partition and state live on different lattices".into()));
    }
    Ok(ground.apply(&sector_operator(part, a)?))
}

/// Ground state and every sector state, indexed by [`SectorLabel::index`].
pub fn sector_states(part: &AnnulusPartition) -> Result<Vec<StabilizerState>, StabilizerError> {
    let ground = build_ground_state(&part.lattice)?;
    SectorLabel::all(part.lattice.p).into_iter().map(|a| create_sector(&ground, part, a)).collect()
}

/// X-type product of the vertex operators on the hole's corners and interior.
/// It is supported in ABC and measures the total charge in the hole.
pub fn charge_loop(part: &AnnulusPartition) -> Vec<u32> {
    let lat = part.lattice;
    let h = part.hole;
    let mut op = vec![0i64; lat.edges()];
    for y in h.y0..=h.y1 {
        for x in h.x0..=h.x1 {
            for (e, s) in lat.star(x, y) {
                op[e] += s;
            }
        }
    }
    op.into_iter().map(|k| lat.modp(k)).collect()
}

/// Z-type product of the plaquette operators on the hole grown by one plaquette.
/// It is supported in ABC and measures the total flux in the hole.
pub fn flux_loop(part: &AnnulusPartition) -> Vec<u32> {
    let lat = part.lattice;
    let h = part.hole;
    let mut op = vec![0i64; lat.edges()];
    for y in h.y0 - 1..=h.y1 {
        for x in h.x0 - 1..=h.x1 {
            for (e, c) in lat.boundary(x, y) {
                op[e] += c;
            }
        }
    }
    op.into_iter().map(|k| lat.modp(k)).collect()
}

/// Where the fusion string sits relative to `A′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Crosses `A′`, with both endpoints in the removed strips.
    Spanning,
    /// Lies in one removed strip, so one endpoint sits inside `A′`.
    Misplaced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionStringRule {
    /// Column of the string; the middle of A by default.
    pub column: Option<usize>,
    pub placement: Placement,
}

impl Default for FusionStringRule {
    fn default() -> Self {
        Self { column: None, placement: Placement::Spanning }
    }
}

/// Open string `W_s` inside A for the step `A → A′` (A′ = `part.thinned(1)`).
///
/// Spanning: `Z` on the vertical edges of A′ in one column and `X` across its horizontal
/// edges, so the inner endpoints fall inside every loop of A′BC and the outer ones outside.
pub fn fusion_operator(
    part: &AnnulusPartition,
    s: SectorLabel,
    rule: FusionStringRule,
) -> Result<StringOperator, StabilizerError> {
    let lat = part.lattice;
    let a_rect = part.rect_a();
    let x = rule.column.unwrap_or((a_rect.x0 + a_rect.x1) / 2);
    if !(a_rect.x0..a_rect.x1).contains(&x) {
        return Err(StabilizerError::Geometry(format!("fusion column {x} is outside A")));
    }
    let (lo, hi) = part.a_layer_range();
    part.thinned(1)?;
    let layers: Vec<usize> = match rule.placement {
        Placement::Spanning => (lo + 1..hi).collect(),
        Placement::Misplaced => vec![lo, hi],
    };
    let y_of = |layer: usize| part.hole.y1 + layer / 2;
    let vertical: Vec<(usize, i64)> = layers.iter().filter(|l| *l % 2 == 1).map(|&l| (lat.v(x, y_of(l)), 1)).collect();
    let horizontal: Vec<(usize, i64)> =
        layers.iter().filter(|l| *l % 2 == 0).map(|&l| (lat.h(x, y_of(l)), -1)).collect();
    Ok(StringOperator::identity(&lat)
        .with_z(&lat, &StringPath::open(vertical), -i64::from(s.e))
        .with_x(&lat, &StringPath::open(horizontal), i64::from(s.m)))
}
