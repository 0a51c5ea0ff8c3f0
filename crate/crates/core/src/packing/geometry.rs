use serde::{Deserialize, Serialize};

/// Tolerance for coordinate comparisons, in inches.
pub const EPS: f64 = 1e-9;

/// Axis permutations: orientation `o` maps item dims `d` to `[d[p[0]], d[p[1]], d[p[2]]]`.
pub const ORIENTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn oriented(dims: [f64; 3], orientation: u8) -> [f64; 3] {
    let p = ORIENTATIONS[orientation as usize];
    [dims[p[0]], dims[p[1]], dims[p[2]]]
}

/// A box to be packed: a medical package or a drone crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxItem {
    pub kind: String,
    /// (l, w, h) inches.
    pub dims: [f64; 3],
    pub weight_lb: f64,
}

impl BoxItem {
    pub fn new(kind: impl Into<String>, dims: [f64; 3], weight_lb: f64) -> Self {
        BoxItem { kind: kind.into(), dims, weight_lb }
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn fits_somehow(&self, bay: [f64; 3]) -> bool {
        (0..6).any(|o| {
            let s = oriented(self.dims, o);
            (0..3).all(|a| s[a] <= bay[a] + EPS)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Index into the packed item list.
    pub item: usize,
    pub position: [f64; 3],
    pub orientation: u8,
    /// Extent along (x, y, z) after rotation.
    pub size: [f64; 3],
}

impl Placement {
    pub fn end(&self, axis: usize) -> f64 {
        self.position[axis] + self.size[axis]
    }

    pub fn overlaps(&self, other: &Placement) -> bool {
        (0..3).all(|a| self.position[a] < other.end(a) - EPS && other.position[a] < self.end(a) - EPS)
    }
}

/// Checks a witness packing directly: every item placed once, extents match
/// a rotation of the item, all boxes inside the bay and pairwise disjoint.
pub fn validate_placements(bay: [f64; 3], items: &[BoxItem], placements: &[Placement]) -> Result<(), String> {
    let mut seen = vec![false; items.len()];
    for p in placements {
        let item = items.get(p.item).ok_or_else(|| format!("placement refers to missing item {}", p.item))?;
        if std::mem::replace(&mut seen[p.item], true) {
            return Err(format!("item {} placed twice", p.item));
        }
        if p.orientation as usize >= ORIENTATIONS.len() || oriented(item.dims, p.orientation) != p.size {
            return Err(format!("item {} has extents {:?} that do not match its dims", p.item, p.size));
        }
        for (a, &extent) in bay.iter().enumerate() {
            if p.position[a] < -EPS || p.end(a) > extent + EPS {
                return Err(format!("item {} sticks out of the bay along axis {a}", p.item));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(format!("item {i} is not placed"));
    }
    for (i, a) in placements.iter().enumerate() {
        for b in &placements[i + 1..] {
            if a.overlaps(b) {
                return Err(format!("items {} and {} overlap", a.item, b.item));
            }
        }
    }
    Ok(())
}
