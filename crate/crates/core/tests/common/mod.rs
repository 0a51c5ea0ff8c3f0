//! Shared helpers for integration tests: an exhaustive packing oracle,
//! packing instance generators and fixture paths.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reliefnav::packing::BoxItem;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/puerto-rico").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Integer packing instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub bay: [u32; 3],
    pub boxes: Vec<[u32; 3]>,
}

impl Instance {
    pub fn bay_f64(&self) -> [f64; 3] {
        self.bay.map(f64::from)
    }

    pub fn items(&self) -> Vec<BoxItem> {
        self.boxes.iter().enumerate().map(|(i, b)| BoxItem::new(format!("b{i}"), b.map(f64::from), 1.0)).collect()
    }
}

fn rotations(d: [u32; 3]) -> Vec<[u32; 3]> {
    let mut v = vec![
        [d[0], d[1], d[2]],
        [d[0], d[2], d[1]],
        [d[1], d[0], d[2]],
        [d[1], d[2], d[0]],
        [d[2], d[0], d[1]],
        [d[2], d[1], d[0]],
    ];
    v.sort_unstable();
    v.dedup();
    v
}

struct Voxels {
    dims: [usize; 3],
    filled: Vec<bool>,
}

impl Voxels {
    fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    fn coords(&self, i: usize) -> [usize; 3] {
        [i % self.dims[0], (i / self.dims[0]) % self.dims[1], i / (self.dims[0] * self.dims[1])]
    }

    fn fits(&self, at: [usize; 3], size: [u32; 3]) -> bool {
        if (0..3).any(|a| at[a] + size[a] as usize > self.dims[a]) {
            return false;
        }
        for z in at[2]..at[2] + size[2] as usize {
            for y in at[1]..at[1] + size[1] as usize {
                for x in at[0]..at[0] + size[0] as usize {
                    if self.filled[self.idx(x, y, z)] {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn set(&mut self, at: [usize; 3], size: [u32; 3], v: bool) {
        for z in at[2]..at[2] + size[2] as usize {
            for y in at[1]..at[1] + size[1] as usize {
                for x in at[0]..at[0] + size[0] as usize {
                    let i = self.idx(x, y, z);
                    self.filled[i] = v;
                }
            }
        }
    }
}

fn search(v: &mut Voxels, start: usize, remaining: &mut Vec<[u32; 3]>, waste: u64) -> bool {
    if remaining.is_empty() {
        return true;
    }
    let Some(first) = (start..v.filled.len()).find(|&i| !v.filled[i]) else { return false };
    let at = v.coords(first);
    for k in 0..remaining.len() {
        let b = remaining[k];
        if remaining[..k].contains(&b) {
            continue;
        }
        for r in rotations(b) {
            if v.fits(at, r) {
                v.set(at, r, true);
                remaining.swap_remove(k);
                let ok = search(v, first + 1, remaining, waste);
                remaining.push(b);
                let last = remaining.len() - 1;
                remaining.swap(k, last);
                v.set(at, r, false);
                if ok {
                    return true;
                }
            }
        }
    }
    if waste > 0 {
        v.filled[first] = true;
        let ok = search(v, first + 1, remaining, waste - 1);
        v.filled[first] = false;
        return ok;
    }
    false
}

/// Exact feasibility for integer boxes. The lowest empty voxel in scan order
/// is either the minimum corner of some box or stays empty, so branching on
/// those two options visits every integer packing; with integer sizes any
/// packing can be pushed onto integer coordinates.
pub fn brute_force_feasible(bay: [u32; 3], boxes: &[[u32; 3]]) -> bool {
    let cap: u64 = bay.iter().map(|&d| u64::from(d)).product();
    let used: u64 = boxes.iter().map(|b| b.iter().map(|&d| u64::from(d)).product::<u64>()).sum();
    if used > cap {
        return false;
    }
    let mut sorted: Vec<_> = boxes.to_vec();
    sorted.sort_by_key(|b| std::cmp::Reverse(b.iter().product::<u32>()));
    if sorted.iter().any(|&b| !rotations(b).iter().any(|r| (0..3).all(|a| r[a] <= bay[a]))) {
        return false;
    }
    let mut v = Voxels { dims: bay.map(|d| d as usize), filled: vec![false; cap as usize] };
    search(&mut v, 0, &mut sorted, cap - used)
}

/// Splits the bay by random guillotine cuts into `n` pieces, then rotates
/// each piece at random. Always feasible and tight.
pub fn guillotine(rng: &mut ChaCha8Rng, bay: [u32; 3], n: usize) -> Vec<[u32; 3]> {
    let mut pieces = vec![bay];
    while pieces.len() < n {
        let cuttable: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].iter().any(|&d| d >= 2)).collect();
        if cuttable.is_empty() {
            break;
        }
        let i = cuttable[rng.random_range(0..cuttable.len())];
        let p = pieces.swap_remove(i);
        let axes: Vec<usize> = (0..3).filter(|&a| p[a] >= 2).collect();
        let a = axes[rng.random_range(0..axes.len())];
        let cut = rng.random_range(1..p[a]);
        let (mut lo, mut hi) = (p, p);
        lo[a] = cut;
        hi[a] = p[a] - cut;
        pieces.push(lo);
        pieces.push(hi);
    }
    pieces.into_iter().map(|p| { let r = rotations(p); r[rng.random_range(0..r.len())] }).collect()
}

/// Mix of tight guillotine instances, perturbed guillotine instances (one
/// piece grown or the bay shrunk along one axis) and random boxes.
pub fn random_instance(rng: &mut ChaCha8Rng, max_side: u32) -> Instance {
    let bay = [rng.random_range(2..=max_side), rng.random_range(2..=max_side), rng.random_range(2..=max_side)];
    let n = rng.random_range(1..=4usize);
    match rng.random_range(0..4u8) {
        0 | 1 => Instance { bay, boxes: guillotine(rng, bay, n) },
        2 => {
            let mut boxes = guillotine(rng, bay, n);
            let mut bay = bay;
            if rng.random::<bool>() {
                let i = rng.random_range(0..boxes.len());
                let a = rng.random_range(0..3);
                boxes[i][a] += 1;
            } else {
                let a = rng.random_range(0..3);
                bay[a] = (bay[a] - 1).max(1);
                // Shrinking plus growing the bay elsewhere keeps volume slack.
                let b = (a + 1 + rng.random_range(0..2)) % 3;
                bay[b] += rng.random_range(0..=2);
            }
            Instance { bay, boxes }
        }
        _ => {
            let boxes = (0..n)
                .map(|_| [rng.random_range(1..=max_side), rng.random_range(1..=max_side), rng.random_range(1..=max_side)])
                .collect();
            Instance { bay, boxes }
        }
    }
}
