//! Genetic search over (placement order, orientation) chromosomes.
//!
//! Each chromosome is decoded by a deepest-bottom-left-first placement over
//! candidate corner points: the Cartesian product of `{0}` and the far faces
//! of every box placed so far, along each axis. Fitness is the packed volume
//! fraction; an instance is feasible once some chromosome places every box.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{oriented, BoxItem, Placement, EPS};
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { population: 50, generations: 200, crossover_rate: 0.9, mutation_rate: 0.1, tournament: 3, seed: 0 }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config(format!("GA population must be >= 2, got {}", self.population)));
        }
        if self.tournament == 0 {
            return Err(Error::Config("tournament size must be >= 1".into()));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub feasible: bool,
    /// Witness placements sorted by item index (complete when feasible).
    pub placements: Vec<Placement>,
    /// Best packed-volume fraction seen.
    pub fitness: f64,
    /// Generations run after the initial population.
    pub generations_used: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Chromosome {
    order: Vec<usize>,
    /// Orientation per item (indexed by item, not by position in `order`).
    orientation: Vec<u8>,
    fitness: f64,
    placements: Vec<Placement>,
}

fn insert_coord(coords: &mut Vec<f64>, v: f64) {
    let pos = coords.partition_point(|&c| c < v - EPS);
    if pos == coords.len() || (coords[pos] - v).abs() > EPS {
        coords.insert(pos, v);
    }
}

fn first_fit(bay: [f64; 3], placed: &[Placement], coords: [&[f64]; 3], item: usize, orientation: u8, size: [f64; 3]) -> Option<Placement> {
    let [xs, ys, zs] = coords;
    for &x in xs {
        if x + size[0] > bay[0] + EPS {
            break;
        }
        for &z in zs {
            if z + size[2] > bay[2] + EPS {
                break;
            }
            for &y in ys {
                if y + size[1] > bay[1] + EPS {
                    break;
                }
                let cand = Placement { item, position: [x, y, z], orientation, size };
                if placed.iter().all(|p| !p.overlaps(&cand)) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// Places the items in `order`, each at the first free candidate corner in
/// (x, z, y) lexicographic order. An item whose gene orientation fits nowhere
/// tries its other orientations in turn; items that fit nowhere are skipped.
pub(crate) fn decode(bay: [f64; 3], items: &[BoxItem], order: &[usize], orientation: &[u8]) -> (Vec<Placement>, f64) {
    let mut placed: Vec<Placement> = Vec::with_capacity(order.len());
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mut zs = vec![0.0];
    let mut volume = 0.0;
    for &item in order {
        let found = (0..6u8).find_map(|k| {
            let o = (orientation[item] + k) % 6;
            first_fit(bay, &placed, [&xs, &ys, &zs], item, o, oriented(items[item].dims, o))
        });
        if let Some(p) = found {
            insert_coord(&mut xs, p.end(0));
            insert_coord(&mut ys, p.end(1));
            insert_coord(&mut zs, p.end(2));
            volume += items[item].volume();
            placed.push(p);
        }
    }
    (placed, volume)
}

struct Search<'a> {
    bay: [f64; 3],
    items: &'a [BoxItem],
    total_volume: f64,
    evaluations: usize,
}

impl Search<'_> {
    fn evaluate(&mut self, order: Vec<usize>, orientation: Vec<u8>) -> Chromosome {
        self.evaluations += 1;
        let (placements, volume) = decode(self.bay, self.items, &order, &orientation);
        let fitness = if placements.len() == self.items.len() { 1.0 } else { volume / self.total_volume };
        Chromosome { order, orientation, fitness, placements }
    }

    fn is_complete(&self, c: &Chromosome) -> bool {
        c.placements.len() == self.items.len()
    }
}

fn tournament<'p>(pop: &'p [Chromosome], size: usize, rng: &mut ChaCha8Rng) -> &'p Chromosome {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let i = rng.random_range(0..pop.len());
        if pop[i].fitness > pop[best].fitness || (pop[i].fitness == pop[best].fitness && i < best) {
            best = i;
        }
    }
    &pop[best]
}

/// Order crossover (OX1): keep a slice of `a`, fill the rest in `b`'s order.
fn order_crossover(a: &[usize], b: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = a.len();
    let (mut lo, mut hi) = (rng.random_range(0..n), rng.random_range(0..n));
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut child = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for i in lo..=hi {
        child[i] = a[i];
        taken[a[i]] = true;
    }
    let mut src = b.iter().cycle().skip((hi + 1) % n).filter(|g| !taken[**g]);
    for k in 0..n {
        let pos = (hi + 1 + k) % n;
        if child[pos] == usize::MAX {
            child[pos] = *src.next().expect("permutation has enough genes");
        }
    }
    child
}

fn finish(best: Chromosome, feasible: bool, generations_used: usize, evaluations: usize) -> PackingResult {
    let mut placements = best.placements;
    placements.sort_by_key(|p| p.item);
    PackingResult { feasible, placements, fitness: best.fitness, generations_used, evaluations }
}

/// Decides whether `items` fit into a bay of interior size `bay` (inches).
///
/// Returns as soon as a complete packing is found; an infeasible verdict means
/// the whole generation budget was spent. Deterministic for a fixed seed.
pub fn pack_feasible(bay: [f64; 3], items: &[BoxItem], cfg: &GaConfig) -> Result<PackingResult> {
    cfg.validate()?;
    if items.is_empty() {
        return Err(Error::Input("nothing to pack".into()));
    }
    if bay.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Input(format!("bay dimensions must be positive, got {bay:?}")));
    }
    if let Some(bad) = items.iter().find(|b| b.dims.iter().any(|d| !(*d > 0.0))) {
        return Err(Error::Input(format!("box `{}` has non-positive dimensions", bad.kind)));
    }

    let n = items.len();
    let mut rng = rng_from_seed(cfg.seed);
    let mut search = Search { bay, items, total_volume: items.iter().map(BoxItem::volume).sum(), evaluations: 0 };

    let mut population = Vec::with_capacity(cfg.population);
    let mut by_volume: Vec<usize> = (0..n).collect();
    by_volume.sort_by(|&a, &b| items[b].volume().total_cmp(&items[a].volume()).then(a.cmp(&b)));
    population.push(search.evaluate(by_volume, vec![0; n]));
    while population.len() < cfg.population {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let orientation = (0..n).map(|_| rng.random_range(0..6u8)).collect();
        population.push(search.evaluate(order, orientation));
    }
    let best_of = |pop: &[Chromosome]| -> usize {
        (0..pop.len()).fold(0, |b, i| if pop[i].fitness > pop[b].fitness { i } else { b })
    };
    if let Some(done) = population.iter().position(|c| search.is_complete(c)) {
        let evals = search.evaluations;
        return Ok(finish(population.swap_remove(done), true, 0, evals));
    }

    for generation in 1..=cfg.generations {
        let elite = population[best_of(&population)].clone();
        let mut next = Vec::with_capacity(cfg.population);
        next.push(elite);
        while next.len() < cfg.population {
            let a = tournament(&population, cfg.tournament, &mut rng);
            let b = tournament(&population, cfg.tournament, &mut rng);
            let (mut order, mut orientation) = if rng.random::<f64>() < cfg.crossover_rate {
                let order = order_crossover(&a.order, &b.order, &mut rng);
                let orientation =
                    (0..n).map(|i| if rng.random::<bool>() { a.orientation[i] } else { b.orientation[i] }).collect();
                (order, orientation)
            } else {
                (a.order.clone(), a.orientation.clone())
            };
            if n > 1 && rng.random::<f64>() < cfg.mutation_rate {
                let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
                order.swap(i, j);
            }
            if rng.random::<f64>() < cfg.mutation_rate {
                let i = rng.random_range(0..n);
                orientation[i] = rng.random_range(0..6u8);
            }
            let child = search.evaluate(order, orientation);
            if search.is_complete(&child) {
                let evals = search.evaluations;
                return Ok(finish(child, true, generation, evals));
            }
            next.push(child);
        }
        population = next;
    }
    let best = population.swap_remove(best_of(&population));
    Ok(finish(best, false, cfg.generations, search.evaluations))
}

#[cfg(test)]
mod tests {
    use super::super::geometry::validate_placements;
    use super::*;

    fn item(d: [f64; 3]) -> BoxItem {
        BoxItem::new("box", d, 1.0)
    }

    #[test]
    fn exact_fit_lands_at_origin() {
        let bay = [3.0, 4.0, 5.0];
        let r = pack_feasible(bay, &[item(bay)], &GaConfig::default()).unwrap();
        assert!(r.feasible);
        assert_eq!(r.placements[0].position, [0.0; 3]);
        assert_eq!(r.generations_used, 0);
    }

    #[test]
    fn rotation_needed_to_fit() {
        let r = pack_feasible([2.0, 5.0, 3.0], &[item([5.0, 3.0, 2.0])], &GaConfig::default()).unwrap();
        assert!(r.feasible);
        validate_placements([2.0, 5.0, 3.0], &[item([5.0, 3.0, 2.0])], &r.placements).unwrap();
    }

    #[test]
    fn oversized_box_exhausts_budget() {
        let cfg = GaConfig { generations: 15, ..Default::default() };
        let r = pack_feasible([4.0, 4.0, 4.0], &[item([1.0, 1.0, 5.0])], &cfg).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.generations_used, 15);
        assert_eq!(r.evaluations, cfg.population * 16 - 15);
    }

    #[test]
    fn eight_cubes_fill_a_cube() {
        let items: Vec<_> = (0..8).map(|_| item([1.0; 3])).collect();
        let r = pack_feasible([2.0; 3], &items, &GaConfig::default()).unwrap();
        assert!(r.feasible);
        validate_placements([2.0; 3], &items, &r.placements).unwrap();
    }

    #[test]
    fn deterministic_per_seed() {
        let items = vec![item([3.0, 2.0, 1.0]), item([2.0, 2.0, 2.0]), item([1.0, 1.0, 4.0])];
        let cfg = GaConfig { seed: 99, ..Default::default() };
        assert_eq!(pack_feasible([4.0, 3.0, 3.0], &items, &cfg).unwrap(), pack_feasible([4.0, 3.0, 3.0], &items, &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(pack_feasible([1.0; 3], &[], &GaConfig::default()).is_err());
        assert!(pack_feasible([0.0, 1.0, 1.0], &[item([1.0; 3])], &GaConfig::default()).is_err());
        let cfg = GaConfig { population: 1, ..Default::default() };
        assert!(pack_feasible([1.0; 3], &[item([1.0; 3])], &cfg).is_err());
    }

    #[test]
    fn order_crossover_yields_permutation() {
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let mut a: Vec<usize> = (0..9).collect();
            let mut b = a.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let mut c = order_crossover(&a, &b, &mut rng);
            c.sort();
            assert_eq!(c, (0..9).collect::<Vec<_>>());
        }
    }
}
