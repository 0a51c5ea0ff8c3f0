use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{Field, RoadClass};

use super::{RouteResult, Scenario};

/// Additive importance learned from earlier successful routes. Cells visited
/// by many of the best routes get up to half the top class weight on top of
/// their own importance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperienceBonus {
    bonus: HashMap<usize, f64>,
}

impl ExperienceBonus {
    pub fn cap() -> f64 {
        0.5 * RoadClass::max_weight()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.bonus.get(&index).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.bonus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bonus.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bonus.iter().map(|(&k, &v)| (k, v))
    }
}

/// Builds the bonus from the `top_n` highest-coverage routes (all of them
/// when `top_n` is 0). Every route must have come home.
pub fn experience_bonus(routes: &[RouteResult], field: &Field, top_n: usize) -> Result<ExperienceBonus> {
    if let Some(r) = routes.iter().find(|r| r.scenario != Scenario::Home) {
        return Err(Error::Input(format!("route with seed {} did not come home", r.seed)));
    }
    let mut ranked: Vec<&RouteResult> = routes.iter().collect();
    ranked.sort_by(|a, b| b.coverage.total_cmp(&a.coverage).then(a.seed.cmp(&b.seed)));
    if top_n > 0 {
        ranked.truncate(top_n);
    }
    if ranked.is_empty() {
        return Ok(ExperienceBonus::default());
    }
    let mut visits: HashMap<usize, usize> = HashMap::new();
    for route in &ranked {
        let mut seen: Vec<usize> = route.cells.iter().map(|&(r, c)| field.meta().index(r, c)).collect();
        seen.sort_unstable();
        seen.dedup();
        for idx in seen {
            *visits.entry(idx).or_insert(0) += 1;
        }
    }
    let n = ranked.len() as f64;
    let cap = ExperienceBonus::cap();
    Ok(ExperienceBonus { bonus: visits.into_iter().map(|(k, v)| (k, cap * v as f64 / n)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_field, SynthSpec};

    fn route(cells: Vec<(usize, usize)>, coverage: f64, scenario: Scenario) -> RouteResult {
        RouteResult { cells, distance_m: 0.0, scenario, alpha: 0.2, beta: 0.3, seed: 0, coverage, proposals: 0 }
    }

    fn flat() -> Field {
        synth_field(&SynthSpec { template: "flat".into(), n_rows: 10, n_cols: 10, ..Default::default() }).unwrap()
    }

    #[test]
    fn empty_routes_give_empty_bonus() {
        assert!(experience_bonus(&[], &flat(), 10).unwrap().is_empty());
    }

    #[test]
    fn single_route_marks_only_its_cells() {
        let f = flat();
        let r = route(vec![(1, 1), (1, 2), (2, 2), (1, 1)], 1.0, Scenario::Home);
        let b = experience_bonus(&[r], &f, 0).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.get(f.meta().index(1, 1)), 1.0);
        assert_eq!(b.get(f.meta().index(5, 5)), 0.0);
    }

    #[test]
    fn bonus_is_capped_and_proportional() {
        let f = flat();
        let a = route(vec![(1, 1), (1, 2), (1, 1)], 3.0, Scenario::Home);
        let b = route(vec![(1, 1), (2, 1), (1, 1)], 2.0, Scenario::Home);
        let c = route(vec![(5, 5), (5, 6), (5, 5)], 0.0, Scenario::Home);
        let bonus = experience_bonus(&[a, b, c], &f, 2).unwrap();
        assert!(bonus.iter().all(|(_, v)| v <= 1.0));
        assert_eq!(bonus.get(f.meta().index(1, 1)), 1.0);
        assert_eq!(bonus.get(f.meta().index(1, 2)), 0.5);
        assert_eq!(bonus.get(f.meta().index(5, 5)), 0.0);
    }

    #[test]
    fn rejects_routes_that_did_not_return() {
        let r = route(vec![(1, 1), (1, 2)], 1.0, Scenario::Exhausted);
        assert!(experience_bonus(&[r], &flat(), 0).is_err());
    }
}
