//! Round wall time against population size on generated open maps.
//!
//! The floor grows with the population (about eight cells per agent) so
//! that local density, and with it per-agent perception work, stays flat.

use std::sync::Arc;
use std::time::Instant;

use gridsoc_core::decision::MockBackend;
use gridsoc_core::engine::EngineConfig;
use gridsoc_core::population::{GroupSpec, PopulationSpec};
use gridsoc_core::session::{Scenario, Session, SessionError};
use gridsoc_core::world::{MapDocument, RegionDoc};
use gridsoc_core::Coord;
use serde::{Deserialize, Serialize};

use crate::load::sample_lexicon;

pub const SIZES: [usize; 3] = [10, 100, 1000];
const CELLS_PER_AGENT: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub agents: usize,
    pub rounds: u64,
    pub mean_round_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// One open floor region holding `agents` mock residents.
pub fn open_scenario(agents: usize) -> Scenario {
    let side = ((agents * CELLS_PER_AGENT) as f64).sqrt().ceil().max(6.0) as u32;
    let mut map = MapDocument::open_floor(side, side);
    let cells: Vec<Coord> = map.cells.iter().map(|c| Coord::new(c.x, c.y)).collect();
    map.regions.push(RegionDoc { name: "Floor".into(), description: "an open hall".into(), cells });
    let group = GroupSpec {
        name: "Crowd".into(),
        size: agents as u32,
        stance_label: "people in the hall".into(),
        long_term_goal_template: "Get through the day as a {occupation}.".into(),
        self_awareness_template: "I am {name}, a {occupation}.".into(),
        short_term_goal: "look around".into(),
        initial_items: Vec::new(),
        initial_region: "Floor".into(),
        distributions: Vec::new(),
        occupations: vec!["clerk".into(), "baker".into(), "driver".into(), "nurse".into()],
        names: Vec::new(),
    };
    Scenario {
        name: format!("open floor {agents}"),
        description: String::new(),
        map,
        population: PopulationSpec { groups: vec![group], ..PopulationSpec::default() },
        events: Vec::new(),
        questionnaire: Vec::new(),
        config: EngineConfig::default(),
        spawn_region: None,
        phases: Vec::new(),
        rounds: 0,
        slots: Vec::new(),
    }
}

/// Mean wall time of `rounds` rounds after one untimed warm-up round.
pub fn measure(agents: usize, rounds: u64, seed: u64) -> Result<ScalingPoint, SessionError> {
    let scenario = Arc::new(open_scenario(agents));
    let dim = scenario.config.embed_dim;
    let mut s = Session::create("scaling", scenario, Arc::new(sample_lexicon()), seed, "mock")?;
    let mut backend = MockBackend::new(seed, dim);
    s.step(&mut backend);
    let start = Instant::now();
    for _ in 0..rounds {
        s.step(&mut backend);
    }
    let mean_round_secs = start.elapsed().as_secs_f64() / rounds.max(1) as f64;
    Ok(ScalingPoint { agents, rounds, mean_round_secs })
}

/// Ordinary least squares `y = slope * x + intercept` and its R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn sweep(sizes: &[usize], rounds: u64, seed: u64) -> Result<ScalingReport, SessionError> {
    let points = sizes.iter().map(|&n| measure(n, rounds, seed)).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.agents as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_round_secs).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(ScalingReport { points, slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_exact_line() {
        let (m, b, r2) = linear_fit(&[10.0, 100.0, 1000.0], &[1.5, 10.5, 100.5]);
        assert!((m - 0.1).abs() < 1e-12 && (b - 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_scenario_validates() {
        for n in [1, 10, 1000] {
            open_scenario(n).check().unwrap();
        }
    }
}
