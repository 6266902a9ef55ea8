//! Multi-threaded drivers over the core's per-trial, per-start and per-cell
//! functions. Every reduction runs in index order, so each driver returns
//! exactly what its sequential counterpart in `mismatch-core` returns.

use mismatch_core::bounds::{
    achievability_table, assemble_sandwich, codebook_cell, ensemble_average, SandwichConfig, SandwichReport,
};
use mismatch_core::decoder::{Codebook, DecoderKind, ErrorEstimate, MonteCarlo};
use mismatch_core::rates::{best_of, grid_cross_check, optimize_from, starting_points, InputSearch, RateMode, RateResult};
use mismatch_core::{Budget, ChannelSpec, Error, InputDist, ProblemPair, Result};
use rayon::prelude::*;

/// Parallel [`mismatch_core::decoder::mc_error`]. Trial `t` always uses the
/// generator derived from `(seed, t)`, and error counts are summed as
/// integers, so the estimate does not depend on scheduling.
pub fn mc_error(cb: &Codebook, channel: &ChannelSpec, dec: &DecoderKind, trials: u64, seed: u64) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1"));
    }
    let mc = MonteCarlo::new(cb, channel, dec, seed)?;
    let errors = (0..trials).into_par_iter().filter(|&t| mc.trial(t)).count() as u64;
    Ok(MonteCarlo::estimate(errors, trials))
}

/// Parallel [`mismatch_core::rates::optimize_input`]: restarts run
/// concurrently and the best is chosen by value, earliest start on ties.
pub fn optimize_input(pair: &ProblemPair, mode: RateMode, search: &InputSearch, budget: &Budget) -> Result<RateResult> {
    budget.check("input alphabet", pair.input_size() as u128, budget.simplex as u128)?;
    let starts = starting_points(pair, search)?;
    let grid = search.grid_step;
    let (mut results, cross) = rayon::join(
        || {
            starts
                .par_iter()
                .map(|s| optimize_from(pair, mode, s, search.max_iter))
                .collect::<Result<Vec<_>>>()
        },
        || match grid {
            Some(step) => grid_cross_check(pair, mode, step, search.max_iter),
            None => Ok(None),
        },
    );
    if let Ok(r) = &mut results {
        if let Some(c) = cross? {
            r.push(c);
        }
    }
    best_of(results?).ok_or(Error::InvalidArgument("no starting points"))
}

/// Parallel [`mismatch_core::bounds::sandwich_report`] over the seeds.
pub fn sandwich_report(pair: &ProblemPair, p: &InputDist, cfg: &SandwichConfig, budget: &Budget) -> Result<SandwichReport> {
    let ach = achievability_table(pair, p, cfg, budget)?;
    let (cells, ensemble) = rayon::join(
        || {
            cfg.seeds
                .par_iter()
                .map(|&seed| codebook_cell(pair, p, cfg, seed, budget))
                .collect::<Result<Vec<_>>>()
        },
        || ensemble_average(pair, p, cfg, budget),
    );
    Ok(assemble_sandwich(cfg, &ach, cells?, ensemble?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mismatch_core::bounds::gamma_grid;
    use mismatch_core::channel::validate_pair;
    use mismatch_core::decoder::{gen_codebook, Ensemble};
    use mismatch_core::MetricSpec;

    fn pair() -> ProblemPair {
        validate_pair(ChannelSpec::bsc(0.1).unwrap(), MetricSpec::bsc(0.05).unwrap()).unwrap()
    }

    #[test]
    fn mc_matches_sequential() {
        let p = pair();
        let cb = gen_codebook(&Ensemble::Iid(InputDist::uniform(2).unwrap()), 6, 4, 3).unwrap();
        let dec = DecoderKind::stochastic(p.metric().clone());
        let par = mc_error(&cb, p.channel(), &dec, 5000, 17).unwrap();
        let seq = mismatch_core::decoder::mc_error(&cb, p.channel(), &dec, 5000, 17).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn input_search_matches_sequential() {
        let p = pair();
        let search = InputSearch {
            restarts: 4,
            seed: 2,
            grid_step: Some(1e-2),
            ..InputSearch::default()
        };
        let b = Budget::default();
        let par = optimize_input(&p, RateMode::Gmi, &search, &b).unwrap();
        let seq = mismatch_core::rates::optimize_input(&p, RateMode::Gmi, &search, &b).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn sandwich_matches_sequential() {
        let p = pair();
        let cfg = SandwichConfig {
            n: 4,
            m: 4,
            seeds: (0..8).rev().collect(),
            gammas: gamma_grid(4, 3),
            s_grid: vec![0.5, 1.0],
            mc_trials: 100,
        };
        let u = InputDist::uniform(2).unwrap();
        let b = Budget::default();
        assert_eq!(
            sandwich_report(&p, &u, &cfg, &b).unwrap(),
            mismatch_core::bounds::sandwich_report(&p, &u, &cfg, &b).unwrap()
        );
    }
}
