use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::genome::Genome;
use super::operators::{crossover, init_population_with, mutate, tournament_select, GaConfig};
use super::oracle::GeneratorOracle;
use super::vocab::ModifierVocabulary;
use crate::error::{Error, Result};
use crate::search::{build_pool, mse_prefix};
use crate::seed::Seed;
use crate::tensor::LatentVector;

/// Full-vector MSE between `target` and the oracle's latent for `g`.
pub fn fitness(
    g: &Genome,
    prefix: &str,
    seed: Seed,
    target: &LatentVector,
    oracle: &dyn GeneratorOracle,
) -> Result<f64> {
    let latent = oracle.generate(prefix, g.modifiers(), seed)?;
    if latent.shape() != target.shape() {
        let mut reason = format!(
            "shape contract violated: produced {:?}, target is {:?}",
            latent.shape(),
            target.shape()
        );
        if let Some(ex) = oracle.last_exchange() {
            reason.push_str(&format!("; last exchange: {ex}"));
        }
        return Err(Error::Oracle {
            oracle: oracle.name().to_owned(),
            reason,
        });
    }
    mse_prefix(&latent, target, target.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveResult {
    pub best: Genome,
    pub best_fitness: f64,
    /// Best fitness seen up to and including each generation.
    pub trace: Vec<f64>,
    /// Oracle calls made.
    pub evaluations: usize,
    /// Individuals scored from the cache instead of the oracle.
    pub cache_hits: usize,
}

struct Evaluator<'a> {
    prefix: &'a str,
    seed: Seed,
    target: &'a LatentVector,
    oracle: &'a dyn GeneratorOracle,
    pool: rayon::ThreadPool,
    cache: HashMap<Genome, f64>,
    evaluations: usize,
    cache_hits: usize,
}

impl Evaluator<'_> {
    /// Scores by population index; uncached genomes go to the oracle
    /// concurrently, so completion order never matters.
    fn score(&mut self, generation: usize, pop: &[Genome]) -> Result<Vec<f64>> {
        let mut fresh: Vec<usize> = Vec::new();
        let mut queued: HashMap<&Genome, ()> = HashMap::new();
        for (i, g) in pop.iter().enumerate() {
            if !self.cache.contains_key(g) && queued.insert(g, ()).is_none() {
                fresh.push(i);
            }
        }
        self.cache_hits += pop.len() - fresh.len();
        self.evaluations += fresh.len();
        let (prefix, seed, target, oracle) = (self.prefix, self.seed, self.target, self.oracle);
        let results: Vec<Result<f64>> = self.pool.install(|| {
            fresh
                .par_iter()
                .map(|&i| fitness(&pop[i], prefix, seed, target, oracle))
                .collect()
        });
        for (&i, r) in fresh.iter().zip(results) {
            let f = r.map_err(|e| match e {
                Error::Oracle { oracle, reason } => Error::Oracle {
                    oracle,
                    reason: format!("generation {generation}, individual {i} {}: {reason}", pop[i]),
                },
                other => other,
            })?;
            self.cache.insert(pop[i].clone(), f);
        }
        Ok(pop.iter().map(|g| self.cache[g]).collect())
    }
}

/// Runs the genetic search: each generation is scored, the elite is copied
/// unchanged and the rest is bred by tournament selection, crossover and
/// mutation from one random stream seeded by `cfg.rng_seed`. Returns the best
/// genome ever scored (earliest on ties).
pub fn evolve(
    target: &LatentVector,
    prefix: &str,
    seed: Seed,
    vocab: &ModifierVocabulary,
    oracle: &dyn GeneratorOracle,
    cfg: &GaConfig,
) -> Result<EvolveResult> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let mut pop = init_population_with(vocab, cfg, &mut rng)?;
    let mut eval = Evaluator {
        prefix,
        seed,
        target,
        oracle,
        pool: build_pool(cfg.workers)?,
        cache: HashMap::new(),
        evaluations: 0,
        cache_hits: 0,
    };
    let mut best: Option<(Genome, f64)> = None;
    let mut trace = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let fit = eval.score(generation, &pop)?;
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let top = order[0];
        if best.as_ref().is_none_or(|(_, f)| fit[top] < *f) {
            best = Some((pop[top].clone(), fit[top]));
        }
        trace.push(best.as_ref().expect("set above").1);
        if generation + 1 == cfg.generations {
            break;
        }
        let mut next: Vec<Genome> = order[..cfg.elite_count()].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < cfg.population {
            let a = tournament_select(&fit, cfg, &mut rng);
            let b = tournament_select(&fit, cfg, &mut rng);
            let child = crossover(&pop[a], &pop[b], vocab, &mut rng);
            next.push(mutate(&child, vocab, cfg, &mut rng).0);
        }
        pop = next;
    }
    let (best, best_fitness) = best.expect("at least one generation");
    Ok(EvolveResult {
        best,
        best_fitness,
        trace,
        evaluations: eval.evaluations,
        cache_hits: eval.cache_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::MockOracle;

    struct Fixed(LatentVector);

    impl GeneratorOracle for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }

        fn generate(&self, _: &str, _: &[String], _: Seed) -> Result<LatentVector> {
            Ok(self.0.clone())
        }
    }

    fn vocab() -> ModifierVocabulary {
        ModifierVocabulary::from_modifiers((0..20).map(|i| format!("m{i}"))).unwrap()
    }

    #[test]
    fn shape_mismatch_names_the_oracle() {
        let o = Fixed(LatentVector::new(vec![0.0; 8], vec![2, 4]).unwrap());
        let target = LatentVector::new(vec![0.0; 8], vec![4, 2]).unwrap();
        let g = Genome::new(vec!["m1".into(), "m2".into(), "m3".into()], &vocab()).unwrap();
        match fitness(&g, "p", Seed(0), &target, &o) {
            Err(Error::Oracle { oracle, reason }) => {
                assert_eq!(oracle, "fixed");
                assert!(reason.contains("shape"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
        let same = LatentVector::new(vec![0.0; 8], vec![2, 4]).unwrap();
        assert_eq!(fitness(&g, "p", Seed(0), &same, &o).unwrap(), 0.0);
    }

    #[test]
    fn small_run_is_monotone_and_worker_independent() {
        let oracle = MockOracle::new(&[4, 8, 8]).unwrap();
        let planted: Vec<String> = ["m2", "m5", "m11", "m17"].iter().map(|s| s.to_string()).collect();
        let target = oracle.generate("p", &planted, Seed(9)).unwrap();
        let cfg = |workers| GaConfig {
            population: 30,
            generations: 6,
            workers,
            ..GaConfig::default()
        };
        let a = evolve(&target, "p", Seed(9), &vocab(), &oracle, &cfg(1)).unwrap();
        let b = evolve(&target, "p", Seed(9), &vocab(), &oracle, &cfg(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 6);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.cache_hits > 0);
    }
}
