use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::genome::{Genome, MAX_LEN, MIN_LEN};
use super::vocab::ModifierVocabulary;
use crate::error::{Error, Result};
use crate::search::default_workers;
use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_replace: f64,
    pub p_insert: f64,
    pub p_delete: f64,
    pub elite_fraction: f64,
    pub rng_seed: Seed,
    /// Concurrent fitness evaluations; never affects results.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 150,
            generations: 25,
            tournament_size: 3,
            p_replace: 0.15,
            p_insert: 0.03,
            p_delete: 0.02,
            elite_fraction: 0.05,
            rng_seed: Seed(0),
            workers: default_workers(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_replace", self.p_replace),
            ("p_insert", self.p_insert),
            ("p_delete", self.p_delete),
            ("elite_fraction", self.elite_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.population < 2 || self.generations == 0 {
            return Err(Error::Config("need population >= 2 and generations >= 1".into()));
        }
        if self.elite_fraction * (self.population as f64) < 1.0 {
            return Err(Error::Config(format!(
                "elite_fraction {} keeps no individual of {}",
                self.elite_fraction, self.population
            )));
        }
        if self.tournament_size < 2 {
            return Err(Error::Config("tournament_size must be at least 2".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }

    /// `ceil(elite_fraction * population)`, at most the population.
    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population as f64).ceil() as usize).min(self.population)
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed.raw())
    }
}

fn check_vocab(vocab: &ModifierVocabulary) -> Result<()> {
    if vocab.usable().len() < MAX_LEN {
        return Err(Error::Config(format!(
            "{} usable modifiers; at least {MAX_LEN} are needed",
            vocab.usable().len()
        )));
    }
    Ok(())
}

fn random_modifier<R: Rng + ?Sized>(vocab: &ModifierVocabulary, rng: &mut R) -> String {
    let u = vocab.usable();
    u[rng.random_range(0..u.len())].clone()
}

/// `cfg.population` genomes with uniform lengths in `MIN_LEN..=MAX_LEN` and
/// no repeated modifier within a genome, drawn from `cfg.rng_seed`.
pub fn init_population(vocab: &ModifierVocabulary, cfg: &GaConfig) -> Result<Vec<Genome>> {
    init_population_with(vocab, cfg, &mut cfg.rng())
}

pub(crate) fn init_population_with<R: Rng + ?Sized>(
    vocab: &ModifierVocabulary,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Vec<Genome>> {
    check_vocab(vocab)?;
    let usable = vocab.usable();
    Ok((0..cfg.population)
        .map(|_| {
            let len = rng.random_range(MIN_LEN..=MAX_LEN);
            let picks = index::sample(rng, usable.len(), len);
            Genome::from_vec_unchecked(picks.iter().map(|i| usable[i].clone()).collect())
        })
        .collect())
}

/// Picks `cfg.tournament_size` contestants uniformly with replacement and
/// returns the index of the fittest (lowest), earlier index on ties. A
/// tournament at least as large as the population is exhaustive.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], cfg: &GaConfig, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "empty population");
    let better = |a: usize, b: usize| match fitness[a].total_cmp(&fitness[b]) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => a.min(b),
    };
    if cfg.tournament_size >= fitness.len() {
        return (1..fitness.len()).fold(0, better);
    }
    let first = rng.random_range(0..fitness.len());
    (1..cfg.tournament_size).fold(first, |best, _| better(best, rng.random_range(0..fitness.len())))
}

/// One-point crossover with a cut drawn independently in each parent at a
/// modifier boundary (`0..=len`).
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, vocab: &ModifierVocabulary, rng: &mut R) -> Genome {
    let cut_a = rng.random_range(0..=a.len());
    let cut_b = rng.random_range(0..=b.len());
    crossover_at(a, b, cut_a, cut_b, vocab, rng)
}

/// `a[..cut_a] ++ b[cut_b..]`, padded with random modifiers not yet present
/// when shorter than `MIN_LEN` and truncated to `MAX_LEN`.
pub fn crossover_at<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    cut_a: usize,
    cut_b: usize,
    vocab: &ModifierVocabulary,
    rng: &mut R,
) -> Genome {
    let mut child: Vec<String> = a.modifiers()[..cut_a]
        .iter()
        .chain(&b.modifiers()[cut_b..])
        .take(MAX_LEN)
        .cloned()
        .collect();
    while child.len() < MIN_LEN {
        let fresh: Vec<&String> = vocab.usable().iter().filter(|m| !child.contains(m)).collect();
        let pick = match fresh.len() {
            0 => random_modifier(vocab, rng),
            n => fresh[rng.random_range(0..n)].clone(),
        };
        child.push(pick);
    }
    Genome::from_vec_unchecked(child)
}

/// Which of the three mutations fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MutationEvents {
    pub replaced: bool,
    pub inserted: bool,
    pub deleted: bool,
}

/// Independently, in this order: with `p_replace` overwrite one random
/// position, with `p_insert` insert at a random position (not at
/// `MAX_LEN`), with `p_delete` remove a random position (not at `MIN_LEN`).
pub fn mutate<R: Rng + ?Sized>(
    g: &Genome,
    vocab: &ModifierVocabulary,
    cfg: &GaConfig,
    rng: &mut R,
) -> (Genome, MutationEvents) {
    let mut mods = g.modifiers().to_vec();
    let mut ev = MutationEvents::default();
    if rng.random_bool(cfg.p_replace) {
        let i = rng.random_range(0..mods.len());
        mods[i] = random_modifier(vocab, rng);
        ev.replaced = true;
    }
    if rng.random_bool(cfg.p_insert) && mods.len() < MAX_LEN {
        let i = rng.random_range(0..=mods.len());
        mods.insert(i, random_modifier(vocab, rng));
        ev.inserted = true;
    }
    if rng.random_bool(cfg.p_delete) && mods.len() > MIN_LEN {
        let i = rng.random_range(0..mods.len());
        mods.remove(i);
        ev.deleted = true;
    }
    (Genome::from_vec_unchecked(mods), ev)
}
