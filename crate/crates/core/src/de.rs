//! Population-based differential evolution over whole trees.
//!
//! Each generation mutates around the best individual of the *previous*
//! generation, so all `N` trials can be built up front and scored in one
//! batched fitness call. Greedy one-to-one selection keeps every slot's
//! fitness monotone, which makes the best fitness non-increasing.

use rand::Rng;

use crate::codec::Individual;
use crate::data::{Dataset, ThresholdSets};
use crate::error::{Error, Result};
use crate::fitness::{evaluate_population, EvalConfig};
use crate::rng::{self, Purpose, Stream};
use crate::tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeMode {
    Normal,
    Long,
}

impl DeMode {
    pub fn population(self) -> usize {
        match self {
            DeMode::Normal => 100,
            DeMode::Long => 200,
        }
    }

    pub fn generations(self) -> usize {
        match self {
            DeMode::Normal => 600,
            DeMode::Long => 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub seed: u64,
}

pub const DEFAULT_CROSSOVER_RATE: f64 = 0.1;

impl DeConfig {
    pub fn new(mode: DeMode, seed: u64) -> Self {
        Self {
            pop_size: mode.population(),
            generations: mode.generations(),
            crossover_rate: DEFAULT_CROSSOVER_RATE,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::Config(format!("population size {} < 2", self.pop_size)));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::Config(format!(
                "crossover rate {} outside [0, 1]",
                self.crossover_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub fitnesses: Vec<f64>,
    pub best_index: usize,
    pub generation: usize,
}

impl Population {
    pub fn new(members: Vec<Individual>, fitnesses: Vec<f64>) -> Self {
        let mut pop = Self {
            members,
            fitnesses,
            best_index: 0,
            generation: 0,
        };
        pop.update_best();
        pop
    }

    pub fn best(&self) -> &Individual {
        &self.members[self.best_index]
    }

    pub fn best_fitness(&self) -> f64 {
        self.fitnesses[self.best_index]
    }

    fn update_best(&mut self) {
        self.best_index = self
            .fitnesses
            .iter()
            .enumerate()
            .fold(0, |best, (r, &f)| if f < self.fitnesses[best] { r } else { best });
    }
}

/// Initial members: encoded warm-start trees first, then uniform samples
/// from the gene box.
pub fn init_population(
    warm: &[TreeParams],
    cfg: &DeConfig,
    th: &ThresholdSets,
    depth: usize,
) -> Result<Vec<Individual>> {
    if warm.len() > cfg.pop_size {
        return Err(Error::Config(format!(
            "{} warm starts exceed population size {}",
            warm.len(),
            cfg.pop_size
        )));
    }
    if let Some(bad) = warm.iter().find(|t| t.depth() != depth) {
        return Err(Error::DepthMismatch {
            expected: depth,
            found: bad.depth(),
        });
    }
    let n_features = th.n_features();
    let len = Individual::len_for_depth(depth);
    let mut stream = rng::stream(cfg.seed, Purpose::Init);
    let mut members: Vec<Individual> = warm.iter().map(|t| Individual::encode(t, th)).collect();
    while members.len() < cfg.pop_size {
        let genes = (0..len)
            .map(|q| {
                let hi = if q < len / 2 { (n_features + 1) as f64 } else { 1.0 };
                stream.gen_range(0.0..hi)
            })
            .collect();
        members.push(Individual::new(genes));
    }
    Ok(members)
}

/// Two distinct member indices, either of which may equal the target slot.
pub fn draw_partners(stream: &mut Stream, pop_size: usize) -> (usize, usize) {
    let r1 = stream.gen_range(0..pop_size);
    let mut r2 = stream.gen_range(0..pop_size - 1);
    if r2 >= r1 {
        r2 += 1;
    }
    (r1, r2)
}

/// `best + factor * (a - b)`, clamped into the gene box.
pub fn mutate(best: &Individual, a: &Individual, b: &Individual, factor: f64, n_features: usize) -> Individual {
    let genes = best
        .genes
        .iter()
        .zip(a.genes.iter().zip(&b.genes))
        .map(|(&s, (&x, &y))| s + factor * (x - y))
        .collect();
    Individual::new(genes).clamped(n_features)
}

/// Binomial crossover: gene `q` comes from the mutant when a uniform draw is
/// `<= rate` or `q` is the one forced index.
pub fn crossover(parent: &Individual, mutant: &Individual, rate: f64, stream: &mut Stream) -> Individual {
    assert_eq!(parent.genes.len(), mutant.genes.len());
    let forced = stream.gen_range(0..parent.genes.len());
    let genes = parent
        .genes
        .iter()
        .zip(&mutant.genes)
        .enumerate()
        .map(|(q, (&p, &m))| {
            let draw: f64 = stream.gen();
            if draw <= rate || q == forced {
                m
            } else {
                p
            }
        })
        .collect();
    Individual::new(genes)
}

/// The trial replaces its parent when it is at least as fit.
pub fn select(parent_fitness: f64, trial_fitness: f64) -> bool {
    trial_fitness <= parent_fitness
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    /// Best tree with leaf classes assigned on the training data.
    pub tree: TreeParams,
    pub fitness: f64,
    /// Best fitness after initialization, then after each generation.
    pub history: Vec<f64>,
}

pub fn run_deoct(
    ds: &Dataset,
    th: &ThresholdSets,
    depth: usize,
    eval: &EvalConfig,
    cfg: &DeConfig,
    warm: &[TreeParams],
) -> Result<DeResult> {
    cfg.validate()?;
    let n_features = th.n_features();
    let members = init_population(warm, cfg, th, depth)?;
    let fitnesses = evaluate_population(&members, ds, th, eval);
    let mut pop = Population::new(members, fitnesses);

    let mut factors = rng::stream(cfg.seed, Purpose::Mutation);
    let mut partners = rng::stream(cfg.seed, Purpose::Partners);
    let mut crossing = rng::stream(cfg.seed, Purpose::Crossover);
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(pop.best_fitness());

    for generation in 1..=cfg.generations {
        let best = pop.best().clone();
        let trials: Vec<Individual> = (0..cfg.pop_size)
            .map(|r| {
                let factor: f64 = factors.gen();
                let (r1, r2) = draw_partners(&mut partners, cfg.pop_size);
                let mutant = mutate(&best, &pop.members[r1], &pop.members[r2], factor, n_features);
                crossover(&pop.members[r], &mutant, cfg.crossover_rate, &mut crossing)
            })
            .collect();
        let trial_fitness = evaluate_population(&trials, ds, th, eval);
        for (r, (trial, f)) in trials.into_iter().zip(trial_fitness).enumerate() {
            if select(pop.fitnesses[r], f) {
                pop.members[r] = trial;
                pop.fitnesses[r] = f;
            }
        }
        pop.update_best();
        pop.generation = generation;
        history.push(pop.best_fitness());
    }

    Ok(DeResult {
        tree: pop.best().decode(th).with_leaf_classes(ds),
        fitness: pop.best_fitness(),
        history,
    })
}
