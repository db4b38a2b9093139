use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::ga::{
    crossover, init_population, mutate, select_parents, FeatureMask, GaConfig, GaHistory,
    GenerationRecord, SelectionScope,
};
use crate::model::input::StreamInput;
use crate::model::{self, ModelTopology, Scenario};
use crate::nn::TrainConfig;
use crate::scalar::Scalar;
use crate::seeds::{self, mix, rng};
use crate::FEATURE_LEN;

/// Trains mask-selected models against a fixed validation split.
///
/// The 80/20 fitness split is drawn once per evaluator (seeded from the GA
/// seed), so fitness values stay comparable across generations.
pub struct FitnessEvaluator<T> {
    fit_train: StreamInput<T>,
    fit_val: StreamInput<T>,
    train_cfg: TrainConfig,
    scenario: Scenario,
}

impl<T: Scalar> FitnessEvaluator<T> {
    pub fn new(
        train_data: &Dataset<T>,
        scenario: Scenario,
        ga_cfg: &GaConfig,
        train_cfg: &TrainConfig,
        normalize: bool,
    ) -> Result<Self> {
        ga_cfg.validate()?;
        train_cfg.validate()?;
        let spec = SplitSpec {
            train_fraction: ga_cfg.fitness_train_fraction,
            seed: mix(ga_cfg.seed, &[seeds::TAG_GA_FITNESS_SPLIT]),
        };
        let (fit_train_ds, fit_val_ds) = split(train_data, &spec)?;
        let mut fit_train = StreamInput::from_dataset(&fit_train_ds, scenario)?;
        let mut fit_val = StreamInput::from_dataset(&fit_val_ds, scenario)?;
        if normalize {
            let norm = fit_train.fit_normalizer();
            fit_train.normalize(&norm);
            fit_val.normalize(&norm);
        }
        let mut train_cfg = train_cfg.clone();
        train_cfg.epochs = ga_cfg.fitness_epochs;
        Ok(FitnessEvaluator {
            fit_train,
            fit_val,
            train_cfg,
            scenario,
        })
    }

    /// Validation accuracy (in [0, 1]) of a model whose input width equals
    /// the mask popcount, trained from `train_seed` on the fitness-train
    /// portion.
    pub fn evaluate(&self, mask: &FeatureMask, train_seed: u64) -> Result<f64> {
        let topology = ModelTopology {
            kind: self.scenario.kind(),
            input_dim: mask.popcount(),
            hidden_units: self.train_cfg.hidden_units,
            activation: self.train_cfg.activation,
        };
        let mut cfg = self.train_cfg.clone();
        cfg.init_seed = train_seed;
        let batch = self.fit_train.batch(Some(mask))?;
        let labels = self.fit_train.label_indices();
        let (params, _) = model::train(topology, &batch, &labels, &cfg)?;
        let val_batch = self.fit_val.batch(Some(mask))?;
        let preds = params.predict_batch(&val_batch)?;
        let correct = preds
            .iter()
            .zip(self.fit_val.labels())
            .filter(|(p, t)| p == t)
            .count();
        Ok(correct as f64 / self.fit_val.num_samples() as f64)
    }
}

/// Standalone fitness of one mask, deterministic given its arguments.
pub fn fitness<T: Scalar>(
    mask: &FeatureMask,
    train_data: &Dataset<T>,
    scenario: Scenario,
    ga_cfg: &GaConfig,
    train_cfg: &TrainConfig,
) -> Result<f64> {
    let evaluator = FitnessEvaluator::new(train_data, scenario, ga_cfg, train_cfg, false)?;
    evaluator.evaluate(mask, mix(ga_cfg.seed, &[seeds::TAG_GA_FITNESS_TRAIN]))
}

/// Tournament reproduction: `tournament_group_count` groups each contribute
/// two mutated crossover offspring, and the fittest current chromosome is
/// appended unchanged (elitism), keeping the population size constant.
pub fn next_generation(
    population: &[FeatureMask],
    fitnesses: &[f64],
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<FeatureMask>> {
    cfg.validate()?;
    if population.len() != cfg.population_size || fitnesses.len() != population.len() {
        return Err(Error::validation(
            "population and fitness sizes must match the configuration",
        ));
    }
    if fitnesses.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::validation("fitness values must be finite and >= 0"));
    }
    let mask_len = population[0].len();
    let mut next = Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.tournament_group_count {
        let (parent_a, parent_b) = match cfg.selection_scope {
            SelectionScope::Group => {
                let members = rand::seq::index::sample(
                    rng,
                    population.len(),
                    cfg.tournament_group_size,
                )
                .into_vec();
                let group_fitness: Vec<f64> = members.iter().map(|&i| fitnesses[i]).collect();
                let (a, b) = select_parents(&group_fitness, rng)?;
                (members[a], members[b])
            }
            SelectionScope::Population => select_parents(fitnesses, rng)?,
        };
        let point = rand::Rng::gen_range(rng, 1..mask_len);
        let (child1, child2) = crossover(&population[parent_a], &population[parent_b], point)?;
        next.push(mutate(&child1, cfg.mutation_rate, rng)?);
        next.push(mutate(&child2, cfg.mutation_rate, rng)?);
    }
    let elite = argmax(fitnesses);
    next.push(population[elite].clone());
    Ok(next)
}

/// Runs the full evolution and returns the best-ever mask with the
/// per-generation history.
pub fn evolve<T: Scalar>(
    train_data: &Dataset<T>,
    scenario: Scenario,
    cfg: &GaConfig,
    train_cfg: &TrainConfig,
    normalize: bool,
) -> Result<(FeatureMask, GaHistory)> {
    evolve_with_observer(train_data, scenario, cfg, train_cfg, normalize, |_, _, _| {})
}

/// [`evolve`] with a per-generation callback receiving the generation index,
/// the evaluated population and its fitness values.
pub fn evolve_with_observer<T: Scalar, F>(
    train_data: &Dataset<T>,
    scenario: Scenario,
    cfg: &GaConfig,
    train_cfg: &TrainConfig,
    normalize: bool,
    mut observer: F,
) -> Result<(FeatureMask, GaHistory)>
where
    F: FnMut(usize, &[FeatureMask], &[f64]),
{
    let evaluator = FitnessEvaluator::new(train_data, scenario, cfg, train_cfg, normalize)?;
    let mut breeding_rng = rng(mix(cfg.seed, &[seeds::TAG_GA_EVOLVE]));
    let mut population = init_population(cfg, FEATURE_LEN)?;
    // Every evaluation in a run trains from the same derived seed, so
    // fitness is a pure function of the mask: chromosome comparisons are
    // free of init-lottery noise, the elite's cached value stays exact, and
    // parallel evaluation is trivially identical to sequential execution.
    let fitness_train_seed = mix(cfg.seed, &[seeds::TAG_GA_FITNESS_TRAIN]);
    let mut carried: Vec<Option<f64>> = vec![None; population.len()];
    let mut records = Vec::with_capacity(cfg.generations);
    let mut best_ever: Option<(f64, FeatureMask)> = None;

    for generation in 0..cfg.generations {
        let fitnesses: Vec<f64> = population
            .par_iter()
            .enumerate()
            .map(|(index, mask)| match carried[index] {
                Some(fitness) => Ok(fitness),
                None => evaluator.evaluate(mask, fitness_train_seed),
            })
            .collect::<Result<Vec<f64>>>()?;
        observer(generation, &population, &fitnesses);

        let best = argmax(&fitnesses);
        let mean = fitnesses.iter().sum::<f64>() / fitnesses.len() as f64;
        records.push(GenerationRecord {
            generation,
            best_fitness: fitnesses[best],
            mean_fitness: mean,
            best_mask: population[best].clone(),
        });
        if best_ever
            .as_ref()
            .map_or(true, |(f, _)| fitnesses[best] > *f)
        {
            best_ever = Some((fitnesses[best], population[best].clone()));
        }

        if generation + 1 < cfg.generations {
            let best_fitness = fitnesses[best];
            population = next_generation(&population, &fitnesses, cfg, &mut breeding_rng)?;
            carried = vec![None; population.len()];
            // next_generation appends the elite last
            *carried.last_mut().unwrap() = Some(best_fitness);
        }
    }

    let (_, best_mask) = best_ever.expect("at least one generation ran");
    Ok((best_mask, GaHistory::new(records)))
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
