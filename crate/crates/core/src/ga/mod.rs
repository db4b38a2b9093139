//! Genetic feature selection over the padded feature positions.
//!
//! A chromosome is a binary mask over the 186 feature positions; fitness is
//! the validation accuracy of a network trained on the selected columns.
//! Reproduction is tournament based: groups are drawn from the population
//! (with replacement across groups, without replacement within one), each
//! group contributes two offspring via fitness-proportional parent selection,
//! one-point crossover and bit-flip mutation, and the generation's best
//! chromosome is retained unchanged.

mod evolve;

pub use evolve::{evolve, evolve_with_observer, fitness, next_generation, FitnessEvaluator};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary feature-selection mask; 1 keeps a position, 0 drops it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::validation("mask must have at least one position"));
        }
        Ok(FeatureMask { bits })
    }

    /// All positions kept.
    pub fn full(len: usize) -> Self {
        FeatureMask {
            bits: vec![true; len],
        }
    }

    /// Each bit set independently with probability 1/2. May come out all
    /// zero; callers repair before use.
    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        FeatureMask {
            bits: (0..len).map(|_| rng.gen::<bool>()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of kept positions, ascending.
    pub fn selected_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn to_01_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_01_string(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::validation(format!(
                    "mask strings may only contain 0 and 1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        FeatureMask::new(bits)
    }

    /// Hex rendering of the bit string, 4 bits per character, first position
    /// in the most significant bit of the first character.
    pub fn to_hex_string(&self) -> String {
        self.bits
            .chunks(4)
            .map(|chunk| {
                let mut nibble = 0u8;
                for (i, &b) in chunk.iter().enumerate() {
                    if b {
                        nibble |= 1 << (3 - i);
                    }
                }
                char::from_digit(nibble as u32, 16).unwrap()
            })
            .collect()
    }
}

/// Tournament GA settings. The population holds `2 * tournament_group_count`
/// offspring plus one retained elite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_group_count: usize,
    pub tournament_group_size: usize,
    pub mutation_rate: f64,
    pub fitness_train_fraction: f64,
    pub fitness_epochs: usize,
    pub selection_scope: SelectionScope,
    pub seed: u64,
}

/// Where fitness values are normalized when drawing parents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionScope {
    /// Proportional selection among the members of each tournament group.
    Group,
    /// Proportional selection over the whole population; tournament groups
    /// are not drawn in this mode.
    Population,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 21,
            generations: 10,
            tournament_group_count: 10,
            tournament_group_size: 9,
            mutation_rate: 0.001,
            fitness_train_fraction: 0.8,
            fitness_epochs: 300,
            selection_scope: SelectionScope::Group,
            seed: 0,
        }
    }
}

impl GaConfig {
    /// Default settings for a different population size; the tournament
    /// group count follows as `(population - 1) / 2`.
    pub fn for_population(population_size: usize) -> Result<Self> {
        if population_size < 3 || population_size % 2 == 0 {
            return Err(Error::validation(
                "population size must be odd and at least 3",
            ));
        }
        let cfg = GaConfig {
            population_size,
            tournament_group_count: (population_size - 1) / 2,
            tournament_group_size: GaConfig::default().tournament_group_size.min(population_size),
            ..GaConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size != 2 * self.tournament_group_count + 1 {
            return Err(Error::validation(format!(
                "population size {} must equal 2 * tournament_group_count + 1 = {}",
                self.population_size,
                2 * self.tournament_group_count + 1
            )));
        }
        if self.population_size % 2 == 0 {
            return Err(Error::validation("population size must be odd"));
        }
        if self.tournament_group_size < 2 || self.tournament_group_size > self.population_size {
            return Err(Error::validation(format!(
                "tournament group size {} must lie in [2, {}]",
                self.tournament_group_size, self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::validation("mutation rate must lie in [0, 1]"));
        }
        if !(self.fitness_train_fraction > 0.0 && self.fitness_train_fraction < 1.0) {
            return Err(Error::validation("fitness train fraction must lie in (0, 1)"));
        }
        if self.generations == 0 {
            return Err(Error::validation("generations must be at least 1"));
        }
        if self.fitness_epochs == 0 {
            return Err(Error::validation("fitness epochs must be at least 1"));
        }
        Ok(())
    }
}

/// Per-generation record of the evolution run.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_mask: FeatureMask,
}

/// Evolution trace, one record per generation.
#[derive(Clone, Debug, PartialEq)]
pub struct GaHistory {
    records: Vec<GenerationRecord>,
}

impl GaHistory {
    pub(crate) fn new(records: Vec<GenerationRecord>) -> Self {
        GaHistory { records }
    }

    pub fn records(&self) -> &[GenerationRecord] {
        &self.records
    }

    pub fn best(&self) -> &GenerationRecord {
        self.records
            .iter()
            .max_by(|a, b| a.best_fitness.partial_cmp(&b.best_fitness).unwrap())
            .expect("history is never empty")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,best_mask_hex\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.generation,
                r.best_fitness,
                r.mean_fitness,
                r.best_mask.to_hex_string()
            ));
        }
        out
    }
}

/// Population of random masks, deterministic given `cfg.seed`; every mask is
/// repaired to keep at least one position.
pub fn init_population(cfg: &GaConfig, mask_len: usize) -> Result<Vec<FeatureMask>> {
    cfg.validate()?;
    if mask_len == 0 {
        return Err(Error::validation("mask length must be positive"));
    }
    let mut rng = crate::seeds::rng(crate::seeds::mix(cfg.seed, &[crate::seeds::TAG_GA_INIT]));
    Ok((0..cfg.population_size)
        .map(|_| {
            let mut mask = FeatureMask::random(mask_len, &mut rng);
            repair(&mut mask, &mut rng);
            mask
        })
        .collect())
}

/// Sets one uniformly random bit if the mask is all zero; otherwise leaves
/// it untouched. An all-zero mask would give the fitness network no inputs.
pub fn repair<R: Rng>(mask: &mut FeatureMask, rng: &mut R) {
    if mask.popcount() == 0 {
        let index = rng.gen_range(0..mask.len());
        mask.bits[index] = true;
    }
}

/// Flips each bit independently with probability `rate`, then repairs.
pub fn mutate<R: Rng>(mask: &FeatureMask, rate: f64, rng: &mut R) -> Result<FeatureMask> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::validation(format!(
            "mutation rate {rate} outside [0, 1]"
        )));
    }
    let mut out = mask.clone();
    for bit in out.bits.iter_mut() {
        if rng.gen::<f64>() < rate {
            *bit = !*bit;
        }
    }
    repair(&mut out, rng);
    Ok(out)
}

/// One-point crossover: children swap the tails after `point`, which must
/// lie in `[1, len - 1]`.
pub fn crossover(
    a: &FeatureMask,
    b: &FeatureMask,
    point: usize,
) -> Result<(FeatureMask, FeatureMask)> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "crossover of masks with different lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if point == 0 || point >= a.len() {
        return Err(Error::validation(format!(
            "crossover point {point} outside [1, {}]",
            a.len() - 1
        )));
    }
    let mut child1 = a.bits.clone();
    let mut child2 = b.bits.clone();
    child1[point..].copy_from_slice(&b.bits[point..]);
    child2[point..].copy_from_slice(&a.bits[point..]);
    Ok((FeatureMask { bits: child1 }, FeatureMask { bits: child2 }))
}

/// Two distinct draws proportional to the (non-negative) fitness values,
/// normalized within the given slice; uniform when every fitness is zero.
/// Returns indices into the slice.
pub fn select_parents<R: Rng>(fitnesses: &[f64], rng: &mut R) -> Result<(usize, usize)> {
    if fitnesses.len() < 2 {
        return Err(Error::validation(
            "parent selection requires at least two candidates",
        ));
    }
    if fitnesses.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::validation("fitness values must be finite and >= 0"));
    }
    let first = weighted_draw(fitnesses, None, rng);
    let second = weighted_draw(fitnesses, Some(first), rng);
    Ok((first, second))
}

/// Draws an index with probability proportional to its weight, skipping
/// `exclude`; falls back to a uniform draw when the usable total is zero.
/// Scaling every weight by a constant leaves the outcome distribution (and,
/// for power-of-two constants, the exact draws) unchanged because only the
/// normalized prefix sums are compared against the uniform variate.
fn weighted_draw<R: Rng>(weights: &[f64], exclude: Option<usize>, rng: &mut R) -> usize {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(_, w)| *w)
        .sum();
    let candidates: Vec<usize> = (0..weights.len())
        .filter(|i| Some(*i) != exclude)
        .collect();
    let u: f64 = rng.gen();
    if total <= 0.0 {
        return candidates[(u * candidates.len() as f64) as usize % candidates.len()];
    }
    let mut acc = 0.0;
    for &i in &candidates {
        acc += weights[i];
        if u < acc / total {
            return i;
        }
    }
    *candidates.last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng;
    use proptest::prelude::*;

    #[test]
    fn init_population_is_deterministic_and_repaired() {
        let cfg = GaConfig {
            seed: 3,
            ..GaConfig::default()
        };
        let a = init_population(&cfg, 186).unwrap();
        let b = init_population(&cfg, 186).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 21);
        assert!(a.iter().all(|m| m.popcount() >= 1 && m.len() == 186));
    }

    #[test]
    fn init_population_popcount_is_binomial() {
        // 1000 masks of 186 fair bits: mean popcount 93, per-mask sd
        // sqrt(186)/2; the sample mean lands within 3 standard errors.
        let mut masks = Vec::new();
        for seed in 0..48 {
            let cfg = GaConfig {
                seed,
                ..GaConfig::default()
            };
            masks.extend(init_population(&cfg, 186).unwrap());
        }
        masks.truncate(1000);
        assert_eq!(masks.len(), 1000);
        let mean = masks.iter().map(|m| m.popcount() as f64).sum::<f64>() / 1000.0;
        let sd = (186.0f64 * 0.25).sqrt();
        let tol = 3.0 * sd / 1000.0f64.sqrt();
        assert!((mean - 93.0).abs() < tol, "mean={mean} tol={tol}");
    }

    #[test]
    fn repair_sets_exactly_one_bit_uniformly() {
        let mut counts = vec![0u32; 186];
        let mut r = rng(5);
        for _ in 0..10_000 {
            let mut mask = FeatureMask::new(vec![false; 186]).unwrap();
            repair(&mut mask, &mut r);
            assert_eq!(mask.popcount(), 1);
            counts[mask.selected_indices()[0]] += 1;
        }
        // chi-squared against uniform: 185 dof, mean 185, sd ~19.2
        let expected = 10_000.0 / 186.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 300.0, "chi2={chi2}");

        let mut nonzero = FeatureMask::new(vec![false, true, false]).unwrap();
        let before = nonzero.clone();
        repair(&mut nonzero, &mut r);
        assert_eq!(nonzero, before);
    }

    #[test]
    fn mutate_rate_zero_and_one() {
        let mut r = rng(9);
        let mask = FeatureMask::from_01_string("10110").unwrap();
        assert_eq!(mutate(&mask, 0.0, &mut r).unwrap(), mask);
        let complement = mutate(&mask, 1.0, &mut r).unwrap();
        assert_eq!(complement.to_01_string(), "01001");
        // complement of a full mask is all-zero, then repaired to one bit
        let full = FeatureMask::full(5);
        let repaired = mutate(&full, 1.0, &mut r).unwrap();
        assert_eq!(repaired.popcount(), 1);
        assert!(mutate(&mask, 1.5, &mut r).is_err());
    }

    #[test]
    fn mutate_flip_frequency_matches_rate() {
        // 2000 masks x 500 bits = 1e6 bits at rate 0.01.
        let mut r = rng(11);
        let rate = 0.01;
        let mask = FeatureMask::full(500);
        let mut flips = 0u64;
        for _ in 0..2000 {
            let mutated = mutate(&mask, rate, &mut r).unwrap();
            flips += mutated.bits().iter().filter(|&&b| !b).count() as u64;
        }
        let n = 1_000_000f64;
        let expected = n * rate;
        let tol = 3.0 * (n * rate * (1.0 - rate)).sqrt();
        assert!(
            ((flips as f64) - expected).abs() < tol,
            "flips={flips} expected={expected} tol={tol}"
        );
    }

    #[test]
    fn crossover_matches_spec_example() {
        let a = FeatureMask::from_01_string("10101").unwrap();
        let b = FeatureMask::from_01_string("01010").unwrap();
        let (c1, c2) = crossover(&a, &b, 2).unwrap();
        assert_eq!(c1.to_01_string(), "10010");
        assert_eq!(c2.to_01_string(), "01101");
        let (d1, d2) = crossover(&a, &a, 3).unwrap();
        assert_eq!(d1, a);
        assert_eq!(d2, a);
        assert!(crossover(&a, &b, 0).is_err());
        assert!(crossover(&a, &b, 5).is_err());
    }

    #[test]
    fn select_parents_degenerate_distribution() {
        let mut r = rng(2);
        for _ in 0..200 {
            let (a, b) = select_parents(&[1.0, 0.0, 0.0, 0.0], &mut r).unwrap();
            assert_eq!(a, 0, "nonzero-fitness member must always win the first draw");
            assert_ne!(b, 0, "second draw excludes the first parent");
        }
        assert!(select_parents(&[1.0], &mut r).is_err());
        assert!(select_parents(&[1.0, f64::NAN], &mut r).is_err());
        assert!(select_parents(&[1.0, -0.1], &mut r).is_err());
    }

    #[test]
    fn select_parents_uniform_when_fitness_equal() {
        let mut r = rng(4);
        let mut counts = [0u32; 5];
        let trials = 100_000;
        for _ in 0..trials {
            let (a, _) = select_parents(&[0.2; 5], &mut r).unwrap();
            counts[a] += 1;
        }
        let expected = trials as f64 / 5.0;
        let tol = 3.0 * (trials as f64 * 0.2 * 0.8).sqrt();
        for &c in &counts {
            assert!((c as f64 - expected).abs() < tol, "counts={counts:?}");
        }
    }

    #[test]
    fn selection_invariant_to_power_of_two_scaling() {
        let fitness = [0.3, 0.1, 0.45, 0.05, 0.9];
        let scaled: Vec<f64> = fitness.iter().map(|f| f * 4.0).collect();
        let mut r1 = rng(7);
        let mut r2 = rng(7);
        for _ in 0..1000 {
            assert_eq!(
                select_parents(&fitness, &mut r1).unwrap(),
                select_parents(&scaled, &mut r2).unwrap()
            );
        }
    }

    #[test]
    fn all_zero_fitness_falls_back_to_uniform() {
        let mut r = rng(13);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let (a, b) = select_parents(&[0.0; 4], &mut r).unwrap();
            assert_ne!(a, b);
            seen.insert(a);
        }
        assert_eq!(seen.len(), 4, "uniform fallback must reach every index");
    }

    #[test]
    fn hex_rendering() {
        let mask = FeatureMask::from_01_string("11110000").unwrap();
        assert_eq!(mask.to_hex_string(), "f0");
        let mask = FeatureMask::from_01_string("10100").unwrap();
        // 1010 0 -> a, then trailing nibble 0(000) -> 0
        assert_eq!(mask.to_hex_string(), "a0");
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { population_size: 20, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { tournament_group_size: 1, ..GaConfig::default() }
            .validate()
            .is_err());
        assert!(GaConfig { tournament_group_size: 22, ..GaConfig::default() }
            .validate()
            .is_err());
        assert!(GaConfig { mutation_rate: -0.1, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { generations: 0, ..GaConfig::default() }.validate().is_err());
        let small = GaConfig::for_population(5).unwrap();
        assert_eq!(small.tournament_group_count, 2);
        assert_eq!(small.tournament_group_size, 5);
        assert!(GaConfig::for_population(4).is_err());
    }

    proptest! {
        #[test]
        fn crossover_preserves_positionwise_bits(
            seed in 0u64..500,
            point in 1usize..186,
        ) {
            let mut r = rng(seed);
            let a = FeatureMask::random(186, &mut r);
            let b = FeatureMask::random(186, &mut r);
            let (c1, c2) = crossover(&a, &b, point).unwrap();
            for i in 0..186 {
                let parents = (a.get(i), b.get(i));
                let children = (c1.get(i), c2.get(i));
                prop_assert!(children == parents || children == (parents.1, parents.0));
            }
        }
    }
}
