//! Reproducible random subsets of `[n]`.
//!
//! Every draw comes from a ChaCha8 stream selected by `(master seed, cell,
//! trial)`, so a trial's randomness does not depend on scheduling. One
//! uniform `u_x` per element decides membership (`u_x < p`); sharing those
//! uniforms couples samples at different probabilities and couples the
//! weighted sample inside the unweighted one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::to_f64;
use crate::weights::WeightFunction;

/// The generator for one `(cell, trial)` under a master seed.
pub fn stream_rng(master_seed: u64, cell: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((cell as u64) << 32) | trial as u64);
    rng
}

/// A sampled subset of `[n]`, with the part assignment when one was drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSetSample {
    pub n: u32,
    /// Sorted members.
    pub included: Vec<u32>,
    /// `ξ(x) - 1` for `x = 1..=n`, for weighted samples.
    pub parts: Option<Vec<usize>>,
}

impl RandomSetSample {
    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    pub fn part_of(&self, x: u32) -> Option<usize> {
        self.parts.as_ref().map(|p| p[x as usize - 1])
    }

    /// Members in part `i`, sorted.
    pub fn part_members(&self, i: usize) -> Vec<u32> {
        match &self.parts {
            None => Vec::new(),
            Some(parts) => self
                .included
                .iter()
                .copied()
                .filter(|&x| parts[x as usize - 1] == i)
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &RandomSetSample) -> bool {
        self.included.iter().all(|x| other.included.binary_search(x).is_ok())
    }
}

/// The shared randomness behind coupled samples: one uniform per element
/// and, optionally, a uniform part per element.
#[derive(Clone, Debug)]
pub struct CoupledDraw {
    uniforms: Vec<f64>,
    parts: Option<Vec<usize>>,
}

impl CoupledDraw {
    /// Uniforms first, then parts, so a draw with parts shares its uniforms
    /// with the draw without them.
    pub fn new(rng: &mut ChaCha8Rng, n: u32, parts: Option<usize>) -> Self {
        let uniforms = (0..n).map(|_| rng.random::<f64>()).collect();
        let parts = parts.map(|k| (0..n).map(|_| rng.random_range(0..k)).collect());
        CoupledDraw { uniforms, parts }
    }

    pub fn n(&self) -> u32 {
        self.uniforms.len() as u32
    }

    /// `{x : u_x < p}`.
    pub fn binomial(&self, p: f64) -> RandomSetSample {
        RandomSetSample {
            n: self.n(),
            included: self
                .uniforms
                .iter()
                .enumerate()
                .filter(|(_, &u)| u < p)
                .map(|(i, _)| i as u32 + 1)
                .collect(),
            parts: self.parts.clone(),
        }
    }

    /// `{x : u_x < p^{w(ξ(x))}}`; a subset of `binomial(p)` since `w >= 1`.
    pub fn weighted(&self, p: f64, w: &WeightFunction) -> Result<RandomSetSample> {
        let parts = self
            .parts
            .as_ref()
            .ok_or_else(|| Error::input("weighted sample needs a part assignment"))?;
        if parts.iter().any(|&i| i >= w.k()) {
            return Err(Error::input("part index exceeds the weight function"));
        }
        let probs: Vec<f64> = w.weights().iter().map(|wi| p.powf(to_f64(wi))).collect();
        Ok(RandomSetSample {
            n: self.n(),
            included: self
                .uniforms
                .iter()
                .zip(parts)
                .enumerate()
                .filter(|(_, (&u, &i))| u < probs[i])
                .map(|(x, _)| x as u32 + 1)
                .collect(),
            parts: Some(parts.clone()),
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} is outside [0, 1]")));
    }
    Ok(())
}

/// `[n]_p` from stream `(seed, 0, 0)`.
pub fn sample_binomial(n: u32, p: f64, seed: u64) -> Result<RandomSetSample> {
    check_probability(p)?;
    let draw = CoupledDraw::new(&mut stream_rng(seed, 0, 0), n, None);
    Ok(draw.binomial(p))
}

/// A weighted partite sample together with the unweighted sample it is
/// coupled inside.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledSample {
    pub weighted: RandomSetSample,
    pub unweighted: RandomSetSample,
}

/// `V_{n,p,w,k}` with `k = w.k()`, coupled with `[n]_p` from the same stream.
pub fn sample_weighted_partite(n: u32, p: f64, w: &WeightFunction, seed: u64) -> Result<CoupledSample> {
    sample_weighted_partite_with(&mut stream_rng(seed, 0, 0), n, p, w)
}

pub fn sample_weighted_partite_with(
    rng: &mut ChaCha8Rng,
    n: u32,
    p: f64,
    w: &WeightFunction,
) -> Result<CoupledSample> {
    check_probability(p)?;
    if p == 0.0 {
        return Err(Error::input("weighted sampling needs p > 0"));
    }
    let draw = CoupledDraw::new(rng, n, Some(w.k()));
    Ok(CoupledSample {
        weighted: draw.weighted(p, w)?,
        unweighted: draw.binomial(p),
    })
}
