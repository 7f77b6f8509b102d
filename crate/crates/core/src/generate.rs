//! Seeded random instances with a planted sparse solution.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Instance, Norm, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictionaryKind {
    /// Independent standard normal entries.
    Gaussian,
    /// `[A | A + εE]`: every column of the second block is a perturbed copy
    /// of one in the first.
    Correlated,
}

impl std::str::FromStr for DictionaryKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(DictionaryKind::Gaussian),
            "correlated" => Ok(DictionaryKind::Correlated),
            other => Err(format!("unknown dictionary kind `{other}` (expected gaussian or correlated)")),
        }
    }
}

impl std::fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DictionaryKind::Gaussian => "gaussian",
            DictionaryKind::Correlated => "correlated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub kind: DictionaryKind,
    pub n: usize,
    pub m: usize,
    /// Number of nonzeros in the planted solution.
    pub k: usize,
    /// Standard deviation of the additive observation noise.
    pub noise: f64,
    /// `α = (1 + margin)·‖noise‖ₚ`.
    pub margin: f64,
    /// Perturbation size of the correlated block.
    pub epsilon: f64,
    pub norm: Norm,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(kind: DictionaryKind, n: usize, m: usize, k: usize, norm: Norm, seed: u64) -> Self {
        GenConfig {
            kind,
            n,
            m,
            k,
            noise: 0.0,
            margin: 0.1,
            epsilon: 0.05,
            norm,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("n and m must be at least 1".into()));
        }
        if !(1..=self.m).contains(&self.k) {
            return Err(Error::Config(format!("need 1 ≤ k ≤ m, got k = {}, m = {}", self.k, self.m)));
        }
        for (name, v) in [("noise", self.noise), ("margin", self.margin), ("epsilon", self.epsilon)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    pub planted: Support,
    pub x_planted: Vec<f64>,
}

fn gaussian_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(col: &mut [f64]) {
    let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        col.iter_mut().for_each(|v| *v /= norm);
    }
}

pub fn generate_instance(cfg: &GenConfig) -> Result<Generated> {
    cfg.validate()?;
    let GenConfig { n, m, k, .. } = *cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut columns: Vec<Vec<f64>> = match cfg.kind {
        DictionaryKind::Gaussian => (0..m).map(|_| gaussian_column(&mut rng, n)).collect(),
        DictionaryKind::Correlated => {
            let half = m.div_ceil(2);
            let mut base: Vec<Vec<f64>> = (0..half).map(|_| gaussian_column(&mut rng, n)).collect();
            base.iter_mut().for_each(|c| normalize(c));
            let copies: Vec<Vec<f64>> = base[..m - half]
                .iter()
                .map(|a| {
                    let e = gaussian_column(&mut rng, n);
                    a.iter().zip(e).map(|(a, e)| a + cfg.epsilon * e).collect()
                })
                .collect();
            base.extend(copies);
            base
        }
    };
    columns.iter_mut().for_each(|c| normalize(c));

    let planted = Support::new(sample(&mut rng, m, k).into_vec());
    let mut x_planted = vec![0.0; m];
    for &j in planted.indices() {
        let magnitude: f64 = rng.random_range(1.0..=2.0);
        x_planted[j] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }

    let noise: Vec<f64> = (0..n)
        .map(|_| cfg.noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| columns[j][i] * x_planted[j]).sum::<f64>() + noise[i])
        .collect();
    let alpha = (1.0 + cfg.margin) * cfg.norm.apply(noise.iter().copied());

    let h: Vec<f64> = (0..n).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
    let instance = Instance::new(n, m, h, y, cfg.norm, alpha)?;
    Ok(Generated {
        instance,
        planted,
        x_planted,
    })
}
