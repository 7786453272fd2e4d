//! Flat `key = value` overrides for [`PoolConfig`].

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::population::{Generation, PoolConfig};

/// Every field optional; unset fields keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub init_size: Option<usize>,
    pub init_len_min: Option<usize>,
    pub init_len_max: Option<usize>,
    pub gaussian_mean: Option<f64>,
    pub gaussian_std: Option<f64>,
    pub band_width: Option<f64>,
    pub clone_factor: Option<usize>,
    pub mutation_extend_prob: Option<f64>,
    pub apoptosis_rate: Option<f64>,
    pub min_pool: Option<usize>,
    pub clone_lifespan: Option<Generation>,
    pub bind_threshold: Option<f64>,
    pub shortening_enabled: Option<bool>,
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies the overrides to `base` and validates the result.
    ///
    /// Changing `band_width` without an explicit `gaussian_std` rescales the
    /// spread to two band widths.
    pub fn apply(&self, base: &PoolConfig) -> Result<PoolConfig> {
        let mut c = base.clone();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(
            init_size,
            init_len_min,
            init_len_max,
            gaussian_mean,
            band_width,
            clone_factor,
            mutation_extend_prob,
            apoptosis_rate,
            min_pool,
            clone_lifespan,
            bind_threshold,
            shortening_enabled
        );
        c.gaussian_std = match (self.gaussian_std, self.band_width) {
            (Some(std), _) => std,
            (None, Some(w)) => 2.0 * w,
            (None, None) => base.gaussian_std,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Renders a config as the same flat format [`Overrides::parse`] reads.
pub fn to_toml(config: &PoolConfig) -> String {
    toml::to_string(config).expect("flat config serialises")
}
