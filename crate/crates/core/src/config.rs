//! TOML configuration: per-database render setup and user-level pipeline
//! parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blend::TransitionWeightParams;
use crate::error::{Error, Result};
use crate::morph::MorphSchedule;
use crate::render::{RegionBoxes, RegionSizes, RenderConfig};
use crate::similarity::LbpConfig;

/// Ships with a database: how its comparison renders are produced and cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbConfig {
    pub render: RenderConfig,
    pub boxes: RegionBoxes,
    #[serde(default)]
    pub sizes: RegionSizes,
}

impl DbConfig {
    pub fn load_toml(path: impl AsRef<Path>) -> Result<DbConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: DbConfig = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.render.validate()?;
        Ok(cfg)
    }

    pub fn save_toml(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("serialize: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaConfig {
    /// Keep the smallest component count explaining this variance share...
    pub variance_fraction: f64,
    /// ...capped here.
    pub cap: usize,
}

impl Default for PcaConfig {
    fn default() -> Self {
        PcaConfig {
            variance_fraction: 0.95,
            cap: 50,
        }
    }
}

impl PcaConfig {
    pub fn retained(&self) -> crate::similarity::Retained {
        crate::similarity::Retained::Variance {
            fraction: self.variance_fraction,
            cap: self.cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextureConfig {
    /// Feather band width in atlas pixels where warped frames blend into
    /// the shifted average texture.
    pub feather: usize,
}

impl Default for TextureConfig {
    fn default() -> Self {
        TextureConfig { feather: 32 }
    }
}

/// User-level knobs for `fit` and `texture`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Closest matches blended per region (1 or 3).
    pub top_n: usize,
    pub pca: PcaConfig,
    pub lbp: LbpConfig,
    pub blend: TransitionWeightParams,
    pub morph: MorphSchedule,
    pub texture: TextureConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            top_n: 3,
            pca: PcaConfig::default(),
            lbp: LbpConfig::default(),
            blend: TransitionWeightParams::default(),
            morph: MorphSchedule::default(),
            texture: TextureConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_n != 1 && self.top_n != 3 {
            return Err(Error::InvalidConfig(format!(
                "top_n must be 1 or 3, got {}",
                self.top_n
            )));
        }
        self.lbp.validate()?;
        self.blend.validate()?;
        self.morph.validate()?;
        Ok(())
    }

    pub fn load_toml(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save_toml(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("serialize: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
