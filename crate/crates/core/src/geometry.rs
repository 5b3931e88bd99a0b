//! Named geometries: the built-in registry and JSON configs, with the
//! pipeline from geometry to slab function, solution and coefficient table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mirror_map::MirrorMap;
use crate::slab::{SlabFunction, TruncationConfig};
use crate::solver::{solve_gluing, CoefficientTable, Convention, GluingSolution};
use crate::special::{AbelianFamilyMirror, SurfaceMirror};
use crate::toric::{Frame, ToricCYData};

pub const BUILTIN_NAMES: [&str; 6] =
    ["C3", "KP2-inner", "KP2-outer", "KP3", "local-surface-A0", "abelian-family"];

#[derive(Clone, Debug)]
pub enum Model {
    Toric { data: ToricCYData, frame: Frame },
    /// The infinite-product mirror of the local elliptic surface.
    LocalSurface,
    /// The theta-function mirror with correction factor `Delta`.
    AbelianFamily,
}

#[derive(Clone, Debug)]
pub struct Geometry {
    pub name: String,
    pub model: Model,
    pub truncation: TruncationConfig,
    pub convention: Convention,
}

/// JSON form of a toric geometry. `chamber` is a 0-based point index that
/// must lie in `sigma` (default `sigma[0]`); `frame` defaults to the standard
/// basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub points: Vec<Vec<i64>>,
    pub sigma: Vec<usize>,
    #[serde(default)]
    pub chamber: Option<usize>,
    #[serde(default)]
    pub frame: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub truncation: Option<TruncationConfig>,
    #[serde(default)]
    pub convention: Option<Convention>,
}

fn kp2() -> Result<ToricCYData> {
    ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![-1, -1]], vec![0, 1, 2])
}

fn toric(name: &str, data: ToricCYData, frame: Frame, trunc: TruncationConfig) -> Geometry {
    Geometry {
        name: name.to_string(),
        model: Model::Toric { data, frame },
        truncation: trunc,
        convention: Convention::Inner,
    }
}

impl Geometry {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(match name {
            "C3" => {
                let d = ToricCYData::build(vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![0, 1, 2])?;
                let fr = Frame::standard(&d, 0)?;
                toric(name, d, fr, TruncationConfig::new(0, 3, 4))
            }
            "KP2-inner" => {
                let d = kp2()?;
                let fr = Frame::standard(&d, 0)?;
                toric(name, d, fr, TruncationConfig::new(3, 2, 4))
            }
            "KP2-outer" => {
                let d = kp2()?;
                let fr = Frame::new(&d, 2, vec![vec![1, -1], vec![0, -1]])?;
                toric(name, d, fr, TruncationConfig::new(3, 2, 4))
            }
            "KP3" => {
                let d = ToricCYData::build(
                    vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
                    vec![0, 1, 2, 3],
                )?;
                let fr = Frame::standard(&d, 0)?;
                let mut g = toric(name, d, fr, TruncationConfig::new(2, 0, 4));
                g.convention = Convention::Phase;
                g
            }
            "local-surface-A0" => Geometry {
                name: name.to_string(),
                model: Model::LocalSurface,
                truncation: TruncationConfig::new(5, 5, 3),
                convention: Convention::Negated,
            },
            "abelian-family" => Geometry {
                name: name.to_string(),
                model: Model::AbelianFamily,
                truncation: TruncationConfig::new(6, 0, 2).with_q_caps(vec![2, 2, 2]),
                convention: Convention::Plain,
            },
            _ => return Err(Error::UnknownCase(name.to_string())),
        })
    }

    pub fn from_config(cfg: GeometryConfig) -> Result<Self> {
        let data = ToricCYData::build(cfg.points, cfg.sigma)?;
        let base = cfg.chamber.unwrap_or(data.sigma()[0]);
        let frame = match cfg.frame {
            Some(m) => Frame::new(&data, base, m)?,
            None => Frame::standard(&data, base)?,
        };
        Ok(Geometry {
            name: cfg.name.unwrap_or_else(|| "custom".to_string()),
            model: Model::Toric { data, frame },
            truncation: cfg.truncation.unwrap_or_else(|| TruncationConfig::new(2, 1, 4)),
            convention: cfg.convention.unwrap_or(Convention::Inner),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GeometryConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("geometry JSON: {e}")))?;
        Self::from_config(cfg)
    }

    /// A built-in name, or else a path to a JSON config.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&name_or_path) {
            return Self::builtin(name_or_path);
        }
        let text = std::fs::read_to_string(name_or_path).map_err(|e| {
            Error::Config(format!("`{name_or_path}` is neither a built-in geometry nor a readable file: {e}"))
        })?;
        Self::from_json(&text)
    }

    pub fn with_truncation(mut self, trunc: TruncationConfig) -> Self {
        self.truncation = trunc;
        self
    }

    /// Replaces the frame of a toric geometry.
    pub fn with_frame(mut self, chamber: usize, matrix: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let Model::Toric { data, frame } = &mut self.model else {
            return Err(Error::Config(format!("`{}` has no toric frame", self.name)));
        };
        *frame = match matrix {
            Some(m) => Frame::new(data, chamber, m)?,
            None => Frame::standard(data, chamber)?,
        };
        Ok(self)
    }

    pub fn toric_data(&self) -> Option<&ToricCYData> {
        match &self.model {
            Model::Toric { data, .. } => Some(data),
            _ => None,
        }
    }

    /// The mirror map at `order`; `None` for the series-defined mirrors.
    pub fn mirror_map(&self, order: u32) -> Result<Option<MirrorMap>> {
        self.toric_data().map(|d| MirrorMap::compute(d, order)).transpose()
    }

    pub fn slab(&self) -> Result<SlabFunction> {
        let t = &self.truncation;
        match &self.model {
            Model::Toric { data, frame } => SlabFunction::build(data, frame, t),
            Model::LocalSurface => SurfaceMirror::build(t)?.into_slab(t.uv_max),
            Model::AbelianFamily => AbelianFamilyMirror::build(t)?.into_slab(t.uv_max),
        }
    }

    pub fn solve(&self) -> Result<GluingSolution> {
        solve_gluing(&self.slab()?)
    }

    /// The coefficient table, cut to phase exponents at most `z_window`. Entries
    /// above the window are exact only at low Kähler degree.
    pub fn table(&self, convention: Convention) -> Result<CoefficientTable> {
        let t = CoefficientTable::from_potential(&self.solve()?.equivariant_potential()?, convention)?;
        Ok(t.restrict(Some(self.truncation.z_window as i32), None))
    }
}
