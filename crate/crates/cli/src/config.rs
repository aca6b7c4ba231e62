//! Run configuration: JSON schema, validation, and construction of the core
//! objects. Unknown keys are rejected so that typos fail loudly.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use germ_core::flux::{FluxPair, Interval, PiecewiseLinearFlux};
use germ_core::germ::{GermKind, GermSample, GermSpec, StatePair};
use germ_core::scheme::{BulkFlux, InitialData, MeshConfig};
use germ_core::viscous::ViscosityPair;

pub const FORMAT_VERSION: &str = "germ-solver-v1";

/// A flux: either an explicit breakpoint list or a named generator sampled
/// at `samples` chord nodes. Generators: `burgers` (u^2/2 on [-1,1]),
/// `tent(u0)` (|u - u0|), `bell(a)` (a u (1-u) on [0,1]).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

fn parse_generator(name: &str) -> Result<(String, Option<f64>)> {
    if let Some(open) = name.find('(') {
        let close = name
            .rfind(')')
            .ok_or_else(|| anyhow!("unclosed parameter list in generator {name:?}"))?;
        let base = name[..open].trim().to_string();
        let arg: f64 = name[open + 1..close]
            .trim()
            .parse()
            .with_context(|| format!("bad generator parameter in {name:?}"))?;
        Ok((base, Some(arg)))
    } else {
        Ok((name.trim().to_string(), None))
    }
}

impl FluxConfig {
    pub fn build(&self) -> Result<PiecewiseLinearFlux> {
        if let Some(nodes) = &self.nodes {
            if self.generator.is_some() {
                bail!("flux takes either nodes or a generator, not both");
            }
            let nodes = nodes.iter().map(|&[u, f]| (u, f)).collect();
            return Ok(PiecewiseLinearFlux::from_nodes(nodes)?);
        }
        let name = self
            .generator
            .as_deref()
            .ok_or_else(|| anyhow!("flux needs either nodes or a generator"))?;
        let samples = self.samples.unwrap_or(201);
        let (base, arg) = parse_generator(name)?;
        let (f, default_domain): (Box<dyn Fn(f64) -> f64>, [f64; 2]) = match base.as_str() {
            "burgers" => (Box::new(|u: f64| 0.5 * u * u), [-1.0, 1.0]),
            "tent" => {
                let u0 = arg.ok_or_else(|| anyhow!("tent(u0) needs a center"))?;
                (Box::new(move |u: f64| (u - u0).abs()), [u0 - 1.0, u0 + 1.0])
            }
            "bell" => {
                let a = arg.unwrap_or(1.0);
                (Box::new(move |u: f64| a * u * (1.0 - u)), [0.0, 1.0])
            }
            other => bail!("unknown flux generator {other:?}"),
        };
        let [lo, hi] = self.domain.unwrap_or(default_domain);
        Ok(PiecewiseLinearFlux::sample(f, Interval::new(lo, hi)?, samples)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FluxPairConfig {
    pub left: FluxConfig,
    /// Defaults to the left flux (no interface discontinuity).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<FluxConfig>,
}

impl FluxPairConfig {
    pub fn build(&self) -> Result<FluxPair> {
        let left = self.left.build()?;
        let right = match &self.right {
            Some(cfg) => cfg.build()?,
            None => left.clone(),
        };
        Ok(FluxPair::new(left, right)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct GermParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// Germ literal: a catalog kind with parameters, or an explicit pair list.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GermConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<GermParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 2]>>,
}

impl GermConfig {
    pub fn build(&self, fluxes: &FluxPair, rh_tol: f64) -> Result<GermSpec> {
        if let Some(pairs) = &self.pairs {
            if self.kind.is_some() {
                bail!("germ takes either a kind or an explicit pair list, not both");
            }
            let pairs = pairs.iter().map(|&[ul, ur]| StatePair::new(ul, ur)).collect();
            return Ok(GermSpec::with_tol(
                GermKind::Explicit(pairs),
                fluxes.clone(),
                rh_tol,
            )?);
        }
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| anyhow!("germ needs either a kind or a pair list"))?;
        let p = self.params.clone().unwrap_or_default();
        let ab = || -> Result<(f64, f64)> {
            match (p.a, p.b) {
                (Some(a), Some(b)) => Ok((a, b)),
                (Some(a), None) => {
                    let b = germ_core::riemann::connection_partner(fluxes, a)?;
                    Ok((a, b))
                }
                _ => bail!("germ kind {kind:?} needs params {{\"a\": .., \"b\": ..}}"),
            }
        };
        let kind = match kind {
            "volpert_kruzhkov" => GermKind::VolpertKruzhkov,
            "gelfand" => GermKind::Gelfand,
            "rankine_hugoniot" => GermKind::RankineHugoniot,
            "connection" => {
                let (a, b) = ab()?;
                GermKind::Connection { a, b }
            }
            "audusse_perthame" => GermKind::AudussePerthame,
            "connection_ap_dual" => {
                let (a, b) = ab()?;
                GermKind::ConnectionApDual { a, b }
            }
            "ab_dual" => {
                let (a, b) = ab()?;
                GermKind::AbDual { a, b }
            }
            "krt" => GermKind::Krt,
            "vv_open" => GermKind::VvOpen,
            "vv" => GermKind::Vv,
            other => bail!("unknown germ kind {other:?}"),
        };
        Ok(GermSpec::with_tol(kind, fluxes.clone(), rh_tol)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub dx: f64,
    pub x_extent: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
    #[serde(default = "default_flux_name")]
    pub num_flux: String,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_flux_name() -> String {
    "godunov".into()
}

impl MeshSection {
    pub fn build(&self) -> Result<MeshConfig> {
        let num_flux = match self.num_flux.as_str() {
            "godunov" => BulkFlux::Godunov,
            "engquist_osher" => BulkFlux::EngquistOsher,
            "lax_friedrichs" => BulkFlux::LaxFriedrichs,
            other => bail!("unknown bulk flux {other:?}"),
        };
        let mesh = MeshConfig {
            dx: self.dx,
            x_extent: self.x_extent,
            t_end: self.t_end,
            cfl_fraction: self.cfl_fraction,
            num_flux,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", deny_unknown_fields, rename_all = "snake_case")]
pub enum InitialSection {
    Constant { value: f64 },
    Riemann { left: f64, right: f64 },
    Piecewise { xs: Vec<f64>, values: Vec<f64> },
    /// CSV file of `x,u` rows, read as a piecewise-constant profile with
    /// breakpoints midway between samples.
    Samples { path: String },
}

impl InitialSection {
    pub fn build(&self) -> Result<InitialData> {
        let data = match self.clone() {
            InitialSection::Constant { value } => InitialData::Constant(value),
            InitialSection::Riemann { left, right } => InitialData::Riemann { left, right },
            InitialSection::Piecewise { xs, values } => InitialData::Piecewise { xs, values },
            InitialSection::Samples { path } => {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading u0 samples {path}"))?;
                let mut pts: Vec<(f64, f64)> = Vec::new();
                for line in text.lines() {
                    let line = line.trim();
                    if line.is_empty()
                        || line.starts_with('#')
                        || line.chars().next().map_or(false, char::is_alphabetic)
                    {
                        continue;
                    }
                    let mut it = line.split(',');
                    let x: f64 = it
                        .next()
                        .ok_or_else(|| anyhow!("bad samples row {line:?}"))?
                        .trim()
                        .parse()?;
                    let u: f64 = it
                        .next()
                        .ok_or_else(|| anyhow!("bad samples row {line:?}"))?
                        .trim()
                        .parse()?;
                    pts.push((x, u));
                }
                if pts.len() < 2 {
                    bail!("u0 samples file needs at least two rows");
                }
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let xs: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0)).collect();
                let values: Vec<f64> = pts.iter().map(|&(_, u)| u).collect();
                InitialData::Piecewise { xs, values }
            }
        };
        data.validate()?;
        Ok(data)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ViscositySection {
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rh_tol: Option<f64>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fluxes: FluxPairConfig,
    pub germ: GermConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<InitialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub viscosity: Option<ViscositySection>,
}

fn default_resolution() -> usize {
    101
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            bail!("resolution must be at least 2");
        }
        if let Some(t) = self.tolerances.rh_tol {
            if !(t > 0.0) {
                bail!("tolerances must be positive");
            }
        }
        if let Some(eps) = self.eps {
            if eps < 0.0 {
                bail!("eps must be nonnegative");
            }
        }
        Ok(())
    }

    pub fn rh_tol(&self) -> f64 {
        self.tolerances.rh_tol.unwrap_or(germ_core::RH_TOL)
    }

    pub fn build_fluxes(&self) -> Result<FluxPair> {
        self.fluxes.build()
    }

    pub fn build_germ(&self, fluxes: &FluxPair) -> Result<(GermSpec, GermSample)> {
        let spec = self.germ.build(fluxes, self.rh_tol())?;
        let sample = spec.sample(self.resolution)?;
        Ok((spec, sample))
    }

    pub fn build_viscosity(&self, fluxes: &FluxPair) -> Result<Option<ViscosityPair>> {
        match &self.viscosity {
            None => Ok(None),
            Some(v) => Ok(Some(germ_core::viscous::adapted_viscosity(
                fluxes, v.a, v.b, v.kappa,
            )?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::parse(
            r#"{"fluxes": {"left": {"generator": "burgers"}}, "germ": {"kind": "vv"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.resolution, 101);
        let fp = cfg.build_fluxes().unwrap();
        let (_, sample) = cfg.build_germ(&fp).unwrap();
        assert!(!sample.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(
            r#"{"fluxes": {"left": {"generator": "burgers"}}, "germ": {"kind": "vv"}, "bogus": 1}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn serialize_parse_fixpoint() {
        let text = r#"{
            "fluxes": {"left": {"generator": "bell(1.0)", "samples": 201},
                       "right": {"generator": "bell(2.0)", "samples": 201}},
            "germ": {"kind": "connection", "params": {"a": 0.5}},
            "mesh": {"dx": 0.0025, "x_extent": 0.5, "t_end": 0.1},
            "u0": {"kind": "riemann", "left": 0.5, "right": 0.1464466},
            "resolution": 33
        }"#;
        let cfg = RunConfig::parse(text).unwrap();
        let round = RunConfig::parse(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, round);
    }
}
