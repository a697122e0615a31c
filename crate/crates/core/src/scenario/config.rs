use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flux::{BoundOptions, FluxQuadrature, NodalResolution, NodalWindow, RegionSpec};
use crate::integrator::IntegratorConfig;
use crate::propagator::PropagatorConfig;
use crate::state::Preset;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_VAR: &str = "BOHMIAN_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trajectories,
    Ensemble,
    FluxAudit,
    Nodes,
    QuantileCheck,
    Evolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Trajectories => "trajectories",
            Command::Ensemble => "ensemble",
            Command::FluxAudit => "flux-audit",
            Command::Nodes => "nodes",
            Command::QuantileCheck => "quantile-check",
            Command::Evolve => "evolve",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: 1.0,
            mass: 1.0,
            omega: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub points: usize,
    /// Periodic box; the state's natural extent when absent.
    pub extent: Option<(f64, f64)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 512,
            extent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoriesConfig {
    /// Explicit start points; replaces the fan when present.
    pub q0: Option<Vec<f64>>,
    /// Evenly spaced fan of start points over `fan_range`.
    pub fan_count: usize,
    pub fan_range: (f64, f64),
    /// Start points added to the fan: the origin and the nodes at `t = 0`.
    pub include_node_crossers: bool,
    pub horizon: f64,
    pub sample_dt: f64,
}

impl Default for TrajectoriesConfig {
    fn default() -> Self {
        TrajectoriesConfig {
            q0: None,
            fan_count: 25,
            fan_range: (-3.0, 3.0),
            include_node_crossers: true,
            horizon: 2.0 * PI,
            sample_dt: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub count: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Also write every member position.
    pub write_points: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            count: 100_000,
            seed: 7,
            times: vec![PI / 8.0, PI / 4.0, PI / 2.0, PI],
            write_points: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxConfig {
    pub eps: Vec<f64>,
    pub delta: f64,
    pub r: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub time_weight: f64,
    pub mc: usize,
    pub seed: u64,
    pub quadrature: FluxQuadrature,
    pub resolution: Option<NodalResolution>,
    /// Simpson spacing of the integration-by-parts check on `K^r`.
    pub greens_spacing: f64,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig {
            eps: vec![0.2, 0.1, 0.05],
            delta: 0.1,
            r: 10.0,
            horizon: PI,
            time_weight: 1.0,
            mc: 20_000,
            seed: 7,
            quadrature: FluxQuadrature::default(),
            resolution: None,
            greens_spacing: 0.05,
        }
    }
}

impl FluxConfig {
    pub fn specs(&self) -> Vec<RegionSpec> {
        self.eps
            .iter()
            .map(|&e| RegionSpec {
                eps: e,
                delta: self.delta,
                r: self.r,
                horizon: self.horizon,
                time_weight: self.time_weight,
            })
            .collect()
    }

    pub fn options(&self, integrator: &IntegratorConfig) -> BoundOptions {
        BoundOptions {
            integrator: integrator.clone(),
            quadrature: self.quadrature,
            resolution: self.resolution,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodesConfig {
    pub q: Vec<(f64, f64)>,
    pub t: (f64, f64),
    pub resolution: NodalResolution,
}

impl Default for NodesConfig {
    fn default() -> Self {
        NodesConfig {
            q: vec![(-2.0, 2.0)],
            t: (-0.5, 2.0),
            resolution: NodalResolution::default(),
        }
    }
}

impl NodesConfig {
    pub fn window(&self) -> NodalWindow {
        NodalWindow::new(self.q.clone(), self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantileConfig {
    pub t: f64,
    /// Cell midpoints of `range` used as start points.
    pub points: usize,
    pub range: (f64, f64),
    pub tolerance: f64,
}

impl Default for QuantileConfig {
    fn default() -> Self {
        QuantileConfig {
            t: PI / 4.0,
            points: 49,
            range: (-3.0, 3.0),
            tolerance: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig { t: PI / 2.0 }
    }
}

/// Everything a run needs. Absent keys take their defaults; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub command: Option<Command>,
    pub scenario: String,
    pub constants: Constants,
    pub grid: GridSpec,
    pub propagator: PropagatorConfig,
    pub integrator: IntegratorConfig,
    pub trajectories: TrajectoriesConfig,
    pub ensemble: EnsembleConfig,
    pub flux: FluxConfig,
    pub nodes: NodesConfig,
    pub quantile: QuantileConfig,
    pub evolve: EvolveConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            command: None,
            scenario: Preset::NodeSuperposition.name().to_string(),
            constants: Constants::default(),
            grid: GridSpec::default(),
            propagator: PropagatorConfig::default(),
            integrator: IntegratorConfig::default(),
            trajectories: TrajectoriesConfig::default(),
            ensemble: EnsembleConfig::default(),
            flux: FluxConfig::default(),
            nodes: NodesConfig::default(),
            quantile: QuantileConfig::default(),
            evolve: EvolveConfig::default(),
            output_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Fills the command and output directory, falling back to
    /// [`OUTPUT_DIR_VAR`] and then `output`.
    pub fn resolved(mut self, command: Command) -> Result<Self> {
        match self.command {
            Some(c) if c != command => {
                return Err(Error::Config(format!(
                    "config is for {:?} but {:?} was requested",
                    c.name(),
                    command.name()
                )))
            }
            _ => self.command = Some(command),
        }
        if self.output_dir.is_none() {
            self.output_dir = Some(
                std::env::var_os(OUTPUT_DIR_VAR)
                    .map_or_else(|| PathBuf::from("output"), PathBuf::from),
            );
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        Preset::from_name(&self.scenario)?;
        for (name, v) in [
            ("hbar", self.constants.hbar),
            ("mass", self.constants.mass),
            ("omega", self.constants.omega),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.propagator.validate()?;
        self.integrator.validate()?;
        let tr = &self.trajectories;
        if !(tr.sample_dt > 0.0 && tr.horizon.is_finite() && tr.horizon != 0.0) {
            return Err(Error::Config(
                "trajectories need a nonzero horizon and a positive sample_dt".into(),
            ));
        }
        if tr.q0.is_none() && (tr.fan_count < 2 || !(tr.fan_range.0 < tr.fan_range.1)) {
            return Err(Error::Config(
                "a fan needs at least two points over a nonempty range".into(),
            ));
        }
        if self.ensemble.count == 0 {
            return Err(Error::Config("ensemble count must be positive".into()));
        }
        if self.flux.eps.is_empty() {
            return Err(Error::Config("flux audit needs at least one eps".into()));
        }
        for s in self.flux.specs() {
            s.validate()?;
        }
        self.flux.quadrature.validate()?;
        if self.quantile.points == 0 || !(self.quantile.range.0 < self.quantile.range.1) {
            return Err(Error::Config(
                "quantile check needs points over a nonempty range".into(),
            ));
        }
        if self.grid.points < 16 {
            return Err(Error::Config(format!(
                "grid needs at least 16 points, got {}",
                self.grid.points
            )));
        }
        Ok(())
    }
}

/// Parses `a:b` as a closed interval.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("expected an interval lo:hi, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Parses `q_lo:q_hi x t_lo:t_hi`, with one spatial range per axis.
pub fn parse_window(text: &str) -> Result<(Vec<(f64, f64)>, (f64, f64))> {
    let mut parts: Vec<(f64, f64)> = text.split('x').map(parse_range).collect::<Result<_>>()?;
    if parts.len() < 2 || parts.len() > 3 {
        return Err(Error::Config(format!(
            "expected q-range x t-range, got {text:?}"
        )));
    }
    let t = parts.pop().expect("checked length");
    Ok((parts, t))
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "expected a comma-separated list of numbers, got {text:?}"
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ScenarioConfig::default();
        let back = ScenarioConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"scenaro": "eq4"}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"flux": {"eps": [0.1], "epsilon": 2}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c =
            ScenarioConfig::from_json(r#"{"flux": {"T": 2.0, "mc": 10}, "command": "flux-audit"}"#)
                .unwrap();
        assert_eq!(c.flux.horizon, 2.0);
        assert_eq!(c.flux.mc, 10);
        assert_eq!(c.flux.eps, vec![0.2, 0.1, 0.05]);
        assert_eq!(c.command, Some(Command::FluxAudit));
    }

    #[test]
    fn resolution_checks_the_command_and_scenario() {
        let c = ScenarioConfig {
            command: Some(Command::Nodes),
            output_dir: Some("x".into()),
            ..Default::default()
        };
        assert!(c.clone().resolved(Command::Nodes).is_ok());
        assert!(matches!(c.resolved(Command::Evolve), Err(Error::Config(_))));
        let c = ScenarioConfig {
            scenario: "eq5".into(),
            output_dir: Some("x".into()),
            ..Default::default()
        };
        assert!(matches!(c.resolved(Command::Nodes), Err(Error::Config(_))));
    }

    #[test]
    fn windows_and_lists_parse() {
        assert_eq!(
            parse_window("-2:2x-0.5:2").unwrap(),
            (vec![(-2.0, 2.0)], (-0.5, 2.0))
        );
        assert_eq!(
            parse_window("-1:1x-2:2x0:1").unwrap(),
            (vec![(-1.0, 1.0), (-2.0, 2.0)], (0.0, 1.0))
        );
        assert!(parse_window("-2:2").is_err());
        assert!(parse_window("2:-2x0:1").is_err());
        assert_eq!(parse_list("0.2, 0.1,0.05").unwrap(), vec![0.2, 0.1, 0.05]);
        assert!(parse_list("0.2,,0.1").is_err());
    }
}
