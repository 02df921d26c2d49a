//! Scenario configuration files and command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use railray::dynamics::{StreamConfig, Trajectory};
use railray::em::{AntennaConfig, CarrierConfig, PolPair};
use railray::po::ScatterPolicy;
use railray::rt::TraceLimits;
use railray::scene::{load_scene, Scene};
use railray::Vec3;

use crate::error::{CliError, CliResult};
use crate::preset;

pub const CONFIG_VERSION: u32 = 1;

/// Km/h to m/s.
pub fn kmh(v: f64) -> f64 {
    v / 3.6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    /// Scene file; the bundled canyon scene when absent. Relative paths
    /// resolve against the configuration file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub carrier: CarrierSection,
    #[serde(default)]
    pub tx: TxSection,
    #[serde(default)]
    pub rx: RxSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub tracing: TraceLimits,
    #[serde(default)]
    pub stream: StreamSection,
    #[serde(default)]
    pub scatter: ScatterSection,
    #[serde(default)]
    pub cir: CirSection,
    #[serde(default)]
    pub bench: BenchSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("railray-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSection {
    pub frequency_hz: f64,
}

impl Default for CarrierSection {
    fn default() -> Self {
        CarrierSection { frequency_hz: 1.9e9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSection {
    pub position: [f64; 3],
    pub power_dbm: f64,
    #[serde(default)]
    pub gain_dbi: f64,
}

impl Default for TxSection {
    fn default() -> Self {
        TxSection {
            position: [0.0, 20.0, 20.5],
            power_dbm: 43.0,
            gain_dbi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxSection {
    #[serde(default)]
    pub gain_dbi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub waypoints: Vec<[f64; 3]>,
    pub speed_kmh: f64,
    /// Stop before the end of the polyline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        // 60 s at 100 km/h centred on the base station.
        let half = kmh(100.0) * 30.0;
        TrajectorySection {
            waypoints: vec![[-half, 0.0, 4.5], [half, 0.0, 4.5]],
            speed_kmh: 100.0,
            duration_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub update_step_s: f64,
    pub kf_interval_s: f64,
    #[serde(default = "half")]
    pub ramp_fraction: f64,
    #[serde(default)]
    pub sweep_intervals_s: Vec<f64>,
}

fn half() -> f64 {
    0.5
}

impl Default for StreamSection {
    fn default() -> Self {
        StreamSection {
            update_step_s: 0.01,
            kf_interval_s: 0.1,
            ramp_fraction: 0.5,
            sweep_intervals_s: vec![0.05, 0.1, 0.2, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSection {
    pub policy: ScatterPolicy,
    /// Scatter paths are computed only between these times, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_s: Option<[f64; 2]>,
    /// Interpolate scatter paths between keyframes instead of recomputing
    /// them per snapshot.
    #[serde(default)]
    pub interpolate: bool,
}

impl Default for ScatterSection {
    fn default() -> Self {
        ScatterSection {
            policy: ScatterPolicy::Direct,
            window_s: Some([18.5, 23.9]),
            interpolate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirSection {
    pub bandwidth_hz: f64,
    pub rolloff: f64,
    pub resolution_s: f64,
    /// Polarization pair as `<tx><rx>`, e.g. `vv` or `vh`.
    pub pair: String,
}

impl Default for CirSection {
    fn default() -> Self {
        CirSection {
            bandwidth_hz: 100e6,
            rolloff: 0.95,
            resolution_s: 2.5e-9,
            pair: "vv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub repeats: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection { repeats: 3 }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            version: CONFIG_VERSION,
            scene: None,
            output_dir: default_output(),
            seed: 0,
            carrier: CarrierSection::default(),
            tx: TxSection::default(),
            rx: RxSection::default(),
            trajectory: TrajectorySection::default(),
            tracing: TraceLimits::default(),
            stream: StreamSection::default(),
            scatter: ScatterSection::default(),
            cir: CirSection::default(),
            bench: BenchSection::default(),
        }
    }
}

/// Command-line values that replace configuration fields when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scene: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub frequency_hz: Option<f64>,
    pub update_step_s: Option<f64>,
    pub kf_interval_s: Option<f64>,
    pub duration_s: Option<f64>,
    pub scatter: Option<ScatterPolicy>,
    pub sweep_intervals_s: Option<Vec<f64>>,
    pub repeats: Option<usize>,
}

pub fn parse_pair(s: &str) -> CliResult<PolPair> {
    match s.to_ascii_lowercase().as_str() {
        "vv" => Ok(PolPair::VV),
        "vh" => Ok(PolPair::VH),
        "hv" => Ok(PolPair::HV),
        "hh" => Ok(PolPair::HH),
        _ => Err(CliError::Config(format!("cir.pair: unknown polarization pair {s:?}"))),
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ScenarioConfig {
    /// The bundled canyon scenario.
    pub fn preset() -> ScenarioConfig {
        ScenarioConfig::from_toml(preset::CANYON_SCENARIO, None).expect("bundled scenario parses")
    }

    /// Parses configuration text. `base` is the directory relative scene
    /// paths resolve against.
    pub fn from_toml(text: &str, base: Option<&Path>) -> CliResult<ScenarioConfig> {
        let mut config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported configuration version {} (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        if let (Some(scene), Some(base)) = (&config.scene, base) {
            if scene.is_relative() {
                config.scene = Some(base.join(scene));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<ScenarioConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read configuration {}: {e}", path.display())))?;
        ScenarioConfig::from_toml(&text, path.parent())
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(v) = &o.scene {
            self.scene = Some(v.clone());
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.frequency_hz {
            self.carrier.frequency_hz = v;
        }
        if let Some(v) = o.update_step_s {
            self.stream.update_step_s = v;
        }
        if let Some(v) = o.kf_interval_s {
            self.stream.kf_interval_s = v;
        }
        if let Some(v) = o.duration_s {
            self.trajectory.duration_s = Some(v);
        }
        if let Some(v) = o.scatter {
            self.scatter.policy = v;
        }
        if let Some(v) = &o.sweep_intervals_s {
            self.stream.sweep_intervals_s = v.clone();
        }
        if let Some(v) = o.repeats {
            self.bench.repeats = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        self.carrier()
            .map_err(|e| CliError::Config(format!("carrier.frequency_hz: {e}")))?;
        if !(self.stream.update_step_s > 0.0) {
            return bad("stream.update_step_s", "must be positive".into());
        }
        if self.stream.kf_interval_s < self.stream.update_step_s * (1.0 - 1e-9) {
            return bad("stream.kf_interval_s", "must be at least the update step".into());
        }
        if self
            .stream
            .sweep_intervals_s
            .iter()
            .any(|&k| k < self.stream.update_step_s * (1.0 - 1e-9))
        {
            return bad(
                "stream.sweep_intervals_s",
                "every interval must be at least the update step".into(),
            );
        }
        let whole = |k: f64| {
            let m = k / self.stream.update_step_s;
            (m - m.round()).abs() <= 1e-9 * m
        };
        if !whole(self.stream.kf_interval_s) || !self.stream.sweep_intervals_s.iter().all(|&k| whole(k)) {
            return bad(
                "stream",
                "keyframe intervals must be whole multiples of the update step".into(),
            );
        }
        if !(0.0..=1.0).contains(&self.stream.ramp_fraction) {
            return bad("stream.ramp_fraction", "must lie in [0, 1]".into());
        }
        self.trajectory()
            .map_err(|e| CliError::Config(format!("trajectory: {e}")))?;
        if let Some([a, b]) = self.scatter.window_s {
            if !(b > a) {
                return bad("scatter.window_s", format!("[{a}, {b}] is empty"));
            }
        }
        if !(self.cir.bandwidth_hz > 0.0) || !(0.0..=1.0).contains(&self.cir.rolloff) {
            return bad("cir", "bandwidth must be positive and roll-off within [0, 1]".into());
        }
        if !(self.cir.resolution_s > 0.0) || self.cir.resolution_s > 0.5 / self.cir.bandwidth_hz {
            return bad(
                "cir.resolution_s",
                format!("must be positive and at most {} s", 0.5 / self.cir.bandwidth_hz),
            );
        }
        parse_pair(&self.cir.pair)?;
        if self.bench.repeats == 0 {
            return bad("bench.repeats", "must be at least 1".into());
        }
        Ok(())
    }

    pub fn carrier(&self) -> railray::Result<CarrierConfig> {
        CarrierConfig::new(self.carrier.frequency_hz)
    }

    pub fn tx_position(&self) -> Vec3 {
        vec3(self.tx.position)
    }

    pub fn trajectory(&self) -> railray::Result<Trajectory> {
        let t = Trajectory::new(
            self.trajectory.waypoints.iter().copied().map(vec3).collect(),
            kmh(self.trajectory.speed_kmh),
        )?;
        match self.trajectory.duration_s {
            Some(d) => t.truncated(d),
            None => Ok(t),
        }
    }

    pub fn pair(&self) -> PolPair {
        parse_pair(&self.cir.pair).expect("validated")
    }

    /// Loads the configured scene file or the bundled one.
    pub fn load_scene(&self) -> CliResult<Scene> {
        match &self.scene {
            None => Ok(preset::canyon_scene()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read scene file {}: {e}", path.display())))?;
                load_scene(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    /// Stream settings for one keyframe interval.
    pub fn stream_config(&self, kf_interval: f64) -> StreamConfig {
        let mut s = StreamConfig::new(
            self.tx_position(),
            self.carrier().expect("validated"),
            self.stream.update_step_s,
            kf_interval,
        );
        s.tx_antenna = AntennaConfig {
            gain_dbi: self.tx.gain_dbi,
        };
        s.rx_antenna = AntennaConfig {
            gain_dbi: self.rx.gain_dbi,
        };
        s.limits = self.tracing;
        s.scatter = self.scatter.policy;
        s.scatter_window = self.scatter.window_s.map(|[a, b]| (a, b));
        s.interpolate_scatter = self.scatter.interpolate;
        s.ramp_fraction = self.stream.ramp_fraction;
        s.seed = self.seed;
        s
    }
}

impl CliError {
    fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_matches_defaults() {
        let p = ScenarioConfig::preset();
        assert_eq!(p.carrier.frequency_hz, 1.9e9);
        assert_eq!(p.tx.position, [0.0, 20.0, 20.5]);
        assert_eq!(p.tx.power_dbm, 43.0);
        assert_eq!(p.trajectory.speed_kmh, 100.0);
        assert_eq!(p.trajectory.waypoints[0][2], 4.5);
        assert_eq!(p.tracing, TraceLimits::default());
        assert_eq!(p.stream.update_step_s, 0.01);
        let d = ScenarioConfig::default();
        assert_eq!(
            ScenarioConfig {
                seed: d.seed,
                ..p.clone()
            },
            ScenarioConfig { seed: d.seed, ..d }
        );
        assert!((p.trajectory().unwrap().duration() - 60.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ScenarioConfig::from_toml(
            "version = 1\n[stream]\nupdate_step_s = 0.01\nkf_interval_s = 0.1\nkf_intervall = 2\n",
            None,
        )
        .unwrap_err();
        assert!(e.to_string().contains("kf_intervall"), "{e}");
        assert!(ScenarioConfig::from_toml("version = 1\ncolour = 1\n", None).is_err());
    }

    #[test]
    fn version_required() {
        assert!(ScenarioConfig::from_toml("seed = 1\n", None).is_err());
        assert!(ScenarioConfig::from_toml("version = 2\n", None).is_err());
        assert_eq!(ScenarioConfig::from_toml("version = 1\n", None).unwrap().version, 1);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut c = ScenarioConfig::preset();
        c.apply(&Overrides {
            kf_interval_s: Some(0.2),
            seed: Some(9),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((c.stream.kf_interval_s, c.seed), (0.2, 9));
        assert!(c
            .apply(&Overrides {
                kf_interval_s: Some(0.001),
                ..Default::default()
            })
            .is_err());
        let mut c = ScenarioConfig::preset();
        assert!(c
            .apply(&Overrides {
                duration_s: Some(100.0),
                ..Default::default()
            })
            .is_err());
    }

    #[test]
    fn relative_scene_resolves_against_config_dir() {
        let c = ScenarioConfig::from_toml("version = 1\nscene = \"s.toml\"\n", Some(Path::new("/data/runs"))).unwrap();
        assert_eq!(c.scene.unwrap(), PathBuf::from("/data/runs/s.toml"));
    }
}
