//! Fixtures shared by the benchmarks.

use railray::dynamics::Trajectory;
use railray::scene::Scene;
use railray_cli::preset::canyon_scene;
use railray_cli::ScenarioConfig;

pub struct Fixture {
    pub config: ScenarioConfig,
    pub scene: Scene,
    pub trajectory: Trajectory,
}

/// The bundled canyon, with the trajectory cut to `seconds`.
pub fn canyon(seconds: f64) -> Fixture {
    let mut config = ScenarioConfig::preset();
    config.trajectory.duration_s = Some(seconds);
    Fixture {
        scene: canyon_scene(),
        trajectory: config.trajectory().expect("preset trajectory"),
        config,
    }
}
