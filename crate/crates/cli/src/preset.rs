//! The bundled urban-canyon scenario.

use railray::scene::{load_scene, Scene};

/// Scene file of the bundled canyon.
pub const CANYON_SCENE: &str = include_str!("../presets/canyon_scene.toml");

/// Scenario configuration matching the bundled canyon.
pub const CANYON_SCENARIO: &str = include_str!("../presets/canyon.toml");

pub fn canyon_scene() -> Scene {
    load_scene(CANYON_SCENE).expect("bundled scene is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canyon_contents() {
        let s = canyon_scene();
        assert_eq!(s.scatterers().len(), 6);
        for (i, p) in s.scatterers().iter().enumerate() {
            assert_eq!((p.radius, p.height), (0.375, 8.2));
            assert_eq!(p.base.x, -310.0 + 30.0 * i as f64);
        }
        assert!(s.buildings().len() > 40);
        assert!(s.building_containing(&railray::Vec3::new(0.0, 20.0, 20.5)).is_none());
    }
}
