//! Scene file ingestion (TOML).
//!
//! ```toml
//! version = 1
//! ground_material = "ground"        # optional
//!
//! [materials.brick]
//! eps_r = 4.4
//! sigma = 0.05
//!
//! [[buildings]]
//! id = 1
//! footprint = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]
//! height = 20.0
//! material = "brick"                # optional, defaults to "concrete"
//!
//! [[scatterers]]
//! id = 1
//! base = [5.0, -3.0, 0.0]
//! radius = 0.375
//! height = 8.2
//! material = "metal"                # optional, defaults to "metal"
//! ```
//!
//! Built-in material names are `concrete`, `metal` and `ground`; entries in
//! `[materials]` may shadow them. Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{Building, CylinderScatterer, Material, Scene};
use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};

pub const SCENE_FILE_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    version: u32,
    #[serde(default)]
    ground_material: Option<String>,
    #[serde(default)]
    materials: BTreeMap<String, MaterialSpec>,
    #[serde(default)]
    buildings: Vec<BuildingSpec>,
    #[serde(default)]
    scatterers: Vec<ScattererSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSpec {
    #[serde(default = "one")]
    eps_r: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default)]
    pec: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildingSpec {
    id: u32,
    footprint: Vec<[f64; 2]>,
    height: f64,
    #[serde(default)]
    material: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScattererSpec {
    id: u32,
    base: [f64; 3],
    radius: f64,
    height: f64,
    #[serde(default)]
    material: Option<String>,
}

fn builtin(name: &str) -> Option<Material> {
    match name {
        "concrete" => Some(Material::concrete()),
        "metal" | "pec" => Some(Material::pec()),
        "ground" => Some(Material::ground()),
        _ => None,
    }
}

/// Parses and validates scene-file text.
pub fn load_scene(text: &str) -> Result<Scene> {
    let file: SceneFile = toml::from_str(text).map_err(|e| Error::SceneSyntax(e.to_string()))?;
    if file.version != SCENE_FILE_VERSION {
        return Err(Error::scene(
            "version",
            format!(
                "unsupported scene version {} (expected {SCENE_FILE_VERSION})",
                file.version
            ),
        ));
    }
    let materials: BTreeMap<&str, Material> = file
        .materials
        .iter()
        .map(|(k, m)| {
            let mat = if m.pec {
                Material::pec()
            } else {
                Material::dielectric(m.eps_r, m.sigma)
            };
            (k.as_str(), mat)
        })
        .collect();
    let resolve = |name: &str, location: String| -> Result<Material> {
        materials
            .get(name)
            .copied()
            .or_else(|| builtin(name))
            .ok_or_else(|| Error::scene(location, format!("unknown material '{name}'")))
    };

    let ground = match &file.ground_material {
        Some(name) => resolve(name, "ground_material".into())?,
        None => Material::ground(),
    };
    let mut buildings = Vec::with_capacity(file.buildings.len());
    for (i, b) in file.buildings.iter().enumerate() {
        let loc = format!("buildings[{i}] (id {}).material", b.id);
        let material = resolve(b.material.as_deref().unwrap_or("concrete"), loc)?;
        let footprint = b.footprint.iter().map(|v| Vec2::new(v[0], v[1])).collect();
        buildings.push(Building::new(b.id, footprint, b.height, material));
    }
    let mut scatterers = Vec::with_capacity(file.scatterers.len());
    for (i, s) in file.scatterers.iter().enumerate() {
        let loc = format!("scatterers[{i}] (id {}).material", s.id);
        let material = resolve(s.material.as_deref().unwrap_or("metal"), loc)?;
        scatterers.push(CylinderScatterer {
            id: s.id,
            base: Vec3::new(s.base[0], s.base[1], s.base[2]),
            radius: s.radius,
            height: s.height,
            material,
        });
    }
    Scene::new(buildings, scatterers, ground)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_lists() {
        let s = load_scene("version = 1\n").unwrap();
        assert!(s.buildings().is_empty());
        assert!(s.scatterers().is_empty());
    }

    #[test]
    fn full_file() {
        let text = r#"
version = 1
[materials.glass]
eps_r = 6.0
sigma = 0.0
[[buildings]]
id = 4
footprint = [[0.0, 0.0], [0.0, 10.0], [10.0, 10.0], [10.0, 0.0]]
height = 20.0
material = "glass"
[[scatterers]]
id = 1
base = [5.0, -3.0, 0.0]
radius = 0.375
height = 8.2
"#;
        let s = load_scene(text).unwrap();
        assert_eq!(s.buildings()[0].material, Material::dielectric(6.0, 0.0));
        assert!(s.scatterers()[0].material.pec);
        assert_eq!(s.facades().len(), 4);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(matches!(
            load_scene("version = 1\ncolour = 3\n"),
            Err(Error::SceneSyntax(_))
        ));
        assert!(load_scene("version = 2\n").unwrap_err().to_string().contains("version"));
        assert!(load_scene("buildings = []\n").is_err());
    }

    #[test]
    fn reports_element_location() {
        let text = r#"
version = 1
[[buildings]]
id = 1
footprint = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]
height = 3.0
[[buildings]]
id = 9
footprint = [[0.0, 0.0], [1.0, 0.0]]
height = 3.0
"#;
        let err = load_scene(text).unwrap_err().to_string();
        assert!(err.contains("buildings[1] (id 9)"), "{err}");

        let text = "version = 1\n[[scatterers]]\nid = 2\nbase = [0.0, 0.0, 0.0]\nradius = 0.3\nheight = -1.0\n";
        let err = load_scene(text).unwrap_err().to_string();
        assert!(err.contains("scatterers[0] (id 2)") && err.contains("height"), "{err}");

        let text = "version = 1\n[[buildings]]\nid = 1\nfootprint = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]\nheight = 3.0\nmaterial = \"unobtainium\"\n";
        assert!(load_scene(text).unwrap_err().to_string().contains("unobtainium"));
    }
}
