//! Scenarios compiled into the binary.

use crate::config::Scenario;
use crate::error::CliError;

pub struct Bundled {
    pub name: &'static str,
    pub acceptance: bool,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($name:literal => $acc:literal),* $(,)?) => {
        &[$(Bundled { name: $name, acceptance: $acc, text: include_str!(concat!("../scenarios/", $name, ".toml")) }),*]
    };
}

pub const BUNDLED: &[Bundled] = bundled![
    "circle-rotation" => true,
    "ellipse-integrability" => true,
    "puck-symplectic" => true,
    "outer-ellipse" => true,
    "fierobe-triangle" => true,
    "fierobe-quad" => true,
    "trapezoid-periodic" => true,
    "stadium-chaos" => true,
    "parabola-trap" => true,
    "catacaustic-cusps" => true,
    "spectra-closed-form" => true,
    "string-confocal" => true,
    "clicks-periodicity" => true,
    "gutkin-circle" => true,
    "stadium-portrait" => false,
    "outer-random-oval" => false,
    "circle-map-pencil" => false,
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}

pub fn acceptance() -> impl Iterator<Item = &'static Bundled> {
    BUNDLED.iter().filter(|b| b.acceptance)
}

impl Bundled {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Scenario::from_toml(self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_validates_under_its_own_name() {
        for b in BUNDLED {
            let s = b.scenario().unwrap_or_else(|e| panic!("{}: {e}", b.name));
            assert_eq!(s.name, b.name);
        }
        assert_eq!(acceptance().count(), 14);
    }
}
