//! Networks and scenarios bundled with the crate.
//!
//! The same JSON files live under `fixtures/` and can be passed to the
//! command-line tool directly.

use crate::network::Network;
use crate::scenario::ScenarioDelta;

pub const THREE_BUS: &str = include_str!("../fixtures/three_bus.json");
pub const EXPANSION_5MW: &str = include_str!("../fixtures/expansion_5mw.json");
pub const RESPONSIVENESS_BEFORE: &str = include_str!("../fixtures/responsiveness_before.json");
pub const RESPONSIVENESS_AFTER: &str = include_str!("../fixtures/responsiveness_after.json");
pub const NEW_LOAD_20MW: &str = include_str!("../fixtures/new_load_20mw.json");
pub const STORAGE_TWO_PERIOD: &str = include_str!("../fixtures/storage_two_period.json");
pub const SINGLE_BUS_CLEAN: &str = include_str!("../fixtures/single_bus_clean.json");
pub const SYNTH_ERCOT20: &str = include_str!("../fixtures/synth_ercot20.json");
pub const EMPTY_SCENARIO: &str = include_str!("../fixtures/empty_scenario.json");

/// Every bundled network, by file name.
pub const NETWORKS: &[(&str, &str)] = &[
    ("three_bus.json", THREE_BUS),
    ("responsiveness_before.json", RESPONSIVENESS_BEFORE),
    ("responsiveness_after.json", RESPONSIVENESS_AFTER),
    ("storage_two_period.json", STORAGE_TWO_PERIOD),
    ("single_bus_clean.json", SINGLE_BUS_CLEAN),
    ("synth_ercot20.json", SYNTH_ERCOT20),
];

fn network(text: &str) -> Network {
    Network::from_json_str(text).expect("bundled network parses")
}

fn scenario(text: &str) -> ScenarioDelta {
    ScenarioDelta::from_json_str(text).expect("bundled scenario parses")
}

/// Transmission-constrained three-bus grid: emitting generator at bus 1,
/// carbon-free generator at bus 2, 45 MW data center at bus 3, line 2-3
/// limited to 20 MW.
pub fn three_bus() -> Network {
    network(THREE_BUS)
}

/// +5 MW load at bus 3 and +5 MW carbon-free capacity at bus 2.
pub fn expansion_5mw() -> ScenarioDelta {
    scenario(EXPANSION_5MW)
}

/// Clean 90 MW and gas 90 MW generators serving an 80 MW load, with a
/// 70 MW clean contract.
pub fn responsiveness_before() -> Network {
    network(RESPONSIVENESS_BEFORE)
}

/// [`responsiveness_before`] plus a new 20 MW load at bus 4.
pub fn responsiveness_after() -> Network {
    network(RESPONSIVENESS_AFTER)
}

/// Adds the 20 MW load that turns the "before" grid into the "after" grid.
pub fn new_load_20mw() -> ScenarioDelta {
    scenario(NEW_LOAD_20MW)
}

/// Two periods, one battery: charges from clean surplus, discharges when
/// gas is on the margin.
pub fn storage_two_period() -> Network {
    network(STORAGE_TWO_PERIOD)
}

pub fn single_bus_clean() -> Network {
    network(SINGLE_BUS_CLEAN)
}

/// Synthetic 20-bus grid with a wind-heavy west and a congested east-west
/// corridor. Illustrative only.
pub fn synth_ercot20() -> Network {
    network(SYNTH_ERCOT20)
}

pub fn empty_scenario() -> ScenarioDelta {
    scenario(EMPTY_SCENARIO)
}
