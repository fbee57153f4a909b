// Building, validating and round-tripping a network in code.

use gridledger::network::{self, Bus, Generator, Load, Network, TransmissionLine};

pub fn run_example() -> gridledger::Result<()> {
    let bus = |id: &str| Bus { id: id.into(), name: String::new() };
    let mut grid = Network {
        buses: vec![bus("a"), bus("b")],
        generators: vec![Generator {
            id: "hydro".into(),
            bus: "a".into(),
            capacity: 50.0,
            marginal_cost: 3.0,
            emission_rate: 0.0,
        }],
        loads: vec![Load { id: "town".into(), bus: "b".into(), demand: 20.0 }],
        lines: vec![TransmissionLine {
            id: "ab".into(),
            from_bus: "a".into(),
            to_bus: "b".into(),
            capacity: 40.0,
            reactance: 1.0,
        }],
        ..Network::default()
    };
    assert!(network::validate(&grid).is_empty());

    let text = grid.to_json_string();
    assert_eq!(Network::from_json_str(&text)?, grid);
    println!("{text}");

    // Break it twice and list what is wrong.
    grid.lines[0].to_bus = "a".into();
    grid.loads[0].demand = -1.0;
    print!("{}", network::validate(&grid));

    // Typos in field names are rejected rather than ignored.
    let typo = r#"{"buses":[{"id":"a","nmae":"x"}]}"#;
    println!("\n{}", Network::from_json_str(typo).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
