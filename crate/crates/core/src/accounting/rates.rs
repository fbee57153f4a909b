use crate::error::{Error, Result};
use crate::network::{Contract, Network};
use crate::opf::DispatchSolution;

const ZERO_ENERGY: f64 = 1e-12;

fn check_period(solution: &DispatchSolution, period: usize) -> Result<()> {
    if period >= solution.periods {
        return Err(Error::InvalidArgument(format!(
            "period {period} out of range (solution has {})",
            solution.periods
        )));
    }
    Ok(())
}

fn emissions(network: &Network, solution: &DispatchSolution, period: usize) -> f64 {
    network
        .generators
        .iter()
        .zip(&solution.generation[period])
        .map(|(g, out)| g.emission_rate * out)
        .sum()
}

/// Generation-weighted average emission rate in `period`, ton/MWh.
pub fn aer(network: &Network, solution: &DispatchSolution, period: usize) -> Result<f64> {
    check_period(solution, period)?;
    let generation = solution.total_generation(period);
    if generation <= ZERO_ENERGY {
        return Err(Error::UndefinedRate {
            rate: "AER",
            reason: format!("no generation in period {period}"),
        });
    }
    Ok(emissions(network, solution, period) / generation)
}

/// Emission rate of the generation left after removing `contracts`.
pub fn residual_mix(
    network: &Network,
    solution: &DispatchSolution,
    contracts: &[Contract],
    period: usize,
) -> Result<f64> {
    check_period(solution, period)?;
    let contracted: f64 = contracts.iter().map(|c| c.contracted_energy).sum();
    let contracted_emissions: f64 = contracts
        .iter()
        .map(|c| c.contracted_energy * c.contracted_emission_rate)
        .sum();
    let remaining = solution.total_generation(period) - contracted;
    if remaining <= ZERO_ENERGY {
        return Err(Error::UndefinedRate {
            rate: "RER",
            reason: format!(
                "contracts ({contracted} MW) cover all generation in period {period}"
            ),
        });
    }
    Ok((emissions(network, solution, period) - contracted_emissions) / remaining)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::opf::solve_dcopf;

    #[test]
    fn three_bus_average_rate() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        assert!((aer(&n, &s, 0).unwrap() - 0.6).abs() < 1e-9);
    }

    #[test]
    fn all_clean_average_rate_is_zero() {
        let n = fixtures::single_bus_clean();
        let s = solve_dcopf(&n).unwrap();
        assert_eq!(aer(&n, &s, 0).unwrap(), 0.0);
    }

    #[test]
    fn zero_generation_is_undefined() {
        let mut n = fixtures::single_bus_clean();
        n.loads[0].demand = 0.0;
        let s = solve_dcopf(&n).unwrap();
        assert!(matches!(aer(&n, &s, 0), Err(Error::UndefinedRate { .. })));
    }

    #[test]
    fn residual_mix_after_new_load() {
        let n = fixtures::responsiveness_after();
        let s = solve_dcopf(&n).unwrap();
        let rer = residual_mix(&n, &s, &n.contracts, 0).unwrap();
        assert!((rer - 10.0 / 30.0).abs() < 1e-9);
    }

    #[test]
    fn residual_mix_without_contracts_is_average() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        assert_eq!(residual_mix(&n, &s, &[], 0).unwrap(), aer(&n, &s, 0).unwrap());
    }

    #[test]
    fn contracts_at_the_average_rate_leave_it_unchanged() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        let c = Contract {
            load_bus: "3".into(),
            generator: "g1".into(),
            contracted_energy: 20.0,
            contracted_emission_rate: 0.6,
        };
        assert!((residual_mix(&n, &s, &[c], 0).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn contracts_covering_everything_are_undefined() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        let c = Contract {
            load_bus: "3".into(),
            generator: "g1".into(),
            contracted_energy: 45.0,
            contracted_emission_rate: 0.0,
        };
        assert!(residual_mix(&n, &s, &[c], 0).is_err());
    }
}
