//! Lossless DC power flow: bus susceptance matrix and power transfer
//! distribution factors.

use crate::error::{Error, Result};
use crate::linalg::Lu;

use super::Network;

/// Line-by-bus sensitivity matrix for a fixed slack bus.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptdf {
    pub slack: usize,
    lines: usize,
    buses: usize,
    /// Row-major, `lines x buses`.
    data: Vec<f64>,
}

impl Ptdf {
    /// MW of flow on `line` (from -> to) per MW injected at `bus` and
    /// withdrawn at the slack.
    pub fn get(&self, line: usize, bus: usize) -> f64 {
        self.data[line * self.buses + bus]
    }

    pub fn row(&self, line: usize) -> &[f64] {
        &self.data[line * self.buses..(line + 1) * self.buses]
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn buses(&self) -> usize {
        self.buses
    }

    /// Flows for a vector of nodal injections. No balance check.
    pub fn apply(&self, injections: &[f64]) -> Vec<f64> {
        (0..self.lines)
            .map(|l| self.row(l).iter().zip(injections).map(|(p, x)| p * x).sum())
            .collect()
    }
}

/// Builds the PTDF matrix with `slack` as the reference bus.
pub fn ptdf(network: &Network, slack: &str) -> Result<Ptdf> {
    let slack = network.require_bus(slack)?;
    ptdf_by_index(network, slack)
}

pub(crate) fn ptdf_by_index(network: &Network, slack: usize) -> Result<Ptdf> {
    let unreachable = network.unreachable_buses();
    if !unreachable.is_empty() {
        return Err(Error::Disconnected(unreachable));
    }
    let n = network.buses.len();
    let ends = network.line_ends();
    let m = ends.len();

    // Reduced susceptance matrix: slack row and column removed.
    let reduced = |b: usize| if b < slack { Some(b) } else if b > slack { Some(b - 1) } else { None };
    let nr = n.saturating_sub(1);
    let mut bmat = vec![0.0; nr * nr];
    for (line, &(f, t)) in network.lines.iter().zip(&ends) {
        let y = 1.0 / line.reactance;
        if let Some(i) = reduced(f) {
            bmat[i * nr + i] += y;
        }
        if let Some(j) = reduced(t) {
            bmat[j * nr + j] += y;
        }
        if let (Some(i), Some(j)) = (reduced(f), reduced(t)) {
            bmat[i * nr + j] -= y;
            bmat[j * nr + i] -= y;
        }
    }

    let x = if nr == 0 {
        Vec::new()
    } else {
        Lu::factor(bmat, nr)
            .map_err(|_| Error::Disconnected(network.buses.iter().map(|b| b.id.clone()).collect()))?
            .inverse()
    };
    // Angle sensitivity of bus `a` to injection at bus `b` (zero at slack).
    let theta = |a: usize, b: usize| match (reduced(a), reduced(b)) {
        (Some(i), Some(j)) => x[i * nr + j],
        _ => 0.0,
    };

    let mut data = vec![0.0; m * n];
    for (l, (line, &(f, t))) in network.lines.iter().zip(&ends).enumerate() {
        for b in 0..n {
            if b != slack {
                data[l * n + b] = (theta(f, b) - theta(t, b)) / line.reactance;
            }
        }
    }
    Ok(Ptdf {
        slack,
        lines: m,
        buses: n,
        data,
    })
}

/// Relative tolerance for the zero-sum check on injections.
pub const BALANCE_TOL: f64 = 1e-7;

/// Line flows (positive from -> to) for balanced per-bus injections.
pub fn flows_from_dispatch(network: &Network, injections: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(injections.len(), network.buses.len(), "one injection per bus");
    let net: f64 = injections.iter().sum();
    let scale: f64 = injections.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    if net.abs() > BALANCE_TOL * scale {
        return Err(Error::Unbalanced(net));
    }
    if network.buses.is_empty() {
        return Ok(vec![0.0; network.lines.len()]);
    }
    Ok(ptdf_by_index(network, 0)?.apply(injections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::{Bus, TransmissionLine};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// Line ids in the three-bus fixture, by endpoints.
    fn line(n: &Network, id: &str) -> usize {
        n.line_index(id).unwrap()
    }

    #[test]
    fn triangle_sensitivities_with_slack_three() {
        let n = fixtures::three_bus();
        let p = ptdf(&n, "3").unwrap();
        let b1 = n.bus_index("1").unwrap();
        assert!(close(p.get(line(&n, "1-3"), b1), 2.0 / 3.0));
        assert!(close(p.get(line(&n, "1-2"), b1), 1.0 / 3.0));
        assert!(close(p.get(line(&n, "2-3"), b1), 1.0 / 3.0));
        let slack = n.bus_index("3").unwrap();
        for l in 0..p.lines() {
            assert_eq!(p.get(l, slack), 0.0);
        }
    }

    #[test]
    fn two_bus_single_line() {
        let n = Network {
            buses: vec![
                Bus { id: "1".into(), name: String::new() },
                Bus { id: "2".into(), name: String::new() },
            ],
            lines: vec![TransmissionLine {
                id: "1-2".into(),
                from_bus: "1".into(),
                to_bus: "2".into(),
                capacity: 10.0,
                reactance: 0.3,
            }],
            ..Network::default()
        };
        let p = ptdf(&n, "2").unwrap();
        assert!(close(p.get(0, 0), 1.0));
        assert_eq!(p.get(0, 1), 0.0);
    }

    #[test]
    fn three_bus_base_flows() {
        let n = fixtures::three_bus();
        let mut inj = vec![0.0; 3];
        inj[n.bus_index("1").unwrap()] = 30.0;
        inj[n.bus_index("2").unwrap()] = 15.0;
        inj[n.bus_index("3").unwrap()] = -45.0;
        let f = flows_from_dispatch(&n, &inj).unwrap();
        assert!((f[line(&n, "1-2")] - 5.0).abs() < 1e-9);
        assert!((f[line(&n, "2-3")] - 20.0).abs() < 1e-9);
        assert!((f[line(&n, "1-3")] - 25.0).abs() < 1e-9);

        let neg: Vec<f64> = inj.iter().map(|x| -x).collect();
        let g = flows_from_dispatch(&n, &neg).unwrap();
        for (a, b) in f.iter().zip(&g) {
            assert_eq!(*a, -*b);
        }
        assert!(flows_from_dispatch(&n, &[0.0; 3]).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn unbalanced_injections_rejected() {
        let n = fixtures::three_bus();
        assert!(matches!(
            flows_from_dispatch(&n, &[1.0, 0.0, 0.0]),
            Err(Error::Unbalanced(_))
        ));
    }

    #[test]
    fn disconnected_network_names_unreachable_buses() {
        let mut n = fixtures::three_bus();
        n.buses.push(Bus { id: "4".into(), name: String::new() });
        match ptdf(&n, "1") {
            Err(Error::Disconnected(ids)) => assert_eq!(ids, vec!["4".to_string()]),
            other => panic!("expected disconnected error, got {other:?}"),
        }
    }
}
