use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::mer::RateSet;
use crate::network::{Network, StorageUnit};
use crate::opf::DispatchSolution;

const ENERGY_TOL: f64 = 1e-9;

struct Lot {
    /// MWh available for discharge.
    energy: f64,
    /// Marginal rate when the energy was charged; `None` for the initial
    /// state of charge, whose charging predates the horizon.
    rate: Option<f64>,
}

/// Footprint of one storage unit over a horizon, ton.
///
/// `schedule[t]` is net MW in period `t`, positive when discharging, and
/// `rates[t]` is the marginal rate at the unit's bus. Discharged energy is
/// matched to earlier charges first-in-first-out. Each matched MWh earns
/// `charge rate / efficiency - discharge rate`, so shifting clean energy
/// into a dirty hour is a credit. Charges still stored at the end keep
/// their charge-time term.
pub fn storage_footprint(unit: &StorageUnit, schedule: &[f64], rates: &[f64]) -> Result<f64> {
    if schedule.len() != rates.len() {
        return Err(Error::InvalidArgument(format!(
            "storage '{}': {} schedule periods but {} rates",
            unit.id,
            schedule.len(),
            rates.len()
        )));
    }
    let mut lots: VecDeque<Lot> = VecDeque::new();
    if unit.initial_charge > 0.0 {
        lots.push_back(Lot {
            energy: unit.initial_charge,
            rate: None,
        });
    }
    let mut footprint = 0.0;
    for (t, (&s, &mer)) in schedule.iter().zip(rates).enumerate() {
        if s < 0.0 {
            lots.push_back(Lot {
                energy: -s * unit.efficiency,
                rate: Some(mer),
            });
            continue;
        }
        let mut remaining = s;
        while remaining > ENERGY_TOL {
            let Some(lot) = lots.front_mut() else {
                return Err(Error::Schedule(format!(
                    "storage '{}' discharges {remaining:.6} MWh more than it holds in period {t}",
                    unit.id
                )));
            };
            let take = remaining.min(lot.energy);
            if let Some(rc) = lot.rate {
                footprint += rc * take / unit.efficiency;
            }
            footprint -= mer * take;
            lot.energy -= take;
            remaining -= take;
            if lot.energy <= ENERGY_TOL {
                lots.pop_front();
            }
        }
    }
    for lot in &lots {
        if let Some(rc) = lot.rate {
            footprint += rc * lot.energy / unit.efficiency;
        }
    }
    Ok(footprint)
}

/// [`storage_footprint`] for every unit of a solved network, using the bus
/// marginal rates of each period.
pub fn storage_footprints(
    network: &Network,
    solution: &DispatchSolution,
    rates: &[RateSet],
) -> Result<Vec<f64>> {
    let buses = network.storage_buses();
    network
        .storage
        .iter()
        .enumerate()
        .map(|(u, unit)| {
            let schedule: Vec<f64> = solution.storage_dispatch.iter().map(|s| s[u]).collect();
            let unit_rates = (0..solution.periods)
                .map(|t| {
                    let idle = schedule[t].abs() <= ENERGY_TOL;
                    match rates.get(t).and_then(|r| r.bus_mer(buses[u])) {
                        Some(r) => Ok(r),
                        None if idle => Ok(0.0),
                        None => Err(Error::MissingRate {
                            kind: "bus",
                            id: network.buses[buses[u]].id.clone(),
                            period: t,
                        }),
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            storage_footprint(unit, &schedule, &unit_rates)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn battery(initial: f64, efficiency: f64) -> StorageUnit {
        StorageUnit {
            id: "b".into(),
            bus: "1".into(),
            power_capacity: 10.0,
            energy_capacity: 20.0,
            efficiency,
            initial_charge: initial,
        }
    }

    #[test]
    fn clean_to_dirty_shift_is_a_credit() {
        let f = storage_footprint(&battery(0.0, 1.0), &[-10.0, 10.0], &[0.0, 1.0]).unwrap();
        assert!((f + 10.0).abs() < 1e-12);
    }

    #[test]
    fn equal_rates_give_zero() {
        let f = storage_footprint(&battery(0.0, 1.0), &[-10.0, 10.0], &[0.7, 0.7]).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn idle_unit_has_no_footprint() {
        assert_eq!(storage_footprint(&battery(5.0, 1.0), &[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn overdraw_is_a_schedule_violation() {
        let err = storage_footprint(&battery(0.0, 1.0), &[-5.0, 10.0], &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Schedule(_)));
    }

    #[test]
    fn first_in_first_out_matching() {
        // Two charges at different rates, then a partial discharge: the
        // older (cleaner) lot leaves first, the rest stays stored.
        let f = storage_footprint(&battery(0.0, 1.0), &[-5.0, -5.0, 5.0], &[0.0, 0.5, 1.0]).unwrap();
        // matched: (0 - 1) * 5, stored: 0.5 * 5
        assert!((f - (-5.0 + 2.5)).abs() < 1e-12);
    }

    #[test]
    fn lossy_unit_pays_for_charged_energy() {
        let f = storage_footprint(&battery(0.0, 0.8), &[-10.0, 8.0], &[0.5, 1.0]).unwrap();
        assert!((f - (0.5 * 10.0 - 1.0 * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn initial_charge_is_discharged_first() {
        let f = storage_footprint(&battery(4.0, 1.0), &[4.0], &[1.0]).unwrap();
        assert!((f + 4.0).abs() < 1e-12);
    }
}
