//! Carbon accounting for electric grids.
//!
//! `gridledger` solves cost-minimising DC optimal power flow, derives
//! marginal emissions rates for buses, lines and generators by re-solving
//! perturbed networks, and allocates carbon footprints to every grid element
//! under location-based, market-based and marginal (carbon-matching)
//! accounting. Each ledger is audited against the Scope 1 emissions the
//! dispatch actually produces.
//!
//! ```
//! use gridledger::{accounting, fixtures, mer, opf};
//!
//! let network = fixtures::three_bus();
//! let dispatch = opf::solve_dcopf(&network).unwrap();
//! assert!((dispatch.scope1[0] - 27.0).abs() < 1e-6);
//!
//! let rates = mer::rate_profile(&network, &mer::SweepOptions::default()).unwrap();
//! let ledger = accounting::mer_ledger(&network, &dispatch, &rates).unwrap();
//! assert!(accounting::audit_balance(&ledger, 1e-6).pass);
//! ```

pub mod accounting;
pub mod cli;
pub mod error;
pub mod fixtures;
mod linalg;
pub mod lp;
pub mod mer;
pub mod network;
pub mod opf;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use network::Network;
pub use opf::DispatchSolution;
