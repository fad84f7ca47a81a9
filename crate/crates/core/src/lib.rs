//! Logic-based Benders decomposition for assigning jobs to facilities and
//! scheduling them under cumulative resource limits.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: instances, assignments, schedule outcomes and linear cuts.
//! - [`cumulative`]: exact single-facility scheduling (the subproblem).
//! - [`master`]: the 0-1 assignment master with a cut pool and an
//!   integer-node callback.
//! - [`cuts`]: nogood and analytic cuts derived from subproblem outcomes.
//! - [`relax`]: energy-based relaxations of the subproblems added to the master.
//! - [`driver`]: the iterative procedure, its feasibility variant, and branch
//!   and check.
//! - [`oracle`]: brute-force reference solver for cross-checking.
//! - [`generator`] and [`check`]: seeded random instances and the validity
//!   sweeps used by the command-line `check` subcommand.
//!
//! ```
//! use lbbd::model::{Facility, Instance, Job, Objective};
//! use lbbd::driver::{solve, SolverConfig, SolveStatus};
//!
//! let facilities = vec![Facility { id: 0, capacity: 2 }, Facility { id: 1, capacity: 1 }];
//! let jobs = (0..4)
//!     .map(|j| Job { id: j, release: 0, due: 9, proc_time: vec![3, 2], demand: vec![1, 1], cost: vec![1, 1] })
//!     .collect();
//! let instance = Instance::new(facilities, jobs, Objective::Makespan);
//! let result = solve(&instance, &SolverConfig::default()).unwrap();
//! assert_eq!(result.status, SolveStatus::Optimal);
//! assert_eq!(result.value, Some(4));
//! ```

pub mod check;
pub mod cumulative;
pub mod cuts;
pub mod driver;
pub mod error;
pub mod generator;
pub mod master;
pub mod model;
pub mod oracle;
pub mod relax;

// Book chapters are compiled as doc-tests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/subproblem.md")]
    mod subproblem {}
    #[doc = include_str!("../../../book/src/cuts.md")]
    mod cuts {}
    #[doc = include_str!("../../../book/src/relaxations.md")]
    mod relaxations {}
    #[doc = include_str!("../../../book/src/branch-and-check.md")]
    mod branch_and_check {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
