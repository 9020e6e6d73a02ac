//! Planning toolkit for transmission grids with high inverter penetration.
//!
//! `stabplan` sizes and places synchronous condensers (SCs) and grid-forming
//! (GFM) battery storage so that two stability requirements are met at minimum
//! investment-plus-operation cost:
//!
//! - **Short-circuit current (SCC)** at monitored buses stays above a limit
//!   during three-phase faults, with inverter in-feed modeled as a
//!   voltage-dependent, saturating current source.
//! - **Grid strength**, measured as the minimum eigenvalue of the
//!   capacity-weighted, Kron-reduced admittance matrix (gSCR), stays above a
//!   limit at every operating point.
//!
//! Both metrics are nonlinear in the planning decisions (unit commitment, SC
//! and GFM capacities, wind dispatch). The toolkit fits conservative linear
//! surrogates from exactly evaluated samples and embeds them in a
//! scenario-tree MILP with unit commitment, DC power flow, and storage
//! dispatch. An active-sampling loop alternates planner solves with exact
//! metric audits until no operating point is misclassified.
//!
//! # Modules
//!
//! | module | provides |
//! |---|---|
//! | [`network`] | per-unit admittance/impedance algebra, Kron reduction |
//! | [`shortcircuit`] | closed-form and iterative fault-current engines |
//! | [`strength`] | gSCR: equivalent admittance + minimum eigenvalue |
//! | [`linearize`] | boundary-aware constrained fits, active sampling |
//! | [`planning`] | MILP assembly, solve, exact-metric audit |
//! | [`solver`] | bundled MILP (branch & bound) and convex QP backends |
//! | [`workbench`] | case files, profiles, scenario trees, CLI, reports |
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example scc_convergence     # iterative fault-current traces
//! cargo run --example scc_droop_sweep     # droop in-feed vs. conventional SCC
//! cargo run --example kron_reduction      # network equivalents
//! cargo run --example gscr_sweep          # strength vs. commitment/capacity
//! cargo run --example fit_boundary        # conservative fit vs. least squares
//! cargo run --example active_sampling     # planner-in-the-loop sampling
//! cargo run --example plan_5bus           # full MILP plan + exact audit
//! cargo run --example case_comparison     # coordinated vs. single-resource plans
//! cargo run --example solver_backend      # MILP/QP backend and MPS dump
//! ```
//!
//! The same functionality is reachable through one thin binary:
//!
//! ```bash
//! cargo run --bin stabplan -- scc --case fixtures/case39.toml --out out/
//! ```
//!
//! See `docs/formats.md` for every file format the toolkit reads or writes.

pub mod error;
pub mod linearize;
pub mod matrix;
pub mod network;
pub mod planning;
pub mod shortcircuit;
pub mod solver;
pub mod strength;
pub mod workbench;

pub use error::{Error, Result};
