use std::time::Instant;
use stabplan::planning::{CostConfig, PlanningOptions};
use stabplan::workbench::fixtures;
use stabplan::workbench::pipeline::{run_active_sampling, RunConfig};

fn main() {
    let system = fixtures::five_bus();
    let trees = fixtures::five_bus_daily_trees(3, 5);
    let cfg = RunConfig { m_max: 10, gap: 0.005, ..RunConfig::default() };
    let t0 = Instant::now();
    let outcome = run_active_sampling(
        &system,
        &trees,
        &CostConfig::default(),
        &PlanningOptions::default(),
        &cfg,
    ).unwrap();
    println!("iterations: {} wall {:.1}s", outcome.iterations, t0.elapsed().as_secs_f64());
    for row in &outcome.log {
        println!(
            "m={} {} omega={} delta={} n_mc={} obj={:.4}",
            row.iteration, row.tag, row.omega_size, row.delta_size, row.misclassified, row.objective
        );
    }
    for k in &outcome.coefficients {
        println!("{}: k_g={:?} k_s={:?} k_cm={:?} k_cl={:?} k_0={:.4} nu={:.4}", k.tag, k.k_g, k.k_s, k.k_cm, k.k_cl, k.k_0, k.nu);
    }
}
