//! Bundled study systems: a one-bus dispatch toy, a two-bus fault-analysis
//! case, a five-bus planning case, and a modified 39-bus system with the
//! classic New England network data, grid-following fleets at buses 32-35
//! and three thermal classes.
//!
//! Load and wind shapes are synthetic (smooth diurnal curves plus a seeded
//! generator for wind), so studies on these systems reproduce structural
//! properties rather than any published cost table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::{
    BessData, Branch, Bus, IbrKind, IbrUnit, PowerSystem, StabilityLimits, SyncKind, SyncUnit,
    UcData,
};
use crate::planning::{ScenarioTree, TreeNode};

fn bus(id: usize, kv: f64) -> Bus {
    Bus {
        id,
        name: format!("Bus{}", id + 1),
        base_kv: kv,
    }
}

fn sg(id: usize, bus: usize, mva: f64, x: f64, nl: f64, mc: f64, p: (f64, f64), uc: Option<UcData>) -> SyncUnit {
    SyncUnit {
        id,
        bus,
        kind: SyncKind::Sg,
        capacity_mva: mva,
        capacity_min_mva: 0.0,
        capacity_max_mva: 0.0,
        reactance: x,
        emf: 1.0,
        no_load_cost: nl,
        marginal_cost: mc,
        invest_cost: 0.0,
        p_min: p.0,
        p_max: p.1,
        uc,
    }
}

fn sc_candidate(id: usize, bus: usize, bounds: (f64, f64), x: f64, cost: f64) -> SyncUnit {
    SyncUnit {
        id,
        bus,
        kind: SyncKind::ScCandidate,
        capacity_mva: 0.0,
        capacity_min_mva: bounds.0,
        capacity_max_mva: bounds.1,
        reactance: x,
        emf: 1.0,
        no_load_cost: 0.0,
        marginal_cost: 0.0,
        invest_cost: cost,
        p_min: 0.0,
        p_max: 0.0,
        uc: None,
    }
}

fn gfl(id: usize, bus: usize, mva: f64, droop: f64) -> IbrUnit {
    IbrUnit {
        id,
        bus,
        kind: IbrKind::Gfl,
        capacity_mva: mva,
        capacity_min_mva: 0.0,
        capacity_max_mva: 0.0,
        overload_factor: 1.0,
        reactance: 0.15,
        droop_gain: droop,
        invest_cost: 0.0,
        overload_cost_ratio: 0.0,
        bess: None,
    }
}

fn gfm_candidate(id: usize, bus: usize, bounds: (f64, f64), cost: f64, duration_h: f64) -> IbrUnit {
    IbrUnit {
        id,
        bus,
        kind: IbrKind::GfmCandidate,
        capacity_mva: 0.0,
        capacity_min_mva: bounds.0,
        capacity_max_mva: bounds.1,
        overload_factor: 1.2,
        reactance: 0.2,
        droop_gain: 2.0,
        invest_cost: cost,
        overload_cost_ratio: 0.05,
        bess: Some(BessData {
            efficiency: 0.92,
            charge_rate: 1.0,
            discharge_rate: 1.0,
            soc_min: 0.1,
            soc_max: 0.9,
            duration_h,
        }),
    }
}

/// Single bus with one committable generator; dispatch-logic testing only.
pub fn one_bus() -> PowerSystem {
    PowerSystem {
        buses: vec![bus(0, 230.0)],
        branches: vec![],
        sync_units: vec![sg(
            0,
            0,
            400.0,
            0.25,
            4500.0,
            47.0,
            (80.0, 320.0),
            Some(UcData {
                startup_cost: 10_000.0,
                startup_time: 0,
                min_up_time: 2,
                min_down_time: 1,
                ramp_up: 1000.0,
                ramp_down: 1000.0,
            }),
        )],
        ibr_units: vec![],
        s_base: 100.0,
        max_sc_count: 0,
        max_gfm_count: 0,
        limits: StabilityLimits {
            scc: vec![],
            gscr: 0.0,
        },
    }
}

/// Two buses, one line, one machine, one grid-following inverter. The
/// impedance matrix has the closed form `[[j0.2, j0.2], [j0.2, j0.3]]`.
pub fn two_bus() -> PowerSystem {
    PowerSystem {
        buses: vec![bus(0, 230.0), bus(1, 230.0)],
        branches: vec![Branch {
            from_bus: 0,
            to_bus: 1,
            reactance: 0.1,
            rating: 300.0,
        }],
        sync_units: vec![sg(
            0,
            0,
            100.0,
            0.2,
            3000.0,
            50.0,
            (0.0, 80.0),
            Some(UcData {
                startup_cost: 0.0,
                startup_time: 0,
                min_up_time: 0,
                min_down_time: 0,
                ramp_up: 500.0,
                ramp_down: 500.0,
            }),
        )],
        ibr_units: vec![gfl(0, 1, 60.0, 2.0)],
        s_base: 100.0,
        max_sc_count: 0,
        max_gfm_count: 0,
        limits: StabilityLimits {
            scc: vec![(1, 2.0)],
            gscr: 1.5,
        },
    }
}

/// Five-bus planning fixture. Cheap baseload at bus 0, a must-run unit at
/// bus 1, the load center with an SC candidate at bus 2, wind with a storage
/// candidate at the electrically remote bus 3, and an expensive peaker at
/// bus 4 next to the wind pocket.
pub fn five_bus() -> PowerSystem {
    let branches = vec![
        (0, 1, 0.06, 400.0),
        (1, 2, 0.08, 400.0),
        (2, 3, 0.25, 400.0),
        (3, 4, 0.06, 400.0),
        (4, 0, 0.05, 400.0),
        (1, 3, 0.20, 400.0),
    ]
    .into_iter()
    .map(|(f, t, x, r)| Branch {
        from_bus: f,
        to_bus: t,
        reactance: x,
        rating: r,
    })
    .collect();

    PowerSystem {
        buses: (0..5).map(|i| bus(i, 230.0)).collect(),
        branches,
        sync_units: vec![
            sg(
                0,
                0,
                400.0,
                0.25,
                4500.0,
                47.0,
                (80.0, 320.0),
                Some(UcData {
                    startup_cost: 10_000.0,
                    startup_time: 0,
                    min_up_time: 2,
                    min_down_time: 1,
                    ramp_up: 150.0,
                    ramp_down: 150.0,
                }),
            ),
            sg(
                1,
                2,
                300.0,
                0.30,
                3000.0,
                200.0,
                (30.0, 250.0),
                Some(UcData {
                    startup_cost: 0.0,
                    startup_time: 0,
                    min_up_time: 0,
                    min_down_time: 0,
                    ramp_up: 250.0,
                    ramp_down: 250.0,
                }),
            ),
            sg(2, 1, 200.0, 0.30, 0.0, 10.0, (0.0, 150.0), None),
            sc_candidate(3, 2, (20.0, 150.0), 0.18, 1840.0),
        ],
        ibr_units: vec![gfl(0, 3, 250.0, 2.0), gfm_candidate(1, 3, (50.0, 200.0), 19_880.0, 1.0)],
        s_base: 100.0,
        max_sc_count: 1,
        max_gfm_count: 1,
        limits: StabilityLimits {
            scc: vec![(3, 14.2), (2, 9.5)],
            gscr: 10.0,
        },
    }
}

/// New England 39-bus network with the renewable modification: machines
/// remain at buses 30, 31, 36, 37, 38, 39; grid-following fleets sit at
/// buses 32-35 with storage and SC candidates co-located.
pub fn case39() -> PowerSystem {
    // (from, to, x) on a 100 MVA base, 1-indexed buses.
    const LINES: [(usize, usize, f64); 46] = [
        (1, 2, 0.0411),
        (1, 39, 0.0250),
        (2, 3, 0.0151),
        (2, 25, 0.0086),
        (2, 30, 0.0181),
        (3, 4, 0.0213),
        (3, 18, 0.0133),
        (4, 5, 0.0128),
        (4, 14, 0.0129),
        (5, 6, 0.0026),
        (5, 8, 0.0112),
        (6, 7, 0.0092),
        (6, 11, 0.0082),
        (6, 31, 0.0250),
        (7, 8, 0.0046),
        (8, 9, 0.0363),
        (9, 39, 0.0250),
        (10, 11, 0.0043),
        (10, 13, 0.0043),
        (10, 32, 0.0200),
        (12, 11, 0.0435),
        (12, 13, 0.0435),
        (13, 14, 0.0101),
        (14, 15, 0.0217),
        (15, 16, 0.0094),
        (16, 17, 0.0089),
        (16, 19, 0.0195),
        (16, 21, 0.0135),
        (16, 24, 0.0059),
        (17, 18, 0.0082),
        (17, 27, 0.0173),
        (19, 20, 0.0138),
        (19, 33, 0.0142),
        (20, 34, 0.0180),
        (21, 22, 0.0140),
        (22, 23, 0.0096),
        (22, 35, 0.0143),
        (23, 24, 0.0350),
        (23, 36, 0.0272),
        (25, 26, 0.0323),
        (25, 37, 0.0232),
        (26, 27, 0.0147),
        (26, 28, 0.0474),
        (26, 29, 0.0625),
        (28, 29, 0.0151),
        (29, 38, 0.0156),
    ];
    let branches: Vec<Branch> = LINES
        .iter()
        .map(|&(f, t, x)| Branch {
            from_bus: f - 1,
            to_bus: t - 1,
            reactance: x,
            rating: 1500.0,
        })
        .collect();

    let uc_type1 = UcData {
        startup_cost: 10_000.0,
        startup_time: 4,
        min_up_time: 4,
        min_down_time: 1,
        ramp_up: 250.0,
        ramp_down: 250.0,
    };
    let uc_type2 = UcData {
        startup_cost: 0.0,
        startup_time: 0,
        min_up_time: 0,
        min_down_time: 0,
        ramp_up: 400.0,
        ramp_down: 400.0,
    };
    let mut sync_units = vec![
        // Type I at buses 30, 37.
        sg(0, 29, 1000.0, 0.25, 4500.0, 47.0, (200.0, 800.0), Some(uc_type1.clone())),
        sg(1, 36, 1000.0, 0.25, 4500.0, 47.0, (200.0, 800.0), Some(uc_type1)),
        // Type II at buses 31, 36, 38.
        sg(2, 30, 700.0, 0.25, 3000.0, 200.0, (100.0, 560.0), Some(uc_type2.clone())),
        sg(3, 35, 700.0, 0.25, 3000.0, 200.0, (100.0, 560.0), Some(uc_type2.clone())),
        sg(4, 37, 700.0, 0.25, 3000.0, 200.0, (100.0, 560.0), Some(uc_type2)),
        // Type III at bus 39: must-run flexible.
        sg(5, 38, 1200.0, 0.20, 0.0, 10.0, (0.0, 1100.0), None),
    ];
    for (i, &b) in [31usize, 32, 33, 34].iter().enumerate() {
        sync_units.push(sc_candidate(6 + i, b, (50.0, 800.0), 0.18, 1840.0));
    }

    let mut ibr_units = Vec::new();
    let gfl_caps = [700.0, 650.0, 600.0, 650.0];
    for (i, (&b, &cap)) in [31usize, 32, 33, 34].iter().zip(&gfl_caps).enumerate() {
        ibr_units.push(gfl(i, b, cap, 2.0));
    }
    for (i, &b) in [31usize, 32, 33, 34].iter().enumerate() {
        ibr_units.push(gfm_candidate(4 + i, b, (100.0, 1500.0), 19_880.0, 2.0));
    }

    PowerSystem {
        buses: (0..39).map(|i| bus(i, 345.0)).collect(),
        branches,
        sync_units,
        ibr_units,
        s_base: 100.0,
        max_sc_count: 4,
        max_gfm_count: 4,
        limits: StabilityLimits {
            // Monitored: the four inverter terminals plus the largest load.
            scc: vec![(31, 8.0), (32, 8.0), (33, 8.0), (34, 8.0), (38, 10.0)],
            gscr: 2.5,
        },
    }
}

/// Static bus-load shares of the 39-bus case (MW at peak).
pub fn case39_peak_load() -> Vec<f64> {
    let mut load = vec![0.0; 39];
    for &(b, mw) in [
        (1usize, 97.6),
        (3, 322.0),
        (4, 500.0),
        (7, 233.8),
        (8, 522.0),
        (9, 6.5),
        (12, 8.53),
        (15, 320.0),
        (16, 329.0),
        (18, 158.0),
        (20, 680.0),
        (21, 274.0),
        (23, 247.5),
        (24, 308.6),
        (25, 224.0),
        (26, 139.0),
        (27, 281.0),
        (28, 206.0),
        (29, 283.5),
        (31, 9.2),
        (39, 1104.0),
    ]
    .iter()
    {
        load[b - 1] = mw;
    }
    load
}

/// Smooth diurnal factor in [lo, 1], peaking in the evening.
pub fn diurnal(t: usize, lo: f64) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * ((t % 24) as f64 - 3.0) / 24.0;
    lo + (1.0 - lo) * 0.5 * (1.0 - phase.cos())
}

/// Seeded wind availability factors in [0.05, 0.95].
fn wind_factors(steps: usize, units: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level: Vec<f64> = (0..units).map(|_| rng.gen_range(0.3..0.7)).collect();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let row: Vec<f64> = level.iter().copied().collect();
        out.push(row);
        for l in &mut level {
            *l = (*l + rng.gen_range(-0.12..0.12)).clamp(0.05, 0.95);
        }
    }
    out
}

/// Base hourly profiles for a system: (load `[t][bus]`, wind `[t][gfl]`).
/// `load_floor` sets the overnight fraction of peak demand.
pub fn base_profiles_with_floor(
    system: &PowerSystem,
    peak_load: &[f64],
    steps: usize,
    seed: u64,
    load_floor: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let gfl: Vec<_> = system.gfl_units().collect();
    let wind_f = wind_factors(steps, gfl.len(), seed);
    let mut load = Vec::with_capacity(steps);
    let mut wind = Vec::with_capacity(steps);
    for t in 0..steps {
        let f = diurnal(t, load_floor);
        load.push(peak_load.iter().map(|&p| p * f).collect());
        wind.push(
            gfl.iter()
                .zip(&wind_f[t])
                .map(|(u, w)| u.capacity_mva * w)
                .collect(),
        );
    }
    (load, wind)
}

/// Base hourly profiles with the default demand band.
pub fn base_profiles(system: &PowerSystem, peak_load: &[f64], steps: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    base_profiles_with_floor(system, peak_load, steps, seed, 0.825)
}

/// Five-bus profiles: wind peaks overnight against a wide demand band, so
/// overnight surplus makes storage shifting valuable and drags grid strength
/// down exactly when commitment is cheapest. Day-to-day variation comes from
/// the seed; hour shapes are deterministic.
pub fn five_bus_profiles(steps: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let system = five_bus();
    let peak = five_bus_peak_load();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = system.gfl_units().next().map(|u| u.capacity_mva).unwrap_or(0.0);
    let mut load = Vec::with_capacity(steps);
    let mut wind = Vec::with_capacity(steps);
    let mut day_load = 1.0f64;
    let mut day_wind = 1.0f64;
    for t in 0..steps {
        if t % 24 == 0 {
            day_load = 1.0 + rng.gen_range(-0.05..0.05);
            day_wind = 1.0 + rng.gen_range(-0.10..0.10);
        }
        let lf = diurnal(t, 0.55) * day_load;
        load.push(peak.iter().map(|&p| p * lf).collect());
        // Anti-phase wind: high overnight, low across the afternoon.
        let phase = 2.0 * std::f64::consts::PI * ((t % 24) as f64 - 2.0) / 24.0;
        let wf = ((0.15 + 0.75 * 0.5 * (1.0 + phase.cos())) * day_wind).clamp(0.0, 1.0);
        wind.push(vec![cap * wf]);
    }
    (load, wind)
}

/// Peak bus loads of the five-bus fixture.
pub fn five_bus_peak_load() -> Vec<f64> {
    vec![0.0, 100.0, 190.0, 0.0, 100.0]
}

/// Deterministic single-node scenario tree for a system.
pub fn single_node_tree(system: &PowerSystem, peak_load: &[f64], steps: usize, seed: u64) -> ScenarioTree {
    let (load, wind) = base_profiles(system, peak_load, steps, seed);
    ScenarioTree {
        nodes: vec![TreeNode {
            probability: 1.0,
            load,
            gfl_available: wind,
        }],
        delta_t_hours: 1.0,
        steps,
    }
}

/// Single-node tree over the five-bus fixture's wide-band profiles.
pub fn five_bus_tree(steps: usize, seed: u64) -> ScenarioTree {
    let (load, wind) = five_bus_profiles(steps, seed);
    ScenarioTree {
        nodes: vec![TreeNode {
            probability: 1.0,
            load,
            gfl_available: wind,
        }],
        delta_t_hours: 1.0,
        steps,
    }
}

/// Week of daily single-node trees over the five-bus fixture (planner-in-
/// the-loop sampling at manageable problem sizes).
pub fn five_bus_daily_trees(days: usize, seed: u64) -> Vec<ScenarioTree> {
    (0..days)
        .map(|d| five_bus_tree(24, seed.wrapping_add(1000 * d as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_base_admittance;

    #[test]
    fn fixtures_validate() {
        for system in [one_bus(), two_bus(), five_bus(), case39()] {
            system.validate().unwrap();
        }
    }

    #[test]
    fn case39_is_connected() {
        let system = case39();
        assert_eq!(system.buses.len(), 39);
        assert_eq!(system.branches.len(), 46);
        build_base_admittance(&system).unwrap();
    }

    #[test]
    fn trees_validate() {
        let system = five_bus();
        let tree = single_node_tree(&system, &five_bus_peak_load(), 24, 7);
        tree.validate(&system).unwrap();
        let system = case39();
        let tree = single_node_tree(&system, &case39_peak_load(), 24, 7);
        tree.validate(&system).unwrap();
    }

    #[test]
    fn profiles_are_deterministic() {
        let system = five_bus();
        let a = base_profiles(&system, &five_bus_peak_load(), 48, 9);
        let b = base_profiles(&system, &five_bus_peak_load(), 48, 9);
        assert_eq!(a, b);
    }
}
