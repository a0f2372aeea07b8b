use coordsim::cq::{feasibility_residual, info_two_node, CqNetworkState};
use coordsim::qstate::{registers, DensityOperator};
use coordsim::region::{
    brute_force_oracle, holevo, min_comm_rate, min_no_cr_rate, nc_capacity, trace_two_node_region, OptimizerOptions,
    OracleObjective, OracleOptions, RegionStatus, RegionVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag(p: &[f64], name: &str) -> DensityOperator {
    DensityOperator::diagonal(p, registers(&[(name, p.len())])).unwrap()
}

fn opts() -> OptimizerOptions {
    OptimizerOptions { restarts: 8, u_max: Some(3), iterations: 400, ..Default::default() }
}

#[test]
fn argmin_reproduces_reported_rates() {
    let t = CqNetworkState::two_node(vec![0.5, 0.5], vec![diag(&[0.9, 0.1], "B"), diag(&[0.2, 0.8], "B")]).unwrap();
    let r = min_no_cr_rate(&t, &opts()).unwrap();
    let ext = r.argmin.as_ref().unwrap();
    assert!(feasibility_residual(ext, &t).unwrap() <= 1e-6);
    let (i_xu, i_all) = info_two_node(ext).unwrap();
    assert!((i_xu - r.i_xu.unwrap()).abs() < 1e-7);
    assert!((i_all - r.value.unwrap()).abs() < 1e-7);
}

#[test]
fn classical_rates_sit_between_holevo_and_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let q: f64 = rng.gen_range(0.2..0.8);
        let a: f64 = rng.gen_range(0.05..0.95);
        let b: f64 = rng.gen_range(0.05..0.95);
        let t = CqNetworkState::two_node(vec![q, 1.0 - q], vec![diag(&[a, 1.0 - a], "B"), diag(&[b, 1.0 - b], "B")]).unwrap();
        let comm = min_comm_rate(&t, &opts()).unwrap().value.unwrap();
        let no_cr = min_no_cr_rate(&t, &opts()).unwrap().value.unwrap();
        assert!(holevo(&t) <= comm + 1e-6);
        assert!(comm <= no_cr + 1e-6);
        let oracle = brute_force_oracle(&t, OracleObjective::All, &OracleOptions { max_u: 2, grid_step: 1.0 / 8.0, ..Default::default() });
        if let Ok(o) = oracle {
            // The grid search is over a coarser family, so it cannot beat the optimum.
            assert!(o.value >= no_cr - 1e-3, "oracle {} optimizer {no_cr}", o.value);
        }
    }
}

#[test]
fn boundaries_respect_their_floors() {
    let t = CqNetworkState::two_node(vec![0.5, 0.5], vec![diag(&[0.85, 0.15], "B"), diag(&[0.15, 0.85], "B")]).unwrap();
    let grid = [0.0, 0.2, 0.4, 0.8, 1.2];
    let proof = trace_two_node_region(&t, &grid, RegionVariant::Proof, &opts()).unwrap();
    let printed = trace_two_node_region(&t, &grid, RegionVariant::Printed, &opts()).unwrap();
    let chi = holevo(&t);
    for w in proof.points.windows(2) {
        assert!(w[1].r1.unwrap() <= w[0].r1.unwrap() + 1e-12);
    }
    // The proof reading keeps R1 >= I(X;U) >= Holevo; the printed one only keeps R1 >= 0
    // and has no point until R0 covers some I(X;U).
    assert!(proof.points.iter().all(|p| p.r1.unwrap() >= chi - 1e-7));
    assert_eq!(printed.points[0].r1, None);
    assert!(printed.points.iter().flat_map(|p| p.r1).all(|r| r >= 0.0));
}

#[test]
fn nc_product_target_needs_no_common_randomness() {
    let omega = diag(&[0.3, 0.7], "A").tensor(&diag(&[0.6, 0.4], "B")).unwrap().tensor(&diag(&[1.0, 0.0], "C")).unwrap();
    let r = nc_capacity(&CqNetworkState::no_comm(omega).unwrap(), &opts()).unwrap();
    assert_eq!(r.status, RegionStatus::Feasible);
    assert!(r.value.unwrap().abs() < 1e-9);
    assert_eq!(r.argmin.unwrap().u_count(), 1);
}
