use coordsim::cq::{CqNetworkState, Extension};
use coordsim::protocols::{induced_state, run_broadcast, run_no_comm, run_two_node, CqCode};
use coordsim::qstate::{registers, DensityOperator};
use coordsim::{Caps, Error, Tolerances};

fn ket(i: usize, name: &str) -> DensityOperator {
    DensityOperator::basis(i, registers(&[(name, 2)])).unwrap()
}

fn three_correlated_bits() -> CqNetworkState {
    let mut p = vec![0.0; 8];
    p[0] = 0.5;
    p[7] = 0.5;
    CqNetworkState::no_comm(DensityOperator::diagonal(&p, registers(&[("A", 2), ("B", 2), ("C", 2)])).unwrap()).unwrap()
}

fn common_bit_extension() -> Extension {
    let f = |b: usize| [ket(b, "A"), ket(b, "B"), ket(b, "C")];
    Extension::no_comm(vec![0.5, 0.5], vec![f(0), f(1)]).unwrap()
}

#[test]
fn no_comm_gap_decays_above_capacity_and_stalls_below() {
    let target = three_correlated_bits();
    let ext = common_bit_extension();
    let (caps, tol) = (Caps::default(), Tolerances::default());
    let n_list = [1, 2, 3, 4];
    let above = run_no_comm(&target, &ext, 1.3, &n_list, 50, 0, &caps, &tol).unwrap();
    assert!(above.last().unwrap().mean_gap < above[0].mean_gap);
    let below = run_no_comm(&target, &ext, 0.6, &n_list, 50, 0, &caps, &tol).unwrap();
    assert!(below.last().unwrap().mean_gap > 0.5);
}

#[test]
fn entangled_no_comm_target_is_refused() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| num_complex::Complex64::new(x, 0.0);
    let bell = DensityOperator::pure(&[c(s), c(0.0), c(0.0), c(s)], registers(&[("A", 2), ("B", 2)])).unwrap();
    let target = CqNetworkState::no_comm(bell.tensor(&ket(0, "C")).unwrap()).unwrap();
    let err = run_no_comm(&target, &common_bit_extension(), 1.0, &[1], 2, 0, &Caps::default(), &Tolerances::default());
    assert!(matches!(err, Err(Error::InfeasibleExtension { .. })));
}

#[test]
fn broadcast_product_target_has_zero_gap() {
    let state = ket(0, "B1").tensor(&ket(1, "B2")).unwrap();
    let target = CqNetworkState::broadcast(vec![0.3, 0.7], vec![state.clone(), state]).unwrap();
    let ext = Extension::broadcast(vec![vec![0.3], vec![0.7]], vec![ket(0, "B1")], vec![ket(1, "B2")]).unwrap();
    let rows = run_broadcast(&target, &ext, 0.5, 0.5, &[1, 2, 3], 3, 7, &Caps::default(), &Tolerances::default()).unwrap();
    for r in rows {
        assert!(r.mean_gap < 1e-9, "{r:?}");
        assert!(r.max_marginal_error < 1e-12);
    }
}

#[test]
fn two_node_induced_state_preserves_source_marginal() {
    let target = CqNetworkState::two_node(vec![0.25, 0.75], vec![ket(0, "B"), ket(1, "B")]).unwrap();
    let ext = Extension::identity(&target).unwrap();
    let (caps, tol) = (Caps::default(), Tolerances::default());
    for seed in 0..5 {
        let code = CqCode::new(&target, &ext, 0.3, 0.8, 3, seed, &caps, &tol).unwrap();
        let induced = induced_state(&code, &caps).unwrap();
        for block in &induced.blocks {
            let expected: f64 = block.x_seq.iter().map(|&x| target.pmf()[x as usize]).product();
            assert!((block.weight - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_configs_give_identical_rows() {
    let target = CqNetworkState::two_node(vec![0.5, 0.5], vec![ket(0, "B"), ket(1, "B")]).unwrap();
    let ext = Extension::identity(&target).unwrap();
    let (caps, tol) = (Caps::default(), Tolerances::default());
    let a = run_two_node(&target, &ext, 0.25, 1.25, &[1, 2, 3], 10, 42, &caps, &tol).unwrap();
    let b = run_two_node(&target, &ext, 0.25, 1.25, &[1, 2, 3], 10, 42, &caps, &tol).unwrap();
    assert_eq!(a, b);
    let c = run_two_node(&target, &ext, 0.25, 1.25, &[1, 2, 3], 10, 43, &caps, &tol).unwrap();
    assert_ne!(a, c);
}

#[test]
fn block_caps_are_enforced() {
    let target = CqNetworkState::two_node(vec![0.5, 0.5], vec![ket(0, "B"), ket(1, "B")]).unwrap();
    let ext = Extension::identity(&target).unwrap();
    let caps = Caps { max_blocks: 8, ..Caps::default() };
    let err = run_two_node(&target, &ext, 0.25, 1.25, &[4], 2, 0, &caps, &Tolerances::default());
    assert!(matches!(err, Err(Error::DimensionCap { .. })), "{err:?}");
}
