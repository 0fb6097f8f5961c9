use opscaling::fixtures::reference_rho0;
use opscaling::scaling::{alternating_projections, Method, ScalingConfig};
use opscaling::ChoiMatrix;
use opscaling_oracles::reference::{max_entry_gap, BKM_OUTPUT, BURG_OUTPUT, SLD_OUTPUT};

fn run(method: Method) -> opscaling::ComplexMatrix {
    let rho0 = reference_rho0();
    let choi = ChoiMatrix::new(2, 2, rho0.hermitian().clone()).unwrap();
    let trace = alternating_projections(method, &choi, &ScalingConfig::fixed(200)).unwrap();
    trace.final_state().as_matrix().clone()
}

#[test]
fn sld_matches_reference_output() {
    let gap = max_entry_gap(&run(Method::Sld), &SLD_OUTPUT);
    eprintln!("gap {gap:.2e}");
    assert!(gap <= 5e-3, "gap {gap}");
}

#[test]
fn bkm_matches_reference_output() {
    let gap = max_entry_gap(&run(Method::Bkm), &BKM_OUTPUT);
    eprintln!("gap {gap:.2e}");
    assert!(gap <= 5e-3, "gap {gap}");
}

#[test]
fn burg_matches_reference_output() {
    let gap = max_entry_gap(&run(Method::Burg), &BURG_OUTPUT);
    eprintln!("gap {gap:.2e}");
    assert!(gap <= 5e-3, "gap {gap}");
}

#[test]
fn the_three_limits_are_distinct() {
    let outs: Vec<_> = Method::ALL.iter().map(|&m| run(m)).collect();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let gap = (&outs[i] - &outs[j]).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(gap > 1e-2, "{i} vs {j}: {gap}");
        }
    }
}
