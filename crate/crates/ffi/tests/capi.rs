use std::ffi::CString;
use std::ptr;

use ddroc_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { ddroc_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

fn ring_with_loops(m: usize) -> *mut DdrocGraph {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(ddroc_graph_new(m, &mut g), DdrocStatus::Ok);
        for j in 0..m {
            assert_eq!(ddroc_graph_add_edge(g, j, j), DdrocStatus::Ok);
            assert_eq!(ddroc_graph_add_edge(g, j, (j + 1) % m), DdrocStatus::Ok);
        }
    }
    g
}

#[test]
fn worst_expectation_averages_the_largest_costs() {
    let costs = [4.0, 1.0, 7.0, 2.0];
    let q0 = [0.25; 4];
    let mut radius = 0.0;
    let mut value = 0.0;
    let mut witness = [0.0; 4];
    unsafe {
        assert_eq!(ddroc_radius_for_subset_size(4, 2, &mut radius), DdrocStatus::Ok);
        assert_eq!(
            ddroc_worst_expectation(costs.as_ptr(), q0.as_ptr(), 4, radius, &mut value, witness.as_mut_ptr()),
            DdrocStatus::Ok
        );
    }
    assert_eq!(radius, 1.0);
    assert!((value - 5.5).abs() < 1e-12);
    assert_eq!(witness, [0.5, 0.0, 0.5, 0.0]);
}

#[test]
fn inner_dual_matches_worst_expectation() {
    let costs = [3.0, 9.0, 5.0, 1.0, 6.0];
    let q0 = [0.1, 0.2, 0.3, 0.15, 0.25];
    let (mut primal, mut dual, mut nu) = (0.0, 0.0, 0.0);
    let mut lambdas = [0.0; 5];
    let opts = ddroc_solver_options_default();
    unsafe {
        assert_eq!(
            ddroc_worst_expectation(costs.as_ptr(), q0.as_ptr(), 5, 0.8, &mut primal, ptr::null_mut()),
            DdrocStatus::Ok
        );
        assert_eq!(
            ddroc_inner_dual(costs.as_ptr(), q0.as_ptr(), 5, 0.8, &opts, &mut dual, lambdas.as_mut_ptr(), &mut nu),
            DdrocStatus::Ok
        );
    }
    assert!((primal - dual).abs() <= 1e-6 * (1.0 + primal.abs()), "{primal} vs {dual}");
    assert!(lambdas.iter().all(|&l| l >= 0.0));
}

#[test]
fn errors_are_reported_with_messages() {
    let costs = [1.0, 2.0];
    let bad_q0 = [0.7, 0.7];
    let mut value = 0.0;
    let status =
        unsafe { ddroc_worst_expectation(costs.as_ptr(), bad_q0.as_ptr(), 2, 1.0, &mut value, ptr::null_mut()) };
    assert_eq!(status, DdrocStatus::InvalidProbability);
    assert!(last_error().contains("probability"), "{}", last_error());

    let status = unsafe { ddroc_worst_expectation(ptr::null(), bad_q0.as_ptr(), 2, 1.0, &mut value, ptr::null_mut()) };
    assert_eq!(status, DdrocStatus::InvalidProbability);

    let q0 = [0.5, 0.5];
    let status = unsafe { ddroc_worst_expectation(ptr::null(), q0.as_ptr(), 2, 1.0, &mut value, ptr::null_mut()) };
    assert_eq!(status, DdrocStatus::NullPointer);
    assert!(last_error().contains("costs"));

    let status = unsafe { ddroc_radius_for_subset_size(4, 0, &mut value) };
    assert_eq!(status, DdrocStatus::InvalidArgument);

    let status = unsafe { ddroc_radius_for_subset_size(4, 2, &mut value) };
    assert_eq!(status, DdrocStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn error_message_truncates_to_buffer() {
    let mut value = 0.0;
    unsafe { ddroc_radius_for_subset_size(4, 9, &mut value) };
    let full = unsafe { ddroc_last_error_message(ptr::null_mut(), 0) };
    let mut small = [1u8; 6];
    let n = unsafe { ddroc_last_error_message(small.as_mut_ptr().cast(), small.len()) };
    assert_eq!(n, full);
    assert!(full > 5);
    assert_eq!(small[5], 0);
}

#[test]
fn graph_handles_validate_edges() {
    let g = ring_with_loops(4);
    unsafe {
        assert_eq!(ddroc_graph_node_count(g), 4);
        assert_eq!(ddroc_graph_edge_count(g), 8);
        assert_eq!(ddroc_graph_add_edge(g, 0, 9), DdrocStatus::InvalidGraph);
        assert_eq!(ddroc_graph_add_edge(ptr::null_mut(), 0, 1), DdrocStatus::NullPointer);
        assert_eq!(ddroc_graph_node_count(ptr::null()), 0);
        ddroc_graph_free(g);
        ddroc_graph_free(ptr::null_mut());
    }
}

#[test]
fn graph_file_and_generator_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "m 3\n1 1\n2 2\n3 3\n1 2\n2 3\n").unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut g = ptr::null_mut();
    let mut ws = ptr::null_mut();
    unsafe {
        assert_eq!(ddroc_graph_load(c_path.as_ptr(), &mut g), DdrocStatus::Ok);
        assert_eq!(ddroc_graph_edge_count(g), 5);
        let missing = CString::new(dir.path().join("none.txt").to_str().unwrap()).unwrap();
        assert_eq!(ddroc_graph_load(missing.as_ptr(), &mut g), DdrocStatus::Io);
        assert_eq!(ddroc_graph_watts_strogatz(12, 2, 0.05, true, 10, &mut ws), DdrocStatus::Ok);
        assert_eq!(ddroc_graph_node_count(ws), 12);
        assert_eq!(ddroc_graph_edge_count(ws), 24);
        assert_eq!(ddroc_graph_watts_strogatz(12, 3, 0.05, true, 10, &mut ws), DdrocStatus::InvalidArgument);
        ddroc_graph_free(g);
        ddroc_graph_free(ws);
    }
}

#[test]
fn designed_chains_round_trip_through_handles() {
    let m = 5;
    let g = ring_with_loops(m);
    let pi = [0.2; 5];
    let q0 = [0.2; 5];
    let (mut nominal, mut robust) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(ddroc_solve_nominal(g, pi.as_ptr(), q0.as_ptr(), ptr::null(), &mut nominal), DdrocStatus::Ok);
        assert_eq!(ddroc_solve_robust(g, pi.as_ptr(), q0.as_ptr(), 1.5, ptr::null(), &mut robust), DdrocStatus::Ok);
        assert_eq!(ddroc_solution_node_count(robust), m);

        let mut p = vec![0.0; m * m];
        assert_eq!(ddroc_solution_transition(robust, p.as_mut_ptr(), p.len()), DdrocStatus::Ok);
        for j in 0..m {
            let row: f64 = p[j * m..(j + 1) * m].iter().sum();
            assert!((row - 1.0).abs() < 1e-9);
            for k in 0..m {
                assert!((pi[j] * p[j * m + k] - pi[k] * p[k * m + j]).abs() < 1e-9);
            }
        }
        let mut short = vec![0.0; m];
        assert_eq!(ddroc_solution_transition(robust, short.as_mut_ptr(), m), DdrocStatus::BufferTooSmall);

        let mut h = [0.0; 5];
        assert_eq!(ddroc_solution_hitting_times(robust, h.as_mut_ptr(), 5), DdrocStatus::Ok);
        let robust_cost = ddroc_solution_cost(robust);
        let mut worst = 0.0;
        assert_eq!(
            ddroc_worst_expectation(h.as_ptr(), q0.as_ptr(), m, 1.5, &mut worst, ptr::null_mut()),
            DdrocStatus::Ok
        );
        assert!((robust_cost - worst).abs() <= 1e-6 * (1.0 + worst));

        let mut hn = [0.0; 5];
        assert_eq!(ddroc_solution_hitting_times(nominal, hn.as_mut_ptr(), 5), DdrocStatus::Ok);
        let mut nominal_worst = 0.0;
        ddroc_worst_expectation(hn.as_ptr(), q0.as_ptr(), m, 1.5, &mut nominal_worst, ptr::null_mut());
        assert!(robust_cost <= nominal_worst + 1e-6);
        assert!(ddroc_solution_cost(nominal) <= hn.iter().sum::<f64>() / 5.0 + 1e-9);
        assert!(ddroc_solution_cost(ptr::null()).is_nan());

        ddroc_solution_free(nominal);
        ddroc_solution_free(robust);
        ddroc_graph_free(g);
    }
}

#[test]
fn solve_rejects_mismatched_inputs() {
    let g = ring_with_loops(3);
    let pi = [0.5, 0.3, 0.3];
    let q0 = [1.0 / 3.0; 3];
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(
            ddroc_solve_nominal(g, pi.as_ptr(), q0.as_ptr(), ptr::null(), &mut sol),
            DdrocStatus::InvalidProbability
        );
        assert_eq!(
            ddroc_solve_robust(ptr::null(), pi.as_ptr(), q0.as_ptr(), 1.0, ptr::null(), &mut sol),
            DdrocStatus::NullPointer
        );
        assert!(sol.is_null());
        ddroc_graph_free(g);
    }
}
