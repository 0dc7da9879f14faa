use assoclab::assoc::{draw_counts, mc_association_test, CountSampler, Hypothesis, Split, TestSettings, Verdict};
use assoclab::dissection::{dyadic_dissection, gamma_counts};
use assoclab::experiment::{samples_csv, ProcessSpec};
use assoclab::measures::{restrict, sample_poisson, superpose, Intensity, Window};
use assoclab::par::Execution;
use assoclab::rng::stream;
use assoclab::stats::chi_square_gof;

fn spec(json: &str) -> ProcessSpec {
    serde_json::from_str(json).unwrap()
}

#[test]
fn parallel_and_sequential_reports_match() {
    let kinds = [
        r#"{"kind":"poisson","rate":3}"#,
        r#"{"kind":"cluster","parent_rate":2,"offspring":{"kind":"gaussian","mean":2,"sigma":0.05}}"#,
        r#"{"kind":"dirichlet_process","base":{"kind":"uniform","mass":2},"truncation":200}"#,
        r#"{"kind":"mixed_sampled","tau":[0.1,0.4,0.4,0.1]}"#,
        r#"{"kind":"ginibre","size":4}"#,
        r#"{"kind":"exclusion","p":[[0,0.5,0,0.5],[0.5,0,0.5,0],[0,0.5,0,0.5],[0.5,0,0.5,0]],"alpha":[0.3,0.3,0.3,0.3],"horizon":2}"#,
    ];
    for k in kinds {
        let process = spec(k).build(&Window::unit(2), 1).unwrap();
        let split = Split::halves(process.dim());
        let s = TestSettings::new(Hypothesis::Negative, 1000, 17);
        let a = mc_association_test(&process, &split, &s, Execution::Parallel).unwrap();
        let b = mc_association_test(&process, &split, &s, Execution::Sequential).unwrap();
        assert_eq!(a.to_csv(), b.to_csv(), "{k}");
        assert_eq!(
            samples_csv(&process, 20, 3, Execution::Parallel).unwrap(),
            samples_csv(&process, 20, 3, Execution::Sequential).unwrap(),
            "{k}"
        );
    }
}

#[test]
fn seeds_change_samples() {
    let process = spec(r#"{"kind":"poisson","rate":3}"#).build(&Window::unit(2), 1).unwrap();
    assert_ne!(draw_counts(&process, 50, 1, Execution::Sequential).unwrap(), draw_counts(&process, 50, 2, Execution::Sequential).unwrap());
}

#[test]
fn exclusion_field_is_na() {
    let p = spec(r#"{"kind":"exclusion","p":[[0,0.5,0,0.5],[0.5,0,0.5,0],[0,0.5,0,0.5],[0.5,0,0.5,0]],"alpha":[0.2,0.7,0.4,0.5],"horizon":3}"#)
        .build(&Window::unit(1), 0)
        .unwrap();
    let s = TestSettings::new(Hypothesis::Negative, 5000, 23);
    let r = mc_association_test(&p, &Split::halves(4), &s, Execution::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
}

#[test]
fn superposed_poisson_matches_poisson() {
    // n independent Poisson(λ/n) superpose to Poisson(λ)
    let w = Window::unit(2);
    let counts: Vec<usize> = (0..20_000)
        .map(|i| {
            let mut rng = stream(31, i);
            let parts: Vec<_> = (0..5).map(|_| sample_poisson(&Intensity::Constant(0.6), &w, &mut rng).unwrap()).collect();
            superpose(&parts).unwrap().len()
        })
        .collect();
    let pmf = |k: usize| (-3.0f64).exp() * (1..=k).fold(1.0, |a, j| a * 3.0 / j as f64);
    assert!(chi_square_gof(&counts, pmf).p_value > 1e-3);
}

#[test]
fn restriction_over_a_partition_reassembles() {
    let w = Window::unit(2);
    let c = sample_poisson(&Intensity::Constant(40.0), &w, &mut stream(32, 0)).unwrap();
    let d = dyadic_dissection(&w, 2).unwrap();
    let pieces: Vec<_> = (0..d.len()).map(|b| restrict(&c, &d.box_bounds(b))).collect();
    let whole = superpose(&pieces).unwrap();
    assert_eq!(whole.sorted_atoms(), c.sorted_atoms());
    assert_eq!(gamma_counts(&whole, &d), gamma_counts(&c, &d));
    for (b, piece) in pieces.iter().enumerate() {
        assert_eq!(gamma_counts(piece, &d).total(), gamma_counts(&c, &d).0[b]);
    }
}

#[test]
fn count_dimension_follows_dissection() {
    for depth in 0..3 {
        let p = spec(r#"{"kind":"poisson","rate":1}"#).build(&Window::unit(2), depth).unwrap();
        assert_eq!(p.dim(), 1 << (2 * depth));
    }
}
