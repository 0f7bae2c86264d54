use modkit::constructions::basic::pawlik;
use modkit::expander::bounds::{
    kfirst, kprime, kr, ks_final, ks_v1, kw_min, m_upper_bound, n2, published_profile, stirling_bracket,
    union_bound_rate, BoundProfile, STRONG_PAIR,
};
use modkit::expander::{check_recombination, frequent_collection, recombine, sample_biregular, verify_expansion, BipartiteGraph};

#[test]
fn closed_forms_at_hand_checked_points() {
    assert_eq!(kr(6.0, 2.0 / 3.0).unwrap(), 44.5);
    assert!((kfirst(5.05, 2.0 / 3.0).unwrap() - 26.8).abs() < 1e-12);
    assert!((kprime(1.0 / 16.0, 4.0, 4.0 / 15.0).unwrap() - (8.0 + n2(1.0 / 16.0).unwrap() - 4.0 / 15.0) / (11.0 / 15.0)).abs() < 1e-12);
    assert!((ks_v1(43.0 / 16.0, STRONG_PAIR).unwrap() - 13.24609375).abs() < 1e-9);
    assert!(ks_final(STRONG_PAIR).unwrap() < 12.65);
}

#[test]
fn kw_min_matches_a_grid_scan() {
    let (r, t, r2, t2) = (5.05, 2.0 / 3.0, 5.0, 5.0 / 7.0);
    let a = |u: f64| (2.0 * r - 0.5 - t - t * u / 2.0) / (1.0 - t);
    let b = |u: f64| (2.0 * r2 - 1.0 + u / 2.0) / (1.0 - t2) + 1.0;
    let grid = (0..=200_000).map(|i| i as f64 * 1e-4).map(|u| a(u).min(b(u))).fold(f64::MIN, f64::max);
    let k = kw_min(r, t, r2, t2).unwrap();
    assert!(k.value >= grid - 1e-9);
    assert!(k.value - grid < 1e-3);
}

#[test]
fn m_upper_bound_is_affine_in_its_inputs() {
    let base = m_upper_bound(1.0, 1.0, 0.0, 0.0, 1.0, 4.0, 0.5).unwrap();
    let more = m_upper_bound(2.0, 1.0, 0.0, 0.0, 1.0, 4.0, 0.5).unwrap();
    let again = m_upper_bound(3.0, 1.0, 0.0, 0.0, 1.0, 4.0, 0.5).unwrap();
    assert!(((more - base) - (again - more)).abs() < 1e-12);
}

#[test]
fn stirling_bracket_contains_the_binomial() {
    for (c, d, m) in [(1.0, 0.25, 40), (2.0, 0.5, 30), (1.5, 0.3, 50)] {
        let b = stirling_bracket(c, d, m).unwrap();
        assert!(b.contains_actual(), "{b:?}");
    }
}

#[test]
fn tabulated_union_rates_are_below_one() {
    for (alpha, r, theta) in [(0.25, 5.0, 0.5), (0.5, 5.0, 5.0 / 7.0), (1.0 / 16.0, 4.0, 4.0 / 15.0), (1.0 / 256.0, 3.0, 3.0 / 19.0)] {
        let x = union_bound_rate(alpha, r, theta).unwrap();
        assert!(x > 0.0 && x < 1.0, "{alpha} {r} {theta}: {x}");
    }
}

#[test]
fn profile_file_round_trip() {
    let p = published_profile();
    let text = serde_json::to_string_pretty(&p).unwrap();
    let back: BoundProfile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
}

#[test]
fn graph_file_round_trip_and_recombination() {
    let g = sample_biregular(6, 5, 0.5, 0).unwrap();
    let back: BipartiteGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
    assert_eq!(back, g);
    assert!(verify_expansion(&g, 0.25).unwrap().ok);
    let f = pawlik(4).unwrap();
    for seed in 0..10 {
        let sources = frequent_collection(8, 12, 3, seed).unwrap();
        let rec = recombine(&g, &sources, &f, None).unwrap();
        let c = check_recombination(&g, &sources, &rec);
        assert!(c.all(), "seed {seed}: {c:?}");
        assert_eq!(rec.targets.len(), 6);
    }
}

#[test]
fn complete_graph_recombines_anything_up_to_right_side() {
    let g = BipartiteGraph::complete(6, 3);
    let f = pawlik(3).unwrap();
    let sources = frequent_collection(6, 6, 3, 9).unwrap();
    let rec = recombine(&g, &sources, &f, Some(2.0)).unwrap();
    assert!(check_recombination(&g, &sources, &rec).all());
    assert_eq!(rec.targets.uniform_frequency(), Some(3));
}
