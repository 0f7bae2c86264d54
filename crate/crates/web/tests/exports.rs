use modkit_web::{bound_curves_json, learner_profile_json, symmetric_fit_json};
use serde_json::Value;

#[test]
fn curves_contain_the_preset_and_grid() {
    let v: Value = serde_json::from_str(&bound_curves_json(11).unwrap()).unwrap();
    assert_eq!(v["ks_v2_vs_split"].as_array().unwrap().len(), 11);
    assert_eq!(v["preset"]["kr_r6"], 44.5);
    let kr: Vec<f64> = v["kr_vs_r"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).collect();
    assert!(kr.windows(2).all(|w| w[1] > w[0]));
    assert!(v["rate_vs_r"].as_array().unwrap().iter().all(|p| p[1].as_f64().unwrap() < 1.0));
}

#[test]
fn learner_profile_stays_in_envelope() {
    let v: Value = serde_json::from_str(&learner_profile_json(12, 0.05, 3, 200).unwrap()).unwrap();
    assert_eq!(v["queries"], 32);
    for row in v["profile"].as_array().unwrap() {
        assert!(row["max_err"].as_f64().unwrap() <= row["bound"].as_f64().unwrap());
    }
    assert!(learner_profile_json(100, 0.05, 3, 10).is_err());
}

#[test]
fn symmetric_fit_of_the_single_dip() {
    let v: Value = serde_json::from_str(&symmetric_fit_json("[0, 0, 0, 0, -1]").unwrap()).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["eps_weak"], 1.0);
    assert_eq!(v["eps_strong"], 1.0);
    assert!(v["delta"].as_f64().unwrap() > 0.0);
    assert!(symmetric_fit_json("[1]").is_err());
    assert!(symmetric_fit_json("not json").is_err());
}
