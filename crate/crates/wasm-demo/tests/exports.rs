//! The demo's exports, exercised natively through the same code paths the
//! browser bindings call.

use normlab_wasm_demo::{blocks_json, digit_string, parse_source, series_json, MAX_DIGITS};
use serde_json::Value;

#[test]
fn every_menu_source_works() {
    // The options offered by www/index.html.
    for s in [
        "sqrt:2",
        "sqrt:3",
        "sqrt:5",
        "champernowne2",
        "copeland_erdos2",
        "rational:1/3",
        "rational:1/7",
        "alternating",
        "ones",
    ] {
        parse_source(s).unwrap();
        assert_eq!(digit_string(s, 64).unwrap().len(), 64);
        let v: Value = serde_json::from_str(&series_json(s, 4096).unwrap()).unwrap();
        assert_eq!(v["ones_ratio"].as_array().unwrap().len(), 256);
        let b: Value = serde_json::from_str(&blocks_json(s, 4096, 4, false).unwrap()).unwrap();
        let total: f64 = b["frequencies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f.as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn errors_are_messages() {
    assert!(digit_string("sqrt:9", 8)
        .unwrap_err()
        .contains("perfect square"));
    assert!(series_json("sqrt:2", MAX_DIGITS + 1).is_err());
    assert!(blocks_json("sqrt:2", 4, 8, false).is_err());
}

#[test]
fn ones_ratio_curve_matches_digits() {
    let bits = digit_string("copeland_erdos2", 1000).unwrap();
    let v: Value = serde_json::from_str(&series_json("copeland_erdos2", 1000).unwrap()).unwrap();
    for p in v["ones_ratio"].as_array().unwrap() {
        let n = p[0].as_f64().unwrap() as usize;
        let ones = bits[..n].bytes().filter(|&b| b == b'1').count();
        assert_eq!(p[1].as_f64().unwrap(), ones as f64 / n as f64);
    }
}
