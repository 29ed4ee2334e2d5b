//! Browser bindings for the `www/` demo page.
//!
//! Every export takes a source string — `sqrt:M`, `rational:P/Q`,
//! `champernowne2`, `copeland_erdos2`, `ones` or `alternating` — and returns
//! JSON (or a 0/1 string) for the page to draw. Work is sequential; the page
//! caps the digit counts it asks for.

use normlab::analytics::{
    block_histogram, digit_series, normality_deviation, ns_ratio_series, Statistic, WindowMode,
};
use normlab::digits::SourceSpec;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest digit count the page may request.
pub const MAX_DIGITS: u32 = 1 << 22;
/// Largest block length the page may request.
pub const MAX_K: u32 = 12;
/// Points per curve.
const CURVE_POINTS: u64 = 256;

pub fn parse_source(s: &str) -> Result<SourceSpec, String> {
    let s = s.trim();
    let spec = match s.split_once(':') {
        Some(("sqrt", m)) => SourceSpec::Sqrt {
            m: m.trim()
                .parse()
                .map_err(|_| format!("bad radicand `{m}`"))?,
        },
        Some(("rational", pq)) => {
            let (p, q) = pq
                .split_once('/')
                .ok_or_else(|| format!("expected P/Q, got `{pq}`"))?;
            SourceSpec::Rational {
                p: p.trim()
                    .parse()
                    .map_err(|_| format!("bad numerator `{p}`"))?,
                q: q.trim()
                    .parse()
                    .map_err(|_| format!("bad denominator `{q}`"))?,
            }
        }
        None if s == "champernowne2" => SourceSpec::Champernowne2,
        None if s == "copeland_erdos2" => SourceSpec::CopelandErdos2,
        None if s == "ones" => SourceSpec::ConstantOnes,
        None if s == "alternating" => SourceSpec::Alternating,
        _ => return Err(format!("unknown source `{s}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn check_digits(n: u32) -> Result<usize, String> {
    if n == 0 || n > MAX_DIGITS {
        return Err(format!("digit count must be in 1..={MAX_DIGITS}"));
    }
    Ok(n as usize)
}

/// The first `n` digits as a 0/1 string.
pub fn digit_string(source: &str, n: u32) -> Result<String, String> {
    let spec = parse_source(source)?;
    let bits = spec.generate(check_digits(n)?).map_err(|e| e.to_string())?;
    Ok(bits.to_string01())
}

/// Ones-ratio and angle curves at evenly spaced prefixes, plus both
/// non-standard norm ratio series for `n = 4, 8, …, min(256, digits)`.
pub fn series_json(source: &str, n: u32) -> Result<String, String> {
    let spec = parse_source(source)?;
    let n = check_digits(n)? as u64;
    let points = CURVE_POINTS.min(n);
    let mut cps: Vec<u64> = (1..=points).map(|i| n * i / points).collect();
    cps.dedup();
    let mut src = spec.open().map_err(|e| e.to_string())?;
    let series = digit_series(
        src.as_mut(),
        &cps,
        &[Statistic::OnesRatio, Statistic::Angle],
    )
    .map_err(|e| e.to_string())?;
    let ns: Vec<u64> = (4..=n.min(256)).step_by(4).collect();
    let ns_report = if ns.is_empty() {
        None
    } else {
        let mut src = spec.open().map_err(|e| e.to_string())?;
        Some(ns_ratio_series(src.as_mut(), &ns).map_err(|e| e.to_string())?)
    };
    let pairs = |s: &normlab::analytics::SeriesReport| -> Vec<[f64; 2]> {
        s.checkpoints
            .iter()
            .map(|c| [c.n as f64, c.value])
            .collect()
    };
    let out = json!({
        "source": spec.label(),
        "digits": n,
        "ones_ratio": pairs(&series[0]),
        "angle": pairs(&series[1]),
        "ns_exact": ns_report.as_ref().map(|r| pairs(&r.exact)),
        "ns_proportion": ns_report.as_ref().map(|r| pairs(&r.proportion)),
        "ns_claimed_limit": ns_report.as_ref().map(|r| r.claimed_limit),
        "ns_exact_limit": ns_report.as_ref().map(|r| r.exact_limit_estimate),
    });
    Ok(out.to_string())
}

/// Relative frequency of every length-`k` pattern over the first `n` digits.
pub fn blocks_json(source: &str, n: u32, k: u32, disjoint: bool) -> Result<String, String> {
    let spec = parse_source(source)?;
    if k == 0 || k > MAX_K {
        return Err(format!("block length must be in 1..={MAX_K}"));
    }
    let bits = spec.generate(check_digits(n)?).map_err(|e| e.to_string())?;
    let mode = if disjoint {
        WindowMode::Disjoint
    } else {
        WindowMode::Overlapping
    };
    let h = block_histogram(&bits, k, mode).map_err(|e| e.to_string())?;
    let windows = h.windows().max(1) as f64;
    let dev = normality_deviation(&h);
    let freqs: Vec<f64> = h.counts().iter().map(|&c| c as f64 / windows).collect();
    let out = json!({
        "source": spec.label(),
        "k": k,
        "mode": mode.to_string(),
        "windows": h.windows(),
        "expected": 0.5f64.powi(k as i32),
        "frequencies": freqs,
        "max_abs_dev": dev.max_abs_dev,
        "chi_square": dev.chi_square,
    });
    Ok(out.to_string())
}

#[wasm_bindgen]
pub fn digits(source: &str, n: u32) -> Result<String, JsValue> {
    digit_string(source, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn series(source: &str, n: u32) -> Result<String, JsValue> {
    series_json(source, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn blocks(source: &str, n: u32, k: u32, disjoint: bool) -> Result<String, JsValue> {
    blocks_json(source, n, k, disjoint).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn sources_parse() {
        assert_eq!(parse_source("sqrt:2"), Ok(SourceSpec::Sqrt { m: 2 }));
        assert_eq!(
            parse_source(" rational:1/3 "),
            Ok(SourceSpec::Rational { p: 1, q: 3 })
        );
        assert_eq!(parse_source("ones"), Ok(SourceSpec::ConstantOnes));
        assert!(parse_source("sqrt:4").is_err());
        assert!(parse_source("rational:13").is_err());
        assert!(parse_source("pi").is_err());
    }

    #[test]
    fn digit_string_matches_expansion() {
        assert_eq!(digit_string("sqrt:2", 21).unwrap(), "101101010000010011110");
        assert_eq!(digit_string("champernowne2", 12).unwrap(), "110111001011");
        assert!(digit_string("sqrt:2", 0).is_err());
        assert!(digit_string("sqrt:2", MAX_DIGITS + 1).is_err());
    }

    #[test]
    fn series_curves() {
        let v: Value = serde_json::from_str(&series_json("sqrt:2", 100_000).unwrap()).unwrap();
        let ones = v["ones_ratio"].as_array().unwrap();
        assert_eq!(ones.len(), 256);
        assert_eq!(ones.last().unwrap()[0], 100_000.0);
        assert_eq!(v["ns_exact"].as_array().unwrap().len(), 64);
        assert_eq!(v["ns_claimed_limit"], 1.0);
        assert!((v["ns_exact_limit"].as_f64().unwrap() - 2f64.powf(0.25)).abs() < 1e-9);

        let short: Value = serde_json::from_str(&series_json("alternating", 3).unwrap()).unwrap();
        assert_eq!(short["ones_ratio"].as_array().unwrap().len(), 3);
        assert!(short["ns_exact"].is_null());
    }

    #[test]
    fn block_frequencies() {
        let v: Value =
            serde_json::from_str(&blocks_json("rational:1/3", 1001, 2, false).unwrap()).unwrap();
        let f: Vec<f64> = v["frequencies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(f, vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(v["windows"], 1000);
        assert_eq!(v["expected"], 0.25);
        let d: Value = serde_json::from_str(&blocks_json("ones", 64, 3, true).unwrap()).unwrap();
        assert_eq!(d["windows"], 21);
        assert!(blocks_json("ones", 64, 13, false).is_err());
    }
}
