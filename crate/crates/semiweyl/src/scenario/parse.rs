//! Line-oriented scenario config parser.
//!
//! Format: `[section]` headers, `key = value` lines, `#` comments, blank
//! lines ignored. Values are whitespace-separated tokens. Unknown
//! sections, unknown keys, malformed numbers, and missing required keys
//! are hard errors carrying the line number.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{CoeffSpec, DeltaRule, GridSpec, Scenario};

#[derive(Debug, Error)]
pub enum ScenarioParseError {
    #[error("line {line}: expected 'key = value', got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: key `{key}` outside any section")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: bad number `{token}` for key `{key}`")]
    BadNumber {
        line: usize,
        key: String,
        token: String,
    },
    #[error("line {line}: {msg}")]
    BadValue { line: usize, msg: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("validation: {0}")]
    Validation(String),
}

struct RawItem {
    line: usize,
    section: String,
    key: String,
    tokens: Vec<String>,
}

fn parse_f64(item: &RawItem, idx: usize) -> Result<f64, ScenarioParseError> {
    let token = item
        .tokens
        .get(idx)
        .ok_or_else(|| ScenarioParseError::BadValue {
            line: item.line,
            msg: format!("key `{}` needs at least {} values", item.key, idx + 1),
        })?;
    token.parse::<f64>().map_err(|_| ScenarioParseError::BadNumber {
        line: item.line,
        key: item.key.clone(),
        token: token.clone(),
    })
}

fn parse_f64_list(item: &RawItem) -> Result<Vec<f64>, ScenarioParseError> {
    (0..item.tokens.len())
        .map(|i| parse_f64(item, i))
        .collect()
}

fn parse_u64(item: &RawItem, idx: usize) -> Result<u64, ScenarioParseError> {
    let v = parse_f64(item, idx)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(ScenarioParseError::BadValue {
            line: item.line,
            msg: format!("key `{}` needs a non-negative integer", item.key),
        });
    }
    Ok(v as u64)
}

fn parse_coeff(item: &RawItem) -> Result<CoeffSpec, ScenarioParseError> {
    let fam = item
        .tokens
        .first()
        .ok_or_else(|| ScenarioParseError::BadValue {
            line: item.line,
            msg: format!("key `{}` needs a coefficient family", item.key),
        })?
        .as_str();
    let need = |n: usize| -> Result<(), ScenarioParseError> {
        if item.tokens.len() != n + 1 {
            return Err(ScenarioParseError::BadValue {
                line: item.line,
                msg: format!("family `{fam}` takes {n} parameters"),
            });
        }
        Ok(())
    };
    match fam {
        "const" => {
            need(1)?;
            Ok(CoeffSpec::Const(parse_f64(item, 1)?))
        }
        "poly" => {
            if item.tokens.len() < 2 {
                return Err(ScenarioParseError::BadValue {
                    line: item.line,
                    msg: "family `poly` needs at least one coefficient".into(),
                });
            }
            Ok(CoeffSpec::Poly(
                (1..item.tokens.len())
                    .map(|i| parse_f64(item, i))
                    .collect::<Result<_, _>>()?,
            ))
        }
        "trig" => {
            if item.tokens.len() < 2 || (item.tokens.len() - 2) % 3 != 0 {
                return Err(ScenarioParseError::BadValue {
                    line: item.line,
                    msg: "family `trig` takes a0 then (freq cos sin) triples".into(),
                });
            }
            let a0 = parse_f64(item, 1)?;
            let mut modes = Vec::new();
            let mut i = 2;
            while i < item.tokens.len() {
                modes.push((
                    parse_f64(item, i)?,
                    parse_f64(item, i + 1)?,
                    parse_f64(item, i + 2)?,
                ));
                i += 3;
            }
            Ok(CoeffSpec::Trig { a0, modes })
        }
        "abs_power" => {
            need(3)?;
            Ok(CoeffSpec::AbsPower {
                mu: parse_f64(item, 1)?,
                scale: parse_f64(item, 2)?,
                shift: parse_f64(item, 3)?,
            })
        }
        "abspow_sin" => {
            need(5)?;
            Ok(CoeffSpec::AbsPowSin {
                k: parse_u64(item, 1)? as u32,
                mu: parse_f64(item, 2)?,
                scale: parse_f64(item, 3)?,
                shift: parse_f64(item, 4)?,
                freq: parse_f64(item, 5)?,
            })
        }
        "weierstrass" => {
            need(6)?;
            Ok(CoeffSpec::Weierstrass {
                b: parse_f64(item, 1)?,
                k: parse_u64(item, 2)? as u32,
                mu: parse_f64(item, 3)?,
                scale: parse_f64(item, 4)?,
                nterms: parse_u64(item, 5)? as u32,
                shift: parse_f64(item, 6)?,
            })
        }
        other => Err(ScenarioParseError::BadValue {
            line: item.line,
            msg: format!("unknown coefficient family `{other}`"),
        }),
    }
}

const SECTIONS: &[&str] = &[
    "scenario",
    "form",
    "grid",
    "sweep",
    "kernel",
    "smoothing",
    "suites",
    "tolerances",
];

const KNOWN_SUITES: &[&str] = &[
    "mollify-rates",
    "compose-residuals",
    "resolvent-residuals",
    "funcalc",
    "garding",
    "weyl-sweep",
    "riesz-sweep",
    "dos",
    "tauberian",
    "stationary-phase",
];

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioParseError> {
    let mut items: Vec<RawItem> = Vec::new();
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let no_comment = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = no_comment.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(stripped) = trimmed.strip_prefix('[') {
            let name = stripped
                .strip_suffix(']')
                .ok_or_else(|| ScenarioParseError::Malformed {
                    line,
                    text: trimmed.to_string(),
                })?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ScenarioParseError::UnknownSection { line, name });
            }
            section = name;
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ScenarioParseError::Malformed {
                line,
                text: trimmed.to_string(),
            })?;
        let key = key.trim().to_string();
        if section.is_empty() {
            return Err(ScenarioParseError::KeyOutsideSection { line, key });
        }
        items.push(RawItem {
            line,
            section: section.clone(),
            key,
            tokens: value.split_whitespace().map(str::to_string).collect(),
        });
    }

    // Defaults.
    let mut name: Option<String> = None;
    let mut seed = 0u64;
    let mut k = 1u32;
    let mut mu = 0.5f64;
    let mut a11: Option<CoeffSpec> = None;
    let mut a00: Option<CoeffSpec> = None;
    let mut g: Option<CoeffSpec> = None;
    let mut grid_kind: Option<String> = None;
    let mut x_lo = -2.5f64;
    let mut x_hi = 2.5f64;
    let mut oversample = 32.0f64;
    let mut l = 2.0 * std::f64::consts::PI;
    let mut classical_p = 2.0f64;
    let mut nyquist_factor = 4.0f64;
    let mut n_max = 32768usize;
    let mut hbars: Option<Vec<f64>> = None;
    let mut gammas = vec![0.5, 1.0];
    let mut delta = DeltaRule::Weyl;
    let mut kernel_moment_order = 12u32;
    let mut kernel_radius = 25.0f64;
    let mut smoothing_t0 = 1.0f64;
    let mut dos_hbar = 0.01f64;
    let mut window = (-0.75, -0.65, -0.35, -0.25);
    let mut bulk = (-0.65, -0.35);
    let mut region_x = (-2.5, 2.5);
    let mut region_p = (-2.5, 2.5);
    let mut suites: Vec<String> = Vec::new();
    let mut tolerances = BTreeMap::new();

    for item in &items {
        let unknown = || ScenarioParseError::UnknownKey {
            line: item.line,
            section: item.section.clone(),
            key: item.key.clone(),
        };
        match (item.section.as_str(), item.key.as_str()) {
            ("scenario", "name") => {
                let n = item.tokens.join("_");
                if n.is_empty()
                    || !n
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    return Err(ScenarioParseError::BadValue {
                        line: item.line,
                        msg: "scenario name must be [A-Za-z0-9_-]+".into(),
                    });
                }
                name = Some(n);
            }
            ("scenario", "seed") => seed = parse_u64(item, 0)?,
            ("form", "k") => k = parse_u64(item, 0)? as u32,
            ("form", "mu") => mu = parse_f64(item, 0)?,
            ("form", "a11") => a11 = Some(parse_coeff(item)?),
            ("form", "a00") => a00 = Some(parse_coeff(item)?),
            ("form", "g") => {
                if item.tokens.first().map(String::as_str) == Some("none") {
                    g = None;
                } else {
                    g = Some(parse_coeff(item)?);
                }
            }
            ("grid", "kind") => grid_kind = item.tokens.first().cloned(),
            ("grid", "x_lo") => x_lo = parse_f64(item, 0)?,
            ("grid", "x_hi") => x_hi = parse_f64(item, 0)?,
            ("grid", "oversample") => oversample = parse_f64(item, 0)?,
            ("grid", "l") => l = parse_f64(item, 0)?,
            ("grid", "classical_p") => classical_p = parse_f64(item, 0)?,
            ("grid", "nyquist_factor") => nyquist_factor = parse_f64(item, 0)?,
            ("grid", "n_max") => n_max = parse_u64(item, 0)? as usize,
            ("sweep", "hbar") => hbars = Some(parse_f64_list(item)?),
            ("sweep", "gamma") => gammas = parse_f64_list(item)?,
            ("sweep", "delta") => {
                delta = match item.tokens.first().map(String::as_str) {
                    Some("weyl") => DeltaRule::Weyl,
                    Some("riesz") => DeltaRule::Riesz,
                    Some(_) => DeltaRule::Fixed(parse_f64(item, 0)?),
                    None => {
                        return Err(ScenarioParseError::BadValue {
                            line: item.line,
                            msg: "delta needs `weyl`, `riesz`, or a number".into(),
                        })
                    }
                };
            }
            ("kernel", "moment_order") => kernel_moment_order = parse_u64(item, 0)? as u32,
            ("kernel", "radius") => kernel_radius = parse_f64(item, 0)?,
            ("smoothing", "t0") => smoothing_t0 = parse_f64(item, 0)?,
            ("smoothing", "dos_hbar") => dos_hbar = parse_f64(item, 0)?,
            ("smoothing", "window") => {
                window = (
                    parse_f64(item, 0)?,
                    parse_f64(item, 1)?,
                    parse_f64(item, 2)?,
                    parse_f64(item, 3)?,
                );
            }
            ("smoothing", "bulk") => {
                bulk = (parse_f64(item, 0)?, parse_f64(item, 1)?);
            }
            ("grid", "region_x") => {
                region_x = (parse_f64(item, 0)?, parse_f64(item, 1)?);
            }
            ("grid", "region_p") => {
                region_p = (parse_f64(item, 0)?, parse_f64(item, 1)?);
            }
            ("suites", "run") => {
                for s in &item.tokens {
                    if !KNOWN_SUITES.contains(&s.as_str()) {
                        return Err(ScenarioParseError::BadValue {
                            line: item.line,
                            msg: format!("unknown suite `{s}`"),
                        });
                    }
                    suites.push(s.clone());
                }
            }
            ("tolerances", key) => {
                tolerances.insert(key.to_string(), parse_f64(item, 0)?);
            }
            _ => return Err(unknown()),
        }
    }

    let name = name.ok_or(ScenarioParseError::MissingKey("scenario.name"))?;
    let a11 = a11.ok_or(ScenarioParseError::MissingKey("form.a11"))?;
    let a00 = a00.ok_or(ScenarioParseError::MissingKey("form.a00"))?;
    let hbars = hbars.ok_or(ScenarioParseError::MissingKey("sweep.hbar"))?;
    let grid = match grid_kind.as_deref() {
        Some("interval") => GridSpec::Interval {
            x_lo,
            x_hi,
            oversample,
        },
        Some("torus") => GridSpec::Torus {
            l,
            classical_p,
            nyquist_factor,
            n_max,
        },
        Some(other) => {
            return Err(ScenarioParseError::Validation(format!(
                "unknown grid kind `{other}`"
            )))
        }
        None => return Err(ScenarioParseError::MissingKey("grid.kind")),
    };

    let sc = Scenario {
        name,
        seed,
        k,
        mu,
        a11,
        a00,
        g,
        grid,
        hbars,
        gammas,
        delta,
        kernel_moment_order,
        kernel_radius,
        smoothing_t0,
        dos_hbar,
        window,
        bulk,
        region_x,
        region_p,
        suites,
        tolerances,
    };
    validate(&sc)?;
    Ok(sc)
}

fn validate(sc: &Scenario) -> Result<(), ScenarioParseError> {
    let bad = |msg: String| Err(ScenarioParseError::Validation(msg));
    if sc.hbars.is_empty() {
        return bad("sweep.hbar list is empty".into());
    }
    if sc.hbars.iter().any(|&h| !(h > 0.0 && h < 1.0) || !h.is_finite()) {
        return bad("hbar values must lie in (0, 1)".into());
    }
    if sc.gammas.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
        return bad("gamma values must lie in (0, 1]".into());
    }
    if !(0.0..=1.0).contains(&sc.mu) {
        return bad(format!("mu = {} outside [0, 1]", sc.mu));
    }
    for &g in &sc.gammas {
        let d = match sc.delta {
            DeltaRule::Weyl => sc.mu / (1.0 + sc.mu),
            DeltaRule::Riesz => 1.0 - (1.0 + g) / (2.0 + sc.mu),
            DeltaRule::Fixed(d) => d,
        };
        if !(0.0 < d && d < 1.0) {
            return bad(format!("delta = {d} outside (0, 1) at gamma = {g}"));
        }
    }
    match sc.grid {
        GridSpec::Interval { x_lo, x_hi, oversample } => {
            if !(x_lo < x_hi) || !(oversample >= 2.0) {
                return bad("interval grid needs x_lo < x_hi and oversample >= 2".into());
            }
        }
        GridSpec::Torus {
            l,
            classical_p,
            nyquist_factor,
            n_max,
        } => {
            if !(l > 0.0 && classical_p > 0.0 && nyquist_factor >= 2.0 && n_max >= 8) {
                return bad("torus grid needs l > 0, classical_p > 0, nyquist_factor >= 2".into());
            }
        }
    }
    if sc.kernel_radius < 5.0 {
        return bad("kernel radius must be at least 5".into());
    }
    if !(sc.smoothing_t0 > 0.0) {
        return bad("smoothing t0 must be positive".into());
    }
    let (a1, a2, b1, b2) = sc.window;
    if !(a1 < a2 && a2 <= b1 && b1 < b2) {
        return bad("window needs a1 < a2 <= b1 < b2".into());
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal() {
        let sc = tests_support::minimal_scenario();
        assert_eq!(sc.name, "harmonic");
        assert_eq!(sc.hbars.len(), 3);
        assert_eq!(sc.suites, vec!["weyl-sweep"]);
        assert_eq!(sc.a00, CoeffSpec::Poly(vec![-1.0, 0.0, 1.0]));
    }

    #[test]
    fn rejects_unknown_section_and_key() {
        let e = parse_scenario("[bogus]\nx = 1\n").unwrap_err();
        assert!(matches!(e, ScenarioParseError::UnknownSection { line: 1, .. }));
        let e = parse_scenario("[scenario]\nname = a\nwhat = 1\n").unwrap_err();
        assert!(matches!(e, ScenarioParseError::UnknownKey { line: 3, .. }));
    }

    #[test]
    fn rejects_malformed_and_bad_numbers() {
        let e = parse_scenario("[scenario]\njust words\n").unwrap_err();
        assert!(matches!(e, ScenarioParseError::Malformed { .. }));
        let e = parse_scenario("[scenario]\nname = a\nseed = twelve\n").unwrap_err();
        assert!(matches!(e, ScenarioParseError::BadNumber { .. }));
    }

    #[test]
    fn rejects_missing_required() {
        let e = parse_scenario("[scenario]\nname = a\n").unwrap_err();
        assert!(matches!(e, ScenarioParseError::MissingKey("form.a11")));
    }

    #[test]
    fn rejects_bad_hbar_and_gamma() {
        let text = tests_support::MINIMAL.replace("hbar = 0.04 0.02 0.01", "hbar = 0.04 -1.0");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioParseError::Validation(_))
        ));
        let text = format!("{}\n[sweep]\ngamma = 1.5\n", tests_support::MINIMAL);
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioParseError::Validation(_))
        ));
    }

    #[test]
    fn rejects_unknown_suite() {
        let text = tests_support::MINIMAL.replace("run = weyl-sweep", "run = frobnicate");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let text = "
# a comment
[scenario]
name = x1   # trailing comment
[form]
a11 = const 1
a00 = const 1
[grid]
kind = torus
[sweep]
hbar = 0.1
[suites]
run = garding
";
        let sc = parse_scenario(text).unwrap();
        assert_eq!(sc.name, "x1");
        assert!(matches!(sc.grid, GridSpec::Torus { .. }));
    }

    #[test]
    fn parser_never_panics_on_fuzzy_inputs() {
        // A few adversarial shapes the fuzz target starts from.
        for text in [
            "",
            "[",
            "[]",
            "[scenario",
            "=",
            "a=b",
            "[scenario]\nname=",
            "[scenario]\nname = ../../etc/passwd",
            "[sweep]\nhbar = 1e309",
            "[form]\na11 = poly",
            "[form]\na11 = trig 1 2",
            "[form]\na11 = weierstrass 2 1 0.5 1
",
        ] {
            let _ = parse_scenario(text);
        }
    }
}
