//! Evolution operators `d_t^m + sum_{k=1}^m a_k(D) d_t^{m-k}` with
//! polynomial coefficient symbols, presets and the JSON text format.

use crate::error::{GaborError, Result};
use crate::poly::Polynomial;
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Operator order plus the coefficient polynomials `a_k(xi)`, `k = 1..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec<T: Real> {
    order: usize,
    dim: usize,
    coeffs: Vec<Polynomial<T>>,
}

/// Built-in operator families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `d_t^2 - Laplace`
    Wave,
    /// `d_t^2 - Laplace + mass^2`
    KleinGordon(f64),
    /// `d_t - Laplace`
    Heat,
    /// `d_t + (-Laplace)^k`
    GeneralizedHeat(u32),
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(dim: usize, coeffs: Vec<Polynomial<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(GaborError::InvalidParameter("operator order must be positive".into()));
        }
        if coeffs.iter().any(|p| p.dim() != dim) {
            return Err(GaborError::InvalidParameter(
                "coefficient polynomial dimension differs from operator dimension".into(),
            ));
        }
        Ok(OperatorSpec {
            order: coeffs.len(),
            dim,
            coeffs,
        })
    }

    pub fn preset(preset: Preset, dim: usize) -> Result<Self> {
        let four_pi_sq = T::two_pi() * T::two_pi();
        match preset {
            Preset::Wave => {
                // a_1 = 0, a_2 = 4 pi^2 |xi|^2
                let a2 = Polynomial::norm_sq_power(dim, 1).scale(four_pi_sq);
                OperatorSpec::new(dim, vec![Polynomial::zero(dim), a2])
            }
            Preset::KleinGordon(mass) => {
                if mass <= 0.0 {
                    return Err(GaborError::InvalidParameter("Klein-Gordon mass must be positive".into()));
                }
                let m = T::of(mass);
                let mut a2 = Polynomial::norm_sq_power(dim, 1).scale(four_pi_sq);
                a2.add_term(&vec![0; dim], m * m);
                OperatorSpec::new(dim, vec![Polynomial::zero(dim), a2])
            }
            Preset::Heat => {
                let a1 = Polynomial::norm_sq_power(dim, 1).scale(four_pi_sq);
                OperatorSpec::new(dim, vec![a1])
            }
            Preset::GeneralizedHeat(k) => {
                if k == 0 {
                    return Err(GaborError::InvalidParameter("generalized heat needs k >= 1".into()));
                }
                let a1 = Polynomial::norm_sq_power(dim, k).scale(four_pi_sq.powi(k as i32));
                OperatorSpec::new(dim, vec![a1])
            }
        }
    }

    /// Parse a preset name: `wave`, `klein-gordon:<mass>`, `heat`, `genheat:<k>`.
    pub fn from_preset_name(name: &str, dim: usize) -> Result<Self> {
        let preset = parse_preset_name(name)?;
        OperatorSpec::preset(preset, dim)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient `a_k`, 1-based as in the operator definition.
    pub fn coeff(&self, k: usize) -> &Polynomial<T> {
        &self.coeffs[k - 1]
    }

    pub fn coeffs(&self) -> &[Polynomial<T>] {
        &self.coeffs
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.coeffs.iter().map(|p| p.total_degree()).max().unwrap_or(0)
    }
}

pub fn parse_preset_name(name: &str) -> Result<Preset> {
    let lower = name.trim().to_ascii_lowercase();
    if lower == "wave" {
        return Ok(Preset::Wave);
    }
    if lower == "heat" {
        return Ok(Preset::Heat);
    }
    if let Some(rest) = lower.strip_prefix("klein-gordon:") {
        let mass: f64 = rest
            .parse()
            .map_err(|_| GaborError::InvalidParameter(format!("bad Klein-Gordon mass: {rest}")))?;
        return Ok(Preset::KleinGordon(mass));
    }
    if let Some(rest) = lower.strip_prefix("genheat:") {
        let k: u32 = rest
            .parse()
            .map_err(|_| GaborError::InvalidParameter(format!("bad generalized-heat order: {rest}")))?;
        return Ok(Preset::GeneralizedHeat(k));
    }
    Err(GaborError::InvalidParameter(format!("unknown operator preset: {name}")))
}

// --- JSON text format -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    m: usize,
    a: Vec<CoeffJson>,
}

/// Serialize to the text format, e.g. the d=1 wave operator:
/// `{"m": 2, "a": [{"terms": []}, {"terms": [{"exp": [2], "c": 39.478...}]}]}`.
pub fn operator_to_json<T: Real>(spec: &OperatorSpec<T>) -> String {
    let a = spec
        .coeffs()
        .iter()
        .map(|p| CoeffJson {
            terms: p
                .terms()
                .map(|(m, &c)| TermJson {
                    exp: m.0.clone(),
                    c: c.to_f64().unwrap(),
                })
                .collect(),
        })
        .collect();
    serde_json::to_string(&OperatorJson { m: spec.order(), a }).expect("operator serializes")
}

pub fn operator_from_json<T: Real>(text: &str) -> Result<OperatorSpec<T>> {
    let parsed: OperatorJson =
        serde_json::from_str(text).map_err(|e| GaborError::Format(format!("operator JSON: {e}")))?;
    if parsed.a.len() != parsed.m {
        return Err(GaborError::Format(format!(
            "operator JSON lists {} coefficients for order {}",
            parsed.a.len(),
            parsed.m
        )));
    }
    // dimension comes from the first non-empty exponent list; constants adopt it
    let dim = parsed
        .a
        .iter()
        .flat_map(|c| c.terms.iter())
        .map(|t| t.exp.len())
        .max()
        .unwrap_or(1);
    let coeffs: Result<Vec<Polynomial<T>>> = parsed
        .a
        .iter()
        .map(|c| {
            let terms: Vec<(Vec<u32>, T)> = c
                .terms
                .iter()
                .map(|t| (t.exp.clone(), T::of(t.c)))
                .collect();
            Polynomial::from_terms(dim, &terms)
        })
        .collect();
    OperatorSpec::new(dim, coeffs?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn wave_preset_expands() {
        let op = OperatorSpec::<f64>::preset(Preset::Wave, 1).unwrap();
        assert_eq!(op.order(), 2);
        assert!(op.coeff(1).is_zero());
        assert_abs_diff_eq!(op.coeff(2).eval_real(&[1.0]), 4.0 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn genheat_matches_power() {
        let op = OperatorSpec::<f64>::preset(Preset::GeneralizedHeat(2), 2).unwrap();
        let v = op.coeff(1).eval_real(&[0.5, 0.5]);
        assert_abs_diff_eq!(v, (4.0 * PI * PI * 0.5).powi(2), epsilon = 1e-10);
    }

    #[test]
    fn preset_names_parse() {
        assert!(matches!(parse_preset_name("wave"), Ok(Preset::Wave)));
        assert!(matches!(parse_preset_name("heat"), Ok(Preset::Heat)));
        assert!(matches!(parse_preset_name("klein-gordon:1.5"), Ok(Preset::KleinGordon(m)) if m == 1.5));
        assert!(matches!(parse_preset_name("genheat:3"), Ok(Preset::GeneralizedHeat(3))));
        assert!(parse_preset_name("advection").is_err());
    }

    #[test]
    fn json_round_trip_wave() {
        let op = OperatorSpec::<f64>::preset(Preset::Wave, 1).unwrap();
        let text = operator_to_json(&op);
        assert!(text.contains("39.4784176043574"));
        let back: OperatorSpec<f64> = operator_from_json(&text).unwrap();
        assert_eq!(op, back);
    }

    #[test]
    fn documented_example_parses() {
        let text = r#"{"m": 2, "a": [{"terms": []}, {"terms": [{"exp": [2], "c": 39.478417604357434}]}]}"#;
        let op: OperatorSpec<f64> = operator_from_json(text).unwrap();
        let wave = OperatorSpec::<f64>::preset(Preset::Wave, 1).unwrap();
        assert_eq!(op, wave);
    }

    #[test]
    fn mismatched_order_rejected() {
        let text = r#"{"m": 3, "a": [{"terms": []}]}"#;
        assert!(operator_from_json::<f64>(text).is_err());
    }
}
