//! Coefficient-family specifications and their key-value file format.
//!
//! A spec file is TOML with flat keys:
//!
//! ```toml
//! name = "delta"
//! family = "delta"          # zeta | dirichlet_char | delta | sato_tate | custom
//! degree = 2                # optional for built-in families
//! theta = 0.1666666666666667 # defaults to degree / 4
//! kappa = 1.0
//! epsilon = 0.001
//! ```
//!
//! Family keys: `modulus` and optionally `discriminant` for `dirichlet_char`,
//! `seed` for `sato_tate`, and for `custom` a `[polynomials]` table mapping
//! primes to coefficient lists (`2 = [1.0, -0.5]`) plus an optional
//! `default_polynomial`. `gamma_shifts = [[re, im], ...]` is metadata; a
//! `profile = "spinor_non_sk"` flag turns on the |A(p)| ≤ 36 check.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::family::{
    CustomFactors, DeltaProvider, LocalFactorProvider, RealCharacter, SatoTateProvider,
    ZetaProvider,
};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Zeta,
    DirichletChar,
    Delta,
    SatoTate,
    Custom,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::Zeta => "zeta",
            FamilyKind::DirichletChar => "dirichlet_char",
            FamilyKind::Delta => "delta",
            FamilyKind::SatoTate => "sato_tate",
            FamilyKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Optional extra validation applied while sieving.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationProfile {
    /// Spinor coefficients of a Siegel eigenform that is not a Saito–Kurokawa
    /// lift: every |A(p)| ≤ 36.
    SpinorNonSk,
}

#[derive(Clone, Debug)]
pub struct LFunctionSpec {
    name: String,
    degree: usize,
    theta: f64,
    kappa: f64,
    epsilon: f64,
    gamma_shifts: Vec<Complex64>,
    family: FamilyKind,
    profile: Option<ValidationProfile>,
    provider: Arc<dyn LocalFactorProvider>,
}

impl LFunctionSpec {
    /// θ defaults to the convexity exponent `degree / 4`, κ to 1 and ε to 10⁻³.
    pub fn new(
        name: impl Into<String>,
        degree: usize,
        family: FamilyKind,
        provider: Arc<dyn LocalFactorProvider>,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidSpec("degree must be at least 1".into()));
        }
        Ok(Self {
            name: name.into(),
            degree,
            theta: degree as f64 / 4.0,
            kappa: 1.0,
            epsilon: DEFAULT_EPSILON,
            gamma_shifts: Vec::new(),
            family,
            profile: None,
            provider,
        })
    }

    pub fn zeta() -> Self {
        Self::new("zeta", 1, FamilyKind::Zeta, Arc::new(ZetaProvider)).expect("valid")
    }

    /// The real primitive character of conductor `modulus` (χ₋₄ for 4).
    pub fn dirichlet_character(modulus: u64) -> Result<Self> {
        Self::from_character(RealCharacter::from_modulus(modulus)?)
    }

    pub fn from_character(chi: RealCharacter) -> Result<Self> {
        let name = format!("chi_{}", chi.discriminant());
        Self::new(name, 1, FamilyKind::DirichletChar, Arc::new(chi))
    }

    pub fn delta() -> Self {
        Self::new(
            "delta",
            2,
            FamilyKind::Delta,
            Arc::new(DeltaProvider::new()),
        )
        .expect("valid")
    }

    pub fn sato_tate(seed: u64) -> Self {
        Self::new(
            format!("sato_tate_{seed}"),
            2,
            FamilyKind::SatoTate,
            Arc::new(SatoTateProvider::new(seed)),
        )
        .expect("valid")
    }

    pub fn custom(name: impl Into<String>, degree: usize, factors: CustomFactors) -> Result<Self> {
        for (p, poly) in &factors.polynomials {
            if poly.len() > degree + 1 {
                return Err(Error::DegreeTooLarge {
                    p: *p,
                    deg: poly.len() - 1,
                    degree,
                });
            }
        }
        Self::new(name, degree, FamilyKind::Custom, Arc::new(factors))
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "theta must be >= 0, got {theta}"
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "kappa must lie in (0, 1], got {kappa}"
            )));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_gamma_shifts(mut self, shifts: Vec<Complex64>) -> Result<Self> {
        if !shifts.is_empty() && shifts.len() != self.degree {
            return Err(Error::InvalidSpec(format!(
                "{} gamma shifts given for degree {}",
                shifts.len(),
                self.degree
            )));
        }
        self.gamma_shifts = shifts;
        Ok(self)
    }

    pub fn with_profile(mut self, profile: ValidationProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn gamma_shifts(&self) -> &[Complex64] {
        &self.gamma_shifts
    }
    pub fn family(&self) -> FamilyKind {
        self.family
    }
    pub fn profile(&self) -> Option<ValidationProfile> {
        self.profile
    }
    pub fn provider(&self) -> &dyn LocalFactorProvider {
        self.provider.as_ref()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_spec(&text)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "degree",
    "theta",
    "kappa",
    "epsilon",
    "family",
    "modulus",
    "discriminant",
    "seed",
    "polynomials",
    "default_polynomial",
    "gamma_shifts",
    "profile",
];

/// Parses the key-value spec format described in the module docs.
pub fn parse_spec(text: &str) -> Result<LFunctionSpec> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidSpec(e.to_string()))?;
    if let Some(k) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::InvalidSpec(format!("unknown key `{k}`")));
    }
    let family = str_key(&table, "family")?
        .ok_or_else(|| Error::InvalidSpec("missing key `family`".into()))?;
    let degree = int_key(&table, "degree")?;

    let mut spec = match family.as_str() {
        "zeta" => LFunctionSpec::zeta(),
        "dirichlet_char" => {
            let chi = match (
                int_key(&table, "discriminant")?,
                int_key(&table, "modulus")?,
            ) {
                (Some(d), m) => {
                    let chi = RealCharacter::new(d)?;
                    if m.is_some_and(|m| m.unsigned_abs() != chi.modulus()) {
                        return Err(Error::InvalidSpec(
                            "modulus does not match discriminant".into(),
                        ));
                    }
                    chi
                }
                (None, Some(m)) if m > 0 => RealCharacter::from_modulus(m as u64)?,
                _ => {
                    return Err(Error::InvalidSpec(
                        "dirichlet_char needs a positive `modulus` or a `discriminant`".into(),
                    ))
                }
            };
            LFunctionSpec::from_character(chi)?
        }
        "delta" => LFunctionSpec::delta(),
        "sato_tate" => {
            let seed = int_key(&table, "seed")?
                .ok_or_else(|| Error::InvalidSpec("sato_tate needs `seed`".into()))?;
            LFunctionSpec::sato_tate(seed as u64)
        }
        "custom" => {
            let degree = degree
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::InvalidSpec("custom family needs `degree`".into()))?;
            let mut polynomials = BTreeMap::new();
            if let Some(v) = table.get("polynomials") {
                let polys = v.as_table().ok_or_else(|| {
                    Error::InvalidSpec(
                        "`polynomials` must be a table of prime = [c0, c1, ...]".into(),
                    )
                })?;
                for (k, v) in polys {
                    let p: u64 = k.parse().map_err(|_| {
                        Error::InvalidSpec(format!("polynomial key `{k}` is not a prime"))
                    })?;
                    polynomials.insert(p, float_list(v, k)?);
                }
            }
            let default = table
                .get("default_polynomial")
                .map(|v| float_list(v, "default_polynomial"))
                .transpose()?;
            if let Some(d) = &default {
                if d.len() > degree as usize + 1 {
                    return Err(Error::InvalidSpec(
                        "default_polynomial exceeds the degree".into(),
                    ));
                }
            }
            LFunctionSpec::custom(
                "custom",
                degree as usize,
                CustomFactors {
                    polynomials,
                    default,
                },
            )?
        }
        other => return Err(Error::InvalidSpec(format!("unknown family `{other}`"))),
    };

    if let Some(d) = degree {
        if d as usize != spec.degree {
            return Err(Error::InvalidSpec(format!(
                "family {} has degree {}, spec says {d}",
                spec.family, spec.degree
            )));
        }
    }
    if let Some(name) = str_key(&table, "name")? {
        spec.name = name;
    }
    if let Some(t) = float_key(&table, "theta")? {
        spec = spec.with_theta(t)?;
    }
    if let Some(k) = float_key(&table, "kappa")? {
        spec = spec.with_kappa(k)?;
    }
    if let Some(e) = float_key(&table, "epsilon")? {
        spec = spec.with_epsilon(e)?;
    }
    if let Some(v) = table.get("gamma_shifts") {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::InvalidSpec("`gamma_shifts` must be an array".into()))?;
        let shifts = arr
            .iter()
            .map(|pair| {
                let xs = float_list(pair, "gamma_shifts")?;
                match xs.as_slice() {
                    [re, im] => Ok(Complex64::new(*re, *im)),
                    [re] => Ok(Complex64::new(*re, 0.0)),
                    _ => Err(Error::InvalidSpec("gamma shift must be [re, im]".into())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        spec = spec.with_gamma_shifts(shifts)?;
    }
    match str_key(&table, "profile")?.as_deref() {
        None => {}
        Some("spinor_non_sk") => spec = spec.with_profile(ValidationProfile::SpinorNonSk),
        Some(other) => return Err(Error::InvalidSpec(format!("unknown profile `{other}`"))),
    }
    Ok(spec)
}

fn str_key(table: &toml::Table, key: &str) -> Result<Option<String>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(Error::InvalidSpec(format!("`{key}` must be a string"))),
    }
}

fn int_key(table: &toml::Table, key: &str) -> Result<Option<i64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) => Ok(Some(*i)),
        Some(_) => Err(Error::InvalidSpec(format!("`{key}` must be an integer"))),
    }
}

fn float_key(table: &toml::Table, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(f)) => Ok(Some(*f)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(Error::InvalidSpec(format!("`{key}` must be a number"))),
    }
}

fn float_list(v: &toml::Value, what: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidSpec(format!("`{what}` must be an array of numbers")))?;
    arr.iter()
        .map(|x| match x {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(Error::InvalidSpec(format!(
                "`{what}` must contain real numbers only"
            ))),
        })
        .collect()
}
