use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat};

/// Names of the built-in objectives, in report order.
pub const BUILTIN_OBJECTIVES: &[&str] = &["all2all", "th-10%", "th-50%", "acc-2%", "acc-5%"];

/// An indicator performance objective. A correctly recovered relation
/// between papers at true positions `x < y` counts when
/// `alpha <= x <= beta` and `x + gamma <= y <= delta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectiveSpec {
    name: String,
    alpha: BigRational,
    beta: BigRational,
    gamma: BigRational,
    delta: BigRational,
}

#[derive(Serialize, Deserialize)]
struct ObjectiveRepr {
    name: String,
    alpha: String,
    beta: String,
    gamma: String,
    delta: String,
}

impl Serialize for ObjectiveSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ObjectiveRepr {
            name: self.name.clone(),
            alpha: format_rational(&self.alpha),
            beta: format_rational(&self.beta),
            gamma: format_rational(&self.gamma),
            delta: format_rational(&self.delta),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObjectiveSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ObjectiveRepr::deserialize(deserializer)?;
        let p = |s: &str| parse_rational(s).map_err(D::Error::custom);
        ObjectiveSpec::custom(repr.name, p(&repr.alpha)?, p(&repr.beta)?, p(&repr.gamma)?, p(&repr.delta)?)
            .map_err(D::Error::custom)
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl ObjectiveSpec {
    pub fn custom(
        name: impl Into<String>,
        alpha: BigRational,
        beta: BigRational,
        gamma: BigRational,
        delta: BigRational,
    ) -> Result<Self> {
        let spec = ObjectiveSpec {
            name: name.into(),
            alpha,
            beta,
            gamma,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let ok = self.alpha >= zero
            && self.alpha <= self.beta
            && self.beta <= one
            && self.gamma >= zero
            && self.gamma <= one
            && self.delta >= zero
            && self.delta <= one;
        if !ok {
            return Err(Error::Range(format!(
                "objective `{}` needs 0 <= alpha <= beta <= 1, 0 <= gamma <= 1, 0 <= delta <= 1",
                self.name
            )));
        }
        if self.mass().is_zero() {
            return Err(Error::DegenerateObjective(format!(
                "objective `{}` selects no pair of positions",
                self.name
            )));
        }
        Ok(())
    }

    /// Every pair counts.
    pub fn all2all() -> Self {
        ObjectiveSpec {
            name: "all2all".into(),
            alpha: rat(0, 1),
            beta: rat(1, 1),
            gamma: rat(0, 1),
            delta: rat(1, 1),
        }
    }

    /// Pairs whose better paper is in the top `fraction` of the ground truth.
    pub fn top(fraction: BigRational) -> Result<Self> {
        let name = format!("th-{}%", format_rational(&(&fraction * rat(100, 1))));
        ObjectiveSpec::custom(name, rat(0, 1), fraction, rat(0, 1), rat(1, 1))
    }

    /// Pairs whose true positions differ by at least `gap`.
    pub fn accuracy(gap: BigRational) -> Result<Self> {
        let name = format!("acc-{}%", format_rational(&(&gap * rat(100, 1))));
        ObjectiveSpec::custom(name, rat(0, 1), rat(1, 1) - &gap, gap, rat(1, 1))
    }

    /// The five built-in objectives.
    pub fn builtins() -> Vec<ObjectiveSpec> {
        BUILTIN_OBJECTIVES
            .iter()
            .map(|n| ObjectiveSpec::parse(n).expect("builtin objective"))
            .collect()
    }

    /// Parses `all2all`, `th-<a>%` or `acc-<b>%` (the `-` and `%` are
    /// optional, so `th10` works too).
    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownObjective {
            name: name.to_string(),
            available: format!("{}, th-<a>%, acc-<b>%", BUILTIN_OBJECTIVES.join(", ")),
        };
        let lower = name.trim().to_ascii_lowercase();
        if lower == "all2all" {
            return Ok(ObjectiveSpec::all2all());
        }
        let percent = |rest: &str| -> Result<BigRational> {
            let rest = rest.strip_prefix('-').unwrap_or(rest);
            let rest = rest.strip_suffix('%').unwrap_or(rest);
            let value = parse_rational(rest).map_err(|_| unknown())?;
            Ok(value / rat(100, 1))
        };
        if let Some(rest) = lower.strip_prefix("th") {
            return ObjectiveSpec::top(percent(rest)?);
        }
        if let Some(rest) = lower.strip_prefix("acc") {
            return ObjectiveSpec::accuracy(percent(rest)?);
        }
        Err(unknown())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    /// Upper end of the outer integration range: beyond `delta - gamma` no
    /// partner position remains.
    pub fn effective_beta(&self) -> BigRational {
        let cap = &self.delta - &self.gamma;
        if self.beta < cap {
            self.beta.clone()
        } else {
            cap
        }
    }

    /// Area of the selected region of position pairs,
    /// `integral_alpha^beta max(0, delta - gamma - x) dx`.
    pub fn mass(&self) -> BigRational {
        let hi = self.effective_beta();
        if hi <= self.alpha {
            return BigRational::zero();
        }
        let width = &self.delta - &self.gamma;
        let area = &width * (&hi - &self.alpha) - (&hi * &hi - &self.alpha * &self.alpha) / rat(2, 1);
        if area.is_negative() {
            BigRational::zero()
        } else {
            area
        }
    }

    /// Mass as an error when it is zero.
    pub fn checked_mass(&self) -> Result<BigRational> {
        let m = self.mass();
        if m.is_zero() {
            Err(Error::DegenerateObjective(format!("objective `{}` has zero mass", self.name)))
        } else {
            Ok(m)
        }
    }

    /// A short, filesystem-safe key identifying this objective exactly.
    pub fn cache_key(&self) -> String {
        let safe: String = self
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let tuple = format!(
            "{}/{}/{}/{}",
            format_rational(&self.alpha),
            format_rational(&self.beta),
            format_rational(&self.gamma),
            format_rational(&self.delta)
        );
        let digest = <sha2::Sha256 as sha2::Digest>::digest(tuple.as_bytes());
        let short: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
        format!("{safe}-{short}")
    }
}

/// Parses a comma-separated objective list; `all` expands to the builtins.
pub fn parse_objectives(list: &str) -> Result<Vec<ObjectiveSpec>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ObjectiveSpec::builtins());
    }
    list.split(',').map(|s| ObjectiveSpec::parse(s.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tuples() {
        let o = ObjectiveSpec::parse("acc-2%").unwrap();
        assert_eq!(
            (o.alpha(), o.beta(), o.gamma(), o.delta()),
            (&rat(0, 1), &rat(49, 50), &rat(1, 50), &rat(1, 1))
        );
        let o = ObjectiveSpec::parse("th-10%").unwrap();
        assert_eq!(o.beta(), &rat(1, 10));
        assert_eq!(o.name(), "th-10%");
        assert_eq!(ObjectiveSpec::parse("th10").unwrap(), o);
        assert_eq!(ObjectiveSpec::parse("acc-5%").unwrap().gamma(), &rat(1, 20));
        assert!(ObjectiveSpec::parse("borda").is_err());
    }

    #[test]
    fn masses() {
        assert_eq!(ObjectiveSpec::all2all().mass(), rat(1, 2));
        assert_eq!(ObjectiveSpec::parse("th-10%").unwrap().mass(), rat(95, 1000));
        assert_eq!(ObjectiveSpec::parse("acc-2%").unwrap().mass(), rat(4802, 10000));
        assert_eq!(ObjectiveSpec::parse("th-50%").unwrap().mass(), rat(3, 8));
    }

    #[test]
    fn invalid_and_degenerate_specs() {
        assert!(ObjectiveSpec::custom("bad", rat(1, 2), rat(1, 4), rat(0, 1), rat(1, 1)).is_err());
        assert!(ObjectiveSpec::custom("neg", rat(0, 1), rat(1, 1), rat(-1, 10), rat(1, 1)).is_err());
        let err = ObjectiveSpec::custom("empty", rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)).unwrap_err();
        assert!(matches!(err, Error::DegenerateObjective(_)));
        assert!(ObjectiveSpec::accuracy(rat(1, 1)).is_err());
    }

    #[test]
    fn beta_is_capped_by_the_gap() {
        let o = ObjectiveSpec::custom("wide", rat(0, 1), rat(1, 1), rat(1, 10), rat(1, 1)).unwrap();
        assert_eq!(o.effective_beta(), rat(9, 10));
        assert_eq!(o.mass(), rat(81, 200));
    }

    #[test]
    fn serde_round_trip() {
        for o in ObjectiveSpec::builtins() {
            let json = serde_json::to_string(&o).unwrap();
            let back: ObjectiveSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, o);
        }
        assert_eq!(parse_objectives("all").unwrap().len(), 5);
        assert_eq!(parse_objectives("all2all, th-10%").unwrap().len(), 2);
    }
}
