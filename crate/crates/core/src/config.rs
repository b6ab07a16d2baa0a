//! Distribution specs from names, inline `kind:key=value,...` strings or
//! TOML files with a `[dist]` table.
//!
//! ```toml
//! [dist]
//! kind = "two_point"
//! b = 2.0
//! theta = 0.3
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistToml {
    TwoPoint {
        b: f64,
        theta: f64,
    },
    Rademacher,
    PolyEdge {
        #[serde(default = "one")]
        b: f64,
        r: f64,
    },
    Discrete {
        /// `[value, probability]` pairs.
        atoms: Vec<(f64, f64)>,
    },
    GaussianSanity,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileToml {
    dist: DistToml,
}

impl DistToml {
    fn build(self) -> Result<DistributionSpec<f64>> {
        match self {
            DistToml::TwoPoint { b, theta } => DistributionSpec::two_point(b, theta),
            DistToml::Rademacher => Ok(DistributionSpec::rademacher()),
            DistToml::PolyEdge { b, r } => DistributionSpec::poly_edge(b, r),
            DistToml::Discrete { atoms } => DistributionSpec::discrete(atoms),
            DistToml::GaussianSanity => Ok(DistributionSpec::gaussian_sanity()),
        }
    }
}

/// Names accepted by [`parse_dist`] without parameters.
pub const BUILTIN_NAMES: &[&str] = &[
    "rademacher",
    "gaussian_sanity",
    "gaussian",
    "poly_edge",
    "two_point",
];

/// Parse a TOML document with a `[dist]` table.
pub fn dist_from_toml(text: &str) -> Result<DistributionSpec<f64>> {
    let file: FileToml =
        toml::from_str(text).map_err(|e| Error::Config(format!("dist TOML: {}", e.message())))?;
    file.dist.build()
}

/// `rademacher`, `gaussian_sanity`, `two_point:b=2,theta=0.3`,
/// `poly_edge:r=2` (b defaults to 1), `poly_edge` (r=2), `two_point`
/// (Rademacher), or a path to a `.toml` file.
pub fn parse_dist(arg: &str) -> Result<DistributionSpec<f64>> {
    let arg = arg.trim();
    if arg.ends_with(".toml") || Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg)
            .map_err(|e| Error::Config(format!("reading {arg}: {e}")))?;
        return dist_from_toml(&text);
    }
    let (name, params) = match arg.split_once(':') {
        Some((n, p)) => (n, p),
        None => (arg, ""),
    };
    let mut kv = Vec::new();
    for item in params.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("dist parameter `{item}` is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "dist parameter `{}`: `{}` is not a number",
                k.trim(),
                v.trim()
            ))
        })?;
        kv.push((k.trim().to_string(), v));
    }
    let take = |key: &str, default: Option<f64>| -> Result<f64> {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or(default)
            .ok_or_else(|| Error::Config(format!("dist `{name}` needs `{key}`")))
    };
    let allowed: &[&str] = match name {
        "rademacher" | "gaussian" | "gaussian_sanity" => &[],
        "two_point" => &["b", "theta"],
        "poly_edge" => &["b", "r"],
        _ => {
            return Err(Error::Config(format!(
                "unknown dist `{name}` (expected one of {}, or a .toml path)",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "dist `{name}` has no parameter `{k}`"
        )));
    }
    match name {
        "rademacher" => Ok(DistributionSpec::rademacher()),
        "gaussian" | "gaussian_sanity" => Ok(DistributionSpec::gaussian_sanity()),
        "two_point" => {
            DistributionSpec::two_point(take("b", Some(1.0))?, take("theta", Some(0.5))?)
        }
        _ => DistributionSpec::poly_edge(take("b", Some(1.0))?, take("r", Some(2.0))?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Kind;

    #[test]
    fn names_and_inline() {
        assert_eq!(parse_dist("rademacher").unwrap().kind(), Kind::TwoPoint);
        assert_eq!(parse_dist("gaussian").unwrap().kind(), Kind::GaussianSanity);
        let tp = parse_dist("two_point:b=2,theta=0.3").unwrap();
        assert_eq!((tp.b(), tp.theta()), (2.0, Some(0.3)));
        let pe = parse_dist("poly_edge:r=1").unwrap();
        assert_eq!(pe.power_edge().unwrap().1, 1.0);
    }

    #[test]
    fn toml_kinds() {
        let d = dist_from_toml(
            "[dist]\nkind = \"discrete\"\natoms = [[-1.0, 0.5], [0.0, 0.25], [2.0, 0.25]]\n",
        )
        .unwrap();
        assert_eq!(d.kind(), Kind::DiscreteFinite);
        let p = dist_from_toml("[dist]\nkind = \"poly_edge\"\nr = 2.0\n").unwrap();
        assert_eq!(p.b(), 1.0);
        assert!(dist_from_toml("[dist]\nkind = \"gaussian_sanity\"\n").is_ok());
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_dist("two_point:b=2,theta=1.5").unwrap_err();
        assert!(
            e.is_config_error() && e.to_string().contains("theta"),
            "{e}"
        );
        assert!(parse_dist("cauchy")
            .unwrap_err()
            .to_string()
            .contains("cauchy"));
        assert!(parse_dist("poly_edge:s=1")
            .unwrap_err()
            .to_string()
            .contains("`s`"));
        let e = dist_from_toml("[dist]\nkind = \"two_point\"\nb = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("theta"), "{e}");
        assert!(
            dist_from_toml("[dist]\nkind = \"two_point\"\nb = 1.0\ntheta = 0.5\nextra = 1\n")
                .is_err()
        );
    }
}
