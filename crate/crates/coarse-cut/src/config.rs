//! TOML configuration: experiment specs and graph-product spec files.

use std::path::{Path, PathBuf};

use coarse_cut_core::generators::BaseGroup;
use coarse_cut_core::group::FiniteGroup;
use coarse_cut_core::quasimedian::{GraphProductSpec, PartialWreathSpec};
use coarse_cut_core::Rational;
use serde::{Deserialize, Serialize};

use crate::cache::sha256_hex;
use crate::Error;

/// One experiment: a registered name, generator and invariant parameters,
/// and the seed for randomized challengers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub generator: toml::Table,
    #[serde(default)]
    pub invariant: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: Vec<ExperimentSpec>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl ExperimentSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            seed: 0,
            out: None,
            generator: toml::Table::new(),
            invariant: toml::Table::new(),
        }
    }

    /// Hash of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        sha256_hex(toml::to_string(self).expect("spec serializes").as_bytes())
    }

    fn section(&self, section: &str) -> &toml::Table {
        match section {
            "generator" => &self.generator,
            _ => &self.invariant,
        }
    }

    pub fn int(&self, section: &str, key: &str, default: i64) -> Result<i64, Error> {
        match self.section(section).get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) => Ok(*i),
            Some(v) => Err(Error::Config(format!("{section}.{key} must be an integer, got {v}"))),
        }
    }

    pub fn uint(&self, section: &str, key: &str, default: u32) -> Result<u32, Error> {
        let v = self.int(section, key, i64::from(default))?;
        u32::try_from(v).map_err(|_| Error::Config(format!("{section}.{key} must be a non-negative integer")))
    }

    /// An integer list, or an inclusive `[lo, hi]` range given as
    /// `key_min`/`key_max`.
    pub fn uints(&self, section: &str, key: &str, default: &[u32]) -> Result<Vec<u32>, Error> {
        let table = self.section(section);
        if let Some(v) = table.get(key) {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::Config(format!("{section}.{key} must be a list")))?;
            return arr
                .iter()
                .map(|x| {
                    x.as_integer()
                        .and_then(|i| u32::try_from(i).ok())
                        .ok_or_else(|| Error::Config(format!("{section}.{key} holds a non-integer")))
                })
                .collect();
        }
        let (lo, hi) = (format!("{key}_min"), format!("{key}_max"));
        if table.contains_key(&lo) || table.contains_key(&hi) {
            let lo = self.uint(section, &lo, *default.first().unwrap_or(&0))?;
            let hi = self.uint(section, &hi, *default.last().unwrap_or(&0))?;
            return Ok((lo..=hi).collect());
        }
        Ok(default.to_vec())
    }

    /// A rational written as `"p/q"` or an integer.
    pub fn rational(&self, section: &str, key: &str, default: Rational) -> Result<Rational, Error> {
        match self.section(section).get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) => Ok(Rational::from_integer(*i)),
            Some(toml::Value::String(s)) => parse_rational(s),
            Some(v) => Err(Error::Config(format!("{section}.{key} must be \"p/q\", got {v}"))),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let bad = || Error::Config(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i64, i64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// A finite group: `Z/order` (generated by `±1` unless `generators` is
/// given) or an explicit multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub order: Option<u32>,
    pub table: Option<Vec<Vec<u32>>>,
    pub generators: Option<Vec<u32>>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup, Error> {
        match (&self.table, self.order) {
            (Some(t), _) => {
                let gens = self
                    .generators
                    .clone()
                    .ok_or_else(|| Error::Config("a group table needs `generators`".into()))?;
                Ok(FiniteGroup::from_table(t.clone(), gens)?)
            }
            (None, Some(n)) => match &self.generators {
                Some(g) => Ok(FiniteGroup::cyclic(n, g)?),
                None if n >= 2 => Ok(FiniteGroup::cyclic_pm1(n)),
                None => Err(Error::Config("cyclic groups need order >= 2".into())),
            },
            (None, None) => Err(Error::Config("a group needs `order` or `table`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WreathSection {
    pub lamp: GroupSpec,
    /// `"Z"` or `"Z/n"`.
    pub base: String,
    pub base_generators: Option<Vec<i64>>,
    /// Offsets `s` with `b ~ bs` in `Γ`; defaults to the base generators.
    pub gamma: Option<Vec<i64>>,
}

/// Graph-product spec file: `Γ` (vertex count and edges), its vertex
/// groups, and optionally a partial wreath product for `iso-check`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmSpecFile {
    #[serde(default)]
    pub vertices: u32,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
    /// One group for every vertex.
    pub group: Option<GroupSpec>,
    /// Per-vertex groups; overrides `group`.
    pub groups: Option<Vec<GroupSpec>>,
    pub wreath: Option<WreathSection>,
}

impl QmSpecFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(toml::from_str(text)?)
    }

    pub fn product(&self) -> Result<GraphProductSpec, Error> {
        let edges: Vec<(u32, u32)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let groups = match (&self.groups, &self.group) {
            (Some(gs), _) => gs.iter().map(GroupSpec::build).collect::<Result<Vec<_>, _>>()?,
            (None, Some(g)) => vec![g.build()?; self.vertices as usize],
            (None, None) => return Err(Error::Config("spec needs `group` or `groups`".into())),
        };
        if self.groups.is_some() && self.vertices != 0 && self.vertices as usize != groups.len() {
            return Err(Error::Config("`vertices` disagrees with the number of groups".into()));
        }
        Ok(GraphProductSpec::new(groups, &edges)?)
    }

    pub fn partial_wreath(&self, radius: u32) -> Result<PartialWreathSpec, Error> {
        let ws = self
            .wreath
            .as_ref()
            .ok_or_else(|| Error::Config("spec has no [wreath] section".into()))?;
        let lamp = ws.lamp.build()?;
        let base = if ws.base.trim() == "Z" {
            BaseGroup::Integers {
                generators: ws.base_generators.clone().unwrap_or_else(|| vec![-1, 1]),
            }
        } else {
            let n: u32 = ws
                .base
                .trim()
                .strip_prefix("Z/")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Config(format!("base must be \"Z\" or \"Z/n\", got `{}`", ws.base)))?;
            let group = match &ws.base_generators {
                Some(g) => {
                    let g: Vec<u32> = g
                        .iter()
                        .map(|&x| u32::try_from(x).map_err(|_| Error::Config("negative generator in Z/n".into())))
                        .collect::<Result<_, _>>()?;
                    FiniteGroup::cyclic(n, &g)?
                }
                None => FiniteGroup::cyclic_pm1(n),
            };
            BaseGroup::Finite(group)
        };
        let mut spec = PartialWreathSpec::cayley(lamp, base, radius);
        if let Some(g) = &ws.gamma {
            spec.gamma = g.clone();
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_specs_parse() {
        let cfg = ConfigFile::parse(
            r#"
            [[experiment]]
            name = "exp:dl-vset"
            seed = 3
            [experiment.invariant]
            r = [1, 2, 3]
            delta = "15/16"

            [[experiment]]
            name = "exp:tree-annulus"
            [experiment.invariant]
            k_min = 1
            k_max = 4
            "#,
        )
        .unwrap();
        let [a, b] = &cfg.experiment[..] else { panic!() };
        assert_eq!(a.uints("invariant", "r", &[]).unwrap(), [1, 2, 3]);
        assert_eq!(a.rational("invariant", "delta", Rational::new(1, 2)).unwrap(), Rational::new(15, 16));
        assert_eq!(b.uints("invariant", "k", &[1]).unwrap(), [1, 2, 3, 4]);
        assert_eq!(b.seed, 0);
        assert_ne!(a.hash(), b.hash());
        assert!(ConfigFile::parse("[[experiment]]\nname = 1\n").is_err());
    }

    #[test]
    fn qm_specs_parse() {
        let f = QmSpecFile::parse(
            r#"
            vertices = 3
            edges = [[0, 1], [1, 2]]
            group = { order = 2 }
            [wreath]
            lamp = { order = 2 }
            base = "Z"
            "#,
        )
        .unwrap();
        let spec = f.product().unwrap();
        assert_eq!(spec.vertex_count(), 3);
        let pw = f.partial_wreath(2).unwrap();
        assert_eq!(pw.gamma, [-1, 1]);
        let table = QmSpecFile::parse(
            "vertices = 1\n[[groups]]\ntable = [[0, 1], [1, 0]]\ngenerators = [1]\n",
        )
        .unwrap();
        assert_eq!(table.product().unwrap().vertex_group(0).order(), 2);
        assert!(QmSpecFile::parse("vertices = 2\n").unwrap().product().is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::new(3, 4));
        assert_eq!(parse_rational("2").unwrap(), Rational::from_integer(2));
        assert!(parse_rational("1/0").is_err());
    }
}
