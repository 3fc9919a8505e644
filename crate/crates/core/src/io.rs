//! JSON documents for models and operators.
//!
//! A model document is tagged by `type`:
//!
//! ```json
//! {"type": "group", "group": {"free_abelian": 2}}
//! {"type": "group", "group": {"product": [{"cyclic": 2}, {"cyclic": 3}]}}
//! {"type": "twisted", "theta": "2/7"}
//! {"type": "crossed", "group": {"cyclic": 3}, "weights": ["1/3", "1/3", "1/3"],
//!  "generators": [[1, 2, 0]]}
//! {"type": "uhf", "sizes": [2, 4, 8]}
//! ```
//!
//! An operator document lists the entries of `T ∈ M_k(𝒜)` row by row, each
//! entry being a list of terms. A term has an `index` (a group word, a
//! lattice point, or `[level, a, b]` for UHF towers) and either a scalar
//! `coeff` or, for crossed products, one coefficient per atom in `atoms`.
//! Numbers are integers, decimals, `"p/q"` strings or `{"re": .., "im": ..}`.
//!
//! ```json
//! {"k": 1, "entries": [[[{"index": [0], "coeff": 1}, {"index": [1], "coeff": "-1"}]]]}
//! ```

use std::path::Path;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coefficient::CoefficientElement;
use crate::engine::EquivariantOperator;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Group, Permutation, PermutationAction};
use crate::model::{AlgebraElement, Model, ModelKind};
use crate::scalar::{parse_rational, Scalar, Turns};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
    Complex { re: Box<Number>, im: Box<Number> },
}

impl Number {
    fn real<S: Scalar>(&self) -> Result<S> {
        match self {
            Number::Int(x) => Ok(S::from_real(*x)),
            Number::Float(x) => S::from_f64_parts(*x, 0.0),
            Number::Text(s) => Ok(S::from_gaussian(&parse_rational(s)?, &BigRational::zero())),
            Number::Complex { .. } => Err(Error::Invalid("nested complex number".into())),
        }
    }

    pub fn to_scalar<S: Scalar>(&self) -> Result<S> {
        match self {
            Number::Complex { re, im } => Ok(re.real::<S>()? + S::i() * im.real::<S>()?),
            other => other.real(),
        }
    }

    /// Exact value of a real number.
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Number::Int(x) => Ok(BigRational::from_integer((*x).into())),
            Number::Float(x) => BigRational::from_float(*x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}"))),
            Number::Text(s) => parse_rational(s),
            Number::Complex { .. } => Err(Error::Invalid("expected a real number".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    FreeAbelian(usize),
    Heisenberg,
    Lamplighter,
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Quaternion,
    /// Cayley table, element 0 need not be the identity.
    Table(Vec<Vec<usize>>),
    Product(Vec<GroupSpec>),
}

impl GroupSpec {
    pub fn build(&self) -> Result<Group> {
        Ok(match self {
            GroupSpec::FreeAbelian(d) => Group::free_abelian(*d)?,
            GroupSpec::Heisenberg => Group::Heisenberg,
            GroupSpec::Lamplighter => Group::Lamplighter,
            GroupSpec::Cyclic(m) => Group::Finite(FiniteGroup::cyclic(*m)?),
            GroupSpec::Dihedral(n) => Group::Finite(FiniteGroup::dihedral(*n)?),
            GroupSpec::Symmetric(n) => Group::Finite(FiniteGroup::symmetric(*n)?),
            GroupSpec::Quaternion => Group::Finite(FiniteGroup::quaternion()?),
            GroupSpec::Table(t) => Group::Finite(FiniteGroup::from_table("table", t.clone(), None)?),
            GroupSpec::Product(fs) => Group::product(fs.iter().map(GroupSpec::build).collect::<Result<_>>()?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Group {
        group: GroupSpec,
    },
    Twisted {
        theta: Number,
    },
    Crossed {
        group: GroupSpec,
        weights: Vec<Number>,
        /// One permutation of the atoms per group generator.
        generators: Vec<Vec<usize>>,
    },
    Uhf {
        sizes: Vec<usize>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Arc<Model>> {
        match self {
            ModelSpec::Group { group } => Ok(Model::group(group.build()?)),
            ModelSpec::Twisted { theta } => Model::twisted(match theta {
                Number::Float(x) => Turns::Float(*x),
                other => Turns::Rational(other.to_rational()?),
            }),
            ModelSpec::Crossed { group, weights, generators } => {
                let g = group.build()?;
                let gens = generators.iter().map(|p| Permutation::new(p.clone())).collect::<Result<_>>()?;
                let action = PermutationAction::new(&g, gens)?;
                Model::crossed(g, weights.iter().map(Number::to_rational).collect::<Result<_>>()?, action)
            }
            ModelSpec::Uhf { sizes } => Model::uhf(sizes.clone()),
        }
    }

    /// Built-in names: `z`, `z2`, `z3`, …, `heisenberg`, `lamplighter`,
    /// `cyclic:m`, `dihedral:n`, `symmetric:n`, `quaternion`, `rotation:θ`,
    /// `uhf:2,4,8`.
    pub fn named(name: &str) -> Result<Self> {
        let bad = || Error::InvalidModel(format!("unknown model name `{name}`"));
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let int = |a: Option<&str>| a.and_then(|x| x.trim().parse::<usize>().ok()).ok_or_else(bad);
        let group = |g| Ok(ModelSpec::Group { group: g });
        match head {
            "z" => group(GroupSpec::FreeAbelian(1)),
            h if h.starts_with('z') && h[1..].parse::<usize>().is_ok() && arg.is_none() => {
                group(GroupSpec::FreeAbelian(h[1..].parse().expect("checked")))
            }
            "heisenberg" => group(GroupSpec::Heisenberg),
            "lamplighter" => group(GroupSpec::Lamplighter),
            "cyclic" => group(GroupSpec::Cyclic(int(arg)?)),
            "dihedral" => group(GroupSpec::Dihedral(int(arg)?)),
            "symmetric" => group(GroupSpec::Symmetric(int(arg)?)),
            "quaternion" => group(GroupSpec::Quaternion),
            "rotation" => {
                let a = arg.ok_or_else(bad)?.trim();
                let theta = if a.contains('/') { Number::Text(a.into()) } else { Number::Float(a.parse().map_err(|_| bad())?) };
                Ok(ModelSpec::Twisted { theta })
            }
            "uhf" => {
                let sizes = arg
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                Ok(ModelSpec::Uhf { sizes })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub index: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Number>>,
}

pub type ElementSpec = Vec<TermSpec>;

/// A built-in model name (see [`ModelSpec::named`]) or an inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(ModelSpec),
}

impl ModelRef {
    pub fn resolve(&self) -> Result<ModelSpec> {
        match self {
            ModelRef::Name(name) => ModelSpec::named(name),
            ModelRef::Inline(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// The model the entries are written for, if the document names one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelRef>,
    pub k: usize,
    /// `k` rows of `k` entries.
    pub entries: Vec<Vec<ElementSpec>>,
}

pub fn build_element<S: Scalar>(model: &Arc<Model>, spec: &[TermSpec]) -> Result<AlgebraElement<S>> {
    let atoms = match model.kind() {
        ModelKind::Crossed { action, .. } => Some(action.atoms()),
        _ => None,
    };
    let mut terms = Vec::with_capacity(spec.len());
    for t in spec {
        let coeff = match (&t.coeff, &t.atoms, atoms) {
            (Some(c), None, None) => CoefficientElement::from_entries(vec![c.to_scalar::<S>()?]),
            (None, Some(a), Some(n)) if a.len() == n => {
                CoefficientElement::from_entries(a.iter().map(Number::to_scalar).collect::<Result<_>>()?)
            }
            (Some(c), None, Some(n)) => {
                let z = c.to_scalar::<S>()?;
                CoefficientElement::from_entries(vec![z; n])
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "term at {:?} needs `coeff`{}",
                    t.index,
                    atoms.map_or(String::new(), |n| format!(" or {n} `atoms` values"))
                )))
            }
        };
        terms.push((t.index.clone(), coeff));
    }
    AlgebraElement::from_terms(model, terms)
}

impl OperatorSpec {
    pub fn build<S: Scalar>(&self, model: &Arc<Model>) -> Result<EquivariantOperator<S>> {
        if self.entries.len() != self.k || self.entries.iter().any(|r| r.len() != self.k) {
            return Err(Error::Shape(format!("operator document is not {}×{}", self.k, self.k)));
        }
        let entries = self.entries.iter().flatten().map(|e| build_element(model, e)).collect::<Result<_>>()?;
        EquivariantOperator::new(model, self.k, entries)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> Result<ModelSpec> {
    read_json(path)
}

pub fn read_operator(path: &Path) -> Result<OperatorSpec> {
    read_json(path)
}
