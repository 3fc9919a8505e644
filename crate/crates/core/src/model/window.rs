use std::collections::HashSet;
use std::sync::Arc;

use num_rational::BigRational;

use super::{Coordinate, Model, ModelKind};
use crate::error::{Error, Result};
use crate::group::Word;

/// A pair `(P, S)` of finite sets of basis indices with `S ⊆ P`.
#[derive(Debug, Clone)]
pub struct FolnerWindow {
    model: Arc<Model>,
    n: Option<usize>,
    p: Vec<Word>,
    s: Vec<Word>,
}

impl FolnerWindow {
    /// A window with explicitly chosen index sets.
    pub fn new(model: &Arc<Model>, p: Vec<Word>, s: Vec<Word>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::EmptyWindow);
        }
        for w in p.iter().chain(&s) {
            model.validate_index(w)?;
        }
        let set: HashSet<&Word> = p.iter().collect();
        if set.len() != p.len() {
            return Err(Error::Invalid("window P lists an index twice".into()));
        }
        if let Some(w) = s.iter().find(|w| !set.contains(w)) {
            return Err(Error::Invalid(format!("index {w:?} of S is not in P")));
        }
        if let ModelKind::Uhf { .. } = model.kind() {
            let level = p[0][0];
            if p.iter().any(|w| w[0] != level) {
                return Err(Error::Invalid("UHF window mixes levels".into()));
            }
        }
        Ok(FolnerWindow { model: model.clone(), n: None, p, s })
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    /// The parameter the window was generated from, if any.
    pub fn n(&self) -> Option<usize> {
        self.n
    }

    pub fn p(&self) -> &[Word] {
        &self.p
    }

    pub fn s(&self) -> &[Word] {
        &self.s
    }

    pub fn p_coordinates(&self) -> Vec<Coordinate> {
        self.model.coordinates(&self.p)
    }

    pub fn s_coordinates(&self) -> Vec<Coordinate> {
        self.model.coordinates(&self.s)
    }

    pub fn dim_p(&self) -> BigRational {
        self.model.coordinate_dimension(&self.p_coordinates())
    }

    pub fn dim_s(&self) -> BigRational {
        self.model.coordinate_dimension(&self.s_coordinates())
    }

    /// `dim_N S / dim_N P`.
    pub fn ratio(&self) -> BigRational {
        self.dim_s() / self.dim_p()
    }

    /// UHF level of the window (0 for other models).
    pub fn level(&self) -> usize {
        match self.model.kind() {
            ModelKind::Uhf { .. } => self.p[0][0] as usize,
            _ => 0,
        }
    }
}

/// The `n`-th standard window adapted to the support `support`.
///
/// The support is symmetrized first, so the same window serves an operator
/// set and its adjoints. `S` is the set of `γ ∈ P` with `sγ ∈ P` for every
/// `s` in the symmetrized support.
pub fn folner_window(model: &Arc<Model>, support: &[Word], n: usize) -> Result<FolnerWindow> {
    for w in support {
        model.validate_index(w)?;
    }
    let (p, s) = match model.kind() {
        ModelKind::Group(g) | ModelKind::Crossed { group: g, .. } => {
            let p = g.window(n);
            let s = g.interior(&p, &g.symmetrize(support));
            (p, s)
        }
        ModelKind::Twisted { .. } => {
            let m0 = support.iter().map(|w| w[0].abs() + w[1].abs()).max().unwrap_or(0).max(1);
            if n == 0 {
                return Err(Error::WindowTooSmall("rotation-algebra windows need n ≥ 1".into()));
            }
            let ball = |r: i64| -> Vec<Word> {
                let mut out = Vec::new();
                for p in -r..=r {
                    let rest = r - p.abs();
                    for q in -rest..=rest {
                        out.push(vec![p, q]);
                    }
                }
                out
            };
            (ball(n as i64 * m0), ball((n as i64 - 1) * m0))
        }
        ModelKind::Uhf { sizes } => {
            let base = support.iter().map(|w| w[0] as usize).max().unwrap_or(0);
            let level = base + n;
            if level > sizes.len() {
                return Err(Error::InvalidModel(format!(
                    "window level {level} exceeds the {} levels of the tower",
                    sizes.len()
                )));
            }
            let k = model.uhf_size(level) as i64;
            let p: Vec<Word> = (0..k).flat_map(|a| (0..k).map(move |b| vec![level as i64, a, b])).collect();
            (p.clone(), p)
        }
    };
    if s.is_empty() {
        return Err(Error::WindowTooSmall(format!("n = {n} leaves no interior for support {support:?}")));
    }
    let mut w = FolnerWindow::new(model, p, s)?;
    w.n = Some(n);
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, Group};
    use crate::scalar::Turns;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn square_lattice_box() {
        let m = Model::group(Group::free_abelian(2).unwrap());
        let supp = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]];
        let w = folner_window(&m, &supp, 2).unwrap();
        assert_eq!(w.p().len(), 25);
        assert_eq!(w.s().len(), 9);
        assert_eq!(w.ratio(), r(9, 25));
        assert!(matches!(folner_window(&m, &supp, 0), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn rotation_window_counts() {
        let m = Model::twisted(Turns::Float(0.3)).unwrap();
        let supp = vec![vec![1, 0], vec![0, 1]];
        let w = folner_window(&m, &supp, 3).unwrap();
        assert_eq!(w.p().len(), 25);
        assert_eq!(w.s().len(), 13);
    }

    #[test]
    fn finite_and_uhf_windows_are_full() {
        let m = Model::group(Group::Finite(FiniteGroup::symmetric(3).unwrap()));
        let w = folner_window(&m, &[vec![1]], 1).unwrap();
        assert_eq!(w.p().len(), 6);
        assert_eq!(w.ratio(), r(1, 1));

        let u = Model::uhf(vec![2, 4, 8]).unwrap();
        let w = folner_window(&u, &[vec![1, 0, 1]], 1).unwrap();
        assert_eq!(w.level(), 2);
        assert_eq!(w.dim_p(), r(16, 1));
        assert_eq!(w.ratio(), r(1, 1));
        assert!(folner_window(&u, &[vec![1, 0, 1]], 3).is_err());
    }

    #[test]
    fn explicit_windows_are_checked() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        assert!(FolnerWindow::new(&m, vec![vec![0]], vec![vec![1]]).is_err());
        assert!(matches!(FolnerWindow::new(&m, vec![], vec![]), Err(Error::EmptyWindow)));
        assert!(FolnerWindow::new(&m, vec![vec![0], vec![1]], vec![vec![0], vec![1]]).is_ok());
    }
}
