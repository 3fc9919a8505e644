//! Online sparse echelon form.
//!
//! Vectors are inserted one at a time and reduced against the pivots
//! collected so far (leading-entry reduction only). A vector that reduces to
//! zero yields a linear relation among the inserted vectors when tracking is
//! enabled. Inserting the columns of a matrix in order therefore produces its
//! rank, a set of independent columns and a kernel basis in a single pass.

use std::collections::HashMap;
use std::marker::PhantomData;

use crate::linalg::SparseVec;
use crate::scalar::Scalar;

/// Field arithmetic used by [`Echelon`].
pub trait FieldOps {
    type Elem: Clone;

    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn one(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
}

/// Arithmetic of a [`Scalar`] type.
pub struct ScalarField<S>(PhantomData<S>);

impl<S> Default for ScalarField<S> {
    fn default() -> Self {
        ScalarField(PhantomData)
    }
}

impl<S: Scalar> FieldOps for ScalarField<S> {
    type Elem = S;

    fn is_zero(&self, a: &S) -> bool {
        a.is_zero()
    }
    fn one(&self) -> S {
        S::one()
    }
    fn mul(&self, a: &S, b: &S) -> S {
        a.clone() * b.clone()
    }
    fn sub(&self, a: &S, b: &S) -> S {
        a.clone() - b.clone()
    }
    fn inv(&self, a: &S) -> S {
        S::one() / a.clone()
    }
}

/// The prime field `F_p` for `p < 2^63`.
#[derive(Debug, Clone, Copy)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }
}

impl FieldOps for PrimeField {
    type Elem = u64;

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn one(&self) -> u64 {
        1
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        self.pow(*a, self.p - 2)
    }
}

/// Outcome of inserting one vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Insertion<E> {
    /// The vector was independent of everything inserted before.
    Pivot,
    /// The vector reduced to zero; when tracking, the payload lists the
    /// coefficients (by insertion tag) of the vanishing combination.
    Relation(Vec<(usize, E)>),
}

struct Pivot<E> {
    vec: Vec<(usize, E)>,
    combo: Vec<(usize, E)>,
    tag: usize,
}

pub struct Echelon<F: FieldOps> {
    field: F,
    pivots: HashMap<usize, Pivot<F::Elem>>,
    track: bool,
}

impl<F: FieldOps> Echelon<F> {
    pub fn new(field: F, track: bool) -> Self {
        Echelon { field, pivots: HashMap::new(), track }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Tags of the inserted vectors that became pivots, ascending.
    pub fn pivot_tags(&self) -> Vec<usize> {
        let mut tags: Vec<usize> = self.pivots.values().map(|p| p.tag).collect();
        tags.sort_unstable();
        tags
    }

    pub fn insert(&mut self, mut v: Vec<(usize, F::Elem)>, tag: usize) -> Insertion<F::Elem> {
        let mut combo = if self.track { vec![(tag, self.field.one())] } else { Vec::new() };
        while let Some((lead, coeff)) = v.first().cloned() {
            match self.pivots.get(&lead) {
                Some(p) => {
                    v = sub_scaled(&self.field, &v, &coeff, &p.vec);
                    if self.track {
                        combo = sub_scaled(&self.field, &combo, &coeff, &p.combo);
                    }
                }
                None => {
                    let inv = self.field.inv(&coeff);
                    let scale = |w: Vec<(usize, F::Elem)>| -> Vec<(usize, F::Elem)> {
                        w.into_iter().map(|(i, x)| (i, self.field.mul(&x, &inv))).collect()
                    };
                    let vec = scale(v);
                    let combo = if self.track { scale(combo) } else { Vec::new() };
                    self.pivots.insert(lead, Pivot { vec, combo, tag });
                    return Insertion::Pivot;
                }
            }
        }
        Insertion::Relation(combo)
    }
}

/// `dst − coeff · src` for sorted sparse vectors.
fn sub_scaled<F: FieldOps>(
    field: &F,
    dst: &[(usize, F::Elem)],
    coeff: &F::Elem,
    src: &[(usize, F::Elem)],
) -> Vec<(usize, F::Elem)> {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        if j >= src.len() || (i < dst.len() && dst[i].0 < src[j].0) {
            out.push(dst[i].clone());
            i += 1;
        } else if i >= dst.len() || src[j].0 < dst[i].0 {
            let zero = field.sub(coeff, coeff);
            let v = field.sub(&zero, &field.mul(coeff, &src[j].1));
            if !field.is_zero(&v) {
                out.push((src[j].0, v));
            }
            j += 1;
        } else {
            let v = field.sub(&dst[i].1, &field.mul(coeff, &src[j].1));
            if !field.is_zero(&v) {
                out.push((dst[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Kernel basis of the matrix with the given columns: one relation per
/// dependent column, expressed over column indices.
pub fn column_relations<S: Scalar>(columns: &[SparseVec<S>], _dim: usize) -> Vec<SparseVec<S>> {
    let mut ech = Echelon::new(ScalarField::<S>::default(), true);
    let mut relations = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if let Insertion::Relation(r) = ech.insert(col.clone(), j) {
            let mut r = r;
            r.sort_by_key(|(i, _)| *i);
            relations.push(r);
        }
    }
    relations
}

/// Indices of a maximal independent subset of `columns`, chosen greedily in
/// order.
pub fn independent_columns<S: Scalar>(columns: &[SparseVec<S>]) -> Vec<usize> {
    let mut ech = Echelon::new(ScalarField::<S>::default(), false);
    columns
        .iter()
        .enumerate()
        .filter(|(j, col)| ech.insert((*col).clone(), *j) == Insertion::Pivot)
        .map(|(j, _)| j)
        .collect()
}
