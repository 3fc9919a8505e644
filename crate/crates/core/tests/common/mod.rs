#![allow(dead_code)]

use std::sync::Arc;

use folner::{AlgebraElement, BigRational, CoefficientElement, EquivariantOperator, ExactScalar as Q, FloatScalar as C, Model, Scalar, Word};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Small nonzero Gaussian rational.
pub fn gauss(rng: &mut impl Rng) -> Q {
    loop {
        let re = Q::from_ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3));
        let im = if rng.gen_bool(0.5) { Q::from_ratio(rng.gen_range(-2..=2), rng.gen_range(1..=2)) } else { Q::from_real(0) };
        let z = re + Q::i() * im;
        if !z.is_zero() {
            return z;
        }
    }
}

/// Random element with `terms` terms drawn from `pool`; crossed-product
/// coefficients get one value per atom.
pub fn random_element(rng: &mut impl Rng, model: &Arc<Model>, pool: &[Word], terms: usize) -> AlgebraElement<Q> {
    let atoms = model.block_weights().len();
    let mut out = Vec::new();
    for _ in 0..terms {
        let w = pool.choose(rng).expect("non-empty pool").clone();
        let coeff = (0..atoms).map(|_| if rng.gen_bool(0.8) { gauss(rng) } else { Q::from_real(0) }).collect();
        out.push((w, CoefficientElement::from_entries(coeff)));
    }
    AlgebraElement::from_terms(model, out).unwrap()
}

pub fn random_operator(rng: &mut impl Rng, model: &Arc<Model>, k: usize, pool: &[Word], fill: f64) -> EquivariantOperator<Q> {
    let entries = (0..k * k)
        .map(|_| {
            if rng.gen_bool(fill) {
                let terms = rng.gen_range(1..=3);
                random_element(rng, model, pool, terms)
            } else {
                AlgebraElement::zero(model)
            }
        })
        .collect();
    EquivariantOperator::new(model, k, entries).unwrap()
}

/// Lattice points of `ℤ^d` with sup-norm at most `radius`.
pub fn lattice_ball(d: usize, radius: i64) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|w: Word| {
                (-radius..=radius).map(move |x| {
                    let mut w = w.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn to_float(x: &AlgebraElement<Q>) -> AlgebraElement<C> {
    AlgebraElement::from_terms(
        x.model(),
        x.terms().iter().map(|(w, a)| (w.clone(), CoefficientElement::from_entries(a.entries().iter().map(|z| z.to_c64()).collect()))),
    )
    .unwrap()
}

pub fn operator_to_float(t: &EquivariantOperator<Q>) -> EquivariantOperator<C> {
    EquivariantOperator::new(t.model(), t.k(), t.entries().iter().map(to_float).collect()).unwrap()
}
