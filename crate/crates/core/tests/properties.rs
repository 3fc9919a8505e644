mod common;

use std::sync::Arc;

use common::{gauss, lattice_ball, r, random_element, random_operator, rng, to_float};
use folner::linalg::Tolerance;
use folner::{
    folner_window, kernel_range_dims, AlgebraElement, BigRational, CoefficientElement, ExactScalar as Q, FiniteGroup, FloatScalar as C,
    Group, Model, MultiMatrixAlgebra, Permutation, PermutationAction, Scalar, Turns, Word,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_algebra(rng: &mut ChaCha8Rng) -> MultiMatrixAlgebra {
    let blocks = rng.gen_range(1..=3);
    let sizes: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=3)).collect();
    let raw: Vec<i64> = (0..blocks).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().zip(&sizes).map(|(c, n)| c * *n as i64).sum();
    MultiMatrixAlgebra::new(sizes, raw.iter().map(|c| r(*c, total)).collect()).unwrap()
}

fn random_coefficient(rng: &mut ChaCha8Rng, n: &MultiMatrixAlgebra) -> CoefficientElement<Q> {
    let blocks = n
        .block_sizes()
        .iter()
        .map(|s| (0..s * s).map(|_| if rng.gen_bool(0.7) { gauss(rng) } else { Q::zero() }).collect())
        .collect();
    n.from_blocks(blocks).unwrap()
}

fn parts(z: &Q) -> (BigRational, BigRational) {
    z.to_gaussian().unwrap()
}

fn abs_sq(z: &Q) -> BigRational {
    let (re, im) = parts(z);
    &re * &re + &im * &im
}

fn sample_models(rng: &mut ChaCha8Rng) -> (Arc<Model>, Vec<Word>) {
    match rng.gen_range(0..6) {
        0 => (Model::group(Group::free_abelian(2).unwrap()), lattice_ball(2, 1)),
        1 => (Model::group(Group::Heisenberg), Group::Heisenberg.window(1)),
        2 => (Model::group(Group::Lamplighter), Group::Lamplighter.window(1)),
        3 => {
            let g = Group::Finite(FiniteGroup::symmetric(3).unwrap());
            let pool = g.elements().unwrap();
            (Model::group(g), pool)
        }
        4 => {
            let g = Group::free_abelian(1).unwrap();
            let sigma = Permutation::new(vec![1, 0, 2]).unwrap();
            let action = PermutationAction::new(&g, vec![sigma]).unwrap();
            let pool = g.window(2);
            (Model::crossed(g, vec![r(1, 4), r(1, 4), r(1, 2)], action).unwrap(), pool)
        }
        _ => {
            let model = Model::uhf(vec![2, 4, 8]).unwrap();
            let level = rng.gen_range(0..=2i64);
            let k = model.uhf_size(level as usize) as i64;
            let pool = (0..k).flat_map(|a| (0..k).map(move |b| vec![level, a, b])).collect();
            (model, pool)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_trace_is_tracial(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = random_algebra(&mut rng);
        let a = random_coefficient(&mut rng, &n);
        let b = random_coefficient(&mut rng, &n);
        let ab = n.trace(&n.mul(&a, &b).unwrap()).unwrap();
        let ba = n.trace(&n.mul(&b, &a).unwrap()).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn coefficient_trace_is_faithful_and_cauchy_schwarz(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = random_algebra(&mut rng);
        let a = random_coefficient(&mut rng, &n);
        let b = random_coefficient(&mut rng, &n);
        let gram = |x: &CoefficientElement<Q>, y: &CoefficientElement<Q>| n.trace(&n.mul(&n.adjoint(x).unwrap(), y).unwrap()).unwrap();
        let (aa, aa_im) = parts(&gram(&a, &a));
        let (bb, _) = parts(&gram(&b, &b));
        prop_assert!(aa_im.is_zero());
        prop_assert!(aa >= BigRational::zero());
        prop_assert_eq!(aa.is_zero(), a.is_zero());
        prop_assert!(abs_sq(&gram(&a, &b)) <= &aa * &bb);
    }

    #[test]
    fn coefficient_adjoint_reverses_products(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = random_algebra(&mut rng);
        let a = random_coefficient(&mut rng, &n);
        let b = random_coefficient(&mut rng, &n);
        let lhs = n.adjoint(&n.mul(&a, &b).unwrap()).unwrap();
        let rhs = n.mul(&n.adjoint(&b).unwrap(), &n.adjoint(&a).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(n.trace(&n.one::<Q>()).unwrap(), Q::one());
    }

    #[test]
    fn group_axioms_hold(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let groups = [
            Group::free_abelian(3).unwrap(),
            Group::Heisenberg,
            Group::Lamplighter,
            Group::Finite(FiniteGroup::quaternion().unwrap()),
            Group::product(vec![Group::Heisenberg, Group::Finite(FiniteGroup::dihedral(5).unwrap())]).unwrap(),
        ];
        for g in &groups {
            let pool = g.window(2);
            let pick = |rng: &mut ChaCha8Rng| pool[rng.gen_range(0..pool.len())].clone();
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            prop_assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
            prop_assert_eq!(g.mul(&a, &g.inv(&a)), g.identity());
            prop_assert_eq!(g.mul(&g.identity(), &a), a.clone());
            prop_assert_eq!(g.inv(&g.mul(&a, &b)), g.mul(&g.inv(&b), &g.inv(&a)));
        }
    }

    #[test]
    fn algebra_products_are_associative_and_tracial(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (model, pool) = sample_models(&mut rng);
        let x = random_element(&mut rng, &model, &pool, 3);
        let y = random_element(&mut rng, &model, &pool, 3);
        let z = random_element(&mut rng, &model, &pool, 2);
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().trace(), y.mul(&x).unwrap().trace());
        prop_assert_eq!(x.mul(&y).unwrap().adjoint().unwrap(), y.adjoint().unwrap().mul(&x.adjoint().unwrap()).unwrap());
        prop_assert_eq!(x.adjoint().unwrap().adjoint().unwrap(), x.clone());
        let xx = x.adjoint().unwrap().mul(&x).unwrap().trace();
        let (re, im) = parts(&xx);
        prop_assert!(im.is_zero());
        prop_assert_eq!(re > BigRational::zero(), !x.is_zero());
    }

    #[test]
    fn rotation_cocycle_is_associative(seed in any::<u64>(), theta in 0.01f64..0.99) {
        let mut rng = rng(seed);
        let model = Model::twisted(Turns::Float(theta)).unwrap();
        let pool = lattice_ball(2, 3);
        let b = |rng: &mut ChaCha8Rng| AlgebraElement::<C>::basis(&model, pool[rng.gen_range(0..pool.len())].clone()).unwrap();
        let (s, t, u) = (b(&mut rng), b(&mut rng), b(&mut rng));
        let lhs = s.mul(&t).unwrap().mul(&u).unwrap();
        let rhs = s.mul(&t.mul(&u).unwrap()).unwrap();
        prop_assert!(lhs.close_to(&rhs, 1.0));
        let x = to_float(&random_element(&mut rng, &model, &pool, 3));
        let y = to_float(&random_element(&mut rng, &model, &pool, 3));
        let d = (x.mul(&y).unwrap().trace() - y.mul(&x).unwrap().trace()).norm();
        prop_assert!(d <= 1e-10, "τ(xy) − τ(yx) = {d:e}");
    }

    #[test]
    fn uhf_embeddings_preserve_trace(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let model = Model::uhf(vec![2, 4, 8]).unwrap();
        let level = rng.gen_range(1..=2i64);
        let k = model.uhf_size(level as usize) as i64;
        let pool: Vec<Word> = (0..k).flat_map(|a| (0..k).map(move |b| vec![level, a, b])).collect();
        let x = random_element(&mut rng, &model, &pool, 4);
        // The unit of the top level; multiplying embeds x there.
        let top = 3i64;
        let m = model.uhf_size(3) as i64;
        let one_top = AlgebraElement::from_scalar_terms(&model, (0..m).map(|a| (vec![top, a, a], Q::one()))).unwrap();
        let lifted = x.mul(&one_top).unwrap();
        prop_assert_eq!(lifted.trace(), x.trace());
        prop_assert_eq!(lifted, x);
    }

    #[test]
    fn crossed_action_is_a_homomorphism(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = Group::Finite(FiniteGroup::cyclic(4).unwrap());
        let sigma = Permutation::new(vec![1, 2, 3, 0, 4]).unwrap();
        let action = PermutationAction::new(&g, vec![sigma]).unwrap();
        let elements = g.elements().unwrap();
        let a = &elements[rng.gen_range(0..4)];
        let b = &elements[rng.gen_range(0..4)];
        prop_assert_eq!(action.act(&g, &g.mul(a, b)), action.act(&g, a).compose(&action.act(&g, b)));
    }

    #[test]
    fn rank_nullity_holds_on_every_window(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (model, pool) = sample_models(&mut rng);
        let k = rng.gen_range(1..=2);
        let t = random_operator(&mut rng, &model, k, &pool, 0.6);
        let n = rng.gen_range(1..=2);
        if let Ok(w) = folner_window(&model, &t.support(), n) {
            let kr = kernel_range_dims(&t, &w, &Tolerance::default()).unwrap();
            prop_assert_eq!(&kr.a + &kr.b, BigRational::from_integer(BigInt::from(k)) * &kr.ratio);
        }
    }
}
