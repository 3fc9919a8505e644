mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::{lattice_ball, operator_to_float, r, random_element, random_operator, rng};
use folner::dimension::{closure_projection, tr_n, SubmoduleGens, WindowModule};
use folner::linalg::{SparseVec, Tolerance};
use folner::oracle::{torus_kernel_oracle, KernelOracleOptions, SymbolMatrix};
use folner::scalar::rational_to_f64;
use folner::{
    folner_window, kernel_range_dims, verify_folner_certificate, AlgebraElement, BigRational, EquivariantOperator, ExactScalar as Q,
    FiniteGroup, Group, Model, PermutationAction, Permutation, Scalar, Word,
};
use num_traits::{One, Zero};
use rand::Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn group_models() -> Vec<(Arc<Model>, Vec<Word>)> {
    let mut out = Vec::new();
    for g in [Group::free_abelian(1).unwrap(), Group::free_abelian(2).unwrap()] {
        let d = match g {
            Group::FreeAbelian { rank } => rank,
            _ => unreachable!(),
        };
        out.push((Model::group(g), lattice_ball(d, 1)));
    }
    for g in [Group::Finite(FiniteGroup::dihedral(4).unwrap()), Group::Finite(FiniteGroup::quaternion().unwrap())] {
        let elements = g.elements().unwrap();
        out.push((Model::group(g), elements));
    }
    out
}

fn schedule_for(model: &Model) -> Vec<usize> {
    match model.group_of() {
        Some(Group::FreeAbelian { rank: 1 }) => vec![3, 5, 8],
        Some(Group::FreeAbelian { .. }) => vec![3, 4],
        _ => vec![1],
    }
}

#[test]
fn kernel_of_t_star_t_matches_kernel_of_t() {
    let mut rng = rng(11);
    for (model, pool) in group_models() {
        for _ in 0..5 {
            let k = rng.gen_range(1..=2);
            let t = random_operator(&mut rng, &model, k, &pool, 0.6);
            let tt = t.adjoint().unwrap().mul(&t).unwrap();
            let mut support = t.support();
            support.extend(tt.support());
            for n in schedule_for(&model) {
                let w = folner_window(&model, &support, n).unwrap();
                let a = kernel_range_dims(&t, &w, &tol()).unwrap().a;
                let a2 = kernel_range_dims(&tt, &w, &tol()).unwrap().a;
                assert_eq!(a, a2, "{model} n = {n}");
            }
        }
    }
}

#[test]
fn kernel_dimension_is_bounded_by_the_windowed_kernel() {
    let z = Model::group(Group::free_abelian(1).unwrap());
    let q = Q::from_real;
    let one_minus_u = AlgebraElement::from_scalar_terms(&z, [(vec![0], q(1)), (vec![1], q(-1))]).unwrap();
    let cases = [
        (EquivariantOperator::zero(&z, 2).unwrap(), BigRational::from_integer(2.into())),
        (EquivariantOperator::diagonal(&z, vec![one_minus_u.clone(), AlgebraElement::zero(&z)]).unwrap(), BigRational::one()),
        (EquivariantOperator::from_element(one_minus_u), BigRational::zero()),
    ];
    for (t, full) in cases {
        for n in 1..=12 {
            let w = folner_window(&z, &[vec![1]], n).unwrap();
            let a = kernel_range_dims(&t, &w, &tol()).unwrap().a;
            assert!(a <= full, "n = {n}: {a} > {full}");
        }
    }
}

#[test]
fn exact_and_float_backends_agree_on_kernel_dimensions() {
    let mut rng = rng(12);
    for (model, pool) in group_models() {
        for _ in 0..4 {
            let k = rng.gen_range(1..=2);
            let t = random_operator(&mut rng, &model, k, &pool, 0.5);
            let tf = operator_to_float(&t);
            let n = schedule_for(&model)[0];
            let w = folner_window(&model, &t.support(), n).unwrap();
            let exact = kernel_range_dims(&t, &w, &tol()).unwrap();
            let float = kernel_range_dims(&tf, &w, &tol()).unwrap();
            assert_eq!(exact.a, float.a, "{model}");
            assert_eq!(exact.b, float.b, "{model}");
        }
    }
}

#[test]
fn engine_approaches_torus_oracle_on_rank_deficient_symbols() {
    // [[1 − u, 1 − u], [1 − u, 1 − u]] has rank one almost everywhere.
    let z = Model::group(Group::free_abelian(1).unwrap());
    let q = Q::from_real;
    let x = AlgebraElement::from_scalar_terms(&z, [(vec![0], q(1)), (vec![1], q(-1))]).unwrap();
    let t = EquivariantOperator::new(&z, 2, vec![x.clone(), x.clone(), x.clone(), x]).unwrap();
    let oracle = torus_kernel_oracle(&SymbolMatrix::from_operator(&t).unwrap(), &KernelOracleOptions::default());
    assert_eq!(oracle, 1.0);
    let mut last = f64::INFINITY;
    for n in [2, 4, 8, 16, 32] {
        let w = folner_window(&z, &t.support(), n).unwrap();
        let a = kernel_range_dims(&t, &w, &tol()).unwrap().a;
        let gap = (rational_to_f64(&a) - oracle).abs();
        assert!(gap < last, "n = {n}: gap {gap} did not shrink from {last}");
        last = gap;
    }
    assert!(last < 0.05);
}

#[test]
fn passing_certificates_bound_the_joint_inner_module() {
    let model = Model::group(Group::free_abelian(2).unwrap());
    let shifts: Vec<Word> = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![-1, 0]];
    let ops: Vec<AlgebraElement<Q>> = shifts.iter().map(|g| AlgebraElement::basis(&model, g.clone()).unwrap()).collect();
    let support: Vec<Word> = shifts.clone();
    let eps = 0.2;
    let g = model.group_of().unwrap().clone();
    for n in 4..=10 {
        let w = folner_window(&model, &support, n).unwrap();
        let report = verify_folner_certificate(&model, &ops, &w, eps, None).unwrap();
        if !report.pass {
            continue;
        }
        // T_i^{-1}(P) ∩ P for a translation is spanned by the γ with gγ ∈ P.
        let module = Arc::new(WindowModule::outer(&w, 1).unwrap());
        let p: HashSet<&Word> = w.p().iter().collect();
        let inner = |s: &Word| -> SubmoduleGens<Q> {
            let vectors: Vec<SparseVec<Q>> = w
                .p()
                .iter()
                .filter(|gamma| p.contains(&g.mul(s, gamma)))
                .map(|gamma| vec![(module.position(0, gamma, 0).unwrap(), Q::one())])
                .collect();
            SubmoduleGens::new(&module, vectors).unwrap()
        };
        let mut joint = inner(&shifts[0]);
        for s in &shifts[1..] {
            joint = joint.intersect(&inner(s), &tol()).unwrap();
        }
        let ratio = joint.dim_n_by_rank(&tol()).unwrap() / module.dim_n();
        let bound = BigRational::one() - BigRational::from_float(shifts.len() as f64 * eps).unwrap();
        assert!(ratio > bound, "n = {n}: {ratio} ≤ {bound}");
    }
}

#[test]
fn product_windows_multiply_ratios() {
    let z = Group::free_abelian(1).unwrap();
    let c3 = Group::Finite(FiniteGroup::cyclic(3).unwrap());
    let zz = Group::product(vec![z.clone(), z.clone()]).unwrap();
    let zc = Group::product(vec![z.clone(), c3]).unwrap();
    let line = Model::group(z);
    for n in 1..=6 {
        let w1 = folner_window(&line, &[vec![1]], n).unwrap();
        let w = folner_window(&Model::group(zz.clone()), &[vec![1, 0], vec![0, 1]], n).unwrap();
        assert_eq!(w.p().len(), w1.p().len() * w1.p().len());
        assert_eq!(w.ratio(), w1.ratio() * w1.ratio());
        let w = folner_window(&Model::group(zc.clone()), &[vec![1, 0], vec![0, 1]], n).unwrap();
        assert_eq!(w.p().len(), 3 * w1.p().len());
        assert_eq!(w.ratio(), w1.ratio());
    }
}

#[test]
fn windows_ignore_support_symmetrization() {
    let mut rng = rng(13);
    let models = [
        Model::group(Group::free_abelian(2).unwrap()),
        Model::group(Group::Heisenberg),
        Model::group(Group::Lamplighter),
        Model::group(Group::Finite(FiniteGroup::symmetric(3).unwrap())),
    ];
    for model in models {
        let g = model.group_of().unwrap().clone();
        let pool = g.window(1);
        for _ in 0..5 {
            let support: Vec<Word> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
            let mut both = support.clone();
            both.extend(support.iter().map(|s| g.inv(s)));
            for n in 1..=3 {
                match (folner_window(&model, &support, n), folner_window(&model, &both, n)) {
                    (Ok(a), Ok(b)) => {
                        assert_eq!(a.p(), b.p());
                        assert_eq!(a.s(), b.s());
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("{model} n = {n}: {:?} vs {:?}", a.is_ok(), b.is_ok()),
                }
            }
        }
    }
}

#[test]
fn heisenberg_and_lamplighter_windows_contain_their_translates() {
    for g in [Group::Heisenberg, Group::Lamplighter] {
        let model = Model::group(g.clone());
        let support: Vec<Word> = (0..g.generator_count()).map(|i| g.generator(i)).collect();
        let mut ratios = Vec::new();
        for n in 1..=4 {
            let w = folner_window(&model, &support, n).unwrap();
            let p: HashSet<&Word> = w.p().iter().collect();
            for gamma in w.s() {
                for s in g.symmetrize(&support) {
                    assert!(p.contains(&g.mul(&s, gamma)), "{g} n = {n}");
                }
            }
            ratios.push(w.ratio());
        }
        assert!(ratios.windows(2).all(|p| p[0] < p[1]), "{g}: {ratios:?}");
    }
}

#[test]
fn trace_is_basis_independent() {
    let mut rng = rng(14);
    let model = Model::group(Group::free_abelian(1).unwrap());
    let pool = lattice_ball(1, 2);
    let module = WindowModule::new(&model, lattice_ball(1, 3), 1).unwrap();
    let len = module.len();
    for _ in 0..5 {
        let x = random_element(&mut rng, &model, &pool, 3);
        let op = module.square_compression(&x).unwrap();
        let standard = tr_n(&module, &op, None).unwrap();
        // Pair up coordinates into (e_i + e_j, e_i − e_j) and phase the rest.
        let mut basis: Vec<SparseVec<Q>> = Vec::new();
        let mut c = 0;
        while c + 1 < len {
            basis.push(vec![(c, Q::one()), (c + 1, Q::one())]);
            basis.push(vec![(c, Q::one()), (c + 1, -Q::one())]);
            c += 2;
        }
        if c < len {
            basis.push(vec![(c, Q::i())]);
        }
        assert_eq!(tr_n(&module, &op, Some(&basis)).unwrap(), standard);
    }
}

#[test]
fn crossed_closure_projections_are_equivariant() {
    let mut rng = rng(15);
    let g = Group::Finite(FiniteGroup::cyclic(3).unwrap());
    let sigma = Permutation::new(vec![1, 2, 0, 3]).unwrap();
    let weights = vec![r(1, 5), r(1, 5), r(1, 5), r(2, 5)];
    let model = Model::crossed(g.clone(), weights, PermutationAction::new(&g, vec![sigma]).unwrap()).unwrap();
    let module = Arc::new(WindowModule::new(&model, g.elements().unwrap(), 1).unwrap());
    let pool = g.elements().unwrap();
    for _ in 0..5 {
        let x = random_element(&mut rng, &model, &pool, 2);
        let y = random_element(&mut rng, &model, &pool, 2);
        let gens = SubmoduleGens::from_elements(&module, &[vec![x], vec![y]]).unwrap();
        let p = closure_projection(&gens, &tol()).unwrap();
        module.check_equivariant(&p).unwrap();
        assert_eq!(p.mul(&p), p);
    }
}
