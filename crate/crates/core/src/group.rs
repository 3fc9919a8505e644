//! Discrete amenable groups with computable words, and permutation actions
//! of them on finite sets.
//!
//! Group elements are integer tuples ([`Word`]):
//!
//! | group            | encoding                                   |
//! |------------------|--------------------------------------------|
//! | `ℤ^d`            | `[a_1, …, a_d]`                             |
//! | Heisenberg `H_3` | `[a, b, c]`, `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')` |
//! | lamplighter      | `[cursor, count, lamp_1 < … < lamp_count]`  |
//! | finite           | `[index into the multiplication table]`     |
//! | product          | concatenation of the factor encodings       |

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub type Word = Vec<i64>;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
    generators: Vec<usize>,
    /// Shortest generator word for every element.
    words: Vec<Vec<(usize, i64)>>,
}

impl FiniteGroup {
    /// Validates the group axioms on the full table. When `generators` is
    /// `None`, every non-identity element is used as a generator.
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<usize>>, generators: Option<Vec<usize>>) -> Result<Self> {
        let name = name.into();
        let n = table.len();
        let bad = |msg: String| Error::InvalidModel(format!("group {name}: {msg}"));
        if n == 0 {
            return Err(bad("empty multiplication table".into()));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(bad("table is not an n×n array of indices below n".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| bad("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| bad(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad(format!("associativity fails on ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let generators = generators.unwrap_or_else(|| (0..n).filter(|&g| g != identity).collect());
        if let Some(&g) = generators.iter().find(|&&g| g >= n) {
            return Err(bad(format!("generator {g} out of range")));
        }
        // Breadth-first search for shortest words g = s_1 s_2 … s_l.
        let mut words: Vec<Option<Vec<(usize, i64)>>> = vec![None; n];
        words[identity] = Some(Vec::new());
        let mut queue = VecDeque::from([identity]);
        while let Some(g) = queue.pop_front() {
            for (k, &s) in generators.iter().enumerate() {
                let h = table[g][s];
                if words[h].is_none() {
                    let mut w = words[g].clone().unwrap();
                    w.push((k, 1));
                    words[h] = Some(w);
                    queue.push_back(h);
                }
            }
        }
        let words = words
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("generators do not generate the group".into()))?;
        Ok(FiniteGroup { name, table, inverse, identity, generators, words })
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("cyclic group of order 0".into()));
        }
        let table = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        Self::from_table(format!("Z/{m}"), table, Some(if m == 1 { vec![] } else { vec![1] }))
    }

    /// Closure of a set of permutations of `0..degree` under composition,
    /// with `(στ)(x) = σ(τ(x))`.
    pub fn generated_by_permutations(name: impl Into<String>, generators: &[Vec<usize>]) -> Result<Self> {
        let degree = generators.first().map_or(0, Vec::len);
        let id: Vec<usize> = (0..degree).collect();
        let mut elements = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut i = 0;
        while i < elements.len() {
            for s in generators {
                let prod: Vec<usize> = (0..degree).map(|x| elements[i][s[x]]).collect();
                if !index.contains_key(&prod) {
                    index.insert(prod.clone(), elements.len());
                    elements.push(prod);
                }
            }
            i += 1;
        }
        let table = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&(0..degree).map(|x| a[b[x]]).collect::<Vec<_>>()]).collect())
            .collect();
        let gens = generators.iter().map(|s| index[s]).collect();
        Self::from_table(name, table, Some(gens))
    }

    /// Symmetric group `S_n`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n < 2 {
            return Self::cyclic(1);
        }
        let swap: Vec<usize> = (0..n).map(|x| if x < 2 { 1 - x } else { x }).collect();
        let cycle: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        Self::generated_by_permutations(format!("S{n}"), &[swap, cycle])
    }

    /// Dihedral group of order `2n`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidModel("dihedral groups need n ≥ 3".into()));
        }
        let rot: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|x| (n - x) % n).collect();
        Self::generated_by_permutations(format!("D{n}"), &[rot, refl])
    }

    /// Quaternion group `Q_8` via its regular representation.
    pub fn quaternion() -> Result<Self> {
        // Elements ±1, ±i, ±j, ±k encoded as (sign, unit) with unit 0..4.
        let mul_units = |a: usize, b: usize| -> (bool, usize) {
            // Returns (negate, unit) for unit_a * unit_b.
            const T: [[(bool, usize); 4]; 4] = [
                [(false, 0), (false, 1), (false, 2), (false, 3)],
                [(false, 1), (true, 0), (false, 3), (true, 2)],
                [(false, 2), (true, 3), (true, 0), (false, 1)],
                [(false, 3), (false, 2), (true, 1), (true, 0)],
            ];
            T[a][b]
        };
        let enc = |neg: bool, u: usize| u + if neg { 4 } else { 0 };
        let table = (0..8)
            .map(|x| {
                (0..8)
                    .map(|y| {
                        let (n, u) = mul_units(x % 4, y % 4);
                        enc(n ^ (x >= 4) ^ (y >= 4), u)
                    })
                    .collect()
            })
            .collect();
        Self::from_table("Q8", table, Some(vec![1, 2]))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    FreeAbelian { rank: usize },
    Heisenberg,
    Lamplighter,
    Finite(FiniteGroup),
    Product(Vec<Group>),
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::FreeAbelian { rank: 1 } => write!(f, "Z"),
            Group::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            Group::Heisenberg => write!(f, "H3(Z)"),
            Group::Lamplighter => write!(f, "Z/2 wr Z"),
            Group::Finite(g) => write!(f, "{}", g.name),
            Group::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|g| g.to_string()).collect();
                write!(f, "{}", parts.join(" x "))
            }
        }
    }
}

fn lamp_word(cursor: i64, lamps: &BTreeSet<i64>) -> Word {
    let mut w = vec![cursor, lamps.len() as i64];
    w.extend(lamps.iter().copied());
    w
}

fn lamp_parts(w: &[i64]) -> (i64, BTreeSet<i64>) {
    (w[0], w[2..].iter().copied().collect())
}

impl Group {
    pub fn free_abelian(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidModel("ℤ^0: use the trivial cyclic group instead".into()));
        }
        Ok(Group::FreeAbelian { rank })
    }

    pub fn product(factors: Vec<Group>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidModel("empty direct product".into()));
        }
        Ok(Group::Product(factors))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Group::Finite(_) => true,
            Group::Product(fs) => fs.iter().all(Group::is_finite),
            _ => false,
        }
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            Group::Finite(g) => Some(g.order()),
            Group::Product(fs) => fs.iter().map(Group::order).product(),
            _ => None,
        }
    }

    /// Length of the encoding of the element that starts `w`, if well formed.
    fn encoded_len(&self, w: &[i64]) -> Option<usize> {
        match self {
            Group::FreeAbelian { rank } => (w.len() >= *rank).then_some(*rank),
            Group::Heisenberg => (w.len() >= 3).then_some(3),
            Group::Lamplighter => {
                if w.len() < 2 || w[1] < 0 {
                    return None;
                }
                let len = 2 + w[1] as usize;
                if w.len() < len || !w[2..len].windows(2).all(|p| p[0] < p[1]) {
                    return None;
                }
                Some(len)
            }
            Group::Finite(g) => (!w.is_empty() && w[0] >= 0 && (w[0] as usize) < g.order()).then_some(1),
            Group::Product(fs) => {
                let mut at = 0;
                for f in fs {
                    at += f.encoded_len(&w[at..])?;
                }
                Some(at)
            }
        }
    }

    /// Splits a product word into its factor words.
    fn split<'a>(factors: &[Group], w: &'a [i64]) -> Vec<&'a [i64]> {
        let mut out = Vec::with_capacity(factors.len());
        let mut at = 0;
        for f in factors {
            let len = f.encoded_len(&w[at..]).expect("validated word");
            out.push(&w[at..at + len]);
            at += len;
        }
        out
    }

    pub fn validate(&self, w: &[i64]) -> Result<()> {
        match self.encoded_len(w) {
            Some(len) if len == w.len() => Ok(()),
            _ => Err(Error::InvalidIndex { index: w.to_vec(), reason: format!("not an element of {self}") }),
        }
    }

    pub fn identity(&self) -> Word {
        match self {
            Group::FreeAbelian { rank } => vec![0; *rank],
            Group::Heisenberg => vec![0, 0, 0],
            Group::Lamplighter => vec![0, 0],
            Group::Finite(g) => vec![g.identity as i64],
            Group::Product(fs) => fs.iter().flat_map(Group::identity).collect(),
        }
    }

    pub fn mul(&self, a: &[i64], b: &[i64]) -> Word {
        match self {
            Group::FreeAbelian { .. } => a.iter().zip(b).map(|(x, y)| x + y).collect(),
            Group::Heisenberg => vec![a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]],
            Group::Lamplighter => {
                let (m, mut f) = lamp_parts(a);
                let (m2, f2) = lamp_parts(b);
                for i in f2 {
                    let pos = i + m;
                    if !f.remove(&pos) {
                        f.insert(pos);
                    }
                }
                lamp_word(m + m2, &f)
            }
            Group::Finite(g) => vec![g.mul(a[0] as usize, b[0] as usize) as i64],
            Group::Product(fs) => {
                let (pa, pb) = (Self::split(fs, a), Self::split(fs, b));
                fs.iter().zip(pa.iter().zip(&pb)).flat_map(|(f, (x, y))| f.mul(x, y)).collect()
            }
        }
    }

    pub fn inv(&self, a: &[i64]) -> Word {
        match self {
            Group::FreeAbelian { .. } => a.iter().map(|x| -x).collect(),
            // (a,b,c)^{-1} = (−a, −b, −c + ab)
            Group::Heisenberg => vec![-a[0], -a[1], -a[2] + a[0] * a[1]],
            Group::Lamplighter => {
                let (m, f) = lamp_parts(a);
                lamp_word(-m, &f.iter().map(|i| i - m).collect())
            }
            Group::Finite(g) => vec![g.inv(a[0] as usize) as i64],
            Group::Product(fs) => fs.iter().zip(Self::split(fs, a)).flat_map(|(f, x)| f.inv(x)).collect(),
        }
    }

    /// The `n`-th window `P_n` of the standard Følner sequence.
    pub fn window(&self, n: usize) -> Vec<Word> {
        let n = n as i64;
        match self {
            Group::FreeAbelian { rank } => {
                let mut out = vec![Vec::new()];
                for _ in 0..*rank {
                    out = out
                        .into_iter()
                        .flat_map(|w: Word| {
                            (-n..=n).map(move |x| {
                                let mut w = w.clone();
                                w.push(x);
                                w
                            })
                        })
                        .collect();
                }
                out
            }
            Group::Heisenberg => {
                let mut out = Vec::new();
                for a in -n..=n {
                    for b in -n..=n {
                        for c in -n * n..=n * n {
                            out.push(vec![a, b, c]);
                        }
                    }
                }
                out
            }
            Group::Lamplighter => {
                let positions: Vec<i64> = (-n..=n).collect();
                let mut out = Vec::new();
                for cursor in -n..=n {
                    for mask in 0u64..(1u64 << positions.len()) {
                        let lamps: BTreeSet<i64> =
                            positions.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
                        out.push(lamp_word(cursor, &lamps));
                    }
                }
                out
            }
            Group::Finite(g) => (0..g.order() as i64).map(|x| vec![x]).collect(),
            Group::Product(fs) => {
                let mut out = vec![Vec::new()];
                for f in fs {
                    let fw = f.window(n as usize);
                    out = out
                        .into_iter()
                        .flat_map(|w: Word| {
                            fw.iter().map(move |x| {
                                let mut w = w.clone();
                                w.extend(x);
                                w
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// All elements of a finite group.
    pub fn elements(&self) -> Result<Vec<Word>> {
        if !self.is_finite() {
            return Err(Error::InvalidModel(format!("{self} is infinite")));
        }
        Ok(self.window(1))
    }

    /// Number of generators used by [`Group::decompose`].
    pub fn generator_count(&self) -> usize {
        match self {
            Group::FreeAbelian { rank } => *rank,
            Group::Heisenberg => 3,
            Group::Lamplighter => 2,
            Group::Finite(g) => g.generators.len(),
            Group::Product(fs) => fs.iter().map(Group::generator_count).sum(),
        }
    }

    pub fn generator(&self, k: usize) -> Word {
        match self {
            Group::FreeAbelian { rank } => (0..*rank).map(|i| i64::from(i == k)).collect(),
            Group::Heisenberg => (0..3).map(|i| i64::from(i == k)).collect(),
            Group::Lamplighter => {
                if k == 0 {
                    vec![1, 0]
                } else {
                    vec![0, 1, 0]
                }
            }
            Group::Finite(g) => vec![g.generators[k] as i64],
            Group::Product(fs) => {
                let mut k = k;
                let mut w = Vec::new();
                let mut placed = false;
                for f in fs {
                    let c = f.generator_count();
                    if !placed && k < c {
                        w.extend(f.generator(k));
                        placed = true;
                    } else {
                        if !placed {
                            k -= c;
                        }
                        w.extend(f.identity());
                    }
                }
                w
            }
        }
    }

    /// Writes `w` as a product `s_{k_1}^{e_1} s_{k_2}^{e_2} …` of generators.
    pub fn decompose(&self, w: &[i64]) -> Vec<(usize, i64)> {
        match self {
            Group::FreeAbelian { .. } => w.iter().enumerate().filter(|(_, &e)| e != 0).map(|(k, &e)| (k, e)).collect(),
            // (a, b, c) = x^a y^b z^{c − ab}
            Group::Heisenberg => {
                [(0, w[0]), (1, w[1]), (2, w[2] - w[0] * w[1])].into_iter().filter(|(_, e)| *e != 0).collect()
            }
            // (f, m) = Π_{i ∈ f} (t^i a t^{−i}) · t^m
            Group::Lamplighter => {
                let (m, f) = lamp_parts(w);
                let mut out = Vec::new();
                for i in f {
                    out.extend([(0, i), (1, 1), (0, -i)].into_iter().filter(|(_, e)| *e != 0));
                }
                if m != 0 {
                    out.push((0, m));
                }
                out
            }
            Group::Finite(g) => g.words[w[0] as usize].clone(),
            Group::Product(fs) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for (f, x) in fs.iter().zip(Self::split(fs, w)) {
                    out.extend(f.decompose(x).into_iter().map(|(k, e)| (k + offset, e)));
                    offset += f.generator_count();
                }
                out
            }
        }
    }

    /// Symmetrized support `S ∪ S^{-1}`.
    pub fn symmetrize(&self, support: &[Word]) -> Vec<Word> {
        let mut set: BTreeSet<Word> = support.iter().cloned().collect();
        for s in support {
            set.insert(self.inv(s));
        }
        set.into_iter().collect()
    }

    /// `F \ ∂_S(F)`: the elements `γ ∈ F` with `sγ ∈ F` for every `s ∈ S`.
    pub fn interior(&self, window: &[Word], support: &[Word]) -> Vec<Word> {
        let set: HashSet<&Word> = window.iter().collect();
        window.iter().filter(|g| support.iter().all(|s| set.contains(&self.mul(s, g)))).cloned().collect()
    }
}

/// A permutation of `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidModel(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(len: usize) -> Self {
        Permutation { images: (0..len).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { images: inv }
    }

    pub fn pow(&self, e: i64) -> Permutation {
        let mut out = vec![0; self.images.len()];
        let mut done = vec![false; self.images.len()];
        for start in 0..self.images.len() {
            if done[start] {
                continue;
            }
            let mut cycle = vec![start];
            let mut x = self.images[start];
            while x != start {
                cycle.push(x);
                x = self.images[x];
            }
            let len = cycle.len() as i64;
            for (pos, &y) in cycle.iter().enumerate() {
                out[y] = cycle[(pos as i64 + e).rem_euclid(len) as usize];
                done[y] = true;
            }
        }
        Permutation { images: out }
    }

    /// Order of the permutation (lcm of its cycle lengths).
    pub fn order(&self) -> usize {
        let mut acc = 1usize;
        let mut done = vec![false; self.images.len()];
        for start in 0..self.images.len() {
            if done[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            loop {
                done[x] = true;
                len += 1;
                x = self.images[x];
                if x == start {
                    break;
                }
            }
            acc = num_integer::lcm(acc, len);
        }
        acc
    }
}

/// An action `g ↦ σ_g` of a group on `0..atoms` by permutations, specified on
/// the generators of [`Group::decompose`], with `σ_{gh} = σ_g ∘ σ_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationAction {
    atoms: usize,
    generators: Vec<Permutation>,
}

impl PermutationAction {
    /// Checks that the generator permutations satisfy the defining relations
    /// of `group`.
    pub fn new(group: &Group, generators: Vec<Permutation>) -> Result<Self> {
        if generators.len() != group.generator_count() {
            return Err(Error::InvalidModel(format!(
                "{group} has {} generators, action gives {}",
                group.generator_count(),
                generators.len()
            )));
        }
        let atoms = generators.first().map_or(0, Permutation::len);
        if generators.iter().any(|p| p.len() != atoms) {
            return Err(Error::InvalidModel("generator permutations act on different sets".into()));
        }
        check_relations(group, &generators, atoms)?;
        Ok(PermutationAction { atoms, generators })
    }

    /// The trivial action on `atoms` points.
    pub fn trivial(group: &Group, atoms: usize) -> Self {
        PermutationAction { atoms, generators: vec![Permutation::identity(atoms); group.generator_count()] }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn act(&self, group: &Group, g: &[i64]) -> Permutation {
        group
            .decompose(g)
            .into_iter()
            .fold(Permutation::identity(self.atoms), |acc, (k, e)| acc.compose(&self.generators[k].pow(e)))
    }
}

fn commute(a: &Permutation, b: &Permutation) -> bool {
    a.compose(b) == b.compose(a)
}

fn check_relations(group: &Group, gens: &[Permutation], atoms: usize) -> Result<()> {
    let fail = |msg: &str| Err(Error::InvalidModel(format!("action of {group}: {msg}")));
    match group {
        Group::FreeAbelian { .. } => {
            for i in 0..gens.len() {
                for j in i + 1..gens.len() {
                    if !commute(&gens[i], &gens[j]) {
                        return fail("generator permutations do not commute");
                    }
                }
            }
        }
        Group::Heisenberg => {
            let (x, y, z) = (&gens[0], &gens[1], &gens[2]);
            if !commute(x, z) || !commute(y, z) {
                return fail("z is not central");
            }
            // xy = yxz
            if x.compose(y) != y.compose(x).compose(z) {
                return fail("the relation xy = yxz fails");
            }
        }
        Group::Lamplighter => {
            let (t, a) = (&gens[0], &gens[1]);
            if a.compose(a) != Permutation::identity(atoms) {
                return fail("the lamp generator is not an involution");
            }
            for i in 1..t.order() as i64 {
                let conj = t.pow(i).compose(a).compose(&t.pow(-i));
                if !commute(&conj, a) {
                    return fail("lamps at different positions do not commute");
                }
            }
        }
        Group::Finite(g) => {
            // σ_g along shortest words; every edge g → g·s must agree.
            let sigma: Vec<Permutation> = g
                .words
                .iter()
                .map(|w| w.iter().fold(Permutation::identity(atoms), |acc, &(k, e)| acc.compose(&gens[k].pow(e))))
                .collect();
            for h in 0..g.order() {
                for (k, &s) in g.generators.iter().enumerate() {
                    if sigma[g.mul(h, s)] != sigma[h].compose(&gens[k]) {
                        return fail("generator permutations violate the multiplication table");
                    }
                }
            }
        }
        Group::Product(fs) => {
            let mut offset = 0;
            let mut ranges = Vec::new();
            for f in fs {
                let c = f.generator_count();
                check_relations(f, &gens[offset..offset + c], atoms)?;
                ranges.push(offset..offset + c);
                offset += c;
            }
            for (i, ri) in ranges.iter().enumerate() {
                for rj in &ranges[i + 1..] {
                    for a in ri.clone() {
                        for b in rj.clone() {
                            if !commute(&gens[a], &gens[b]) {
                                return fail("actions of different factors do not commute");
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_inverse_and_commutator() {
        let h = Group::Heisenberg;
        let x = vec![1, 0, 0];
        let y = vec![0, 1, 0];
        let g = vec![2, -3, 5];
        assert_eq!(h.mul(&g, &h.inv(&g)), h.identity());
        assert_eq!(h.mul(&h.inv(&g), &g), h.identity());
        // [x, y] = x^{-1} y^{-1} x y is central.
        let c = h.mul(&h.mul(&h.inv(&x), &h.inv(&y)), &h.mul(&x, &y));
        assert_eq!(c, vec![0, 0, 1]);
    }

    #[test]
    fn lamplighter_arithmetic() {
        let l = Group::Lamplighter;
        let t = vec![1, 0];
        let a = vec![0, 1, 0];
        let tat = l.mul(&l.mul(&t, &a), &l.inv(&t));
        assert_eq!(tat, vec![0, 1, 1]);
        assert_eq!(l.mul(&a, &a), l.identity());
        let g = vec![2, 2, -1, 3];
        assert_eq!(l.mul(&g, &l.inv(&g)), l.identity());
        assert!(l.validate(&[0, 2, 3, 1]).is_err());
    }

    #[test]
    fn decompositions_reassemble() {
        let groups = [
            Group::free_abelian(2).unwrap(),
            Group::Heisenberg,
            Group::Lamplighter,
            Group::Finite(FiniteGroup::symmetric(3).unwrap()),
            Group::product(vec![Group::Finite(FiniteGroup::cyclic(2).unwrap()), Group::Heisenberg]).unwrap(),
        ];
        for g in &groups {
            for w in g.window(1).into_iter().take(200) {
                let mut acc = g.identity();
                for (k, e) in g.decompose(&w) {
                    let s = g.generator(k);
                    let s = if e < 0 { g.inv(&s) } else { s };
                    for _ in 0..e.abs() {
                        acc = g.mul(&acc, &s);
                    }
                }
                assert_eq!(acc, w, "group {g}");
            }
        }
    }

    #[test]
    fn finite_groups_have_expected_orders() {
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert_eq!(FiniteGroup::dihedral(6).unwrap().order(), 12);
        assert_eq!(FiniteGroup::quaternion().unwrap().order(), 8);
        assert!(FiniteGroup::from_table("bad", vec![vec![0, 1], vec![1, 1]], None).is_err());
    }

    #[test]
    fn permutation_powers() {
        let p = Permutation::new(vec![1, 2, 0, 4, 3]).unwrap();
        assert_eq!(p.order(), 6);
        assert_eq!(p.pow(3), Permutation::new(vec![0, 1, 2, 4, 3]).unwrap());
        assert_eq!(p.pow(-1), p.inverse());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn actions_are_checked() {
        let z2 = Group::free_abelian(2).unwrap();
        let a = Permutation::new(vec![1, 2, 0]).unwrap();
        let b = Permutation::new(vec![1, 0, 2]).unwrap();
        assert!(PermutationAction::new(&z2, vec![a.clone(), a.pow(2)]).is_ok());
        assert!(PermutationAction::new(&z2, vec![a.clone(), b]).is_err());
        let c3 = Group::Finite(FiniteGroup::cyclic(3).unwrap());
        assert!(PermutationAction::new(&c3, vec![a.clone()]).is_ok());
        let c2 = Group::Finite(FiniteGroup::cyclic(2).unwrap());
        assert!(PermutationAction::new(&c2, vec![a]).is_err());
    }
}
