//! Finite-dimensional matrix *-algebra machinery: commutants,
//! irreducibility, word closure, simultaneous block diagonalization,
//! game-relation checks, and trace/state correspondences.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::games::SynchronousGame;
use crate::numerics::{
    columns_to_matrix, eigh, mat_of, nullspace, random_gaussian, tensor, vec_of, CMatrix, CVector,
};
use crate::strategy::{maximally_entangled, PmeStrategy};
use crate::{Error, Result};

/// Seed used by operations that sample when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_ca11;

/// A finite family of same-dimension operators, each tagged with a
/// (question, answer) label.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    dim: usize,
    labels: Vec<(usize, usize)>,
    operators: Vec<CMatrix>,
}

impl OperatorFamily {
    pub fn new(labels: Vec<(usize, usize)>, operators: Vec<CMatrix>) -> Result<Self> {
        let dim = match operators.first() {
            Some(op) => op.rows(),
            None => return Err(Error::ZeroDimension),
        };
        if labels.len() != operators.len() {
            return Err(Error::DimensionMismatch {
                context: "label count vs operator count",
                expected: operators.len(),
                got: labels.len(),
            });
        }
        for op in &operators {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "operator family dimension",
                    expected: dim,
                    got: op.rows(),
                });
            }
        }
        Ok(Self {
            dim,
            labels,
            operators,
        })
    }

    /// The Alice projection family of a PME strategy, labelled (x, a).
    pub fn from_pme(s: &PmeStrategy) -> Self {
        let mut labels = Vec::new();
        let mut operators = Vec::new();
        for x in 0..s.questions() {
            for a in 0..s.answers() {
                labels.push((x, a));
                operators.push(s.projection(x, a).clone());
            }
        }
        Self {
            dim: s.dim(),
            labels,
            operators,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn operator(&self, label: (usize, usize)) -> Result<&CMatrix> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|i| &self.operators[i])
            .ok_or(Error::UnknownGenerator {
                x: label.0,
                a: label.1,
            })
    }

    /// Evaluates the product of the word's letters under this family; the
    /// empty word is the identity.
    pub fn word_product(&self, w: &Word) -> Result<CMatrix> {
        let mut acc = CMatrix::identity(self.dim);
        for &letter in &w.letters {
            acc = acc.mul(self.operator(letter)?);
        }
        Ok(acc)
    }
}

/// Monomial in the generators, stored as a list of (question, answer)
/// letters; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub letters: Vec<(usize, usize)>,
}

impl Word {
    pub fn new(letters: Vec<(usize, usize)>) -> Self {
        Self { letters }
    }

    pub fn empty() -> Self {
        Self { letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Orthonormal (Frobenius) basis of the commutant {B : BA = AB for all A}.
///
/// Solved as the joint nullspace of the stacked commutator maps
/// B ↦ AB − BA; the span always contains the identity.
pub fn commutant_basis(f: &OperatorFamily) -> Vec<CMatrix> {
    let d = f.dim();
    let d2 = d * d;
    let ident = CMatrix::identity(d);
    let mut stacked = CMatrix::zeros(f.len() * d2, d2);
    for (k, a) in f.operators().iter().enumerate() {
        // vec(AB − BA) = (A⊗I − I⊗Aᵀ) vec(B).
        let block = tensor(a, &ident).sub(&tensor(&ident, &a.transpose()));
        for i in 0..d2 {
            for j in 0..d2 {
                stacked[(k * d2 + i, j)] = block[(i, j)];
            }
        }
    }
    nullspace(&stacked, 1e-10)
        .into_iter()
        .map(|v| mat_of(&v).expect("nullspace vectors have square length"))
        .collect()
}

/// True iff the commutant is trivial (spanned by the identity alone).
pub fn is_irreducible(f: &OperatorFamily) -> bool {
    commutant_basis(f).len() == 1
}

/// Orthonormal basis of the span of all products of generators of length at
/// most `max_len`, including the identity. Stops early once a full sweep
/// adds no new direction.
pub fn word_closure(f: &OperatorFamily, max_len: usize) -> Vec<CMatrix> {
    let d = f.dim();
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut frontier: Vec<CMatrix> = Vec::new();
    let absorb = |basis: &mut Vec<CMatrix>, candidate: &CMatrix| -> Option<CMatrix> {
        let mut r = candidate.clone();
        for b in basis.iter() {
            let overlap = b.inner(&r);
            r = r.sub(&b.scale(overlap));
        }
        let norm = r.norm_fro();
        if norm > 1e-9 * candidate.norm_fro().max(1.0) {
            let unit = r.scale(Complex64::new(1.0 / norm, 0.0));
            basis.push(unit.clone());
            Some(unit)
        } else {
            None
        }
    };

    if let Some(u) = absorb(&mut basis, &CMatrix::identity(d)) {
        frontier.push(u);
    }
    for a in f.operators() {
        if let Some(u) = absorb(&mut basis, a) {
            frontier.push(u);
        }
    }
    for _ in 1..max_len {
        let mut next = Vec::new();
        for b in &frontier {
            for a in f.operators() {
                if let Some(u) = absorb(&mut basis, &b.mul(a)) {
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    basis
}

/// Simultaneous block structure of a *-closed family: a unitary change of
/// basis under which every family member becomes ⊕_i R_i ⊗ I_{s_i}, with one
/// summand per equivalence class of irreducible subrepresentations.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Change of basis: `unitary * A * unitary†` is block diagonal for every
    /// family member A.
    pub unitary: CMatrix,
    /// (irreducible dimension d_i, multiplicity s_i) per class.
    pub blocks: Vec<(usize, usize)>,
    /// Images of the original family's operators in each class
    /// representative, ordered as the input family.
    pub irrep_generators: Vec<Vec<CMatrix>>,
    /// Worst reconstruction residual ‖U A U† − ⊕ R_i(A)⊗I‖_F over the family.
    pub residual: f64,
}

/// Relative eigenvalue-gap threshold for splitting invariant subspaces.
const CLUSTER_GAP_RTOL: f64 = 1e-6;

/// Block-diagonalizes a family with the default sampling seed.
pub fn block_diagonalize(f: &OperatorFamily) -> Result<BlockDecomposition> {
    block_diagonalize_seeded(f, DEFAULT_SEED)
}

/// Block-diagonalizes by recursively splitting along eigenspaces of random
/// Hermitian commutant elements until every restriction is irreducible, then
/// aligning equivalent irreducible blocks with intertwiners.
pub fn block_diagonalize_seeded(f: &OperatorFamily, seed: u64) -> Result<BlockDecomposition> {
    let d = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Work with the self-adjoint extension so invariant subspaces reduce.
    let mut closed: Vec<CMatrix> = f.operators().to_vec();
    closed.extend(f.operators().iter().map(|a| a.adjoint()));

    let leaves = split_invariant(&CMatrix::identity(d), &closed, &mut rng, 0)?;

    // Group leaves into unitary-equivalence classes.
    struct Class {
        dim: usize,
        rep: Vec<CMatrix>,
        members: Vec<(CMatrix, CMatrix)>, // (leaf isometry, aligner W)
    }
    let mut classes: Vec<Class> = Vec::new();
    for q in &leaves {
        let restricted: Vec<CMatrix> = closed.iter().map(|a| q.adjoint().mul(a).mul(q)).collect();
        let k = q.cols();
        let mut placed = false;
        for class in classes.iter_mut() {
            if class.dim != k {
                continue;
            }
            if let Some(w) = find_intertwiner(&restricted, &class.rep) {
                class.members.push((q.clone(), w));
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(Class {
                dim: k,
                rep: restricted,
                members: vec![(q.clone(), CMatrix::identity(k))],
            });
        }
    }

    // Assemble the change of basis: class i occupies a d_i·s_i block laid
    // out as (irrep index t, copy index j) ↦ t·s_i + j.
    let mut columns: Vec<CVector> = vec![CVector::zeros(d); d];
    let mut blocks = Vec::with_capacity(classes.len());
    let mut offset = 0;
    for class in &classes {
        let (di, si) = (class.dim, class.members.len());
        blocks.push((di, si));
        for (j, (q, w)) in class.members.iter().enumerate() {
            let aligned = q.mul(&w.adjoint());
            for t in 0..di {
                let col = CVector::new((0..d).map(|r| aligned[(r, t)]).collect());
                columns[offset + t * si + j] = col;
            }
        }
        offset += di * si;
    }
    if offset != d {
        return Err(Error::BlockSeparationFailed {
            reason: "block dimensions do not partition the space",
            residual: (d as f64) - (offset as f64),
        });
    }
    let u = columns_to_matrix(&columns).adjoint();

    // Images of the original (unextended) family in each class rep.
    let irrep_generators: Vec<Vec<CMatrix>> = classes
        .iter()
        .map(|class| {
            let (q, w) = &class.members[0];
            f.operators()
                .iter()
                .map(|a| w.mul(&q.adjoint().mul(a).mul(q)).mul(&w.adjoint()))
                .collect()
        })
        .collect();

    // Reconstruction residual over the original family.
    let mut residual = 0.0_f64;
    for (idx, a) in f.operators().iter().enumerate() {
        let transformed = u.mul(a).mul(&u.adjoint());
        let mut expected = CMatrix::zeros(d, d);
        let mut off = 0;
        for (ci, &(di, si)) in blocks.iter().enumerate() {
            let r = &irrep_generators[ci][idx];
            for t in 0..di {
                for tp in 0..di {
                    for j in 0..si {
                        expected[(off + t * si + j, off + tp * si + j)] = r[(t, tp)];
                    }
                }
            }
            off += di * si;
        }
        residual = residual.max(transformed.sub(&expected).norm_fro());
    }
    let scale = f
        .operators()
        .iter()
        .map(|a| a.norm_fro())
        .fold(1.0_f64, f64::max);
    if residual > 1e-8 * scale {
        return Err(Error::BlockSeparationFailed {
            reason: "reconstruction residual too large",
            residual,
        });
    }

    Ok(BlockDecomposition {
        unitary: u,
        blocks,
        irrep_generators,
        residual,
    })
}

/// Recursively splits the range of the isometry `q` into family-invariant
/// subspaces until the restricted commutant is trivial.
fn split_invariant(
    q: &CMatrix,
    closed: &[CMatrix],
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> Result<Vec<CMatrix>> {
    if depth > 64 {
        return Err(Error::BlockSeparationFailed {
            reason: "recursion depth exceeded",
            residual: depth as f64,
        });
    }
    let k = q.cols();
    let restricted: Vec<CMatrix> = closed.iter().map(|a| q.adjoint().mul(a).mul(q)).collect();
    let fam = OperatorFamily::new(vec![(0, 0); restricted.len()], restricted)?;
    let comm = commutant_basis(&fam);
    if comm.len() <= 1 {
        return Ok(vec![q.clone()]);
    }

    for _attempt in 0..32 {
        // Random Hermitian commutant element.
        let mut c = CMatrix::zeros(k, k);
        for b in &comm {
            let g = random_gaussian(rng, 1, 2);
            c = c.add(&b.scale(Complex64::new(g[(0, 0)].re, g[(0, 1)].re)));
        }
        let h = c.add(&c.adjoint()).scale(Complex64::new(0.5, 0.0));
        let norm = h.norm_fro();
        if norm < 1e-12 {
            continue;
        }
        let h = h.scale(Complex64::new(1.0 / norm, 0.0));
        let (vals, vecs) = eigh(&h)?;
        let spread = vals.first().unwrap() - vals.last().unwrap();
        if spread < CLUSTER_GAP_RTOL {
            continue; // effectively scalar; resample
        }
        // Cluster eigenvalues by relative gaps.
        let gap_cut = CLUSTER_GAP_RTOL * spread.max(1.0);
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..k {
            if vals[i - 1] - vals[i] > gap_cut {
                clusters.push(Vec::new());
            }
            clusters.last_mut().unwrap().push(i);
        }
        if clusters.len() < 2 {
            continue;
        }
        let mut leaves = Vec::new();
        for cluster in clusters {
            let cols: Vec<CVector> = cluster.iter().map(|&i| vecs[i].clone()).collect();
            let sub = q.mul(&columns_to_matrix(&cols));
            leaves.extend(split_invariant(&sub, closed, rng, depth + 1)?);
        }
        return Ok(leaves);
    }
    Err(Error::BlockSeparationFailed {
        reason: "could not separate a reducible block",
        residual: comm.len() as f64,
    })
}

/// Searches for a unitary W with W A_i W† = B_i for all paired operators;
/// returns None when the representations are inequivalent.
pub(crate) fn find_intertwiner(from: &[CMatrix], to: &[CMatrix]) -> Option<CMatrix> {
    let k = from[0].rows();
    let k2 = k * k;
    let ident = CMatrix::identity(k);
    let mut stacked = CMatrix::zeros(from.len() * k2, k2);
    for (idx, (a, b)) in from.iter().zip(to).enumerate() {
        // vec(XA − BX) = (I⊗Aᵀ − B⊗I) vec(X).
        let block = tensor(&ident, &a.transpose()).sub(&tensor(b, &ident));
        for i in 0..k2 {
            for j in 0..k2 {
                stacked[(idx * k2 + i, j)] = block[(i, j)];
            }
        }
    }
    let null = nullspace(&stacked, 1e-9);
    if null.is_empty() {
        return None;
    }
    let x = mat_of(&null[0]).expect("intertwiner has square shape");
    // By Schur's lemma X†X is a positive multiple of the identity.
    let gram = x.adjoint().mul(&x);
    let c = gram.trace().re / k as f64;
    if c < 1e-12 {
        return None;
    }
    let w = x.scale(Complex64::new(1.0 / c.sqrt(), 0.0));
    if gram.sub(&ident.scale(Complex64::new(c, 0.0))).norm_fro() > 1e-7 * c.max(1.0) {
        return None;
    }
    // Reject spurious nullspace directions that do not intertwine.
    let defect = from
        .iter()
        .zip(to)
        .map(|(a, b)| w.mul(a).mul(&w.adjoint()).sub(b).norm_fro())
        .fold(0.0_f64, f64::max);
    if defect > 1e-7 {
        return None;
    }
    Some(w)
}

/// Residuals of the synchronous-game-algebra relations for a labelled family.
#[derive(Debug, Clone)]
pub struct GameRelationsReport {
    /// max ‖E² − E‖_F.
    pub projectivity: f64,
    /// max ‖E − E†‖_F.
    pub hermiticity: f64,
    /// max ‖Σ_a E_{x,a} − I‖_F over questions.
    pub completeness: f64,
    /// max ‖E_{x,a} E_{y,b}‖_F over predicate-violating tuples.
    pub annihilation: f64,
    pub max_residual: f64,
    pub pass: bool,
}

/// Checks projectivity, Hermiticity, per-question completeness, and
/// annihilation on predicate-violating pairs.
pub fn check_game_relations(
    f: &OperatorFamily,
    g: &SynchronousGame,
    tol: f64,
) -> Result<GameRelationsReport> {
    let d = f.dim();
    let mut projectivity = 0.0_f64;
    let mut hermiticity = 0.0_f64;
    let mut completeness = 0.0_f64;
    let mut annihilation = 0.0_f64;
    for x in 0..g.questions() {
        let mut sum = CMatrix::zeros(d, d);
        for a in 0..g.answers() {
            let e = f.operator((x, a))?;
            projectivity = projectivity.max(e.mul(e).sub(e).norm_fro());
            hermiticity = hermiticity.max(e.hermiticity_defect());
            sum = sum.add(e);
        }
        completeness = completeness.max(sum.sub(&CMatrix::identity(d)).norm_fro());
    }
    for x in 0..g.questions() {
        for y in 0..g.questions() {
            for a in 0..g.answers() {
                for b in 0..g.answers() {
                    if !g.predicate(x, y, a, b) {
                        let prod = f.operator((x, a))?.mul(f.operator((y, b))?);
                        annihilation = annihilation.max(prod.norm_fro());
                    }
                }
            }
        }
    }
    let max_residual = projectivity.max(hermiticity).max(completeness).max(annihilation);
    Ok(GameRelationsReport {
        projectivity,
        hermiticity,
        completeness,
        annihilation,
        max_residual,
        pass: max_residual <= tol,
    })
}

/// Normalized trace Tr(π(w))/d of a word's product; the empty word gives 1.
pub fn trace_of_representation(f: &OperatorFamily, w: &Word) -> Result<Complex64> {
    let prod = f.word_product(w)?;
    Ok(prod.trace() / Complex64::new(f.dim() as f64, 0.0))
}

/// One tested element of [`check_gns_kernel`].
#[derive(Debug, Clone)]
pub struct GnsKernelEntry {
    /// τ(a†a) under the normalized trace.
    pub trace_norm_sq: f64,
    /// Operator norm ‖π(a)‖.
    pub op_norm: f64,
    /// Whether the two smallness verdicts agree.
    pub consistent: bool,
}

/// Report of [`check_gns_kernel`].
#[derive(Debug, Clone)]
pub struct GnsKernelReport {
    pub entries: Vec<GnsKernelEntry>,
    /// Trace-side smallness threshold.
    pub tol: f64,
    /// Norm-side threshold sqrt(d·tol) implied by ‖a‖ ≤ ‖a‖_F = √(d·τ(a†a)).
    pub op_tol: f64,
    pub pass: bool,
}

/// Verifies that the normalized trace's null elements coincide with the
/// operator-norm null elements at finite dimension, where the trace's GNS
/// representation is faithful on each block. Tests every word product and
/// every pairwise difference of word products.
pub fn check_gns_kernel(f: &OperatorFamily, words: &[Word], tol: f64) -> Result<GnsKernelReport> {
    let d = f.dim() as f64;
    let op_tol = (d * tol).sqrt();
    let products: Vec<CMatrix> = words
        .iter()
        .map(|w| f.word_product(w))
        .collect::<Result<Vec<_>>>()?;
    let mut elements: Vec<CMatrix> = products.clone();
    for i in 0..products.len() {
        for j in (i + 1)..products.len() {
            elements.push(products[i].sub(&products[j]));
        }
    }
    let mut entries = Vec::with_capacity(elements.len());
    let mut pass = true;
    for a in &elements {
        let trace_norm_sq = a.adjoint().mul(a).trace().re / d;
        let op_norm = a.norm_op();
        let consistent = (trace_norm_sq <= tol) == (op_norm <= op_tol);
        pass &= consistent;
        entries.push(GnsKernelEntry {
            trace_norm_sq,
            op_norm,
            consistent,
        });
    }
    Ok(GnsKernelReport {
        entries,
        tol,
        op_tol,
        pass,
    })
}

/// Report of [`sync_state_checks`].
#[derive(Debug, Clone)]
pub struct SyncStateReport {
    /// max ‖(E_{x,a} − F_{x,a})|ψ>‖ over the label grid.
    pub max_state_residual: f64,
    /// Threshold √(2(n−1))·√tol for the state residuals.
    pub state_threshold: f64,
    /// max |<ψ|E_w E_w' ψ> − <ψ|E_w' E_w ψ>| over sampled word pairs.
    pub max_trace_residual: f64,
    /// Threshold 2(l+l')·√(2(n−1))·√tol at the largest sampled lengths.
    pub trace_threshold: f64,
    /// Worst commutator ‖[E,F]‖_F between the two families.
    pub commutation_defect: f64,
    /// Synchronicity defect of the induced correlation.
    pub sync_defect: f64,
    /// Worst per-question completeness defect across both families.
    pub completeness_defect: f64,
    pub pass: bool,
}

/// For mutually commuting families on one space whose induced correlation is
/// synchronous within `tol`, verifies the state-switching identity
/// E_{x,a}|ψ> ≈ F_{x,a}|ψ> and the trace property of the A-marginal on
/// sampled word pairs.
///
/// The thresholds follow from completeness and positivity:
/// ‖(E−F)ψ‖² ≤ <E> + <F> − 2<EF> ≤ 2(n−1)·tol, so each state residual is at
/// most √(2(n−1))·√tol, and a word-pair swap moves each letter across the
/// state twice.
pub fn sync_state_checks(
    alice: &OperatorFamily,
    bob: &OperatorFamily,
    state: &CVector,
    tol: f64,
    seed: u64,
) -> Result<SyncStateReport> {
    let d = alice.dim();
    if bob.dim() != d || state.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "sync state check dimensions",
            expected: d,
            got: bob.dim().min(state.dim()),
        });
    }
    let m = alice.labels().iter().map(|&(x, _)| x + 1).max().unwrap_or(0);
    let n = alice.labels().iter().map(|&(_, a)| a + 1).max().unwrap_or(0);

    let mut commutation_defect = 0.0_f64;
    for e in alice.operators() {
        for f_op in bob.operators() {
            let comm = e.mul(f_op).sub(&f_op.mul(e)).norm_fro();
            commutation_defect = commutation_defect.max(comm);
        }
    }
    if commutation_defect > tol {
        return Err(Error::NonCommuting {
            residual: commutation_defect,
            tolerance: tol,
        });
    }

    let mut completeness_defect = 0.0_f64;
    for fam in [alice, bob] {
        for x in 0..m {
            let mut sum = CMatrix::zeros(d, d);
            for a in 0..n {
                sum = sum.add(fam.operator((x, a))?);
            }
            completeness_defect =
                completeness_defect.max(sum.sub(&CMatrix::identity(d)).norm_fro());
        }
    }

    let mut sync_defect = 0.0_f64;
    for x in 0..m {
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    let ef = alice.operator((x, a))?.mul(bob.operator((x, b))?);
                    let p = state.inner(&ef.mul_vec(state)).re;
                    sync_defect = sync_defect.max(p.abs());
                }
            }
        }
    }
    if sync_defect > tol {
        return Err(Error::PreconditionFailed {
            what: "induced correlation must be synchronous",
            measured: sync_defect,
            allowed: tol,
        });
    }

    let c = (2.0 * (n.saturating_sub(1)) as f64).sqrt();
    let state_threshold = c * tol.sqrt();
    let mut max_state_residual = 0.0_f64;
    for x in 0..m {
        for a in 0..n {
            let e_psi = alice.operator((x, a))?.mul_vec(state);
            let f_psi = bob.operator((x, a))?.mul_vec(state);
            max_state_residual = max_state_residual.max(e_psi.sub(&f_psi).norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_trace_residual = 0.0_f64;
    let mut max_len_sum = 0usize;
    let sample_word = |rng: &mut ChaCha8Rng| -> Word {
        use rand::Rng;
        let len = rng.gen_range(1..=3usize);
        Word::new(
            (0..len)
                .map(|_| (rng.gen_range(0..m), rng.gen_range(0..n)))
                .collect(),
        )
    };
    for _ in 0..24 {
        let w = sample_word(&mut rng);
        let wp = sample_word(&mut rng);
        let ew = alice.word_product(&w)?;
        let ewp = alice.word_product(&wp)?;
        let forward = state.inner(&ew.mul(&ewp).mul_vec(state));
        let backward = state.inner(&ewp.mul(&ew).mul_vec(state));
        max_trace_residual = max_trace_residual.max((forward - backward).norm());
        max_len_sum = max_len_sum.max(w.len() + wp.len());
    }
    let trace_threshold = 2.0 * max_len_sum as f64 * c * tol.sqrt();

    let pass = max_state_residual <= state_threshold && max_trace_residual <= trace_threshold;
    Ok(SyncStateReport {
        max_state_residual,
        state_threshold,
        max_trace_residual,
        trace_threshold,
        commutation_defect,
        sync_defect,
        completeness_defect,
        pass,
    })
}

/// Commuting strategy realizing the normalized trace of a relation-checked
/// projection family: Alice acts as E⊗I, Bob as I⊗Eᵀ, on the maximally
/// entangled state.
pub fn trace_to_commuting_strategy(
    f: &OperatorFamily,
    g: &SynchronousGame,
    tol: f64,
) -> Result<(OperatorFamily, OperatorFamily, CVector)> {
    let report = check_game_relations(f, g, tol)?;
    if !report.pass {
        return Err(Error::RelationsViolated {
            residual: report.max_residual,
            tolerance: tol,
        });
    }
    let d = f.dim();
    let ident = CMatrix::identity(d);
    let mut labels = Vec::new();
    let mut alice_ops = Vec::new();
    let mut bob_ops = Vec::new();
    for x in 0..g.questions() {
        for a in 0..g.answers() {
            let e = f.operator((x, a))?;
            labels.push((x, a));
            alice_ops.push(tensor(e, &ident));
            bob_ops.push(tensor(&ident, &e.transpose()));
        }
    }
    let alice = OperatorFamily::new(labels.clone(), alice_ops)?;
    let bob = OperatorFamily::new(labels, bob_ops)?;
    let state = maximally_entangled(d)?;
    Ok((alice, bob, state))
}

/// Orthonormal basis of the fixed-point space of X ↦ (1/m)Σ A X A, computed
/// as the nullspace of the channel matrix minus the identity. `m` is the
/// number of questions the family covers.
pub fn channel_fixed_points(f: &OperatorFamily, questions: usize) -> Vec<CMatrix> {
    let d = f.dim();
    let d2 = d * d;
    let mut channel = CMatrix::zeros(d2, d2);
    for a in f.operators() {
        channel = channel.add(&tensor(a, &a.transpose()));
    }
    channel = channel.scale(Complex64::new(1.0 / questions as f64, 0.0));
    let shifted = channel.sub(&CMatrix::identity(d2));
    nullspace(&shifted, 1e-9)
        .into_iter()
        .map(|v| mat_of(&v).expect("square length"))
        .collect()
}

/// Frobenius distance between the orthogonal projectors onto the spans of
/// two matrix families (compared inside C^{d²}).
pub fn span_projector_distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    let proj = |fam: &[CMatrix]| -> CMatrix {
        let vecs: Vec<CVector> = fam
            .iter()
            .map(|m| vec_of(m).expect("square family members"))
            .collect();
        // Orthonormalize before forming the projector.
        let mut ortho: Vec<CVector> = Vec::new();
        for v in vecs {
            let mut r = v;
            for o in &ortho {
                let c = o.inner(&r);
                r = r.sub(&o.scale(c));
            }
            let n = r.norm();
            if n > 1e-12 {
                ortho.push(r.scale(Complex64::new(1.0 / n, 0.0)));
            }
        }
        let d2 = ortho.first().map(|v| v.dim()).unwrap_or(0);
        let mut p = CMatrix::zeros(d2, d2);
        for o in &ortho {
            p = p.add(&CMatrix::projector(o));
        }
        p
    };
    proj(a).sub(&proj(b)).norm_fro()
}
