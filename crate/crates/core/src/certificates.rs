//! Quantitative self-testing machinery: the synchronicity operator and its
//! spectral-gap certificate, explicit robustness constants, junk-state
//! extraction, dilation discovery and verification, and moment-closeness
//! bounds.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{find_intertwiner, is_irreducible, OperatorFamily, Word};
use crate::correlation::l1_distance;
use crate::numerics::{
    bipartite_mat, eigh, isometry_defect, polar_isometry, random_gaussian, rho_seminorm, schmidt,
    tensor, CMatrix, CVector, DensityMatrix, SCHMIDT_RTOL,
};
use crate::strategy::{apply_left, apply_right, maximally_entangled, PmeStrategy, TensorStrategy};
use crate::{Error, Result};

/// Synchronicity operator Σ_{x,a} Ẽ_{x,a} ⊗ Ẽ_{x,a}ᵀ on C^{d²}: Hermitian,
/// positive semidefinite, with operator norm at most the question count.
pub fn sync_operator(s: &PmeStrategy) -> CMatrix {
    let d = s.dim();
    let mut m = CMatrix::zeros(d * d, d * d);
    for x in 0..s.questions() {
        for a in 0..s.answers() {
            let e = s.projection(x, a);
            m = m.add(&tensor(e, &e.transpose()));
        }
    }
    m
}

/// Spectral data of the synchronicity operator.
#[derive(Debug, Clone)]
pub struct SpectralCertificate {
    /// Question count.
    pub m: usize,
    /// Local dimension of the certified strategy.
    pub dim: usize,
    pub top_eigenvalue: f64,
    /// Largest eigenvalue below the top cluster; 0 for the one-dimensional
    /// degenerate case (flagged below), equal to the top when no second
    /// eigenvalue exists at dim > 1.
    pub lambda2: f64,
    /// Eigenvalues within 1e-8 of the top.
    pub top_multiplicity: usize,
    /// |<ψ̃|v_top>|² against the maximally entangled state.
    pub overlap_with_me_state: f64,
    /// Whether the projection family has trivial commutant.
    pub irreducible: bool,
    /// Set when the operator is a scalar and lambda2 is reported by
    /// convention.
    pub degenerate: bool,
}

impl SpectralCertificate {
    /// Certified spectral gap m − λ₂.
    pub fn gap(&self) -> f64 {
        self.m as f64 - self.lambda2
    }
}

/// Eigenvalue window counted into the top cluster.
const TOP_CLUSTER_TOL: f64 = 1e-8;

/// Eigendecomposes the synchronicity operator and reports the top
/// eigenvalue, its multiplicity, the second eigenvalue, and the overlap of
/// the top eigenvector with the maximally entangled state.
///
/// For irreducible strategies the certificate cross-checks the guaranteed
/// shape (top = m, multiplicity 1, overlap 1) and fails loudly if numerics
/// broke down.
pub fn spectral_certificate(s: &PmeStrategy) -> Result<SpectralCertificate> {
    let m_op = sync_operator(s);
    let (vals, vecs) = eigh(&m_op)?;
    let m = s.questions();
    let top = vals[0];
    let top_multiplicity = vals.iter().filter(|&&v| top - v <= TOP_CLUSTER_TOL).count();
    let degenerate = vals.len() == 1;
    let lambda2 = if degenerate {
        0.0
    } else if top_multiplicity < vals.len() {
        vals[top_multiplicity]
    } else {
        top
    };
    let me = maximally_entangled(s.dim())?;
    let overlap_with_me_state = me.inner(&vecs[0]).norm_sqr();
    let irreducible = is_irreducible(&OperatorFamily::from_pme(s));

    if irreducible {
        if (top - m as f64).abs() > 1e-8 {
            return Err(Error::CertificateInconsistent {
                reason: "irreducible strategy must have top eigenvalue equal to the question count",
            });
        }
        if !degenerate && top_multiplicity != 1 {
            return Err(Error::CertificateInconsistent {
                reason: "irreducible strategy must have a simple top eigenvalue",
            });
        }
        if !degenerate && overlap_with_me_state < 1.0 - 1e-8 {
            return Err(Error::CertificateInconsistent {
                reason: "top eigenvector must align with the maximally entangled state",
            });
        }
    }

    Ok(SpectralCertificate {
        m,
        dim: s.dim(),
        top_eigenvalue: top,
        lambda2,
        top_multiplicity,
        overlap_with_me_state,
        irreducible,
        degenerate,
    })
}

/// Explicit constants turning a spectral gap into a dilation accuracy:
/// the largest measurement accuracy ε′ compatible with the target ε under
///
/// ```text
/// ε′ < gap/(2mn+1),   β = sqrt(2(2mn+1)ε′/gap),   2ε′ + β + sqrt(5ε′+2β) ≤ ε.
/// ```
#[derive(Debug, Clone)]
pub struct RobustnessConstants {
    pub m: usize,
    pub n: usize,
    pub gap: f64,
    /// Target dilation accuracy.
    pub eps: f64,
    /// Largest admissible measurement accuracy, found by bisection.
    pub eps_prime: f64,
    pub beta: f64,
    /// The constructive half of the correlation-closeness radius; the other
    /// half comes from a compactness argument and carries no explicit value.
    pub delta_constructive: f64,
    /// Always `None`: the non-constructive half of the radius.
    pub delta_prime: Option<f64>,
}

fn dilation_accuracy(eps_prime: f64, factor: f64, gap: f64) -> (f64, f64) {
    let beta = (2.0 * factor * eps_prime / gap).sqrt();
    let total = 2.0 * eps_prime + beta + (5.0 * eps_prime + 2.0 * beta).sqrt();
    (beta, total)
}

/// Computes the largest ε′ satisfying both constraints, by bisection to
/// relative accuracy 1e-10. The returned lower bisection end guarantees the
/// inequality holds exactly as stated.
pub fn robustness_constants(
    cert: &SpectralCertificate,
    n: usize,
    eps: f64,
) -> Result<RobustnessConstants> {
    let gap = cert.gap();
    if gap <= 0.0 {
        return Err(Error::NonPositiveGap { gap });
    }
    if eps <= 0.0 {
        return Err(Error::InfeasibleTarget { eps });
    }
    let m = cert.m;
    let factor = (2 * m * n + 1) as f64;
    let cap = gap / factor;
    // Keep the first constraint strict.
    let eps_prime_max = cap * (1.0 - 1e-12);

    let (_, total_at_max) = dilation_accuracy(eps_prime_max, factor, gap);
    let eps_prime = if total_at_max <= eps {
        eps_prime_max
    } else {
        let mut lo = 0.0_f64;
        let mut hi = eps_prime_max;
        while hi - lo > 1e-10 * hi.max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            let (_, total) = dilation_accuracy(mid, factor, gap);
            if total <= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if eps_prime <= 0.0 {
        return Err(Error::InfeasibleTarget { eps });
    }
    let (beta, total) = dilation_accuracy(eps_prime, factor, gap);
    debug_assert!(total <= eps + 1e-15);
    Ok(RobustnessConstants {
        m,
        n,
        gap,
        eps,
        eps_prime,
        beta,
        delta_constructive: eps_prime,
        delta_prime: None,
    })
}

/// Reorders a vector from the dilated layout (C^d⊗C^{sA})⊗(C^d⊗C^{sB})
/// into the grouped layout (C^d⊗C^d)⊗(C^{sA}⊗C^{sB}).
pub fn to_ideal_aux_layout(v: &CVector, d: usize, sa: usize, sb: usize) -> Result<CVector> {
    if v.dim() != d * sa * d * sb {
        return Err(Error::DimensionMismatch {
            context: "layout regrouping",
            expected: d * sa * d * sb,
            got: v.dim(),
        });
    }
    let mut out = CVector::zeros(v.dim());
    for i in 0..d {
        for alpha in 0..sa {
            for j in 0..d {
                for beta in 0..sb {
                    let src = (i * sa + alpha) * (d * sb) + j * sb + beta;
                    let dst = (i * d + j) * (sa * sb) + alpha * sb + beta;
                    out[dst] = v[src];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`to_ideal_aux_layout`].
pub fn from_ideal_aux_layout(v: &CVector, d: usize, sa: usize, sb: usize) -> Result<CVector> {
    if v.dim() != d * sa * d * sb {
        return Err(Error::DimensionMismatch {
            context: "layout regrouping",
            expected: d * sa * d * sb,
            got: v.dim(),
        });
    }
    let mut out = CVector::zeros(v.dim());
    for i in 0..d {
        for alpha in 0..sa {
            for j in 0..d {
                for beta in 0..sb {
                    let src = (i * d + j) * (sa * sb) + alpha * sb + beta;
                    let dst = (i * sa + alpha) * (d * sb) + j * sb + beta;
                    out[dst] = v[src];
                }
            }
        }
    }
    Ok(out)
}

/// Local dilation witness: isometries into the ideal-times-auxiliary spaces
/// and the auxiliary state they extract.
#[derive(Debug, Clone)]
pub struct Dilation {
    iso_a: CMatrix,
    iso_b: CMatrix,
    aux: CVector,
    d: usize,
    s_a: usize,
    s_b: usize,
}

impl Dilation {
    /// Isometry-defect tolerance for the two local maps.
    pub const ISOMETRY_TOL: f64 = 1e-9;

    pub fn new(iso_a: CMatrix, iso_b: CMatrix, aux: CVector, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if iso_a.rows() % d != 0 || iso_b.rows() % d != 0 {
            return Err(Error::DimensionMismatch {
                context: "dilation target must factor through the ideal dimension",
                expected: d,
                got: iso_a.rows(),
            });
        }
        let s_a = iso_a.rows() / d;
        let s_b = iso_b.rows() / d;
        if aux.dim() != s_a * s_b {
            return Err(Error::DimensionMismatch {
                context: "auxiliary state dimension",
                expected: s_a * s_b,
                got: aux.dim(),
            });
        }
        for iso in [&iso_a, &iso_b] {
            let defect = isometry_defect(iso);
            if defect > Self::ISOMETRY_TOL {
                return Err(Error::PreconditionFailed {
                    what: "dilation map must be an isometry",
                    measured: defect,
                    allowed: Self::ISOMETRY_TOL,
                });
            }
        }
        aux.assert_unit(1e-9)?;
        Ok(Self {
            iso_a,
            iso_b,
            aux,
            d,
            s_a,
            s_b,
        })
    }

    /// Identity dilation of a strategy onto itself, with a scalar auxiliary
    /// state.
    pub fn identity(d: usize) -> Result<Self> {
        Self::new(
            CMatrix::identity(d),
            CMatrix::identity(d),
            CVector::from_real(&[1.0]),
            d,
        )
    }

    pub fn iso_a(&self) -> &CMatrix {
        &self.iso_a
    }

    pub fn iso_b(&self) -> &CMatrix {
        &self.iso_b
    }

    pub fn aux(&self) -> &CVector {
        &self.aux
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s_a(&self) -> usize {
        self.s_a
    }

    pub fn s_b(&self) -> usize {
        self.s_b
    }
}

/// (V_A ⊗ V_B)|u> for u on C^{ra}⊗C^{rb}.
fn apply_pair(va: &CMatrix, vb: &CMatrix, u: &CVector, ra: usize, rb: usize) -> Result<CVector> {
    let m = bipartite_mat(u, ra, rb)?;
    let w = va.mul(&m).mul(&vb.transpose());
    Ok(CVector::new(w.entries().to_vec()))
}

/// Contracts the first factor of a grouped vector against a reference:
/// out[s] = Σ_j conj(reference[j]) · v[j·S + s].
fn contract_first_factor(reference: &CVector, v: &CVector) -> CVector {
    let aux_dim = v.dim() / reference.dim();
    let mut out = CVector::zeros(aux_dim);
    for j in 0..reference.dim() {
        let r = reference[j].conj();
        if r == Complex64::new(0.0, 0.0) {
            continue;
        }
        for s in 0..aux_dim {
            let val = out[s] + r * v[j * aux_dim + s];
            out[s] = val;
        }
    }
    out
}

/// Residuals of a dilation witness.
#[derive(Debug, Clone)]
pub struct DilationReport {
    /// ‖(V_A ⊗ V_B)|ψ> − |ψ̃>|aux>‖.
    pub state_residual: f64,
    /// max over (x,y,a,b) of the measurement-action residual.
    pub max_measurement_residual: f64,
}

impl DilationReport {
    /// The accuracy ε witnessed by this report.
    pub fn epsilon(&self) -> f64 {
        self.state_residual.max(self.max_measurement_residual)
    }
}

/// Evaluates both dilation residuals: the mapped state against the ideal
/// state with auxiliary, and every mapped measurement action against the
/// ideal action. The strategy witnesses a local ε-dilation iff both values
/// are at most ε.
pub fn verify_dilation(
    s: &TensorStrategy,
    s_tilde: &PmeStrategy,
    dil: &Dilation,
) -> Result<DilationReport> {
    let d = s_tilde.dim();
    if dil.d() != d {
        return Err(Error::DimensionMismatch {
            context: "dilation ideal dimension",
            expected: d,
            got: dil.d(),
        });
    }
    if dil.iso_a().cols() != s.dim_a() || dil.iso_b().cols() != s.dim_b() {
        return Err(Error::DimensionMismatch {
            context: "dilation domain",
            expected: s.dim_a(),
            got: dil.iso_a().cols(),
        });
    }
    if s.questions() != s_tilde.questions()
        || s.answers_a() != s_tilde.answers()
        || s.answers_b() != s_tilde.answers()
    {
        return Err(Error::DimensionMismatch {
            context: "question/answer shape between strategy and ideal",
            expected: s_tilde.questions(),
            got: s.questions(),
        });
    }
    let (sa, sb) = (dil.s_a(), dil.s_b());
    let me = maximally_entangled(d)?;

    let mapped = apply_pair(dil.iso_a(), dil.iso_b(), s.state(), s.dim_a(), s.dim_b())?;
    let grouped = to_ideal_aux_layout(&mapped, d, sa, sb)?;
    let ideal_state = me.tensor(dil.aux());
    let state_residual = grouped.sub(&ideal_state).norm();

    let mut max_measurement_residual = 0.0_f64;
    for x in 0..s.questions() {
        for a in 0..s.answers_a() {
            let e_psi = apply_left(&s.alice(x).effects()[a], s.state(), s.dim_a(), s.dim_b());
            let ideal_e_me = apply_left(s_tilde.projection(x, a), &me, d, d);
            for y in 0..s.questions() {
                for b in 0..s.answers_b() {
                    let ef_psi =
                        apply_right(&s.bob(y).effects()[b], &e_psi, s.dim_a(), s.dim_b());
                    let mapped = apply_pair(dil.iso_a(), dil.iso_b(), &ef_psi, s.dim_a(), s.dim_b())?;
                    let grouped = to_ideal_aux_layout(&mapped, d, sa, sb)?;
                    let ideal_core = apply_right(&s_tilde.bob_projection(y, b), &ideal_e_me, d, d);
                    let ideal = ideal_core.tensor(dil.aux());
                    max_measurement_residual =
                        max_measurement_residual.max(grouped.sub(&ideal).norm());
                }
            }
        }
    }
    Ok(DilationReport {
        state_residual,
        max_measurement_residual,
    })
}

/// Splits a mapped state into its top-eigenspace weight and the auxiliary
/// state it carries there: with a multiplicity-one certificate the top
/// eigenprojection of the synchronicity operator (tensored with the
/// auxiliary identity) is |ψ̃><ψ̃| ⊗ I, so the projected vector factors as
/// α·|ψ̃>|aux>.
///
/// `mapped_state` must be given in the grouped (C^d⊗C^d)⊗aux layout.
pub fn extract_junk(s_tilde: &PmeStrategy, mapped_state: &CVector) -> Result<(f64, CVector)> {
    let d = s_tilde.dim();
    let d2 = d * d;
    if mapped_state.dim() % d2 != 0 || mapped_state.dim() == 0 {
        return Err(Error::DimensionMismatch {
            context: "mapped state must live on the ideal pair times auxiliary",
            expected: d2,
            got: mapped_state.dim(),
        });
    }
    mapped_state.assert_unit(1e-9)?;
    let me = maximally_entangled(d)?;
    let chi = contract_first_factor(&me, mapped_state);
    let alpha = chi.norm();
    if alpha <= 1e-12 {
        return Err(Error::OrthogonalToTopEigenspace { alpha });
    }
    Ok((alpha, chi.scale(Complex64::new(1.0 / alpha, 0.0))))
}

/// Residual threshold of the exact-dilation route.
pub const EXACT_DILATION_TOL: f64 = 1e-7;

/// Recovers the exact local dilation of a full-rank strategy that induces
/// the ideal correlation: block-diagonalizes each party's measurement
/// algebra, aligns every irreducible block with the ideal projections via
/// the (unique) intertwiner, and extracts the auxiliary state from the
/// mapped shared state.
pub fn find_dilation_exact(s: &TensorStrategy, s_tilde: &PmeStrategy) -> Result<Dilation> {
    let d = s_tilde.dim();
    let ideal_family = OperatorFamily::from_pme(s_tilde);
    if !is_irreducible(&ideal_family) {
        return Err(Error::PreconditionFailed {
            what: "ideal strategy must be irreducible",
            measured: 0.0,
            allowed: 0.0,
        });
    }
    let dist = l1_distance(&s.correlation()?, &s_tilde.correlation()?)?;
    if dist > 1e-9 {
        return Err(Error::PreconditionFailed {
            what: "strategy must induce the ideal correlation exactly",
            measured: dist,
            allowed: 1e-9,
        });
    }
    let sc = schmidt(s.state(), s.dim_a(), s.dim_b())?;
    let rank = sc.rank(SCHMIDT_RTOL);
    if rank != s.dim_a() || rank != s.dim_b() {
        return Err(Error::PreconditionFailed {
            what: "strategy must be full-rank (restrict to support first)",
            measured: rank as f64,
            allowed: s.dim_a().min(s.dim_b()) as f64,
        });
    }

    let side = |effects_by_question: Vec<Vec<CMatrix>>,
                ideal: Vec<CMatrix>|
     -> Result<CMatrix> {
        let mut labels = Vec::new();
        let mut ops = Vec::new();
        for (x, per_q) in effects_by_question.iter().enumerate() {
            for (a, e) in per_q.iter().enumerate() {
                labels.push((x, a));
                ops.push(e.clone());
            }
        }
        let fam = OperatorFamily::new(labels, ops)?;
        let bd = crate::algebra::block_diagonalize(&fam)?;
        if bd.blocks.len() != 1 {
            return Err(Error::IncompatibleBlocks {
                reason: "measurement algebra splits into inequivalent irreducible blocks",
            });
        }
        let (di, si) = bd.blocks[0];
        if di != d {
            return Err(Error::IncompatibleBlocks {
                reason: "irreducible block dimension differs from the ideal dimension",
            });
        }
        let w = find_intertwiner(&bd.irrep_generators[0], &ideal).ok_or(
            Error::IncompatibleBlocks {
                reason: "irreducible block is not equivalent to the ideal projections",
            },
        )?;
        Ok(tensor(&w, &CMatrix::identity(si)).mul(&bd.unitary))
    };

    let alice_effects: Vec<Vec<CMatrix>> = (0..s.questions())
        .map(|x| s.alice(x).effects().to_vec())
        .collect();
    let ideal_alice: Vec<CMatrix> = ideal_family.operators().to_vec();
    let va = side(alice_effects, ideal_alice)?;

    let bob_effects: Vec<Vec<CMatrix>> = (0..s.questions())
        .map(|y| s.bob(y).effects().to_vec())
        .collect();
    let ideal_bob: Vec<CMatrix> = (0..s_tilde.questions())
        .flat_map(|y| (0..s_tilde.answers()).map(move |b| (y, b)))
        .map(|(y, b)| s_tilde.bob_projection(y, b))
        .collect();
    let vb = side(bob_effects, ideal_bob)?;

    let sa = va.rows() / d;
    let sb = vb.rows() / d;
    let mapped = apply_pair(&va, &vb, s.state(), s.dim_a(), s.dim_b())?;
    let grouped = to_ideal_aux_layout(&mapped, d, sa, sb)?;
    let (_, aux) = extract_junk(s_tilde, &grouped)?;

    let dil = Dilation::new(va, vb, aux, d)?;
    let report = verify_dilation(s, s_tilde, &dil)?;
    if report.epsilon() > EXACT_DILATION_TOL {
        return Err(Error::IncompatibleBlocks {
            reason: "recovered dilation exceeds the exact-route residual tolerance",
        });
    }
    Ok(dil)
}

/// Options for the best-effort numeric dilation search.
#[derive(Debug, Clone)]
pub struct NumericDilationOptions {
    /// Alternating-update sweeps; the loop stops early once the seminorm
    /// objective changes by less than 1e-12 relatively.
    pub iterations: usize,
    /// Mandatory seed for the random initialization.
    pub seed: u64,
    /// Auxiliary dimension for Alice; defaults to ceil(dim_a / d).
    pub aux_dim_a: Option<usize>,
    /// Auxiliary dimension for Bob; defaults to ceil(dim_b / d).
    pub aux_dim_b: Option<usize>,
}

impl NumericDilationOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            iterations: 200,
            seed,
            aux_dim_a: None,
            aux_dim_b: None,
        }
    }
}

/// Relative objective-change threshold for early stopping.
const NUMERIC_EARLY_STOP: f64 = 1e-12;

/// Best-effort dilation search by alternating orthogonal-Procrustes updates
/// of the two isometries against the measurement-action targets, with the
/// auxiliary state re-extracted each sweep. Deterministic under a fixed
/// seed; makes no optimality claim.
pub fn find_dilation_numeric(
    s: &TensorStrategy,
    s_tilde: &PmeStrategy,
    opts: &NumericDilationOptions,
) -> Result<Dilation> {
    let d = s_tilde.dim();
    if s.questions() != s_tilde.questions() || s.answers_a() != s_tilde.answers() {
        return Err(Error::DimensionMismatch {
            context: "question/answer shape between strategy and ideal",
            expected: s_tilde.questions(),
            got: s.questions(),
        });
    }
    let (ra, rb) = (s.dim_a(), s.dim_b());
    let sa = opts.aux_dim_a.unwrap_or(ra.div_ceil(d)).max(1);
    let sb = opts.aux_dim_b.unwrap_or(rb.div_ceil(d)).max(1);
    if d * sa < ra || d * sb < rb {
        return Err(Error::DimensionMismatch {
            context: "auxiliary dimension too small for an isometry",
            expected: ra.div_ceil(d),
            got: sa.min(sb),
        });
    }
    let me = maximally_entangled(d)?;
    let (rho_a, rho_b) = s.reduced_states()?;

    // Source vectors: the bare state plus every measurement action.
    let mut sources: Vec<CVector> = vec![s.state().clone()];
    // Ideal cores in the (d⊗d) factor, paired with the sources.
    let mut cores: Vec<CVector> = vec![me.clone()];
    for x in 0..s.questions() {
        for a in 0..s.answers_a() {
            let e_psi = apply_left(&s.alice(x).effects()[a], s.state(), ra, rb);
            let core_e = apply_left(s_tilde.projection(x, a), &me, d, d);
            for y in 0..s.questions() {
                for b in 0..s.answers_b() {
                    sources.push(apply_right(&s.bob(y).effects()[b], &e_psi, ra, rb));
                    cores.push(apply_right(&s_tilde.bob_projection(y, b), &core_e, d, d));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut va = polar_isometry(&random_gaussian(&mut rng, d * sa, ra));
    let mut vb = polar_isometry(&random_gaussian(&mut rng, d * sb, rb));
    let mut aux = {
        let g = random_gaussian(&mut rng, sa * sb, 1);
        CVector::new(g.entries().to_vec()).normalize()
    };

    let ideal_alice: Vec<(usize, usize)> = (0..s.questions())
        .flat_map(|x| (0..s.answers_a()).map(move |a| (x, a)))
        .collect();

    let objective = |va: &CMatrix, vb: &CMatrix| -> Result<f64> {
        let mut obj = 0.0;
        for &(x, a) in &ideal_alice {
            let lifted = va
                .adjoint()
                .mul(&tensor(s_tilde.projection(x, a), &CMatrix::identity(sa)))
                .mul(va);
            let r = rho_seminorm(&s.alice(x).effects()[a].sub(&lifted), &rho_a)?;
            obj += r * r;
        }
        for &(y, b) in &ideal_alice {
            let lifted = vb
                .adjoint()
                .mul(&tensor(&s_tilde.bob_projection(y, b), &CMatrix::identity(sb)))
                .mul(vb);
            let r = rho_seminorm(&s.bob(y).effects()[b].sub(&lifted), &rho_b)?;
            obj += r * r;
        }
        Ok(obj)
    };

    let mut prev_obj = f64::INFINITY;
    for _ in 0..opts.iterations.max(1) {
        // Targets in the dilated layout for the current auxiliary state.
        let targets: Vec<CVector> = cores
            .iter()
            .map(|c| from_ideal_aux_layout(&c.tensor(&aux), d, sa, sb))
            .collect::<Result<Vec<_>>>()?;

        // Procrustes update of V_A.
        let mut grad_a = CMatrix::zeros(d * sa, ra);
        for (t, u) in targets.iter().zip(&sources) {
            let tm = bipartite_mat(t, d * sa, d * sb)?;
            let um = bipartite_mat(u, ra, rb)?;
            grad_a = grad_a.add(&tm.mul(&vb.conjugate()).mul(&um.adjoint()));
        }
        va = polar_isometry(&grad_a);

        // Procrustes update of V_B.
        let mut grad_b = CMatrix::zeros(d * sb, rb);
        for (t, u) in targets.iter().zip(&sources) {
            let tm = bipartite_mat(t, d * sa, d * sb)?;
            let um = bipartite_mat(u, ra, rb)?;
            grad_b = grad_b.add(&tm.adjoint().mul(&va).mul(&um).conjugate());
        }
        vb = polar_isometry(&grad_b);

        // Re-extract the best auxiliary state for the new isometries.
        let mut chi = CVector::zeros(sa * sb);
        for (c, u) in cores.iter().zip(&sources) {
            let mapped = apply_pair(&va, &vb, u, ra, rb)?;
            let grouped = to_ideal_aux_layout(&mapped, d, sa, sb)?;
            chi = chi.add(&contract_first_factor(c, &grouped));
        }
        if chi.norm() > 1e-14 {
            aux = chi.normalize();
        }

        let obj = objective(&va, &vb)?;
        if (prev_obj - obj).abs() <= NUMERIC_EARLY_STOP * obj.max(1e-300) {
            prev_obj = obj;
            break;
        }
        prev_obj = obj;
    }
    let _ = prev_obj;
    Dilation::new(va, vb, aux, d)
}

/// Result of [`moment_gap`].
#[derive(Debug, Clone)]
pub struct MomentGapReport {
    /// |ρ̃(α⊗β) − ρ(α⊗β)|.
    pub gap: f64,
    /// ((n+5)(l(α)+l(β)) + 2)·ε with ε the verified dilation accuracy.
    pub bound: f64,
    /// The dilation accuracy used in the bound.
    pub epsilon: f64,
}

/// Compares the two strategies' word-moment expectations and checks the
/// closeness bound implied by the verified dilation accuracy. Fails with
/// [`Error::BoundViolated`] if the guaranteed inequality breaks, which
/// signals numerical breakdown rather than a bad input.
pub fn moment_gap(
    s: &TensorStrategy,
    s_tilde: &PmeStrategy,
    dil: &Dilation,
    word_a: &Word,
    word_b: &Word,
) -> Result<MomentGapReport> {
    let report = verify_dilation(s, s_tilde, dil)?;
    let epsilon = report.epsilon();
    let d = s_tilde.dim();
    let me = maximally_entangled(d)?;

    let prod_over = |letters: &[(usize, usize)],
                     fetch: &dyn Fn(usize, usize) -> Result<CMatrix>,
                     dim: usize|
     -> Result<CMatrix> {
        let mut acc = CMatrix::identity(dim);
        for &(x, a) in letters {
            acc = acc.mul(&fetch(x, a)?);
        }
        Ok(acc)
    };

    let fetch_alice = |x: usize, a: usize| -> Result<CMatrix> {
        if x >= s.questions() || a >= s.answers_a() {
            return Err(Error::UnknownGenerator { x, a });
        }
        Ok(s.alice(x).effects()[a].clone())
    };
    let fetch_bob = |y: usize, b: usize| -> Result<CMatrix> {
        if y >= s.questions() || b >= s.answers_b() {
            return Err(Error::UnknownGenerator { x: y, a: b });
        }
        Ok(s.bob(y).effects()[b].clone())
    };
    let fetch_ideal_a = |x: usize, a: usize| -> Result<CMatrix> {
        if x >= s_tilde.questions() || a >= s_tilde.answers() {
            return Err(Error::UnknownGenerator { x, a });
        }
        Ok(s_tilde.projection(x, a).clone())
    };
    let fetch_ideal_b = |y: usize, b: usize| -> Result<CMatrix> {
        if y >= s_tilde.questions() || b >= s_tilde.answers() {
            return Err(Error::UnknownGenerator { x: y, a: b });
        }
        Ok(s_tilde.bob_projection(y, b))
    };

    let ea = prod_over(&word_a.letters, &fetch_alice, s.dim_a())?;
    let fb = prod_over(&word_b.letters, &fetch_bob, s.dim_b())?;
    let value = {
        let acted = apply_right(&fb, &apply_left(&ea, s.state(), s.dim_a(), s.dim_b()), s.dim_a(), s.dim_b());
        s.state().inner(&acted)
    };

    let ea_t = prod_over(&word_a.letters, &fetch_ideal_a, d)?;
    let fb_t = prod_over(&word_b.letters, &fetch_ideal_b, d)?;
    let ideal_value = {
        let acted = apply_right(&fb_t, &apply_left(&ea_t, &me, d, d), d, d);
        me.inner(&acted)
    };

    let gap = (ideal_value - value).norm();
    let n = s_tilde.answers() as f64;
    let bound = ((n + 5.0) * (word_a.len() + word_b.len()) as f64 + 2.0) * epsilon;
    if gap > bound + 1e-9 {
        return Err(Error::BoundViolated {
            what: "moment closeness under the verified dilation",
            lhs: gap,
            rhs: bound + 1e-9,
        });
    }
    Ok(MomentGapReport { gap, bound, epsilon })
}

/// Result of [`eigengap_overlap_bound`].
#[derive(Debug, Clone)]
pub struct OverlapBoundReport {
    /// 1 − ε/(λ₁ − λ₂).
    pub lower_bound: f64,
    /// ‖Q₁ ξ‖², the actual top-eigenspace weight.
    pub actual: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// For a PSD matrix with a spectral gap and a unit vector whose Rayleigh
/// quotient is ε-close to the top eigenvalue, bounds the vector's weight in
/// the top eigenspace from below and checks the bound against the actual
/// weight.
pub fn eigengap_overlap_bound(
    a: &CMatrix,
    xi: &CVector,
    eps: f64,
) -> Result<OverlapBoundReport> {
    let (vals, vecs) = eigh(a)?;
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -1e-10 {
        return Err(Error::PreconditionFailed {
            what: "matrix must be positive semidefinite",
            measured: min,
            allowed: -1e-10,
        });
    }
    xi.assert_unit(1e-9)?;
    let lambda1 = vals[0];
    let cluster_tol = 1e-10 * lambda1.abs().max(1.0);
    let multiplicity = vals.iter().filter(|&&v| lambda1 - v <= cluster_tol).count();
    if multiplicity == vals.len() {
        return Err(Error::PreconditionFailed {
            what: "matrix must have at least two distinct eigenvalues",
            measured: multiplicity as f64,
            allowed: (vals.len() - 1) as f64,
        });
    }
    let lambda2 = vals[multiplicity];
    let gap = lambda1 - lambda2;
    if gap <= 1e-10 {
        return Err(Error::NonPositiveGap { gap });
    }
    let rayleigh = xi.inner(&a.mul_vec(xi)).re;
    if rayleigh < lambda1 - eps - 1e-12 {
        return Err(Error::PreconditionFailed {
            what: "Rayleigh quotient must be eps-close to the top eigenvalue",
            measured: lambda1 - rayleigh,
            allowed: eps,
        });
    }
    let mut weight = 0.0;
    for v in vecs.iter().take(multiplicity) {
        weight += v.inner(xi).norm_sqr();
    }
    let lower_bound = 1.0 - eps / gap;
    if weight < lower_bound - 1e-10 {
        return Err(Error::BoundViolated {
            what: "top-eigenspace overlap bound",
            lhs: lower_bound,
            rhs: weight,
        });
    }
    Ok(OverlapBoundReport {
        lower_bound,
        actual: weight,
        lambda1,
        lambda2,
    })
}

/// Result of [`tensor_perturbation_bound`].
#[derive(Debug, Clone)]
pub struct TensorPerturbationReport {
    /// |<ψ|(X₁⊗Y₁ − X₂⊗Y₂)|ψ>| and its seminorm bound.
    pub expectation_gap: f64,
    pub expectation_bound: f64,
    /// ‖(X₁⊗Y₁ − X₂⊗Y₂)|ψ>‖ and its mixed seminorm/operator-norm bound.
    pub vector_gap: f64,
    pub vector_bound: f64,
}

/// Evaluates both perturbation inequalities for a bipartite state:
///
/// ```text
/// |<ψ|(X₁⊗Y₁ − X₂⊗Y₂)|ψ>| ≤ ‖X₁−X₂‖_ρA·‖Y₂†‖_ρB + ‖Y₁−Y₂‖_ρB·‖X₁†‖_ρA
/// ‖(X₁⊗Y₁ − X₂⊗Y₂)|ψ>‖    ≤ ‖X₁−X₂‖_ρA·‖Y₂‖    + ‖Y₁−Y₂‖_ρB·‖X₁‖
/// ```
pub fn tensor_perturbation_bound(
    x1: &CMatrix,
    x2: &CMatrix,
    y1: &CMatrix,
    y2: &CMatrix,
    psi: &CVector,
) -> Result<TensorPerturbationReport> {
    let da = x1.rows();
    let db = y1.rows();
    for x in [x1, x2] {
        if x.rows() != da || x.cols() != da {
            return Err(Error::DimensionMismatch {
                context: "first-factor operators",
                expected: da,
                got: x.rows(),
            });
        }
    }
    for y in [y1, y2] {
        if y.rows() != db || y.cols() != db {
            return Err(Error::DimensionMismatch {
                context: "second-factor operators",
                expected: db,
                got: y.rows(),
            });
        }
    }
    if psi.dim() != da * db {
        return Err(Error::DimensionMismatch {
            context: "bipartite state",
            expected: da * db,
            got: psi.dim(),
        });
    }
    psi.assert_unit(1e-9)?;
    let rho_full = CMatrix::projector(psi);
    let rho_a = DensityMatrix::new(crate::numerics::partial_trace(
        &rho_full,
        da,
        db,
        crate::numerics::Keep::A,
    )?)?;
    let rho_b = DensityMatrix::new(crate::numerics::partial_trace(
        &rho_full,
        da,
        db,
        crate::numerics::Keep::B,
    )?)?;

    let diff_vec = {
        let first = apply_right(y1, &apply_left(x1, psi, da, db), da, db);
        let second = apply_right(y2, &apply_left(x2, psi, da, db), da, db);
        first.sub(&second)
    };
    let expectation_gap = psi.inner(&diff_vec).norm();
    let vector_gap = diff_vec.norm();

    let dx = rho_seminorm(&x1.sub(x2), &rho_a)?;
    let dy = rho_seminorm(&y1.sub(y2), &rho_b)?;
    let expectation_bound =
        dx * rho_seminorm(&y2.adjoint(), &rho_b)? + dy * rho_seminorm(&x1.adjoint(), &rho_a)?;
    let vector_bound = dx * y2.norm_op() + dy * x1.norm_op();

    if expectation_gap > expectation_bound + 1e-9 {
        return Err(Error::BoundViolated {
            what: "expectation perturbation bound",
            lhs: expectation_gap,
            rhs: expectation_bound + 1e-9,
        });
    }
    if vector_gap > vector_bound + 1e-9 {
        return Err(Error::BoundViolated {
            what: "vector perturbation bound",
            lhs: vector_gap,
            rhs: vector_bound + 1e-9,
        });
    }
    Ok(TensorPerturbationReport {
        expectation_gap,
        expectation_bound,
        vector_gap,
        vector_bound,
    })
}

/// Result of [`projection_closeness_bound`].
#[derive(Debug, Clone)]
pub struct ProjectionClosenessReport {
    pub lhs: f64,
    pub rhs: f64,
}

/// For vectors with ε₁-close squared norms and ‖ξ − Pη‖ ≤ ε₂ under a
/// projection P, checks ‖ξ − η‖ ≤ ε₂ + sqrt(ε₁ + (‖ξ‖+‖η‖)ε₂).
pub fn projection_closeness_bound(
    xi: &CVector,
    eta: &CVector,
    p: &CMatrix,
    eps1: f64,
    eps2: f64,
) -> Result<ProjectionClosenessReport> {
    if xi.dim() != eta.dim() || p.rows() != xi.dim() || !p.is_square() {
        return Err(Error::DimensionMismatch {
            context: "projection closeness shapes",
            expected: xi.dim(),
            got: p.rows(),
        });
    }
    let proj_defect = p.mul(p).sub(p).norm_fro().max(p.hermiticity_defect());
    if proj_defect > 1e-9 {
        return Err(Error::PreconditionFailed {
            what: "P must be an orthogonal projection",
            measured: proj_defect,
            allowed: 1e-9,
        });
    }
    let norm_gap = (xi.norm().powi(2) - eta.norm().powi(2)).abs();
    if norm_gap > eps1 + 1e-12 {
        return Err(Error::PreconditionFailed {
            what: "squared norms must be eps1-close",
            measured: norm_gap,
            allowed: eps1,
        });
    }
    let proj_gap = xi.sub(&p.mul_vec(eta)).norm();
    if proj_gap > eps2 + 1e-12 {
        return Err(Error::PreconditionFailed {
            what: "xi must be eps2-close to the projected eta",
            measured: proj_gap,
            allowed: eps2,
        });
    }
    let lhs = xi.sub(eta).norm();
    let rhs = eps2 + (eps1 + (xi.norm() + eta.norm()) * eps2).sqrt();
    if lhs > rhs + 1e-9 {
        return Err(Error::BoundViolated {
            what: "projection closeness bound",
            lhs,
            rhs: rhs + 1e-9,
        });
    }
    Ok(ProjectionClosenessReport { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::numerics::random_unitary;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sync_operator_scalar_case() {
        let s = corpus::trivial_pme(3, 2);
        let m = sync_operator(&s);
        assert_eq!(m.rows(), 1);
        assert!((m[(0, 0)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sync_operator_computational_basis() {
        let s = corpus::computational_qubit_pme();
        let m = sync_operator(&s);
        let expected = CMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(m.sub(&expected).norm_fro() < 1e-12);
    }

    #[test]
    fn sync_operator_fixes_maximally_entangled_state() {
        let s = corpus::two_mub_qubit_pme();
        let m = sync_operator(&s);
        let me = maximally_entangled(2).unwrap();
        let res = m.mul_vec(&me).sub(&me.scale(c(2.0, 0.0))).norm();
        assert!(res < 1e-12);
    }

    #[test]
    fn sync_operator_is_psd_with_norm_at_most_m() {
        for s in [
            corpus::trivial_pme(2, 2),
            corpus::computational_qubit_pme(),
            corpus::two_mub_qubit_pme(),
            corpus::magic_square_pme(),
        ] {
            let m = sync_operator(&s);
            let (vals, _) = eigh(&m).unwrap();
            assert!(vals.last().unwrap() >= &-1e-10);
            assert!(vals[0] <= s.questions() as f64 + 1e-9);
        }
    }

    #[test]
    fn certificate_two_mub_spectrum() {
        // Oracle: the 4x4 operator in the parity-split basis has spectrum
        // {2, 1, 1, 0}; verified against the hand-expanded characteristic
        // polynomial λ(λ−1)²(λ−2).
        let s = corpus::two_mub_qubit_pme();
        let m = sync_operator(&s);
        let (vals, _) = eigh(&m).unwrap();
        let expected = [2.0, 1.0, 1.0, 0.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-10, "eigenvalue {v} vs {e}");
        }
        // Characteristic polynomial check at a few sample points.
        for probe in [0.5_f64, 1.5, 3.0] {
            let char_val: f64 = vals.iter().map(|v| probe - v).product();
            let oracle = probe * (probe - 1.0).powi(2) * (probe - 2.0);
            assert!((char_val - oracle).abs() < 1e-8);
        }

        let cert = spectral_certificate(&s).unwrap();
        assert!((cert.top_eigenvalue - 2.0).abs() < 1e-10);
        assert_eq!(cert.top_multiplicity, 1);
        assert!((cert.lambda2 - 1.0).abs() < 1e-10);
        assert!(cert.overlap_with_me_state > 1.0 - 1e-10);
        assert!(cert.irreducible);
        assert!((cert.gap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn certificate_flags_reducible_embedding() {
        // Doubly embedded computational basis: reducible, multiplicity > 1.
        let s = corpus::computational_qubit_pme();
        let mut embedded = Vec::new();
        for x in 0..s.questions() {
            let mut per_q = Vec::new();
            for a in 0..s.answers() {
                let p = s.projection(x, a);
                let mut big = CMatrix::zeros(4, 4);
                for i in 0..2 {
                    for j in 0..2 {
                        big[(i, j)] = p[(i, j)];
                        big[(2 + i, 2 + j)] = p[(i, j)];
                    }
                }
                per_q.push(big);
            }
            embedded.push(per_q);
        }
        let s2 = PmeStrategy::new(embedded).unwrap();
        let cert = spectral_certificate(&s2).unwrap();
        assert!(!cert.irreducible);
        assert!(cert.top_multiplicity >= 2);
    }

    #[test]
    fn certificate_degenerate_dimension_one() {
        let s = corpus::trivial_pme(2, 2);
        let cert = spectral_certificate(&s).unwrap();
        assert!(cert.degenerate);
        assert_eq!(cert.lambda2, 0.0);
        assert!((cert.gap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn robustness_constants_hand_checked_point() {
        let cert = SpectralCertificate {
            m: 2,
            dim: 2,
            top_eigenvalue: 2.0,
            lambda2: 1.0,
            top_multiplicity: 1,
            overlap_with_me_state: 1.0,
            irreducible: true,
            degenerate: false,
        };
        // Target chosen so the active constraint pins ε′ = 0.001.
        let (beta_ref, eps_target) = dilation_accuracy(0.001, 9.0, 1.0);
        let rc = robustness_constants(&cert, 2, eps_target).unwrap();
        assert!((rc.eps_prime - 0.001).abs() < 1e-9);
        assert!((rc.beta - beta_ref).abs() < 1e-9);
        assert!((rc.beta - 0.018_f64.sqrt()).abs() < 1e-9);
        assert!((rc.beta - 0.134164).abs() < 1e-6);
        // The constraint is tight at the bisection output.
        let (_, total) = dilation_accuracy(rc.eps_prime, 9.0, 1.0);
        assert!((total - eps_target).abs() < 1e-9);
        assert!(rc.delta_prime.is_none());
        assert!((rc.delta_constructive - rc.eps_prime).abs() < 1e-15);
    }

    #[test]
    fn robustness_constants_monotone_and_feasible() {
        let cert = spectral_certificate(&corpus::two_mub_qubit_pme()).unwrap();
        let mut last = 0.0;
        for eps in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let rc = robustness_constants(&cert, 2, eps).unwrap();
            assert!(rc.eps_prime >= last);
            last = rc.eps_prime;
            let factor = (2 * rc.m * rc.n + 1) as f64;
            assert!(rc.eps_prime < rc.gap / factor);
            let (beta, total) = dilation_accuracy(rc.eps_prime, factor, rc.gap);
            assert!((beta - rc.beta).abs() <= 1e-12);
            assert!(total <= eps + 1e-12);
        }
        assert!(matches!(
            robustness_constants(&cert, 2, 0.0),
            Err(Error::InfeasibleTarget { .. })
        ));
    }

    #[test]
    fn layout_roundtrip() {
        let mut rng = StdRng::seed_from_u64(41);
        let v = CVector::new(
            random_gaussian(&mut rng, 2 * 3 * 2 * 2, 1).entries().to_vec(),
        )
        .normalize();
        let grouped = to_ideal_aux_layout(&v, 2, 3, 2).unwrap();
        let back = from_ideal_aux_layout(&grouped, 2, 3, 2).unwrap();
        assert!(back.sub(&v).norm() < 1e-15);
    }

    #[test]
    fn identity_dilation_has_zero_residuals() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let s = s_tilde.as_tensor().unwrap();
        let dil = Dilation::identity(2).unwrap();
        let report = verify_dilation(&s, &s_tilde, &dil).unwrap();
        assert!(report.state_residual < 1e-12);
        assert!(report.max_measurement_residual < 1e-12);
    }

    #[test]
    fn extract_junk_exact_and_orthogonal_cases() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let me = maximally_entangled(2).unwrap();
        let aux0 = CVector::from_real(&[0.0, 1.0, 0.0]);
        let mapped = me.tensor(&aux0);
        let (alpha, aux) = extract_junk(&s_tilde, &mapped).unwrap();
        assert!((alpha - 1.0).abs() < 1e-12);
        assert!(aux.sub(&aux0).norm() < 1e-12);

        // A state orthogonal to the top eigenspace: (|01> component only).
        let mut orth = CVector::zeros(4 * 3);
        orth[1 * 3 + 0] = c(1.0, 0.0);
        assert!(matches!(
            extract_junk(&s_tilde, &orth),
            Err(Error::OrthogonalToTopEigenspace { .. })
        ));
    }

    #[test]
    fn extract_junk_recovers_mixing_angle() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let me = maximally_entangled(2).unwrap();
        let aux0 = CVector::from_real(&[1.0, 0.0]);
        let theta = 0.3_f64;
        // cosθ·|ψ̃>|aux0> + sinθ·(orthogonal: |01> ⊗ e1).
        let mut v = me.tensor(&aux0).scale(c(theta.cos(), 0.0));
        v[1 * 2 + 1] += c(theta.sin(), 0.0);
        let (alpha, aux) = extract_junk(&s_tilde, &v).unwrap();
        assert!((alpha - theta.cos()).abs() < 1e-10);
        assert!(aux.sub(&aux0).norm() < 1e-10);
    }

    #[test]
    fn exact_dilation_on_planted_instance() {
        let mut rng = StdRng::seed_from_u64(43);
        let s_tilde = corpus::two_mub_qubit_pme();
        let (s, _, _) = planted_instance(&s_tilde, 2, 2, &mut rng);
        let dil = find_dilation_exact(&s, &s_tilde).unwrap();
        assert_eq!(dil.s_a(), 2);
        assert_eq!(dil.s_b(), 2);
        let report = verify_dilation(&s, &s_tilde, &dil).unwrap();
        assert!(report.epsilon() <= 1e-10, "epsilon {}", report.epsilon());
    }

    #[test]
    fn exact_dilation_identity_instance() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let s = s_tilde.as_tensor().unwrap();
        let dil = find_dilation_exact(&s, &s_tilde).unwrap();
        assert_eq!(dil.s_a(), 1);
        let report = verify_dilation(&s, &s_tilde, &dil).unwrap();
        assert!(report.epsilon() <= 1e-10);
    }

    /// Conjugated (Ẽ⊗I_s) instance with a planted full-rank junk state.
    pub(crate) fn planted_instance(
        s_tilde: &PmeStrategy,
        sa: usize,
        sb: usize,
        rng: &mut StdRng,
    ) -> (TensorStrategy, CMatrix, CMatrix) {
        use crate::strategy::Povm;
        let d = s_tilde.dim();
        let ua = random_unitary(rng, d * sa);
        let ub = random_unitary(rng, d * sb);
        // Junk with a fixed full-rank spectrum, rotated by local unitaries.
        let rank = sa.min(sb);
        let spectrum: Vec<f64> = (0..rank).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let norm: f64 = spectrum.iter().map(|s| s * s).sum::<f64>().sqrt();
        let mut junk = CVector::zeros(sa * sb);
        for (i, w) in spectrum.iter().enumerate() {
            junk[i * sb + i] = c(w / norm, 0.0);
        }
        let ja = random_unitary(rng, sa);
        let jb = random_unitary(rng, sb);
        let junk = apply_pair(&ja, &jb, &junk, sa, sb).unwrap();

        let me = maximally_entangled(d).unwrap();
        let grouped = me.tensor(&junk);
        let dilated = from_ideal_aux_layout(&grouped, d, sa, sb).unwrap();
        let state = apply_pair(&ua.adjoint(), &ub.adjoint(), &dilated, d * sa, d * sb).unwrap();

        let alice: Vec<Povm> = (0..s_tilde.questions())
            .map(|x| {
                Povm::new(
                    (0..s_tilde.answers())
                        .map(|a| {
                            let lifted = tensor(s_tilde.projection(x, a), &CMatrix::identity(sa));
                            ua.adjoint().mul(&lifted).mul(&ua)
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let bob: Vec<Povm> = (0..s_tilde.questions())
            .map(|y| {
                Povm::new(
                    (0..s_tilde.answers())
                        .map(|b| {
                            let lifted =
                                tensor(&s_tilde.bob_projection(y, b), &CMatrix::identity(sb));
                            ub.adjoint().mul(&lifted).mul(&ub)
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let s = TensorStrategy::new(alice, bob, state).unwrap();
        (s, ua, ub)
    }

    #[test]
    fn numeric_dilation_matches_exact_on_clean_input() {
        let mut rng = StdRng::seed_from_u64(47);
        let s_tilde = corpus::two_mub_qubit_pme();
        let (s, _, _) = planted_instance(&s_tilde, 2, 2, &mut rng);
        let exact = find_dilation_exact(&s, &s_tilde).unwrap();
        let exact_eps = verify_dilation(&s, &s_tilde, &exact).unwrap().epsilon();
        let numeric = find_dilation_numeric(&s, &s_tilde, &NumericDilationOptions::new(7)).unwrap();
        let numeric_eps = verify_dilation(&s, &s_tilde, &numeric).unwrap().epsilon();
        assert!(
            (numeric_eps - exact_eps).abs() < 1e-6,
            "numeric {numeric_eps} vs exact {exact_eps}"
        );
    }

    #[test]
    fn numeric_dilation_is_deterministic_under_seed() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let s = corpus::depolarized_pme_strategy(&s_tilde, 1e-3);
        let d1 = find_dilation_numeric(&s, &s_tilde, &NumericDilationOptions::new(5)).unwrap();
        let d2 = find_dilation_numeric(&s, &s_tilde, &NumericDilationOptions::new(5)).unwrap();
        assert!(d1.iso_a().sub(d2.iso_a()).norm_fro() < 1e-15);
        assert!(d1.aux().sub(d2.aux()).norm() < 1e-15);
    }

    #[test]
    fn numeric_dilation_obstruction_from_small_aux() {
        let mut rng = StdRng::seed_from_u64(53);
        let s_tilde = corpus::two_mub_qubit_pme();
        let (s, _, _) = planted_instance(&s_tilde, 2, 2, &mut rng);

        // With the planted auxiliary dimensions the search succeeds and the
        // recovered junk state is genuinely rank 2.
        let mut opts = NumericDilationOptions::new(11);
        opts.aux_dim_a = Some(2);
        opts.aux_dim_b = Some(2);
        let free = find_dilation_numeric(&s, &s_tilde, &opts).unwrap();
        let free_eps = verify_dilation(&s, &s_tilde, &free).unwrap().epsilon();
        assert!(free_eps < 1e-6, "unconstrained residual {free_eps}");
        let sc = schmidt(free.aux(), 2, 2).unwrap();
        assert!(sc.rank(1e-6) >= 2);

        // Forcing the auxiliary space below the planted rank leaves no room
        // for an isometry at all.
        let mut tight = NumericDilationOptions::new(11);
        tight.aux_dim_a = Some(1);
        assert!(matches!(
            find_dilation_numeric(&s, &s_tilde, &tight),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn numeric_dilation_residual_bounded_away_for_wrong_state() {
        // Ideal measurements but a skewed shared state: no dilation at any
        // auxiliary size maps it onto the maximally entangled state, so the
        // best residual at the minimal sizes stays bounded away from zero.
        let s_tilde = corpus::two_mub_qubit_pme();
        let base = s_tilde.as_tensor().unwrap();
        let skew = CVector::from_real(&[0.9, 0.0, 0.0, (1.0f64 - 0.81).sqrt()]);
        let s = TensorStrategy::new(
            (0..2).map(|x| base.alice(x).clone()).collect(),
            (0..2).map(|y| base.bob(y).clone()).collect(),
            skew,
        )
        .unwrap();
        let dil = find_dilation_numeric(&s, &s_tilde, &NumericDilationOptions::new(13)).unwrap();
        let eps = verify_dilation(&s, &s_tilde, &dil).unwrap().epsilon();
        assert!(eps > 0.05, "residual unexpectedly small: {eps}");
    }

    #[test]
    fn moment_gap_empty_words_and_exact_dilation() {
        let s_tilde = corpus::two_mub_qubit_pme();
        let s = s_tilde.as_tensor().unwrap();
        let dil = Dilation::identity(2).unwrap();
        let report = moment_gap(&s, &s_tilde, &dil, &Word::empty(), &Word::empty()).unwrap();
        assert!(report.gap < 1e-12);

        // Exhaustive words up to length 2 on the exact pair.
        let letters: Vec<(usize, usize)> = (0..2).flat_map(|x| (0..2).map(move |a| (x, a))).collect();
        for &l1 in &letters {
            for &l2 in &letters {
                let w = Word::new(vec![l1, l2]);
                let r = moment_gap(&s, &s_tilde, &dil, &w, &Word::new(vec![l1])).unwrap();
                assert!(r.gap <= 1e-9, "gap {}", r.gap);
            }
        }
    }

    #[test]
    fn overlap_bound_cases() {
        // Diagonal 2x2: actual overlap is cos²θ.
        let a = CMatrix::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let theta = 0.1_f64;
        let xi = CVector::from_real(&[theta.cos(), theta.sin()]);
        let rayleigh = 2.0 * theta.cos().powi(2) + theta.sin().powi(2);
        let eps = 2.0 - rayleigh + 1e-15;
        let report = eigengap_overlap_bound(&a, &xi, eps).unwrap();
        assert!((report.actual - theta.cos().powi(2)).abs() < 1e-12);
        assert!(report.actual >= report.lower_bound - 1e-10);

        // Top eigenvector with eps = 0.
        let top = CVector::from_real(&[1.0, 0.0]);
        let r = eigengap_overlap_bound(&a, &top, 0.0).unwrap();
        assert!((r.actual - 1.0).abs() < 1e-12);

        // Single eigenvalue rejected.
        let flat = CMatrix::identity(3);
        assert!(eigengap_overlap_bound(&flat, &CVector::from_real(&[1.0, 0.0, 0.0]), 0.1).is_err());
    }

    #[test]
    fn perturbation_bound_trivial_and_perturbed() {
        let mut rng = StdRng::seed_from_u64(59);
        let x = random_gaussian(&mut rng, 2, 2);
        let y = random_gaussian(&mut rng, 3, 3);
        let psi = CVector::new(random_gaussian(&mut rng, 6, 1).entries().to_vec()).normalize();
        let r = tensor_perturbation_bound(&x, &x, &y, &y, &psi).unwrap();
        assert!(r.expectation_gap < 1e-12 && r.vector_gap < 1e-12);

        let h = random_gaussian(&mut rng, 2, 2);
        let x2 = x.add(&h.scale(c(1e-3, 0.0)));
        let r = tensor_perturbation_bound(&x2, &x, &y, &y, &psi).unwrap();
        assert!(r.expectation_gap <= r.expectation_bound + 1e-9);
        assert!(r.vector_gap <= r.vector_bound + 1e-9);
    }

    #[test]
    fn projection_closeness_trivial_and_kicked() {
        let xi = CVector::from_real(&[1.0, 0.0, 0.0]);
        let p = CMatrix::identity(3);
        let r = projection_closeness_bound(&xi, &xi, &p, 0.0, 0.0).unwrap();
        assert!(r.lhs < 1e-15);

        // Kick eta inside the range of a nontrivial projection.
        let p = CMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let eta = CVector::from_real(&[0.99, 0.05, 0.0]);
        let eps1 = (xi.norm().powi(2) - eta.norm().powi(2)).abs() + 1e-12;
        let eps2 = xi.sub(&p.mul_vec(&eta)).norm() + 1e-12;
        let r = projection_closeness_bound(&xi, &eta, &p, eps1, eps2).unwrap();
        assert!(r.lhs <= r.rhs);
    }
}
