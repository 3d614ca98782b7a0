//! The explicit genus-4 Dieudonné chain: surface coordinates
//! (t₂, t₃, t₄, u₂, u₃) over 𝔽_{p^e} cut out by two Artin–Schreier-type
//! equations, the derived coordinates t₂′, t₄′, t₂″, t₄″, the genericity
//! certificate (45 products independent over 𝔽_{p²}), and the endomorphism
//! and automorphism computations at the bottom of the chain.

use crate::error::{invalid, Result};
use crate::field::{make_field, subfield_member, FieldCtx, Fq, Restriction};
use crate::linalg::{Fp, Matrix};
use std::sync::Arc;

/// Solves a·X^{p^k} + b·X = c as an 𝔽_p-linear system on the coefficient
/// space of 𝔽_{p^e}.
fn solve_semilinear(ctx: &Arc<FieldCtx>, k: usize, a: &Fq, b: &Fq, c: &Fq) -> Option<Fq> {
    let e = ctx.e;
    let p = ctx.p;
    let mut cols = Vec::with_capacity(e);
    for i in 0..e {
        let mut coeffs = vec![0u64; e];
        coeffs[i] = 1;
        let x = ctx.el(&coeffs);
        let img = a.mul(&x.frob(k)).add(&b.mul(&x));
        cols.push(img.c.iter().map(|&v| Fp::new(p, v)).collect::<Vec<_>>());
    }
    let m = Matrix::from_cols(cols);
    let rhs: Vec<Fp> = c.c.iter().map(|&v| Fp::new(p, v)).collect();
    let sol = m.solve(&rhs)?;
    Some(ctx.el(&sol.iter().map(|f| f.v).collect::<Vec<_>>()))
}

#[derive(Clone)]
pub struct DieudonneChain {
    pub p: u64,
    pub e: usize,
    pub ctx: Arc<FieldCtx>,
    pub rest2: Arc<Restriction>,
    pub t2: Fq,
    pub t3: Fq,
    pub t4: Fq,
    pub u2: Fq,
    pub u3: Fq,
    pub s2: Fq,
    /// t₂′ = (t₂^p − t₂^{1/p}) / (t₃^p − t₃^{1/p})
    pub t2p: Fq,
    pub t4p: Fq,
    /// t₂″ = t₂^p − t₃^p·t₂′
    pub t2pp: Fq,
    pub t4pp: Fq,
}

impl std::fmt::Debug for DieudonneChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DieudonneChain")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("t2", &self.t2)
            .field("t3", &self.t3)
            .field("t4", &self.t4)
            .field("u2", &self.u2)
            .field("u3", &self.u3)
            .finish_non_exhaustive()
    }
}

/// x^{1/p} = x^{p^{e−1}}.
fn inv_frob(a: &Fq) -> Fq {
    a.frob(a.ctx.e - 1)
}

/// First surface equation: t₂^{p²} − t₂ + t₃t₄^{p²} − t₄t₃^{p²} = 0.
pub fn f1_residual(t2: &Fq, t3: &Fq, t4: &Fq) -> Fq {
    t2.frob(2).sub(t2).add(&t3.mul(&t4.frob(2))).sub(&t4.mul(&t3.frob(2)))
}

/// Second surface equation: u₂^p + t₃u₃^p + u₂ + u₃t₃^p = 0.
pub fn f2_residual(t3: &Fq, u2: &Fq, u3: &Fq) -> Fq {
    u2.frob(1).add(&t3.mul(&u3.frob(1))).add(u2).add(&u3.mul(&t3.frob(1)))
}

/// Validates surface coordinates and computes the derived ones.
pub fn build_chain(
    p: u64,
    e: usize,
    coords: (Fq, Fq, Fq, Fq, Fq, Fq),
) -> Result<DieudonneChain> {
    let (t2, t3, t4, u2, u3, s2) = coords;
    let ctx = t2.ctx.clone();
    if ctx.p != p || ctx.e != e || e % 2 != 0 {
        return invalid("coordinates must live in F_{p^e} with even e");
    }
    if !f1_residual(&t2, &t3, &t4).is_zero() {
        return invalid("first surface equation violated");
    }
    if !f2_residual(&t3, &u2, &u3).is_zero() {
        return invalid("second surface equation violated");
    }
    if subfield_member(&t3, 2)? {
        return invalid("t3 must not lie in F_{p^2}");
    }
    let denom = t3.frob(1).sub(&inv_frob(&t3));
    let dinv = denom.inv().expect("t3 outside F_{p^2} makes the denominator nonzero");
    let t2p = t2.frob(1).sub(&inv_frob(&t2)).mul(&dinv);
    let t4p = t4.frob(1).sub(&inv_frob(&t4)).mul(&dinv);
    let t2pp = t2.frob(1).sub(&t3.frob(1).mul(&t2p));
    let t4pp = t4.frob(1).sub(&t3.frob(1).mul(&t4p));
    let chain = DieudonneChain {
        p,
        e,
        rest2: Arc::new(Restriction::new(&ctx, 2)?),
        ctx,
        t2,
        t3,
        t4,
        u2,
        u3,
        s2,
        t2p,
        t4p,
        t2pp,
        t4pp,
    };
    // consequence of the first surface equation
    assert_eq!(chain.t2p, chain.t4pp, "t2' = t4'' must hold on the surface");
    // the coefficient identities behind F·u ≡ v1 + t3^p·v2 and
    // V·u ≡ −(v1 + t3^{1/p}·v2) mod p
    assert!(chain.fu_congruence() && chain.vu_congruence());
    Ok(chain)
}

impl DieudonneChain {
    /// t₂″ + t₃^p t₂′ = t₂^p and likewise for t₄ — the coordinates of F·u.
    pub fn fu_congruence(&self) -> bool {
        self.t2pp.add(&self.t3.frob(1).mul(&self.t2p)) == self.t2.frob(1)
            && self.t4pp.add(&self.t3.frob(1).mul(&self.t4p)) == self.t4.frob(1)
    }

    /// t₂″ + t₃^{1/p} t₂′ = t₂^{1/p} and likewise for t₄ — the coordinates
    /// of −V·u.
    pub fn vu_congruence(&self) -> bool {
        self.t2pp.add(&inv_frob(&self.t3).mul(&self.t2p)) == inv_frob(&self.t2)
            && self.t4pp.add(&inv_frob(&self.t3).mul(&self.t4p)) == inv_frob(&self.t4)
    }

    /// The 8×3 matrix [u v₁ v₂] in the standard basis x₁..x₄, y₁..y₄.
    pub fn basis_u_v(&self) -> Matrix<Fq> {
        let z = self.ctx.zero();
        let o = self.ctx.one();
        Matrix::from_cols(vec![
            vec![
                o.clone(),
                self.t2.clone(),
                self.t3.clone(),
                self.t4.clone(),
                z.clone(),
                self.u2.clone(),
                z.clone(),
                self.u3.clone(),
            ],
            vec![
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                o.clone(),
                self.t2pp.clone(),
                z.clone(),
                self.t4pp.clone(),
            ],
            vec![
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                self.t2p.clone(),
                o.clone(),
                self.t4p.clone(),
            ],
        ])
    }

    /// The 5×3 coordinate block of {u, v₁, v₂} in the ordered basis
    /// {x₁, y₁, y₃ | x₂, x₃, x₄, y₂, y₄} (the first three coordinates form
    /// the identity and are omitted).
    pub fn coordinate_matrix(&self) -> Matrix<Fq> {
        let z = self.ctx.zero();
        Matrix::from_rows(vec![
            vec![self.t2.clone(), z.clone(), z.clone()],
            vec![self.t3.clone(), z.clone(), z.clone()],
            vec![self.t4.clone(), z.clone(), z.clone()],
            vec![self.u2.clone(), self.t2pp.clone(), self.t2p.clone()],
            vec![self.u3.clone(), self.t4pp.clone(), self.t4p.clone()],
        ])
    }

    /// The Gram matrix of ⟨,⟩ on {x₁..x₄, y₁..y₄} scaled by p²
    /// (scale exponent 2): p²⟨x₁,x₂⟩ = 1 = p²⟨x₃,x₄⟩, p²⟨y₁,y₂⟩ = p =
    /// p²⟨y₃,y₄⟩, all other pairings zero.
    pub fn gram_scaled(&self) -> (Vec<Vec<i64>>, u32) {
        let mut g = vec![vec![0i64; 8]; 8];
        let p = self.p as i64;
        for (i, j, v) in [(0, 1, 1), (2, 3, 1), (4, 5, p), (6, 7, p)] {
            g[i][j] = v;
            g[j][i] = -v;
        }
        (g, 2)
    }

    /// The nine functions whose pairwise products must be independent.
    pub fn alphas(&self) -> Vec<Fq> {
        vec![
            self.ctx.one(),
            self.t2.clone(),
            self.t3.clone(),
            self.t4.clone(),
            self.t2p.clone(),
            self.t4p.clone(),
            self.t2pp.clone(),
            self.u3.clone(),
            self.u2.clone(),
        ]
    }

    /// β_i = (t₃^{p²} − t₃)·α_i^p: the denominator-cleared p-th powers.
    pub fn beta(&self, i: usize) -> Fq {
        self.t3.frob(2).sub(&self.t3).mul(&self.alphas()[i].frob(1))
    }
}

/// An element of 𝔽_{p²} ∖ 𝔽_p inside the big field.
fn quadratic_generator(rest2: &Restriction) -> Fq {
    rest2
        .subfield_elements()
        .into_iter()
        .find(|a| a.frob(1) != *a)
        .expect("F_{p^2} contains elements outside F_p")
}

/// True iff the 45 products α_iα_j (i ≤ j) are 𝔽_{p²}-linearly independent
/// in 𝔽_{p^e}, checked as 𝔽_p-independence of the 90 elements
/// {α_iα_j, δ·α_iα_j}.
pub fn genericity_check(chain: &DieudonneChain) -> Result<bool> {
    if chain.e < 90 {
        return invalid(format!("need e >= 90 for 45 products over F_{{p^2}}, got e = {}", chain.e));
    }
    let alphas = chain.alphas();
    let delta = quadratic_generator(&chain.rest2);
    let p = chain.p;
    let mut rows: Vec<Vec<Fp>> = Vec::with_capacity(90);
    for i in 0..9 {
        for j in i..9 {
            let prod = alphas[i].mul(&alphas[j]);
            for v in [prod.clone(), delta.mul(&prod)] {
                rows.push(v.c.iter().map(|&x| Fp::new(p, x)).collect());
            }
        }
    }
    Ok(Matrix::from_rows(rows).rank() == 90)
}

/// Generators of the 𝔽_p-parameter space of matrices ḡ = (Ā 0; B Ā^σ):
/// each generator is given by its nonzero entries (row, col, value).
fn mp_generators(chain: &DieudonneChain) -> Vec<Vec<(usize, usize, Fq)>> {
    let delta = quadratic_generator(&chain.rest2);
    let one = chain.ctx.one();
    let mut gens = Vec::with_capacity(64);
    for k in 0..4 {
        for l in 0..4 {
            // Abar entry 1 resp. delta, mirrored through sigma bottom-right
            gens.push(vec![(k, l, one.clone()), (k + 4, l + 4, one.clone())]);
            gens.push(vec![(k, l, delta.clone()), (k + 4, l + 4, delta.frob(1))]);
            // B entries (bottom-left), no sigma coupling
            gens.push(vec![(k + 4, l, one.clone())]);
            gens.push(vec![(k + 4, l, delta.clone())]);
        }
    }
    gens
}

#[derive(Clone, Debug)]
pub struct EndMpReport {
    /// dimension over 𝔽_p of the solution space
    pub dim: usize,
    /// true iff the solutions are exactly 𝔽_p·I₈
    pub is_scalars: bool,
    pub basis: Vec<Matrix<Fq>>,
}

/// Solves for all ḡ of shape (Ā 0; B Ā^σ) with ḡ·span{u,v₁,v₂} ⊆
/// span{u,v₁,v₂}; the σ-coupling makes the system 𝔽_p-linear in 64 unknowns.
pub fn end_mp_m1(chain: &DieudonneChain) -> Result<EndMpReport> {
    if !genericity_check(chain)? {
        return invalid("genericity not established; endomorphism conclusion would be conditional");
    }
    let w = chain.basis_u_v();
    let n = w.transpose().kernel(); // columns: the 5 annihilator vectors
    assert_eq!(n.cols, 5);
    let gens = mp_generators(chain);
    let p = chain.p;
    let e = chain.e;
    let mut cols: Vec<Vec<Fp>> = Vec::with_capacity(gens.len());
    for g in &gens {
        // entries of N^T · g · W, flattened over F_p
        let mut col = Vec::with_capacity(5 * 3 * e);
        for i in 0..5 {
            for j in 0..3 {
                let mut acc = chain.ctx.zero();
                for (r, c, val) in g {
                    acc = acc.add(&n[(*r, i)].mul(val).mul(&w[(*c, j)]));
                }
                col.extend(acc.c.iter().map(|&v| Fp::new(p, v)));
            }
        }
        cols.push(col);
    }
    let ker = Matrix::from_cols(cols).kernel();
    let mut basis = Vec::new();
    for kc in 0..ker.cols {
        let mut m = Matrix::zero(&chain.ctx.zero(), 8, 8);
        for (gi, g) in gens.iter().enumerate() {
            let coeff = chain.ctx.scalar(ker[(gi, kc)].v);
            for (r, c, val) in g {
                m[(*r, *c)] = m[(*r, *c)].add(&coeff.mul(val));
            }
        }
        basis.push(m);
    }
    let is_scalars = basis.len() == 1 && is_fp_scalar(&basis[0]);
    Ok(EndMpReport { dim: basis.len(), is_scalars, basis })
}

fn is_fp_scalar(m: &Matrix<Fq>) -> bool {
    let d = m[(0, 0)].clone();
    if d.frob(1) != d {
        return false;
    }
    for i in 0..m.rows {
        for j in 0..m.cols {
            let want = if i == j { d.clone() } else { m[(0, 0)].ctx.zero() };
            if m[(i, j)] != want {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct EndMv3Report {
    /// dimension over 𝔽_p of the (A′, μ) solution space
    pub dim: usize,
    /// true iff solutions are A′ = c·I₄, μ = c with c ∈ 𝔽_p, i.e. the
    /// endomorphisms of the bottom module are exactly {a·I₈ : a ∈ ℤ/p²}
    pub is_scalars: bool,
    pub description: String,
}

/// Residual of the mod-p congruence imposing that a·I + p·diag(A′, A′^σ)
/// preserves the line through s: the 8 field equations
/// A′·(1,t₂,t₃,t₄)ᵀ = μ·(1,t₂,t₃,t₄)ᵀ and A′^σ acting on (0,u₂,0,u₃)ᵀ.
pub fn mv3_residual(chain: &DieudonneChain, aprime: &Matrix<Fq>, mu: &Fq) -> Vec<Fq> {
    let top = [chain.ctx.one(), chain.t2.clone(), chain.t3.clone(), chain.t4.clone()];
    let bot = [chain.ctx.zero(), chain.u2.clone(), chain.ctx.zero(), chain.u3.clone()];
    let mut out = Vec::with_capacity(8);
    for i in 0..4 {
        let mut acc = mu.mul(&top[i]).neg();
        for (j, t) in top.iter().enumerate() {
            acc = acc.add(&aprime[(i, j)].mul(t));
        }
        out.push(acc);
    }
    for i in 0..4 {
        let mut acc = mu.mul(&bot[i]).neg();
        for (j, b) in bot.iter().enumerate() {
            acc = acc.add(&aprime[(i, j)].frob(1).mul(b));
        }
        out.push(acc);
    }
    out
}

/// Solves the congruence system of `mv3_residual` over 𝔽_p (32 unknowns for
/// A′ ∈ Mat₄(𝔽_{p²}) plus 2 for μ ∈ 𝔽_{p²}).
pub fn end_mv3_m0(chain: &DieudonneChain, mp: &EndMpReport) -> Result<EndMv3Report> {
    if !mp.is_scalars {
        return invalid("end_mp_m1 must return scalars before descending the chain");
    }
    let delta = quadratic_generator(&chain.rest2);
    let p = chain.p;
    // generators: E_{kl}, delta*E_{kl} for A'; 1, delta for mu
    let mut cols: Vec<Vec<Fp>> = Vec::new();
    let zero4 = Matrix::zero(&chain.ctx.zero(), 4, 4);
    let mut push_col = |aprime: &Matrix<Fq>, mu: &Fq| {
        let res = mv3_residual(chain, aprime, mu);
        let mut col = Vec::with_capacity(8 * chain.e);
        for r in &res {
            col.extend(r.c.iter().map(|&v| Fp::new(p, v)));
        }
        cols.push(col);
    };
    for k in 0..4 {
        for l in 0..4 {
            for val in [chain.ctx.one(), delta.clone()] {
                let mut a = zero4.clone();
                a[(k, l)] = val;
                push_col(&a, &chain.ctx.zero());
            }
        }
    }
    push_col(&zero4, &chain.ctx.one());
    push_col(&zero4, &delta);
    let ker = Matrix::from_cols(cols).kernel();
    // the expected kernel is spanned by (A' = I4, mu = 1)
    let mut is_scalars = ker.cols == 1;
    if is_scalars {
        let mut a = zero4.clone();
        let mut mu = chain.ctx.zero();
        for k in 0..4 {
            for l in 0..4 {
                let idx = (k * 4 + l) * 2;
                let c0 = chain.ctx.scalar(ker[(idx, 0)].v);
                let c1 = chain.ctx.scalar(ker[(idx + 1, 0)].v);
                a[(k, l)] = c0.add(&c1.mul(&delta));
            }
        }
        mu = mu.add(&chain.ctx.scalar(ker[(32, 0)].v));
        mu = mu.add(&chain.ctx.scalar(ker[(33, 0)].v).mul(&delta));
        is_scalars = is_fp_scalar(&a) && a[(0, 0)] == mu;
    }
    Ok(EndMv3Report {
        dim: ker.cols,
        is_scalars,
        description: format!("a*I8 with a in Z/{}", p * p),
    })
}

#[derive(Clone, Debug)]
pub struct AutReport {
    pub p: u64,
    pub order: u64,
    /// residues mod p² of the unitary scalars
    pub elements: Vec<u64>,
}

/// The polarized automorphisms of the bottom module: scalars a ∈ ℤ/p² with
/// a² = 1, i.e. {±1}, of order 2 for every p (−1 ≠ 1 already in ℤ/4).
pub fn aut_polarized_m0(chain: &DieudonneChain, mv3: &EndMv3Report) -> Result<AutReport> {
    if !mv3.is_scalars {
        return invalid("bottom endomorphisms must be scalars");
    }
    let p2 = chain.p * chain.p;
    let elements: Vec<u64> = (0..p2).filter(|a| a * a % p2 == 1).collect();
    assert_eq!(elements, vec![1, p2 - 1]);
    Ok(AutReport { p: chain.p, order: elements.len() as u64, elements })
}

/// Samples surface coordinates over 𝔽_{p^e}: t₃, t₄ free with t₃ ∉ 𝔽_{p²},
/// t₂ solving the first equation, u₃ free and u₂ solving the second; retries
/// on the trace obstructions.
pub fn sample_chain(p: u64, e: usize, rng: &mut impl rand::Rng) -> Result<DieudonneChain> {
    let ctx = make_field(p, e)?;
    let one = ctx.one();
    for _ in 0..200 {
        let t3 = ctx.random(rng);
        if subfield_member(&t3, 2)? {
            continue;
        }
        let t4 = ctx.random(rng);
        let c1 = t4.mul(&t3.frob(2)).sub(&t3.mul(&t4.frob(2)));
        let Some(t2) = solve_semilinear(&ctx, 2, &one, &one.neg(), &c1) else {
            continue;
        };
        let u3 = ctx.random(rng);
        let c2 = t3.mul(&u3.frob(1)).add(&u3.mul(&t3.frob(1))).neg();
        let Some(u2) = solve_semilinear(&ctx, 1, &one, &one, &c2) else {
            continue;
        };
        let s2 = ctx.random(rng);
        return build_chain(p, e, (t2, t3, t4, u2, u3, s2));
    }
    crate::error::budget("could not sample a surface point in 200 attempts")
}

/// Samples chains until the genericity certificate holds.
pub fn generic_chain(
    p: u64,
    e: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<(DieudonneChain, usize)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_attempts {
        let chain = sample_chain(p, e, &mut rng)?;
        if genericity_check(&chain)? {
            return Ok((chain, attempt));
        }
    }
    crate::error::budget(format!("no generic point found in {max_attempts} attempts"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn semilinear_solver_roundtrip() {
        let ctx = make_field(3, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let one = ctx.one();
        for _ in 0..20 {
            // pick X, form c = X^{p^2} - X, re-solve and verify
            let x = ctx.random(&mut rng);
            let c = x.frob(2).sub(&x);
            let sol = solve_semilinear(&ctx, 2, &one, &one.neg(), &c).unwrap();
            assert_eq!(sol.frob(2).sub(&sol), c);
        }
    }

    #[test]
    fn chain_construction_and_identities() {
        let (chain, _) = generic_chain(2, 94, 7, 50).unwrap();
        assert_eq!(chain.t2p, chain.t4pp);
        assert!(chain.fu_congruence());
        assert!(chain.vu_congruence());
        // coordinate matrix has the documented sparsity and repeated entry
        let pmat = chain.coordinate_matrix();
        for i in 0..3 {
            assert!(pmat[(i, 1)].is_zero() && pmat[(i, 2)].is_zero());
        }
        assert_eq!(pmat[(4, 1)], pmat[(3, 2)], "t4'' appears again as t2'");
        // scaled Gram data
        let (g, scale) = chain.gram_scaled();
        assert_eq!(scale, 2);
        assert_eq!((g[0][1], g[2][3], g[4][5]), (1, 1, 2));
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(g[i][j], -g[j][i]);
            }
        }
    }

    #[test]
    fn beta_closed_forms() {
        let (chain, _) = generic_chain(3, 94, 8, 50).unwrap();
        let b0 = chain.t3.frob(2).sub(&chain.t3);
        assert_eq!(chain.beta(0), b0);
        assert_eq!(chain.beta(1), b0.mul(&chain.t2.frob(1)));
        // denominator-free forms for the primed coordinates
        assert_eq!(chain.beta(4), chain.t2.frob(2).sub(&chain.t2));
        assert_eq!(chain.beta(5), chain.t4.frob(2).sub(&chain.t4));
    }

    #[test]
    fn genericity_rejects_degenerate_points() {
        // all coordinates in F_{p^2} collapse the products; also e too small
        let ctx = make_field(2, 20).unwrap();
        let z = ctx.zero();
        let err = build_chain(2, 20, (z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z))
            .unwrap_err();
        assert!(matches!(err, crate::Error::Invalid(_)));
        let (chain, _) = generic_chain(2, 94, 9, 50).unwrap();
        assert!(genericity_check(&chain).unwrap());
    }

    #[test]
    fn end_reports_p2() {
        let (chain, _) = generic_chain(2, 94, 10, 50).unwrap();
        let mp = end_mp_m1(&chain).unwrap();
        assert_eq!(mp.dim, 1);
        assert!(mp.is_scalars, "bottom-of-chain endomorphisms must be F_p scalars");
        let mv3 = end_mv3_m0(&chain, &mp).unwrap();
        assert!(mv3.is_scalars);
        // off-diagonal probe: injecting a_{12} != 0 leaves a residual
        let mut a = Matrix::identity(&chain.ctx.zero(), 4);
        a[(0, 1)] = chain.ctx.one();
        let res = mv3_residual(&chain, &a, &chain.ctx.one());
        assert!(res.iter().any(|r| !r.is_zero()));
        let aut = aut_polarized_m0(&chain, &mv3).unwrap();
        assert_eq!(aut.order, 2);
        assert_eq!(aut.elements, vec![1, 3]);
    }
}
