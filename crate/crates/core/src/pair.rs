//! Subspace pairs (V₀, W): an n-dimensional k₀-space together with an
//! r-dimensional L-subspace W ⊆ V₀ ⊗ L, given by an n×r representative
//! matrix P of rank r over L = 𝔽_{p^e}, with k₀ = 𝔽_{p^d} for d | e.
//!
//! The central computation is the relative endomorphism algebra
//! End(V₀, W) = {α ∈ Mat_n(k₀) : α·colspan(P) ⊆ colspan(P)}, solved exactly
//! by the annihilator method: with N an (n−r)×n matrix whose rows span the
//! left annihilator of P, the condition is the L-linear system N·α·P = 0 in
//! the n² subfield unknowns, handled by restriction of scalars.

use crate::error::{invalid, Result};
use crate::field::{subfield_kernel, Fq, Restriction};
use crate::linalg::{span_contains, Matrix, Ring};
use rand::Rng;
use std::sync::Arc;

#[derive(Clone)]
pub struct SubspacePair {
    pub n: usize,
    pub r: usize,
    /// k₀ = 𝔽_{p^d} inside the coordinate field L = 𝔽_{p^e}
    pub rest: Arc<Restriction>,
    /// n×r representative matrix over L, rank r
    pub p_mat: Matrix<Fq>,
}

impl SubspacePair {
    pub fn new(rest: Arc<Restriction>, p_mat: Matrix<Fq>) -> Result<Self> {
        let (n, r) = (p_mat.rows, p_mat.cols);
        if r == 0 || r >= n {
            return invalid(format!("need 0 < r < n, got r = {r}, n = {n}"));
        }
        if p_mat.rank() != r {
            return invalid("representative matrix is rank-deficient");
        }
        Ok(SubspacePair { n, r, rest, p_mat })
    }

    pub fn q(&self) -> u64 {
        self.rest.subfield_size()
    }

    /// Rows span the left annihilator of P: N·P = 0, rank n−r.
    pub fn annihilator(&self) -> Matrix<Fq> {
        let k = self.p_mat.transpose().kernel(); // columns v with vᵀP = 0
        k.transpose()
    }
}

#[derive(Clone, Debug)]
pub struct EndoAlgebra {
    pub n: usize,
    /// echelon-canonical basis (as vectors in k₀^{n²}, row-major flattening)
    pub basis: Vec<Matrix<Fq>>,
    pub dim: usize,
    /// (dim E, dim W₀, dim W̃₀)
    pub signature: (usize, usize, usize),
    pub contains_identity: bool,
}

impl EndoAlgebra {
    pub fn span_contains(&self, m: &Matrix<Fq>) -> bool {
        if self.basis.is_empty() {
            return m.is_zero_matrix();
        }
        let cols: Vec<Vec<Fq>> = self.basis.iter().map(|b| b.entries().to_vec()).collect();
        span_contains(&Matrix::from_cols(cols), m.entries())
    }
}

/// Echelonize a list of k₀^len vectors into a canonical basis (rref rows).
fn echelon_vectors(vs: Vec<Vec<Fq>>, len: usize, zero: &Fq) -> Vec<Vec<Fq>> {
    if vs.is_empty() {
        let _ = (len, zero);
        return vec![];
    }
    let m = Matrix::from_rows(vs).row_echelon();
    (0..m.rows).map(|i| m.row(i)).collect()
}

/// End(V₀, W) via the annihilator method.
pub fn end_algebra(s: &SubspacePair) -> Result<EndoAlgebra> {
    let n = s.n;
    let nn = n * n;
    let ann = s.annihilator();
    let zero = s.rest.ctx.zero();
    // unknowns a_{kl}, flattened row-major; equation (i,j): Σ N[i,k]·P[l,j]·a_{kl} = 0
    let mut sys = Matrix::zero(&zero, ann.rows * s.r, nn);
    for i in 0..ann.rows {
        for j in 0..s.r {
            for k in 0..n {
                let nik = &ann[(i, k)];
                if nik.is_zero() {
                    continue;
                }
                for l in 0..n {
                    sys[(i * s.r + j, k * n + l)] = nik.mul(&s.p_mat[(l, j)]);
                }
            }
        }
    }
    let ker = subfield_kernel(&sys, &s.rest);
    let rows = echelon_vectors(ker, nn, &zero);
    let basis: Vec<Matrix<Fq>> =
        rows.into_iter().map(|v| Matrix::from_fn(n, n, |i, j| v[i * n + j].clone())).collect();
    let dim = basis.len();

    // invariants: identity in span, multiplicative closure
    let id = Matrix::identity(&zero, n);
    let alg = EndoAlgebra {
        n,
        dim,
        signature: (dim, rational_kernel(s)?.len(), envelope(s)?.len()),
        contains_identity: false,
        basis,
    };
    let contains_identity = alg.span_contains(&id);
    if !contains_identity {
        return invalid("endomorphism algebra misses the identity (internal error)");
    }
    for a in &alg.basis {
        for b in &alg.basis {
            if !alg.span_contains(&a.matmul(b)) {
                return invalid("endomorphism algebra not closed under product (internal error)");
            }
        }
    }
    Ok(EndoAlgebra { contains_identity, ..alg })
}

/// Cross-check solver for P with an invertible bottom r×r block: normalizes
/// to [T; I_r] and solves the linearized condition T·C·T + T·D − A·T − B = 0
/// on α = [[A, B], [C, D]].
pub fn end_algebra_blockform(s: &SubspacePair) -> Result<EndoAlgebra> {
    let n = s.n;
    let r = s.r;
    let m = n - r;
    let bottom = s.p_mat.submatrix(m, n, 0, r);
    let Some(binv) = bottom.inverse() else {
        return invalid("bottom block of P is singular; block-form solver inapplicable");
    };
    let t = s.p_mat.submatrix(0, m, 0, r).matmul(&binv); // m×r
    let zero = s.rest.ctx.zero();
    let nn = n * n;
    // unknown index: row-major over the full n×n matrix
    let idx = |i: usize, j: usize| i * n + j;
    let mut sys = Matrix::zero(&zero, m * r, nn);
    for i in 0..m {
        for j in 0..r {
            let row = i * r + j;
            // +T C T: coefficient of C[k,l] (position (m+... wait C sits at rows m.., cols 0..m)
            for k in 0..r {
                for l in 0..m {
                    let c = t[(i, k)].mul(&t[(l, j)]);
                    let cur = &sys[(row, idx(m + k, l))];
                    sys[(row, idx(m + k, l))] = cur.add(&c);
                }
            }
            // +T D: D at rows m.., cols m..
            for k in 0..r {
                let c = t[(i, k)].clone();
                let cur = &sys[(row, idx(m + k, m + j))];
                sys[(row, idx(m + k, m + j))] = cur.add(&c);
            }
            // −A T: A at rows 0..m, cols 0..m
            for k in 0..m {
                let c = t[(k, j)].neg();
                let cur = &sys[(row, idx(i, k))];
                sys[(row, idx(i, k))] = cur.add(&c);
            }
            // −B: B at rows 0..m, cols m..
            let cur = &sys[(row, idx(i, m + j))];
            sys[(row, idx(i, m + j))] = cur.sub(&zero.one());
        }
    }
    // NB the block coordinates above use basis order (complement, W-part): the
    // pair's standard coordinates already match because P = [top; bottom].
    let ker = subfield_kernel(&sys, &s.rest);
    let rows = echelon_vectors(ker, nn, &zero);
    let basis: Vec<Matrix<Fq>> =
        rows.into_iter().map(|v| Matrix::from_fn(n, n, |i, j| v[i * n + j].clone())).collect();
    let dim = basis.len();
    Ok(EndoAlgebra {
        n,
        dim,
        signature: (dim, rational_kernel(s)?.len(), envelope(s)?.len()),
        contains_identity: true,
        basis,
    })
}

/// k₀-basis of W₀ = W ∩ V₀, the largest rational subspace inside W.
pub fn rational_kernel(s: &SubspacePair) -> Result<Vec<Vec<Fq>>> {
    let ann = s.annihilator();
    let ker = subfield_kernel(&ann, &s.rest);
    let zero = s.rest.ctx.zero();
    Ok(echelon_vectors(ker, s.n, &zero))
}

/// L-basis (canonical columns) of the envelope W̃ = Σ_j Frob^{dj}(W).
pub fn envelope_span(s: &SubspacePair) -> Matrix<Fq> {
    let d = s.rest.d;
    let mut span = s.p_mat.column_echelon();
    let mut cur = s.p_mat.clone();
    for _ in 1..s.rest.m {
        cur = cur.map(|a| a.frob(d % s.rest.ctx.e));
        let next = crate::linalg::span_sum(&span, &cur);
        if next.cols == span.cols {
            // Frobenius-stable from here on; the sum has stabilized
            break;
        }
        span = next;
    }
    span
}

/// k₀-basis of the rational form W̃₀ of the envelope.
pub fn envelope(s: &SubspacePair) -> Result<Vec<Vec<Fq>>> {
    let span = envelope_span(s);
    let zero = s.rest.ctx.zero();
    if span.cols == s.n {
        let id = Matrix::identity(&zero, s.n);
        return Ok((0..s.n).map(|i| id.col(i)).collect());
    }
    // rational vectors of a Frobenius-stable space: same annihilator trick
    let ann = span.transpose().kernel().transpose();
    let ker = subfield_kernel(&ann, &s.rest);
    let basis = echelon_vectors(ker, s.n, &zero);
    if basis.len() != span.cols {
        return invalid("envelope is not defined over the base subfield (internal error)");
    }
    Ok(basis)
}

#[derive(Clone, Debug)]
pub struct Flag {
    /// basis of V₁ = W₀
    pub v1: Vec<Vec<Fq>>,
    /// complement of W₀ inside W̃₀
    pub v2: Vec<Vec<Fq>>,
    /// complement of W̃₀ in the ambient space
    pub v3: Vec<Vec<Fq>>,
    /// columns are v1 | v2 | v3
    pub basis_change: Matrix<Fq>,
    /// every algebra basis element is block upper-triangular in this basis
    pub block_certified: bool,
}

/// Canonical flag W₀ ⊆ W̃₀ ⊆ V₀ with a block-triangularity certificate for
/// End(V₀, W).
pub fn canonical_flag(s: &SubspacePair) -> Result<Flag> {
    let zero = s.rest.ctx.zero();
    let n = s.n;
    let w0 = rational_kernel(s)?;
    let wt0 = envelope(s)?;

    let mut cols: Vec<Vec<Fq>> = w0.clone();
    let mut span = if cols.is_empty() {
        Matrix::zero(&zero, n, 0)
    } else {
        Matrix::from_cols(cols.clone())
    };
    let mut v2 = Vec::new();
    for v in &wt0 {
        if !span_contains(&span, v) {
            span = span.hstack(&Matrix::from_cols(vec![v.clone()]));
            v2.push(v.clone());
            cols.push(v.clone());
        }
    }
    let mut v3 = Vec::new();
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = vec![zero.clone(); n];
        e[i] = zero.one();
        if !span_contains(&span, &e) {
            span = span.hstack(&Matrix::from_cols(vec![e.clone()]));
            v3.push(e.clone());
            cols.push(e);
        }
    }
    let g = Matrix::from_cols(cols);
    let ginv = g.inverse().expect("flag basis invertible");
    let alg = end_algebra(s)?;
    let (d1, d2) = (w0.len(), v2.len());
    let mut certified = true;
    for b in &alg.basis {
        let c = ginv.matmul(b).matmul(&g);
        for i in 0..n {
            for j in 0..n {
                let below = (i >= d1 && j < d1) || (i >= d1 + d2 && j < d1 + d2);
                if below && !c[(i, j)].is_zero() {
                    certified = false;
                }
            }
        }
    }
    Ok(Flag { v1: w0, v2, v3, basis_change: g, block_certified: certified })
}

/// Hom((V₀,W), (V₀′,W′)): all k₀-matrices f with f·colspan(P) ⊆ colspan(P′).
pub fn hom_space(s: &SubspacePair, s2: &SubspacePair) -> Result<Vec<Matrix<Fq>>> {
    if !Arc::ptr_eq(&s.rest, &s2.rest) && (s.rest.d != s2.rest.d || s.rest.ctx != s2.rest.ctx) {
        return invalid("hom_space requires matching fields");
    }
    let ann2 = s2.annihilator(); // (n2−r2)×n2
    let zero = s.rest.ctx.zero();
    let (n, n2) = (s.n, s2.n);
    let mut sys = Matrix::zero(&zero, ann2.rows * s.r, n2 * n);
    for i in 0..ann2.rows {
        for j in 0..s.r {
            for k in 0..n2 {
                let nik = &ann2[(i, k)];
                if nik.is_zero() {
                    continue;
                }
                for l in 0..n {
                    sys[(i * s.r + j, k * n + l)] = nik.mul(&s.p_mat[(l, j)]);
                }
            }
        }
    }
    let ker = subfield_kernel(&sys, &s.rest);
    let rows = echelon_vectors(ker, n2 * n, &zero);
    Ok(rows.into_iter().map(|v| Matrix::from_fn(n2, n, |i, j| v[i * n + j].clone())).collect())
}

/// Block-diagonal direct sum of two pairs over the same fields.
pub fn direct_sum(s1: &SubspacePair, s2: &SubspacePair) -> Result<SubspacePair> {
    if s1.rest.d != s2.rest.d || s1.rest.ctx != s2.rest.ctx {
        return invalid("direct_sum requires matching fields");
    }
    let zero = s1.rest.ctx.zero();
    let n = s1.n + s2.n;
    let r = s1.r + s2.r;
    let p = Matrix::from_fn(n, r, |i, j| {
        if i < s1.n && j < s1.r {
            s1.p_mat[(i, j)].clone()
        } else if i >= s1.n && j >= s1.r {
            s2.p_mat[(i - s1.n, j - s1.r)].clone()
        } else {
            zero.clone()
        }
    });
    SubspacePair::new(s1.rest.clone(), p)
}

/// Dual pair: W^∨ ⊆ V₀^∨ is the annihilator of W, dimension n − r.
pub fn dual(s: &SubspacePair) -> Result<SubspacePair> {
    let ann = s.annihilator(); // rows span the annihilator
    SubspacePair::new(s.rest.clone(), ann.transpose())
}

/// Number of monomials of degree ≤ 2 in m variables: C(m+2, 2).
pub fn quadratic_monomial_count(m: usize) -> usize {
    (m + 2) * (m + 1) / 2
}

/// Checks that the degree-≤2 monomial values {1, t_ij, t_{i₁j₁}·t_{i₂j₂}} of
/// the entries of T are k₀-linearly independent.
pub fn quadratic_values_independent(t: &Matrix<Fq>, rest: &Restriction) -> bool {
    let mut vals: Vec<Fq> = vec![rest.ctx.one()];
    let flat: Vec<Fq> = t.entries().to_vec();
    vals.extend(flat.iter().cloned());
    for i in 0..flat.len() {
        for j in i..flat.len() {
            vals.push(flat[i].mul(&flat[j]));
        }
    }
    let n2 = quadratic_monomial_count(flat.len());
    debug_assert_eq!(vals.len(), n2);
    if rest.m < n2 {
        return false;
    }
    // coordinates over k₀ in the relative basis; independence = full rank
    let coords = Matrix::from_cols(vals.iter().map(|v| rest.expand(v)).collect());
    coords.rank() == n2
}

/// A pair P = [T; I_r] whose endomorphism algebra is exactly the scalars k₀:
/// samples T until the quadratic monomial values of its entries are
/// k₀-independent, with a deterministic generator-power fallback.
pub fn generic_subspace(
    n: usize,
    r: usize,
    rest: &Arc<Restriction>,
    rng: &mut impl Rng,
    attempts: usize,
) -> Result<SubspacePair> {
    if r == 0 || r >= n {
        return invalid(format!("need 0 < r < n, got r = {r}, n = {n}"));
    }
    let m = (n - r) * r;
    let n2 = quadratic_monomial_count(m);
    if rest.m < n2 + 1 {
        return invalid(format!(
            "extension too small: relative degree {} < N₂ + 1 = {}",
            rest.m,
            n2 + 1
        ));
    }
    let ctx = &rest.ctx;
    let mut t = None;
    for _ in 0..attempts {
        let cand = Matrix::from_fn(n - r, r, |_, _| ctx.random(rng));
        if quadratic_values_independent(&cand, rest) {
            t = Some(cand);
            break;
        }
    }
    if t.is_none() {
        // deterministic fallback: entries α^{3^pos} for a primitive α
        let alpha = ctx.gen_el();
        let mut pow = num::BigUint::from(1u32);
        let cand = Matrix::from_fn(n - r, r, |_, _| {
            let v = alpha.pow_big(&pow);
            pow *= 3u32;
            v
        });
        if quadratic_values_independent(&cand, rest) {
            t = Some(cand);
        }
    }
    let Some(t) = t else {
        return invalid("failed to construct a generic subspace (extension too small?)");
    };
    let zero = ctx.zero();
    let p = t.vstack(&Matrix::identity(&zero, r).map(|x| x.clone()));
    SubspacePair::new(rest.clone(), p)
}

/// Brute-force End(V₀, W) by scanning all q^{n²} subfield matrices; only for
/// tiny parameters, used as an oracle.
pub fn end_algebra_bruteforce(s: &SubspacePair) -> Vec<Matrix<Fq>> {
    let n = s.n;
    let q = s.rest.subfield_size();
    let total = q.pow((n * n) as u32);
    let els = s.rest.subfield_elements();
    let span = s.p_mat.column_echelon();
    let mut found = Vec::new();
    for code in 0..total {
        let mut c = code;
        let alpha = Matrix::from_fn(n, n, |_, _| {
            let v = els[(c % q) as usize].clone();
            c /= q;
            v
        });
        let img = alpha.matmul(&s.p_mat);
        if (0..s.r).all(|j| span_contains(&span, &img.col(j))) {
            found.push(alpha);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, subfield_member};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(p: u64, e: usize, d: usize) -> Arc<Restriction> {
        Arc::new(Restriction::new(&make_field(p, e).unwrap(), d).unwrap())
    }

    fn pair_from_cols(rest: &Arc<Restriction>, cols: Vec<Vec<Fq>>) -> SubspacePair {
        SubspacePair::new(rest.clone(), Matrix::from_cols(cols)).unwrap()
    }

    #[test]
    fn rejects_degenerate() {
        let rest = setup(2, 2, 1);
        let one = rest.ctx.one();
        let zero = rest.ctx.zero();
        // rank-deficient 3x2
        let p = Matrix::from_cols(vec![
            vec![one.clone(), zero.clone(), zero.clone()],
            vec![one.clone(), zero.clone(), zero.clone()],
        ]);
        assert!(SubspacePair::new(rest.clone(), p).is_err());
        // r = n
        let p = Matrix::identity(&zero, 2);
        assert!(SubspacePair::new(rest.clone(), p).is_err());
    }

    #[test]
    fn line_in_plane_irrational_point() {
        // n=2, r=1, q=2, t a generator of F4 (min poly X²+X+1):
        // E = span{I, [[0,1],[1,1]]}
        let rest = setup(2, 2, 1);
        let t = rest.ctx.gen_el();
        let one = rest.ctx.one();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t]]);
        let e = end_algebra(&s).unwrap();
        assert_eq!(e.dim, 2);
        assert!(e.contains_identity);
        let zero = rest.ctx.zero();
        let companion = Matrix::from_rows(vec![
            vec![zero.clone(), one.clone()],
            vec![one.clone(), one.clone()],
        ]);
        assert!(e.span_contains(&companion));
        assert_eq!(e.signature, (2, 0, 2));
    }

    #[test]
    fn line_in_plane_companion_matrix_exact() {
        // over any small field: for the point span(e₁ + t·e₂) with
        // min poly X² − αX − β, the algebra is k₀·I + k₀·[[0,1],[β,α]]
        for (p, e) in [(2u64, 2usize), (3, 2), (2, 4)] {
            let rest = setup(p, e, 1);
            let t = rest.ctx.gen_el();
            let mp = crate::field::minimal_poly(&t, 1).unwrap();
            if mp.len() != 3 {
                continue; // need degree exactly 2
            }
            let alpha = mp[1].neg();
            let beta = mp[0].neg();
            let one = rest.ctx.one();
            let zero = rest.ctx.zero();
            let s = pair_from_cols(&rest, vec![vec![one.clone(), t]]);
            let e_alg = end_algebra(&s).unwrap();
            assert_eq!(e_alg.dim, 2);
            let companion =
                Matrix::from_rows(vec![vec![zero.clone(), one.clone()], vec![beta, alpha]]);
            assert!(e_alg.span_contains(&companion));
        }
    }

    #[test]
    fn line_in_plane_rational_point_borel() {
        let rest = setup(2, 2, 1);
        let one = rest.ctx.one();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), one.clone()]]);
        let e = end_algebra(&s).unwrap();
        assert_eq!(e.dim, 3); // conjugate of the upper-triangular Borel
        assert_eq!(e.signature, (3, 1, 1));
    }

    #[test]
    fn line_in_plane_far_point_scalars() {
        // t in F16 \ F4 over k0 = F2: only scalars
        let rest = setup(2, 4, 1);
        let t = rest.ctx.gen_el(); // order 15: not in F4
        let one = rest.ctx.one();
        let s = pair_from_cols(&rest, vec![vec![one, t]]);
        let e = end_algebra(&s).unwrap();
        assert_eq!(e.dim, 1);
        assert_eq!(e.signature, (1, 0, 2));
    }

    #[test]
    fn rational_kernel_examples() {
        // rational W: W0 = W
        let rest = setup(2, 2, 1);
        let one = rest.ctx.one();
        let zero = rest.ctx.zero();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), zero.clone()]]);
        assert_eq!(rational_kernel(&s).unwrap().len(), 1);

        // irrational point: W0 = 0
        let t = rest.ctx.gen_el();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t.clone()]]);
        assert_eq!(rational_kernel(&s).unwrap().len(), 0);

        // n=3, r=2, W = span{e1, e2 + t e3}: W0 = span{e1}
        let s = pair_from_cols(
            &rest,
            vec![
                vec![one.clone(), zero.clone(), zero.clone()],
                vec![zero.clone(), one.clone(), t.clone()],
            ],
        );
        let w0 = rational_kernel(&s).unwrap();
        assert_eq!(w0.len(), 1);
        assert!(w0[0][0].is_one() && w0[0][1].is_zero() && w0[0][2].is_zero());

        // cross-check by exhaustive scan over k0^3
        let span = s.p_mat.column_echelon();
        let mut count = 0;
        for code in 0..8u64 {
            let v: Vec<Fq> = (0..3).map(|i| rest.ctx.scalar((code >> i) & 1)).collect();
            if span_contains(&span, &v) {
                count += 1;
            }
        }
        assert_eq!(count, 2); // the q^{dim W0} rational vectors of W
    }

    #[test]
    fn envelope_examples() {
        let rest = setup(2, 2, 1);
        let one = rest.ctx.one();
        let zero = rest.ctx.zero();
        // rational: envelope = W0
        let s = pair_from_cols(&rest, vec![vec![one.clone(), zero.clone()]]);
        assert_eq!(envelope(&s).unwrap().len(), 1);
        // irrational point in the plane: dense
        let t = rest.ctx.gen_el();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t.clone()]]);
        assert_eq!(envelope(&s).unwrap().len(), 2);
        // the 3-space block example: P columns (1, x, 0), (0, 0, 1), x ∉ k0 → dense
        let s = pair_from_cols(
            &rest,
            vec![
                vec![one.clone(), t.clone(), zero.clone()],
                vec![zero.clone(), zero.clone(), one.clone()],
            ],
        );
        assert_eq!(envelope(&s).unwrap().len(), 3);
        // envelope basis vectors are rational and lie in the envelope span
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t.clone()]]);
        let span = envelope_span(&s);
        for v in envelope(&s).unwrap() {
            assert!(span_contains(&span, &v));
            for x in &v {
                assert!(subfield_member(x, 1).unwrap());
            }
        }
    }

    #[test]
    fn flag_examples() {
        let rest = setup(2, 2, 1);
        let one = rest.ctx.one();
        let zero = rest.ctx.zero();
        // rational point: blocks (1, 0, 1)
        let s = pair_from_cols(&rest, vec![vec![one.clone(), zero.clone()]]);
        let f = canonical_flag(&s).unwrap();
        assert_eq!((f.v1.len(), f.v2.len(), f.v3.len()), (1, 0, 1));
        assert!(f.block_certified);
        // dense-null point: blocks (0, 2, 0)
        let t = rest.ctx.gen_el();
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t.clone()]]);
        let f = canonical_flag(&s).unwrap();
        assert_eq!((f.v1.len(), f.v2.len(), f.v3.len()), (0, 2, 0));
        assert!(f.block_certified);
        // n=3, r=1, column (1, x, 0): W0 = 0, envelope = span{e1,e2}
        let s = pair_from_cols(&rest, vec![vec![one.clone(), t.clone(), zero.clone()]]);
        let f = canonical_flag(&s).unwrap();
        assert_eq!((f.v1.len(), f.v2.len(), f.v3.len()), (0, 2, 1));
        assert!(f.block_certified);
        // the algebra matches brute force over Mat3(F2)
        let e = end_algebra(&s).unwrap();
        let brute = end_algebra_bruteforce(&s);
        assert_eq!(1usize << e.dim, brute.len());
        for b in &brute {
            assert!(e.span_contains(b));
        }
    }

    #[test]
    fn blockform_cross_check() {
        let rest = setup(3, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut tried = 0;
        while tried < 20 {
            let p = Matrix::from_fn(3, 1, |_, _| rest.ctx.random(&mut rng));
            let Ok(s) = SubspacePair::new(rest.clone(), p) else { continue };
            if s.p_mat.submatrix(2, 3, 0, 1).rank() < 1 {
                continue; // bottom block singular
            }
            tried += 1;
            let a = end_algebra(&s).unwrap();
            let b = end_algebra_blockform(&s).unwrap();
            assert_eq!(a.dim, b.dim);
            for m in &b.basis {
                assert!(a.span_contains(m));
            }
        }
    }

    #[test]
    fn oracle_equivalence_sample() {
        // q = 2, n = 3, r in {1, 2}
        let rest = setup(2, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for r in [1usize, 2] {
            for _ in 0..5 {
                let p = Matrix::from_fn(3, r, |_, _| rest.ctx.random(&mut rng));
                let Ok(s) = SubspacePair::new(rest.clone(), p) else { continue };
                let e = end_algebra(&s).unwrap();
                let brute = end_algebra_bruteforce(&s);
                assert_eq!(1usize << e.dim, brute.len());
                for b in &brute {
                    assert!(e.span_contains(b));
                }
            }
        }
    }

    #[test]
    fn gl_equivariance() {
        let rest = setup(2, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let n = 3;
        for _ in 0..10 {
            let p = Matrix::from_fn(n, 1, |_, _| rest.ctx.random(&mut rng));
            let Ok(s) = SubspacePair::new(rest.clone(), p) else { continue };
            // random invertible gamma over k0
            let gamma = loop {
                let g = Matrix::from_fn(n, n, |_, _| {
                    rest.ctx.scalar(rng.gen_range(0..rest.subfield_size()))
                });
                if g.rank() == n {
                    break g;
                }
            };
            let s2 = SubspacePair::new(rest.clone(), gamma.matmul(&s.p_mat)).unwrap();
            let e1 = end_algebra(&s).unwrap();
            let e2 = end_algebra(&s2).unwrap();
            assert_eq!(e1.dim, e2.dim);
            let ginv = gamma.inverse().unwrap();
            for b in &e1.basis {
                assert!(e2.span_contains(&gamma.matmul(b).matmul(&ginv)));
            }
        }
    }

    #[test]
    fn rational_case_parabolic_dimension() {
        // W rational: dim E = r² + (n−r)² + r(n−r)
        let rest = setup(3, 2, 2); // k0 = L = F9 (d = e), everything rational
        let one = rest.ctx.one();
        let zero = rest.ctx.zero();
        for (n, r) in [(2usize, 1usize), (3, 1), (3, 2), (4, 2)] {
            let p = Matrix::from_fn(n, r, |i, j| if i == j { one.clone() } else { zero.clone() });
            let s = SubspacePair::new(rest.clone(), p).unwrap();
            let e = end_algebra(&s).unwrap();
            assert_eq!(e.dim, r * r + (n - r) * (n - r) + r * (n - r));
        }
    }

    #[test]
    fn hom_and_direct_sum() {
        let rest = setup(2, 4, 1);
        let one = rest.ctx.one();
        let t = rest.ctx.gen_el();
        let s1 = pair_from_cols(&rest, vec![vec![one.clone(), t.clone()]]);
        let s2 = pair_from_cols(&rest, vec![vec![one.clone(), t.frob(1)]]);
        // hom(S, S) = end(S)
        let h = hom_space(&s1, &s1).unwrap();
        let e = end_algebra(&s1).unwrap();
        assert_eq!(h.len(), e.dim);
        for m in &h {
            assert!(e.span_contains(m));
        }
        // End(S1 ⊕ S2) assembles from the 2×2 hom grid
        let ds = direct_sum(&s1, &s2).unwrap();
        let e_ds = end_algebra(&ds).unwrap();
        let h11 = hom_space(&s1, &s1).unwrap().len();
        let h12 = hom_space(&s2, &s1).unwrap().len();
        let h21 = hom_space(&s1, &s2).unwrap().len();
        let h22 = hom_space(&s2, &s2).unwrap().len();
        assert_eq!(e_ds.dim, h11 + h12 + h21 + h22);
        // block-diagonal inclusion End(S1) ⊕ End(S2) ⊆ End(S1 ⊕ S2)
        let zero = rest.ctx.zero();
        let e2 = end_algebra(&s2).unwrap();
        for b in &e.basis {
            let big = Matrix::from_fn(4, 4, |i, j| {
                if i < 2 && j < 2 {
                    b[(i, j)].clone()
                } else {
                    zero.clone()
                }
            });
            assert!(e_ds.span_contains(&big));
        }
        for b in &e2.basis {
            let big = Matrix::from_fn(4, 4, |i, j| {
                if i >= 2 && j >= 2 {
                    b[(i - 2, j - 2)].clone()
                } else {
                    zero.clone()
                }
            });
            assert!(e_ds.span_contains(&big));
        }
    }

    #[test]
    fn dual_pairs() {
        let rest = setup(2, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let p = Matrix::from_fn(3, 1, |_, _| rest.ctx.random(&mut rng));
            let Ok(s) = SubspacePair::new(rest.clone(), p) else { continue };
            let d = dual(&s).unwrap();
            assert_eq!((d.n, d.r), (3, 2));
            let dd = dual(&d).unwrap();
            assert!(crate::linalg::spans_equal(&dd.p_mat, &s.p_mat));
        }
    }

    #[test]
    fn generic_subspace_scalars() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        // (2,1), q=2: N2 = 3, need e >= 4; use e = 8 for headroom
        let rest = setup(2, 8, 1);
        let s = generic_subspace(2, 1, &rest, &mut rng, 50).unwrap();
        assert_eq!(end_algebra(&s).unwrap().dim, 1);
        // (3,1), q=3: N2 = 6, need e >= 7
        let rest = setup(3, 7, 1);
        let s = generic_subspace(3, 1, &rest, &mut rng, 50).unwrap();
        assert_eq!(end_algebra(&s).unwrap().dim, 1);
        // degenerate: relative degree 2 < N2+1
        let rest = setup(2, 2, 1);
        assert!(generic_subspace(2, 1, &rest, &mut rng, 10).is_err());
    }
}
