//! Symplectic spaces over k₀ = 𝔽_q, Lagrangian subspaces given over an
//! extension L, the symplectic endomorphism solver, the dagger involution
//! α† = J⁻¹αᵀJ, unitary groups Sp(V₀, W), group orders and the reduced index.

use crate::error::{budget, invalid, Result};
use crate::field::{Fq, Restriction};
use crate::linalg::{span_contains, Matrix, Ring};
use crate::pair::{end_algebra, envelope, rational_kernel, EndoAlgebra, SubspacePair};
use num::bigint::BigUint;
use num::One;
use rand::Rng;
use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

#[derive(Clone)]
pub struct SymplecticSpace {
    pub r: usize,
    pub rest: Arc<Restriction>,
}

/// The standard alternating form J = [[0, I_r], [−I_r, 0]] (zero diagonal,
/// also alternating in characteristic 2).
pub fn standard_j(zero: &Fq, r: usize) -> Matrix<Fq> {
    let one = zero.one();
    Matrix::from_fn(2 * r, 2 * r, |i, j| {
        if j == i + r {
            one.clone()
        } else if i == j + r {
            one.neg()
        } else {
            zero.clone()
        }
    })
}

impl SymplecticSpace {
    pub fn new(r: usize, rest: Arc<Restriction>) -> Self {
        SymplecticSpace { r, rest }
    }

    pub fn gram(&self) -> Matrix<Fq> {
        standard_j(&self.rest.ctx.zero(), self.r)
    }

    pub fn q(&self) -> u64 {
        self.rest.subfield_size()
    }

    /// ψ(x, y) = xᵀ J y.
    pub fn form(&self, x: &[Fq], y: &[Fq]) -> Fq {
        let r = self.r;
        let mut acc = self.rest.ctx.zero();
        for i in 0..r {
            acc = acc.add(&x[i].mul(&y[i + r]));
            acc = acc.sub(&x[i + r].mul(&y[i]));
        }
        acc
    }
}

/// PᵀJP = 0 and rank(P) = r.
pub fn is_lagrangian(p_mat: &Matrix<Fq>, space: &SymplecticSpace) -> Result<bool> {
    if p_mat.rows != 2 * space.r || p_mat.cols != space.r {
        return invalid(format!(
            "expected a {}x{} representative, got {}x{}",
            2 * space.r,
            space.r,
            p_mat.rows,
            p_mat.cols
        ));
    }
    let j = space.gram();
    let prod = p_mat.transpose().matmul(&j).matmul(p_mat);
    Ok(prod.is_zero_matrix() && p_mat.rank() == space.r)
}

#[derive(Clone)]
pub struct LagrangianPoint {
    pub space: SymplecticSpace,
    pub pair: SubspacePair,
}

impl LagrangianPoint {
    pub fn new(space: SymplecticSpace, p_mat: Matrix<Fq>) -> Result<Self> {
        if !is_lagrangian(&p_mat, &space)? {
            return invalid("representative is not Lagrangian");
        }
        let pair = SubspacePair::new(space.rest.clone(), p_mat)?;
        Ok(LagrangianPoint { space, pair })
    }
}

fn perms(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..r).collect();
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    rec(&mut Vec::new(), &mut items, &mut out);
    let _ = items;
    out
}

/// ε_i: x_i ↦ y_i, y_i ↦ −x_i for i in the mask; identity elsewhere.
fn epsilon_mat(zero: &Fq, r: usize, mask: u32) -> Matrix<Fq> {
    let one = zero.one();
    let mut m = Matrix::zero(zero, 2 * r, 2 * r);
    for i in 0..r {
        if mask >> i & 1 == 1 {
            m[(r + i, i)] = one.clone();
            m[(i, r + i)] = one.neg();
        } else {
            m[(i, i)] = one.clone();
            m[(r + i, r + i)] = one.clone();
        }
    }
    m
}

fn pair_perm_mat(zero: &Fq, r: usize, pi: &[usize]) -> Matrix<Fq> {
    let one = zero.one();
    let mut m = Matrix::zero(zero, 2 * r, 2 * r);
    for i in 0..r {
        m[(pi[i], i)] = one.clone();
        m[(r + pi[i], r + i)] = one.clone();
    }
    m
}

/// Finds h in the group generated by the ε_i and the coordinate-pair
/// permutations such that h·P has an invertible top r×r block, and returns
/// (h, h·P normalized to [I_r; T] with T symmetric).
pub fn normalize_lagrangian(lp: &LagrangianPoint) -> Result<(Matrix<Fq>, Matrix<Fq>)> {
    let r = lp.space.r;
    let zero = lp.space.rest.ctx.zero();
    let j = lp.space.gram();
    for pi in perms(r) {
        for mask in 0..1u32 << r {
            let h = epsilon_mat(&zero, r, mask).matmul(&pair_perm_mat(&zero, r, &pi));
            debug_assert_eq!(h.transpose().matmul(&j).matmul(&h), j);
            let hp = h.matmul(&lp.pair.p_mat);
            let top = hp.submatrix(0, r, 0, r);
            if let Some(tinv) = top.inverse() {
                let norm = hp.matmul(&tinv);
                let t = norm.submatrix(r, 2 * r, 0, r);
                if t != t.transpose() {
                    return invalid("normalized bottom block not symmetric (internal error)");
                }
                return Ok((h, norm));
            }
        }
    }
    invalid("no normalizing element found (representative not Lagrangian?)")
}

/// α† = J⁻¹ αᵀ J.
pub fn dagger(alpha: &Matrix<Fq>, space: &SymplecticSpace) -> Matrix<Fq> {
    let j = space.gram();
    let jinv = j.inverse().expect("J invertible");
    jinv.matmul(&alpha.transpose()).matmul(&j)
}

/// End(V₀, W) for a Lagrangian point: the GL solver on the underlying pair,
/// with a dagger-stability assertion and a cross-check against the linearized
/// block condition C + D·T − T·A − T·B·T = 0 on the H-normalized point.
pub fn end_algebra_symplectic(lp: &LagrangianPoint) -> Result<EndoAlgebra> {
    let e = end_algebra(&lp.pair)?;
    for b in &e.basis {
        if !e.span_contains(&dagger(b, &lp.space)) {
            return invalid("symplectic algebra is not dagger-stable (internal error)");
        }
    }
    let e2 = end_algebra_symp_blockform(lp)?;
    if e2.dim != e.dim {
        return invalid("block-form cross-check disagrees with the annihilator solver");
    }
    for b in &e2.basis {
        if !e.span_contains(b) {
            return invalid("block-form cross-check disagrees with the annihilator solver");
        }
    }
    Ok(e)
}

/// Independent solver: normalize to [I_r; T] (replacing W by hW), solve the
/// linearized condition in the n² subfield unknowns of α = [[A,B],[C,D]], and
/// conjugate the result back by h.
pub fn end_algebra_symp_blockform(lp: &LagrangianPoint) -> Result<EndoAlgebra> {
    let r = lp.space.r;
    let n = 2 * r;
    let zero = lp.space.rest.ctx.zero();
    let (h, norm) = normalize_lagrangian(lp)?;
    let t = norm.submatrix(r, n, 0, r);
    // equation (i,j): C[i,j] + Σ_k D[i,k]T[k,j] − Σ_k T[i,k]A[k,j]
    //                − Σ_{k,l} T[i,k]B[k,l]T[l,j] = 0
    // block positions in α: A=(0..r,0..r), B=(0..r,r..n), C=(r..n,0..r), D=(r..n,r..n)
    let idx = |bi: usize, bj: usize| bi * n + bj;
    let mut sys = Matrix::zero(&zero, r * r, n * n);
    for i in 0..r {
        for j in 0..r {
            let row = i * r + j;
            let one = zero.one();
            let cur = &sys[(row, idx(r + i, j))];
            sys[(row, idx(r + i, j))] = cur.add(&one);
            for k in 0..r {
                let c = t[(k, j)].clone();
                let cur = &sys[(row, idx(r + i, r + k))];
                sys[(row, idx(r + i, r + k))] = cur.add(&c);
                let c = t[(i, k)].neg();
                let cur = &sys[(row, idx(k, j))];
                sys[(row, idx(k, j))] = cur.add(&c);
                for l in 0..r {
                    let c = t[(i, k)].mul(&t[(l, j)]).neg();
                    let cur = &sys[(row, idx(k, r + l))];
                    sys[(row, idx(k, r + l))] = cur.add(&c);
                }
            }
        }
    }
    let ker = crate::field::subfield_kernel(&sys, &lp.space.rest);
    // conjugate back: α stabilizes hW iff h⁻¹αh stabilizes W
    let hinv = h.inverse().expect("h invertible");
    let mats: Vec<Vec<Fq>> = ker
        .into_iter()
        .map(|v| {
            let m = Matrix::from_fn(n, n, |i, j| v[i * n + j].clone());
            hinv.matmul(&m).matmul(&h).entries().to_vec()
        })
        .collect();
    let rows = if mats.is_empty() {
        vec![]
    } else {
        let m = Matrix::from_rows(mats).row_echelon();
        (0..m.rows).map(|i| m.row(i)).collect::<Vec<_>>()
    };
    let basis: Vec<Matrix<Fq>> =
        rows.into_iter().map(|v| Matrix::from_fn(n, n, |i, j| v[i * n + j].clone())).collect();
    let dim = basis.len();
    Ok(EndoAlgebra {
        n,
        dim,
        signature: (dim, rational_kernel(&lp.pair)?.len(), envelope(&lp.pair)?.len()),
        contains_identity: true,
        basis,
    })
}

/// |Sp_{2r}(𝔽_q)| = q^{r²} · Π_{i=1}^{r} (q^{2i} − 1).
pub fn sp_order(r: usize, q: u64) -> BigUint {
    let q = BigUint::from(q);
    let mut acc = q.pow((r * r) as u32);
    for i in 1..=r {
        acc *= q.pow(2 * i as u32) - BigUint::one();
    }
    acc
}

/// All α in the k₀-span of the algebra basis with α†α = I. Verifies the
/// result is a group (closure, inverses, contains ±I).
pub fn unitary_group(
    e: &EndoAlgebra,
    space: &SymplecticSpace,
    budget_points: u64,
) -> Result<Vec<Matrix<Fq>>> {
    let q = space.q();
    let total = q.checked_pow(e.dim as u32).filter(|&t| t <= budget_points);
    let Some(total) = total else {
        return budget(format!(
            "unitary group needs {}^{} points, budget is {budget_points}",
            q, e.dim
        ));
    };
    let zero = space.rest.ctx.zero();
    let n = e.n;
    let id = Matrix::identity(&zero, n);
    let j = space.gram();
    let jinv = j.inverse().expect("J invertible");
    let els = space.rest.subfield_elements();
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut alpha = Matrix::zero(&zero, n, n);
        for b in &e.basis {
            let coef = &els[(c % q) as usize];
            c /= q;
            if !coef.is_zero() {
                alpha = alpha.add(&b.scale(coef));
            }
        }
        let dag = jinv.matmul(&alpha.transpose()).matmul(&j);
        if dag.matmul(&alpha) == id {
            out.push(alpha);
        }
    }
    // group checks: ±I, inverses, closure (full when small, sampled otherwise)
    let neg_id = id.neg();
    if !out.contains(&id) || !out.contains(&neg_id) {
        return invalid("unitary group misses ±I (internal error)");
    }
    let keyed: HashSet<Vec<u64>> =
        out.iter().map(|m| m.entries().iter().map(|x| x.code()).collect()).collect();
    let key = |m: &Matrix<Fq>| m.entries().iter().map(|x| x.code()).collect::<Vec<u64>>();
    let check_pair = |a: &Matrix<Fq>, b: &Matrix<Fq>| keyed.contains(&key(&a.matmul(b)));
    if out.len() <= 300 {
        for a in &out {
            for b in &out {
                if !check_pair(a, b) {
                    return invalid("unitary group not closed under product (internal error)");
                }
            }
        }
    } else {
        let step = out.len() / 200 + 1;
        for (i, a) in out.iter().step_by(step).enumerate() {
            let b = &out[(i * 7919) % out.len()];
            if !check_pair(a, b) {
                return invalid("unitary group not closed under product (internal error)");
            }
        }
    }
    for a in &out {
        let inv = a.inverse().expect("unitary element invertible");
        if !keyed.contains(&key(&inv)) {
            return invalid("unitary group not closed under inverse (internal error)");
        }
    }
    Ok(out)
}

/// Symplectic transvection x ↦ x + λ·ψ(x, v)·v as a matrix over L.
pub fn transvection(space: &SymplecticSpace, v: &[Fq], lambda: &Fq) -> Matrix<Fq> {
    let n = 2 * space.r;
    let zero = space.rest.ctx.zero();
    let j = space.gram();
    // (Jv)ᵀ row vector: ψ(e_i, v) = e_iᵀ J v
    let jv = j.mul_vec(v);
    Matrix::from_fn(n, n, |i, k| {
        let base = if i == k { zero.one() } else { zero.clone() };
        base.add(&lambda.mul(&jv[k]).mul(&v[i]))
    })
}

/// Random element of Sp_{2r}(k₀) as a product of random transvections.
pub fn random_sp_element(space: &SymplecticSpace, rng: &mut impl Rng, steps: usize) -> Matrix<Fq> {
    let n = 2 * space.r;
    let zero = space.rest.ctx.zero();
    let q = space.q();
    let mut g = Matrix::identity(&zero, n);
    for _ in 0..steps {
        let v: Vec<Fq> =
            (0..n).map(|_| space.rest.sub_el(rng.gen_range(0..q))).collect();
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let lambda = space.rest.sub_el(rng.gen_range(1..q));
        g = g.matmul(&transvection(space, &v, &lambda));
    }
    g
}

// ---------- packed small-field machinery for honest group enumeration ----------

struct SmallField {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
}

impl SmallField {
    fn new(rest: &Restriction) -> Result<Self> {
        let q = rest.subfield_size();
        if q > 4 {
            return budget(format!("packed enumeration supports q <= 4, got {q}"));
        }
        let q = q as usize;
        let els = rest.subfield_elements();
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = rest.sub_code(&els[a].add(&els[b])) as u8;
                mul[a * q + b] = rest.sub_code(&els[a].mul(&els[b])) as u8;
            }
        }
        Ok(SmallField { q, add, mul })
    }
}

/// Enumerates Sp_{2r}(𝔽_q) by breadth-first closure from a transvection
/// generating set, verifying afterwards that every symplectic transvection
/// lies in the closure. Returns the exact group size. Supports q ≤ 4, r ≤ 2.
pub fn sp_group_size_enumerated(r: usize, rest: &Arc<Restriction>, budget_size: u64) -> Result<u64> {
    let n = 2 * r;
    if n > 4 {
        return budget("packed enumeration supports 2r <= 4");
    }
    let sf = SmallField::new(rest)?;
    let q = sf.q;
    // entries packed 2 bits each, rows packed into a u8, matrix into u32 keys
    let bits = 2usize;
    let pack_row = |row: &[u8]| -> u8 {
        row.iter().rev().fold(0u8, |acc, &e| (acc << bits) | e)
    };
    let unpack_row = |pr: u8| -> Vec<u8> {
        (0..n).map(|k| (pr >> (bits * k)) as u8 & 0x3).collect()
    };
    // packed addition of two rows (per-lane field addition)
    let mut padd = vec![0u8; 256 * 256];
    for a in 0..256usize {
        let ra = unpack_row(a as u8);
        if ra.iter().any(|&e| e as usize >= q) {
            continue;
        }
        for b in 0..256usize {
            let rb = unpack_row(b as u8);
            if rb.iter().any(|&e| e as usize >= q) {
                continue;
            }
            let sum: Vec<u8> =
                ra.iter().zip(&rb).map(|(&x, &y)| sf.add[x as usize * q + y as usize]).collect();
            padd[a * 256 + b] = pack_row(&sum);
        }
    }
    // scalar scaling of a packed row
    let mut pscale = vec![0u8; 4 * 256];
    for s in 0..q {
        for a in 0..256usize {
            let ra = unpack_row(a as u8);
            if ra.iter().any(|&e| e as usize >= q) {
                continue;
            }
            let sc: Vec<u8> = ra.iter().map(|&x| sf.mul[s * q + x as usize]).collect();
            pscale[s * 256 + a] = pack_row(&sc);
        }
    }

    let space = SymplecticSpace::new(r, rest.clone());
    let to_packed = |m: &Matrix<Fq>| -> [u8; 4] {
        let mut rows = [0u8; 4];
        for i in 0..n {
            let row: Vec<u8> = (0..n).map(|j| rest.sub_code(&m[(i, j)]) as u8).collect();
            rows[i] = pack_row(&row);
        }
        rows
    };
    let key = |m: &[u8; 4]| -> u32 { u32::from_le_bytes(*m) };

    // right-multiplication a·g of packed a by packed generator g:
    // row_i(a·g) = Σ_k a[i,k] · row_k(g)
    let pmul = |a: &[u8; 4], g: &[u8; 4], padd: &[u8], pscale: &[u8]| -> [u8; 4] {
        let mut out = [0u8; 4];
        for i in 0..n {
            let arow = a[i];
            let mut acc = 0u8;
            for (k, grow) in g.iter().enumerate().take(n) {
                let coef = (arow >> (bits * k)) & 0x3;
                let scaled = pscale[coef as usize * 256 + *grow as usize];
                acc = padd[acc as usize * 256 + scaled as usize];
            }
            out[i] = acc;
        }
        out
    };

    // all transvections, for the initial generators and the final verification
    let els = rest.subfield_elements();
    let mut all_trans: Vec<[u8; 4]> = Vec::new();
    for vcode in 1..(q as u64).pow(n as u32) {
        let mut c = vcode;
        let v: Vec<Fq> = (0..n)
            .map(|_| {
                let x = els[(c % q as u64) as usize].clone();
                c /= q as u64;
                x
            })
            .collect();
        for lcode in 1..q as u64 {
            let t = transvection(&space, &v, &els[lcode as usize]);
            all_trans.push(to_packed(&t));
        }
    }

    // start from a small deterministic generator subset, grow on demand
    let mut gens: Vec<[u8; 4]> = all_trans.iter().take(2 * n + 3).cloned().collect();
    for _round in 0..12 {
        let mut seen: HashSet<u32> = HashSet::new();
        let mut queue: VecDeque<[u8; 4]> = VecDeque::new();
        let id = to_packed(&Matrix::identity(&rest.ctx.zero(), n));
        seen.insert(key(&id));
        queue.push_back(id);
        let mut overflow = false;
        while let Some(cur) = queue.pop_front() {
            for g in &gens {
                let prod = pmul(&cur, g, &padd, &pscale);
                if seen.insert(key(&prod)) {
                    if seen.len() as u64 > budget_size {
                        overflow = true;
                        break;
                    }
                    queue.push_back(prod);
                }
            }
            if overflow {
                break;
            }
        }
        if overflow {
            return budget(format!("group closure exceeded budget {budget_size}"));
        }
        if let Some(missing) = all_trans.iter().find(|t| !seen.contains(&key(t))) {
            gens.push(*missing);
            continue;
        }
        return Ok(seen.len() as u64);
    }
    budget("transvection closure did not stabilize")
}

/// Finds a symplectic basis of the subquotient W₀^⊥/W₀ and returns lifted
/// pair vectors (u_1..u_m, v_1..v_m) in the ambient space with ψ(u_i, v_j) =
/// δ_ij and all other pairings zero modulo W₀.
fn subquotient_symplectic_basis(
    space: &SymplecticSpace,
    w0: &[Vec<Fq>],
    w0perp: &[Vec<Fq>],
) -> Result<(Vec<Vec<Fq>>, Vec<Vec<Fq>>)> {
    let mut work: Vec<Vec<Fq>> = w0perp.to_vec();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    loop {
        // find a pair with nonzero pairing
        let mut found = None;
        'outer: for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                if !space.form(&work[i], &work[j]).is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let u = work[i].clone();
        let c = space.form(&u, &work[j]);
        let cinv = c.inv().expect("nonzero pairing");
        let v: Vec<Fq> = work[j].iter().map(|x| x.mul(&cinv)).collect();
        work.remove(j);
        work.remove(i);
        for w in work.iter_mut() {
            // w ← w − ψ(w,v)·u + ψ(w,u)·v, which kills both pairings
            let a = space.form(w, &v);
            let b = space.form(w, &u);
            for (t, (uu, vv)) in w.iter_mut().zip(u.iter().zip(v.iter())) {
                *t = t.sub(&a.mul(uu)).add(&b.mul(vv));
            }
        }
        us.push(u);
        vs.push(v);
    }
    // the remaining vectors must lie in the radical, i.e. in span(W₀)
    let zero = space.rest.ctx.zero();
    let w0span = if w0.is_empty() {
        Matrix::zero(&zero, 2 * space.r, 0)
    } else {
        Matrix::from_cols(w0.to_vec())
    };
    for w in &work {
        if !span_contains(&w0span, w) {
            return invalid("subquotient radical exceeds W0 (internal error)");
        }
    }
    Ok((us, vs))
}

/// Reduced index ind(W) = |Sp(W₀^⊥/W₀)| / |Sp(V₀, W) on the subquotient|.
pub fn reduced_index(lp: &LagrangianPoint, budget_points: u64) -> Result<BigUint> {
    let space = &lp.space;
    let zero = space.rest.ctx.zero();
    let j = space.gram();
    let w0 = rational_kernel(&lp.pair)?;
    let wt0 = envelope(&lp.pair)?;

    // W₀ = W̃₀^⊥ always holds here; asserted as a consistency check
    let wt0_mat = Matrix::from_cols(wt0.clone());
    let perp_of_wt0 = wt0_mat.transpose().matmul(&j).kernel();
    let w0_mat = if w0.is_empty() {
        Matrix::zero(&zero, 2 * space.r, 0)
    } else {
        Matrix::from_cols(w0.clone())
    };
    if !crate::linalg::spans_equal(&perp_of_wt0, &w0_mat) {
        return invalid("W0 != perp of the envelope (internal error)");
    }

    let m = space.r - w0.len();
    if m == 0 {
        return Ok(BigUint::one());
    }

    // W₀^⊥ and a symplectic basis of the subquotient
    let w0perp = if w0.is_empty() {
        Matrix::identity(&zero, 2 * space.r)
    } else {
        w0_mat.transpose().matmul(&j).kernel()
    };
    let w0perp_cols: Vec<Vec<Fq>> = (0..w0perp.cols).map(|c| w0perp.col(c)).collect();
    let (us, vs) = subquotient_symplectic_basis(space, &w0, &w0perp_cols)?;
    if us.len() != m {
        return invalid("subquotient dimension mismatch (internal error)");
    }

    // coordinates of W in the basis [W₀ | u's | v's] of W₀^⊥, W₀-part dropped
    let mut cols = w0.clone();
    cols.extend(us.iter().cloned());
    cols.extend(vs.iter().cloned());
    let basis = Matrix::from_cols(cols);
    let mut red_cols = Vec::new();
    for c in 0..lp.pair.p_mat.cols {
        let p = lp.pair.p_mat.col(c);
        let Some(x) = basis.solve(&p) else {
            return invalid("W not contained in W0-perp (internal error)");
        };
        red_cols.push(x[w0.len()..].to_vec());
    }
    let reduced = Matrix::from_cols(red_cols).column_echelon();
    if reduced.cols != m {
        return invalid("reduced subspace is not Lagrangian-sized (internal error)");
    }
    let red_space = SymplecticSpace::new(m, space.rest.clone());
    let red_lp = LagrangianPoint::new(red_space.clone(), reduced)?;
    let e = end_algebra_symplectic(&red_lp)?;
    let u = unitary_group(&e, &red_space, budget_points)?;
    let total = sp_order(m, space.q());
    let usize_big = BigUint::from(u.len());
    if (&total % &usize_big) != BigUint::from(0u32) {
        return invalid("unitary order does not divide the symplectic order (internal error)");
    }
    Ok(total / usize_big)
}

/// A Lagrangian point [I; T], T symmetric, whose r(r+1)/2 distinct entries
/// have k₀-independent quadratic monomial values; such points have scalar
/// endomorphism algebra. Random sampling with a generator-power fallback.
pub fn generic_lagrangian(
    r: usize,
    rest: &Arc<Restriction>,
    rng: &mut impl Rng,
    attempts: usize,
) -> Result<LagrangianPoint> {
    if r == 0 {
        return invalid("need r >= 1");
    }
    let m = r * (r + 1) / 2;
    let n2 = crate::pair::quadratic_monomial_count(m);
    if rest.m < n2 + 1 {
        return invalid(format!(
            "extension too small: relative degree {} < N₂ + 1 = {}",
            rest.m,
            n2 + 1
        ));
    }
    let ctx = &rest.ctx;
    let zero = ctx.zero();
    let build = |tri: &[Fq]| -> Option<Vec<Fq>> {
        let flat = Matrix::from_rows(vec![tri.to_vec()]);
        crate::pair::quadratic_values_independent(&flat, rest).then(|| tri.to_vec())
    };
    let mut tri = None;
    for _ in 0..attempts {
        let cand: Vec<Fq> = (0..m).map(|_| ctx.random(rng)).collect();
        if let Some(t) = build(&cand) {
            tri = Some(t);
            break;
        }
    }
    if tri.is_none() {
        let alpha = ctx.gen_el();
        let mut pow = BigUint::from(1u32);
        let cand: Vec<Fq> = (0..m)
            .map(|_| {
                let v = alpha.pow_big(&pow);
                pow *= 3u32;
                v
            })
            .collect();
        tri = build(&cand);
    }
    let Some(tri) = tri else {
        return invalid("failed to construct a generic Lagrangian (extension too small?)");
    };
    // unpack the upper triangle into a symmetric T
    let mut t = Matrix::zero(&zero, r, r);
    let mut idx = 0;
    for i in 0..r {
        for j in i..r {
            t[(i, j)] = tri[idx].clone();
            t[(j, i)] = tri[idx].clone();
            idx += 1;
        }
    }
    let p = Matrix::identity(&zero, r).vstack(&t);
    LagrangianPoint::new(SymplecticSpace::new(r, rest.clone()), p)
}
