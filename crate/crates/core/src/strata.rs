//! Exhaustive enumeration of Grassmannian and Lagrangian points over a finite
//! coordinate field, and stratification of the point set by endomorphism
//! algebra (signature triple, refined by conjugacy class when the exhaustive
//! search over GL_n(k₀) fits in the budget).

use crate::error::{budget, invalid, Result};
use crate::field::{FieldCtx, Fq, Restriction};
use crate::linalg::{Matrix, Ring};
use crate::pair::{end_algebra, EndoAlgebra, SubspacePair};
use crate::symplectic::{end_algebra_symplectic, standard_j, LagrangianPoint, SymplecticSpace};
use num::bigint::BigUint;
use num::One;
use std::sync::Arc;

/// Gaussian binomial [n choose r]_q: the number of r-dimensional subspaces of
/// an n-dimensional space over 𝔽_q.
pub fn gaussian_binomial(n: usize, r: usize, q: u64) -> BigUint {
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= q.pow((n - i) as u32) - BigUint::one();
        den *= q.pow((i + 1) as u32) - BigUint::one();
    }
    num / den
}

/// Number of Lagrangian subspaces of a 2r-dimensional symplectic space over
/// 𝔽_q: Π_{i=1}^{r} (q^i + 1).
pub fn lagrangian_count(r: usize, q: u64) -> BigUint {
    let q = BigUint::from(q);
    let mut acc = BigUint::one();
    for i in 1..=r {
        acc *= q.pow(i as u32) + BigUint::one();
    }
    acc
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic combination
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All r-dimensional subspaces of L^n, one column-reduced echelon
/// representative each, in deterministic order (pivot sets lexicographic,
/// then free-entry codes ascending).
pub fn enumerate_grassmannian(
    n: usize,
    r: usize,
    ctx: &Arc<FieldCtx>,
    budget_points: u64,
) -> Result<Vec<Matrix<Fq>>> {
    if r == 0 || r >= n {
        return invalid(format!("need 0 < r < n, got r = {r}, n = {n}"));
    }
    let Some(q) = ctx.size_u64() else {
        return budget("coordinate field too large to enumerate");
    };
    let count = gaussian_binomial(n, r, q);
    if count > BigUint::from(budget_points) {
        return budget(format!("{count} points exceed the budget {budget_points}"));
    }
    let zero = ctx.zero();
    let mut out = Vec::new();
    for pivots in combinations(n, r) {
        // free entries of the rref of the r×n row-space matrix: (j, c) with
        // c > pivots[j] and c not a pivot column
        let mut free = Vec::new();
        for j in 0..r {
            for c in pivots[j] + 1..n {
                if !pivots.contains(&c) {
                    free.push((j, c));
                }
            }
        }
        let total = q.pow(free.len() as u32);
        for code in 0..total {
            let mut m = Matrix::zero(&zero, r, n);
            for (j, &p) in pivots.iter().enumerate() {
                m[(j, p)] = zero.one();
            }
            let mut c = code;
            for &(j, col) in &free {
                m[(j, col)] = ctx.from_code(c % q);
                c /= q;
            }
            out.push(m.transpose());
        }
    }
    debug_assert_eq!(BigUint::from(out.len()), count);
    Ok(out)
}

/// All Lagrangian r-dimensional subspaces of the standard symplectic 2r-space
/// over L, by isotropy-filtering the Grassmannian; exactly Π (q^i + 1) points.
pub fn enumerate_lagrangian(
    r: usize,
    ctx: &Arc<FieldCtx>,
    budget_points: u64,
) -> Result<Vec<Matrix<Fq>>> {
    let Some(q) = ctx.size_u64() else {
        return budget("coordinate field too large to enumerate");
    };
    let count = lagrangian_count(r, q);
    if count > BigUint::from(budget_points) {
        return budget(format!("{count} points exceed the budget {budget_points}"));
    }
    // the ambient Grassmannian is polynomially larger; cap it independently
    let all = enumerate_grassmannian(2 * r, r, ctx, 10_000_000)?;
    let zero = ctx.zero();
    let j = standard_j(&zero, r);
    let out: Vec<Matrix<Fq>> = all
        .into_iter()
        .filter(|p| p.transpose().matmul(&j).matmul(p).is_zero_matrix())
        .collect();
    if BigUint::from(out.len()) != count {
        return invalid("isotropic point count disagrees with the product formula");
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Gl,
    Sp,
}

#[derive(Clone)]
pub struct StratumReport {
    pub signature: (usize, usize, usize),
    pub class_id: usize,
    /// true when conjugacy refinement was skipped (budget)
    pub coarse: bool,
    pub count: u64,
    pub representative: Matrix<Fq>,
    pub algebra: EndoAlgebra,
}

pub struct Stratification {
    pub reports: Vec<StratumReport>,
    pub total: u64,
    /// class-id pairs (i, j), i ≠ j, with algebra_i contained in a
    /// GL_n(k₀)-conjugate of algebra_j (empty when coarse)
    pub inclusions: Vec<(usize, usize)>,
    /// stratum class id of each input point, in input order
    pub point_class: Vec<usize>,
}

/// Does some γ ∈ GL_n(k₀) satisfy γ·span(a)·γ⁻¹ ⊆ span(b)? Exhaustive scan.
fn conjugate_included(a: &EndoAlgebra, b: &EndoAlgebra, rest: &Restriction) -> bool {
    // γ = identity handles the common case of literally equal algebras
    if a.basis.iter().all(|m| b.span_contains(m)) {
        return true;
    }
    let n = a.n;
    let q = rest.subfield_size();
    let els = rest.subfield_elements();
    let total = q.pow((n * n) as u32);
    'gamma: for code in 0..total {
        let mut c = code;
        let gamma = Matrix::from_fn(n, n, |_, _| {
            let v = els[(c % q) as usize].clone();
            c /= q;
            v
        });
        let Some(ginv) = gamma.inverse() else { continue };
        for base in &a.basis {
            if !b.span_contains(&gamma.matmul(base).matmul(&ginv)) {
                continue 'gamma;
            }
        }
        return true;
    }
    false
}

fn algebras_conjugate(a: &EndoAlgebra, b: &EndoAlgebra, rest: &Restriction) -> bool {
    a.dim == b.dim && conjugate_included(a, b, rest)
}

/// Buckets the given points by endomorphism algebra. Signature grouping is
/// refined into conjugacy classes when q^{n²} ≤ conj_budget; otherwise the
/// reports carry the coarse flag. Verifies that the inclusion relation on
/// class representatives is a strict partial order compatible with dimension.
pub fn stratify(
    points: &[Matrix<Fq>],
    rest: &Arc<Restriction>,
    mode: Mode,
    conj_budget: u64,
) -> Result<Stratification> {
    if points.is_empty() {
        return invalid("no points to stratify");
    }
    let n = points[0].rows;
    let q = rest.subfield_size();
    let refine = (q as f64).powi((n * n) as i32) <= conj_budget as f64;

    let mut reports: Vec<StratumReport> = Vec::new();
    let mut point_class = Vec::with_capacity(points.len());
    for p in points {
        let alg = match mode {
            Mode::Gl => {
                let s = SubspacePair::new(rest.clone(), p.clone())?;
                end_algebra(&s)?
            }
            Mode::Sp => {
                let space = SymplecticSpace::new(p.cols, rest.clone());
                let lp = LagrangianPoint::new(space, p.clone())?;
                end_algebra_symplectic(&lp)?
            }
        };
        let found = reports.iter().position(|rep| {
            rep.signature == alg.signature
                && (!refine || algebras_conjugate(&alg, &rep.algebra, rest))
        });
        match found {
            Some(i) => {
                reports[i].count += 1;
                point_class.push(reports[i].class_id);
            }
            None => {
                let class_id = reports.len();
                point_class.push(class_id);
                reports.push(StratumReport {
                    signature: alg.signature,
                    class_id,
                    coarse: !refine,
                    count: 1,
                    representative: p.clone(),
                    algebra: alg,
                });
            }
        }
    }

    let mut inclusions = Vec::new();
    if refine {
        for i in 0..reports.len() {
            for j in 0..reports.len() {
                if i != j && conjugate_included(&reports[i].algebra, &reports[j].algebra, rest) {
                    // strictness: mutual inclusion would mean equal classes
                    if reports[i].algebra.dim >= reports[j].algebra.dim {
                        return invalid("inclusion between distinct classes must be strict");
                    }
                    inclusions.push((i, j));
                }
            }
        }
        // transitivity of the computed relation
        for &(a, b) in &inclusions {
            for &(c, d) in &inclusions {
                if b == c && a != d && !inclusions.contains(&(a, d)) {
                    return invalid("computed inclusion relation is not transitive");
                }
            }
        }
    }

    let total = points.len() as u64;
    debug_assert_eq!(reports.iter().map(|r| r.count).sum::<u64>(), total);
    reports.sort_by_key(|r| (std::cmp::Reverse(r.algebra.dim), r.signature, r.class_id));
    Ok(Stratification { reports, total, inclusions, point_class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use std::collections::HashMap;

    fn setup(p: u64, e: usize, d: usize) -> Arc<Restriction> {
        Arc::new(Restriction::new(&make_field(p, e).unwrap(), d).unwrap())
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(2, 1, 4), BigUint::from(5u32));
        assert_eq!(gaussian_binomial(4, 2, 2), BigUint::from(35u32));
        assert_eq!(gaussian_binomial(3, 1, 3), BigUint::from(13u32));
    }

    #[test]
    fn grassmannian_enumeration() {
        let f4 = make_field(2, 2).unwrap();
        let pts = enumerate_grassmannian(2, 1, &f4, 1000).unwrap();
        assert_eq!(pts.len(), 5);
        let f2 = make_field(2, 1).unwrap();
        let pts = enumerate_grassmannian(4, 2, &f2, 1000).unwrap();
        assert_eq!(pts.len(), 35);
        // all distinct as subspaces (echelon reps are canonical)
        let mut keys: Vec<Vec<u64>> = pts
            .iter()
            .map(|p| p.entries().iter().map(|x| x.code()).collect())
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 35);
        // bounds
        assert!(enumerate_grassmannian(3, 3, &f2, 1000).is_err());
        assert!(enumerate_grassmannian(3, 0, &f2, 1000).is_err());
        // budget
        assert!(matches!(
            enumerate_grassmannian(4, 2, &f2, 10),
            Err(crate::Error::Budget(_))
        ));
    }

    #[test]
    fn lagrangian_enumeration() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(enumerate_lagrangian(1, &f3, 1000).unwrap().len(), 4);
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(enumerate_lagrangian(2, &f2, 1000).unwrap().len(), 15);
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(enumerate_lagrangian(2, &f4, 1000).unwrap().len(), 85);
    }

    #[test]
    fn stratify_line_in_plane_q2() {
        // (2,1), k0 = F2, enumerate over F16: strata 3, 2, 12 with dims 3, 2, 1
        let rest = setup(2, 4, 1);
        let pts = enumerate_grassmannian(2, 1, &rest.ctx, 1000).unwrap();
        let st = stratify(&pts, &rest, Mode::Gl, 1 << 24).unwrap();
        assert_eq!(st.total, 17);
        let summary: Vec<(usize, u64)> =
            st.reports.iter().map(|r| (r.algebra.dim, r.count)).collect();
        assert_eq!(summary, vec![(3, 3), (2, 2), (1, 12)]);
        // partial order: Borel ⊇ conjugates of the quadratic algebra? no —
        // inclusions must go upward in dimension from scalars
        for &(i, j) in &st.inclusions {
            assert!(st.reports.iter().find(|r| r.class_id == i).unwrap().algebra.dim
                < st.reports.iter().find(|r| r.class_id == j).unwrap().algebra.dim);
        }
    }

    #[test]
    fn stratify_line_in_plane_q3() {
        let rest = setup(3, 4, 1);
        let pts = enumerate_grassmannian(2, 1, &rest.ctx, 1000).unwrap();
        let st = stratify(&pts, &rest, Mode::Gl, 1 << 24).unwrap();
        assert_eq!(st.total, 82);
        let summary: Vec<(usize, u64)> =
            st.reports.iter().map(|r| (r.algebra.dim, r.count)).collect();
        assert_eq!(summary, vec![(3, 4), (2, 6), (1, 72)]);
    }

    #[test]
    fn lagrangian_r1_matches_grassmannian() {
        let rest = setup(3, 4, 1);
        let g_pts = enumerate_grassmannian(2, 1, &rest.ctx, 1000).unwrap();
        let l_pts = enumerate_lagrangian(1, &rest.ctx, 1000).unwrap();
        assert_eq!(g_pts.len(), l_pts.len());
        let g_st = stratify(&g_pts, &rest, Mode::Gl, 1 << 24).unwrap();
        let l_st = stratify(&l_pts, &rest, Mode::Sp, 1 << 24).unwrap();
        let g_sum: Vec<_> = g_st.reports.iter().map(|r| (r.signature, r.count)).collect();
        let l_sum: Vec<_> = l_st.reports.iter().map(|r| (r.signature, r.count)).collect();
        assert_eq!(g_sum, l_sum);
    }

    #[test]
    fn frobenius_orbit_stability() {
        // applying Frobenius to a point's coordinates stays in its stratum
        let rest = setup(2, 4, 1);
        let pts = enumerate_grassmannian(2, 1, &rest.ctx, 1000).unwrap();
        let st = stratify(&pts, &rest, Mode::Gl, 1 << 24).unwrap();
        let key = |p: &Matrix<Fq>| -> Vec<u64> {
            p.column_echelon().entries().iter().map(|x| x.code()).collect()
        };
        let lookup: HashMap<Vec<u64>, usize> =
            pts.iter().zip(&st.point_class).map(|(p, &c)| (key(p), c)).collect();
        for (p, &c) in pts.iter().zip(&st.point_class) {
            let fp = p.map(|x| x.frob(1));
            assert_eq!(lookup[&key(&fp)], c);
        }
    }

    #[test]
    fn maximal_stratum_nonempty() {
        // signature (1, 0, n) shows up whenever L is big enough
        let rest = setup(2, 6, 1);
        let pts = enumerate_grassmannian(3, 1, &rest.ctx, 100_000).unwrap();
        // a deterministic slice keeps the test fast; generic points dominate
        let pts: Vec<_> = pts.into_iter().step_by(13).collect();
        let st = stratify(&pts, &rest, Mode::Gl, 1 << 12).unwrap();
        assert!(st.reports.iter().any(|r| r.signature == (1, 0, 3) && r.count > 0));
        assert_eq!(st.reports.iter().map(|r| r.count).sum::<u64>(), st.total);
    }
}
