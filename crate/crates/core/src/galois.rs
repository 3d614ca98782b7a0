//! Galois rings W(𝔽_{p^e})/p^j: the unramified degree-e extension of ℤ/p^j,
//! realized as (ℤ/p^j)[x]/(f) for the same modulus f used for the residue
//! field, together with the Frobenius lift σ computed through Teichmüller
//! digits.

use crate::error::{invalid, Result};
use crate::field::{make_field, FieldCtx, Fq};
use crate::linalg::Ring;
use std::sync::Arc;

pub struct GaloisRingCtx {
    pub p: u64,
    pub e: usize,
    /// precision: elements live mod p^j
    pub j: usize,
    /// p^j
    pub q: u64,
    /// monic degree-e modulus, coefficients in 0..p (a lift of the residue
    /// field modulus, irreducible mod p by construction)
    pub modulus: Vec<u64>,
    pub field: Arc<FieldCtx>,
    /// images σ(x^i) of the power basis, filled on first use; σ fixes ℤ/p^j
    /// pointwise, so these determine σ as a linear map
    frob_table: std::sync::OnceLock<Vec<Vec<u64>>>,
}

/// W(𝔽_{p^e})/p^j. Precision j ≥ 1; p^{2j} must fit comfortably in u64.
pub fn galois_ring(p: u64, e: usize, j: usize) -> Result<Arc<GaloisRingCtx>> {
    if j == 0 || j > 20 {
        return invalid(format!("precision j = {j} out of range 1..=20"));
    }
    let q = p.checked_pow(j as u32).ok_or_else(|| crate::Error::Invalid("p^j overflows".into()))?;
    if q >= 1 << 31 {
        return invalid("p^j too large for u64 arithmetic");
    }
    let field = make_field(p, e)?;
    Ok(Arc::new(GaloisRingCtx {
        p,
        e,
        j,
        q,
        modulus: field.modulus.clone(),
        field,
        frob_table: std::sync::OnceLock::new(),
    }))
}

impl GaloisRingCtx {
    pub fn zero(self: &Arc<Self>) -> Gr {
        Gr { ctx: self.clone(), c: vec![0; self.e] }
    }

    pub fn one(self: &Arc<Self>) -> Gr {
        self.scalar(1)
    }

    pub fn scalar(self: &Arc<Self>, v: u64) -> Gr {
        let mut c = vec![0; self.e];
        c[0] = v % self.q;
        Gr { ctx: self.clone(), c }
    }

    pub fn el(self: &Arc<Self>, coeffs: &[u64]) -> Gr {
        let mut c = vec![0; self.e];
        for (i, &v) in coeffs.iter().enumerate().take(self.e) {
            c[i] = v % self.q;
        }
        Gr { ctx: self.clone(), c }
    }

    /// Coefficient-wise naive lift of a residue-field element.
    pub fn lift(self: &Arc<Self>, a: &Fq) -> Gr {
        assert!(Arc::ptr_eq(&a.ctx, &self.field), "residue field mismatch");
        Gr { ctx: self.clone(), c: a.c.clone() }
    }

    /// The Teichmüller representative ω(ā): the unique lift with ω^{p^e} = ω.
    pub fn teichmuller(self: &Arc<Self>, a: &Fq) -> Gr {
        let mut x = self.lift(a);
        // each x ↦ x^{p^e} step gains one p-adic digit of the fixed point
        for _ in 1..self.j {
            x = x.pow(self.p.pow(self.e as u32));
        }
        x
    }

    /// σ as a table lookup: linear over ℤ/p^j since σ fixes the scalars.
    pub fn frob_fast(self: &Arc<Self>, a: &Gr) -> Gr {
        let table = self.frob_table.get_or_init(|| {
            (0..self.e)
                .map(|i| {
                    let mut c = vec![0; self.e];
                    c[i] = 1;
                    gr_frobenius(&Gr { ctx: self.clone(), c }).c
                })
                .collect()
        });
        let mut c = vec![0u64; self.e];
        for (i, &ai) in a.c.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (k, &t) in table[i].iter().enumerate() {
                c[k] = (c[k] + ai * t) % self.q;
            }
        }
        Gr { ctx: self.clone(), c }
    }

    pub fn random(self: &Arc<Self>, rng: &mut impl rand::Rng) -> Gr {
        let c = (0..self.e).map(|_| rng.gen_range(0..self.q)).collect();
        Gr { ctx: self.clone(), c }
    }
}

#[derive(Clone)]
pub struct Gr {
    pub ctx: Arc<GaloisRingCtx>,
    pub c: Vec<u64>,
}

impl PartialEq for Gr {
    fn eq(&self, o: &Self) -> bool {
        self.c == o.c
    }
}

impl Eq for Gr {}

impl std::hash::Hash for Gr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl std::fmt::Debug for Gr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Gr{:?}", self.c)
    }
}

impl Gr {
    fn q(&self) -> u64 {
        self.ctx.q
    }

    pub fn add(&self, o: &Self) -> Self {
        let q = self.q();
        let c = self.c.iter().zip(&o.c).map(|(a, b)| (a + b) % q).collect();
        Gr { ctx: self.ctx.clone(), c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let q = self.q();
        let c = self.c.iter().zip(&o.c).map(|(a, b)| (a + q - b) % q).collect();
        Gr { ctx: self.ctx.clone(), c }
    }

    pub fn neg(&self) -> Self {
        let q = self.q();
        let c = self.c.iter().map(|a| (q - a) % q).collect();
        Gr { ctx: self.ctx.clone(), c }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let q = self.q();
        let e = self.ctx.e;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (k, &b) in o.c.iter().enumerate() {
                prod[i + k] = (prod[i + k] + a * b) % q;
            }
        }
        // reduce by the monic modulus
        for i in (e..2 * e - 1).rev() {
            let top = prod[i];
            if top == 0 {
                continue;
            }
            prod[i] = 0;
            for k in 0..e {
                let f = self.ctx.modulus[k];
                if f != 0 {
                    prod[i - e + k] = (prod[i - e + k] + q - top * f % q) % q;
                }
            }
        }
        prod.truncate(e);
        Gr { ctx: self.ctx.clone(), c: prod }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Reduction mod p into the residue field.
    pub fn red(&self) -> Fq {
        let p = self.ctx.p;
        self.ctx.field.el(&self.c.iter().map(|&v| v % p).collect::<Vec<_>>())
    }

    pub fn is_unit(&self) -> bool {
        !self.red().is_zero()
    }

    /// Hensel-lifted inverse (None for non-units).
    pub fn inv(&self) -> Option<Self> {
        let r = self.red().inv()?;
        let mut x = self.ctx.lift(&r);
        let two = self.ctx.scalar(2);
        for _ in 0..self.ctx.j.next_power_of_two().trailing_zeros() + 1 {
            x = x.mul(&two.sub(&self.mul(&x)));
        }
        debug_assert!(self.mul(&x) == self.ctx.one());
        Some(x)
    }

    /// Exact division by p (requires every coefficient divisible by p); the
    /// result is only meaningful mod p^{j−1}.
    pub fn div_p(&self) -> Option<Self> {
        let p = self.ctx.p;
        if self.c.iter().any(|&v| v % p != 0) {
            return None;
        }
        Some(Gr { ctx: self.ctx.clone(), c: self.c.iter().map(|&v| v / p).collect() })
    }

    /// Re-interpret in a context of different precision over the same field
    /// (coefficients reduced mod the target p^j).
    pub fn with_precision(&self, ctx2: &Arc<GaloisRingCtx>) -> Gr {
        assert_eq!(self.ctx.p, ctx2.p);
        assert_eq!(self.ctx.e, ctx2.e);
        Gr { ctx: ctx2.clone(), c: self.c.iter().map(|&v| v % ctx2.q).collect() }
    }

    /// Teichmüller digits: a = Σ_{k<j} ω(d_k) p^k with d_k in the residue
    /// field.
    pub fn digits(&self) -> Vec<Fq> {
        let mut rest = self.clone();
        let mut out = Vec::with_capacity(self.ctx.j);
        for _ in 0..self.ctx.j {
            let d = rest.red();
            out.push(d.clone());
            rest = rest.sub(&self.ctx.teichmuller(&d)).div_p().expect("digit subtraction");
        }
        out
    }
}

/// The Frobenius lift σ: permutes Teichmüller digits by d ↦ d^p; a ring
/// automorphism with σ^e = id, reducing to x ↦ x^p mod p.
pub fn gr_frobenius(a: &Gr) -> Gr {
    let ctx = &a.ctx;
    let mut acc = ctx.zero();
    let mut pk = 1u64;
    for d in a.digits() {
        acc = acc.add(&ctx.teichmuller(&d.frob(1)).mul(&ctx.scalar(pk)));
        pk *= ctx.p;
    }
    acc
}

impl Ring for Gr {
    fn zero(&self) -> Self {
        self.ctx.zero()
    }
    fn one(&self) -> Self {
        self.ctx.one()
    }
    fn add(&self, o: &Self) -> Self {
        Gr::add(self, o)
    }
    fn neg(&self) -> Self {
        Gr::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Gr::mul(self, o)
    }
    fn is_zero(&self) -> bool {
        Gr::is_zero(self)
    }
    fn sub(&self, o: &Self) -> Self {
        Gr::sub(self, o)
    }
}
