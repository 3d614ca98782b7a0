//! Finite fields 𝔽_{p^e} with Frobenius, subfield tests, minimal polynomials
//! and restriction of scalars to subfields.
//!
//! A `FieldCtx` is built deterministically from (p, e): the modulus is the
//! lexicographically least irreducible monic polynomial of degree e (ordered
//! by the coefficient code Σ cᵢ pⁱ) and the generator is the least element of
//! verified multiplicative order p^e − 1. Subfields 𝔽_{p^d} (d | e) live
//! inside the one context as the Frobenius-fixed subsets; `Restriction`
//! materializes a basis of the field over a subfield so that L-linear systems
//! with subfield unknowns can be flattened.

use crate::error::{budget, invalid, Result};
use crate::linalg::{FieldOps, Fp, Matrix, Ring};
use num::bigint::BigUint;
use num::{Integer, One, Zero};
use std::sync::Arc;

// ---------- u64 modular helpers ----------

fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powm(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, b, m);
        }
        b = mulm(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'w: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powm(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x, n);
            if x == n - 1 {
                continue 'w;
            }
        }
        return false;
    }
    true
}

// ---------- BigUint primality / factoring ----------

fn is_prime_big(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64_digits().first() {
        if n.bits() <= 64 {
            return is_prime_u64(*v);
        }
    } else {
        return false; // zero
    }
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    for p in [3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if (n % BigUint::from(p)).is_zero() {
            return *n == BigUint::from(p);
        }
    }
    let nm1 = n - BigUint::one();
    let s = nm1.trailing_zeros().unwrap();
    let d = &nm1 >> s;
    'w: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71] {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'w;
            }
        }
        return false;
    }
    true
}

/// Pollard-Brent rho; returns a nontrivial factor of composite odd n.
fn rho(n: &BigUint, seed: u64, budget_iters: &mut u64) -> Option<BigUint> {
    let one = BigUint::one();
    let c = BigUint::from(seed);
    let mut x = BigUint::from(2u64 + seed);
    let mut y = x.clone();
    let mut d = one.clone();
    while d.is_one() {
        if *budget_iters == 0 {
            return None;
        }
        *budget_iters -= 1;
        x = (&x * &x + &c) % n;
        y = (&y * &y + &c) % n;
        y = (&y * &y + &c) % n;
        let diff = if x > y { &x - &y } else { &y - &x };
        if diff.is_zero() {
            return None; // cycle; retry with another seed
        }
        d = diff.gcd(n);
    }
    if d == *n {
        None
    } else {
        Some(d)
    }
}

/// Distinct prime factors of n, sorted ascending.
pub fn factor_distinct(n: &BigUint) -> Result<Vec<BigUint>> {
    let mut primes: Vec<BigUint> = Vec::new();
    let mut stack = vec![n.clone()];
    let mut iters: u64 = 50_000_000;
    // strip small primes first
    let mut rem = stack.pop().unwrap();
    for p in 2u64..10_000 {
        if !is_prime_u64(p) {
            continue;
        }
        let bp = BigUint::from(p);
        if (&rem % &bp).is_zero() {
            primes.push(bp.clone());
            while (&rem % &bp).is_zero() {
                rem /= &bp;
            }
        }
        if rem.is_one() {
            break;
        }
    }
    if !rem.is_one() {
        stack.push(rem);
    }
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime_big(&m) {
            if !primes.contains(&m) {
                primes.push(m);
            }
            continue;
        }
        let mut found = None;
        for seed in 1..64u64 {
            if let Some(f) = rho(&m, seed, &mut iters) {
                found = Some(f);
                break;
            }
            if iters == 0 {
                break;
            }
        }
        match found {
            Some(f) => {
                stack.push(&m / &f);
                stack.push(f);
            }
            None => return budget("factoring failed within iteration budget"),
        }
    }
    primes.sort();
    Ok(primes)
}

/// Distinct prime factors of p^e − 1 via the cyclotomic splitting
/// p^e − 1 = Π_{d | e} Φ_d(p); each piece is far easier to factor than the
/// full product.
pub fn factor_order(p: u64, e: usize) -> Result<Vec<BigUint>> {
    let mut phi: Vec<(usize, BigUint)> = Vec::new();
    for d in 1..=e {
        if e % d != 0 {
            continue;
        }
        let mut v = BigUint::from(p).pow(d as u32) - BigUint::one();
        for (c, ph) in &phi {
            if d % c == 0 {
                v /= ph;
            }
        }
        phi.push((d, v));
    }
    let mut primes: Vec<BigUint> = Vec::new();
    for (_, v) in &phi {
        for q in factor_distinct(v)? {
            if !primes.contains(&q) {
                primes.push(q);
            }
        }
    }
    primes.sort();
    Ok(primes)
}

// ---------- dense polynomials over F_p (little-endian, trimmed) ----------

fn ptrim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    ptrim(out.into_iter().map(|v| v as u64).collect())
}

/// Remainder of a modulo monic f.
fn prem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    debug_assert_eq!(*f.last().unwrap(), 1, "modulus must be monic");
    let mut r: Vec<u64> = a.to_vec();
    let df = f.len() - 1;
    while r.len() > df {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - df;
        if lead != 0 {
            for i in 0..df {
                let t = mulm(lead, f[i], p);
                let idx = shift + i;
                r[idx] = (r[idx] + p - t) % p;
            }
        }
        r.pop();
        r = ptrim(r);
    }
    r
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (ptrim(a.to_vec()), ptrim(b.to_vec()));
    while !b.is_empty() {
        // make b monic for prem
        let lead = *b.last().unwrap();
        let linv = powm(lead, p - 2, p);
        let bm: Vec<u64> = b.iter().map(|&c| mulm(c, linv, p)).collect();
        let r = prem(&a, &bm, p);
        a = b;
        b = r;
    }
    a
}

fn ppow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut r = vec![1u64];
    let mut b = prem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            r = prem(&pmul(&r, &b, p), f, p);
        }
        b = prem(&pmul(&b, &b, p), f, p);
        e >>= 1;
    }
    r
}

/// Deterministic irreducibility test: x^{p^e} ≡ x (mod f) and for each prime
/// ℓ | e, gcd(x^{p^{e/ℓ}} − x, f) = 1.
fn poly_irreducible(f: &[u64], p: u64) -> bool {
    let e = f.len() - 1;
    let mut checkpoints: Vec<usize> = Vec::new();
    let mut m = e;
    for l in 2..=e {
        if m % l == 0 {
            checkpoints.push(e / l);
            while m % l == 0 {
                m /= l;
            }
        }
    }
    let x = vec![0u64, 1];
    let mut g = x.clone(); // x^{p^0}
    for k in 1..=e {
        g = ppow_mod(&g, p, f, p);
        if checkpoints.contains(&k) {
            // gcd(g - x, f) must be 1
            let mut diff = g.clone();
            while diff.len() < 2 {
                diff.push(0);
            }
            diff[1] = (diff[1] + p - 1) % p;
            let diff = ptrim(diff);
            let gc = pgcd(&diff, f, p);
            if gc.len() != 1 {
                return false;
            }
        }
    }
    g == prem(&x, f, p)
}

// ---------- FieldCtx ----------

pub struct FieldCtx {
    pub p: u64,
    pub e: usize,
    /// monic modulus, length e+1, little-endian
    pub modulus: Vec<u64>,
    /// frobenius table: frob[i] = coefficients of (x^i)^p mod modulus
    frob: Vec<Vec<u64>>,
    /// coefficients of the fixed primitive element
    pub generator: Vec<u64>,
    /// distinct prime factors of p^e − 1
    pub order_factors: Vec<BigUint>,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldCtx(p={}, e={})", self.p, self.e)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.e == o.e && self.modulus == o.modulus
    }
}

/// Deterministic construction of 𝔽_{p^e}.
pub fn make_field(p: u64, e: usize) -> Result<Arc<FieldCtx>> {
    if !is_prime_u64(p) {
        return invalid(format!("p = {p} is not prime"));
    }
    if e == 0 || e > 512 {
        return invalid(format!("extension degree {e} out of range 1..=512"));
    }
    // scan coefficient codes for the least irreducible monic polynomial
    let mut modulus = None;
    let mut code: u64 = 0;
    let cap: u64 = 2_000_000;
    while code < cap {
        let mut f = Vec::with_capacity(e + 1);
        let mut c = code;
        for _ in 0..e {
            f.push(c % p);
            c /= p;
        }
        if c > 0 {
            break; // exhausted all degree-e polynomials (tiny fields)
        }
        f.push(1);
        if poly_irreducible(&f, p) {
            modulus = Some(f);
            break;
        }
        code += 1;
    }
    let Some(modulus) = modulus else {
        return budget("no irreducible modulus found within scan cap");
    };

    // frobenius table: (x^i)^p = (x^p)^i
    let xp = ppow_mod(&[0, 1], p, &modulus, p);
    let mut frob = Vec::with_capacity(e);
    let mut cur = vec![1u64];
    for _ in 0..e {
        let mut col = cur.clone();
        col.resize(e, 0);
        frob.push(col);
        cur = prem(&pmul(&cur, &xp, p), &modulus, p);
    }

    let order = BigUint::from(p).pow(e as u32) - BigUint::one();
    let order_factors = factor_order(p, e)?;

    let ctx = Arc::new(FieldCtx {
        p,
        e,
        modulus,
        frob,
        generator: vec![0; e],
        order_factors: order_factors.clone(),
    });

    // least primitive element by coefficient code
    let mut generator = None;
    let mut code: u64 = 1;
    while code < 2_000_000 {
        let mut cv = Vec::with_capacity(e);
        let mut c = code;
        for _ in 0..e {
            cv.push(c % p);
            c /= p;
        }
        if c > 0 {
            break;
        }
        let a = Fq { ctx: ctx.clone(), c: cv.clone() };
        let mut ok = true;
        for l in &order_factors {
            let q = &order / l;
            if a.pow_big(&q).is_one() {
                ok = false;
                break;
            }
        }
        if ok {
            generator = Some(cv);
            break;
        }
        code += 1;
    }
    let Some(generator) = generator else {
        return budget("no primitive element found within scan cap");
    };

    Ok(Arc::new(FieldCtx {
        p: ctx.p,
        e: ctx.e,
        modulus: ctx.modulus.clone(),
        frob: ctx.frob.clone(),
        generator,
        order_factors,
    }))
}

impl FieldCtx {
    pub fn zero(self: &Arc<Self>) -> Fq {
        Fq { ctx: self.clone(), c: vec![0; self.e] }
    }

    pub fn one(self: &Arc<Self>) -> Fq {
        self.scalar(1)
    }

    /// Constant (prime-subfield) element.
    pub fn scalar(self: &Arc<Self>, v: u64) -> Fq {
        let mut c = vec![0; self.e];
        c[0] = v % self.p;
        if self.e == 0 {
            unreachable!()
        }
        // modulus x (e = 1) still represents constants as themselves
        Fq { ctx: self.clone(), c: prem_fit(&c, self) }
    }

    pub fn el(self: &Arc<Self>, coeffs: &[u64]) -> Fq {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| v % self.p).collect();
        c.resize(self.e, 0);
        Fq { ctx: self.clone(), c }
    }

    pub fn gen_el(self: &Arc<Self>) -> Fq {
        Fq { ctx: self.clone(), c: self.generator.clone() }
    }

    /// Field size as BigUint.
    pub fn size(&self) -> BigUint {
        BigUint::from(self.p).pow(self.e as u32)
    }

    /// Element from an integer code (base-p digits), for small-field enumeration.
    pub fn from_code(self: &Arc<Self>, mut code: u64) -> Fq {
        let mut c = Vec::with_capacity(self.e);
        for _ in 0..self.e {
            c.push(code % self.p);
            code /= self.p;
        }
        Fq { ctx: self.clone(), c }
    }

    pub fn size_u64(&self) -> Option<u64> {
        let mut s: u64 = 1;
        for _ in 0..self.e {
            s = s.checked_mul(self.p)?;
        }
        Some(s)
    }

    pub fn random(self: &Arc<Self>, rng: &mut impl rand::Rng) -> Fq {
        let c = (0..self.e).map(|_| rng.gen_range(0..self.p)).collect();
        Fq { ctx: self.clone(), c }
    }
}

fn prem_fit(c: &[u64], ctx: &FieldCtx) -> Vec<u64> {
    let mut r = prem(c, &ctx.modulus, ctx.p);
    r.resize(ctx.e, 0);
    r
}

// ---------- field elements ----------

#[derive(Clone)]
pub struct Fq {
    pub ctx: Arc<FieldCtx>,
    pub c: Vec<u64>,
}

impl PartialEq for Fq {
    fn eq(&self, o: &Self) -> bool {
        debug_assert!(self.ctx == o.ctx, "comparing elements of different fields");
        self.c == o.c
    }
}
impl Eq for Fq {}

impl std::hash::Hash for Fq {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl std::fmt::Debug for Fq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fq{:?}", self.c)
    }
}

impl Fq {
    pub fn add(&self, o: &Self) -> Self {
        let p = self.ctx.p;
        let c = self.c.iter().zip(&o.c).map(|(&a, &b)| (a + b) % p).collect();
        Fq { ctx: self.ctx.clone(), c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.ctx.p;
        let c = self.c.iter().zip(&o.c).map(|(&a, &b)| (a + p - b) % p).collect();
        Fq { ctx: self.ctx.clone(), c }
    }

    pub fn neg(&self) -> Self {
        let p = self.ctx.p;
        Fq { ctx: self.ctx.clone(), c: self.c.iter().map(|&a| (p - a) % p).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prod = pmul(&self.c, &o.c, self.ctx.p);
        Fq { ctx: self.ctx.clone(), c: prem_fit(&prod, &self.ctx) }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    pub fn pow_u64(&self, mut e: u64) -> Self {
        let mut r = self.ctx.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    pub fn pow_big(&self, e: &BigUint) -> Self {
        let mut r = self.ctx.one();
        let mut b = self.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                r = r.mul(&b);
            }
            if i + 1 < bits {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Multiplicative inverse via a^{p^e − 2}.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let expo = self.ctx.size() - BigUint::from(2u32);
        Some(self.pow_big(&expo))
    }

    /// a^{p^k} via the precomputed Frobenius table.
    pub fn frob(&self, k: usize) -> Self {
        let e = self.ctx.e;
        let k = k % e;
        let mut cur = self.clone();
        for _ in 0..k {
            cur = cur.frob_once();
        }
        cur
    }

    fn frob_once(&self) -> Self {
        let e = self.ctx.e;
        let p = self.ctx.p;
        let mut out = vec![0u64; e];
        for (i, &ci) in self.c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for j in 0..e {
                out[j] = (out[j] + mulm(ci, self.ctx.frob[i][j], p)) % p;
            }
        }
        Fq { ctx: self.ctx.clone(), c: out }
    }

    /// Integer code Σ cᵢ pⁱ (small fields only).
    pub fn code(&self) -> u64 {
        let mut code = 0u64;
        for &ci in self.c.iter().rev() {
            code = code * self.ctx.p + ci;
        }
        code
    }
}

/// frobenius(a, k) = a^{p^k}.
pub fn frobenius(a: &Fq, k: usize) -> Fq {
    a.frob(k)
}

/// a ∈ 𝔽_{p^d} ⟺ a^{p^d} = a.
pub fn subfield_member(a: &Fq, d: usize) -> Result<bool> {
    if d == 0 || a.ctx.e % d != 0 {
        return invalid(format!("d = {d} does not divide e = {}", a.ctx.e));
    }
    Ok(a.frob(d % a.ctx.e) == *a)
}

/// Monic minimal polynomial of a over 𝔽_{p^{base_d}} (little-endian coeffs,
/// entries lie in the subfield).
pub fn minimal_poly(a: &Fq, base_d: usize) -> Result<Vec<Fq>> {
    if base_d == 0 || a.ctx.e % base_d != 0 {
        return invalid(format!("base_d = {base_d} does not divide e = {}", a.ctx.e));
    }
    // Frobenius orbit under x -> x^{p^base_d}
    let mut orbit = vec![a.clone()];
    let mut cur = a.frob(base_d % a.ctx.e);
    while cur != *a {
        orbit.push(cur.clone());
        cur = cur.frob(base_d % a.ctx.e);
    }
    // product of (X - conj)
    let mut poly = vec![a.ctx.one()];
    for conj in &orbit {
        let mut next = vec![a.ctx.zero(); poly.len() + 1];
        for (i, co) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1].add(co);
            next[i] = next[i].sub(&co.mul(conj));
        }
        poly = next;
    }
    for co in &poly {
        debug_assert!(subfield_member(co, base_d.min(a.ctx.e)).unwrap_or(true));
    }
    Ok(poly)
}

impl Ring for Fq {
    fn zero(&self) -> Self {
        self.ctx.zero()
    }
    fn one(&self) -> Self {
        self.ctx.one()
    }
    fn add(&self, o: &Self) -> Self {
        Fq::add(self, o)
    }
    fn neg(&self) -> Self {
        Fq::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Fq::mul(self, o)
    }
    fn is_zero(&self) -> bool {
        Fq::is_zero(self)
    }
    fn sub(&self, o: &Self) -> Self {
        Fq::sub(self, o)
    }
}

impl FieldOps for Fq {
    fn inv(&self) -> Option<Self> {
        Fq::inv(self)
    }
}

// ---------- restriction of scalars ----------

/// Basis data for 𝔽_{p^e} over the subfield 𝔽_{p^d}: an F_p-basis of the
/// subfield (first element 1), a relative basis of the field over the subfield
/// (first element 1), and the inverse of the combined F_p-change-of-basis so
/// elements expand into subfield coordinates.
pub struct Restriction {
    pub ctx: Arc<FieldCtx>,
    pub d: usize,
    /// relative degree e/d
    pub m: usize,
    pub sub_basis: Vec<Fq>,
    pub rel_basis: Vec<Fq>,
    inv: Matrix<Fp>,
}

impl Restriction {
    pub fn new(ctx: &Arc<FieldCtx>, d: usize) -> Result<Self> {
        let e = ctx.e;
        if d == 0 || e % d != 0 {
            return invalid(format!("d = {d} does not divide e = {e}"));
        }
        let m = e / d;
        let p = ctx.p;
        let fp0 = Fp::new(p, 0);

        // F_p-basis of the subfield: kernel of (Frob^d − id) on coefficient vectors
        let mut frobd = Matrix::zero(&fp0, e, e);
        for i in 0..e {
            let mut b = vec![0u64; e];
            b[i] = 1;
            let img = Fq { ctx: ctx.clone(), c: b }.frob(d % e);
            for j in 0..e {
                frobd[(j, i)] = Fp::new(p, img.c[j]);
            }
        }
        let diff = frobd.sub(&Matrix::identity(&fp0, e));
        let ker = diff.kernel();
        debug_assert_eq!(ker.cols, d);

        // reorder so that 1 is the first basis vector (1 is always fixed)
        let mut sub_basis: Vec<Fq> = Vec::with_capacity(d);
        let mut span = Matrix::zero(&fp0, e, 0);
        let one_v = {
            let mut v = vec![0u64; e];
            v[0] = 1;
            v
        };
        let push = |sub_basis: &mut Vec<Fq>, span: &mut Matrix<Fp>, v: &[u64]| {
            let col: Vec<Fp> = v.iter().map(|&x| Fp::new(p, x)).collect();
            if !crate::linalg::span_contains(span, &col) {
                *span = span.hstack(&Matrix::from_cols(vec![col]));
                sub_basis.push(Fq { ctx: ctx.clone(), c: v.to_vec() });
            }
        };
        push(&mut sub_basis, &mut span, &one_v);
        for j in 0..ker.cols {
            let v: Vec<u64> = (0..e).map(|i| ker[(i, j)].v).collect();
            push(&mut sub_basis, &mut span, &v);
        }
        debug_assert_eq!(sub_basis.len(), d);

        // greedy relative basis: monomials x^i independent over the subfield
        let mut rel_basis: Vec<Fq> = Vec::new();
        let mut full_span = Matrix::zero(&fp0, e, 0);
        for i in 0..e {
            if rel_basis.len() == m {
                break;
            }
            let mut v = vec![0u64; e];
            v[i] = 1;
            let cand = Fq { ctx: ctx.clone(), c: v };
            let col: Vec<Fp> = cand.c.iter().map(|&x| Fp::new(p, x)).collect();
            if crate::linalg::span_contains(&full_span, &col) {
                continue;
            }
            // accept; add sub_basis * cand to the F_p-span
            for s in &sub_basis {
                let prod = s.mul(&cand);
                let pcol: Vec<Fp> = prod.c.iter().map(|&x| Fp::new(p, x)).collect();
                if !crate::linalg::span_contains(&full_span, &pcol) {
                    full_span = full_span.hstack(&Matrix::from_cols(vec![pcol]));
                }
            }
            rel_basis.push(cand);
        }
        debug_assert_eq!(rel_basis.len(), m);

        // change of basis: column (j*d + s) = coeffs of rel_basis[j] * sub_basis[s]
        let mut cb = Matrix::zero(&fp0, e, e);
        for (j, g) in rel_basis.iter().enumerate() {
            for (s, b) in sub_basis.iter().enumerate() {
                let prod = g.mul(b);
                for i in 0..e {
                    cb[(i, j * d + s)] = Fp::new(p, prod.c[i]);
                }
            }
        }
        let inv = cb.inverse().expect("basis change invertible");

        Ok(Restriction { ctx: ctx.clone(), d, m, sub_basis, rel_basis, inv })
    }

    /// Coordinates of a in the relative basis: m subfield elements with
    /// a = Σ expand(a)[j] · rel_basis[j].
    pub fn expand(&self, a: &Fq) -> Vec<Fq> {
        let col: Vec<Fp> = a.c.iter().map(|&x| Fp::new(self.ctx.p, x)).collect();
        let coords = self.inv.mul_vec(&col);
        (0..self.m)
            .map(|j| {
                let mut acc = self.ctx.zero();
                for s in 0..self.d {
                    let c = coords[j * self.d + s].v;
                    if c != 0 {
                        acc = acc.add(&self.sub_basis[s].mul(&self.ctx.scalar(c)));
                    }
                }
                acc
            })
            .collect()
    }

    /// F_p coordinate expansion (d = 1 fast path: just the coefficient vector).
    pub fn expand_fp(&self, a: &Fq) -> Vec<u64> {
        assert_eq!(self.d, 1, "expand_fp requires the prime subfield");
        a.c.clone()
    }

    /// Integer code of a subfield element w.r.t. sub_basis (asserts membership).
    pub fn sub_code(&self, a: &Fq) -> u64 {
        let col: Vec<Fp> = a.c.iter().map(|&x| Fp::new(self.ctx.p, x)).collect();
        let coords = self.inv.mul_vec(&col);
        for j in 1..self.m {
            for s in 0..self.d {
                assert_eq!(coords[j * self.d + s].v, 0, "element not in the subfield");
            }
        }
        let mut code = 0u64;
        for s in (0..self.d).rev() {
            code = code * self.ctx.p + coords[s].v;
        }
        code
    }

    /// Subfield element from its integer code.
    pub fn sub_el(&self, mut code: u64) -> Fq {
        let mut acc = self.ctx.zero();
        for s in 0..self.d {
            let c = code % self.ctx.p;
            code /= self.ctx.p;
            if c != 0 {
                acc = acc.add(&self.sub_basis[s].mul(&self.ctx.scalar(c)));
            }
        }
        acc
    }

    pub fn subfield_size(&self) -> u64 {
        self.ctx.p.pow(self.d as u32)
    }

    /// All subfield elements in code order.
    pub fn subfield_elements(&self) -> Vec<Fq> {
        (0..self.subfield_size()).map(|c| self.sub_el(c)).collect()
    }
}

/// Block expansion: each entry a becomes the m×m multiplication-by-a matrix in
/// the relative basis, entries in the subfield.
pub fn restrict_scalars(mat: &Matrix<Fq>, rest: &Restriction) -> Matrix<Fq> {
    let m = rest.m;
    let zero = rest.ctx.zero();
    let mut out = Matrix::zero(&zero, mat.rows * m, mat.cols * m);
    for i in 0..mat.rows {
        for j in 0..mat.cols {
            let a = &mat[(i, j)];
            for (bj, g) in rest.rel_basis.iter().enumerate() {
                let coords = rest.expand(&a.mul(g));
                for (bi, c) in coords.into_iter().enumerate() {
                    out[(i * m + bi, j * m + bj)] = c;
                }
            }
        }
    }
    out
}

/// Flatten an L-linear system (rows = equations over L, unknowns constrained
/// to the subfield): each L-row becomes m subfield rows.
pub fn flatten_system(sys: &Matrix<Fq>, rest: &Restriction) -> Matrix<Fq> {
    let m = rest.m;
    let zero = rest.ctx.zero();
    let mut out = Matrix::zero(&zero, sys.rows * m, sys.cols);
    for i in 0..sys.rows {
        for j in 0..sys.cols {
            let coords = rest.expand(&sys[(i, j)]);
            for (bi, c) in coords.into_iter().enumerate() {
                out[(i * m + bi, j)] = c;
            }
        }
    }
    out
}

/// Kernel of an L-linear system with unknowns in the subfield 𝔽_{p^d};
/// returned vectors have subfield entries. Uses an F_p fast path when d = 1.
pub fn subfield_kernel(sys: &Matrix<Fq>, rest: &Restriction) -> Vec<Vec<Fq>> {
    if rest.d == 1 {
        let p = rest.ctx.p;
        let e = rest.ctx.e;
        let fp0 = Fp::new(p, 0);
        let mut m = Matrix::zero(&fp0, sys.rows * e, sys.cols);
        for i in 0..sys.rows {
            for j in 0..sys.cols {
                for (k, &c) in sys[(i, j)].c.iter().enumerate() {
                    m[(i * e + k, j)] = Fp::new(p, c);
                }
            }
        }
        let ker = m.kernel();
        (0..ker.cols)
            .map(|j| (0..ker.rows).map(|i| rest.ctx.scalar(ker[(i, j)].v)).collect())
            .collect()
    } else {
        let flat = flatten_system(sys, rest);
        let ker = flat.kernel();
        (0..ker.cols).map(|j| ker.col(j)).collect()
    }
}
