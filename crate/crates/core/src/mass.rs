//! Exact mass formulas: Bernoulli numbers, ζ(1 − 2i), the local factor
//! L_{g,p^c} and the lattice/stratum mass functions, all in exact rational
//! arithmetic.

use crate::error::{invalid, Result};
use crate::linalg::ExactRational;
use crate::symplectic::{sp_order, unitary_group, SymplecticSpace};
use num::bigint::{BigInt, BigUint};
use num::{One, Signed, Zero};

fn rat_int(n: BigInt) -> ExactRational {
    ExactRational::from_integer(n)
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bernoulli numbers B_0..B_m (B_1 = −1/2 convention) via the standard
/// recurrence Σ_{k=0}^{m} C(m+1, k) B_k = 0.
fn bernoulli_upto(m: usize) -> Vec<ExactRational> {
    let mut b: Vec<ExactRational> = Vec::with_capacity(m + 1);
    for n in 0..=m {
        if n == 0 {
            b.push(ExactRational::one());
            continue;
        }
        let mut acc = ExactRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += rat_int(binom(n + 1, k)) * bk;
        }
        b.push(-acc / rat_int(BigInt::from(n + 1)));
    }
    b
}

/// B_{2i} for 1 ≤ i ≤ 64, with the von Staudt–Clausen denominator identity
/// (denominator = Π of primes ℓ with (ℓ−1) | 2i) enforced as a self-check.
pub fn bernoulli(two_i: usize) -> Result<ExactRational> {
    if two_i == 0 || two_i % 2 != 0 || two_i > 128 {
        return invalid(format!("bernoulli expects an even index in 2..=128, got {two_i}"));
    }
    let b = bernoulli_upto(two_i).pop().expect("nonempty");
    let mut staudt = BigInt::one();
    for l in 2..=(two_i as u64 + 1) {
        if crate::field::is_prime_u64(l) && two_i as u64 % (l - 1) == 0 {
            staudt *= BigInt::from(l);
        }
    }
    if b.denom() != &staudt {
        return invalid("von Staudt-Clausen denominator check failed (internal error)");
    }
    Ok(b)
}

/// ζ(1 − 2i) = −B_{2i} / (2i).
pub fn zeta_odd_neg(i: usize) -> Result<ExactRational> {
    if i == 0 || i > 64 {
        return invalid(format!("zeta_odd_neg expects 1 <= i <= 64, got {i}"));
    }
    Ok(-bernoulli(2 * i)? / rat_int(BigInt::from(2 * i)))
}

fn pow_int(p: u64, e: usize) -> BigInt {
    BigInt::from(p).pow(e as u32)
}

/// The local factor
/// L_{g,p^c} = Π_{i=1}^{g−2c}(pⁱ + (−1)ⁱ) · Π_{i=1}^{c}(p^{4i−2} − 1)
///             · Π_{i=1}^{g}(p^{2i} − 1) / [Π_{i=1}^{2c}(p^{2i} − 1) · Π_{i=1}^{g−2c}(p^{2i} − 1)].
pub fn local_factor(g: usize, p: u64, c: usize) -> Result<ExactRational> {
    if g == 0 || 2 * c > g {
        return invalid(format!("need 1 <= 2c <= g, got g = {g}, c = {c}"));
    }
    let mut num = BigInt::one();
    for i in 1..=g - 2 * c {
        let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        num *= pow_int(p, i) + sign;
    }
    for i in 1..=c {
        num *= pow_int(p, 4 * i - 2) - BigInt::one();
    }
    for i in 1..=g {
        num *= pow_int(p, 2 * i) - BigInt::one();
    }
    let mut den = BigInt::one();
    for i in 1..=2 * c {
        den *= pow_int(p, 2 * i) - BigInt::one();
    }
    for i in 1..=g - 2 * c {
        den *= pow_int(p, 2 * i) - BigInt::one();
    }
    Ok(ExactRational::new(num, den))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassValue {
    pub value: ExactRational,
    pub zeta_product: ExactRational,
    pub index: BigUint,
    pub local: ExactRational,
}

/// Mass(Λ) = Π_{i=1}^{g} |ζ(1−2i)|/2 · index · L_{g,p^c}.
pub fn mass_lambda(g: usize, p: u64, c: usize, index: &BigUint) -> Result<MassValue> {
    if g == 0 || g > 64 {
        return invalid(format!("need 1 <= g <= 64, got {g}"));
    }
    if index.is_zero() {
        return invalid("index must be >= 1");
    }
    let mut zeta_product = ExactRational::one();
    for i in 1..=g {
        zeta_product *= zeta_odd_neg(i)?.abs() / rat_int(BigInt::from(2));
    }
    let local = local_factor(g, p, c)?;
    let value =
        &zeta_product * rat_int(BigInt::from_biguint(num::bigint::Sign::Plus, index.clone())) * &local;
    if !value.is_positive() {
        return invalid("mass must be positive (internal error)");
    }
    Ok(MassValue { value, zeta_product, index: index.clone(), local })
}

/// Stratum mass: index = |Sp_{2c}(𝔽_{p²})| / |E¹| where E¹ is the unitary
/// group of the dagger-stable algebra E on V_c, with index forced to 1 when
/// g = 1.
pub fn mass_stratum(
    g: usize,
    p: u64,
    c: usize,
    e: &crate::pair::EndoAlgebra,
    space: &SymplecticSpace,
    budget_points: u64,
) -> Result<MassValue> {
    let index = if g == 1 {
        BigUint::one()
    } else {
        if space.r != c {
            return invalid("symplectic space dimension must match 2c");
        }
        let u = unitary_group(e, space, budget_points)?;
        let total = sp_order(c, space.q());
        let ulen = BigUint::from(u.len());
        if (&total % &ulen) != BigUint::zero() {
            return invalid("unitary order does not divide the symplectic order (internal error)");
        }
        total / ulen
    };
    mass_lambda(g, p, c, &index)
}
