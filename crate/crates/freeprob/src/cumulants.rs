//! Moment ↔ free-cumulant calculus.
//!
//! The two sequences determine each other through sums over noncrossing
//! partitions: mₙ = Σ_{π∈NC(n)} Π_{V∈π} κ_{|V|}, inverted order by order.
//! Sequences are plain slices/vectors with slot i holding order i+1 (κ₁
//! first; m₀ ≡ 1 is implicit and never stored).
//!
//! Everything is generic over [`Scalar`], so the identical code path runs in
//! `f64` and in exact `num::BigRational` arithmetic; the exact mode is the
//! test oracle for the float mode.

use std::ops::Sub;

use num_traits::{One, Zero};

use crate::partitions::{enumerate_nc, hat_embed, visit_nc_blocks, Partition};
use crate::{Error, Result};

/// Bound for the operations that sum over all of NC(n).
pub const MAX_LATTICE_ORDER: usize = 14;
/// Bound for the convolution-recursion variant (no lattice enumeration).
pub const MAX_RECURSIVE_ORDER: usize = 64;
/// Bound for mixed-moment words of a free pair.
pub const MAX_WORD_LEN: usize = 12;
/// Bound for the total number of points in a product grouping.
pub const MAX_PRODUCT_POINTS: usize = 10;

/// Arithmetic the calculus is generic over: cloneable ring elements with 0/1.
/// Blanket-implemented; `f64` and `num::BigRational` both qualify.
pub trait Scalar: Clone + Zero + One + Sub<Output = Self> {}

impl<T> Scalar for T where T: Clone + Zero + One + Sub<Output = T> {}

fn add_assign<T: Scalar>(acc: &mut T, v: T) {
    let cur = std::mem::replace(acc, T::zero());
    *acc = cur + v;
}

fn check_order<T>(seq: &[T], max: usize, what: &str) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::invalid(format!("{what} needs order ≥ 1")));
    }
    if seq.len() > max {
        return Err(Error::invalid(format!(
            "{what} supports order ≤ {max}, got {}",
            seq.len()
        )));
    }
    Ok(())
}

/// Σ over π ∈ NC(n) of Π over blocks of `weights[|V|−1]`.
fn nc_block_sum<T: Scalar>(n: usize, weights: &[T]) -> T {
    let mut total = T::zero();
    visit_nc_blocks(n, &mut |blocks| {
        let mut prod = T::one();
        for b in blocks {
            prod = prod * weights[b.len() - 1].clone();
        }
        add_assign(&mut total, prod);
    });
    total
}

/// Moments from free cumulants by the noncrossing-partition sum
/// mₙ = Σ_{π∈NC(n)} κ_π. Order ≤ 14.
pub fn moments_from_cumulants<T: Scalar>(kappa: &[T]) -> Result<Vec<T>> {
    check_order(kappa, MAX_LATTICE_ORDER, "moments_from_cumulants")?;
    Ok((1..=kappa.len()).map(|n| nc_block_sum(n, kappa)).collect())
}

/// Free cumulants from moments: the exact inverse of
/// [`moments_from_cumulants`], solved order by order via
/// κₙ = mₙ − Σ_{π∈NC(n), π≠1ₙ} κ_π (every proper π uses only lower orders).
/// Order ≤ 14.
pub fn cumulants_from_moments<T: Scalar>(moments: &[T]) -> Result<Vec<T>> {
    check_order(moments, MAX_LATTICE_ORDER, "cumulants_from_moments")?;
    let mut kappa: Vec<T> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut partial = T::zero();
        visit_nc_blocks(n, &mut |blocks| {
            if blocks.len() == 1 {
                return; // the full block is the unknown κₙ itself
            }
            let mut prod = T::one();
            for b in blocks {
                prod = prod * kappa[b.len() - 1].clone();
            }
            add_assign(&mut partial, prod);
        });
        kappa.push(moments[n - 1].clone() - partial);
    }
    Ok(kappa)
}

/// Moments from cumulants by the Catalan-style recursion
/// mₙ = Σ_{s=1}^{n} κ_s Σ_{i₁+…+i_s=n−s} m_{i₁}⋯m_{i_s},
/// evaluated with convolution tables — no lattice enumeration, so the order
/// can go to 64. Agrees exactly with the lattice sum where both apply.
pub fn moments_from_cumulants_recursive<T: Scalar>(kappa: &[T]) -> Result<Vec<T>> {
    check_order(kappa, MAX_RECURSIVE_ORDER, "moments_from_cumulants_recursive")?;
    let order = kappa.len();
    let mut m: Vec<T> = vec![T::one()]; // m[0] = m₀ = 1
    for n in 1..=order {
        let mut total = T::zero();
        // w holds the s-fold convolution of the moment sequence: after the
        // s-th round, w[k] = Σ_{i₁+…+i_s=k} m_{i₁}⋯m_{i_s} for k ≤ n−s.
        let mut w: Vec<T> = m[..n].to_vec();
        for s in 1..=n {
            if s > 1 {
                let mut next = vec![T::zero(); n - s + 1];
                for (k, slot) in next.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for j in 0..=k {
                        add_assign(&mut acc, w[j].clone() * m[k - j].clone());
                    }
                    *slot = acc;
                }
                w = next;
            }
            add_assign(&mut total, kappa[s - 1].clone() * w[n - s].clone());
        }
        m.push(total);
    }
    Ok(m[1..].to_vec())
}

/// Free additive convolution at the cumulant level: cumulants add.
/// The sequences must have equal order.
pub fn free_convolve_cumulants<T: Scalar>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::invalid(format!(
            "free_convolve_cumulants needs equal nonzero orders, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect())
}

/// Convolution-power semigroup at the cumulant level: κₙ ↦ t·κₙ for t ≥ 0
/// (the R-transform scales linearly along μ^{⊞t}).
pub fn dilate_cumulants<T>(kappa: &[T], t: T) -> Result<Vec<T>>
where
    T: Scalar + PartialOrd,
{
    if t < T::zero() {
        return Err(Error::invalid("dilate_cumulants needs t ≥ 0"));
    }
    Ok(kappa.iter().map(|k| t.clone() * k.clone()).collect())
}

/// A free pair of variables given by their cumulant sequences, plus a word
/// over {1,2} selecting which variable sits in each position of the mixed
/// moment φ(a_{p₁}a_{p₂}⋯).
#[derive(Debug, Clone)]
pub struct FreePairSpec<T> {
    pub kappa1: Vec<T>,
    pub kappa2: Vec<T>,
    pub word: Vec<usize>,
}

/// Mixed moment of a free pair: because mixed free cumulants vanish,
/// φ(a_{p₁}⋯a_{pₙ}) = Σ over π ∈ NC(n) with π ≤ ker(p) of Π κ^{(letter)}_{|V|}.
/// Word length ≤ 12 and ≤ both cumulant orders.
pub fn joint_moment_free_pair<T: Scalar>(spec: &FreePairSpec<T>) -> Result<T> {
    let n = spec.word.len();
    if n == 0 || n > MAX_WORD_LEN {
        return Err(Error::invalid(format!(
            "joint_moment_free_pair needs word length in 1..={MAX_WORD_LEN}, got {n}"
        )));
    }
    if let Some(&bad) = spec.word.iter().find(|&&l| l != 1 && l != 2) {
        return Err(Error::invalid(format!(
            "joint_moment_free_pair word letters must be 1 or 2, got {bad}"
        )));
    }
    if n > spec.kappa1.len() || n > spec.kappa2.len() {
        return Err(Error::invalid(format!(
            "word length {n} exceeds a cumulant order ({}, {})",
            spec.kappa1.len(),
            spec.kappa2.len()
        )));
    }
    let mut total = T::zero();
    visit_nc_blocks(n, &mut |blocks| {
        let mut prod = T::one();
        for b in blocks {
            let letter = spec.word[b[0] - 1];
            // π ≤ ker(p): every block must be constant in the word.
            if b.iter().any(|&x| spec.word[x - 1] != letter) {
                return;
            }
            let seq = if letter == 1 { &spec.kappa1 } else { &spec.kappa2 };
            prod = prod * seq[b.len() - 1].clone();
        }
        add_assign(&mut total, prod);
    });
    Ok(total)
}

/// Cumulants of a*a for an R-diagonal element with determining sequence α:
/// κₙ(a*a) = Σ_{π∈NC(n)} α_π — the same noncrossing sum that turns cumulants
/// into moments, applied to α. Order ≤ 14.
pub fn rdiagonal_square_cumulants<T: Scalar>(alpha: &[T]) -> Result<Vec<T>> {
    check_order(alpha, MAX_LATTICE_ORDER, "rdiagonal_square_cumulants")?;
    Ok((1..=alpha.len()).map(|n| nc_block_sum(n, alpha)).collect())
}

/// Cumulant of products: for a single variable a with cumulants `kappa` and
/// consecutive products A_j = a^{sizes[j]}, returns
/// κ_m(A₁,…,A_m) = Σ over σ ∈ NC(n) with σ ∨ ı̂ = 1ₙ of κ_σ,
/// where n = Σ sizes and ı̂ is the interval partition of the grouping.
/// Total size ≤ 10. Used as a consistency oracle against direct moment
/// computations of powers of a.
pub fn cumulant_with_products_check<T: Scalar>(kappa: &[T], group_sizes: &[usize]) -> Result<T> {
    if group_sizes.is_empty() {
        return Err(Error::invalid("cumulant_with_products_check needs ≥ 1 group"));
    }
    if group_sizes.iter().any(|&s| s == 0) {
        return Err(Error::invalid("group sizes must be ≥ 1"));
    }
    let n: usize = group_sizes.iter().sum();
    if n > MAX_PRODUCT_POINTS {
        return Err(Error::invalid(format!(
            "cumulant_with_products_check supports total size ≤ {MAX_PRODUCT_POINTS}, got {n}"
        )));
    }
    if kappa.len() < n {
        return Err(Error::invalid(format!(
            "need cumulants through order {n}, got {}",
            kappa.len()
        )));
    }
    let m = group_sizes.len();
    let interval = hat_embed(&Partition::singletons(m)?, group_sizes)?;
    let mut total = T::zero();
    for sigma in enumerate_nc(n)? {
        if sigma.join_nc(&interval)?.num_blocks() != 1 {
            continue;
        }
        let mut prod = T::one();
        for size in sigma.block_sizes() {
            prod = prod * kappa[size - 1].clone();
        }
        add_assign(&mut total, prod);
    }
    Ok(total)
}
