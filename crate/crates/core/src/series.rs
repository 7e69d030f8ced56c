//! Exact truncated power series in two variables over the rationals, plus
//! the specific generating functions used elsewhere: Catalan-family series,
//! the occurrence-marked path series, and three marked families whose first
//! two moments admit binomial closed forms.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lukasiewicz::{autocorrelation, LukaPattern};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Binomial coefficient with the extended convention: zero whenever
/// `n < 0`, `k < 0`, or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..k {
        num *= n - t;
        den *= t + 1;
    }
    num / den
}

pub fn catalan(n: u64) -> BigInt {
    binomial(2 * n as i64, n as i64) / BigInt::from(n + 1)
}

/// Series truncated at `z^z_order` and `x^x_order` inclusive, dense storage
/// row-major by z-exponent. Product coefficients up to the stored orders are
/// exact: truncation never corrupts the rows that are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    z_order: usize,
    x_order: usize,
    c: Vec<Rat>,
}

impl TruncSeries {
    pub fn zero(z_order: usize, x_order: usize) -> Self {
        TruncSeries {
            z_order,
            x_order,
            c: vec![Rat::zero(); (z_order + 1) * (x_order + 1)],
        }
    }

    pub fn constant(z_order: usize, x_order: usize, value: Rat) -> Self {
        let mut s = Self::zero(z_order, x_order);
        s.c[0] = value;
        s
    }

    pub fn one(z_order: usize, x_order: usize) -> Self {
        Self::constant(z_order, x_order, Rat::one())
    }

    /// Monomial `value * z^zi * x^xj`; exponents beyond the truncation
    /// orders give the zero series.
    pub fn monomial(z_order: usize, x_order: usize, zi: usize, xj: usize, value: Rat) -> Self {
        let mut s = Self::zero(z_order, x_order);
        if zi <= z_order && xj <= x_order {
            s.c[zi * (x_order + 1) + xj] = value;
        }
        s
    }

    pub fn var_z(z_order: usize, x_order: usize) -> Self {
        Self::monomial(z_order, x_order, 1, 0, Rat::one())
    }

    pub fn var_x(z_order: usize, x_order: usize) -> Self {
        Self::monomial(z_order, x_order, 0, 1, Rat::one())
    }

    /// 1 + z + z^2 + ... up to the truncation order.
    pub fn geometric_z(z_order: usize, x_order: usize) -> Self {
        let mut s = Self::zero(z_order, x_order);
        for i in 0..=z_order {
            s.c[i * (x_order + 1)] = Rat::one();
        }
        s
    }

    /// 1 + x + x^2 + ... up to the truncation order.
    pub fn geometric_x(z_order: usize, x_order: usize) -> Self {
        let mut s = Self::zero(z_order, x_order);
        for j in 0..=x_order {
            s.c[j] = Rat::one();
        }
        s
    }

    pub fn z_order(&self) -> usize {
        self.z_order
    }

    pub fn x_order(&self) -> usize {
        self.x_order
    }

    pub fn coeff(&self, zi: usize, xj: usize) -> &Rat {
        assert!(zi <= self.z_order && xj <= self.x_order, "coefficient out of range");
        &self.c[zi * (self.x_order + 1) + xj]
    }

    pub fn set_coeff(&mut self, zi: usize, xj: usize, value: Rat) {
        assert!(zi <= self.z_order && xj <= self.x_order, "coefficient out of range");
        self.c[zi * (self.x_order + 1) + xj] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Rat::is_zero)
    }

    fn assert_same_orders(&self, other: &Self) {
        assert!(
            self.z_order == other.z_order && self.x_order == other.x_order,
            "series orders differ: ({}, {}) vs ({}, {})",
            self.z_order,
            self.x_order,
            other.z_order,
            other.x_order
        );
    }

    pub fn scale(&self, value: &Rat) -> Self {
        let mut out = self.clone();
        for c in &mut out.c {
            *c *= value;
        }
        out
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::one(self.z_order, self.x_order);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in x; same truncation orders, top row zero.
    pub fn derivative_x(&self) -> Self {
        let mut out = Self::zero(self.z_order, self.x_order);
        for zi in 0..=self.z_order {
            for xj in 1..=self.x_order {
                out.c[zi * (self.x_order + 1) + xj - 1] =
                    self.coeff(zi, xj) * rat_int(xj as i64);
            }
        }
        out
    }

    /// Evaluates x = 1 by summing rows. Exact only when the x-degree of the
    /// underlying series does not exceed `x_order`.
    pub fn at_x_one(&self) -> Self {
        let mut out = Self::zero(self.z_order, 0);
        for zi in 0..=self.z_order {
            let mut acc = Rat::zero();
            for xj in 0..=self.x_order {
                acc += self.coeff(zi, xj);
            }
            out.c[zi] = acc;
        }
        out
    }

    /// Substitutes x -> x + 1 (binomial transform of each z-row). Exact
    /// under the same degree condition as [`Self::at_x_one`].
    pub fn shift_x_by_one(&self) -> Self {
        let mut out = Self::zero(self.z_order, self.x_order);
        for zi in 0..=self.z_order {
            for xj in 0..=self.x_order {
                let mut acc = Rat::zero();
                for src in xj..=self.x_order {
                    let b = binomial(src as i64, xj as i64);
                    if !b.is_zero() {
                        acc += self.coeff(zi, src) * Rat::from_integer(b);
                    }
                }
                out.c[zi * (self.x_order + 1) + xj] = acc;
            }
        }
        out
    }

    pub fn truncated(&self, z_order: usize, x_order: usize) -> Self {
        assert!(z_order <= self.z_order && x_order <= self.x_order);
        let mut out = Self::zero(z_order, x_order);
        for zi in 0..=z_order {
            for xj in 0..=x_order {
                out.c[zi * (x_order + 1) + xj] = self.coeff(zi, xj).clone();
            }
        }
        out
    }

    pub fn lifted(&self, z_order: usize, x_order: usize) -> Self {
        assert!(z_order >= self.z_order && x_order >= self.x_order);
        let mut out = Self::zero(z_order, x_order);
        for zi in 0..=self.z_order {
            for xj in 0..=self.x_order {
                out.c[zi * (x_order + 1) + xj] = self.coeff(zi, xj).clone();
            }
        }
        out
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        self.assert_same_orders(rhs);
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
        out
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        self.assert_same_orders(rhs);
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
        out
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        let mut out = self.clone();
        for a in &mut out.c {
            *a = -a.clone();
        }
        out
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        self.assert_same_orders(rhs);
        let (zn, xn) = (self.z_order, self.x_order);
        let mut out = TruncSeries::zero(zn, xn);
        for zi in 0..=zn {
            for xj in 0..=xn {
                let a = self.coeff(zi, xj);
                if a.is_zero() {
                    continue;
                }
                for zk in 0..=zn - zi {
                    for xl in 0..=xn - xj {
                        let b = rhs.coeff(zk, xl);
                        if b.is_zero() {
                            continue;
                        }
                        out.c[(zi + zk) * (xn + 1) + xj + xl] += a * b;
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalanFamily {
    /// Rooted plane trees by vertex count: coefficient of z^n is the
    /// (n-1)-st Catalan number, constant term zero.
    PlaneTrees,
    /// Plane forests by total vertex count: coefficient of z^n is the n-th
    /// Catalan number.
    PlaneForests,
}

/// Built from the Catalan convolution recurrence, not from a square root.
pub fn classic_series(family: CatalanFamily, z_order: usize, x_order: usize) -> TruncSeries {
    let mut cat: Vec<BigInt> = vec![BigInt::one()];
    for n in 0..z_order {
        let next: BigInt = (0..=n).map(|i| &cat[i] * &cat[n - i]).sum();
        cat.push(next);
    }
    let mut s = TruncSeries::zero(z_order, x_order);
    for n in 0..=z_order {
        let v = match family {
            CatalanFamily::PlaneTrees => {
                if n == 0 {
                    BigInt::zero()
                } else {
                    cat[n - 1].clone()
                }
            }
            CatalanFamily::PlaneForests => cat[n].clone(),
        };
        s.set_coeff(n, 0, Rat::from_integer(v));
    }
    s
}

fn pattern_autocorr_at(
    pat: &LukaPattern,
    y: &TruncSeries,
    z_order: usize,
    x_order: usize,
) -> TruncSeries {
    let mut acc = TruncSeries::zero(z_order, x_order);
    for (i, h) in autocorrelation(pat).terms {
        debug_assert!(h >= 0, "prefix heights are nonnegative");
        let zi = TruncSeries::monomial(z_order, x_order, i, 0, Rat::one());
        acc = &acc + &(&zi * &y.pow(h as usize));
    }
    acc
}

/// One application of the defining fixpoint map for the occurrence-marked
/// path series: the next approximation of L given the current one.
pub fn pattern_fixpoint_rhs(pat: &LukaPattern, l: &TruncSeries) -> TruncSeries {
    let (zn, xn) = (l.z_order(), l.x_order());
    let m = pat.len();
    let h = pat.final_height() as usize;
    let one = TruncSeries::one(zn, xn);
    let z = TruncSeries::var_z(zn, xn);
    let u = TruncSeries::var_x(zn, xn);
    let y = &one + l; // 1 + L
    let trunk = &z * &(&y * &y); // z(1+L)^2
    let zm = TruncSeries::monomial(zn, xn, m, 0, Rat::one());
    let overlap = pattern_autocorr_at(pat, &y, zn, xn);
    let inner = &(&(&zm * l) * &y.pow(h)) + &(&(l - &trunk) * &overlap);
    &trunk - &(&(&one - &u) * &inner)
}

/// Joint series L(z, u): coefficient of z^n u^c counts paths of length n
/// with exactly c occurrences of `pat`, one occurrence anchored at the very
/// start left uncounted. Exact in u only up to `u_order`.
pub fn luka_pattern_series(
    pat: &LukaPattern,
    z_order: usize,
    u_order: usize,
) -> Result<TruncSeries> {
    let mut l = TruncSeries::zero(z_order, u_order);
    // Each pass fixes one more z-order, so z_order + 1 passes suffice.
    for _ in 0..=z_order {
        l = pattern_fixpoint_rhs(pat, &l);
    }
    if pattern_fixpoint_rhs(pat, &l) != l {
        return Err(Error::internal("marked path series fixpoint did not converge"));
    }
    Ok(l)
}

/// The kernel combination that must vanish identically at Y = 1 + L(z, u):
/// z^m Y^h (1-Y)(1-u) + (1 - Y + z Y^2)(1 + (1-u) * overlap(z, Y)).
pub fn kernel_residual(pat: &LukaPattern, l: &TruncSeries) -> TruncSeries {
    let (zn, xn) = (l.z_order(), l.x_order());
    let m = pat.len();
    let h = pat.final_height() as usize;
    let one = TruncSeries::one(zn, xn);
    let z = TruncSeries::var_z(zn, xn);
    let u = TruncSeries::var_x(zn, xn);
    let y = &one + l;
    let one_minus_y = &one - &y;
    let zm = TruncSeries::monomial(zn, xn, m, 0, Rat::one());
    let overlap = pattern_autocorr_at(pat, &y, zn, xn);
    let one_minus_u = &one - &u;
    let lhs = &(&(&zm * &y.pow(h)) * &one_minus_y) * &one_minus_u;
    let kernel = &(&one - &y) + &(&z * &(&y * &y));
    let rhs = &kernel * &(&one + &(&one_minus_u * &overlap));
    &lhs + &rhs
}

/// A size-indexed family with one marked statistic, truncated to a second-
/// order jet around the unmarked point so exact first and second factorial
/// moments fall out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkedFamily {
    /// Trees with a fixed root degree; marks root subtrees equal to one
    /// fixed shape of the given size.
    BlueSubtree { subtree_size: usize, root_degree: usize },
    /// Sequences of `root_count` gaps filled from a chain of positions;
    /// marks gaps holding exactly `gap` items.
    GapSize { gap: usize, root_count: usize },
    /// Trees; marks vertices whose fringe starts with one fixed forest of
    /// the given size.
    RedForest { forest_size: usize },
}

fn check_closed_form(label: &str, got: &Rat, want: BigInt) -> Result<()> {
    if *got != Rat::from_integer(want.clone()) {
        return Err(Error::internal(format!(
            "{label}: series gives {got}, closed form gives {want}"
        )));
    }
    Ok(())
}

/// Coefficients of z^k in (A, A_u, A_uu) at u = 1 for the family, computed
/// from an exact jet in eps = u - 1 and cross-checked against binomial
/// closed forms wherever those are well defined.
pub fn marked_gf_coeffs(family: MarkedFamily, k: usize) -> Result<(Rat, Rat, Rat)> {
    let series = match family {
        MarkedFamily::BlueSubtree { subtree_size: i, root_degree: d } => {
            if d < 1 {
                return Err(Error::domain("root degree must be at least 1"));
            }
            if i < 1 {
                return Err(Error::domain("marked subtree size must be at least 1"));
            }
            if k < d + 1 {
                return Err(Error::domain(format!(
                    "no tree with {k} vertices has root degree {d}"
                )));
            }
            let t = classic_series(CatalanFamily::PlaneTrees, k, 2);
            let eps_zi = TruncSeries::monomial(k, 2, i, 1, Rat::one());
            &TruncSeries::var_z(k, 2) * &(&t + &eps_zi).pow(d)
        }
        MarkedFamily::GapSize { gap: j, root_count: d } => {
            if d < 1 {
                return Err(Error::domain("gap count must be at least 1"));
            }
            if k < 1 {
                return Err(Error::domain("size must be at least 1"));
            }
            let geom = TruncSeries::geometric_z(k, 2);
            let eps_zj = TruncSeries::monomial(k, 2, j, 1, Rat::one());
            let head = &TruncSeries::var_z(k, 2) * &geom;
            &head * &(&geom + &eps_zj).pow(d)
        }
        MarkedFamily::RedForest { forest_size: m } => {
            if k < 1 {
                return Err(Error::domain("size must be at least 1"));
            }
            // R = z + R^2 + eps z^(m+1) R, iterated to the fixpoint.
            let z = TruncSeries::var_z(k, 2);
            let mark = TruncSeries::monomial(k, 2, m + 1, 1, Rat::one());
            let mut r = TruncSeries::zero(k, 2);
            for _ in 0..=k {
                r = &(&z + &(&r * &r)) + &(&mark * &r);
            }
            let next = &(&z + &(&r * &r)) + &(&mark * &r);
            if next != r {
                return Err(Error::internal("marked tree series fixpoint did not converge"));
            }
            r
        }
    };
    let a0 = series.coeff(k, 0).clone();
    let a1 = series.coeff(k, 1).clone();
    let a2 = series.coeff(k, 2) * rat_int(2);

    // Independent closed forms. Skipped only where their printed form
    // degenerates to 0/0.
    match family {
        MarkedFamily::BlueSubtree { subtree_size: i, root_degree: d } => {
            let (k, i, d) = (k as i64, i as i64, d as i64);
            if k - 1 != 0 {
                let want = BigInt::from(d) * binomial(2 * k - d - 3, k - 2) / BigInt::from(k - 1);
                check_closed_form("tree count by root degree", &a0, want)?;
            }
            if k - i - 1 != 0 {
                let want = BigInt::from(d * (d - 1)) * binomial(2 * k - 2 * i - d - 2, k - i - 2)
                    / BigInt::from(k - i - 1);
                check_closed_form("marked subtree first moment", &a1, want)?;
            }
            if k - 2 * i - 1 != 0 {
                let want = BigInt::from(d * (d - 1) * (d - 2))
                    * binomial(2 * k - 4 * i - d - 1, k - 2 * i - 2)
                    / BigInt::from(k - 2 * i - 1);
                check_closed_form("marked subtree second moment", &a2, want)?;
            }
        }
        MarkedFamily::GapSize { gap: j, root_count: d } => {
            let (k, j, d) = (k as i64, j as i64, d as i64);
            check_closed_form("gap arrangement count", &a0, binomial(k - 1 + d, d))?;
            check_closed_form(
                "marked gap first moment",
                &a1,
                BigInt::from(d) * binomial(k - j + d - 2, d - 1),
            )?;
            check_closed_form(
                "marked gap second moment",
                &a2,
                BigInt::from(d * (d - 1)) * binomial(k - 2 * j + d - 3, d - 2),
            )?;
        }
        MarkedFamily::RedForest { forest_size: m } => {
            let (k, m) = (k as i64, m as i64);
            check_closed_form("tree count", &a0, catalan((k - 1) as u64))?;
            check_closed_form(
                "marked fringe first moment",
                &a1,
                binomial(2 * k - 2 * m - 3, k - m - 1),
            )?;
            check_closed_form(
                "marked fringe second moment",
                &a2,
                BigInt::from(k - 2 * m - 2) * binomial(2 * k - 4 * m - 4, k - 2 * m - 2),
            )?;
        }
    }
    Ok((a0, a1, a2))
}

/// Mean and variance of the per-slot proportion of marked objects at size
/// `k`: counts are divided by the slot count (root degree, gap count, or
/// the vertex count) so the values are comparable across sizes.
pub fn finite_moments(family: MarkedFamily, k: usize) -> Result<(Rat, Rat)> {
    let (a0, a1, a2) = marked_gf_coeffs(family, k)?;
    if a0.is_zero() {
        return Err(Error::domain(format!("family is empty at size {k}")));
    }
    let mean = &a1 / &a0;
    let variance = &a2 / &a0 + &mean - &mean * &mean;
    if variance.is_negative() {
        return Err(Error::internal(format!("negative variance at size {k}")));
    }
    let den = match family {
        MarkedFamily::BlueSubtree { root_degree: d, .. }
        | MarkedFamily::GapSize { root_count: d, .. } => rat_int(d as i64),
        MarkedFamily::RedForest { .. } => rat_int(k as i64),
    };
    Ok((&mean / &den, &variance / &(&den * &den)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lukasiewicz::{occurrence_distribution, Convention};
    use num_traits::ToPrimitive;

    fn pat(steps: &[i64]) -> LukaPattern {
        LukaPattern::new(steps.to_vec()).unwrap()
    }

    #[test]
    fn binomial_and_catalan() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 0), BigInt::one());
        assert!(binomial(3, 5).is_zero());
        assert!(binomial(-1, 0).is_zero());
        assert!(binomial(4, -1).is_zero());
        let want = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(catalan(n as u64), BigInt::from(*w));
        }
    }

    #[test]
    fn arithmetic_basics() {
        let one = TruncSeries::one(4, 2);
        let z = TruncSeries::var_z(4, 2);
        let sq = (&one + &z).pow(2);
        assert_eq!(*sq.coeff(0, 0), rat_int(1));
        assert_eq!(*sq.coeff(1, 0), rat_int(2));
        assert_eq!(*sq.coeff(2, 0), rat_int(1));
        let x = TruncSeries::var_x(4, 2);
        let p = (&x * &x).shift_x_by_one(); // (x+1)^2
        assert_eq!(*p.coeff(0, 0), rat_int(1));
        assert_eq!(*p.coeff(0, 1), rat_int(2));
        assert_eq!(*p.coeff(0, 2), rat_int(1));
        let d = (&x * &x).derivative_x();
        assert_eq!(*d.coeff(0, 1), rat_int(2));
        assert!((&sq - &sq).is_zero());
        // Truncation drops high monomials silently.
        assert!(TruncSeries::monomial(4, 2, 5, 0, rat_int(1)).is_zero());
    }

    #[test]
    fn catalan_family_identities() {
        let k = 10;
        let t = classic_series(CatalanFamily::PlaneTrees, k, 0);
        let f = classic_series(CatalanFamily::PlaneForests, k, 0);
        let one = TruncSeries::one(k, 0);
        let z = TruncSeries::var_z(k, 0);
        // F(1 - T) = 1 and T = zF.
        assert!((&(&f * &(&one - &t)) - &one).is_zero());
        assert!((&t - &(&z * &f)).is_zero());
    }

    #[test]
    fn pattern_series_counts_all_paths_at_u_one() {
        let k = 9;
        for steps in [vec![1], vec![1, 0], vec![1, 0, 1], vec![1, 1, -1]] {
            let p = pat(&steps);
            let l = luka_pattern_series(&p, k, k).unwrap();
            let f = classic_series(CatalanFamily::PlaneForests, k, 0);
            let at_one = l.at_x_one();
            for n in 1..=k {
                assert_eq!(at_one.coeff(n, 0), f.coeff(n, 0), "n = {n}, pat {steps:?}");
            }
            assert!(at_one.coeff(0, 0).is_zero());
        }
    }

    #[test]
    fn pattern_series_matches_exhaustive_distribution() {
        for steps in [vec![1], vec![1, 0], vec![1, 1, -1], vec![1, 0, 1]] {
            let p = pat(&steps);
            let k = 9;
            let l = luka_pattern_series(&p, k, k).unwrap();
            for n in 1..=k {
                let dist = occurrence_distribution(&p, n, Convention::SkipFirst).unwrap();
                for c in 0..=k as u64 {
                    let want = dist.get(&c).map(|b| b.to_u64().unwrap()).unwrap_or(0);
                    let got = l.coeff(n, c as usize);
                    assert_eq!(*got, rat_int(want as i64), "n = {n}, c = {c}, pat {steps:?}");
                }
            }
        }
    }

    #[test]
    fn first_moment_binomial() {
        // Total skip-first occurrences over all length-k paths.
        for steps in [vec![1], vec![1, 0], vec![1, 0, 1], vec![1, 1, -1]] {
            let p = pat(&steps);
            let m = p.len() as i64;
            let h = p.final_height();
            let k_max = 10;
            let l = luka_pattern_series(&p, k_max, k_max).unwrap();
            let lu = l.derivative_x().at_x_one();
            for k in 1..=k_max {
                let want = binomial(2 * k as i64 - 2 * m + h, k as i64 - m - 1);
                assert_eq!(
                    *lu.coeff(k, 0),
                    Rat::from_integer(want),
                    "k = {k}, pat {steps:?}"
                );
            }
        }
    }

    #[test]
    fn kernel_vanishes_on_the_fixpoint() {
        for steps in [vec![1], vec![1, 0], vec![1, 0, 1], vec![1, 1, -1]] {
            let p = pat(&steps);
            let l = luka_pattern_series(&p, 8, 8).unwrap();
            assert!(kernel_residual(&p, &l).is_zero(), "pat {steps:?}");
            assert!((&pattern_fixpoint_rhs(&p, &l) - &l).is_zero());
        }
    }

    #[test]
    fn marked_families_match_their_closed_forms() {
        // marked_gf_coeffs errors out on any series/closed-form mismatch,
        // so success is the assertion.
        for d in 1..=4 {
            for i in 1..=3 {
                for k in (d + 1)..=10 {
                    marked_gf_coeffs(
                        MarkedFamily::BlueSubtree { subtree_size: i, root_degree: d },
                        k,
                    )
                    .unwrap();
                }
            }
            for j in 0..=3 {
                for k in 1..=10 {
                    marked_gf_coeffs(MarkedFamily::GapSize { gap: j, root_count: d }, k)
                        .unwrap();
                }
            }
        }
        for m in 0..=3 {
            for k in 1..=12 {
                marked_gf_coeffs(MarkedFamily::RedForest { forest_size: m }, k).unwrap();
            }
        }
    }

    #[test]
    fn moment_anchors() {
        // Proportion of marked gaps of size 0 among 2 gaps over 6
        // arrangements of size 3 is 1/2.
        let (mean, _) =
            finite_moments(MarkedFamily::GapSize { gap: 0, root_count: 2 }, 3).unwrap();
        assert_eq!(mean, Rat::new(BigInt::from(1), BigInt::from(2)));
        // Singleton subtree proportion in 5-vertex degree-2 trees is 2/5.
        let (mean, _) =
            finite_moments(MarkedFamily::BlueSubtree { subtree_size: 1, root_degree: 2 }, 5)
                .unwrap();
        assert_eq!(mean, Rat::new(BigInt::from(2), BigInt::from(5)));
        // Per-vertex singleton fringe proportion at k = 4 is 3/20.
        let (mean, _) = finite_moments(MarkedFamily::RedForest { forest_size: 1 }, 4).unwrap();
        assert_eq!(mean, Rat::new(BigInt::from(3), BigInt::from(20)));
    }

    #[test]
    fn fringe_proportion_decreases_toward_its_limit() {
        let eighth = Rat::new(BigInt::from(1), BigInt::from(8));
        let mut prev: Option<Rat> = None;
        for k in 4..=10 {
            let (mean, _) =
                finite_moments(MarkedFamily::RedForest { forest_size: 1 }, k).unwrap();
            assert!(mean > eighth, "k = {k}");
            if let Some(p) = prev {
                assert!(mean < p, "not decreasing at k = {k}");
            }
            prev = Some(mean);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(marked_gf_coeffs(
            MarkedFamily::BlueSubtree { subtree_size: 0, root_degree: 2 },
            5
        )
        .is_err());
        assert!(marked_gf_coeffs(
            MarkedFamily::BlueSubtree { subtree_size: 1, root_degree: 0 },
            5
        )
        .is_err());
        assert!(marked_gf_coeffs(
            MarkedFamily::BlueSubtree { subtree_size: 1, root_degree: 5 },
            5
        )
        .is_err());
        assert!(marked_gf_coeffs(MarkedFamily::GapSize { gap: 1, root_count: 0 }, 5).is_err());
        assert!(marked_gf_coeffs(MarkedFamily::RedForest { forest_size: 1 }, 0).is_err());
    }
}
