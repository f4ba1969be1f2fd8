//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function around a
//! point, in up to [`MAX_VARS`] variables and up to total degree
//! [`MAX_ORDER`]. Coefficients are kept densely in graded order: all
//! degree-0 monomials, then degree 1, and so on. Because of that ordering a
//! jet of order `k` is a prefix of the same function's jet of order `k + 1`,
//! so truncation is a slice and mixed-order arithmetic simply works at the
//! smaller order.
//!
//! Stored values are Taylor coefficients, i.e. `∂^m f / m!` for the
//! multi-index `m`; [`Jet::derivative`] multiplies the factorials back in.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use thiserror::Error;

/// Highest total degree a jet can carry.
pub const MAX_ORDER: usize = 3;
/// Highest number of independent variables (4 base + 4 fiber slots).
pub const MAX_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable slot {index} out of range for a jet in {nvars} variables")]
    SlotOutOfRange { index: usize, nvars: usize },
    #[error("unsupported jet shape: order {order}, {nvars} variables (max order {MAX_ORDER}, max {MAX_VARS} variables)")]
    Shape { order: usize, nvars: usize },
    #[error("derivative of degree {degree} requested from a jet of order {order}")]
    DegreeOverflow { degree: usize, order: usize },
    #[error("multi-index has {len} entries but the jet has {nvars} variables")]
    IndexLength { len: usize, nvars: usize },
    #[error("singular evaluation in {op}: argument value {value}")]
    Singular { op: &'static str, value: f64 },
}

type Exponents = [u8; MAX_VARS];

/// Monomial bookkeeping for one variable count, shared by every jet in that
/// many variables.
struct Layout {
    exps: Vec<Exponents>,
    /// Number of monomials of total degree `<= k`.
    len_by_order: [usize; MAX_ORDER + 1],
    /// Products `(a, b, a + b)` sorted by the degree of `a + b`.
    pairs: Vec<(u16, u16, u16)>,
    pairs_by_order: [usize; MAX_ORDER + 1],
    /// `raise[v][m]` is the index of monomial `m + e_v` (only for `deg m < MAX_ORDER`).
    raise: Vec<Vec<u16>>,
}

impl Layout {
    fn build(nvars: usize) -> Layout {
        let mut exps: Vec<Exponents> = Vec::new();
        let mut len_by_order = [0usize; MAX_ORDER + 1];
        for degree in 0..=MAX_ORDER {
            let mut current = [0u8; MAX_VARS];
            push_monomials(nvars, degree, 0, &mut current, &mut exps);
            len_by_order[degree] = exps.len();
        }
        let find = |e: &Exponents| exps.iter().position(|x| x == e);

        let mut pairs = Vec::new();
        let mut pairs_by_order = [0usize; MAX_ORDER + 1];
        for degree in 0..=MAX_ORDER {
            let lo = if degree == 0 { 0 } else { len_by_order[degree - 1] };
            for c in lo..len_by_order[degree] {
                for a in 0..len_by_order[degree] {
                    let ea = &exps[a];
                    let ec = &exps[c];
                    if (0..MAX_VARS).all(|v| ea[v] <= ec[v]) {
                        let mut eb = [0u8; MAX_VARS];
                        for v in 0..MAX_VARS {
                            eb[v] = ec[v] - ea[v];
                        }
                        let b = find(&eb).expect("complement monomial exists");
                        pairs.push((a as u16, b as u16, c as u16));
                    }
                }
            }
            pairs_by_order[degree] = pairs.len();
        }

        let below_top = len_by_order[MAX_ORDER - 1];
        let raise = (0..nvars)
            .map(|v| {
                (0..below_top)
                    .map(|m| {
                        let mut e = exps[m];
                        e[v] += 1;
                        find(&e).expect("raised monomial exists") as u16
                    })
                    .collect()
            })
            .collect();

        Layout {
            exps,
            len_by_order,
            pairs,
            pairs_by_order,
            raise,
        }
    }

    fn index_of(&self, e: &Exponents) -> Option<usize> {
        let degree: usize = e.iter().map(|&x| x as usize).sum();
        if degree > MAX_ORDER {
            return None;
        }
        let lo = if degree == 0 { 0 } else { self.len_by_order[degree - 1] };
        (lo..self.len_by_order[degree]).find(|&m| &self.exps[m] == e)
    }
}

fn push_monomials(
    nvars: usize,
    remaining: usize,
    var: usize,
    current: &mut Exponents,
    out: &mut Vec<Exponents>,
) {
    if var + 1 == nvars {
        current[var] = remaining as u8;
        out.push(*current);
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_monomials(nvars, remaining - k, var + 1, current, out);
    }
    current[var] = 0;
}

fn layout(nvars: usize) -> &'static Layout {
    static LAYOUTS: [OnceLock<Layout>; MAX_VARS + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    LAYOUTS[nvars].get_or_init(|| Layout::build(nvars))
}

fn check_shape(order: usize, nvars: usize) -> Result<(), JetError> {
    if order > MAX_ORDER || nvars == 0 || nvars > MAX_VARS {
        Err(JetError::Shape { order, nvars })
    } else {
        Ok(())
    }
}

/// Number of stored coefficients for a jet of the given shape.
pub fn coefficient_count(order: usize, nvars: usize) -> usize {
    layout(nvars).len_by_order[order]
}

/// Truncated Taylor expansion of a scalar function.
#[derive(Clone, PartialEq)]
pub struct Jet {
    order: u8,
    nvars: u8,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("nvars", &self.nvars)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    /// Constant jet. Panics on a shape outside the supported range; use
    /// [`Jet::variable`] to validate user-provided shapes.
    pub fn constant(value: f64, order: usize, nvars: usize) -> Jet {
        check_shape(order, nvars).expect("valid jet shape");
        let mut coeffs = vec![0.0; coefficient_count(order, nvars)];
        coeffs[0] = value;
        Jet {
            order: order as u8,
            nvars: nvars as u8,
            coeffs,
        }
    }

    pub fn zero(order: usize, nvars: usize) -> Jet {
        Jet::constant(0.0, order, nvars)
    }

    /// Seeds variable `index` at `value`: the jet of `f(v) = v_index`.
    pub fn variable(index: usize, value: f64, order: usize, nvars: usize) -> Result<Jet, JetError> {
        check_shape(order, nvars)?;
        if index >= nvars {
            return Err(JetError::SlotOutOfRange { index, nvars });
        }
        let mut jet = Jet::constant(value, order, nvars);
        if order >= 1 {
            // Degree-1 monomials are laid out as e_0, e_1, ... in that order.
            jet.coeffs[1 + index] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from raw Taylor coefficients in graded order.
    pub fn from_coeffs(order: usize, nvars: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        check_shape(order, nvars)?;
        if coeffs.len() != coefficient_count(order, nvars) {
            return Err(JetError::Shape { order, nvars });
        }
        Ok(Jet {
            order: order as u8,
            nvars: nvars as u8,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Exponent vectors of the stored coefficients, in storage order.
    pub fn monomials(&self) -> impl Iterator<Item = &[u8]> + '_ {
        let nvars = self.nvars();
        layout(nvars).exps[..self.coeffs.len()]
            .iter()
            .map(move |e| &e[..nvars])
    }

    /// Partial derivative for the multi-index `exps` (one exponent per
    /// variable; missing trailing entries count as zero).
    pub fn derivative(&self, exps: &[u8]) -> Result<f64, JetError> {
        if exps.len() > self.nvars() {
            return Err(JetError::IndexLength {
                len: exps.len(),
                nvars: self.nvars(),
            });
        }
        let degree: usize = exps.iter().map(|&e| e as usize).sum();
        if degree > self.order() {
            return Err(JetError::DegreeOverflow {
                degree,
                order: self.order(),
            });
        }
        let mut e = [0u8; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        let m = layout(self.nvars())
            .index_of(&e)
            .expect("monomial within order");
        let factorial: f64 = exps.iter().map(|&k| factorial(k as usize)).product();
        Ok(self.coeffs[m] * factorial)
    }

    /// First partial derivative with respect to variable `v`.
    pub fn d1(&self, v: usize) -> f64 {
        debug_assert!(self.order >= 1 && v < self.nvars());
        self.coeffs[1 + v]
    }

    /// Second partial derivative with respect to variables `a` and `b`.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        debug_assert!(self.order >= 2 && a < self.nvars() && b < self.nvars());
        let lay = layout(self.nvars());
        let m = lay.raise[a][1 + b] as usize;
        let c = self.coeffs[m];
        if a == b {
            2.0 * c
        } else {
            c
        }
    }

    /// The jet of `∂f/∂v_var`, one order lower. Panics on an order-0 jet.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.nvars(), "variable slot out of range");
        let lay = layout(self.nvars());
        let order = self.order() - 1;
        let n = lay.len_by_order[order];
        let coeffs = (0..n)
            .map(|m| {
                let up = lay.raise[var][m] as usize;
                self.coeffs[up] * (lay.exps[m][var] as f64 + 1.0)
            })
            .collect();
        Jet {
            order: order as u8,
            nvars: self.nvars,
            coeffs,
        }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        Jet {
            order: order as u8,
            nvars: self.nvars,
            coeffs: self.coeffs[..coefficient_count(order, self.nvars())].to_vec(),
        }
    }

    /// Re-expresses the jet in `nvars` variables with variable `v` mapped to
    /// `v + offset`, keeping the order. New variables enter with zero
    /// derivatives.
    pub fn embed(&self, nvars: usize, offset: usize) -> Jet {
        assert!(offset + self.nvars() <= nvars && nvars <= MAX_VARS);
        let src = layout(self.nvars());
        let dst = layout(nvars);
        let mut out = Jet::zero(self.order(), nvars);
        for (m, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut e = [0u8; MAX_VARS];
            e[offset..offset + self.nvars()].copy_from_slice(&src.exps[m][..self.nvars()]);
            let k = dst.index_of(&e).expect("embedded monomial exists");
            out.coeffs[k] = c;
        }
        out
    }

    /// Same jet with every coefficient of total degree above `order` set to
    /// zero but the storage shape unchanged.
    pub fn with_order(&self, order: usize) -> Jet {
        assert!(order <= MAX_ORDER);
        let mut out = Jet::zero(order, self.nvars());
        let n = self.coeffs.len().min(out.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jets in different variable counts");
        let order = self.order.min(other.order) as usize;
        let lay = layout(self.nvars());
        let mut coeffs = vec![0.0; lay.len_by_order[order]];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &lay.pairs[..lay.pairs_by_order[order]] {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            order: order as u8,
            nvars: self.nvars,
            coeffs,
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jets in different variable counts");
        let order = self.order.min(other.order);
        let n = coefficient_count(order as usize, self.nvars());
        Jet {
            order,
            nvars: self.nvars,
            coeffs: (0..n).map(|m| f(self.coeffs[m], other.coeffs[m])).collect(),
        }
    }

    /// `f(self)` from the derivatives `f(a0), f'(a0), f''(a0), f'''(a0)`.
    fn compose(&self, derivs: [f64; MAX_ORDER + 1]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet::constant(derivs[0], self.order(), self.nvars());
        let mut power = h.clone();
        for (k, d) in derivs.iter().enumerate().take(self.order() + 1).skip(1) {
            if k > 1 {
                power = power.mul_ref(&h);
            }
            let w = d / factorial(k);
            if w != 0.0 {
                for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    *o += w * p;
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(JetError::Singular { op: "division", value: a });
        }
        let r = 1.0 / a;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul_ref(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Singular { op: "sqrt", value: a });
        }
        let s = a.sqrt();
        Ok(self.compose([
            s,
            0.5 / s,
            -0.25 / (s * a),
            0.375 / (s * a * a),
        ]))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Singular { op: "ln", value: a });
        }
        Ok(self.compose([a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)]))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    /// `|f|`; undefined (singular) where `f = 0`.
    pub fn abs(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(JetError::Singular { op: "abs", value: a });
        }
        Ok(if a > 0.0 { self.clone() } else { -self })
    }

    /// Integer power by repeated multiplication; valid for any base except
    /// zero with a negative exponent.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut out = Jet::constant(1.0, self.order(), self.nvars());
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul_ref(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        Ok(out)
    }

    /// Real power with constant exponent. Integral exponents go through
    /// [`Jet::powi`]; others need a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Singular { op: "pow", value: a });
        }
        let v = a.powf(p);
        Ok(self.compose([
            v,
            p * v / a,
            p * (p - 1.0) * v / (a * a),
            p * (p - 1.0) * (p - 2.0) * v / (a * a * a),
        ]))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x - y));
binop!(Mul, mul, |a: &Jet, b: &Jet| a.mul_ref(b));

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = self.zip_with(rhs, |x, y| x + y);
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = self.zip_with(rhs, |x, y| x - y);
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, j| acc + j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_sizes() {
        assert_eq!(coefficient_count(3, 8), 165);
        assert_eq!(coefficient_count(3, 4), 35);
        assert_eq!(coefficient_count(2, 8), 45);
        assert_eq!(coefficient_count(0, 1), 1);
        assert_eq!(coefficient_count(2, 1), 3);
    }

    #[test]
    fn seed_identity_and_square() {
        let x = Jet::variable(0, 3.0, 2, 1).unwrap();
        assert_eq!(x.coeffs(), &[3.0, 1.0, 0.0]);
        let sq = &x * &x;
        assert_eq!(sq.derivative(&[0]).unwrap(), 9.0);
        assert_eq!(sq.derivative(&[1]).unwrap(), 6.0);
        assert_eq!(sq.derivative(&[2]).unwrap(), 2.0);
    }

    #[test]
    fn seeds_add_to_gradient() {
        let a = Jet::variable(1, 0.5, 1, 4).unwrap();
        let b = Jet::variable(0, 2.0, 1, 4).unwrap();
        let s = a + b;
        let grad: Vec<f64> = (0..4).map(|v| s.d1(v)).collect();
        assert_eq!(grad, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn seed_out_of_range() {
        assert_eq!(
            Jet::variable(4, 1.0, 2, 4).unwrap_err(),
            JetError::SlotOutOfRange { index: 4, nvars: 4 }
        );
        assert!(matches!(
            Jet::variable(0, 1.0, 4, 4),
            Err(JetError::Shape { .. })
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let x = Jet::variable(0, 2.0, 2, 1).unwrap();
        let xx = &x * &x;
        assert_eq!(
            [xx.value(), xx.d1(0), xx.d2(0, 0)],
            [4.0, 4.0, 2.0]
        );
        let inv = Jet::constant(1.0, 2, 1).try_div(&x).unwrap();
        assert_relative_eq!(inv.value(), 0.5);
        assert_relative_eq!(inv.d1(0), -0.25);
        assert_relative_eq!(inv.d2(0, 0), 0.25);

        let five = Jet::variable(0, 5.0, 3, 1).unwrap();
        let one = five.try_div(&five).unwrap();
        assert_relative_eq!(one.value(), 1.0);
        for d in 1..=3u8 {
            assert!(one.derivative(&[d]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn division_by_zero_value() {
        let x = Jet::variable(0, 0.0, 2, 1).unwrap();
        let err = Jet::constant(1.0, 2, 1).try_div(&x).unwrap_err();
        assert!(matches!(err, JetError::Singular { op: "division", .. }));
    }

    #[test]
    fn elementary_examples() {
        let x = Jet::variable(0, 4.0, 2, 1).unwrap();
        let s = x.sqrt().unwrap();
        assert_relative_eq!(s.value(), 2.0);
        assert_relative_eq!(s.d1(0), 0.25);
        assert_relative_eq!(s.d2(0, 0), -1.0 / 32.0);

        let z = Jet::variable(0, 0.0, 2, 1).unwrap();
        let sn = z.sin();
        assert_eq!([sn.value(), sn.d1(0), sn.d2(0, 0)], [0.0, 1.0, 0.0]);

        let x3 = Jet::variable(0, 3.0, 3, 1).unwrap();
        let back = x3.ln().unwrap().exp();
        for (a, b) in back.coeffs().iter().zip(x3.coeffs()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn elementary_domain_errors() {
        let neg = Jet::variable(0, -1.0, 2, 1).unwrap();
        assert!(matches!(
            neg.sqrt(),
            Err(JetError::Singular { op: "sqrt", value }) if value == -1.0
        ));
        assert!(neg.ln().is_err());
        assert!(neg.powf(0.5).is_err());
        assert!(neg.powf(2.0).is_ok());
        assert!(Jet::zero(1, 1).abs().is_err());
    }

    #[test]
    fn extract_examples() {
        let c = Jet::constant(7.0, 3, 2);
        assert_eq!(c.derivative(&[1, 0]).unwrap(), 0.0);
        assert_eq!(c.derivative(&[1, 2]).unwrap(), 0.0);
        let x = Jet::variable(0, 1.5, 2, 2).unwrap();
        let y = Jet::variable(1, -0.5, 2, 2).unwrap();
        assert_eq!((&x * &y).derivative(&[1, 1]).unwrap(), 1.0);
        assert!(matches!(
            x.derivative(&[2, 1]),
            Err(JetError::DegreeOverflow { degree: 3, order: 2 })
        ));
    }

    #[test]
    fn partial_lowers_order() {
        // f = x^2 y + y^3 at (1, 2)
        let x = Jet::variable(0, 1.0, 3, 2).unwrap();
        let y = Jet::variable(1, 2.0, 3, 2).unwrap();
        let f = &(&x * &x) * &y + &(&y * &y) * &y;
        let fy = f.partial(1);
        assert_eq!(fy.order(), 2);
        // f_y = x^2 + 3 y^2 = 13, f_yx = 2x = 2, f_yy = 6y = 12
        assert_relative_eq!(fy.value(), 13.0);
        assert_relative_eq!(fy.d1(0), 2.0);
        assert_relative_eq!(fy.d1(1), 12.0);
        assert_relative_eq!(fy.d2(1, 1), 6.0);
    }

    #[test]
    fn embed_shifts_variables() {
        let x = Jet::variable(1, 2.0, 2, 4).unwrap();
        let sq = &x * &x;
        let e = sq.embed(8, 4);
        assert_relative_eq!(e.d1(5), 4.0);
        assert_relative_eq!(e.d2(5, 5), 2.0);
        assert_eq!(e.d1(1), 0.0);
    }

    #[test]
    fn powi_negative_base() {
        let x = Jet::variable(0, -2.0, 3, 1).unwrap();
        let c = x.powi(3).unwrap();
        assert_relative_eq!(c.value(), -8.0);
        assert_relative_eq!(c.d1(0), 12.0);
        assert_relative_eq!(c.derivative(&[3]).unwrap(), 6.0);
        let r = x.powi(-2).unwrap();
        assert_relative_eq!(r.value(), 0.25);
        assert_relative_eq!(r.d1(0), 0.25); // -2 x^-3 = 0.25
    }
}
