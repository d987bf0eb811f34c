//! Arithmetic in GF(q) for prime powers q.
//!
//! Elements are identified by a canonical index: the coefficient vector
//! `(c_0, ..., c_{e-1})` of the element as a polynomial in the generator of
//! the extension, read as a base-p number with `c_0` least significant.
//! Index 0 is zero and index 1 is one. This index order is the total order
//! used everywhere downstream for tie-breaking.
//!
//! Multiplication goes through discrete-log tables and addition through
//! Zech logarithms, so every operation is a handful of table lookups.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest order for which tables are built.
pub const MAX_ORDER: usize = 1 << 16;

const NO_LOG: u32 = u32::MAX;

/// An element of a [`Field`], stored as its canonical index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Elem(u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    /// Element with the given index; the caller ensures it is below the field order.
    #[inline]
    pub fn from_index(i: usize) -> Elem {
        Elem(i as u16)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Binary operations accepted by [`Field::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    /// The right operand's index is used as a non-negative exponent.
    Pow,
}

/// Quadratic character of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadChar {
    Zero,
    Square,
    NonSquare,
}

/// The finite field of order `q = p^e`.
#[derive(Clone, Debug)]
pub struct Field {
    order: usize,
    characteristic: usize,
    degree: u32,
    /// Monic modulus, `modulus[i]` is the coefficient of `x^i`.
    modulus: Vec<u16>,
    primitive: Elem,
    /// `exp[i] = g^i` for `i` in `0..2(q-1)`, doubled to skip a reduction.
    exp: Vec<u16>,
    log: Vec<u32>,
    /// `zech[n] = log(1 + g^n)`, or `NO_LOG` when `1 + g^n = 0`.
    zech: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.modulus == other.modulus
    }
}

impl Eq for Field {}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        // q itself is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn digits(mut n: usize, p: usize, len: usize) -> Vec<u16> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((n % p) as u16);
        n /= p;
    }
    out
}

fn undigits(coeffs: &[u16], p: usize) -> usize {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c as usize)
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p).
fn poly_rem(a: &[u16], m: &[u16], p: usize) -> Vec<u16> {
    let mut r: Vec<u32> = a.iter().map(|&c| c as u32).collect();
    let dm = m.len() - 1;
    let p32 = p as u32;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = r.len() - dm;
        for (i, &mc) in m[..dm].iter().enumerate() {
            let sub = lead * mc as u32 % p32;
            r[shift + i] = (r[shift + i] + p32 - sub) % p32;
        }
    }
    r.into_iter().map(|c| c as u16).collect()
}

fn is_irreducible(m: &[u16], p: usize) -> bool {
    let e = m.len() - 1;
    for d in 1..=e / 2 {
        for low in 0..p.pow(d as u32) {
            let mut divisor = digits(low, p, d);
            divisor.push(1);
            if poly_rem(m, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_mul_mod(a: &[u16], b: &[u16], m: &[u16], p: usize) -> Vec<u16> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u32 * y as u32) % p as u32;
        }
    }
    let prod: Vec<u16> = prod.into_iter().map(|c| c as u16).collect();
    let mut r = poly_rem(&prod, m, p);
    r.resize(m.len() - 1, 0);
    r
}

impl Field {
    /// Builds GF(q). The modulus is the first irreducible monic polynomial of
    /// degree `e` when monics are ordered by their lower coefficient vector
    /// read as a base-p number (`x^3+x+1` before `x^3+x^2+1`).
    pub fn new(q: usize) -> Result<Field> {
        let (p, e) = prime_power(q as u64).ok_or(Error::NotAPrimePower(q as u64))?;
        if q > MAX_ORDER {
            return Err(Error::UnsupportedOrder(q));
        }
        let p = p as usize;
        let e_us = e as usize;

        let modulus = (0..q)
            .map(|low| {
                let mut m = digits(low, p, e_us);
                m.push(1);
                m
            })
            .find(|m| is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");

        // multiplication on coefficient vectors, only used while building tables
        let mul_idx = |a: usize, b: usize| -> usize {
            let r = poly_mul_mod(&digits(a, p, e_us), &digits(b, p, e_us), &modulus, p);
            undigits(&r, p)
        };

        let mut exp = Vec::with_capacity(q - 1);
        let mut primitive = 1;
        for g in 1..q {
            exp.clear();
            let mut x = 1usize;
            loop {
                exp.push(x as u16);
                x = mul_idx(x, g);
                if x == 1 || exp.len() > q - 1 {
                    break;
                }
            }
            if exp.len() == q - 1 {
                primitive = g;
                break;
            }
        }
        debug_assert_eq!(exp.len(), q - 1);

        let mut log = vec![NO_LOG; q];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        let add_idx = |a: usize, b: usize| -> usize {
            let s: Vec<u16> = digits(a, p, e_us)
                .iter()
                .zip(digits(b, p, e_us))
                .map(|(&x, y)| ((x as usize + y as usize) % p) as u16)
                .collect();
            undigits(&s, p)
        };
        let zech = exp.iter().map(|&gn| log[add_idx(1, gn as usize)]).collect::<Vec<_>>();
        let doubled: Vec<u16> = exp.iter().chain(exp.iter()).copied().collect();

        Ok(Field {
            order: q,
            characteristic: p,
            degree: e,
            modulus,
            primitive: Elem(primitive as u16),
            exp: doubled,
            log,
            zech,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn characteristic(&self) -> usize {
        self.characteristic
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> &[u16] {
        &self.modulus
    }

    pub fn primitive_element(&self) -> Elem {
        self.primitive
    }

    pub fn is_even(&self) -> bool {
        self.characteristic == 2
    }

    /// Element with the given canonical index.
    pub fn element(&self, index: usize) -> Result<Elem> {
        if index < self.order {
            Ok(Elem(index as u16))
        } else {
            Err(Error::FieldMismatch {
                index,
                order: self.order,
            })
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order as u16).map(Elem)
    }

    /// Nonzero elements in canonical order.
    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.order as u16).map(Elem)
    }

    /// Coefficient vector of `a` over the prime field, lowest degree first.
    pub fn coefficients(&self, a: Elem) -> Vec<u16> {
        digits(a.index(), self.characteristic, self.degree as usize)
    }

    /// Element from its prime-field coefficient vector.
    pub fn from_coefficients(&self, coeffs: &[u16]) -> Result<Elem> {
        if coeffs.len() > self.degree as usize || coeffs.iter().any(|&c| c as usize >= self.characteristic) {
            return Err(Error::BadArguments(format!(
                "coefficient vector {coeffs:?} out of range for GF({})",
                self.order
            )));
        }
        Ok(Elem(undigits(coeffs, self.characteristic) as u16))
    }

    /// Discrete log to the primitive element; `None` for zero.
    #[inline]
    pub fn log(&self, a: Elem) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.index()])
    }

    /// `g^n` for the primitive element `g`.
    #[inline]
    pub fn exp(&self, n: u64) -> Elem {
        Elem(self.exp[(n % (self.order as u64 - 1)) as usize])
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let n = self.order as u32 - 1;
        let la = self.log[a.index()];
        let lb = self.log[b.index()];
        let diff = if lb >= la { lb - la } else { lb + n - la };
        match self.zech[diff as usize] {
            NO_LOG => Elem::ZERO,
            z => Elem(self.exp[(la + z) as usize]),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a.is_zero() || self.characteristic == 2 {
            return a;
        }
        let half = (self.order as u32 - 1) / 2;
        Elem(self.exp[(self.log[a.index()] + half) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        Elem(self.exp[(self.log[a.index()] + self.log[b.index()]) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.order as u32 - 1;
        Ok(Elem(self.exp[((n - self.log[a.index()]) % n) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let n = self.order as u64 - 1;
        self.exp(self.log[a.index()] as u64 * (e % n))
    }

    /// Checked binary operation on elements that may not belong to this field.
    pub fn arith(&self, a: Elem, b: Elem, op: Op) -> Result<Elem> {
        for x in [a, b] {
            if x.index() >= self.order && !(op == Op::Pow && x == b) {
                return Err(Error::FieldMismatch {
                    index: x.index(),
                    order: self.order,
                });
            }
        }
        Ok(match op {
            Op::Add => self.add(a, b),
            Op::Sub => self.sub(a, b),
            Op::Mul => self.mul(a, b),
            Op::Div => self.div(a, b)?,
            Op::Pow => self.pow(a, b.0 as u64),
        })
    }

    /// Zero, nonzero square, or nonsquare. In even characteristic every
    /// nonzero element is a square.
    pub fn quadratic_character(&self, a: Elem) -> QuadChar {
        match self.log(a) {
            None => QuadChar::Zero,
            Some(_) if self.characteristic == 2 => QuadChar::Square,
            Some(l) if l % 2 == 0 => QuadChar::Square,
            Some(_) => QuadChar::NonSquare,
        }
    }

    pub fn is_square(&self, a: Elem) -> bool {
        self.quadratic_character(a) == QuadChar::Square
    }

    /// Smallest nonsquare in canonical order (odd characteristic only).
    pub fn smallest_nonsquare(&self) -> Option<Elem> {
        self.nonzero()
            .find(|&a| self.quadratic_character(a) == QuadChar::NonSquare)
    }

    /// `a^p`, the Frobenius image.
    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.characteristic as u64)
    }

    /// Absolute trace `a + a^p + ... + a^(p^(e-1))`, an element of the prime field.
    pub fn trace(&self, a: Elem) -> Elem {
        let mut acc = Elem::ZERO;
        let mut x = a;
        for _ in 0..self.degree {
            acc = self.add(acc, x);
            x = self.frobenius(x);
        }
        acc
    }

    /// Embeds a small integer through repeated addition of one.
    pub fn from_int(&self, n: i64) -> Elem {
        let p = self.characteristic as i64;
        Elem(n.rem_euclid(p) as u16)
    }

    /// Human-readable form: the index for prime fields, a polynomial in `x` otherwise.
    pub fn label(&self, a: Elem) -> String {
        if self.degree == 1 {
            return a.index().to_string();
        }
        let coeffs = self.coefficients(a);
        let terms: Vec<String> = coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_prime_powers() {
        for q in [0, 1, 6, 10, 12, 15, 18, 100] {
            assert_eq!(Field::new(q).unwrap_err(), Error::NotAPrimePower(q as u64));
        }
    }

    #[test]
    fn prime_field_is_mod_p() {
        let f = Field::new(5).unwrap();
        assert_eq!(f.characteristic(), 5);
        assert_eq!(f.degree(), 1);
        for a in 0..5 {
            for b in 0..5 {
                let (x, y) = (Elem(a), Elem(b));
                assert_eq!(f.add(x, y).index(), (a as usize + b as usize) % 5);
                assert_eq!(f.mul(x, y).index(), (a as usize * b as usize) % 5);
            }
        }
        assert_eq!(f.add(Elem(3), Elem(4)), Elem(2));
    }

    #[test]
    fn gf4_uses_x2_x_1() {
        let f = Field::new(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let x = f.from_coefficients(&[0, 1]).unwrap();
        let x_plus_1 = f.from_coefficients(&[1, 1]).unwrap();
        assert_eq!(f.mul(x, x), x_plus_1);
    }

    #[test]
    fn modulus_choice_is_smallest() {
        assert_eq!(Field::new(8).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Field::new(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Field::new(16).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn checked_arith_errors() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.arith(Elem(3), Elem(0), Op::Div), Err(Error::DivisionByZero));
        assert!(matches!(
            f.arith(Elem(9), Elem(1), Op::Add),
            Err(Error::FieldMismatch { index: 9, order: 7 })
        ));
        assert_eq!(f.arith(Elem(3), Elem(4), Op::Pow), Ok(Elem(4))); // 3^4 = 81 = 4 mod 7
        assert!(f.element(7).is_err());
    }

    #[test]
    fn fermat_for_all_small_fields() {
        for q in 2..=1024usize {
            let Ok(f) = Field::new(q) else { continue };
            for a in f.nonzero() {
                assert_eq!(f.pow(a, (q - 1) as u64), Elem::ONE, "q={q} a={a:?}");
            }
        }
    }

    #[test]
    fn squares_in_odd_fields() {
        for q in [3, 5, 7, 9, 11, 13, 25, 27, 49, 81, 121, 125] {
            let f = Field::new(q).unwrap();
            let squares: std::collections::BTreeSet<Elem> = f.nonzero().map(|y| f.mul(y, y)).collect();
            assert_eq!(squares.len(), (q - 1) / 2);
            for a in f.nonzero() {
                assert_eq!(f.is_square(a), squares.contains(&a));
            }
            for a in f.nonzero().filter(|&a| !f.is_square(a)) {
                for b in f.nonzero().filter(|&b| !f.is_square(b)) {
                    assert!(f.is_square(f.mul(a, b)));
                }
            }
        }
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.quadratic_character(Elem(4)), QuadChar::Square);
        assert_eq!(f5.quadratic_character(Elem(2)), QuadChar::NonSquare);
        assert_eq!(f5.quadratic_character(Elem(0)), QuadChar::Zero);
        let f4 = Field::new(4).unwrap();
        assert!(f4.nonzero().all(|a| f4.is_square(a)));
    }

    #[test]
    fn trace_is_in_prime_field_and_balanced() {
        for q in [4, 8, 16, 32, 9, 27] {
            let f = Field::new(q).unwrap();
            let p = f.characteristic();
            let mut counts = vec![0; p];
            for a in f.elements() {
                let t = f.trace(a);
                assert!(t.index() < p);
                counts[t.index()] += 1;
            }
            assert!(counts.iter().all(|&c| c == q / p));
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = Field::new(27).unwrap();
        let b = Field::new(27).unwrap();
        assert_eq!(a.exp, b.exp);
        assert_eq!(a.log, b.log);
        assert_eq!(a.zech, b.zech);
    }

    fn arb_field() -> impl Strategy<Value = usize> {
        prop::sample::select(vec![2usize, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81, 128, 243])
    }

    proptest! {
        #[test]
        fn field_axioms(q in arb_field(), a in 0usize..243, b in 0usize..243, c in 0usize..243) {
            let f = Field::new(q).unwrap();
            let (a, b, c) = (Elem((a % q) as u16), Elem((b % q) as u16), Elem((c % q) as u16));
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, Elem::ZERO), a);
            prop_assert_eq!(f.mul(a, Elem::ONE), a);
            prop_assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
            prop_assert_eq!(f.add(f.sub(a, b), b), a);
            if !b.is_zero() {
                prop_assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
            }
        }

        #[test]
        fn coefficient_vectors_add_componentwise(q in arb_field(), a in 0usize..243, b in 0usize..243) {
            let f = Field::new(q).unwrap();
            let (a, b) = (Elem((a % q) as u16), Elem((b % q) as u16));
            let p = f.characteristic() as u16;
            let expect: Vec<u16> = f.coefficients(a).iter().zip(f.coefficients(b))
                .map(|(&x, y)| (x + y) % p).collect();
            prop_assert_eq!(f.coefficients(f.add(a, b)), expect);
        }
    }
}
