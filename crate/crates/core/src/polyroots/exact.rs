//! Integer polynomials for certified sign arithmetic.
//!
//! Every finite `f64` is a dyadic rational, so a float polynomial scaled by a
//! common power of two has integer coefficients and the same real roots.
//! Sturm chains are built as primitive pseudo-remainder sequences; signs are
//! evaluated exactly at dyadic points.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Coefficients in ascending degree; no trailing zeros (the zero polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntPoly(Vec<BigInt>);

/// `x = mantissa · 2^exp`, exactly.
fn decompose(x: f64) -> (BigInt, i32) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    let m = BigInt::from(mant);
    (if negative { -m } else { m }, exp)
}

impl IntPoly {
    /// Exact integer multiple (by a positive power of two) of the float polynomial.
    pub(crate) fn from_f64_ascending(coeffs: &[f64]) -> Self {
        let parts: Vec<_> = coeffs.iter().map(|&c| decompose(c)).collect();
        let min_exp = parts
            .iter()
            .filter(|(m, _)| !m.is_zero())
            .map(|&(_, e)| e)
            .min()
            .unwrap_or(0);
        let ints = parts
            .into_iter()
            .map(|(m, e)| m << ((e - min_exp) as usize))
            .collect();
        let mut p = IntPoly(ints);
        p.trim();
        p.primitive()
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> &BigInt {
        self.0.last().expect("nonzero polynomial")
    }

    /// Divides out the (positive) content; the sign is preserved.
    fn primitive(mut self) -> Self {
        let g = self
            .0
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in &mut self.0 {
                *c /= &g;
            }
        }
        self
    }

    pub(crate) fn derivative(&self) -> Self {
        let mut d = IntPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        );
        d.trim();
        d
    }

    fn neg(mut self) -> Self {
        for c in &mut self.0 {
            *c = -std::mem::take(c);
        }
        self
    }

    /// Pseudo-division: `lc(b)^(deg a - deg b + 1) · a = q·b + r`.
    fn pseudo_divmod(&self, b: &IntPoly) -> (IntPoly, IntPoly) {
        let db = b.degree();
        let lb = b.lead().clone();
        let mut r = self.0.clone();
        let steps = self.degree() + 1 - db;
        let mut q = vec![BigInt::zero(); steps];
        for s in (0..steps).rev() {
            let top = r[s + db].clone();
            for c in q.iter_mut() {
                *c *= &lb;
            }
            q[s] += &top;
            for c in r.iter_mut() {
                *c *= &lb;
            }
            for (j, bc) in b.0.iter().enumerate() {
                r[s + j] -= &top * bc;
            }
        }
        let mut q = IntPoly(q);
        let mut r = IntPoly(r);
        q.trim();
        r.trim();
        (q, r)
    }

    /// Exact quotient `self / b` up to a positive factor, for `b | self`.
    pub(crate) fn exact_div(&self, b: &IntPoly) -> IntPoly {
        let (q, r) = self.pseudo_divmod(b);
        debug_assert!(r.is_zero());
        let delta = self.degree() + 1 - b.degree();
        let q = if b.lead().is_negative() && delta % 2 == 1 {
            q.neg()
        } else {
            q
        };
        q.primitive()
    }

    /// Sign of `self(x)`, computed exactly.
    pub(crate) fn sign_at(&self, x: f64) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let (m, e) = decompose(x);
        let n = self.degree();
        let acc = if e >= 0 {
            let xi = m << (e as usize);
            self.0.iter().rev().fold(BigInt::zero(), |acc, c| acc * &xi + c)
        } else {
            // 2^{s·n} · p(m / 2^s)
            let s = (-e) as usize;
            let mut acc = self.0[n].clone();
            for j in (0..n).rev() {
                acc = acc * &m + (&self.0[j] << (s * (n - j)));
            }
            acc
        };
        match acc.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// Sturm chain `p, p', -rem(p, p'), …` with every member scaled by a positive constant.
#[derive(Debug, Clone)]
pub(crate) struct SturmChain(Vec<IntPoly>);

impl SturmChain {
    pub(crate) fn new(p: &IntPoly) -> Self {
        let mut chain = vec![p.clone()];
        let mut cur = p.derivative().primitive();
        while !cur.is_zero() {
            let prev = chain.last().expect("chain is nonempty");
            let (_, r) = prev.pseudo_divmod(&cur);
            let delta = prev.degree() + 1 - cur.degree();
            // r = lc^delta · rem; Sturm wants -rem up to a positive factor
            let flip = !(cur.lead().is_negative() && delta % 2 == 1);
            chain.push(cur);
            cur = if flip { r.neg() } else { r }.primitive();
        }
        SturmChain(chain)
    }

    /// The last member: `gcd(p, p')` up to a nonzero constant.
    pub(crate) fn gcd_with_derivative(&self) -> &IntPoly {
        self.0.last().expect("chain is nonempty")
    }

    fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = Ordering::Equal;
        for p in &self.0 {
            let s = p.sign_at(x);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Distinct roots in `(lo, hi]`. Valid at root endpoints when the chain
    /// comes from a square-free polynomial.
    pub(crate) fn count(&self, lo: f64, hi: f64) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// Square-free decomposition data for one polynomial.
#[derive(Debug, Clone)]
pub(crate) struct Certified {
    pub(crate) poly: IntPoly,
    /// Sturm chain of the square-free part `p / gcd(p, p')`.
    pub(crate) chain: SturmChain,
    pub(crate) squarefree: IntPoly,
    /// Chains of `g₁ = gcd(p, p')`, `g₂ = gcd(g₁, g₁')`, … while non-constant.
    gcd_tower: Vec<SturmChain>,
}

impl Certified {
    pub(crate) fn new(poly: IntPoly) -> Self {
        let full = SturmChain::new(&poly);
        let g = full.gcd_with_derivative().clone();
        let (squarefree, chain) = if g.degree() == 0 {
            (poly.clone(), full)
        } else {
            let sf = poly.exact_div(&g);
            let chain = SturmChain::new(&sf);
            (sf, chain)
        };
        let mut gcd_tower = Vec::new();
        let mut g = g;
        while g.degree() > 0 {
            let chain_g = SturmChain::new(&g);
            let next = chain_g.gcd_with_derivative().clone();
            let sf = if next.degree() == 0 {
                g.clone()
            } else {
                g.exact_div(&next)
            };
            gcd_tower.push(SturmChain::new(&sf));
            g = next;
        }
        Certified {
            poly,
            chain,
            squarefree,
            gcd_tower,
        }
    }

    /// Multiplicity of the unique distinct root in `(lo, hi]`.
    pub(crate) fn multiplicity(&self, lo: f64, hi: f64) -> usize {
        1 + self
            .gcd_tower
            .iter()
            .take_while(|c| c.count(lo, hi) > 0)
            .count()
    }
}
