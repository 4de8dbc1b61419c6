//! Dense polynomials over `F_p`: squarefree and distinct-degree factorization.

/// Coefficients low to high, reduced mod `p`, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    p: u32,
    c: Vec<u32>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(a: u32, mut e: u32, p: u32) -> u32 {
    let m = p as u64;
    let (mut r, mut b) = (1u64, a as u64 % m);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u32
}

impl FpPoly {
    pub fn new(p: u32, coeffs: Vec<u32>) -> FpPoly {
        let mut f = FpPoly { p, c: coeffs.into_iter().map(|x| x % p).collect() };
        f.trim();
        f
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    fn one(p: u32) -> FpPoly {
        FpPoly { p, c: vec![1] }
    }

    fn x(p: u32) -> FpPoly {
        FpPoly { p, c: vec![0, 1] }
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn is_one(&self) -> bool {
        self.c == [1]
    }

    fn monic(&self) -> FpPoly {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let k = inv_mod(l, self.p) as u64;
                FpPoly { p: self.p, c: self.c.iter().map(|&x| (x as u64 * k % self.p as u64) as u32).collect() }
            }
        }
    }

    fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let p = self.p;
        let c = (0..n)
            .map(|i| {
                let a = *self.c.get(i).unwrap_or(&0);
                let b = *o.c.get(i).unwrap_or(&0);
                (a + p - b) % p
            })
            .collect();
        FpPoly::new(p, c)
    }

    fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly { p: self.p, c: vec![] };
        }
        let m = self.p as u64;
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = (c[i + j] + a as u64 * b as u64) % m;
            }
        }
        FpPoly::new(self.p, c.into_iter().map(|x| x as u32).collect())
    }

    /// Quotient and remainder; `d` must be nonzero.
    fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let p = self.p as u64;
        let dl = d.c.len();
        if self.c.len() < dl {
            return (FpPoly { p: self.p, c: vec![] }, self.clone());
        }
        let k = inv_mod(*d.c.last().unwrap(), self.p) as u64;
        let mut r: Vec<u64> = self.c.iter().map(|&x| x as u64).collect();
        let mut q = vec![0u64; self.c.len() - dl + 1];
        for i in (0..q.len()).rev() {
            let t = r[i + dl - 1] % p * k % p;
            q[i] = t;
            if t == 0 {
                continue;
            }
            for (j, &b) in d.c.iter().enumerate() {
                r[i + j] = (r[i + j] + (p - t) * b as u64) % p;
            }
        }
        r.truncate(dl - 1);
        (FpPoly::new(self.p, q.into_iter().map(|x| x as u32).collect()), FpPoly::new(self.p, r.into_iter().map(|x| x as u32).collect()))
    }

    fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    fn div_exact(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).0
    }

    /// Monic gcd.
    fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn derivative(&self) -> FpPoly {
        let p = self.p as u64;
        let c = self.c.iter().enumerate().skip(1).map(|(i, &a)| (a as u64 * (i as u64 % p) % p) as u32).collect();
        FpPoly::new(self.p, c)
    }

    /// `g` with `g^p = self`, for a polynomial in `x^p`.
    fn pth_root(&self) -> FpPoly {
        let p = self.p as usize;
        FpPoly::new(self.p, self.c.iter().step_by(p).copied().collect())
    }

    /// `self^p mod m`.
    fn frobenius_mod(&self, m: &FpPoly) -> FpPoly {
        let mut acc = FpPoly::one(self.p);
        let mut base = self.rem(m);
        let mut e = self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Monic squarefree factors `g_i` with multiplicities, `self = c ∏ g_i^m_i`.
    pub fn squarefree(&self) -> Vec<(FpPoly, usize)> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let f = self.monic();
        let mut out = Vec::new();
        let mut c = f.gcd(&f.derivative());
        let mut w = f.div_exact(&c);
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c);
            let z = w.div_exact(&y);
            if z.degree().unwrap_or(0) > 0 {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w);
        }
        if !c.is_one() {
            // what remains is a p-th power
            for (g, m) in c.pth_root().squarefree() {
                out.push((g, m * self.p as usize));
            }
        }
        out
    }

    /// For a monic squarefree polynomial: `(k, product of its degree-k factors)`.
    pub fn distinct_degree(&self) -> Vec<(usize, FpPoly)> {
        let mut out = Vec::new();
        let mut f = self.monic();
        let mut h = FpPoly::x(self.p);
        let mut k = 0;
        while f.degree().unwrap_or(0) > 0 {
            k += 1;
            if 2 * k > f.degree().unwrap() {
                out.push((f.degree().unwrap(), f.clone()));
                break;
            }
            h = h.frobenius_mod(&f);
            let g = h.sub(&FpPoly::x(self.p)).gcd(&f);
            if g.degree().unwrap_or(0) > 0 {
                f = f.div_exact(&g);
                h = h.rem(&f);
                out.push((k, g));
            }
        }
        out
    }

    /// Irreducible-factor degrees with multiplicity, as `(degree, multiplicity, count)`:
    /// `count` irreducible factors of that degree occur to that power.
    pub fn factor_degrees(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (g, m) in self.squarefree() {
            for (k, prod) in g.distinct_degree() {
                out.push((k, m, prod.degree().unwrap() / k));
            }
        }
        out.sort();
        out
    }
}
