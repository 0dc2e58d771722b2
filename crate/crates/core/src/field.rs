//! Arithmetic in the prime field Z_p for word-sized primes below 2^62.

use rand::Rng;

/// Largest supported modulus (exclusive). Keeps `2p` inside a `u64` so the
/// lazy reductions below never overflow.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    p: u64,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses decide
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `p >= max(n^4, 2^31)`.
///
/// Panics if that prime would not fit below [`MAX_MODULUS`], which happens
/// only for `n` above roughly 46000.
pub fn gen_prime(n: usize) -> Field {
    let n4 = (n.max(1) as u128).pow(4);
    let lo = n4.max(1u128 << 31);
    assert!(lo < MAX_MODULUS as u128, "instance size {n} too large for a word-sized prime");
    let mut c = lo as u64;
    while !is_prime(c) {
        c += 1;
    }
    assert!(c < MAX_MODULUS);
    Field { p: c }
}

/// As [`gen_prime`], but for `n^4` beyond `2^61` returns the smallest prime
/// above `2^61` instead of panicking. The per-test failure probability then
/// rises from `1/n^3` to about `n/2^61`.
pub fn gen_prime_capped(n: usize) -> Field {
    let n4 = (n.max(1) as u128).pow(4);
    if n4 < 1u128 << 61 {
        return gen_prime(n);
    }
    let mut c = 1u64 << 61;
    while !is_prime(c) {
        c += 1;
    }
    Field { p: c }
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < MAX_MODULUS && is_prime(p), "{p} is not an odd prime below 2^62");
        Field { p }
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        mulmod(a, b, self.p)
    }

    pub fn pow(self, a: u64, e: u64) -> u64 {
        powmod(a, e, self.p)
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        powmod(a, self.p - 2, self.p)
    }

    pub fn reduce_i64(self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.p)
    }

    #[inline]
    pub fn shoup(self, w: u64) -> Shoup {
        Shoup::new(w, self.p)
    }
}

/// A fixed multiplier with a precomputed quotient estimate, so that repeated
/// products `w * x mod p` need two word multiplications and no division.
#[derive(Clone, Copy, Debug)]
pub struct Shoup {
    w: u64,
    wp: u64,
    p: u64,
}

impl Shoup {
    #[inline]
    pub fn new(w: u64, p: u64) -> Self {
        let wp = (((w as u128) << 64) / p as u128) as u64;
        Shoup { w, wp, p }
    }

    #[inline]
    pub fn mul(&self, x: u64) -> u64 {
        let q = ((self.wp as u128 * x as u128) >> 64) as u64;
        let r = self.w.wrapping_mul(x).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    /// `acc - w * x mod p`, the elimination kernel.
    #[inline]
    pub fn mul_sub_from(&self, acc: u64, x: u64) -> u64 {
        let t = self.mul(x);
        if acc >= t {
            acc - t
        } else {
            acc + self.p - t
        }
    }
}
