//! Small exact-arithmetic helpers: factorization, powers and divisor
//! enumeration at desk scale.
//!
//! Factorization is trial division with a Pollard-rho fallback for cofactors
//! in 64-bit range. Labels produced by the deformation pipelines are powers
//! of small integers, so trial division does nearly all the work.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Int;

/// Factor `n > 0` into `(prime, exponent)` pairs with primes ascending.
///
/// Panics on `n <= 0`; callers factor absolute values.
pub fn factorize(n: &Int) -> Vec<(Int, u64)> {
    assert!(n.is_positive(), "factorize expects a positive integer");
    let mut out: Vec<(Int, u64)> = Vec::new();
    let mut rest = n.clone();

    let push = |p: Int, e: u64, out: &mut Vec<(Int, u64)>| {
        debug_assert!(e > 0);
        out.push((p, e));
    };

    // Peel small primes first.
    let mut d: u64 = 2;
    while rest > Int::one() {
        if d > (1u64 << 20) {
            break;
        }
        let di = Int::from(d);
        if (&di * &di) > rest {
            break;
        }
        let mut e = 0u64;
        loop {
            let (q, r) = rest.div_rem(&di);
            if r.is_zero() {
                rest = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            push(di, e, &mut out);
        }
        d = if d == 2 { 3 } else { d + 2 };
    }

    if rest > Int::one() {
        if let Some(r64) = rest.to_u64() {
            let mut fs = factorize_u64(r64);
            fs.sort_unstable();
            let mut i = 0;
            while i < fs.len() {
                let p = fs[i];
                let mut e = 0u64;
                while i < fs.len() && fs[i] == p {
                    e += 1;
                    i += 1;
                }
                push(Int::from(p), e, &mut out);
            }
        } else {
            // Out of the supported fast range: fall back to unbounded trial
            // division. Desk-scale inputs never get here with a large prime
            // cofactor.
            let mut di = Int::from(d);
            while rest > Int::one() {
                if (&di * &di) > rest {
                    push(rest.clone(), 1, &mut out);
                    break;
                }
                let mut e = 0u64;
                loop {
                    let (q, r) = rest.div_rem(&di);
                    if r.is_zero() {
                        rest = q;
                        e += 1;
                    } else {
                        break;
                    }
                }
                if e > 0 {
                    push(di.clone(), e, &mut out);
                }
                di += 2;
            }
        }
    }

    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn factorize_u64(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![];
    }
    if is_prime_u64(n) {
        return vec![n];
    }
    let d = pollard_rho(n);
    let mut fs = factorize_u64(d);
    fs.extend(factorize_u64(n / d));
    fs
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho; expects composite `n`.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(!is_prime_u64(n) && n > 3);
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// `base^exp` for a big base and machine exponent.
pub fn pow(base: &Int, exp: u64) -> Int {
    num_traits::pow::pow(base.clone(), exp as usize)
}

/// If `x = base^e` for some `e >= 0`, return `e`. Requires `x > 0`,
/// `base >= 2`.
pub fn exact_log(x: &Int, base: &Int) -> Option<u64> {
    if !x.is_positive() || *base < Int::from(2) {
        return None;
    }
    let mut rest = x.clone();
    let mut e = 0u64;
    while rest > Int::one() {
        let (q, r) = rest.div_rem(base);
        if !r.is_zero() {
            return None;
        }
        rest = q;
        e += 1;
    }
    Some(e)
}

/// All positive divisors of `n > 0`, ascending.
pub fn divisors(n: &Int) -> Vec<Int> {
    let fs = factorize(n);
    let mut out = vec![Int::one()];
    for (p, e) in fs {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        let mut pk = Int::one();
        for _ in 0..=e {
            for d in &out {
                next.push(d * &pk);
            }
            pk *= &p;
        }
        out = next;
    }
    out.sort();
    out
}
