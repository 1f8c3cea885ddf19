//! Integer arithmetic helpers over Z and Z/n.
//!
//! All moduli are `u64` and all residues are kept in `[0, n)`. The one
//! nontrivial primitive is [`unit_combination`], which underlies every row
//! operation of the Howell reduction: it writes gcd(a, b, n) as x*a + y*b
//! with x a unit mod n, so the operation "scale a row by x and add y times
//! another row" is invertible.

use alloc::vec::Vec;

/// Greatest common divisor of two nonnegative integers, gcd(0, 0) = 0.
pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g = gcd(a, b).
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        return (a, 1, 0);
    }
    let (g, x, y) = egcd(b, a.rem_euclid(b));
    (g, y, x - (a / b) * y)
}

/// Least common multiple, saturating at u64::MAX on overflow.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    let g = gcd(a, b);
    (a / g).saturating_mul(b)
}

/// Reduce an i128 into the canonical residue range [0, n).
pub fn reduce_mod(v: i128, n: u64) -> u64 {
    debug_assert!(n > 0);
    v.rem_euclid(n as i128) as u64
}

/// Modular inverse of a unit mod n. Returns None when gcd(a, n) != 1.
pub fn inverse_mod(a: u64, n: u64) -> Option<u64> {
    let (g, x, _) = egcd((a % n) as i128, n as i128);
    if g != 1 {
        return None;
    }
    Some(reduce_mod(x, n))
}

/// Modular exponentiation a^e mod n.
pub fn pow_mod(a: u64, mut e: u64, n: u64) -> u64 {
    debug_assert!(n > 0);
    let mut base = (a % n) as u128;
    let m = n as u128;
    let mut acc: u128 = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// The canonical associate of a mod n: gcd(a, n), with 0 mapped to 0.
///
/// Every ideal (a) of Z/n has a unique generator dividing n; this is it.
pub fn canonical_associate(a: u64, n: u64) -> u64 {
    if a % n == 0 {
        0
    } else {
        gcd(a % n, n)
    }
}

/// A unit u mod n with u*a = gcd(a, n) mod n.
///
/// Exists for every a: write a = g*a' with g = gcd(a, n); then a' is
/// invertible mod n/g and any lift of its inverse that is a unit mod n works.
/// Found by searching the residue class, which must contain a unit.
pub fn unit_normalizer(a: u64, n: u64) -> u64 {
    let a = a % n;
    if a == 0 {
        return 1;
    }
    let g = gcd(a, n);
    // Solve u * (a/g) = 1 mod n/g, then adjust u by multiples of n/g until
    // it is a unit mod n. The class u + (n/g)Z always contains a unit.
    let ng = n / g;
    let u0 = if ng == 1 {
        1
    } else {
        inverse_mod(a / g, ng).expect("a/g is a unit mod n/g by construction")
    };
    let mut u = u0 % n;
    if u == 0 {
        u = ng % n;
    }
    loop {
        if gcd(u, n) == 1 {
            debug_assert_eq!(u as u128 * a as u128 % n as u128, g as u128 % n as u128);
            return u;
        }
        u = (u + ng) % n;
        debug_assert_ne!(u, u0 % n, "no unit in residue class, impossible");
    }
}

/// Writes g = gcd(a, b, n) as x*a + y*b mod n with x a unit mod n.
///
/// Returns (g, x, y). The existence of a unit x is a CRT argument: for every
/// prime p | n either p divides the step or x is already forced nonzero mod p.
/// Degenerate inputs are allowed; when a = b = 0 the result is (0, 1, 0).
pub fn unit_combination(a: u64, b: u64, n: u64) -> (u64, u64, u64) {
    let a = a % n;
    let b = b % n;
    if b == 0 {
        let u = unit_normalizer(a, n);
        return (canonical_associate(a, n), u, 0);
    }
    if a == 0 {
        // g = gcd(b, n) = 1*0 + y*b with y the normalizer of b; keep x a unit.
        let y = unit_normalizer(b, n);
        return (canonical_associate(b, n), 1, y);
    }
    let g = gcd(gcd(a, b), n);
    // Solve x*(a/g) + y*(b/g) = 1 mod n/g with x a unit mod n.
    let ng = n / g;
    if ng == 1 {
        return (g, 1, 0);
    }
    let ag = (a / g) % ng;
    let bg = (b / g) % ng;
    let d = gcd(bg, ng);
    // x must satisfy x*ag = 1 mod d; gcd(ag, d) = 1 since gcd(ag, bg, ng) = 1.
    let x0 = if d == 1 {
        1
    } else {
        inverse_mod(ag % d, d).expect("ag invertible mod d")
    };
    // Scan x in the class x0 + d*Z for a unit mod n. One exists by CRT.
    let mut x = x0 % n;
    if x == 0 {
        x = d % n;
    }
    let x = loop {
        if gcd(x, n) == 1 {
            break x;
        }
        x = (x + d) % n;
    };
    // y solves y*bg = 1 - x*ag mod ng; the right side is divisible by d.
    let rhs = reduce_mod(1i128 - (x as i128) * (ag as i128), ng);
    debug_assert_eq!(rhs % d, 0);
    let y = if ng / d == 1 {
        0
    } else {
        let inv = inverse_mod((bg / d) % (ng / d), ng / d).expect("bg/d invertible mod ng/d");
        (rhs / d) % (ng / d) * inv % (ng / d)
    };
    let y = y % n;
    debug_assert_eq!(
        reduce_mod(x as i128 * a as i128 + y as i128 * b as i128, n),
        g % n
    );
    (g, x, y)
}

/// Prime factorisation by trial division, as (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_normalizer_hits_canonical_associate() {
        for n in 2u64..=36 {
            for a in 0..n {
                let u = unit_normalizer(a, n);
                assert_eq!(gcd(u, n), 1, "normalizer must be a unit (a={a}, n={n})");
                assert_eq!(
                    u as u128 * a as u128 % n as u128,
                    canonical_associate(a, n) as u128,
                    "u*a must be gcd(a,n) (a={a}, n={n})"
                );
            }
        }
    }

    #[test]
    fn unit_combination_is_unit_scaled_bezout() {
        for n in 2u64..=24 {
            for a in 0..n {
                for b in 0..n {
                    let (g, x, y) = unit_combination(a, b, n);
                    assert_eq!(gcd(x, n), 1, "x must be a unit (a={a}, b={b}, n={n})");
                    let lhs = reduce_mod(x as i128 * a as i128 + y as i128 * b as i128, n);
                    assert_eq!(lhs, g, "x*a+y*b must hit g (a={a}, b={b}, n={n})");
                    if a != 0 || b != 0 {
                        assert_eq!(g, gcd(gcd(a, b), n) % n);
                    }
                }
            }
        }
    }

    #[test]
    fn factorize_small_numbers() {
        assert_eq!(factorize(1), alloc::vec![]);
        assert_eq!(factorize(12), alloc::vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(97), alloc::vec![(97, 1)]);
        assert_eq!(factorize(360), alloc::vec![(2, 3), (3, 2), (5, 1)]);
    }
}
