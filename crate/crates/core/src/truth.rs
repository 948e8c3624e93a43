//! Truth tables of up to six variables packed into a `u64`.
//!
//! Bit `m` holds the function value for the minterm whose variable `i`
//! equals bit `i` of `m`.

pub type TruthTable = u64;

pub const MAX_VARS: usize = 6;

const VAR_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Mask covering the `2^n` valid bits of an `n`-variable table.
#[inline]
pub fn mask(n: usize) -> TruthTable {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

/// Projection onto variable `i` of an `n`-variable table.
#[inline]
pub fn var(i: usize, n: usize) -> TruthTable {
    VAR_MASKS[i] & mask(n)
}

#[inline]
pub fn not(t: TruthTable, n: usize) -> TruthTable {
    !t & mask(n)
}

#[inline]
pub fn eval(t: TruthTable, minterm: usize) -> bool {
    (t >> minterm) & 1 == 1
}

/// Re-express `t`, a function over the sorted leaf list `from`, as a function
/// over the sorted superset `to`.
pub fn expand(t: TruthTable, from: &[u32], to: &[u32]) -> TruthTable {
    if from == to {
        return t;
    }
    let mut pos = [0usize; MAX_VARS];
    let mut j = 0;
    for (i, leaf) in from.iter().enumerate() {
        while to[j] != *leaf {
            j += 1;
        }
        pos[i] = j;
    }
    let mut out = 0u64;
    for m in 0..(1usize << to.len()) {
        let mut src = 0usize;
        for (i, p) in pos.iter().enumerate().take(from.len()) {
            src |= ((m >> p) & 1) << i;
        }
        out |= ((t >> src) & 1) << m;
    }
    out
}

/// Apply an input transformation: the result `r` satisfies
/// `r(x) = t(y)` where `y_pin = x_{perm[pin]} ^ neg_{perm[pin]}`.
pub fn permute(t: TruthTable, n: usize, perm: &[usize], neg: u32) -> TruthTable {
    let mut out = 0u64;
    for m in 0..(1usize << n) {
        let x = m ^ neg as usize;
        let mut y = 0usize;
        for (pin, leaf) in perm.iter().enumerate().take(n) {
            y |= ((x >> leaf) & 1) << pin;
        }
        out |= ((t >> y) & 1) << m;
    }
    out
}

/// True when the function depends on variable `i`.
pub fn depends_on(t: TruthTable, i: usize, n: usize) -> bool {
    let v = var(i, n);
    let shift = 1u32 << i;
    ((t & v) >> shift) != (t & !v & mask(n))
}

/// Format as a binary string, most significant minterm first.
pub fn to_bits(t: TruthTable, n: usize) -> String {
    (0..(1usize << n))
        .rev()
        .map(|m| if eval(t, m) { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        assert_eq!(var(0, 1), 0b10);
        assert_eq!(var(0, 2) & var(1, 2), 0b1000);
        assert_eq!(mask(2), 0b1111);
        assert_eq!(mask(6), u64::MAX);
    }

    #[test]
    fn expand_inserts_dont_care_leaf() {
        // a AND b over (a, b) re-expressed over (a, x, b)
        let t = expand(0b1000, &[1, 5], &[1, 3, 5]);
        assert_eq!(t, var(0, 3) & var(2, 3));
    }

    #[test]
    fn permute_swaps_and_negates() {
        // y = a & !b; swapping pins gives !a & b
        let t = var(0, 2) & !var(1, 2) & mask(2);
        assert_eq!(permute(t, 2, &[1, 0], 0), var(1, 2) & !var(0, 2) & mask(2));
        // negating leaf 1 turns a & !b into a & b
        assert_eq!(permute(t, 2, &[0, 1], 0b10), 0b1000);
    }

    #[test]
    fn dependence() {
        let t = var(0, 3) & var(2, 3);
        assert!(depends_on(t, 0, 3));
        assert!(!depends_on(t, 1, 3));
        assert!(depends_on(t, 2, 3));
        assert_eq!(to_bits(0b01, 1), "01");
    }
}
