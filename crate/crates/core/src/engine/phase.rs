//! Fixed-point oscillator phase.
//!
//! Phase is a `u64` fraction of one cycle. The per-sample increment is the
//! exact fractional part of `freq / sr` rounded to 2^-64 cycles, computed in
//! integer arithmetic from the binary representation of `freq`, so long
//! notes do not accumulate the rounding error of a floating point
//! accumulator.

const FRAC_BITS: i32 = 64;

/// Cycles per sample as a 2^-64 fixed-point fraction, wrapped to one cycle.
pub fn increment(freq: f64, sr: u32) -> u64 {
    if !freq.is_finite() || freq == 0.0 {
        return 0;
    }
    let (mantissa, exponent, sign) = num_traits::Float::integer_decode(freq);
    let inc = positive_increment(mantissa, exponent as i32, sr as u128);
    if sign < 0 {
        inc.wrapping_neg()
    } else {
        inc
    }
}

// frac(m * 2^e / sr) * 2^64, rounded to nearest.
fn positive_increment(mantissa: u64, exponent: i32, sr: u128) -> u64 {
    let shift = exponent + FRAC_BITS;
    let modulus = sr << FRAC_BITS;
    // numerator = m * 2^shift, reduced mod sr * 2^64 to keep it in range.
    let (num, den) = if shift >= 0 {
        let mut acc = (mantissa as u128) % modulus;
        for _ in 0..shift {
            acc = (acc << 1) % modulus;
        }
        (acc, sr)
    } else {
        let down = (-shift) as u32;
        // m < 2^53, so past 2^64 the increment rounds to zero.
        if down >= 64 {
            return 0;
        }
        (mantissa as u128, sr << down)
    };
    let q = (num + den / 2) / den;
    q as u64
}

/// Phase as a cycle fraction in `[0, 1)`.
#[inline]
pub fn to_cycles(phase: u64) -> f64 {
    // 2^-64
    phase as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}
