//! The example networks: a counter, a streaming histogram and a matrix
//! multiplier, with drivers and reference results.

pub mod counter;
pub mod histogram;
pub mod matmul;

pub use counter::{build_counter, counter_driver, run_counter};
pub use histogram::{build_histogram, run_histogram, HistogramDriver, HistogramRun};
pub use matmul::{build_matmul, run_matmul, MatmulDriver, MatmulRun, MatrixMeta};

/// Name of the host process in every example network.
pub const HOST: &str = "Host";

/// Reference results computed directly, without simulation.
pub mod reference {
    /// Bin totals after accumulating `stream`, wrapping at `width` bits.
    pub fn histogram(bins: u32, width: u8, stream: &[(u64, u64)]) -> Vec<u64> {
        let mask = crate::types::mask(width);
        let mut m = vec![0u64; bins as usize];
        for &(i, v) in stream {
            let b = &mut m[i as usize];
            *b = b.wrapping_add(v) & mask;
        }
        m
    }

    /// Row-major product of `a` (`rows x inner`) and `b` (`inner x cols`).
    pub fn matmul(
        rows: usize,
        inner: usize,
        cols: usize,
        width: u8,
        a: &[u64],
        b: &[u64],
    ) -> Vec<u64> {
        let mask = crate::types::mask(width);
        let mut c = vec![0u64; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let mut s = 0u64;
                for k in 0..inner {
                    s = s.wrapping_add(a[i * inner + k].wrapping_mul(b[k * cols + j]));
                }
                c[i * cols + j] = s & mask;
            }
        }
        c
    }
}
