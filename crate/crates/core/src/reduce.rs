use rayon::prelude::*;

const CHUNK: usize = 8192;

/// Sum of `f(i)` over `0..len` in fixed-size chunks.
///
/// Chunks may run on any thread, but partial sums are combined in chunk order,
/// so the result does not depend on the thread count.
pub(crate) fn chunked_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    chunked_sums(len, |i| [f(i)])[0]
}

/// Component-wise version of [`chunked_sum`].
pub(crate) fn chunked_sums<const N: usize, F>(len: usize, f: F) -> [f64; N]
where
    F: Fn(usize) -> [f64; N] + Sync,
{
    let chunk_sum = |start: usize, end: usize| {
        let mut acc = [0.0; N];
        for i in start..end {
            for (a, v) in acc.iter_mut().zip(f(i)) {
                *a += v;
            }
        }
        acc
    };
    if len <= CHUNK {
        return chunk_sum(0, len);
    }
    let partials: Vec<[f64; N]> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| chunk_sum(c * CHUNK, ((c + 1) * CHUNK).min(len)))
        .collect();
    let mut total = [0.0; N];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
