use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(mut buf: Vec<Complex64>, inverse: bool) -> Vec<Complex64> {
    if buf.is_empty() {
        return buf;
    }
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(&mut buf);
    buf
}

/// Unnormalized forward DFT, `X_k = Σ_n x_n e^{−2πi kn/N}`.
pub fn dft(v: &[f64]) -> Vec<Complex64> {
    transform(v.iter().map(|&x| Complex64::new(x, 0.0)).collect(), false)
}

/// Inverse DFT with the `1/N` factor, `x_n = (1/N) Σ_k X_k e^{2πi kn/N}`.
pub fn idft(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() as f64;
    let mut out = transform(c.to_vec(), true);
    out.iter_mut().for_each(|z| *z /= n);
    out
}

fn direct(c: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = c.len();
    (0..n)
        .map(|k| {
            c.iter()
                .enumerate()
                .map(|(j, &x)| x * Complex64::from_polar(1.0, sign * 2.0 * PI * ((k * j) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// O(N²) direct-sum forward DFT.
pub fn dft_direct(v: &[f64]) -> Vec<Complex64> {
    direct(&v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(), -1.0)
}

/// O(N²) direct-sum inverse DFT.
pub fn idft_direct(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() as f64;
    direct(c, 1.0).into_iter().map(|z| z / n).collect()
}
