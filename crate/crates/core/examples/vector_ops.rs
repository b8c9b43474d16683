//! Feature normalization and the four pair-combination operators on small
//! vectors.
//!
//! ```text
//! cargo run --example vector_ops
//! ```

use std::error::Error;

use crossface::vectorops::{combine_values, cross_correlation_direct, dft, idft, normalize_values, CombineMethod, NormMethod};

fn show(name: &str, v: &[f64]) {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:7.3}")).collect();
    println!("{name:<10} [{}]", cells.join(" "));
}

fn main() -> Result<(), Box<dyn Error>> {
    let x = [0.0, 3.0, 0.0, 4.0];
    for m in NormMethod::ALL {
        show(m.label(), &normalize_values(&x, m)?);
    }

    let a = [1.0, 2.0, 3.0, 4.0];
    let b = [0.5, -1.0, 2.0, 0.0];
    println!();
    show("a", &a);
    show("b", &b);
    for m in CombineMethod::ALL {
        show(m.label(), &combine_values(&a, &b, m, false)?);
    }
    show("Phase*", &combine_values(&a, &b, CombineMethod::PhaseCorr, true)?);
    show("Cross ref", &cross_correlation_direct(&a, &b));

    let back: Vec<f64> = idft(&dft(&a)).iter().map(|c| c.re).collect();
    show("IDFT(DFT)", &back);
    Ok(())
}
