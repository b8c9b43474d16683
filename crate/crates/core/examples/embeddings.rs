//! Extracts LBP and DCT descriptors, runs the surrogate network to get the
//! fc6n/fc6/fc7n/fc7/fc8 layers, measures sparsity before and after
//! rectification, and round-trips a layer through an EMB1 file.
//!
//! ```text
//! cargo run --example embeddings
//! ```

use std::error::Error;

use crossface::dataset::{synthesize_dataset, DomainShiftParams};
use crossface::embedding::{embed_dct, embed_lbp, load_external, rectify, sparsity, write_emb1, SurrogateNetwork};
use crossface::imaging::normalize_geometry;
use crossface::LayerSelector;

fn main() -> Result<(), Box<dyn Error>> {
    let samples = synthesize_dataset(4, 5, &DomainShiftParams::default())?;
    let faces = samples.iter().map(normalize_geometry).collect::<Result<Vec<_>, _>>()?;

    let lbp: Vec<_> = faces.iter().map(embed_lbp).collect();
    let dct: Vec<_> = faces.iter().map(embed_dct).collect();
    println!("LBP dimension {}, DCT dimension {}", lbp[0].dim(), dct[0].dim());

    let net = SurrogateNetwork::new(lbp[0].dim(), 0);
    for layer in LayerSelector::NETWORK {
        let vectors: Vec<_> = lbp
            .iter()
            .map(|v| {
                let stored = net.embed(v, layer).expect("network layer");
                if layer.rectified() {
                    rectify(&stored)
                } else {
                    stored
                }
            })
            .collect();
        let mean_sparsity = vectors.iter().map(sparsity).sum::<f64>() / vectors.len() as f64;
        println!("{layer:<5} dim {:>4}  sparsity {:.3}", vectors[0].dim(), mean_sparsity);
    }

    let fc7n: Vec<_> = lbp.iter().map(|v| net.embed(v, LayerSelector::Fc7n).unwrap()).collect();
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("fc7n.emb1");
    write_emb1(&path, LayerSelector::Fc7n, &fc7n)?;
    let loaded = load_external(&path, LayerSelector::Fc7)?;
    let first = &fc7n[0];
    let back = &loaded[&first.meta().sample];
    let max_err = first
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "EMB1 round trip: {} records, {} bytes, max |f64 - f32| {:.2e}",
        loaded.len(),
        std::fs::metadata(&path)?.len(),
        max_err
    );
    Ok(())
}
