//! Checkpoint round trip and a small SVG line chart.

use expass::cli::{decode_checkpoint, encode_checkpoint, line_chart, Series};
use expass::layers::{init_params, Architecture, Dims};

fn main() -> expass::Result<()> {
    let p = init_params(Architecture::Gin, Dims { input: 7, hidden: 8, classes: 2, depth: 2 }, 1)?;
    let bytes = encode_checkpoint(&p, 12);
    let (epoch, back) = decode_checkpoint(&bytes)?;
    println!("{} bytes, epoch {epoch}, identical {}", bytes.len(), back == p);

    let svg = line_chart(
        "GDR by depth",
        "depth",
        "gdr",
        &[Series { name: "vanilla", points: vec![(2.0, 1.4), (4.0, 1.1), (6.0, 0.9)] }],
    );
    println!("svg with {} characters", svg.len());
    Ok(())
}
