//! Writes the synthetic demo portrait: `cargo run --example sample_portrait -- out.png [size] [variant]`.

use painter_core::render::sample_portrait;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "sample_portrait.png".into());
    let size = args.next().map(|s| s.parse()).transpose()?.unwrap_or(256);
    let variant = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    sample_portrait(size, variant).save_png(out.as_ref())?;
    Ok(())
}
