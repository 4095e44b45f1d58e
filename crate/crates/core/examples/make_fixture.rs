//! Regenerates the bundled fixture corpus under `fixtures/`.
//!
//! ```text
//! cargo run -p instruct-synth --example make_fixture [-- <out-dir>]
//! ```

use std::path::PathBuf;

use instruct_synth::corpus::save_corpus;
use instruct_synth::fixture::fixture_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let (corpus, manifest) = fixture_corpus();
    save_corpus(&corpus, &out.join("corpus"))?;
    std::fs::write(out.join("components.json"), manifest.to_json())?;
    println!("wrote {} pages to {}", corpus.pages.len(), out.display());
    Ok(())
}
