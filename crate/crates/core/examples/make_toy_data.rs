//! Regenerates the shipped toy dataset: `cargo run -p tagphys --example make_toy_data -- data/toy_t2p.csv`

use std::path::PathBuf;

use tagphys::dataset::{save, DataFormat};
use tagphys::{synth, Vocabulary};

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "data/toy_t2p.csv".into());
    let vocab = Vocabulary::builtin();
    let ds = synth::t2p_like(&vocab, 300, 7, 0.05);
    let format = DataFormat::from_path(&out).unwrap_or(DataFormat::Csv);
    save(&ds, &out, format).expect("write toy dataset");
    println!("wrote {} records to {}", ds.len(), out.display());
}
