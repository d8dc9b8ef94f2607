//! Regenerates the shipped reference data under `data/`.
//!
//!     cargo run --release -p rckit-core --example reference_data

use std::path::PathBuf;

use rckit::device;
use rckit::model_fit::{build_noise_model, ModelKind, ModelScales};

fn main() -> rckit::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    let cers = device::synthetic_cer(device::CER_SEED)?;
    std::fs::write(dir.join("cer_reference.json"), serde_json::to_string_pretty(&cers)?)?;
    std::fs::write(
        dir.join("readout.json"),
        serde_json::to_string_pretty(&device::READOUT.to_vec())?,
    )?;
    let readout = device::READOUT.to_vec();
    let scaled = ModelScales {
        s0_1q: 0.1,
        s0_2q: 0.1,
        ..ModelScales::COMPLETE
    };
    for (name, kind, scales) in [
        ("model_complete.json", ModelKind::Complete, ModelScales::COMPLETE),
        ("model_scaled.json", ModelKind::Complete, scaled),
        ("model_pauli.json", ModelKind::Pauli, ModelScales::COMPLETE),
    ] {
        let model = build_noise_model(&cers, kind, scales, readout.clone(), device::FIT_SEED)?;
        model.save(dir.join(name))?;
        println!("wrote {name}");
    }
    Ok(())
}
