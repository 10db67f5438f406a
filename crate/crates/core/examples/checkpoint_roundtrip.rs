//! Save a model, load it back, and check that the payload and embeddings
//! are unchanged.

use fsts::siamese::{encode_checkpoint, load_checkpoint, save_checkpoint, EmbeddingConfig, SiameseNetwork};

fn main() -> fsts::Result<()> {
    let model = SiameseNetwork::<f32>::new(EmbeddingConfig::default(), 1)?;
    let dir = std::env::temp_dir().join("fsts-checkpoint-example");
    save_checkpoint(&model, &dir)?;
    let loaded = load_checkpoint(&dir)?;

    let (manifest, payload) = encode_checkpoint(&loaded);
    assert_eq!(payload, encode_checkpoint(&model).1);
    for t in &manifest.tensors {
        println!("{:<22} {:?}", t.name, t.shape);
    }
    let x: Vec<f32> = (0..187).map(|i| (i as f32 / 20.0).sin().abs()).collect();
    assert_eq!(model.embed(&x)?, loaded.embed(&x)?);
    println!("{} tensors, {} payload bytes, embeddings identical", manifest.tensors.len(), payload.len());
    Ok(())
}
