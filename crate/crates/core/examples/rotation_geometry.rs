// Minimal rotations between embedding vectors, their composition along a
// chain, and the signature of the resulting quadratic form.

use linloop::geometry::{
    compose_chain, cosine_distance, minimal_rotation, quadratic_form, representing_matrix,
    signature_with_default_tolerance, EmbeddingVector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0])?;
    let y = EmbeddingVector::new(vec![0.6, 0.8, 0.0, 0.0])?;
    let r = minimal_rotation(&x, &y)?;
    println!("R x = {:?}", r.apply(x.as_slice()));
    println!(
        "orthogonality defect {:.1e}, det {:.12}",
        r.orthogonality_defect(),
        r.determinant()
    );

    let chain = vec![
        x.clone(),
        y,
        EmbeddingVector::new(vec![0.0, 0.6, 0.8, 0.0])?,
        EmbeddingVector::new(vec![0.0, 0.0, 0.6, 0.8])?,
    ];
    let composed = compose_chain(&chain)?;
    let m = representing_matrix(&composed);
    let v0 = chain[0].normalized()?;
    let q = quadratic_form(&v0, &m)?;
    let delta = cosine_distance(&chain[0], chain.last().unwrap())?;
    println!("deficit {delta:.15}, quadratic form {q:.15}");

    let sig = signature_with_default_tolerance(&m)?;
    println!("signature (n+, n0, n-) = {:?}", sig.inertia());
    Ok(())
}
