//! Determinants of small matrices over a prime field, by elimination and by
//! nothing but singularity tests.

use algreach::smalldet::{
    adjugate, det_elimination, det_self_reducible, DetMethod, ModMatrix, SelfReducibleGuard,
};

fn main() -> algreach::Result<()> {
    let p = 65_521;
    let m = ModMatrix::from_rows(&[vec![0, 2, 1], vec![3, -1, 4], vec![1, 5, 9]], p);
    let a = det_elimination(&m)?;
    let b = det_self_reducible(&m, &SelfReducibleGuard::default())?;
    println!("elimination:     {}", a.value());
    println!("self-reducible:  {}", b.value());

    let adj = adjugate(&m, DetMethod::Elimination)?;
    let prod = m.mul(&adj)?;
    println!(
        "M * adj(M) diagonal: {:?}",
        (0..3).map(|i| prod.get(i, i)).collect::<Vec<_>>()
    );

    let singular = ModMatrix::from_rows(&[vec![1, 2], vec![2, 4]], p);
    println!("singular: {}", det_elimination(&singular)?.value());
    Ok(())
}
