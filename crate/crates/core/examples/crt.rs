//! Signed integers through a residue representation and back.

use algreach::modmath::{crr_decode_signed, crr_encode_signed, gen_primes, Modulus};
use num_bigint::BigInt;

fn main() -> algreach::Result<()> {
    let pool = gen_primes(3, 1 << 61);
    println!("primes: {:?}", pool.primes());

    let x: BigInt = "-123456789012345678901234567890123".parse().unwrap();
    let c = crr_encode_signed(&x, &pool)?;
    for r in c.residues() {
        println!("  {} mod {}", r.value(), r.modulus());
    }
    let back = crr_decode_signed(&c, &pool)?;
    println!("decoded: {back}");
    assert_eq!(back, x);

    let md = Modulus::new(pool.prime(0));
    let inv = md.inv(12345)?;
    println!("12345^-1 * 12345 = {} mod p0", md.mul(inv, 12345));
    Ok(())
}
