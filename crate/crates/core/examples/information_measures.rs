//! Entropies, mutual information and divergences of a small joint law, with the
//! continuity bound gamma and Pinsker's inequality.

use pfcomp::info::{
    conditional_entropy, conditional_mutual_information, gamma_bound, kl_divergence, l1_distance,
    mutual_information, shannon_entropy, Dist,
};

fn main() -> pfcomp::Result<()> {
    // X, Y, Z on bits; Z = X xor Y with a small flip.
    let mut w = vec![0.0; 8];
    for (i, p) in [0.4, 0.1, 0.1, 0.4].iter().enumerate() {
        let z = (i >> 1) ^ (i & 1);
        w[i * 2 + z] = p * 0.9;
        w[i * 2 + (1 - z)] = p * 0.1;
    }
    let d = Dist::new(vec![2, 2, 2], w)?;

    let hxyz = shannon_entropy(&d, &[0, 1, 2])?;
    let hz_given = conditional_entropy(&d, &[2], &[0, 1])?;
    println!("H(X,Y,Z) = {hxyz:.4}, H(Z|X,Y) = {hz_given:.4}");
    println!("I(X;Y) = {:.4}", mutual_information(&d, &[0], &[1])?);
    println!("I(X;Z|Y) = {:.4}", conditional_mutual_information(&d, &[0], &[2], &[1])?);

    let p = d.marginal(&[0, 1])?;
    let q = Dist::uniform(vec![2, 2])?;
    let kl = kl_divergence(&p, &q)?;
    let l1 = l1_distance(&p, &q)?;
    println!("D(p||u) = {kl:.4}, l1 = {l1:.4}, Pinsker l1^2 / (2 ln 2) = {:.4}", l1 * l1 / (2.0 * std::f64::consts::LN_2));

    let hp = shannon_entropy(&p, &[0, 1])?;
    let hq = shannon_entropy(&q, &[0, 1])?;
    println!("|H(p) - H(u)| = {:.4} <= gamma(4, l1) = {:.4}", (hp - hq).abs(), gamma_bound(4, l1)?);
    Ok(())
}
