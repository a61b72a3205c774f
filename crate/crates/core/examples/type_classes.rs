//! Type classes of binary pairs at a small block length, their exact sizes against the
//! polynomial-factor bounds, and a conditional typical set.

use pfcomp::info::shannon_entropy;
use pfcomp::types::{
    cond_typical_set, count_types, enumerate_type_class, enumerate_types, type_class_size, Caps, JointType, Seq,
    TypicalSpec,
};

fn main() -> pfcomp::Result<()> {
    let n = 6;
    let caps = Caps::default();
    let types = enumerate_types(n, &[2, 2], &caps)?;
    println!("n = {n}: {} joint types on 2x2 (closed form {})", types.len(), count_types(n, 4));

    let slack = 4.0 * ((n + 1) as f64).log2();
    println!("{:<14} {:>6} {:>9} {:>9} {:>9}", "counts", "size", "lower", "log2", "upper");
    for t in types.iter().step_by(11) {
        let h = n as f64 * shannon_entropy(&t.to_dist(), &[0, 1])?;
        let size = type_class_size(t);
        println!(
            "{:<14} {:>6} {:>9.3} {:>9.3} {:>9.3}",
            format!("{:?}", t.counts()),
            size,
            h - slack,
            (size as f64).log2(),
            h
        );
    }

    let t = JointType::new(vec![2, 2], vec![2, 1, 1, 2])?;
    let members = enumerate_type_class(&t, &caps)?;
    println!("class of {:?} has {} pairs; first x = {:?}", t.counts(), members.len(), members[0][0].symbols());

    let y = Seq::new(2, vec![0, 0, 1, 1, 0, 1])?;
    let spec = TypicalSpec::new(t.to_dist(), 0.35)?;
    let set = cond_typical_set(&spec, &y, &caps)?;
    println!("x typical with y = {:?} at radius {}: {} sequences", y.symbols(), spec.delta, set.len());
    Ok(())
}
