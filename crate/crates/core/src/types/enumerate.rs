use super::{Caps, JointType, Seq};
use crate::error::Result;

/// Number of types with denominator `n` over `cells` cells: `C(n + cells - 1, cells - 1)`.
pub fn count_types(n: usize, cells: usize) -> u128 {
    binomial((n + cells - 1) as u128, (cells - 1) as u128)
}

fn binomial(top: u128, k: u128) -> u128 {
    if k > top {
        return 0;
    }
    let k = k.min(top - k);
    let mut r: u128 = 1;
    for i in 1..=k {
        r = r.saturating_mul(top - k + i) / i;
    }
    r
}

/// All joint types with denominator `n` over the product alphabet `arities`.
///
/// Compositions are listed with the first cell descending, then the second, and so on,
/// so `n = 2` over two cells gives `(2,0), (1,1), (0,2)`.
pub fn enumerate_types(n: usize, arities: &[usize], caps: &Caps) -> Result<Vec<JointType>> {
    let cells: usize = arities.iter().product();
    caps.check_universe("types", count_types(n, cells))?;
    let mut out = Vec::new();
    let mut counts = vec![0u32; cells];
    compositions(n as u32, 0, &mut counts, &mut |c| {
        out.push(JointType { n, arities: arities.to_vec(), counts: c.to_vec() });
    });
    Ok(out)
}

pub(crate) fn compositions(remaining: u32, cell: usize, counts: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if cell + 1 == counts.len() {
        counts[cell] = remaining;
        f(counts);
        return;
    }
    for c in (0..=remaining).rev() {
        counts[cell] = c;
        compositions(remaining - c, cell + 1, counts, f);
    }
    counts[cell] = 0;
}

/// `|T_t|`, the multinomial `n! / prod(count!)`; saturates at `u128::MAX`.
pub fn type_class_size(t: &JointType) -> u128 {
    let mut total: u128 = 0;
    let mut result: u128 = 1;
    for &c in &t.counts {
        let c = c as u128;
        result = result.saturating_mul(binomial(total + c, c));
        total += c;
    }
    result
}

/// Every cell sequence of type `t`, in lexicographic order of flat cell indices.
pub fn enumerate_type_class_cells(t: &JointType, caps: &Caps) -> Result<Vec<Seq>> {
    caps.check_class(type_class_size(t))?;
    let arity = t.cells();
    let mut remaining = t.counts.clone();
    let mut current = Vec::with_capacity(t.n);
    let mut out = Vec::new();
    permutations(&mut remaining, &mut current, t.n, &mut |s| {
        out.push(Seq { arity, symbols: s.to_vec() });
    });
    Ok(out)
}

/// Every tuple of sequences with joint type `t`, one `Vec<Seq>` per member.
///
/// Lexicographic in the flattened cell sequence; for a single coordinate this is
/// plain lexicographic order.
pub fn enumerate_type_class(t: &JointType, caps: &Caps) -> Result<Vec<Vec<Seq>>> {
    let cells = enumerate_type_class_cells(t, caps)?;
    cells.into_iter().map(|s| s.split(&t.arities)).collect()
}

fn permutations(remaining: &mut [u32], current: &mut Vec<usize>, n: usize, f: &mut impl FnMut(&[usize])) {
    if current.len() == n {
        f(current);
        return;
    }
    for sym in 0..remaining.len() {
        if remaining[sym] > 0 {
            remaining[sym] -= 1;
            current.push(sym);
            permutations(remaining, current, n, f);
            current.pop();
            remaining[sym] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn type_enumeration_order() {
        let ts = enumerate_types(2, &[2], &Caps::default()).unwrap();
        let counts: Vec<Vec<u32>> = ts.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn type_counts() {
        assert_eq!(enumerate_types(4, &[2, 2], &Caps::default()).unwrap().len(), 35);
        assert_eq!(count_types(4, 4), 35);
        assert_eq!(count_types(10, 3), 66);
    }

    #[test]
    fn class_sizes() {
        let t = JointType::new(vec![2], vec![2, 2]).unwrap();
        assert_eq!(type_class_size(&t), 6);
        let t = JointType::new(vec![3], vec![1, 1, 1]).unwrap();
        assert_eq!(type_class_size(&t), 6);
        let t = JointType::new(vec![2], vec![5, 0]).unwrap();
        assert_eq!(type_class_size(&t), 1);
    }

    #[test]
    fn class_members_in_lex_order() {
        let t = JointType::new(vec![2], vec![2, 2]).unwrap();
        let members: Vec<Vec<usize>> = enumerate_type_class(&t, &Caps::default())
            .unwrap()
            .into_iter()
            .map(|v| v[0].symbols().to_vec())
            .collect();
        assert_eq!(
            members,
            vec![
                vec![0, 0, 1, 1],
                vec![0, 1, 0, 1],
                vec![0, 1, 1, 0],
                vec![1, 0, 0, 1],
                vec![1, 0, 1, 0],
                vec![1, 1, 0, 0],
            ]
        );
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps { universe: 10, class: 3 };
        let t = JointType::new(vec![2], vec![2, 2]).unwrap();
        assert!(matches!(enumerate_type_class(&t, &caps), Err(Error::CapExceeded { .. })));
        assert!(matches!(enumerate_types(4, &[2, 2], &caps), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn huge_class_size_saturates_without_panicking() {
        let t = JointType::new(vec![2], vec![200, 200]).unwrap();
        assert!(type_class_size(&t) > 1u128 << 100);
    }
}
