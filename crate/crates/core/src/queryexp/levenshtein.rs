/// Edit distance with unit-cost insertion, deletion and substitution over
/// Unicode scalar values.
pub fn distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `distance(a, b) <= max`, skipping the table when lengths alone rule it out.
pub fn within(a: &str, b: &str, max: usize) -> bool {
    let (la, lb) = (a.chars().count(), b.chars().count());
    la.abs_diff(lb) <= max && distance(a, b) <= max
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_distances() {
        assert_eq!(distance("", ""), 0);
        assert_eq!(distance("", "abc"), 3);
        assert_eq!(distance("kitten", "sitting"), 3);
        assert_eq!(distance("budget", "busget"), 1);
        assert_eq!(distance("account", "accoint"), 1);
        assert_eq!(distance("meeting", "meeing"), 1);
        assert_eq!(distance("company", "compny"), 1);
        assert_eq!(distance("government", "gouvernement"), 2);
        assert_eq!(distance("requirements", "requeriments"), 2);
        assert_eq!(distance("requirement", "requiriements"), 2);
        assert_eq!(distance("attachment", "attachements"), 2);
        assert_eq!(distance("attachments", "attachements"), 1);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in "[a-e]{0,8}", b in "[a-e]{0,8}") {
            let d = distance(&a, &b);
            prop_assert_eq!(d, distance(&b, &a));
            prop_assert!(d <= a.len().max(b.len()));
            prop_assert!(d >= a.len().abs_diff(b.len()));
            prop_assert_eq!(within(&a, &b, 2), d <= 2);
        }
    }
}
