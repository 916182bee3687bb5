use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Running minimum from the front: `out[k] = min(out[k-1], s[k])`.
pub fn prefix_min_seq<T: Scalar>(s: &[T]) -> Result<Vec<T>> {
    let (&first, rest) = s.split_first().ok_or(Error::EmptySequence)?;
    let mut out = Vec::with_capacity(s.len());
    out.push(first);
    let mut cur = first;
    for &x in rest {
        cur = cur.min(x);
        out.push(cur);
    }
    Ok(out)
}

/// Running maximum from the back: `out[k] = max(s[k], out[k+1])`.
pub fn postfix_max_seq<T: Scalar>(s: &[T]) -> Result<Vec<T>> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut out = s.to_vec();
    for k in (0..s.len() - 1).rev() {
        out[k] = out[k].max(out[k + 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_sequence() {
        let s = [9.0, 6.0, 8.0, 4.0, 5.0, 7.0];
        assert_eq!(prefix_min_seq(&s).unwrap(), vec![9.0, 6.0, 6.0, 4.0, 4.0, 4.0]);
        assert_eq!(postfix_max_seq(&s).unwrap(), vec![9.0, 8.0, 8.0, 7.0, 7.0, 7.0]);
    }

    #[test]
    fn single_and_empty() {
        assert_eq!(prefix_min_seq(&[5.0]).unwrap(), vec![5.0]);
        assert_eq!(postfix_max_seq(&[5.0]).unwrap(), vec![5.0]);
        assert_eq!(prefix_min_seq::<f64>(&[]), Err(Error::EmptySequence));
        assert_eq!(postfix_max_seq::<f64>(&[]), Err(Error::EmptySequence));
    }

    #[test]
    fn monotone_inputs() {
        let asc = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(prefix_min_seq(&asc).unwrap(), vec![1.0; 4]);
        let desc = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(postfix_max_seq(&desc).unwrap(), desc.to_vec());
    }

    proptest! {
        #[test]
        fn idempotent_and_monotone(s in prop::collection::vec(-1e6f64..1e6, 1..64)) {
            let p = prefix_min_seq(&s).unwrap();
            let q = postfix_max_seq(&s).unwrap();
            prop_assert_eq!(prefix_min_seq(&p).unwrap(), p.clone());
            prop_assert_eq!(postfix_max_seq(&q).unwrap(), q.clone());
            prop_assert_eq!(p[0], s[0]);
            prop_assert_eq!(q[s.len() - 1], s[s.len() - 1]);
            for k in 1..s.len() {
                prop_assert!(p[k] <= p[k - 1]);
                prop_assert!(q[k] <= q[k - 1]);
                prop_assert!(p[k] <= s[k] && q[k] >= s[k]);
            }
        }
    }
}
