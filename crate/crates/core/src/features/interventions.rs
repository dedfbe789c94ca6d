use crate::chat::Role;
use crate::nn::Tensor2;

/// One-hot channel layout of the encoded speaker sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnChannel {
    Par = 0,
    Inv = 1,
    Pad = 2,
}

/// Encodes the first `max_len` turns as one-hot rows; the remainder is padded
/// with the dedicated PAD channel.
pub fn encode_interventions(seq: &[Role], max_len: usize) -> Tensor2 {
    let mut out = Tensor2::zeros(max_len, 3);
    for t in 0..max_len {
        let channel = match seq.get(t) {
            Some(Role::Par) => TurnChannel::Par,
            Some(Role::Inv) => TurnChannel::Inv,
            None => TurnChannel::Pad,
        };
        out.set(t, channel as usize, 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn channels(t: &Tensor2) -> Vec<usize> {
        (0..t.rows())
            .map(|r| t.row(r).iter().position(|&v| v == 1.0).unwrap())
            .collect()
    }

    #[test]
    fn pads_short_sequences() {
        let m = encode_interventions(&[Role::Par, Role::Inv, Role::Par], 32);
        let ch = channels(&m);
        assert_eq!(&ch[..3], &[0, 1, 0]);
        assert!(ch[3..].iter().all(|&c| c == 2));
    }

    #[test]
    fn empty_is_all_pad() {
        assert!(channels(&encode_interventions(&[], 32))
            .iter()
            .all(|&c| c == 2));
    }

    #[test]
    fn truncates_keeping_the_head() {
        let seq: Vec<Role> = (0..40)
            .map(|i| if i % 2 == 0 { Role::Par } else { Role::Inv })
            .collect();
        let ch = channels(&encode_interventions(&seq, 32));
        assert_eq!(ch.len(), 32);
        assert!(ch.iter().enumerate().all(|(i, &c)| c == i % 2));
    }

    proptest! {
        #[test]
        fn rows_are_one_hot_with_pad_suffix(bits in proptest::collection::vec(any::<bool>(), 0..64)) {
            let seq: Vec<Role> = bits.iter().map(|&b| if b { Role::Par } else { Role::Inv }).collect();
            let m = encode_interventions(&seq, 32);
            prop_assert_eq!(m.shape(), (32, 3));
            for r in 0..32 {
                prop_assert!(m.row(r).iter().all(|&v| v == 0.0 || v == 1.0));
                prop_assert_eq!(m.row(r).iter().sum::<f64>(), 1.0);
            }
            let ch = channels(&m);
            let first_pad = ch.iter().position(|&c| c == 2).unwrap_or(32);
            prop_assert!(ch[first_pad..].iter().all(|&c| c == 2));
            prop_assert_eq!(first_pad, seq.len().min(32));
        }
    }
}
