//! Decomposition of a closed ball into cylinder words.
//!
//! The closed interval [blo, bhi] is covered by maximal cylinders that fit
//! inside it, plus at most two short chains of "straddle" cylinders around
//! the endpoints, refined down to a width floor. Membership of an orbit
//! point in the ball then reduces to prefix matching of its itinerary:
//! a match of an inside word is a certain hit, a match of a straddle word
//! is decided by refining that single position further.

use crate::markov::MarkovMap;
use crate::rat::Rat;

pub(crate) struct BallDecomposition {
    pub inside: Vec<Vec<u8>>,
    pub straddle: Vec<Vec<u8>>,
    /// True when the ball covers all of [0, 1): every position hits.
    pub whole_interval: bool,
}

/// Half-open cylinder [lo, hi) against closed ball [blo, bhi]:
/// inside when lo >= blo and hi <= bhi; disjoint when hi <= blo or lo > bhi.
pub(crate) fn decompose(map: &MarkovMap, blo: &Rat, bhi: &Rat, floor: &Rat) -> BallDecomposition {
    use num_traits::{One, Zero};
    if blo <= &Rat::zero() && bhi >= &Rat::one() {
        return BallDecomposition { inside: Vec::new(), straddle: Vec::new(), whole_interval: true };
    }
    let mut inside = Vec::new();
    let mut straddle = Vec::new();
    let mut stack = map.root_nodes();
    while let Some(node) = stack.pop() {
        if &node.hi <= blo || &node.lo > bhi {
            continue;
        }
        if &node.lo >= blo && &node.hi <= bhi {
            inside.push(node.word);
        } else if node.len() <= *floor {
            straddle.push(node.word);
        } else {
            stack.extend(map.node_children(&node));
        }
    }
    BallDecomposition { inside, straddle, whole_interval: false }
}
