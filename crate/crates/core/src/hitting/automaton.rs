//! Multi-pattern streaming matcher over a small symbol alphabet.
//!
//! A failure-link automaton built once per pattern set; the failure
//! transitions are precompiled into a dense goto table, so scanning is one
//! table lookup per symbol plus output enumeration. One pass over the
//! stream replaces one scan per pattern, which is what makes profiling a
//! whole covering (tens of thousands of cylinder words) against multi-
//! million-step orbits affordable.

/// Dense automaton over alphabet {0..alphabet-1}.
pub struct MultiPattern {
    alphabet: usize,
    delta: Vec<u32>,
    outputs: Vec<Vec<u32>>,
    lens: Vec<u32>,
    max_len: usize,
}

impl MultiPattern {
    pub fn new(alphabet: usize, patterns: &[Vec<u8>]) -> MultiPattern {
        assert!(alphabet >= 1);
        assert!(patterns.iter().all(|p| !p.is_empty()), "patterns must be nonempty");
        // Trie.
        let mut children: Vec<Vec<u32>> = vec![vec![u32::MAX; alphabet]];
        let mut outputs: Vec<Vec<u32>> = vec![Vec::new()];
        for (pid, pat) in patterns.iter().enumerate() {
            let mut s = 0usize;
            for &sym in pat {
                let c = sym as usize;
                if children[s][c] == u32::MAX {
                    children.push(vec![u32::MAX; alphabet]);
                    outputs.push(Vec::new());
                    let new_id = (children.len() - 1) as u32;
                    children[s][c] = new_id;
                }
                s = children[s][c] as usize;
            }
            outputs[s].push(pid as u32);
        }
        // BFS failure links, merging outputs, compiling dense transitions.
        let n = children.len();
        let mut fail = vec![0u32; n];
        let mut delta = vec![0u32; n * alphabet];
        let mut queue = std::collections::VecDeque::new();
        for c in 0..alphabet {
            let t = children[0][c];
            if t != u32::MAX {
                fail[t as usize] = 0;
                delta[c] = t;
                queue.push_back(t as usize);
            } else {
                delta[c] = 0;
            }
        }
        while let Some(s) = queue.pop_front() {
            let f = fail[s] as usize;
            let merged: Vec<u32> = outputs[f].clone();
            outputs[s].extend(merged);
            for c in 0..alphabet {
                let t = children[s][c];
                if t != u32::MAX {
                    fail[t as usize] = delta[f * alphabet + c];
                    delta[s * alphabet + c] = t;
                    queue.push_back(t as usize);
                } else {
                    delta[s * alphabet + c] = delta[f * alphabet + c];
                }
            }
        }
        let lens: Vec<u32> = patterns.iter().map(|p| p.len() as u32).collect();
        let max_len = patterns.iter().map(|p| p.len()).max().unwrap_or(0);
        MultiPattern { alphabet, delta, outputs, lens, max_len }
    }

    #[inline]
    pub fn step(&self, state: u32, sym: u8) -> u32 {
        self.delta[state as usize * self.alphabet + sym as usize]
    }

    #[inline]
    pub fn outputs(&self, state: u32) -> &[u32] {
        &self.outputs[state as usize]
    }

    #[inline]
    pub fn len_of(&self, pid: u32) -> usize {
        self.lens[pid as usize] as usize
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }
}
