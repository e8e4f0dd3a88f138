//! Roundoff-free orbits as symbol streams.
//!
//! A point and all its iterates are represented by one itinerary; shifting
//! the stream is applying the map, and the position of `T^p x` is recovered
//! to any requested precision as the exact rational cylinder of a symbol
//! prefix. Binary-float iteration of an expanding map loses all information
//! in about 53 steps; a symbol stream is exact at any horizon.
//!
//! Streams are either sampled (the stationary chain of a Gibbs model,
//! seeded, append-only and reproducible) or explicit (an eventually
//! periodic word).

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::markov::{Cylinder, MarkovMap};
use crate::rat::{self, Rat};
use crate::thermo::GibbsModel;

struct SampledState {
    rng: ChaCha8Rng,
    buf: Vec<u8>,
    state: usize,
}

struct Sampled {
    init_cum: Vec<f64>,
    /// Per state: (target state, emitted symbol, cumulative probability).
    rows: Vec<Vec<(usize, u8, f64)>>,
    state_words: Vec<Vec<u8>>,
    inner: RefCell<SampledState>,
}

enum Source {
    Sampled(Sampled),
    Explicit { preperiod: Vec<u8>, period: Vec<u8> },
}

/// A seeded symbolic orbit. Symbols are immutable once generated and the
/// whole stream is reproducible from its seed.
pub struct ItineraryStream {
    source: Source,
    seed: Option<u64>,
}

impl ItineraryStream {
    /// Draw the initial depth-K word from the stationary distribution of the
    /// model's chain, then extend one symbol at a time from the transition
    /// rows.
    pub fn sample(model: &GibbsModel, seed: u64) -> ItineraryStream {
        let (pi, rows, state_words) = model.chain_tables();
        let mut acc = 0.0;
        let init_cum: Vec<f64> = pi
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut acc = 0.0;
                row.into_iter()
                    .map(|(t, s, p)| {
                        acc += p;
                        (t, s, acc)
                    })
                    .collect()
            })
            .collect();
        ItineraryStream {
            source: Source::Sampled(Sampled {
                init_cum,
                rows,
                state_words,
                inner: RefCell::new(SampledState {
                    rng: ChaCha8Rng::seed_from_u64(seed),
                    buf: Vec::new(),
                    state: usize::MAX,
                }),
            }),
            seed: Some(seed),
        }
    }

    /// An explicit eventually periodic itinerary `preperiod . period^inf`.
    /// An empty period makes the stream finite.
    pub fn explicit(map: &MarkovMap, preperiod: &[u8], period: &[u8]) -> Result<ItineraryStream> {
        let mut check = preperiod.to_vec();
        check.extend_from_slice(period);
        // One extra period turn checks the wrap pair as well.
        check.extend_from_slice(period);
        if !check.is_empty() && !map.word_admissible(&check) {
            return Err(Error::Domain("explicit itinerary contains an inadmissible pair".into()));
        }
        Ok(ItineraryStream {
            source: Source::Explicit { preperiod: preperiod.to_vec(), period: period.to_vec() },
            seed: None,
        })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_finite(&self) -> bool {
        matches!(&self.source, Source::Explicit { period, .. } if period.is_empty())
    }

    fn ensure(&self, len: usize) {
        if let Source::Sampled(s) = &self.source {
            let mut inner = s.inner.borrow_mut();
            if inner.buf.is_empty() && len > 0 {
                let u: f64 = inner.rng.gen();
                let state = s.init_cum.partition_point(|&c| c <= u).min(s.init_cum.len() - 1);
                let word = s.state_words[state].clone();
                inner.buf.extend_from_slice(&word);
                inner.state = state;
            }
            while inner.buf.len() < len {
                let u: f64 = inner.rng.gen();
                let row = &s.rows[inner.state];
                let e = row.partition_point(|&(_, _, c)| c <= u).min(row.len() - 1);
                let (t, sym, _) = row[e];
                inner.buf.push(sym);
                inner.state = t;
            }
        }
    }

    /// Symbol at absolute index `i`.
    pub fn symbol(&self, i: usize) -> Result<u8> {
        match &self.source {
            Source::Sampled(s) => {
                self.ensure(i + 1);
                Ok(s.inner.borrow().buf[i])
            }
            Source::Explicit { preperiod, period } => {
                if i < preperiod.len() {
                    Ok(preperiod[i])
                } else if period.is_empty() {
                    Err(Error::StreamExhausted(i))
                } else {
                    Ok(period[(i - preperiod.len()) % period.len()])
                }
            }
        }
    }

    /// Copy symbols `range` into `out` (cleared first). Fails only for a
    /// finite explicit stream that ends inside the range.
    pub fn fill(&self, start: usize, len: usize, out: &mut Vec<u8>) -> Result<()> {
        out.clear();
        out.reserve(len);
        match &self.source {
            Source::Sampled(s) => {
                self.ensure(start + len);
                out.extend_from_slice(&s.inner.borrow().buf[start..start + len]);
                Ok(())
            }
            Source::Explicit { .. } => {
                for i in start..start + len {
                    out.push(self.symbol(i)?);
                }
                Ok(())
            }
        }
    }

    /// View shifted by p: symbol j of the view is symbol j + p here.
    pub fn shift(&self, p: usize) -> ItineraryView<'_> {
        ItineraryView { stream: self, offset: p }
    }
}

/// Borrowed shifted view of a stream.
#[derive(Clone, Copy)]
pub struct ItineraryView<'a> {
    pub stream: &'a ItineraryStream,
    pub offset: usize,
}

impl ItineraryView<'_> {
    pub fn symbol(&self, j: usize) -> Result<u8> {
        self.stream.symbol(self.offset + j)
    }
}

/// A rational interval guaranteed to contain a point; the closure of the
/// cylinder of the consumed symbol prefix.
#[derive(Clone, Debug)]
pub struct PointEnclosure {
    pub lo: Rat,
    pub hi: Rat,
    pub cylinder: Cylinder,
}

impl PointEnclosure {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat::int(2)
    }
}

/// Enclose `T^p x` within `epsilon`: the shortest cylinder of the symbols
/// from offset p whose length is at most epsilon. Expansivity shrinks the
/// cylinder by at least the minimal slope per symbol, so the prefix is
/// short.
pub fn reconstruct(
    map: &MarkovMap,
    stream: &ItineraryStream,
    offset: usize,
    epsilon: &Rat,
) -> Result<PointEnclosure> {
    use num_traits::One;
    if epsilon <= &Rat::from_integer(0.into()) {
        return Err(Error::Domain("enclosure width must be positive".into()));
    }
    let mut sprod = Rat::one();
    let mut m = 1usize;
    loop {
        let sym = stream.symbol(offset + m - 1)? as usize;
        let len = map.cell_len(sym) / &sprod;
        if &len <= epsilon {
            break;
        }
        sprod *= map.branch_slope(sym);
        m += 1;
    }
    let mut word = Vec::with_capacity(m);
    for j in 0..m {
        word.push(stream.symbol(offset + j)?);
    }
    let cyl = map
        .cylinder(&word)
        .ok_or_else(|| Error::Structural("stream produced an inadmissible word".into()))?;
    Ok(PointEnclosure { lo: cyl.lo.clone(), hi: cyl.hi.clone(), cylinder: cyl })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::doubling_map;
    use crate::thermo::weight_potential;
    use std::sync::Arc;

    fn model_07() -> GibbsModel {
        let map = Arc::new(doubling_map());
        let pot = weight_potential(&map, &[0.7, 0.3]).unwrap();
        GibbsModel::new(map, pot).unwrap()
    }

    #[test]
    fn explicit_streams() {
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        assert_eq!(
            (0..6).map(|i| s.symbol(i).unwrap()).collect::<Vec<_>>(),
            vec![0, 1, 0, 1, 0, 1]
        );
        let s = ItineraryStream::explicit(&map, &[1], &[0]).unwrap();
        assert_eq!(
            (0..4).map(|i| s.symbol(i).unwrap()).collect::<Vec<_>>(),
            vec![1, 0, 0, 0]
        );
        let finite = ItineraryStream::explicit(&map, &[1, 0], &[]).unwrap();
        assert!(finite.is_finite());
        assert!(finite.symbol(2).is_err());
    }

    #[test]
    fn shift_views() {
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let v = s.shift(1);
        assert_eq!(
            (0..4).map(|j| v.symbol(j).unwrap()).collect::<Vec<_>>(),
            vec![1, 0, 1, 0]
        );
        let id = s.shift(0);
        assert_eq!(id.symbol(0).unwrap(), s.symbol(0).unwrap());
    }

    #[test]
    fn shifted_stream_encloses_image_point() {
        // x = 1/3 has itinerary (01)^inf; the shift encloses 2/3.
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let enc = reconstruct(&map, &s, 1, &rat::ratio(1, 1000)).unwrap();
        let x = rat::ratio(2, 3);
        assert!(enc.lo <= x && x <= enc.hi);
        assert!(enc.width() <= rat::ratio(1, 1000));
    }

    #[test]
    fn reconstruct_edges() {
        let map = doubling_map();
        let zeros = ItineraryStream::explicit(&map, &[], &[0]).unwrap();
        let enc = reconstruct(&map, &zeros, 0, &rat::ratio(1, 100)).unwrap();
        assert_eq!(enc.lo, rat::int(0));
        // epsilon >= 1: one-symbol cylinder.
        let enc = reconstruct(&map, &zeros, 0, &rat::int(2)).unwrap();
        assert_eq!(enc.cylinder.word.len(), 1);
        assert!(reconstruct(&map, &zeros, 0, &rat::int(0)).is_err());
    }

    #[test]
    fn reproducible_from_seed() {
        let model = model_07();
        let a = ItineraryStream::sample(&model, 42);
        let b = ItineraryStream::sample(&model, 42);
        let mut xa = Vec::new();
        let mut xb = Vec::new();
        a.fill(0, 1_000_000, &mut xa).unwrap();
        b.fill(0, 1_000_000, &mut xb).unwrap();
        assert_eq!(xa, xb);
        let c = ItineraryStream::sample(&model, 43);
        let mut xc = Vec::new();
        c.fill(0, 1000, &mut xc).unwrap();
        assert_ne!(&xa[..1000], &xc[..]);
    }

    #[test]
    fn symbol_frequencies_match_stationary() {
        let model = model_07();
        let s = ItineraryStream::sample(&model, 7);
        let n = 1_000_000usize;
        let mut buf = Vec::new();
        s.fill(0, n, &mut buf).unwrap();
        let zeros = buf.iter().filter(|&&b| b == 0).count() as f64 / n as f64;
        let se = (0.7f64 * 0.3 / n as f64).sqrt();
        assert!(
            (zeros - 0.7).abs() <= 3.0 * se,
            "frequency {zeros} outside 3 standard errors of 0.7"
        );
    }

    #[test]
    fn conjugacy_with_exact_iteration() {
        // Exact rational iteration agrees with the symbolic enclosure for
        // p up to 10^4.
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let eps = rat::ratio(1, 1 << 20);
        let mut x = rat::ratio(1, 3);
        for p in 0..10_000usize {
            if p % 251 == 0 {
                let enc = reconstruct(&map, &s, p, &eps).unwrap();
                assert!(enc.lo <= x && x <= enc.hi, "enclosure misses T^{p} x");
            }
            x = map.apply(&x).unwrap();
        }
    }
}
