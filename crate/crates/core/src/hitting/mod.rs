//! Streaming hitting-time measurements.
//!
//! First entrance of an orbit into a ball B(y, r) is decided exactly: the
//! ball is decomposed once into cylinder words (see [`ball`]), the words are
//! compiled into one failure-link automaton, and a single pass over the
//! itinerary finds the earliest match. Rare matches of boundary-straddling
//! words are settled by refining that one position in rational arithmetic,
//! with ties at the (closed) ball boundary counting as hits and a hard
//! precision floor of r/10^6.
//!
//! Cylinder hitting needs no numerics at all: a cylinder with word w is hit
//! at step p iff the itinerary at offset p starts with w.

mod automaton;
mod ball;

pub use automaton::MultiPattern;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::markov::{Covering, MarkovMap};
use crate::orbit::ItineraryStream;
use crate::rat::{self, Rat};
use crate::thermo::GibbsModel;

const SCAN_CHUNK: usize = 1 << 15;

/// First hit times of every member of one covering, at one horizon.
pub struct HitProfile {
    pub scale: u32,
    pub horizon: u64,
    /// Aligned with the covering's members; None = not hit within horizon.
    pub first_hit: Vec<Option<u64>>,
    pub seed: Option<u64>,
}

/// Hitting-exponent samples over a dyadic radius window.
#[derive(Clone, Debug)]
pub struct ExponentEstimate {
    pub window: (u32, u32),
    /// (n, tau at radius 2^-n); None marks right-censoring at the budget.
    pub samples: Vec<(u32, Option<u64>)>,
    /// min over uncensored samples of log2(tau) / n.
    pub estimate: Option<f64>,
    pub censored: bool,
}

/// tau_r(x, y): least n in [1, n_max] with T^n x in the closed ball
/// B(y, r); None when the orbit prefix misses the ball.
pub fn tau_ball(
    map: &MarkovMap,
    stream: &ItineraryStream,
    y: &Rat,
    r: &Rat,
    n_max: u64,
) -> Result<Option<u64>> {
    if r <= &Rat::zero() {
        return Err(Error::Domain("ball radius must be positive".into()));
    }
    if y < &Rat::zero() || y > &Rat::one() {
        return Err(Error::Domain("ball center must lie in [0,1]".into()));
    }
    let blo = clamp01(&(y - r));
    let bhi = clamp01(&(y + r));
    tau_ball_from(map, stream, &blo, &bhi, r, n_max, 1)
}

fn clamp01(x: &Rat) -> Rat {
    if x < &Rat::zero() {
        Rat::zero()
    } else if x > &Rat::one() {
        Rat::one()
    } else {
        x.clone()
    }
}

fn tau_ball_from(
    map: &MarkovMap,
    stream: &ItineraryStream,
    blo: &Rat,
    bhi: &Rat,
    r: &Rat,
    n_max: u64,
    from: u64,
) -> Result<Option<u64>> {
    if from > n_max {
        return Ok(None);
    }
    let pattern_floor = r / rat::int(100);
    let d = ball::decompose(map, blo, bhi, &pattern_floor);
    if d.whole_interval {
        return Ok(Some(from));
    }
    let n_inside = d.inside.len();
    let mut patterns = d.inside;
    patterns.extend(d.straddle);
    if patterns.is_empty() {
        return Ok(None);
    }
    let auto = MultiPattern::new(map.cell_count(), &patterns);
    let max_len = auto.max_len();
    let resolve_floor = r / rat::int(1_000_000);

    let mut best: Option<u64> = None;
    let mut state = 0u32;
    let mut pos = from as usize;
    let scan_end = n_max as usize + max_len;
    let mut chunk = Vec::with_capacity(SCAN_CHUNK);
    'outer: while pos < scan_end {
        let want = SCAN_CHUNK.min(scan_end - pos);
        let got = fill_available(stream, pos, want, &mut chunk)?;
        if got == 0 {
            break;
        }
        for (i, &sym) in chunk.iter().enumerate() {
            let here = pos + i;
            state = auto.step(state, sym);
            for &pid in auto.outputs(state) {
                let start = (here + 1 - auto.len_of(pid)) as u64;
                if start < from || start > n_max {
                    continue;
                }
                if best.map_or(false, |b| start >= b) {
                    continue;
                }
                let hit = if (pid as usize) < n_inside {
                    true
                } else {
                    refine_membership(map, stream, start as usize, blo, bhi, &resolve_floor)?
                };
                if hit {
                    best = Some(start);
                }
            }
            if let Some(b) = best {
                if (here + 1).saturating_sub(max_len) as u64 > b {
                    break 'outer;
                }
            }
        }
        pos += got;
        if got < want {
            break;
        }
    }
    Ok(best)
}

/// Fill up to `want` symbols starting at `start`; a finite explicit stream
/// may supply fewer. Returns how many were produced.
fn fill_available(
    stream: &ItineraryStream,
    start: usize,
    want: usize,
    out: &mut Vec<u8>,
) -> Result<usize> {
    match stream.fill(start, want, out) {
        Ok(()) => Ok(want),
        Err(Error::StreamExhausted(_)) => {
            out.clear();
            for i in start..start + want {
                match stream.symbol(i) {
                    Ok(s) => out.push(s),
                    Err(Error::StreamExhausted(_)) => break,
                    Err(e) => return Err(e),
                }
            }
            Ok(out.len())
        }
        Err(e) => Err(e),
    }
}

/// Decide membership of the orbit point at `start` in the closed ball by
/// refining its cylinder enclosure; errors at the precision floor.
fn refine_membership(
    map: &MarkovMap,
    stream: &ItineraryStream,
    start: usize,
    blo: &Rat,
    bhi: &Rat,
    floor: &Rat,
) -> Result<bool> {
    let mut m = 8usize;
    let mut word = Vec::new();
    loop {
        stream.fill(start, m, &mut word)?;
        let cyl = map
            .cylinder(&word)
            .ok_or_else(|| Error::Structural("stream produced an inadmissible word".into()))?;
        if &cyl.lo >= blo && &cyl.hi <= bhi {
            return Ok(true);
        }
        if &cyl.hi <= blo || &cyl.lo > bhi {
            return Ok(false);
        }
        if cyl.len() < *floor {
            return Err(Error::Precision(format!(
                "orbit point at step {start} within {} of the ball boundary",
                rat::format(floor)
            )));
        }
        m += 8;
    }
}

/// Window-min estimate of the hitting exponent R(x, y) along radii 2^-n.
///
/// The liminf is not observable; the minimum over the finite window is the
/// reported proxy, together with the window itself. Levels are scanned in
/// one pass each, restarting from the previous level's hit (balls are
/// nested, so tau is monotone in n).
pub fn hitting_exponent(
    map: &MarkovMap,
    stream: &ItineraryStream,
    y: &Rat,
    window: (u32, u32),
    n_max: u64,
) -> Result<ExponentEstimate> {
    let (n0, n1) = window;
    if n0 < 1 || n1 < n0 {
        return Err(Error::Domain(format!("bad exponent window [{n0}, {n1}]")));
    }
    let mut samples = Vec::with_capacity((n1 - n0 + 1) as usize);
    let mut from = 1u64;
    let mut censored = false;
    for n in n0..=n1 {
        if censored {
            samples.push((n, None));
            continue;
        }
        let r = rat::pow2(-(n as i32));
        let blo = clamp01(&(y - &r));
        let bhi = clamp01(&(y + &r));
        match tau_ball_from(map, stream, &blo, &bhi, &r, n_max, from)? {
            Some(t) => {
                samples.push((n, Some(t)));
                from = t;
            }
            None => {
                samples.push((n, None));
                censored = true;
            }
        }
    }
    let estimate = samples
        .iter()
        .filter_map(|&(n, t)| t.map(|t| ((t.max(1)) as f64).log2() / n as f64))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    Ok(ExponentEstimate { window, samples, estimate, censored })
}

/// First hit time of every covering member in one streaming pass.
///
/// A member with word w is hit at step p iff symbols p..p+|w| equal w; this
/// is exact, no numeric test is involved. Scanning stops early once every
/// member has been hit.
pub fn tau_cylinder_profile(
    stream: &ItineraryStream,
    covering: &Covering,
    alphabet: usize,
    horizon: u64,
) -> Result<HitProfile> {
    let patterns: Vec<Vec<u8>> = covering.members.iter().map(|c| c.word.clone()).collect();
    let auto = MultiPattern::new(alphabet, &patterns);
    let max_len = auto.max_len();
    let mut first_hit: Vec<Option<u64>> = vec![None; patterns.len()];
    let mut remaining = patterns.len();

    let mut state = 0u32;
    let mut pos = 0usize;
    let scan_end = horizon as usize + max_len;
    let mut chunk = Vec::with_capacity(SCAN_CHUNK);
    'outer: while pos < scan_end && remaining > 0 {
        let want = SCAN_CHUNK.min(scan_end - pos);
        let got = fill_available(stream, pos, want, &mut chunk)?;
        if got == 0 {
            break;
        }
        for (i, &sym) in chunk.iter().enumerate() {
            state = auto.step(state, sym);
            for &pid in auto.outputs(state) {
                let start = (pos + i + 1 - auto.len_of(pid)) as u64;
                if start > horizon {
                    continue;
                }
                let slot = &mut first_hit[pid as usize];
                if slot.is_none() {
                    *slot = Some(start);
                    remaining -= 1;
                    if remaining == 0 {
                        break 'outer;
                    }
                }
            }
        }
        pos += got;
        if got < want {
            break;
        }
    }
    Ok(HitProfile { scale: covering.scale, horizon, first_hit, seed: stream.seed() })
}

/// Self-hitting summary over seeds: for each seed the sampled point itself
/// is the target, located through a refined enclosure of its own stream.
pub struct RecurrenceSummary {
    pub per_seed: Vec<(u64, ExponentEstimate)>,
    pub median: Option<f64>,
    pub expected: f64,
}

pub fn recurrence_exponent(
    model: &GibbsModel,
    expected: f64,
    seeds: &[u64],
    window: (u32, u32),
    n_max: u64,
) -> Result<RecurrenceSummary> {
    let map = model.map();
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let stream = ItineraryStream::sample(model, seed);
        let eps = rat::pow2(-(window.1 as i32 + 8));
        let enc = crate::orbit::reconstruct(map, &stream, 0, &eps)?;
        let y = enc.midpoint();
        let est = hitting_exponent(map, &stream, &y, window, n_max)?;
        per_seed.push((seed, est));
    }
    let median = median_of(per_seed.iter().map(|(_, e)| e.estimate));
    Ok(RecurrenceSummary { per_seed, median, expected })
}

/// Median treating censored estimates as +infinity; None when the median
/// itself is censored.
pub fn median_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut v: Vec<f64> = values.map(|x| x.unwrap_or(f64::INFINITY)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v[v.len() / 2];
    m.is_finite().then_some(m)
}

/// One exact correlation gap |mu(A cap T^-n B) - mu(A) mu(B)|.
#[derive(Clone, Debug)]
pub struct DecayPoint {
    pub n: usize,
    pub gap: f64,
    /// The gap vanishes exactly in the rational chain (product measures).
    pub exactly_zero: bool,
}

/// Exact correlation gaps over a gap schedule with a fitted decay envelope.
#[derive(Clone, Debug)]
pub struct CorrelationDecay {
    pub points: Vec<DecayPoint>,
    pub beta_hat: Option<f64>,
    pub theta_hat: Option<f64>,
    pub mu_a: f64,
    pub mu_b: f64,
}

/// Gaps are computed exactly by summing chain paths; the fitted beta and
/// theta are diagnostics (the envelope gap <= theta * beta^n * (mu(A)+2) *
/// mu(B) holds by construction of theta over the sampled n).
pub fn correlation_decay(
    model: &GibbsModel,
    a: &[u8],
    b: &[u8],
    ns: &[usize],
) -> CorrelationDecay {
    let mu_a_rat = model.cylinder_measure_rat(a);
    let mu_b_rat = model.cylinder_measure_rat(b);
    let prod = &mu_a_rat * &mu_b_rat;
    let mu_a = rat::to_f64(&mu_a_rat);
    let mu_b = rat::to_f64(&mu_b_rat);
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let joint = model.joint_measure_rat(&[(0, a), (n, b)]);
        let gap_rat = &joint - &prod;
        let exactly_zero = gap_rat.is_zero();
        points.push(DecayPoint { n, gap: rat::to_f64(&gap_rat).abs(), exactly_zero });
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.gap > 0.0)
        .map(|p| (p.n as f64, p.gap.ln()))
        .collect();
    let (beta_hat, theta_hat) = if fit.len() >= 2 {
        let slope = least_squares_slope(&fit);
        let beta = slope.exp();
        let theta = points
            .iter()
            .filter(|p| p.gap > 0.0)
            .map(|p| p.gap / (beta.powi(p.n as i32) * (mu_a + 2.0) * mu_b))
            .fold(0.0f64, f64::max);
        (Some(beta), Some(theta))
    } else {
        (None, None)
    };
    CorrelationDecay { points, beta_hat, theta_hat, mu_a, mu_b }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Exact ratio of a multiple intersection against the product of masses,
/// with the two-sided envelope built from gamma and a fitted decay.
#[derive(Clone, Debug)]
pub struct MultiRelation {
    pub ratio: f64,
    pub exactly_one: bool,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

/// Words C_0..C_k from one covering, visited at gaps 2*j*omega*n. The ratio
/// mu(C_0 cap inter_j T^(-2 j omega n) C_j) / prod_j mu(C_j) is exact; the
/// envelope uses M = 3 * gamma * theta_hat and beta_hat when a decay fit is
/// supplied, and the bare quasi-Bernoulli bound otherwise.
pub fn multi_relation_check(
    model: &GibbsModel,
    words: &[Vec<u8>],
    omega: usize,
    n: u32,
    decay: Option<&CorrelationDecay>,
) -> Result<MultiRelation> {
    if words.len() < 2 {
        return Err(Error::Domain("need at least C_0 and C_1".into()));
    }
    let k = words.len() - 1;
    let stride = 2 * omega * n as usize;
    let mut constraints = Vec::with_capacity(words.len());
    for (j, w) in words.iter().enumerate() {
        let off = j * stride;
        if j > 0 && (j - 1) * stride + words[j - 1].len() > off {
            return Err(Error::Domain(format!(
                "gap schedule shorter than word lengths at j = {j}"
            )));
        }
        constraints.push((off, w.as_slice()));
    }
    let joint = model.joint_measure_rat(&constraints);
    let mut prod = Rat::one();
    for w in words {
        let m = model.cylinder_measure_rat(w);
        if m.is_zero() {
            return Err(Error::Domain("word with zero mass in multi-relation".into()));
        }
        prod *= m;
    }
    let ratio_rat = joint / prod;
    let exactly_one = ratio_rat == Rat::one();
    let ratio = rat::to_f64(&ratio_rat);

    let g3 = model.gamma().powi(3);
    let (lower, upper) = match decay.and_then(|d| d.beta_hat.zip(d.theta_hat)) {
        Some((beta, theta)) => {
            let m_const = 3.0 * model.gamma() * theta;
            let damp = m_const * beta.powf((omega * n as usize) as f64);
            let low = (1.0 - damp).max(0.0).powi(k as i32 - 1) / g3;
            let up = g3 * (1.0 + damp).powi(k as i32 - 1);
            (low, up)
        }
        None => (1.0 / g3, g3),
    };
    let within = lower <= ratio && ratio <= upper;
    Ok(MultiRelation { ratio, exactly_one, lower, upper, within })
}

/// Lower and upper bounds on the measure of a closed ball, from its
/// cylinder decomposition (straddle words contribute only to the upper
/// bound).
pub fn ball_measure_bounds(model: &GibbsModel, y: &Rat, r: &Rat) -> (f64, f64) {
    let blo = clamp01(&(y - r));
    let bhi = clamp01(&(y + r));
    let width = &bhi - &blo;
    if width <= Rat::zero() {
        return (0.0, 0.0);
    }
    let floor = &width / rat::int(1 << 16);
    let d = ball::decompose(model.map(), &blo, &bhi, &floor);
    if d.whole_interval {
        return (1.0, 1.0);
    }
    let inside: f64 = d.inside.iter().map(|w| model.cylinder_measure(w)).sum();
    let straddle: f64 = d.straddle.iter().map(|w| model.cylinder_measure(w)).sum();
    (inside, inside + straddle)
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
    fn tau_ball_periodic_examples() {
        let map = doubling_map();
        // x = 1/3, itinerary (01)^inf, orbit {1/3, 2/3}.
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let tau = tau_ball(&map, &s, &rat::ratio(2, 3), &rat::ratio(1, 50), 100).unwrap();
        assert_eq!(tau, Some(1));
        let tau = tau_ball(&map, &s, &rat::ratio(1, 3), &rat::ratio(1, 10), 100).unwrap();
        assert_eq!(tau, Some(2));
    }

    #[test]
    fn tau_ball_censoring() {
        let map = doubling_map();
        let zeros = ItineraryStream::explicit(&map, &[], &[0]).unwrap();
        // Orbit stays at 0; a ball near 1 is never hit.
        let tau = tau_ball(&map, &zeros, &rat::ratio(9, 10), &rat::ratio(1, 100), 1000).unwrap();
        assert_eq!(tau, None);
    }

    #[test]
    fn huge_radius_hits_immediately() {
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let tau = tau_ball(&map, &s, &rat::ratio(1, 2), &rat::int(1), 10).unwrap();
        assert_eq!(tau, Some(1));
    }

    #[test]
    fn exponent_vanishes_on_orbit_target() {
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let est = hitting_exponent(&map, &s, &rat::ratio(2, 3), (4, 12), 1 << 16).unwrap();
        // tau is bounded (<= 2) so log2(tau)/n -> 0.
        assert!(est.estimate.unwrap() <= 2.0 / 4.0);
        let tighter = hitting_exponent(&map, &s, &rat::ratio(2, 3), (4, 20), 1 << 16).unwrap();
        assert!(tighter.estimate.unwrap() <= est.estimate.unwrap() + 1e-12);
    }

    #[test]
    fn profile_periodic_stream() {
        let map = doubling_map();
        let s = ItineraryStream::explicit(&map, &[], &[0, 1]).unwrap();
        let cov = map.scale_covering(2);
        let profile = tau_cylinder_profile(&s, &cov, 2, 100).unwrap();
        for (c, tau) in cov.members.iter().zip(&profile.first_hit) {
            match c.word.as_slice() {
                [0, 1] => assert_eq!(*tau, Some(0)),
                [1, 0] => assert_eq!(*tau, Some(1)),
                _ => assert_eq!(*tau, None),
            }
        }
    }

    #[test]
    fn profile_horizon_zero() {
        let map = doubling_map();
        let model = model_07();
        let s = ItineraryStream::sample(&model, 9);
        let cov = map.scale_covering(4);
        let profile = tau_cylinder_profile(&s, &cov, 2, 0).unwrap();
        let hits: Vec<usize> = profile
            .first_hit
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hits.len(), 1, "only the member containing x is hit at step 0");
        assert_eq!(profile.first_hit[hits[0]], Some(0));
    }

    #[test]
    fn profile_matches_naive_rescan() {
        let model = model_07();
        let map = model.map().clone();
        for seed in [3u64, 17, 90] {
            let s = ItineraryStream::sample(&model, seed);
            let cov = map.scale_covering(6);
            let horizon = 4096;
            let profile = tau_cylinder_profile(&s, &cov, 2, horizon).unwrap();
            let mut text = Vec::new();
            s.fill(0, horizon as usize + cov.max_word_len(), &mut text).unwrap();
            for (c, tau) in cov.members.iter().zip(&profile.first_hit) {
                let naive = (0..=horizon as usize)
                    .find(|&p| text[p..p + c.word.len()] == c.word[..])
                    .map(|p| p as u64);
                assert_eq!(*tau, naive, "member {:?}", c.word);
            }
        }
    }

    #[test]
    fn ball_cylinder_consistency() {
        // If B(y, r) contains a member C entirely then tau_ball <= tau(C)
        // whenever the cylinder hit happens at step >= 1.
        let model = model_07();
        let map = model.map().clone();
        let s = ItineraryStream::sample(&model, 4);
        let cov = map.scale_covering(5);
        let profile = tau_cylinder_profile(&s, &cov, 2, 1 << 14).unwrap();
        for (c, tau_c) in cov.members.iter().zip(&profile.first_hit).take(8) {
            if let Some(tc) = tau_c {
                if *tc == 0 {
                    continue;
                }
                let y = c.midpoint();
                let r = c.len(); // B(mid, len) contains the cylinder
                let tb = tau_ball(&map, &s, &y, &r, 1 << 14).unwrap().unwrap();
                assert!(tb <= *tc, "ball hit {tb} after cylinder hit {tc}");
            }
        }
    }

    #[test]
    fn censoring_monotone_in_budget() {
        let model = model_07();
        let map = model.map().clone();
        let s = ItineraryStream::sample(&model, 11);
        let y = rat::ratio(9, 10);
        let r = rat::ratio(1, 1024);
        let small = tau_ball(&map, &s, &y, &r, 256).unwrap();
        let large = tau_ball(&map, &s, &y, &r, 1 << 16).unwrap();
        match (small, large) {
            (Some(a), Some(b)) => assert_eq!(a, b),
            (None, _) => {}
            (Some(_), None) => panic!("larger budget lost a hit"),
        }
    }

    #[test]
    fn kac_scale_for_ball_hits() {
        // Median hitting time over seeds is within a factor 4 of 1/mu(B).
        let model = model_07();
        let map = model.map().clone();
        let y = rat::ratio(9, 10);
        let r = rat::pow2(-10);
        let (mlo, mhi) = ball_measure_bounds(&model, &y, &r);
        let reference = 2.0 / (mlo + mhi);
        let mut taus = Vec::new();
        for seed in 0..20u64 {
            let s = ItineraryStream::sample(&model, 1000 + seed);
            let tau = tau_ball(&map, &s, &y, &r, 1 << 22).unwrap();
            taus.push(tau.map(|t| t as f64));
        }
        let med = median_of(taus.into_iter()).expect("median hit");
        assert!(
            med >= reference / 4.0 && med <= reference * 4.0,
            "median {med} vs 1/mu(B) = {reference}"
        );
    }

    #[test]
    fn correlation_bernoulli_gaps_vanish() {
        let model = model_07();
        let a = [0u8, 1];
        let b = [1u8, 1, 0];
        let d = correlation_decay(&model, &a, &b, &[2, 3, 5, 8]);
        assert!(d.points.iter().all(|p| p.exactly_zero));
        assert!(d.beta_hat.is_none());
        // n = 0, B = A: gap is exactly mu(A) - mu(A)^2.
        let ma = model.cylinder_measure_rat(&a);
        let joint = model.joint_measure_rat(&[(0, &a), (0, &a)]);
        assert_eq!(&joint - &ma * &ma, &ma - &ma * &ma);
    }

    #[test]
    fn multi_relation_bernoulli_exact_one() {
        let model = model_07();
        let cov = model.map().scale_covering(3);
        let words: Vec<Vec<u8>> =
            cov.members.iter().take(4).map(|c| c.word.clone()).collect();
        let mr = multi_relation_check(&model, &words, 4, 3, None).unwrap();
        assert!(mr.exactly_one, "product measure multi-relation ratio must be exactly 1");
        assert!(mr.within);
        // Schedule too short for the word lengths errors out.
        assert!(multi_relation_check(&model, &words, 0, 3, None).is_err());
    }
}
