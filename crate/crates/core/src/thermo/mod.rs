//! Thermodynamic formalism for depth-K locally constant potentials on a
//! Markov map: pressure, Gibbs cylinder measures, the exponent functions
//! eta(q) and alpha(q), the multifractal spectrum D = eta + q*alpha, and
//! the cycle-ratio extremes of local dimension.
//!
//! A potential of depth K assigns a real value to every admissible K-word.
//! On the graph whose vertices are the admissible K-words and whose edges
//! are one-symbol shifts, the weighted transition matrix
//! `M[w][w'] = exp(phi(w))` has a Perron eigenvalue `lambda = exp(P(phi))`.
//! For a normalized potential (P = 0) the stationary Markov chain obtained
//! by the eigenvector conjugation of M realizes the Gibbs measure exactly:
//! cylinder masses are finite products, and every identity the tests assert
//! (total mass, shift invariance, quasi-Bernoulli bounds, correlation gaps)
//! reduces to finite linear algebra over those products.
//!
//! Birkhoff sums over a finite word of length n use the n-K+1 sliding
//! windows the word actually contains; the Gibbs ratio is therefore
//! `mu(I_w) / exp(S)` = `pi(W_1) h(W_last) exp(-phi(W_last)) / h(W_1)`,
//! whose range over states gives a concrete two-sided constant gamma.

mod cycles;
mod perron;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::markov::MarkovMap;
use crate::rat::{self, Rat};

/// A depth-K locally constant potential: one value per admissible K-word,
/// in natural-log units.
#[derive(Clone, Debug)]
pub struct Potential {
    depth: usize,
    values: BTreeMap<Vec<u8>, f64>,
}

impl Potential {
    pub fn new(depth: usize, values: BTreeMap<Vec<u8>, f64>) -> Result<Potential> {
        if depth == 0 {
            return Err(Error::Domain("potential depth must be >= 1".into()));
        }
        for (w, v) in &values {
            if w.len() != depth {
                return Err(Error::Domain(format!(
                    "potential word {:?} has length {}, expected depth {}",
                    w,
                    w.len(),
                    depth
                )));
            }
            if !v.is_finite() {
                return Err(Error::Domain(format!("potential value for {w:?} is not finite")));
            }
        }
        Ok(Potential { depth, values })
    }

    /// Constant depth-1 potential on a map's alphabet.
    pub fn constant(map: &MarkovMap, value: f64) -> Potential {
        let values = (0..map.cell_count() as u8).map(|s| (vec![s], value)).collect();
        Potential { depth: 1, values }
    }

    /// The geometric potential -log|T'|, depth 1.
    pub fn log_derivative(map: &MarkovMap) -> Potential {
        let values = (0..map.cell_count())
            .map(|k| (vec![k as u8], -rat::to_f64(map.branch_slope(k)).ln()))
            .collect();
        Potential { depth: 1, values }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.values
    }

    pub fn value(&self, window: &[u8]) -> Result<f64> {
        self.values
            .get(window)
            .copied()
            .ok_or_else(|| Error::Domain(format!("word {window:?} not in potential table")))
    }

    /// Check the table covers exactly the admissible K-words of the map.
    pub fn check_against(&self, map: &MarkovMap) -> Result<()> {
        let words = crate::markov::admissible_words(map, self.depth);
        for w in &words {
            if !self.values.contains_key(w) {
                return Err(Error::Structural(format!(
                    "potential table missing admissible word {}",
                    crate::markov::word_string(w)
                )));
            }
        }
        if words.len() != self.values.len() {
            for w in self.values.keys() {
                if !map.word_admissible(w) {
                    return Err(Error::Structural(format!(
                        "potential table contains inadmissible word {}",
                        crate::markov::word_string(w)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sliding-window Birkhoff sum over a word of length >= depth.
    pub fn birkhoff_sum(&self, word: &[u8]) -> Result<f64> {
        if word.len() < self.depth {
            return Err(Error::Domain(format!(
                "word of length {} is shorter than potential depth {}",
                word.len(),
                self.depth
            )));
        }
        let mut s = 0.0;
        for win in word.windows(self.depth) {
            s += self.value(win)?;
        }
        Ok(s)
    }

    fn shifted(&self, delta: f64) -> Potential {
        let values = self.values.iter().map(|(w, v)| (w.clone(), v - delta)).collect();
        Potential { depth: self.depth, values }
    }
}

/// States are the admissible K-words, sorted; edges are one-symbol shifts.
#[derive(Clone, Debug)]
pub(crate) struct WordGraph {
    pub states: Vec<Vec<u8>>,
    pub edges: Vec<Vec<(usize, u8)>>,
    /// log |T'| on the first symbol of each state.
    pub log_slope: Vec<f64>,
}

impl WordGraph {
    pub fn build(map: &MarkovMap, depth: usize) -> Result<WordGraph> {
        let states = crate::markov::admissible_words(map, depth);
        if states.is_empty() {
            return Err(Error::Structural("no admissible words at this depth".into()));
        }
        let index: BTreeMap<&[u8], usize> =
            states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
        let mut edges = vec![Vec::new(); states.len()];
        let mut key = Vec::with_capacity(depth);
        for (i, w) in states.iter().enumerate() {
            let last = w[depth - 1] as usize;
            for j in map.successors(last) {
                key.clear();
                key.extend_from_slice(&w[1..]);
                key.push(j as u8);
                if let Some(&t) = index.get(key.as_slice()) {
                    edges[i].push((t, j as u8));
                }
            }
        }
        let log_slope = states
            .iter()
            .map(|w| rat::to_f64(map.branch_slope(w[0] as usize)).ln())
            .collect();
        Ok(WordGraph { states, edges, log_slope })
    }

    fn plain_edges(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|es| es.iter().map(|&(t, _)| t).collect()).collect()
    }
}

/// Exact stationary vector of an exactly row-stochastic rational chain:
/// Gaussian elimination on the balance equations plus normalization.
fn stationary_rat(trans: &[Vec<Rat>], edges: &[Vec<(usize, u8)>]) -> Result<Vec<Rat>> {
    let n = trans.len();
    if n == 1 {
        return Ok(vec![Rat::one()]);
    }
    // A = P^T - I, with the last balance equation replaced by sum(pi) = 1.
    let mut a = vec![vec![Rat::zero(); n]; n];
    for (u, es) in edges.iter().enumerate() {
        for (e, &(v, _)) in es.iter().enumerate() {
            a[v][u] += &trans[u][e];
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= Rat::one();
    }
    for x in a[n - 1].iter_mut() {
        *x = Rat::one();
    }
    let mut b = vec![Rat::zero(); n];
    b[n - 1] = Rat::one();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Numerical("singular balance system".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &f * &b[col];
            b[r] -= sub;
        }
    }
    let pi: Vec<Rat> = (0..n).map(|i| &b[i] / &a[i][i]).collect();
    if pi.iter().any(|x| x <= &Rat::zero()) {
        return Err(Error::Numerical("stationary vector not positive".into()));
    }
    Ok(pi)
}

fn pressure_of_weights(graph: &WordGraph, weights: &[f64]) -> Result<f64> {
    let data = perron::source_weighted(&graph.plain_edges(), weights)?;
    Ok(data.lambda.ln())
}

fn state_weights(graph: &WordGraph, potential: &Potential) -> Result<Vec<f64>> {
    graph.states.iter().map(|w| potential.value(w).map(f64::exp)).collect()
}

/// Topological pressure: log of the Perron eigenvalue of the weighted
/// K-word transition matrix.
pub fn pressure(map: &MarkovMap, potential: &Potential) -> Result<f64> {
    potential.check_against(map)?;
    let graph = WordGraph::build(map, potential.depth())?;
    pressure_of_weights(&graph, &state_weights(&graph, potential)?)
}

/// Subtract P(phi) from every table entry so the pressure becomes 0.
pub fn normalize(map: &MarkovMap, potential: &Potential) -> Result<Potential> {
    let p = pressure(map, potential)?;
    Ok(potential.shifted(p))
}

/// A normalized Gibbs model: the map, the potential, and the stationary
/// Markov chain realizing the Gibbs measure.
///
/// The chain is exact. Transition rows are built in rational arithmetic
/// from one exact power step of the rational weight matrix (rows become
/// `h(v) / sum h` over successors, so identical successor structure gives
/// identical rows, bit for bit), and the stationary vector is the exact
/// rational solution of the balance equations. Stochasticity, shift
/// invariance and total mass are then equalities, not approximations; the
/// f64 tables are rounded views of the rational chain.
pub struct GibbsModel {
    map: Arc<MarkovMap>,
    potential: Potential,
    raw_pressure: f64,
    graph: WordGraph,
    /// Stationary distribution over states.
    pi: Vec<f64>,
    /// Row-stochastic transitions aligned with graph.edges.
    trans: Vec<Vec<f64>>,
    pi_rat: Vec<Rat>,
    trans_rat: Vec<Vec<Rat>>,
    gamma: f64,
}

impl GibbsModel {
    /// Build the model; the potential is normalized first when needed.
    pub fn new(map: Arc<MarkovMap>, potential: Potential) -> Result<GibbsModel> {
        potential.check_against(&map)?;
        let graph = WordGraph::build(&map, potential.depth())?;
        let raw_weights = state_weights(&graph, &potential)?;
        let raw_pressure = pressure_of_weights(&graph, &raw_weights)?;
        let potential = potential.shifted(raw_pressure);
        let weights = state_weights(&graph, &potential)?;
        let data = perron::source_weighted(&graph.plain_edges(), &weights)?;

        // One exact power step of the rational weight matrix turns the f64
        // eigenvector into the conjugation vector: h = M_rat * rat(h_f64).
        let w_rat: Vec<Rat> = weights.iter().map(|&x| rat::from_f64(x)).collect();
        let h_seed: Vec<Rat> = data.right.iter().map(|&x| rat::from_f64(x)).collect();
        let h_rat: Vec<Rat> = graph
            .edges
            .iter()
            .enumerate()
            .map(|(u, es)| {
                let s = es.iter().fold(Rat::zero(), |acc, &(v, _)| acc + &h_seed[v]);
                &w_rat[u] * s
            })
            .collect();

        // P[u][v] = M[u][v] h[v] / rowsum; the source weight cancels, so the
        // row depends only on the successor set.
        let trans_rat: Vec<Vec<Rat>> = graph
            .edges
            .iter()
            .map(|es| {
                let total = es.iter().fold(Rat::zero(), |acc, &(v, _)| acc + &h_rat[v]);
                es.iter().map(|&(v, _)| &h_rat[v] / &total).collect()
            })
            .collect();
        let pi_rat = stationary_rat(&trans_rat, &graph.edges)?;

        let pi: Vec<f64> = pi_rat.iter().map(rat::to_f64).collect();
        let trans: Vec<Vec<f64>> =
            trans_rat.iter().map(|row| row.iter().map(rat::to_f64).collect()).collect();

        // Two-sided Gibbs constant from the explicit ratio
        // mu / e^S = pi(W1) h(Wlast) e^(-phi(Wlast)) / h(W1).
        let h: Vec<f64> = h_rat.iter().map(rat::to_f64).collect();
        let mut r_min = f64::INFINITY;
        let mut r_max = 0.0f64;
        for (u, &pu) in pi.iter().enumerate() {
            for (v, &hv) in h.iter().enumerate() {
                let r = pu * hv * (-potential.value(&graph.states[v]).unwrap()).exp() / h[u];
                r_min = r_min.min(r);
                r_max = r_max.max(r);
            }
        }
        let gamma = 2.0 * r_max.max(1.0 / r_min).max(1.0);

        Ok(GibbsModel {
            map,
            potential,
            raw_pressure,
            graph,
            pi,
            trans,
            pi_rat,
            trans_rat,
            gamma,
        })
    }

    pub fn map(&self) -> &Arc<MarkovMap> {
        &self.map
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn depth(&self) -> usize {
        self.potential.depth()
    }

    /// Pressure of the potential as given, before normalization.
    pub fn raw_pressure(&self) -> f64 {
        self.raw_pressure
    }

    /// Concrete two-sided Gibbs constant.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn state_count(&self) -> usize {
        self.graph.states.len()
    }

    pub fn state_words(&self) -> &[Vec<u8>] {
        &self.graph.states
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// Sampling tables for itinerary streams: stationary distribution,
    /// transition rows, per-edge emitted symbol, state words.
    pub fn chain_tables(&self) -> (Vec<f64>, Vec<Vec<(usize, u8, f64)>>, Vec<Vec<u8>>) {
        let rows = self
            .graph
            .edges
            .iter()
            .zip(&self.trans)
            .map(|(es, ps)| {
                es.iter().zip(ps).map(|(&(t, sym), &p)| (t, sym, p)).collect()
            })
            .collect();
        (self.pi.clone(), rows, self.graph.states.clone())
    }

    fn state_index(&self, word: &[u8]) -> Option<usize> {
        self.graph.states.binary_search_by(|s| s.as_slice().cmp(word)).ok()
    }

    fn edge_to(&self, u: usize, sym: u8) -> Option<usize> {
        self.graph.edges[u].iter().position(|&(_, s)| s == sym)
    }

    /// Stationary-chain cylinder mass in f64 (rounded view of the exact
    /// chain). Inadmissible words get 0; words shorter than the depth are
    /// summed over their completions.
    pub fn cylinder_measure(&self, word: &[u8]) -> f64 {
        let k = self.depth();
        if word.is_empty() {
            return 1.0;
        }
        if !self.map.word_admissible(word) {
            return 0.0;
        }
        if word.len() < k {
            return self
                .graph
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.starts_with(word))
                .map(|(i, _)| self.pi[i])
                .sum();
        }
        let mut state = match self.state_index(&word[..k]) {
            Some(s) => s,
            None => return 0.0,
        };
        let mut mass = self.pi[state];
        for &sym in &word[k..] {
            match self.edge_to(state, sym) {
                Some(e) => {
                    mass *= self.trans[state][e];
                    state = self.graph.edges[state][e].0;
                }
                None => return 0.0,
            }
        }
        mass
    }

    /// Rational cylinder mass (exact value of the f64 chain).
    pub fn cylinder_measure_rat(&self, word: &[u8]) -> Rat {
        let k = self.depth();
        if word.is_empty() {
            return Rat::one();
        }
        if !self.map.word_admissible(word) {
            return Rat::zero();
        }
        if word.len() < k {
            // Sum of pi over states extending the prefix.
            return self
                .graph
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.starts_with(word))
                .map(|(i, _)| self.pi_rat[i].clone())
                .fold(Rat::zero(), |a, b| a + b);
        }
        let mut state = match self.state_index(&word[..k]) {
            Some(s) => s,
            None => return Rat::zero(),
        };
        let mut mass = self.pi_rat[state].clone();
        for &sym in &word[k..] {
            match self.edge_to(state, sym) {
                Some(e) => {
                    mass *= &self.trans_rat[state][e];
                    state = self.graph.edges[state][e].0;
                }
                None => return Rat::zero(),
            }
        }
        mass
    }

    /// Exact mass of an intersection of shifted cylinders: constraints are
    /// (offset, word) pairs meaning "symbols offset..offset+len equal word".
    /// Conflicting constraints give 0.
    pub fn joint_measure_rat(&self, constraints: &[(usize, &[u8])]) -> Rat {
        let k = self.depth();
        let total = constraints.iter().map(|(o, w)| o + w.len()).max().unwrap_or(0);
        let span = total.max(k);
        let mut fixed: Vec<Option<u8>> = vec![None; span];
        for &(off, word) in constraints {
            for (i, &s) in word.iter().enumerate() {
                match fixed[off + i] {
                    Some(prev) if prev != s => return Rat::zero(),
                    _ => fixed[off + i] = Some(s),
                }
            }
        }
        let matches = |state: usize, pos: usize| -> bool {
            let w = &self.graph.states[state];
            (0..k).all(|i| fixed[pos + i].map_or(true, |s| s == w[i]))
        };
        let mut v: Vec<Rat> = (0..self.state_count())
            .map(|s| if matches(s, 0) { self.pi_rat[s].clone() } else { Rat::zero() })
            .collect();
        for t in 0..span - k {
            let mut next = vec![Rat::zero(); self.state_count()];
            for (u, mass) in v.iter().enumerate() {
                if mass.is_zero() {
                    continue;
                }
                for (e, &(target, sym)) in self.graph.edges[u].iter().enumerate() {
                    if fixed[t + k].map_or(true, |s| s == sym) {
                        next[target] += mass * &self.trans_rat[u][e];
                    }
                }
            }
            v = next;
        }
        v.into_iter().fold(Rat::zero(), |a, b| a + b)
    }

    /// f64 joint mass; same walk as `joint_measure_rat`.
    pub fn joint_measure(&self, constraints: &[(usize, &[u8])]) -> f64 {
        rat::to_f64(&self.joint_measure_rat(constraints))
    }

    /// Integral of a depth-D locally constant function against the measure:
    /// sum over admissible D-words of mu(I_w) * f(w).
    pub fn integrate(&self, depth: usize, f: impl Fn(&[u8]) -> f64) -> f64 {
        let words = crate::markov::admissible_words(&self.map, depth);
        words.iter().map(|w| self.cylinder_measure(w) * f(w)).sum()
    }
}

/// eta(q): the unique t with P(-t log|T'| + q phi) = 0.
///
/// P is strictly decreasing in t, so an expanding bisection bracket always
/// lands; potentials must be normalized for the structural identities
/// eta(0) = 1, eta(1) = 0 to hold.
pub fn eta(map: &MarkovMap, potential: &Potential, q: f64) -> Result<f64> {
    let graph = WordGraph::build(map, potential.depth())?;
    eta_on(&graph, potential, q)
}

fn pressure_phi_q(graph: &WordGraph, potential: &Potential, t: f64, q: f64) -> Result<f64> {
    let weights: Result<Vec<f64>> = graph
        .states
        .iter()
        .enumerate()
        .map(|(i, w)| potential.value(w).map(|p| (-t * graph.log_slope[i] + q * p).exp()))
        .collect();
    pressure_of_weights(graph, &weights?)
}

fn eta_on(graph: &WordGraph, potential: &Potential, q: f64) -> Result<f64> {
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    // P(t) decreasing: find lo with P >= 0 and hi with P <= 0.
    for _ in 0..16 {
        if pressure_phi_q(graph, potential, lo, q)? >= 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..16 {
        if pressure_phi_q(graph, potential, hi, q)? <= 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if lo < -64.0 || hi > 64.0 {
        return Err(Error::Numerical(format!("eta bracket expansion failed at q = {q}")));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if pressure_phi_q(graph, potential, mid, q)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// alpha(q) = integral of -phi against mu_q over integral of log|T'|,
/// computed exactly from the stationary distribution of the mu_q chain.
pub fn alpha(map: &MarkovMap, potential: &Potential, q: f64) -> Result<f64> {
    let graph = WordGraph::build(map, potential.depth())?;
    alpha_on(&graph, potential, q)
}

fn alpha_on(graph: &WordGraph, potential: &Potential, q: f64) -> Result<f64> {
    let t = eta_on(graph, potential, q)?;
    let weights: Result<Vec<f64>> = graph
        .states
        .iter()
        .enumerate()
        .map(|(i, w)| potential.value(w).map(|p| (-t * graph.log_slope[i] + q * p).exp()))
        .collect();
    let data = perron::source_weighted(&graph.plain_edges(), &weights?)?;
    let pi_q: Vec<f64> = {
        let mut v: Vec<f64> = data.left.iter().zip(&data.right).map(|(a, b)| a * b).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, w) in graph.states.iter().enumerate() {
        num += pi_q[i] * (-potential.value(w)?);
        den += pi_q[i] * graph.log_slope[i];
    }
    Ok(num / den)
}

/// Extreme local-dimension exponents: min and max over directed cycles of
/// the K-word graph of (sum of -phi) / (sum of log|T'|).
pub fn extremes(map: &MarkovMap, potential: &Potential) -> Result<(f64, f64)> {
    let graph = WordGraph::build(map, potential.depth())?;
    extremes_on(&graph, potential)
}

fn extremes_on(graph: &WordGraph, potential: &Potential) -> Result<(f64, f64)> {
    let num: Result<Vec<f64>> = graph.states.iter().map(|w| potential.value(w).map(|p| -p)).collect();
    let den = graph.log_slope.clone();
    Ok(cycles::cycle_ratio_extremes(&graph.plain_edges(), &num?, &den, 1e-10))
}

/// One sampled point of the spectrum curve.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumPoint {
    pub q: f64,
    pub eta: f64,
    pub alpha: f64,
    pub dimension: f64,
}

/// Sampled spectrum plus the scalar exponents.
#[derive(Clone, Debug)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub alpha_max: f64,
    pub dim_mu: f64,
}

/// The spectrum evaluator: owns a normalized Gibbs model and answers
/// eta/alpha/D queries at arbitrary arguments.
pub struct Spectrum {
    model: GibbsModel,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub alpha_max: f64,
    pub dim_mu: f64,
}

impl Spectrum {
    pub fn compute(map: Arc<MarkovMap>, potential: Potential) -> Result<Spectrum> {
        let model = GibbsModel::new(map, potential)?;
        let graph = &model.graph;
        let (alpha_minus, alpha_plus) = extremes_on(graph, &model.potential)?;
        let alpha_max = alpha_on(graph, &model.potential, 0.0)?;
        let dim_mu = alpha_on(graph, &model.potential, 1.0)?;
        Ok(Spectrum { model, alpha_minus, alpha_plus, alpha_max, dim_mu })
    }

    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn map(&self) -> &Arc<MarkovMap> {
        self.model.map()
    }

    pub fn eta(&self, q: f64) -> Result<f64> {
        eta_on(&self.model.graph, &self.model.potential, q)
    }

    pub fn alpha(&self, q: f64) -> Result<f64> {
        alpha_on(&self.model.graph, &self.model.potential, q)
    }

    /// Spectrum is a single point when the extremes coincide.
    pub fn is_degenerate(&self) -> bool {
        self.alpha_plus - self.alpha_minus <= 1e-9
    }

    /// Inverse of the decreasing function q -> alpha(q); alpha must lie in
    /// the open interval (alpha_minus, alpha_plus).
    pub fn q_of_alpha(&self, a: f64) -> Result<f64> {
        if !(self.alpha_minus < a && a < self.alpha_plus) {
            return Err(Error::Domain(format!(
                "alpha = {a} outside the open interval ({}, {})",
                self.alpha_minus, self.alpha_plus
            )));
        }
        // alpha is decreasing; expand until the bracket straddles a. The
        // pressure solver caps |t| at 64, which limits how far |q| can go;
        // stop expanding just before that limit.
        let mut lo = -1.0f64; // alpha(lo) > a side
        let mut hi = 1.0f64;
        loop {
            match self.alpha(hi) {
                Ok(v) if v < a => break,
                Ok(_) if hi.abs() < 48.0 => hi *= 2.0,
                Ok(_) => {
                    return Err(Error::Numerical(format!(
                        "alpha = {a} too close to the lower spectrum endpoint for the solver"
                    )))
                }
                Err(e) => return Err(e),
            }
        }
        loop {
            match self.alpha(lo) {
                Ok(v) if v > a => break,
                Ok(_) if lo.abs() < 48.0 => lo *= 2.0,
                Ok(_) => {
                    return Err(Error::Numerical(format!(
                        "alpha = {a} too close to the upper spectrum endpoint for the solver"
                    )))
                }
                Err(e) => return Err(e),
            }
        }
        let mut q = 0.0;
        for _ in 0..96 {
            q = 0.5 * (lo + hi);
            let av = self.alpha(q)?;
            if (av - a).abs() <= 1e-12 {
                break;
            }
            if av > a {
                lo = q;
            } else {
                hi = q;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        Ok(q)
    }

    /// D(alpha) = eta(q(alpha)) + q(alpha) * alpha on the open interval.
    pub fn dimension_at(&self, a: f64) -> Result<f64> {
        let q = self.q_of_alpha(a)?;
        Ok(self.eta(q)? + q * a)
    }

    pub fn sample(&self, q_grid: &[f64]) -> Result<SpectrumCurve> {
        let mut points = Vec::with_capacity(q_grid.len());
        for &q in q_grid {
            let e = self.eta(q)?;
            let a = self.alpha(q)?;
            points.push(SpectrumPoint { q, eta: e, alpha: a, dimension: e + q * a });
        }
        Ok(SpectrumCurve {
            points,
            alpha_minus: self.alpha_minus,
            alpha_plus: self.alpha_plus,
            alpha_max: self.alpha_max,
            dim_mu: self.dim_mu,
        })
    }
}

/// delta(phi, psi) = integral of log|T'| d mu_psi / integral of -phi d mu_psi.
/// Both potentials must be normalized (the models normalize on build).
pub fn delta_exponent(map: &Arc<MarkovMap>, phi: &Potential, psi: &Potential) -> Result<f64> {
    let model_psi = GibbsModel::new(Arc::clone(map), psi.clone())?;
    let phi_n = normalize(map, phi)?;
    let num = model_psi.integrate(1, |w| rat::to_f64(map.branch_slope(w[0] as usize)).ln());
    let den = model_psi.integrate(phi_n.depth(), |w| -phi_n.value(w).unwrap());
    if den <= 0.0 {
        return Err(Error::Domain(
            "integral of -phi against mu_psi is not positive".into(),
        ));
    }
    Ok(num / den)
}

/// Bernoulli-style potential on a full-shift map: phi(k) = log(weight_k).
pub fn weight_potential(map: &MarkovMap, weights: &[f64]) -> Result<Potential> {
    if weights.len() != map.cell_count() {
        return Err(Error::Domain("one weight per cell required".into()));
    }
    let values = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| (vec![k as u8], w.ln()))
        .collect();
    Potential::new(1, values)
}
