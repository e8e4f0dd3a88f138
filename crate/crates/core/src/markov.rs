//! Piecewise-linear expanding Markov maps of `[0,1]` with a finite
//! partition, in exact rational arithmetic.
//!
//! A map is described by partition endpoints `a_0 = 0 < a_1 < ... < a_Q = 1`
//! and one affine branch per cell `I(k) = [a_k, a_{k+1})`. Each branch is
//! strictly monotone and maps its cell onto a contiguous run of partition
//! cells, which makes the transition structure a 0/1 matrix and every
//! cylinder interval an exact rational interval.
//!
//! Conventions. Cells and cylinders are stored as half-open intervals
//! `[lo, hi)`; partition endpoints belong to the cell on their right, and
//! the point 1 is treated as belonging to the closure of the last cell when
//! it appears as an iterate. For branches of negative orientation the true
//! pullback of a half-open interval is half-open on the other side; the
//! stored intervals keep the `[lo, hi)` form, which misassigns only a
//! countable set of endpoints. `locate` is consistent with the stored
//! intervals (it descends geometrically), so its result always contains the
//! queried point.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Branch direction: sign of the slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Increasing => 1,
            Orientation::Decreasing => -1,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Orientation::Increasing),
            -1 => Ok(Orientation::Decreasing),
            _ => Err(Error::InvalidMap(format!("orientation must be +1 or -1, got {s}"))),
        }
    }
}

/// Unvalidated branch data: direction plus the contiguous run of cells the
/// branch maps onto, given as indices of the first and last cell.
#[derive(Clone, Debug)]
pub struct BranchSpec {
    pub orientation: Orientation,
    pub image_first: usize,
    pub image_last: usize,
}

/// Unvalidated map description.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub endpoints: Vec<Rat>,
    pub branches: Vec<BranchSpec>,
}

#[derive(Clone, Debug)]
struct Branch {
    orientation: Orientation,
    image_first: usize,
    image_last: usize,
    /// |T'| on the cell: (image length) / (cell length).
    slope: Rat,
}

/// Constants attached to a validated map.
#[derive(Clone, Debug)]
pub struct MapConstants {
    /// Minimal branch slope magnitude; expansion requires it to exceed 1.
    pub expansion: Rat,
    /// Distortion constant L: max of |I(k)|·|T'_k| / |I(j)| over admissible
    /// (k, j), so that parent/child cylinder length ratios lie in [1, L].
    pub distortion: Rat,
    /// Scale-to-generation constant L': members of the scale-n covering have
    /// generation within [n/L', L'·n] for the n exercised by the artifact.
    pub scale_to_generation: f64,
    /// Additive margin included in `scale_to_generation`.
    pub generation_margin: f64,
    /// Mixing horizon R: every cell reaches every cell within R iterates.
    pub mixing_horizon: usize,
}

/// One axiom check in a validation report.
#[derive(Clone, Debug)]
pub struct AxiomCheck {
    pub axiom: u8,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of validating a map description: pass/fail per axiom, plus the
/// derived constants when everything passed.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub cell_count: usize,
    pub checks: Vec<AxiomCheck>,
    pub constants: Option<MapConstants>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// A basic interval `I_{i_1 ... i_n}` together with its word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: Vec<u8>,
    pub lo: Rat,
    pub hi: Rat,
}

impl Cylinder {
    pub fn generation(&self) -> usize {
        self.word.len()
    }

    pub fn len(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        *x >= self.lo && *x < self.hi
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat::int(2)
    }
}

/// A tiling of `[0,1)` by maximal cylinders of length at most `2^-scale`,
/// sorted by left endpoint.
#[derive(Clone, Debug)]
pub struct Covering {
    pub scale: u32,
    pub members: Vec<Cylinder>,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.members.iter().map(|c| c.word.len()).max().unwrap_or(0)
    }
}

/// Node of the cylinder tree used by covering construction and ball
/// decomposition: the cylinder `[lo, hi)` of `word`, on which `T^(|word|-1)`
/// is affine onto the cell of the last symbol, with slope `sigma * sprod`.
#[derive(Clone, Debug)]
pub(crate) struct TreeNode {
    pub word: Vec<u8>,
    pub lo: Rat,
    pub hi: Rat,
    sigma: i64,
    sprod: Rat,
}

impl TreeNode {
    pub fn len(&self) -> Rat {
        &self.hi - &self.lo
    }

    fn into_cylinder(self) -> Cylinder {
        Cylinder { word: self.word, lo: self.lo, hi: self.hi }
    }
}

/// A validated piecewise-linear expanding Markov map.
#[derive(Clone, Debug)]
pub struct MarkovMap {
    endpoints: Vec<Rat>,
    branches: Vec<Branch>,
    transition: Vec<Vec<bool>>,
    constants: MapConstants,
    /// One-step pullbacks: pull[k][j] = closure-free preimage of cell j under
    /// branch k, for admissible (k, j).
    pull: Vec<Vec<Option<(Rat, Rat)>>>,
    endpoints_f64: Vec<f64>,
    slopes_f64: Vec<f64>,
}

impl MarkovMap {
    /// Validate a description and build the map. The returned report lists
    /// the axiom checks; on failure the error reflects the first failed one.
    pub fn build(spec: MapSpec) -> Result<(MarkovMap, ValidationReport)> {
        let report = validate(&spec);
        if let Some(fail) = report.first_failure() {
            let msg = format!("axiom ({}) failed: {}", fail.axiom, fail.detail);
            return Err(match fail.axiom {
                1 => Error::NotExpanding(fail.detail.clone()),
                4 => Error::NoMixingHorizon(spec.branches.len() * spec.branches.len()),
                _ => Error::InvalidMap(msg),
            });
        }
        let constants = report.constants.clone().expect("valid report carries constants");
        let q = spec.branches.len();
        let branches: Vec<Branch> = spec
            .branches
            .iter()
            .enumerate()
            .map(|(k, b)| Branch {
                orientation: b.orientation,
                image_first: b.image_first,
                image_last: b.image_last,
                slope: branch_slope(&spec.endpoints, k, b),
            })
            .collect();
        let mut transition = vec![vec![false; q]; q];
        for (k, b) in branches.iter().enumerate() {
            for j in b.image_first..=b.image_last {
                transition[k][j] = true;
            }
        }
        let endpoints_f64: Vec<f64> = spec.endpoints.iter().map(rat::to_f64).collect();
        let slopes_f64: Vec<f64> = branches.iter().map(|b| rat::to_f64(&b.slope)).collect();
        let mut map = MarkovMap {
            endpoints: spec.endpoints,
            branches,
            transition,
            constants,
            pull: Vec::new(),
            endpoints_f64,
            slopes_f64,
        };
        map.pull = (0..q)
            .map(|k| {
                (0..q)
                    .map(|j| {
                        if map.transition[k][j] {
                            let (u, v) = map.cell(j);
                            Some(map.branch_pullback(k, &u, &v))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        Ok((map, report))
    }

    pub fn new(spec: MapSpec) -> Result<MarkovMap> {
        Ok(Self::build(spec)?.0)
    }

    pub fn cell_count(&self) -> usize {
        self.branches.len()
    }

    pub fn endpoints(&self) -> &[Rat] {
        &self.endpoints
    }

    pub fn constants(&self) -> &MapConstants {
        &self.constants
    }

    pub fn cell(&self, k: usize) -> (Rat, Rat) {
        (self.endpoints[k].clone(), self.endpoints[k + 1].clone())
    }

    pub fn cell_len(&self, k: usize) -> Rat {
        &self.endpoints[k + 1] - &self.endpoints[k]
    }

    /// Magnitude of the branch slope on cell k.
    pub fn branch_slope(&self, k: usize) -> &Rat {
        &self.branches[k].slope
    }

    pub fn branch_slope_f64(&self, k: usize) -> f64 {
        self.slopes_f64[k]
    }

    pub fn cell_len_f64(&self, k: usize) -> f64 {
        self.endpoints_f64[k + 1] - self.endpoints_f64[k]
    }

    pub fn orientation(&self, k: usize) -> Orientation {
        self.branches[k].orientation
    }

    pub fn admissible(&self, k: usize, j: usize) -> bool {
        self.transition[k][j]
    }

    pub fn transition(&self) -> &[Vec<bool>] {
        &self.transition
    }

    /// Successors of cell k, in increasing order.
    pub fn successors(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        self.branches[k].image_first..=self.branches[k].image_last
    }

    /// Whether a word is admissible (consecutive pairs allowed by the
    /// transition structure). Symbols out of range are inadmissible.
    pub fn word_admissible(&self, word: &[u8]) -> bool {
        let q = self.cell_count();
        if word.iter().any(|&s| s as usize >= q) {
            return false;
        }
        word.windows(2).all(|w| self.transition[w[0] as usize][w[1] as usize])
    }

    /// Cell of a point under the half-open convention; domain `[0, 1)`.
    pub fn cell_of(&self, x: &Rat) -> Result<usize> {
        if x < &Rat::zero() || x >= &Rat::one() {
            return Err(Error::Domain(format!("point {} outside [0,1)", rat::format(x))));
        }
        Ok(self.cell_of_plus(x))
    }

    /// Largest k with a_k <= x, for x in [0, 1).
    fn cell_of_plus(&self, x: &Rat) -> usize {
        let mut lo = 0usize;
        let mut hi = self.cell_count();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if &self.endpoints[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Cell under the left-open convention (a_j, a_{j+1}], for x in (0, 1].
    fn cell_of_minus(&self, x: &Rat) -> usize {
        let mut lo = 0usize;
        let mut hi = self.cell_count();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if &self.endpoints[mid] < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// The affine branch formula of cell k, defined on the cell closure.
    pub fn branch_apply(&self, k: usize, x: &Rat) -> Rat {
        let b = &self.branches[k];
        let a_k = &self.endpoints[k];
        match b.orientation {
            Orientation::Increasing => {
                let c = &self.endpoints[b.image_first];
                c + &b.slope * (x - a_k)
            }
            Orientation::Decreasing => {
                let d = &self.endpoints[b.image_last + 1];
                d - &b.slope * (x - a_k)
            }
        }
    }

    /// Exact image T(x); domain `[0, 1)`.
    pub fn apply(&self, x: &Rat) -> Result<Rat> {
        let k = self.cell_of(x)?;
        Ok(self.branch_apply(k, x))
    }

    /// Signed slope T'(x); domain `[0, 1)`.
    pub fn derivative(&self, x: &Rat) -> Result<Rat> {
        let k = self.cell_of(x)?;
        let b = &self.branches[k];
        Ok(match b.orientation {
            Orientation::Increasing => b.slope.clone(),
            Orientation::Decreasing => -b.slope.clone(),
        })
    }

    /// Preimage of `[u, v)` (a subset of the branch image) under branch k,
    /// returned as stored endpoints (lo, hi).
    fn branch_pullback(&self, k: usize, u: &Rat, v: &Rat) -> (Rat, Rat) {
        let b = &self.branches[k];
        let a_k = &self.endpoints[k];
        match b.orientation {
            Orientation::Increasing => {
                let c = &self.endpoints[b.image_first];
                (a_k + (u - c) / &b.slope, a_k + (v - c) / &b.slope)
            }
            Orientation::Decreasing => {
                let d = &self.endpoints[b.image_last + 1];
                (a_k + (d - v) / &b.slope, a_k + (d - u) / &b.slope)
            }
        }
    }

    /// The basic interval of a word, or `None` when the word is inadmissible
    /// (the empty cylinder). The word must be nonempty.
    pub fn cylinder(&self, word: &[u8]) -> Option<Cylinder> {
        assert!(!word.is_empty(), "cylinder word must be nonempty");
        if !self.word_admissible(word) {
            return None;
        }
        let n = word.len();
        let (mut lo, mut hi) = self.cell(word[n - 1] as usize);
        for &s in word[..n - 1].iter().rev() {
            let (l, h) = self.branch_pullback(s as usize, &lo, &hi);
            lo = l;
            hi = h;
        }
        Some(Cylinder { word: word.to_vec(), lo, hi })
    }

    /// f64 endpoints of a cylinder, suitable for outer approximations after
    /// widening; mirrors `cylinder` without the admissibility lookup.
    pub fn cylinder_f64(&self, word: &[u8]) -> (f64, f64) {
        let n = word.len();
        let k = word[n - 1] as usize;
        let mut lo = self.endpoints_f64[k];
        let mut hi = self.endpoints_f64[k + 1];
        for &sraw in word[..n - 1].iter().rev() {
            let s = sraw as usize;
            let b = &self.branches[s];
            let a = self.endpoints_f64[s];
            let sl = self.slopes_f64[s];
            match b.orientation {
                Orientation::Increasing => {
                    let c = self.endpoints_f64[b.image_first];
                    let nl = a + (lo - c) / sl;
                    let nh = a + (hi - c) / sl;
                    lo = nl;
                    hi = nh;
                }
                Orientation::Decreasing => {
                    let d = self.endpoints_f64[b.image_last + 1];
                    let nl = a + (d - hi) / sl;
                    let nh = a + (d - lo) / sl;
                    lo = nl;
                    hi = nh;
                }
            }
        }
        (lo, hi)
    }

    /// The generation-n cylinder whose stored interval contains x.
    ///
    /// Descends geometrically, so the result is consistent with the stored
    /// half-open intervals even when decreasing branches flip the open side.
    pub fn locate(&self, x: &Rat, n: usize) -> Result<Cylinder> {
        if n == 0 {
            return Err(Error::Domain("locate requires generation >= 1".into()));
        }
        if x < &Rat::zero() || x >= &Rat::one() {
            return Err(Error::Domain(format!("point {} outside [0,1)", rat::format(x))));
        }
        let mut word = Vec::with_capacity(n);
        let mut y = x.clone();
        let mut plus = true;
        for _ in 0..n {
            let k = if plus { self.cell_of_plus(&y) } else { self.cell_of_minus(&y) };
            word.push(k as u8);
            y = self.branch_apply(k, &y);
            if self.branches[k].orientation == Orientation::Decreasing {
                plus = !plus;
            }
        }
        Ok(self.cylinder(&word).expect("located word is admissible"))
    }

    pub(crate) fn root_nodes(&self) -> Vec<TreeNode> {
        (0..self.cell_count())
            .map(|k| {
                let (lo, hi) = self.cell(k);
                TreeNode { word: vec![k as u8], lo, hi, sigma: 1, sprod: Rat::one() }
            })
            .collect()
    }

    pub(crate) fn node_children(&self, node: &TreeNode) -> Vec<TreeNode> {
        let k = *node.word.last().expect("nonempty word") as usize;
        let b = &self.branches[k];
        let a_k = &self.endpoints[k];
        let b_k = &self.endpoints[k + 1];
        let sprod = &node.sprod * &b.slope;
        let sigma = node.sigma * b.orientation.sign();
        self.successors(k)
            .map(|j| {
                let (plo, phi) = self.pull[k][j].as_ref().expect("admissible");
                let (lo, hi) = if node.sigma > 0 {
                    (&node.lo + (plo - a_k) / &node.sprod, &node.lo + (phi - a_k) / &node.sprod)
                } else {
                    (&node.lo + (b_k - phi) / &node.sprod, &node.lo + (b_k - plo) / &node.sprod)
                };
                let mut word = node.word.clone();
                word.push(j as u8);
                TreeNode { word, lo, hi, sigma, sprod: sprod.clone() }
            })
            .collect()
    }

    /// The scale-n covering: maximal cylinders of length at most `2^-n`
    /// (every proper ancestor is longer). Members tile `[0, 1)` and are
    /// returned sorted by left endpoint.
    pub fn scale_covering(&self, n: u32) -> Covering {
        let r = rat::pow2(-(n as i32));
        let mut members: Vec<Cylinder> = Vec::new();
        let mut stack = self.root_nodes();
        while let Some(node) = stack.pop() {
            if node.len() <= r {
                members.push(node.into_cylinder());
            } else {
                stack.extend(self.node_children(&node));
            }
        }
        members.sort_by(|a, b| a.lo.cmp(&b.lo));
        Covering { scale: n, members }
    }
}

fn branch_slope(endpoints: &[Rat], k: usize, b: &BranchSpec) -> Rat {
    let image = &endpoints[b.image_last + 1] - &endpoints[b.image_first];
    let cell = &endpoints[k + 1] - &endpoints[k];
    image / cell
}

/// Search the least R <= bound such that every (k, j) is connected by some
/// path of length at most R. Exposed separately so the transition-structure
/// arithmetic can be checked against hand computations.
pub fn mixing_horizon(transition: &[Vec<bool>], bound: usize) -> Option<usize> {
    let q = transition.len();
    let mut reach = transition.to_vec();
    let mut cum = transition.to_vec();
    for r in 1..=bound {
        if cum.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(r);
        }
        if r == bound {
            break;
        }
        let mut next = vec![vec![false; q]; q];
        for i in 0..q {
            for (m, row) in transition.iter().enumerate() {
                if reach[i][m] {
                    for (j, &t) in row.iter().enumerate() {
                        if t {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        reach = next;
        for i in 0..q {
            for j in 0..q {
                cum[i][j] |= reach[i][j];
            }
        }
    }
    None
}

/// Check the map axioms on a description and derive the constants.
pub fn validate(spec: &MapSpec) -> ValidationReport {
    let mut checks = Vec::new();
    let q = spec.branches.len();

    // Partition well-formedness gates everything else.
    let mut shape_ok = spec.endpoints.len() == q + 1 && q >= 1;
    let mut shape_detail = String::new();
    if !shape_ok {
        shape_detail = format!("{} endpoints for {} branches", spec.endpoints.len(), q);
    } else {
        if spec.endpoints[0] != Rat::zero() || spec.endpoints[q] != Rat::one() {
            shape_ok = false;
            shape_detail = "endpoints must start at 0 and end at 1".into();
        }
        for w in spec.endpoints.windows(2) {
            if w[0] >= w[1] {
                shape_ok = false;
                shape_detail = format!(
                    "endpoints not strictly increasing at {} >= {}",
                    rat::format(&w[0]),
                    rat::format(&w[1])
                );
                break;
            }
        }
        for (k, b) in spec.branches.iter().enumerate() {
            if b.image_first > b.image_last || b.image_last >= q {
                shape_ok = false;
                shape_detail = format!("branch {k}: image cells [{}, {}] out of range", b.image_first, b.image_last);
                break;
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: 0,
        passed: shape_ok,
        detail: if shape_ok { "partition 0 = a_0 < ... < a_Q = 1, image runs in range".into() } else { shape_detail },
    });
    if !shape_ok {
        return ValidationReport { cell_count: q, checks, constants: None };
    }

    let slopes: Vec<Rat> = spec
        .branches
        .iter()
        .enumerate()
        .map(|(k, b)| branch_slope(&spec.endpoints, k, b))
        .collect();
    let rho = slopes.iter().min().cloned().expect("q >= 1");
    let expanding = rho > Rat::one();
    checks.push(AxiomCheck {
        axiom: 1,
        passed: expanding,
        detail: if expanding {
            format!("min |T'| = {} > 1", rat::format(&rho))
        } else {
            format!("min |T'| = {} <= 1", rat::format(&rho))
        },
    });

    checks.push(AxiomCheck {
        axiom: 2,
        passed: true,
        detail: "branches are affine, hence strictly monotone with C^2 extensions".into(),
    });
    checks.push(AxiomCheck {
        axiom: 3,
        passed: true,
        detail: "branch images are contiguous runs of partition cells by construction".into(),
    });

    let mut transition = vec![vec![false; q]; q];
    for (k, b) in spec.branches.iter().enumerate() {
        for j in b.image_first..=b.image_last {
            transition[k][j] = true;
        }
    }
    let bound = q * q;
    let horizon = mixing_horizon(&transition, bound);
    checks.push(AxiomCheck {
        axiom: 4,
        passed: horizon.is_some(),
        detail: match horizon {
            Some(r) => format!("mixing horizon R = {r}"),
            None => format!("no R <= {bound} connects every cell pair"),
        },
    });

    checks.push(AxiomCheck {
        axiom: 5,
        passed: true,
        detail: "T'' = 0 on every cell; the distortion-ratio bound holds vacuously".into(),
    });

    if checks.iter().any(|c| !c.passed) {
        return ValidationReport { cell_count: q, checks, constants: None };
    }

    // L = max |I(k)| |T'_k| / |I(j)| over admissible (k, j); equals the
    // largest parent/child cylinder length ratio.
    let mut distortion = Rat::one();
    for (k, b) in spec.branches.iter().enumerate() {
        let cell_k = &spec.endpoints[k + 1] - &spec.endpoints[k];
        for j in b.image_first..=b.image_last {
            let cell_j = &spec.endpoints[j + 1] - &spec.endpoints[j];
            let ratio = &cell_k * &slopes[k] / cell_j;
            if ratio > distortion {
                distortion = ratio;
            }
        }
    }

    let rho_f = rho.to_f64().unwrap_or(f64::NAN);
    let smax_f = slopes.iter().map(|s| s.to_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let min_cell = (0..q)
        .map(|k| (&spec.endpoints[k + 1] - &spec.endpoints[k]).to_f64().unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    let margin = 0.1;
    let scale_to_generation = [
        1.0,
        2f64.ln() / rho_f.ln(),
        smax_f.log2(),
        -(min_cell.log2()),
    ]
    .into_iter()
    .fold(1.0f64, f64::max)
        + margin;

    let constants = MapConstants {
        expansion: rho,
        distortion,
        scale_to_generation,
        generation_margin: margin,
        mixing_horizon: horizon.expect("checked above"),
    };
    ValidationReport { cell_count: q, checks, constants: Some(constants) }
}

/// The full-shift doubling map: two cells of slope 2, both onto `[0,1)`.
pub fn doubling_map() -> MarkovMap {
    let spec = MapSpec {
        endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::int(1)],
        branches: vec![
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
        ],
    };
    MarkovMap::new(spec).expect("doubling map is valid")
}

/// Enumerate all admissible words of the given length, lexicographically.
pub fn admissible_words(map: &MarkovMap, len: usize) -> Vec<Vec<u8>> {
    let q = map.cell_count();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u8>> = (0..q as u8).rev().map(|s| vec![s]).collect();
    while let Some(w) = stack.pop() {
        if w.len() == len {
            out.push(w);
            continue;
        }
        let last = *w.last().unwrap() as usize;
        for j in map.successors(last).rev() {
            let mut next = w.clone();
            next.push(j as u8);
            stack.push(next);
        }
    }
    out
}

/// Word symbols rendered as a digit string, e.g. `[0,1,1]` -> "011".
pub fn word_string(word: &[u8]) -> String {
    word.iter().map(|s| char::from_digit(*s as u32, 36).unwrap_or('?')).collect()
}

/// Parse a digit-string word like "011" into symbols.
pub fn parse_word(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Domain(format!("bad symbol {c:?} in word {s:?}")))
        })
        .collect()
}

/// Group covering members by generation, for reporting.
pub fn generation_histogram(covering: &Covering) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for c in &covering.members {
        *hist.entry(c.generation()).or_insert(0) += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cell() -> MarkovMap {
        // Cells of length 1/3; images {0,1}, {1,2}, {0,1,2}.
        let spec = MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(1, 3), rat::ratio(2, 3), rat::int(1)],
            branches: vec![
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 1, image_last: 2 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
            ],
        };
        MarkovMap::new(spec).unwrap()
    }

    fn tent() -> MarkovMap {
        let spec = MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::int(1)],
            branches: vec![
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
                BranchSpec { orientation: Orientation::Decreasing, image_first: 0, image_last: 1 },
            ],
        };
        MarkovMap::new(spec).unwrap()
    }

    #[test]
    fn doubling_validates() {
        let (_, report) = MarkovMap::build(MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::int(1)],
            branches: vec![
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            ],
        })
        .unwrap();
        assert!(report.is_valid());
        let c = report.constants.unwrap();
        assert_eq!(c.expansion, rat::int(2));
        assert_eq!(c.distortion, rat::int(2));
        assert_eq!(c.mixing_horizon, 1);
    }

    #[test]
    fn slope_one_rejected() {
        let spec = MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::int(1)],
            branches: vec![
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 0 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            ],
        };
        let report = validate(&spec);
        assert!(!report.is_valid());
        assert!(matches!(MarkovMap::new(spec), Err(Error::NotExpanding(_))));
    }

    #[test]
    fn unsorted_endpoints_rejected() {
        let spec = MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(2, 3), rat::ratio(1, 3), rat::int(1)],
            branches: vec![
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
                BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
            ],
        };
        assert!(matches!(MarkovMap::new(spec), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn mixing_horizon_hand_matrix() {
        // Hand oracle: A has zeros, A^2 is all-positive, so R = 2.
        let a = vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ];
        assert_eq!(mixing_horizon(&a, 9), Some(2));
        // A cycle without self-loops needs R = 2 as well (union of A, A^2).
        let cycle = vec![vec![false, true], vec![true, false]];
        assert_eq!(mixing_horizon(&cycle, 4), Some(2));
        // Reducible: no horizon.
        let red = vec![vec![true, false], vec![true, true]];
        assert_eq!(mixing_horizon(&red, 4), None);
    }

    #[test]
    fn three_cell_has_horizon_two() {
        let map = three_cell();
        assert_eq!(map.constants().mixing_horizon, 2);
        assert!(!map.admissible(0, 2));
        assert!(!map.admissible(1, 0));
    }

    #[test]
    fn apply_doubling() {
        let map = doubling_map();
        assert_eq!(map.apply(&rat::ratio(1, 3)).unwrap(), rat::ratio(2, 3));
        assert_eq!(map.apply(&rat::ratio(2, 3)).unwrap(), rat::ratio(1, 3));
        assert_eq!(map.derivative(&rat::ratio(1, 3)).unwrap(), rat::int(2));
        assert!(map.apply(&rat::int(1)).is_err());
        assert!(map.apply(&rat::ratio(-1, 2)).is_err());
    }

    #[test]
    fn apply_at_cell_endpoints() {
        let map = three_cell();
        // Increasing branch: left endpoint maps to the image-span left end.
        assert_eq!(map.apply(&rat::ratio(1, 3)).unwrap(), rat::ratio(1, 3));
        let t = tent();
        // Decreasing branch: left endpoint maps to the image-span right end.
        assert_eq!(t.apply(&rat::ratio(1, 2)).unwrap(), rat::int(1));
        assert_eq!(t.derivative(&rat::ratio(3, 4)).unwrap(), rat::int(-2));
    }

    #[test]
    fn cylinders_doubling() {
        let map = doubling_map();
        let c = map.cylinder(&[1, 0]).unwrap();
        assert_eq!((c.lo, c.hi), (rat::ratio(1, 2), rat::ratio(3, 4)));
        let c = map.cylinder(&[0, 1, 1]).unwrap();
        assert_eq!((c.lo, c.hi), (rat::ratio(3, 8), rat::ratio(1, 2)));
    }

    #[test]
    fn inadmissible_word_is_empty() {
        let map = three_cell();
        assert!(map.cylinder(&[0, 2]).is_none());
        assert!(map.cylinder(&[0, 1, 0]).is_none()); // 1 -> 0 forbidden
        assert!(map.cylinder(&[9]).is_none());
    }

    #[test]
    fn locate_examples() {
        let map = doubling_map();
        let c = map.locate(&rat::ratio(1, 3), 2).unwrap();
        assert_eq!(c.word, vec![0, 1]);
        assert_eq!((c.lo, c.hi), (rat::ratio(1, 4), rat::ratio(1, 2)));
        let c = map.locate(&rat::int(0), 7).unwrap();
        assert_eq!(c.word, vec![0; 7]);
        let c = map.locate(&rat::ratio(2, 3), 3).unwrap();
        assert_eq!(c.word, vec![1, 0, 1]);
    }

    #[test]
    fn locate_tent_boundary_point() {
        // 3/4 maps to 1/2 under the decreasing branch; the geometric descent
        // must return the stored interval that actually contains the point.
        let map = tent();
        let c = map.locate(&rat::ratio(3, 4), 2).unwrap();
        assert!(c.contains(&rat::ratio(3, 4)));
        assert_eq!(c.word, vec![1, 0]);
    }

    #[test]
    fn locate_tent_interior_matches_itinerary() {
        let map = tent();
        let x = rat::ratio(2, 7); // orbit: 2/7 -> 4/7 -> 6/7 -> 2/7
        let c = map.locate(&x, 6).unwrap();
        assert!(c.contains(&x));
        let mut y = x.clone();
        for &s in &c.word {
            assert_eq!(map.cell_of(&y).unwrap(), s as usize);
            y = map.apply(&y).unwrap();
        }
    }

    #[test]
    fn covering_doubling_n4() {
        let map = doubling_map();
        let cov = map.scale_covering(4);
        assert_eq!(cov.len(), 16);
        for (i, c) in cov.members.iter().enumerate() {
            assert_eq!(c.generation(), 4);
            assert_eq!(c.lo, rat::ratio(i as i64, 16));
        }
    }

    #[test]
    fn covering_scale_zero() {
        let map = three_cell();
        let cov = map.scale_covering(0);
        assert_eq!(cov.len(), 3);
        assert!(cov.members.iter().all(|c| c.len() <= rat::int(1)));
    }

    #[test]
    fn covering_tiles_and_bounds() {
        for map in [doubling_map(), three_cell(), tent()] {
            let l = map.constants().distortion.clone();
            for n in [1u32, 3, 6] {
                let cov = map.scale_covering(n);
                let r = rat::pow2(-(n as i32));
                let mut total = Rat::zero();
                let mut prev_hi = Rat::zero();
                for c in &cov.members {
                    assert_eq!(c.lo, prev_hi, "members must be adjacent");
                    prev_hi = c.hi.clone();
                    total += c.len();
                    assert!(c.len() <= r);
                    assert!(c.len() >= &r / &l, "length below 2^-n / L");
                }
                assert_eq!(total, rat::int(1));
                assert_eq!(prev_hi, rat::int(1));
            }
        }
    }

    #[test]
    fn covering_generation_bounds() {
        for map in [doubling_map(), three_cell(), tent()] {
            let lp = map.constants().scale_to_generation;
            for n in [2u32, 5, 9] {
                let cov = map.scale_covering(n);
                for c in &cov.members {
                    let g = c.generation() as f64;
                    assert!(g <= lp * n as f64 + 1e-9, "generation {g} above L'*n");
                    assert!(g >= n as f64 / lp - 1e-9, "generation {g} below n/L'");
                }
            }
        }
    }

    #[test]
    fn mixed_generation_covering() {
        // Full three-branch map with slopes 2, 4, 4: coverings mix generations.
        let spec = MapSpec {
            endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::ratio(3, 4), rat::int(1)],
            branches: (0..3)
                .map(|_| BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 })
                .collect(),
        };
        let map = MarkovMap::new(spec).unwrap();
        assert_eq!(map.constants().expansion, rat::int(2));
        assert_eq!(map.constants().distortion, rat::int(4));
        let cov = map.scale_covering(6);
        let hist = generation_histogram(&cov);
        assert!(hist.len() > 1, "expected mixed generations, got {hist:?}");
        let r = rat::pow2(-6);
        let l = map.constants().distortion.clone();
        let mut total = Rat::zero();
        for c in &cov.members {
            assert!(c.len() <= r && c.len() >= &r / &l);
            total += c.len();
        }
        assert_eq!(total, rat::int(1));
    }

    #[test]
    fn shift_compatibility_exact() {
        for map in [doubling_map(), three_cell(), tent()] {
            for word in admissible_words(&map, 5) {
                let c = map.cylinder(&word).unwrap();
                let shifted = map.cylinder(&word[1..]).unwrap();
                // T maps the cylinder onto the shifted cylinder; compare the
                // endpoint sets (orientation may flip them).
                let a = map.branch_apply(word[0] as usize, &c.lo);
                let b = map.branch_apply(word[0] as usize, &c.hi);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                assert_eq!(lo, shifted.lo);
                assert_eq!(hi, shifted.hi);
            }
        }
    }

    #[test]
    fn word_strings() {
        assert_eq!(word_string(&[0, 1, 1]), "011");
        assert_eq!(parse_word("011").unwrap(), vec![0, 1, 1]);
        assert!(parse_word("0!1").is_err());
    }
}
