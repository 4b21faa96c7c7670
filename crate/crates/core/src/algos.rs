//! Color reduction programs: one Linial round via polynomial cover-free
//! families, iterated Linial, the Kuhn-Wattenhofer one-round reduction, and
//! their composition into a (Δ+1)-coloring.

use serde::Serialize;
use thiserror::Error;

use crate::graph::Color;
use crate::sim::{InitContext, Inbox, NetParams, NodeProgram, StepError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgoError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("need q > delta * deg, got q = {q}, delta = {delta}, deg = {deg}")]
    IntersectionBound { q: u64, delta: usize, deg: u32 },
    #[error("q^(deg+1) = {q}^{exp} < m = {m}", exp = .deg + 1)]
    TooFewPolynomials { q: u64, deg: u32, m: u64 },
    #[error("palette {m} is already at most delta + 1 = {target}")]
    AlreadyReduced { m: u64, target: u64 },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, AlgoError>;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// `q^e >= m` without overflow.
fn pow_at_least(q: u64, e: u32, m: u64) -> bool {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(q);
        if acc >= m {
            return true;
        }
    }
    acc >= m
}

/// Smallest `q` with `q^e >= m`.
fn int_root_ceil(m: u64, e: u32) -> u64 {
    let mut q = (m as f64).powf(1.0 / e as f64).floor().max(1.0) as u64;
    while q > 1 && pow_at_least(q - 1, e, m) {
        q -= 1;
    }
    while !pow_at_least(q, e, m) {
        q += 1;
    }
    q
}

/// Field size and polynomial degree of one Linial round from palette `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinialParams {
    pub q: u64,
    pub deg: u32,
    pub m: u64,
    pub delta: usize,
}

impl LinialParams {
    pub fn new(q: u64, deg: u32, m: u64, delta: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(AlgoError::NotPrime(q));
        }
        if q <= delta as u64 * deg as u64 {
            return Err(AlgoError::IntersectionBound { q, delta, deg });
        }
        if !pow_at_least(q, deg + 1, m) {
            return Err(AlgoError::TooFewPolynomials { q, deg, m });
        }
        Ok(Self { q, deg, m, delta })
    }

    pub fn target(&self) -> u64 {
        self.q * self.q
    }
}

/// Among prime `q` and `deg >= 1` with `q > delta * deg` and `q^(deg+1) >= m`,
/// the pair minimizing `q`, ties broken by the smaller degree.
pub fn linial_params(m: u64, delta: usize) -> Result<LinialParams> {
    if m < 2 || delta < 1 {
        return Err(AlgoError::Invalid(format!("need m >= 2 and delta >= 1, got m = {m}, delta = {delta}")));
    }
    let mut best: Option<(u64, u32)> = None;
    for deg in 1u32.. {
        let floor = delta as u64 * deg as u64 + 1;
        if best.is_some_and(|(q, _)| floor > q) {
            break;
        }
        let q = next_prime(floor.max(int_root_ceil(m, deg + 1)));
        if best.is_none_or(|(b, _)| q < b) {
            best = Some((q, deg));
        }
    }
    let (q, deg) = best.expect("deg = 1 always yields a candidate");
    LinialParams::new(q, deg, m, delta)
}

/// `F_c = {(a, P_c(a)) : a in GF(q)}` where the coefficients of `P_c` are the
/// base-`q` digits of `c - 1`. The point `(a, b)` is the color `a*q + b + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverFreeFamily {
    pub params: LinialParams,
}

pub fn build_family(p: LinialParams, m: u64) -> Result<CoverFreeFamily> {
    let params = LinialParams::new(p.q, p.deg, m, p.delta)?;
    Ok(CoverFreeFamily { params })
}

impl CoverFreeFamily {
    /// Coefficients of `P_c`, lowest degree first.
    pub fn coefficients(&self, c: u64) -> Vec<u64> {
        let q = self.params.q;
        let mut x = c - 1;
        (0..=self.params.deg)
            .map(|_| {
                let d = x % q;
                x /= q;
                d
            })
            .collect()
    }

    pub fn eval(coeffs: &[u64], a: u64, q: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &k| (acc * a + k) % q)
    }

    pub fn points(&self, c: u64) -> Vec<(u64, u64)> {
        let q = self.params.q;
        let coeffs = self.coefficients(c);
        (0..q).map(|a| (a, Self::eval(&coeffs, a, q))).collect()
    }

    /// `F_c` as sorted colors in `[1, q^2]`.
    pub fn elements(&self, c: u64) -> Vec<u64> {
        let q = self.params.q;
        self.points(c).into_iter().map(|(a, b)| a * q + b + 1).collect()
    }

    /// Smallest element of `F_own` outside the union of the `F_other`.
    pub fn min_free(&self, own: u64, others: impl IntoIterator<Item = u64>) -> Option<u64> {
        let q = self.params.q;
        let mine = self.coefficients(own);
        let theirs: Vec<Vec<u64>> = others.into_iter().filter(|&c| c != own).map(|c| self.coefficients(c)).collect();
        (0..q).find_map(|a| {
            let b = Self::eval(&mine, a, q);
            theirs.iter().all(|t| Self::eval(t, a, q) != b).then_some(a * q + b + 1)
        })
    }
}

/// `ceil(m * (Δ+1) / (Δ+2))`: the palette after one Kuhn-Wattenhofer round.
pub fn kw_target(m: u64, delta: usize) -> u64 {
    let d = delta as u64;
    (m * (d + 1)).div_ceil(d + 2)
}

/// Iterated logarithm base 2: applications of `log2` until the value is at most 1.
pub fn log_star2(x: f64) -> u32 {
    let mut x = x;
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Linial(LinialParams),
    Kw { from: u64, to: u64 },
}

impl Stage {
    pub fn from(&self) -> u64 {
        match self {
            Stage::Linial(p) => p.m,
            Stage::Kw { from, .. } => *from,
        }
    }

    pub fn to(&self) -> u64 {
        match self {
            Stage::Linial(p) => p.target(),
            Stage::Kw { to, .. } => *to,
        }
    }
}

/// A fixed schedule of one-round reduction stages. Each round a node broadcasts
/// its current color and applies the next stage to the set of colors it heard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionProgram {
    pub label: String,
    pub m: u64,
    pub delta: usize,
    pub stages: Vec<Stage>,
}

fn linial_schedule(m: u64, delta: usize) -> Result<Vec<Stage>> {
    let mut stages = Vec::new();
    let mut cur = m;
    while cur >= 2 {
        let p = linial_params(cur, delta)?;
        if p.target() >= cur {
            break;
        }
        stages.push(Stage::Linial(p));
        cur = p.target();
    }
    Ok(stages)
}

fn check_color_range(m: u64) -> Result<()> {
    if m > Color::MAX as u64 {
        return Err(AlgoError::Invalid(format!("palette {m} does not fit a 32-bit color")));
    }
    Ok(())
}

/// One Linial round from palette `m`; the output palette is `q^2`.
pub fn linial_step_program(m: u64, delta: usize) -> Result<ReductionProgram> {
    check_color_range(m)?;
    let p = linial_params(m, delta)?;
    Ok(ReductionProgram { label: "linial-step".into(), m, delta, stages: vec![Stage::Linial(p)] })
}

/// Linial rounds until the next round would not shrink the palette.
pub fn linial_full_program(m: u64, delta: usize) -> Result<ReductionProgram> {
    check_color_range(m)?;
    Ok(ReductionProgram { label: "linial".into(), m, delta, stages: linial_schedule(m, delta)? })
}

/// One Kuhn-Wattenhofer round from palette `m`.
pub fn kw_step_program(m: u64, delta: usize) -> Result<ReductionProgram> {
    check_color_range(m)?;
    let floor = delta as u64 + 1;
    if m <= floor {
        return Err(AlgoError::AlreadyReduced { m, target: floor });
    }
    Ok(ReductionProgram {
        label: "kw-step".into(),
        m,
        delta,
        stages: vec![Stage::Kw { from: m, to: kw_target(m, delta) }],
    })
}

/// Iterated Linial followed by Kuhn-Wattenhofer rounds down to Δ+1 colors.
pub fn delta_plus_one_program(m: u64, delta: usize) -> Result<ReductionProgram> {
    check_color_range(m)?;
    let floor = delta as u64 + 1;
    if m < floor + 1 {
        return Err(AlgoError::AlreadyReduced { m, target: floor });
    }
    let mut stages = linial_schedule(m, delta)?;
    let mut cur = stages.last().map_or(m, Stage::to);
    while cur > floor {
        let to = kw_target(cur, delta);
        stages.push(Stage::Kw { from: cur, to });
        cur = to;
    }
    Ok(ReductionProgram { label: "delta1".into(), m, delta, stages })
}

impl ReductionProgram {
    /// Palette before the first round and after every round.
    pub fn palettes(&self) -> Vec<u64> {
        std::iter::once(self.m).chain(self.stages.iter().map(Stage::to)).collect()
    }

    pub fn final_palette(&self) -> u64 {
        self.stages.last().map_or(self.m, Stage::to)
    }

    pub fn linial_rounds(&self) -> usize {
        self.stages.iter().filter(|s| matches!(s, Stage::Linial(_))).count()
    }

    pub fn kw_rounds(&self) -> usize {
        self.stages.len() - self.linial_rounds()
    }

    /// Applies one stage to a node's color given its neighbors' colors.
    pub fn apply(&self, stage: &Stage, own: u64, heard: &[u64]) -> std::result::Result<u64, StepError> {
        match stage {
            Stage::Linial(p) => CoverFreeFamily { params: *p }
                .min_free(own, heard.iter().copied())
                .ok_or_else(|| StepError(format!("color {own}: every point of F is covered by {} neighbors", heard.len()))),
            Stage::Kw { to, .. } => {
                if own <= *to {
                    return Ok(own);
                }
                let width = self.delta as u64 + 1;
                let i = own - to - 1;
                let range = i * width + 1..=(i + 1) * width;
                range
                    .clone()
                    .find(|c| !heard.contains(c))
                    .ok_or_else(|| StepError(format!("color {own}: range {range:?} exhausted by neighbors")))
            }
        }
    }
}

fn parse_color(bytes: &[u8]) -> std::result::Result<u64, StepError> {
    let arr: [u8; 4] = bytes.try_into().map_err(|_| StepError(format!("expected a 4-byte color, got {} bytes", bytes.len())))?;
    Ok(Color::from_be_bytes(arr) as u64)
}

impl NodeProgram for ReductionProgram {
    type State = Color;

    fn name(&self) -> String {
        format!("{}(m={}, delta={})", self.label, self.m, self.delta)
    }
    fn round_budget(&self, _: &NetParams) -> usize {
        self.stages.len()
    }
    fn output_palette(&self, _: &NetParams) -> u32 {
        self.final_palette() as u32
    }
    fn init(&self, ctx: &InitContext<'_>) -> Color {
        ctx.color
    }
    fn broadcast(&self, state: &Color, _: usize) -> Vec<u8> {
        state.to_be_bytes().to_vec()
    }
    fn step(&self, state: &Color, inbox: &Inbox, round: usize) -> std::result::Result<Color, StepError> {
        let stage = self
            .stages
            .get(round - 1)
            .ok_or_else(|| StepError(format!("no stage for round {round}")))?;
        if *state as u64 > stage.from() {
            return Err(StepError(format!("color {state} exceeds the stage palette {}", stage.from())));
        }
        let heard = inbox.distinct().map(parse_color).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(self.apply(stage, *state as u64, &heard)? as Color)
    }
    fn finalize(&self, state: &Color) -> Color {
        *state
    }
    fn state_bytes(&self, state: &Color) -> Vec<u8> {
        state.to_be_bytes().to_vec()
    }
}
