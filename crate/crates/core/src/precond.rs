//! The weighted multi-splitting family and its m-step polynomial preconditioners.
//!
//! For weights `(a, b)` with `2a + b = 1`:
//!
//! ```text
//! G_ab = a (B_l^{-1} + B_r^{-1}) + b B_d^{-1}
//! H_ab = I - G_ab A
//! M_m^{-1} = (I + H_ab + ... + H_ab^{m-1}) G_ab
//! ```
//!
//! All three operators are applied matrix-free through block solves and
//! products with `A`. `M_m^{-1}` is symmetric positive definite whenever
//! `a >= 0` and `b >= -1`; [`SplittingWeights::in_c_g`] tests that region.
//!
//! Nonzero eigenvalues `lambda` of `B_l^{-1} C_l` lie in `(0, 1)` and map to
//! the eigenvalue pair `f_{a+}(lambda)`, `f_{a-}(lambda)` of `H_ab`, where
//! `f_{a+-}(lambda) = a lambda +- (1 - a) sqrt(lambda)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blocktri::BlockVector;
use crate::error::{Error, Result};
use crate::krylov::Preconditioner;
use crate::splitting::BlockFactorization;

/// Tolerance on `2a + b = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-14;

/// Relative tolerance under which two eigenvalues count as equal:
/// `|x - y| <= EIG_EQ_RTOL * max(1, |x|)`.
pub const EIG_EQ_RTOL: f64 = 1e-7;

/// Which part of the weight line `2a + b = 1` a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRegion {
    /// `a, b >= 0`
    NonNegative,
    /// `a >= 0, -1 <= b < 0`
    NegativeDiagonal,
    /// Anything else: no positive definiteness guarantee.
    Outside,
}

/// Weights `(a, b)` of the left/right stair and diagonal splittings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingWeights {
    a: f64,
    b: f64,
}

impl SplittingWeights {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !((2.0 * a + b - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::WeightsNotNormalized { a, b });
        }
        Ok(Self { a, b })
    }

    /// `(a, 1 - 2a)`
    pub fn from_a(a: f64) -> Self {
        Self { a, b: 1.0 - 2.0 * a }
    }

    /// `(0, 1)`: block Jacobi.
    pub fn diagonal_only() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    /// `(1/2, 0)`: additive stair.
    pub fn stairs_only() -> Self {
        Self { a: 0.5, b: 0.0 }
    }

    /// `(1/3, 1/3)`
    pub fn equal() -> Self {
        Self::from_a(1.0 / 3.0)
    }

    /// `(1, -1)`: the symmetric stair combination.
    pub fn optimal() -> Self {
        Self { a: 1.0, b: -1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn in_c_plus(&self) -> bool {
        self.a >= 0.0 && self.b >= 0.0
    }

    pub fn in_c_g(&self) -> bool {
        self.a >= 0.0 && self.b >= -1.0
    }

    pub fn region(&self) -> WeightRegion {
        if self.in_c_plus() {
            WeightRegion::NonNegative
        } else if self.in_c_g() {
            WeightRegion::NegativeDiagonal
        } else {
            WeightRegion::Outside
        }
    }
}

/// `y -> G_ab y`.
pub fn apply_g(w: SplittingWeights, f: &BlockFactorization, y: &BlockVector) -> Result<BlockVector> {
    f.matrix().check_vector(y)?;
    let mut out = f.matrix().zero_vector();
    let mut scratch = GScratch::new(y.len());
    g_into(w, f, y.as_slice(), out.as_mut_slice(), &mut scratch);
    Ok(out)
}

/// `y -> H_ab y = y - G_ab A y`.
pub fn apply_h(w: SplittingWeights, f: &BlockFactorization, y: &BlockVector) -> Result<BlockVector> {
    f.matrix().check_vector(y)?;
    let mut out = f.matrix().zero_vector();
    let mut ay = vec![0.0; y.len()];
    let mut scratch = GScratch::new(y.len());
    h_into(w, f, y.as_slice(), out.as_mut_slice(), &mut ay, &mut scratch);
    Ok(out)
}

struct GScratch {
    diag: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl GScratch {
    fn new(len: usize) -> Self {
        Self {
            diag: vec![0.0; len],
            left: vec![0.0; len],
            right: vec![0.0; len],
        }
    }
}

fn g_into(w: SplittingWeights, f: &BlockFactorization, y: &[f64], out: &mut [f64], s: &mut GScratch) {
    f.solve_all_into(y, &mut s.diag, &mut s.left, &mut s.right);
    let (a, b) = (w.a, w.b);
    for (((o, d), l), r) in out.iter_mut().zip(&s.diag).zip(&s.left).zip(&s.right) {
        *o = a * (l + r) + b * d;
    }
}

fn h_into(
    w: SplittingWeights,
    f: &BlockFactorization,
    y: &[f64],
    out: &mut [f64],
    ay: &mut [f64],
    s: &mut GScratch,
) {
    f.matrix().matvec_into(y, ay);
    g_into(w, f, ay, out, s);
    for (o, yi) in out.iter_mut().zip(y) {
        *o = yi - *o;
    }
}

/// The m-step polynomial preconditioner `M_m^{-1} = (I + H + ... + H^{m-1}) G`.
///
/// `m = 1` gives `G_ab` itself.
#[derive(Debug, Clone)]
pub struct PolyPreconditioner {
    weights: SplittingWeights,
    steps: usize,
    factor: Arc<BlockFactorization>,
}

impl PolyPreconditioner {
    /// Requires `steps >= 1` and weights with `a >= 0, b >= -1`.
    pub fn new(weights: SplittingWeights, steps: usize, factor: Arc<BlockFactorization>) -> Result<Self> {
        if !weights.in_c_g() {
            return Err(Error::OutsideGuaranteedRegion {
                a: weights.a,
                b: weights.b,
            });
        }
        Self::new_unguaranteed(weights, steps, factor)
    }

    /// Accepts any normalized weights. The resulting operator may be
    /// indefinite; only meant for probing the unguaranteed region.
    pub fn new_unguaranteed(
        weights: SplittingWeights,
        steps: usize,
        factor: Arc<BlockFactorization>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        Ok(Self {
            weights,
            steps,
            factor,
        })
    }

    pub fn weights(&self) -> SplittingWeights {
        self.weights
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn factorization(&self) -> &Arc<BlockFactorization> {
        &self.factor
    }

    /// `y -> M_m^{-1} y` by Horner's rule: `s <- G y`, then `m - 1` times
    /// `s <- G y + H s`. Costs `m` applications of `G` and `m - 1` products with `A`.
    pub fn apply_mm_inv(&self, y: &BlockVector) -> Result<BlockVector> {
        self.factor.matrix().check_vector(y)?;
        let mut out = self.factor.matrix().zero_vector();
        self.apply_into(y.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn apply_into(&self, y: &[f64], s: &mut [f64]) {
        let len = y.len();
        let mut scratch = GScratch::new(len);
        let mut gy = vec![0.0; len];
        g_into(self.weights, &self.factor, y, &mut gy, &mut scratch);
        s.copy_from_slice(&gy);
        if self.steps == 1 {
            return;
        }
        let mut hs = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        for _ in 1..self.steps {
            h_into(self.weights, &self.factor, s, &mut hs, &mut tmp, &mut scratch);
            for ((si, g), h) in s.iter_mut().zip(&gy).zip(&hs) {
                *si = g + h;
            }
        }
    }
}

impl Preconditioner for PolyPreconditioner {
    fn apply(&self, r: &BlockVector) -> BlockVector {
        let mut z = BlockVector::zeros(r.num_blocks(), r.block_size());
        self.apply_into(r.as_slice(), z.as_mut_slice());
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `f_{a+-}(lambda) = a lambda +- (1 - a) sqrt(lambda)` for `lambda` in `(0, 1)`.
pub fn f_a(a: f64, sign: Sign, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::DomainViolation(lambda));
    }
    Ok(ScalarMap::new(a).eval(sign, lambda))
}

/// Unchecked `f_{a+-}`; accepts any `lambda >= 0`, including the closed-interval
/// endpoints used by the extremum analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMap {
    pub a: f64,
}

impl ScalarMap {
    pub fn new(a: f64) -> Self {
        Self { a }
    }

    pub fn plus(&self, lambda: f64) -> f64 {
        self.a * lambda + (1.0 - self.a) * lambda.sqrt()
    }

    pub fn minus(&self, lambda: f64) -> f64 {
        self.a * lambda - (1.0 - self.a) * lambda.sqrt()
    }

    pub fn eval(&self, sign: Sign, lambda: f64) -> f64 {
        match sign {
            Sign::Plus => self.plus(lambda),
            Sign::Minus => self.minus(lambda),
        }
    }

    /// Stationary point of `f_{a-}` (and of `f_{a+}` for negative `a`):
    /// `(1 - a)^2 / (4 a^2)`.
    pub fn stationary_point(&self) -> f64 {
        (1.0 - self.a).powi(2) / (4.0 * self.a * self.a)
    }

    /// Eigenvalue of `M_m^{-1} A` generated by `lambda`: `1 - f(lambda)^m`.
    pub fn preconditioned_eigenvalue(&self, sign: Sign, lambda: f64, m: usize) -> f64 {
        1.0 - self.eval(sign, lambda).powi(m as i32)
    }
}

/// Real interval with optionally open endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl SpectrumInterval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    /// Membership with every endpoint widened by `slack`; open endpoints
    /// still exclude the endpoint value itself when `slack == 0`.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        let above = if self.lo_open && slack == 0.0 {
            x > self.lo
        } else {
            x >= self.lo - slack
        };
        let below = if self.hi_open && slack == 0.0 {
            x < self.hi
        } else {
            x <= self.hi + slack
        };
        above && below
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Worst-case spectral information for the weight `a`, assuming the
/// eigenvalues of `B_l^{-1} C_l` may fill `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPrediction {
    /// `rho(H_ab)`; `None` outside `a in [0, 1]` where no bound below 1 exists.
    pub rho_h: Option<f64>,
    /// Hull of `sigma(G_ab A)`; `None` outside `a in [-1, 1]`.
    pub interval_ga: Option<SpectrumInterval>,
}

/// Closed forms for `rho(H_ab)` and the hull of `sigma(G_ab A)`.
///
/// ```text
/// a in [0, 1/3]:   rho = max(1 - 2a,             f_{a+}(lambda_max))
/// a in (1/3, 1]:   rho = max((1 - a)^2 / (4a),   f_{a+}(lambda_max))
/// a in [-1, 1/3]:  sigma(G A) in (0, 2 - 2a)
/// a in (1/3, 1]:   sigma(G A) in (0, 1 + (1 - a)^2 / (4a)]
/// ```
pub fn predict_spectrum(a: f64, lambda_max: f64) -> SpectrumPrediction {
    let map = ScalarMap::new(a);
    let third = 1.0 / 3.0;
    let rho_h = if (0.0..=third).contains(&a) {
        Some((1.0 - 2.0 * a).max(map.plus(lambda_max)))
    } else if a > third && a <= 1.0 {
        Some(((1.0 - a).powi(2) / (4.0 * a)).max(map.plus(lambda_max)))
    } else {
        None
    };
    let interval_ga = if (-1.0..=third).contains(&a) {
        Some(SpectrumInterval::open(0.0, 2.0 - 2.0 * a))
    } else if a > third && a <= 1.0 {
        Some(SpectrumInterval {
            lo: 0.0,
            hi: 1.0 + (1.0 - a).powi(2) / (4.0 * a),
            lo_open: true,
            hi_open: false,
        })
    } else {
        None
    };
    SpectrumPrediction { rho_h, interval_ga }
}

/// Number of distinct eigenvalues of `M_m^{-1} A` for weights `(1, -1)`:
/// `(N/2) n` for even `N`, `floor(N/2) n + 1` for odd `N`.
pub fn distinct_count(num_blocks: usize, block_size: usize) -> usize {
    if num_blocks % 2 == 0 {
        num_blocks / 2 * block_size
    } else {
        num_blocks / 2 * block_size + 1
    }
}

/// One extremum of `f_{a-}` over `lambda in (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
    /// Whether the extremum is attained inside the open interval.
    pub reachable: bool,
}

/// Closed-form supremum and infimum of `f_{a-}` on `(0, 1)` for `a in [0, 1]`.
/// Returns `(max, min)`, or `None` for `a` outside `[0, 1]`.
pub fn f_minus_extremes(a: f64) -> Option<(Extremum, Extremum)> {
    if !(0.0..=1.0).contains(&a) {
        return None;
    }
    let map = ScalarMap::new(a);
    let at_one = Extremum {
        arg: 1.0,
        value: 2.0 * a - 1.0,
        reachable: false,
    };
    let at_zero = Extremum {
        arg: 0.0,
        value: 0.0,
        reachable: false,
    };
    if a <= 1.0 / 3.0 {
        return Some((at_zero, at_one));
    }
    let min = Extremum {
        arg: map.stationary_point(),
        value: -(1.0 - a).powi(2) / (4.0 * a),
        reachable: true,
    };
    let max = if a <= 0.5 { at_zero } else { at_one };
    Some((max, min))
}
