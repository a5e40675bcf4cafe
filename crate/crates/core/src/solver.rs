//! The five outer stationary iterations behind one driver loop: TSCSP, SCSP,
//! MHSS, PMHSS (with `V = W`) and GSOR. All complex right-hand sides are
//! assembled as real pairs; each method caches its factorizations once and
//! reuses them every iteration.

use std::fmt;
use std::str::FromStr;

use crate::factor::{factorize, InnerSolveChoice, SpdFactorization};
use crate::problems::Problem;
use crate::sparse::SparseSymMatrix;
use crate::vector::{residual_relnorm, ComplexVector};
use crate::{Error, Result};

/// Abort threshold on the relative residual; stationary runs that blow past
/// this are reported as diverged instead of looping to the iteration cap.
pub const DIVERGENCE_GUARD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Tscsp,
    Scsp,
    Mhss,
    Pmhss,
    Gsor,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Tscsp,
        MethodKind::Scsp,
        MethodKind::Mhss,
        MethodKind::Pmhss,
        MethodKind::Gsor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Tscsp => "tscsp",
            MethodKind::Scsp => "scsp",
            MethodKind::Mhss => "mhss",
            MethodKind::Pmhss => "pmhss",
            MethodKind::Gsor => "gsor",
        }
    }

    /// Upper-case label as used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            MethodKind::Tscsp => "TSCSP",
            MethodKind::Scsp => "SCSP",
            MethodKind::Mhss => "MHSS",
            MethodKind::Pmhss => "PMHSS",
            MethodKind::Gsor => "GSOR",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tscsp" => Ok(MethodKind::Tscsp),
            "scsp" => Ok(MethodKind::Scsp),
            "mhss" => Ok(MethodKind::Mhss),
            "pmhss" => Ok(MethodKind::Pmhss),
            "gsor" => Ok(MethodKind::Gsor),
            other => Err(Error::InvalidConfig(format!("unknown method: {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: MethodKind,
    /// Iteration parameter, strictly positive.
    pub alpha: f64,
    /// Relative-residual stopping tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub inner: InnerSolveChoice,
    pub record_history: bool,
}

impl SolverConfig {
    pub fn new(method: MethodKind, alpha: f64) -> Self {
        Self {
            method,
            alpha,
            tolerance: 1e-6,
            max_iterations: 5000,
            inner: InnerSolveChoice::default(),
            record_history: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.tolerance >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} not in (0, 1)",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Full outer iterations performed (a two-step method counts both
    /// half-steps as one iteration).
    pub iterations: usize,
    pub converged: bool,
    /// The residual blew past [`DIVERGENCE_GUARD`].
    pub diverged: bool,
    pub final_relative_residual: f64,
    /// `iterations + 1` entries when recorded, starting at 1.0 for the null
    /// initial guess.
    pub residual_history: Option<Vec<f64>>,
    pub setup_seconds: f64,
    pub iterate_seconds: f64,
    pub solution: ComplexVector,
    /// Total real triangular-solve (or CG) passes across all inner solves.
    pub inner_real_solves: u64,
}

#[cfg(not(target_arch = "wasm32"))]
mod stopwatch {
    pub struct Stopwatch(std::time::Instant);
    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch(std::time::Instant::now())
        }
        pub fn seconds(&self) -> f64 {
            self.0.elapsed().as_secs_f64()
        }
    }
}

#[cfg(target_arch = "wasm32")]
mod stopwatch {
    // No monotonic clock on bare wasm; timings read as zero there.
    pub struct Stopwatch;
    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch
        }
        pub fn seconds(&self) -> f64 {
            0.0
        }
    }
}

use stopwatch::Stopwatch;

/// `out[i] = a * u[i] + b * v[i]`
fn combine(out: &mut [f64], a: f64, u: &[f64], b: f64, v: &[f64]) {
    for i in 0..out.len() {
        out[i] = a * u[i] + b * v[i];
    }
}

trait Stepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()>;
    fn inner_real_solves(&self) -> u64;
}

/// TSCSP: `(aW + T) z½ = i(W - aT) z + (a - i) b`, then
/// `(W + aT) z' = i(aW - T) z½ + (1 - ai) b`.
struct TscspStepper {
    f_awt: SpdFactorization,
    f_wat: SpdFactorization,
    c1: SparseSymMatrix, // W - aT
    c2: SparseSymMatrix, // aW - T
    r1_re: Vec<f64>,     // a f + g
    r1_im: Vec<f64>,     // a g - f
    r2_re: Vec<f64>,     // f + a g
    r2_im: Vec<f64>,     // g - a f
    tmp: Vec<f64>,
    rhs: Vec<f64>,
}

impl TscspStepper {
    fn build(p: &Problem, alpha: f64, inner: &InnerSolveChoice) -> Result<Self> {
        let awt = p.w.linear_combination(alpha, 1.0, &p.t)?;
        let wat = p.w.linear_combination(1.0, alpha, &p.t)?;
        let c1 = p.w.linear_combination(1.0, -alpha, &p.t)?;
        let c2 = p.w.linear_combination(alpha, -1.0, &p.t)?;
        let n = p.n;
        let (f, g) = (&p.b.re, &p.b.im);
        let mut r1_re = vec![0.0; n];
        let mut r1_im = vec![0.0; n];
        let mut r2_re = vec![0.0; n];
        let mut r2_im = vec![0.0; n];
        combine(&mut r1_re, alpha, f, 1.0, g);
        combine(&mut r1_im, alpha, g, -1.0, f);
        combine(&mut r2_re, 1.0, f, alpha, g);
        combine(&mut r2_im, 1.0, g, -alpha, f);
        Ok(Self {
            f_awt: factorize(&awt, inner)?,
            f_wat: factorize(&wat, inner)?,
            c1,
            c2,
            r1_re,
            r1_im,
            r2_re,
            r2_im,
            tmp: vec![0.0; n],
            rhs: vec![0.0; n],
        })
    }

    fn half_step(
        f: &SpdFactorization,
        c: &SparseSymMatrix,
        const_re: &[f64],
        const_im: &[f64],
        z: &ComplexVector,
        tmp: &mut [f64],
        rhs: &mut [f64],
    ) -> Result<ComplexVector> {
        // i C (x + iy) = -C y + i C x
        c.spmv_into(&z.im, tmp);
        combine(rhs, 1.0, const_re, -1.0, tmp);
        let re = f.solve_real(rhs)?;
        c.spmv_into(&z.re, tmp);
        combine(rhs, 1.0, const_im, 1.0, tmp);
        let im = f.solve_real(rhs)?;
        Ok(ComplexVector { re, im })
    }
}

impl Stepper for TscspStepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()> {
        let half = Self::half_step(
            &self.f_awt,
            &self.c1,
            &self.r1_re,
            &self.r1_im,
            z,
            &mut self.tmp,
            &mut self.rhs,
        )?;
        *z = Self::half_step(
            &self.f_wat,
            &self.c2,
            &self.r2_re,
            &self.r2_im,
            &half,
            &mut self.tmp,
            &mut self.rhs,
        )?;
        Ok(())
    }

    fn inner_real_solves(&self) -> u64 {
        self.f_awt.solve_count() + self.f_wat.solve_count()
    }
}

/// SCSP: the single fixed-point sweep `(aW + T) z' = i(W - aT) z + (a - i) b`.
struct ScspStepper {
    f_awt: SpdFactorization,
    c1: SparseSymMatrix,
    r1_re: Vec<f64>,
    r1_im: Vec<f64>,
    tmp: Vec<f64>,
    rhs: Vec<f64>,
}

impl ScspStepper {
    fn build(p: &Problem, alpha: f64, inner: &InnerSolveChoice) -> Result<Self> {
        let awt = p.w.linear_combination(alpha, 1.0, &p.t)?;
        let c1 = p.w.linear_combination(1.0, -alpha, &p.t)?;
        let n = p.n;
        let (f, g) = (&p.b.re, &p.b.im);
        let mut r1_re = vec![0.0; n];
        let mut r1_im = vec![0.0; n];
        combine(&mut r1_re, alpha, f, 1.0, g);
        combine(&mut r1_im, alpha, g, -1.0, f);
        Ok(Self {
            f_awt: factorize(&awt, inner)?,
            c1,
            r1_re,
            r1_im,
            tmp: vec![0.0; n],
            rhs: vec![0.0; n],
        })
    }
}

impl Stepper for ScspStepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()> {
        *z = TscspStepper::half_step(
            &self.f_awt,
            &self.c1,
            &self.r1_re,
            &self.r1_im,
            z,
            &mut self.tmp,
            &mut self.rhs,
        )?;
        Ok(())
    }

    fn inner_real_solves(&self) -> u64 {
        self.f_awt.solve_count()
    }
}

/// MHSS: `(aI + W) z½ = (aI - iT) z + b`, then
/// `(aI + T) z' = (aI + iW) z½ - ib`.
struct MhssStepper {
    f_aw: SpdFactorization,
    f_at: SpdFactorization,
    w: SparseSymMatrix,
    t: SparseSymMatrix,
    alpha: f64,
    b_re: Vec<f64>,
    b_im: Vec<f64>,
    tmp: Vec<f64>,
    rhs_re: Vec<f64>,
    rhs_im: Vec<f64>,
}

impl MhssStepper {
    fn build(p: &Problem, alpha: f64, inner: &InnerSolveChoice) -> Result<Self> {
        let aw = p.w.shift(1.0, alpha);
        let at = p.t.shift(1.0, alpha);
        Ok(Self {
            f_aw: factorize(&aw, inner)?,
            f_at: factorize(&at, inner)?,
            w: p.w.clone(),
            t: p.t.clone(),
            alpha,
            b_re: p.b.re.clone(),
            b_im: p.b.im.clone(),
            tmp: vec![0.0; p.n],
            rhs_re: vec![0.0; p.n],
            rhs_im: vec![0.0; p.n],
        })
    }
}

impl Stepper for MhssStepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()> {
        let a = self.alpha;
        let n = z.len();
        // (aI - iT)(x + iy) + b = (a x + T y + f) + i(a y - T x + g)
        self.t.spmv_into(&z.im, &mut self.tmp);
        for i in 0..n {
            self.rhs_re[i] = a * z.re[i] + self.tmp[i] + self.b_re[i];
        }
        self.t.spmv_into(&z.re, &mut self.tmp);
        for i in 0..n {
            self.rhs_im[i] = a * z.im[i] - self.tmp[i] + self.b_im[i];
        }
        let hre = self.f_aw.solve_real(&self.rhs_re)?;
        let him = self.f_aw.solve_real(&self.rhs_im)?;
        // (aI + iW)(x½ + iy½) - ib = (a x½ - W y½ + g) + i(a y½ + W x½ - f)
        self.w.spmv_into(&him, &mut self.tmp);
        for i in 0..n {
            self.rhs_re[i] = a * hre[i] - self.tmp[i] + self.b_im[i];
        }
        self.w.spmv_into(&hre, &mut self.tmp);
        for i in 0..n {
            self.rhs_im[i] = a * him[i] + self.tmp[i] - self.b_re[i];
        }
        z.re = self.f_at.solve_real(&self.rhs_re)?;
        z.im = self.f_at.solve_real(&self.rhs_im)?;
        Ok(())
    }

    fn inner_real_solves(&self) -> u64 {
        self.f_aw.solve_count() + self.f_at.solve_count()
    }
}

/// PMHSS with `V = W`: `((a+1) W) z½ = (aW - iT) z + b`, then
/// `(aW + T) z' = (a + i) W z½ - ib`. The first half-step factors `W` once
/// and folds the scalar `a + 1` into the solve.
struct PmhssStepper {
    f_w: SpdFactorization,
    f_awt: SpdFactorization,
    w: SparseSymMatrix,
    t: SparseSymMatrix,
    alpha: f64,
    b_re: Vec<f64>,
    b_im: Vec<f64>,
    tmp: Vec<f64>,
    tmp2: Vec<f64>,
    rhs_re: Vec<f64>,
    rhs_im: Vec<f64>,
}

impl PmhssStepper {
    fn build(p: &Problem, alpha: f64, inner: &InnerSolveChoice) -> Result<Self> {
        let awt = p.w.linear_combination(alpha, 1.0, &p.t)?;
        Ok(Self {
            f_w: factorize(&p.w, inner)?,
            f_awt: factorize(&awt, inner)?,
            w: p.w.clone(),
            t: p.t.clone(),
            alpha,
            b_re: p.b.re.clone(),
            b_im: p.b.im.clone(),
            tmp: vec![0.0; p.n],
            tmp2: vec![0.0; p.n],
            rhs_re: vec![0.0; p.n],
            rhs_im: vec![0.0; p.n],
        })
    }
}

impl Stepper for PmhssStepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()> {
        let a = self.alpha;
        let n = z.len();
        // (aW - iT)(x + iy) + b = (a Wx + Ty + f) + i(a Wy - Tx + g)
        self.w.spmv_into(&z.re, &mut self.tmp);
        self.t.spmv_into(&z.im, &mut self.tmp2);
        for i in 0..n {
            self.rhs_re[i] = a * self.tmp[i] + self.tmp2[i] + self.b_re[i];
        }
        self.w.spmv_into(&z.im, &mut self.tmp);
        self.t.spmv_into(&z.re, &mut self.tmp2);
        for i in 0..n {
            self.rhs_im[i] = a * self.tmp[i] - self.tmp2[i] + self.b_im[i];
        }
        let scale = 1.0 / (a + 1.0);
        let mut hre = self.f_w.solve_real(&self.rhs_re)?;
        let mut him = self.f_w.solve_real(&self.rhs_im)?;
        for v in hre.iter_mut().chain(him.iter_mut()) {
            *v *= scale;
        }
        // (a + i) W (x½ + iy½) - ib = (W(a x½ - y½) + g) + i(W(a y½ + x½) - f)
        combine(&mut self.tmp, a, &hre, -1.0, &him);
        self.w.spmv_into(&self.tmp.clone(), &mut self.tmp2);
        for i in 0..n {
            self.rhs_re[i] = self.tmp2[i] + self.b_im[i];
        }
        combine(&mut self.tmp, a, &him, 1.0, &hre);
        self.w.spmv_into(&self.tmp.clone(), &mut self.tmp2);
        for i in 0..n {
            self.rhs_im[i] = self.tmp2[i] - self.b_re[i];
        }
        z.re = self.f_awt.solve_real(&self.rhs_re)?;
        z.im = self.f_awt.solve_real(&self.rhs_im)?;
        Ok(())
    }

    fn inner_real_solves(&self) -> u64 {
        self.f_w.solve_count() + self.f_awt.solve_count()
    }
}

/// GSOR in real arithmetic, Gauss-Seidel ordering (the fresh `x` feeds the
/// `y` update): `W x' = (1-a) Wx + a Ty + a f`, `W y' = -a T x' + (1-a) Wy + a g`.
struct GsorStepper {
    f_w: SpdFactorization,
    w: SparseSymMatrix,
    t: SparseSymMatrix,
    alpha: f64,
    b_re: Vec<f64>,
    b_im: Vec<f64>,
    tmp: Vec<f64>,
    tmp2: Vec<f64>,
    rhs: Vec<f64>,
}

impl GsorStepper {
    fn build(p: &Problem, alpha: f64, inner: &InnerSolveChoice) -> Result<Self> {
        Ok(Self {
            f_w: factorize(&p.w, inner)?,
            w: p.w.clone(),
            t: p.t.clone(),
            alpha,
            b_re: p.b.re.clone(),
            b_im: p.b.im.clone(),
            tmp: vec![0.0; p.n],
            tmp2: vec![0.0; p.n],
            rhs: vec![0.0; p.n],
        })
    }
}

impl Stepper for GsorStepper {
    fn step(&mut self, z: &mut ComplexVector) -> Result<()> {
        let a = self.alpha;
        let n = z.len();
        self.w.spmv_into(&z.re, &mut self.tmp);
        self.t.spmv_into(&z.im, &mut self.tmp2);
        for i in 0..n {
            self.rhs[i] = (1.0 - a) * self.tmp[i] + a * self.tmp2[i] + a * self.b_re[i];
        }
        let x_new = self.f_w.solve_real(&self.rhs)?;
        self.t.spmv_into(&x_new, &mut self.tmp);
        self.w.spmv_into(&z.im, &mut self.tmp2);
        for i in 0..n {
            self.rhs[i] = -a * self.tmp[i] + (1.0 - a) * self.tmp2[i] + a * self.b_im[i];
        }
        z.im = self.f_w.solve_real(&self.rhs)?;
        z.re = x_new;
        Ok(())
    }

    fn inner_real_solves(&self) -> u64 {
        self.f_w.solve_count()
    }
}

fn build_stepper(p: &Problem, cfg: &SolverConfig) -> Result<Box<dyn Stepper>> {
    Ok(match cfg.method {
        MethodKind::Tscsp => Box::new(TscspStepper::build(p, cfg.alpha, &cfg.inner)?),
        MethodKind::Scsp => Box::new(ScspStepper::build(p, cfg.alpha, &cfg.inner)?),
        MethodKind::Mhss => Box::new(MhssStepper::build(p, cfg.alpha, &cfg.inner)?),
        MethodKind::Pmhss => Box::new(PmhssStepper::build(p, cfg.alpha, &cfg.inner)?),
        MethodKind::Gsor => Box::new(GsorStepper::build(p, cfg.alpha, &cfg.inner)?),
    })
}

/// Run the configured method from the null initial guess until the relative
/// residual drops below the tolerance, the divergence guard trips, or the
/// iteration cap is reached. The residual is evaluated after every full
/// outer iteration.
pub fn run(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if p.b.norm() == 0.0 {
        return Err(Error::ZeroRightHandSide);
    }
    let setup_watch = Stopwatch::start();
    let mut stepper = build_stepper(p, cfg)?;
    let setup_seconds = setup_watch.seconds();

    let mut z = ComplexVector::zeros(p.n);
    let mut history = cfg.record_history.then(|| vec![1.0]);
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    let mut relres = 1.0;
    let iterate_watch = Stopwatch::start();
    for k in 1..=cfg.max_iterations {
        stepper.step(&mut z)?;
        relres = residual_relnorm(&p.w, &p.t, &p.b, &z)?;
        if let Some(h) = history.as_mut() {
            h.push(relres);
        }
        iterations = k;
        if relres < cfg.tolerance {
            converged = true;
            break;
        }
        if !relres.is_finite() || relres > DIVERGENCE_GUARD {
            diverged = true;
            break;
        }
    }
    let iterate_seconds = iterate_watch.seconds();
    Ok(SolveReport {
        iterations,
        converged,
        diverged,
        final_relative_residual: relres,
        residual_history: history,
        setup_seconds,
        iterate_seconds,
        solution: z,
        inner_real_solves: stepper.inner_real_solves(),
    })
}

fn run_as(p: &Problem, cfg: &SolverConfig, expect: MethodKind) -> Result<SolveReport> {
    if cfg.method != expect {
        return Err(Error::InvalidConfig(format!(
            "config selects {} but {} was requested",
            cfg.method,
            expect.name()
        )));
    }
    run(p, cfg)
}

pub fn tscsp_solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    run_as(p, cfg, MethodKind::Tscsp)
}

pub fn scsp_solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    run_as(p, cfg, MethodKind::Scsp)
}

pub fn mhss_solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    run_as(p, cfg, MethodKind::Mhss)
}

pub fn pmhss_solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    run_as(p, cfg, MethodKind::Pmhss)
}

pub fn gsor_solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    run_as(p, cfg, MethodKind::Gsor)
}
