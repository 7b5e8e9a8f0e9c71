//! NPA moment-matrix upper bounds on quantum values of correlator-form
//! functionals in the `(2,2,2,2)` scenario.
//!
//! The moment matrix `Γ_{u,v} = ⟨u†v⟩` is indexed by operator words and
//! parametrized directly by one real variable per equality class of cells, so
//! the only constraint left is `Γ ⪰ 0`. Real symmetric matrices suffice here:
//! the functionals are real and every word's moment can be identified with
//! that of its adjoint.

mod sdp;
mod word;

pub use sdp::{SdpStatus, MAX_ITERATIONS};
pub use word::{adjoint, build_words, build_words_with, canonicalize, NpaLevel, Symbol, Word, WORD_LEVEL_GUARD};

use std::collections::HashMap;

use serde::Serialize;

use crate::bell::{BellFunctional, CorrelatorForm};
use crate::closed_form;
use crate::error::{Error, Result};

/// Default relative duality-gap target.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Smallest accepted tolerance.
pub const MIN_TOLERANCE: f64 = 1e-10;

/// Largest moment matrix accepted by [`solve_sdp`].
pub const MAX_MATRIX_SIZE: usize = 200;

/// Highest full level [`npa_bound`] solves without an override.
pub const BOUND_LEVEL_GUARD: u32 = 3;

/// Moment-matrix relaxation of one functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentProblem {
    pub level: NpaLevel,
    pub words: Vec<Word>,
    /// Representative word of each equality class; class 0 is the identity.
    pub classes: Vec<Word>,
    /// Row-major `N × N` map from cells to class indices.
    #[serde(skip)]
    pub cell_class: Vec<usize>,
    /// Objective weight of each class (index 0 unused).
    pub objective: Vec<f64>,
    /// Constant term of the functional.
    pub constant: f64,
}

impl MomentProblem {
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        self.cell_class[i * self.size() + j]
    }

    pub fn class_index(&self, w: &Word) -> Option<usize> {
        let key = class_key(w);
        self.classes.iter().position(|c| *c == key)
    }

    /// Classes with a nonzero objective weight.
    pub fn objective_support(&self) -> Vec<&Word> {
        self.classes
            .iter()
            .zip(&self.objective)
            .filter(|(_, w)| **w != 0.0)
            .map(|(c, _)| c)
            .collect()
    }
}

/// Representative of `{w, w†}`.
fn class_key(w: &Word) -> Word {
    let a = w.adjoint();
    if a < *w {
        a
    } else {
        w.clone()
    }
}

/// Builds the moment problem for a `(2,2,2,2)` functional.
pub fn build_moment_problem(f: &BellFunctional, level: NpaLevel) -> Result<MomentProblem> {
    build_moment_problem_with(f, level, false)
}

/// [`build_moment_problem`]; `allow_large` lifts the word-level guard.
pub fn build_moment_problem_with(
    f: &BellFunctional,
    level: NpaLevel,
    allow_large: bool,
) -> Result<MomentProblem> {
    if !f.scenario().is_chsh() {
        return Err(Error::UnsupportedScenario(f.scenario()));
    }
    let form = f.correlator_form()?;
    let words = build_words_with(level, allow_large)?;
    let n = words.len();

    let mut classes = vec![Word::identity()];
    let mut index: HashMap<Word, usize> = HashMap::from([(Word::identity(), 0)]);
    let mut cell_class = vec![0; n * n];
    for i in 0..n {
        let ui = words[i].adjoint();
        for j in 0..n {
            let key = class_key(&ui.mul(&words[j]));
            let next = classes.len();
            let k = *index.entry(key.clone()).or_insert_with(|| {
                classes.push(key);
                next
            });
            cell_class[i * n + j] = k;
        }
    }

    let mut objective = vec![0.0; classes.len()];
    let mut add = |symbols: &[Symbol], w: f64| -> Result<()> {
        if w == 0.0 {
            return Ok(());
        }
        let key = class_key(&Word::new(symbols));
        let k = *index
            .get(&key)
            .ok_or_else(|| Error::Solver(format!("moment {key} missing from the relaxation")))?;
        objective[k] += w;
        Ok(())
    };
    let CorrelatorForm {
        constant,
        alice,
        bob,
        correlators,
    } = form;
    for x in 0..2 {
        add(&[Symbol::alice(x)], alice[x])?;
        add(&[Symbol::bob(x)], bob[x])?;
        for y in 0..2 {
            add(&[Symbol::alice(x), Symbol::bob(y)], correlators[x][y])?;
        }
    }
    Ok(MomentProblem {
        level,
        words,
        classes,
        cell_class,
        objective,
        constant,
    })
}

/// Result of an NPA solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SdpResult {
    /// Certified upper bound on the functional over the relaxation.
    pub upper_bound: f64,
    /// Value of the returned moment matrix.
    pub attained: f64,
    /// `N × N` moment matrix of the final dual iterate.
    pub moment_matrix: Vec<Vec<f64>>,
    /// `upper_bound − attained`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    pub primal_residual: f64,
}

impl SdpResult {
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.moment_matrix.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.moment_matrix[i][j]);
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Maximizes the objective over PSD moment matrices.
pub fn solve_sdp(mp: &MomentProblem, tol: f64) -> Result<SdpResult> {
    if !(tol >= MIN_TOLERANCE) {
        return Err(Error::InvalidArgument(format!(
            "SDP tolerance must be at least {MIN_TOLERANCE:e}, got {tol:e}"
        )));
    }
    let n = mp.size();
    if n > MAX_MATRIX_SIZE {
        return Err(Error::LevelTooLarge(format!(
            "moment matrix of size {n} exceeds {MAX_MATRIX_SIZE}"
        )));
    }
    let m = mp.classes.len();
    let mut patterns = vec![Vec::new(); m - 1];
    for i in 0..n {
        for j in 0..n {
            let k = mp.class_of(i, j);
            if k > 0 {
                patterns[k - 1].push((i, j));
            }
        }
    }
    let b: Vec<f64> = mp.objective[1..].to_vec();
    let sol = sdp::solve(
        &sdp::SdpInput {
            n,
            patterns: &patterns,
            b: &b,
        },
        tol,
    );
    log::debug!(
        "NPA level {} (N = {n}, {} variables): bound {} after {} iterations, status {:?}",
        mp.level,
        m - 1,
        sol.upper_bound,
        sol.iterations,
        sol.status
    );

    let mut moment_matrix = vec![vec![0.0; n]; n];
    for (i, row) in moment_matrix.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let k = mp.class_of(i, j);
            *v = if k == 0 { 1.0 } else { sol.y[k - 1] };
        }
    }
    let upper = mp.constant + mp.objective[0] + sol.upper_bound;
    let attained = mp.constant + mp.objective[0] + sol.lower_bound;
    Ok(SdpResult {
        upper_bound: upper,
        attained,
        moment_matrix,
        duality_gap: upper - attained,
        iterations: sol.iterations,
        status: sol.status,
        primal_residual: sol.primal_residual,
    })
}

/// `C + α⟨A_0⟩ + β⟨B_0⟩` as a functional.
pub fn tilted_chsh_functional(alpha: f64, beta: f64) -> BellFunctional {
    BellFunctional::from_correlator_form(&CorrelatorForm {
        alice: [alpha, 0.0],
        bob: [beta, 0.0],
        correlators: [[1.0, 1.0], [1.0, -1.0]],
        ..Default::default()
    })
}

/// Options for [`npa_bound_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpaOptions {
    pub tol: f64,
    /// Permit full levels above [`BOUND_LEVEL_GUARD`].
    pub allow_high_level: bool,
}

impl Default for NpaOptions {
    fn default() -> Self {
        NpaOptions {
            tol: DEFAULT_TOLERANCE,
            allow_high_level: false,
        }
    }
}

/// NPA upper bound on the maximal quantum value of `C + α⟨A_0⟩ + β⟨B_0⟩`.
pub fn npa_bound(alpha: f64, beta: f64, level: NpaLevel) -> Result<f64> {
    Ok(npa_solve(alpha, beta, level, NpaOptions::default())?.upper_bound)
}

pub fn npa_bound_with(alpha: f64, beta: f64, level: NpaLevel, opts: NpaOptions) -> Result<f64> {
    Ok(npa_solve(alpha, beta, level, opts)?.upper_bound)
}

/// Full solve result for the doubly-tilted functional.
pub fn npa_solve(alpha: f64, beta: f64, level: NpaLevel, opts: NpaOptions) -> Result<SdpResult> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v >= 0.0) || v > 2.5 {
            return Err(Error::TiltOutOfRange {
                name,
                value: v,
                range: "[0, 2.5]",
            });
        }
    }
    if alpha + beta > 2.5 {
        return Err(Error::TiltOutOfRange {
            name: "alpha+beta",
            value: alpha + beta,
            range: "[0, 2.5]",
        });
    }
    if let NpaLevel::Full(k) = level {
        if k > BOUND_LEVEL_GUARD {
            if !opts.allow_high_level {
                return Err(Error::LevelTooLarge(format!(
                    "level {k} exceeds {BOUND_LEVEL_GUARD}; double precision limits the resolvable gap, pass an override to solve anyway"
                )));
            }
            log::warn!("solving NPA level {k}: gaps below ~1e-8 are not resolvable in double precision");
        }
    }
    let f = tilted_chsh_functional(alpha, beta);
    let mp = build_moment_problem_with(&f, level, opts.allow_high_level)?;
    solve_sdp(&mp, opts.tol)
}

/// Smallest level in `1, 1+AB, 2, …, max_level` whose bound is within
/// `gap_tol` of the closed-form maximum; `None` if no level qualifies.
pub fn min_tight_level(
    alpha: f64,
    beta: f64,
    gap_tol: f64,
    max_level: NpaLevel,
) -> Result<Option<NpaLevel>> {
    min_tight_level_with(alpha, beta, gap_tol, max_level, NpaOptions::default())
}

pub fn min_tight_level_with(
    alpha: f64,
    beta: f64,
    gap_tol: f64,
    max_level: NpaLevel,
    opts: NpaOptions,
) -> Result<Option<NpaLevel>> {
    let c_q = closed_form::max_quantum_value(alpha, beta)?;
    for level in NpaLevel::up_to(max_level) {
        let bound = npa_bound_with(alpha, beta, level, opts)?;
        if bound - c_q <= gap_tol {
            return Ok(Some(level));
        }
    }
    Ok(None)
}
