//! Finite graded slices of the Fock spaces, exact operator matrices, homology with
//! representatives, class membership and the `u`-adic conjugation check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::chiral::dch;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{Coefficient, Kind, Monomial, Sheaf, State, Symbol};
use crate::laurent::{LaurentVector, ULaurent};
use crate::linalg::{
    dense_rank, kernel, rank_fraction_free, solve, Echelon, SparseMatrix, SparseVec,
};
use crate::poisson::{
    classical_complexes, cohomology_differential, homology_differential, pi_contraction,
    PoissonStructure,
};
use crate::vops::Operator;

pub const DEFAULT_BASIS_CAP: usize = 200_000;
pub const BASIS_CAP_ENV: &str = "CHIRALIS_BASIS_CAP";
/// Largest slice on which ranks are recomputed by dense elimination.
pub const DENSE_CROSS_CHECK_MAX: usize = 300;

pub fn basis_cap_from_env() -> usize {
    std::env::var(BASIS_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BASIS_CAP)
}

/// Second grading of a slice besides weight and degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceGrading {
    /// Fixed charge in `Z^N`.
    Charge(Vec<i64>),
    /// Fixed torus weight, with the total `x_0` degree bounded (not certified).
    Truncated {
        torus: Vec<i64>,
        torus_weight: i64,
        max_x0_degree: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SliceSpec {
    pub sheaf: Sheaf,
    pub dim: usize,
    pub weight: i64,
    pub grading: SliceGrading,
    pub degree: i64,
    pub cap: usize,
}

impl SliceSpec {
    pub fn new(sheaf: Sheaf, dim: usize, weight: i64, charge: Vec<i64>, degree: i64) -> Self {
        assert_eq!(charge.len(), dim);
        SliceSpec {
            sheaf,
            dim,
            weight,
            grading: SliceGrading::Charge(charge),
            degree,
            cap: basis_cap_from_env(),
        }
    }

    pub fn truncated(
        sheaf: Sheaf,
        dim: usize,
        weight: i64,
        torus: Vec<i64>,
        torus_weight: i64,
        max_x0_degree: u32,
        degree: i64,
    ) -> Self {
        assert_eq!(torus.len(), dim);
        SliceSpec {
            sheaf,
            dim,
            weight,
            grading: SliceGrading::Truncated {
                torus,
                torus_weight,
                max_x0_degree,
            },
            degree,
            cap: basis_cap_from_env(),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Slice of a nonzero homogeneous state.
    pub fn of_state(s: &State) -> Result<Self> {
        let (Some(w), Some(c), Some(d)) = (s.weight(), s.charge(), s.degree()) else {
            return Err(Error::Inhomogeneous(s.to_string()));
        };
        Ok(SliceSpec::new(s.sheaf(), s.dim(), w, c, d))
    }

    pub fn charge(&self) -> Option<&[i64]> {
        match &self.grading {
            SliceGrading::Charge(c) => Some(c),
            SliceGrading::Truncated { .. } => None,
        }
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.grading, SliceGrading::Truncated { .. })
    }

    /// The slice reached by an operator of the given shift.
    pub fn shifted(&self, weight: i64, degree: i64, charge: &[i64]) -> SliceSpec {
        let grading = match &self.grading {
            SliceGrading::Charge(c) => {
                SliceGrading::Charge(c.iter().zip(charge).map(|(a, b)| a + b).collect())
            }
            SliceGrading::Truncated {
                torus,
                torus_weight,
                max_x0_degree,
            } => SliceGrading::Truncated {
                torus: torus.clone(),
                torus_weight: torus_weight
                    + charge.iter().zip(torus).map(|(a, b)| a * b).sum::<i64>(),
                max_x0_degree: *max_x0_degree,
            },
        };
        SliceSpec {
            weight: self.weight + weight,
            degree: self.degree + degree,
            grading,
            ..self.clone()
        }
    }

    fn contains(&self, m: &Monomial) -> bool {
        if m.weight() != self.weight || m.degree(self.sheaf) != self.degree {
            return false;
        }
        let c = m.charge(self.dim);
        match &self.grading {
            SliceGrading::Charge(target) => c == *target,
            SliceGrading::Truncated {
                torus,
                torus_weight,
                max_x0_degree,
            } => {
                c.iter().zip(torus).map(|(a, b)| a * b).sum::<i64>() == *torus_weight
                    && x0_degree(m) <= *max_x0_degree
            }
        }
    }
}

impl fmt::Display for SliceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sheaf = match self.sheaf {
            Sheaf::Omega => "omega",
            Sheaf::Theta => "theta",
        };
        match &self.grading {
            SliceGrading::Charge(c) => {
                write!(f, "{sheaf} n={} c={:?} d={}", self.weight, c, self.degree)
            }
            SliceGrading::Truncated {
                torus_weight,
                max_x0_degree,
                ..
            } => write!(
                f,
                "{sheaf} n={} t={} d={} (x0 degree <= {})",
                self.weight, torus_weight, self.degree, max_x0_degree
            ),
        }
    }
}

fn x0_degree(m: &Monomial) -> u32 {
    m.factors()
        .iter()
        .filter(|(s, _)| s.kind == Kind::X && s.weight == 0)
        .map(|(_, e)| e)
        .sum()
}

/// Creation symbols of positive weight at most `n`.
fn positive_symbols(sheaf: Sheaf, dim: usize, n: i64) -> Vec<Symbol> {
    let mut out = Vec::new();
    for coord in 1..=dim {
        for kind in Kind::ALL {
            let lo = sheaf.min_weight(kind).max(1);
            for w in lo..=n {
                out.push(Symbol::new(kind, coord, w as u32));
            }
        }
    }
    out
}

/// Odd creation symbols of weight 0.
fn zero_weight_fermion(sheaf: Sheaf) -> Kind {
    match sheaf {
        Sheaf::Omega => Kind::Phi,
        Sheaf::Theta => Kind::Psi,
    }
}

fn multisets(
    symbols: &[Symbol],
    start: usize,
    remaining: i64,
    current: &mut Vec<Symbol>,
    out: &mut Vec<Vec<Symbol>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for idx in start..symbols.len() {
        let s = symbols[idx];
        let w = s.weight as i64;
        if w > remaining {
            continue;
        }
        if s.is_odd() && current.last() == Some(&s) {
            continue;
        }
        current.push(s);
        // odd symbols may not repeat; bosons may
        let next = if s.is_odd() { idx + 1 } else { idx };
        multisets(symbols, next, remaining - w, current, out);
        current.pop();
    }
}

/// Monomials of weight `n` with every positive-weight factor and weight-0 fermion fixed,
/// `x_0` factors left open: returns (positive and fermion symbols, their charge).
fn skeletons(sheaf: Sheaf, dim: usize, n: i64) -> Vec<(Vec<Symbol>, Vec<i64>)> {
    let symbols = positive_symbols(sheaf, dim, n);
    let mut pos = Vec::new();
    multisets(&symbols, 0, n, &mut Vec::new(), &mut pos);
    let kind0 = zero_weight_fermion(sheaf);
    let mut out = Vec::new();
    for p in pos {
        for mask in 0u32..(1 << dim) {
            let mut syms = p.clone();
            for i in 1..=dim {
                if mask & (1 << (i - 1)) != 0 {
                    syms.push(Symbol::new(kind0, i, 0));
                }
            }
            let mut charge = vec![0; dim];
            for s in &syms {
                charge[s.coord - 1] += s.kind.charge_sign();
            }
            out.push((syms, charge));
        }
    }
    out
}

fn x0_monomials(dim: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for e in &exps {
            let used: u32 = e.iter().sum();
            for k in 0..=(max_deg - used) {
                let mut f = e.clone();
                f.push(k);
                next.push(f);
            }
        }
        exps = next;
    }
    exps
}

fn assemble(syms: &[Symbol], x0: &[u32]) -> Monomial {
    let mut all = syms.to_vec();
    for (i, e) in x0.iter().enumerate() {
        for _ in 0..*e {
            all.push(Symbol::new(Kind::X, i + 1, 0));
        }
    }
    Monomial::from_product(&all).expect("no repeated fermion").1
}

/// Complete, duplicate-free, sorted monomial basis of a slice.
pub fn enumerate_basis(s: &SliceSpec) -> Result<Vec<Monomial>> {
    let mut out = BTreeSet::new();
    if s.weight < 0 {
        return Ok(Vec::new());
    }
    for (syms, charge) in skeletons(s.sheaf, s.dim, s.weight) {
        match &s.grading {
            SliceGrading::Charge(target) => {
                let rest: Vec<i64> = target.iter().zip(&charge).map(|(t, c)| t - c).collect();
                if rest.iter().any(|r| *r < 0) {
                    continue;
                }
                let x0: Vec<u32> = rest.iter().map(|r| *r as u32).collect();
                let m = assemble(&syms, &x0);
                if s.contains(&m) {
                    out.insert(m);
                }
            }
            SliceGrading::Truncated { max_x0_degree, .. } => {
                for x0 in x0_monomials(s.dim, *max_x0_degree) {
                    let m = assemble(&syms, &x0);
                    if s.contains(&m) {
                        out.insert(m);
                    }
                }
            }
        }
        if out.len() > s.cap {
            return Err(Error::SliceOverflow { cap: s.cap });
        }
    }
    Ok(out.into_iter().collect())
}

/// Cohomological degrees occurring at the given weight and charge.
pub fn degrees_present(sheaf: Sheaf, dim: usize, weight: i64, charge: &[i64]) -> Vec<i64> {
    let mut out = BTreeSet::new();
    for (syms, c) in skeletons(sheaf, dim, weight) {
        if c.iter().zip(charge).all(|(a, b)| a <= b) {
            let m = assemble(&syms, &vec![0; dim]);
            out.insert(m.degree(sheaf));
        }
    }
    out.into_iter().collect()
}

/// A slice basis with its coordinate index.
#[derive(Clone, Debug)]
pub struct Basis {
    pub spec: SliceSpec,
    pub monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl Basis {
    pub fn new(spec: &SliceSpec) -> Result<Self> {
        let monomials = enumerate_basis(spec)?;
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Ok(Basis {
            spec: spec.clone(),
            monomials,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn state(&self, i: usize) -> State {
        State::from_monomial(
            self.spec.sheaf,
            self.spec.dim,
            self.monomials[i].clone(),
            Coefficient::one(),
        )
    }

    /// Coordinates of `s`; monomials beyond an x_0 truncation are dropped.
    pub fn coordinates(&self, s: &State) -> Result<SparseVec> {
        let mut v = SparseVec::new();
        for (m, c) in s.terms() {
            match self.index.get(m) {
                Some(i) => {
                    v.insert(*i, c.clone());
                }
                None => {
                    let beyond = match &self.spec.grading {
                        SliceGrading::Truncated { max_x0_degree, .. } => {
                            x0_degree(m) > *max_x0_degree
                        }
                        SliceGrading::Charge(_) => false,
                    };
                    if !beyond {
                        return Err(Error::GradingMismatch(format!(
                            "{m} is not in slice {}",
                            self.spec
                        )));
                    }
                }
            }
        }
        Ok(v)
    }

    pub fn vector_state(&self, v: &SparseVec) -> State {
        let terms = v
            .iter()
            .map(|(i, c)| (self.monomials[*i].clone(), c.clone()));
        State::from_terms(self.spec.sheaf, self.spec.dim, terms)
    }
}

/// Exact matrix of an operator from one slice to its codomain slice.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub domain: Basis,
    pub codomain: Basis,
    pub matrix: SparseMatrix,
}

impl OperatorMatrix {
    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

fn infer_codomain(op: &Operator, domain: &SliceSpec, images: &[State]) -> Result<SliceSpec> {
    if let Some(sh) = op.shift(domain.sheaf, domain.dim) {
        return Ok(domain.shifted(sh.weight, sh.degree, &sh.charge));
    }
    let Some(first) = images.iter().find(|s| !s.is_zero()) else {
        return Ok(domain.clone());
    };
    let (m, _) = first.terms().iter().next().unwrap();
    let dw = m.weight() - domain.weight;
    let dd = m.degree(domain.sheaf) - domain.degree;
    match &domain.grading {
        SliceGrading::Charge(c) => {
            let dc: Vec<i64> = m
                .charge(domain.dim)
                .iter()
                .zip(c)
                .map(|(a, b)| a - b)
                .collect();
            Ok(domain.shifted(dw, dd, &dc))
        }
        SliceGrading::Truncated {
            torus,
            torus_weight,
            ..
        } => {
            let t: i64 = m
                .charge(domain.dim)
                .iter()
                .zip(torus)
                .map(|(a, b)| a * b)
                .sum();
            let mut out = domain.shifted(dw, dd, &vec![0; domain.dim]);
            if let SliceGrading::Truncated {
                torus_weight: tw, ..
            } = &mut out.grading
            {
                *tw += t - torus_weight;
            }
            Ok(out)
        }
    }
}

/// Matrix of `op` on `domain`, sequentially.
pub fn operator_matrix(op: &Operator, domain: &SliceSpec) -> Result<OperatorMatrix> {
    operator_matrix_with(op, &Basis::new(domain)?, Execution::Sequential)
}

pub fn operator_matrix_with(
    op: &Operator,
    domain: &Basis,
    exec: Execution,
) -> Result<OperatorMatrix> {
    let idx: Vec<usize> = (0..domain.len()).collect();
    let images: Vec<State> = exec.map(&idx, |i| op.apply(&domain.state(*i)));
    let cod_spec = infer_codomain(op, &domain.spec, &images)?;
    let codomain = if cod_spec == domain.spec {
        domain.clone()
    } else {
        Basis::new(&cod_spec)?
    };
    let mut columns = Vec::with_capacity(images.len());
    for img in &images {
        columns.push(codomain.coordinates(img)?);
    }
    Ok(OperatorMatrix {
        matrix: SparseMatrix {
            rows: codomain.len(),
            cols: domain.len(),
            columns,
        },
        domain: domain.clone(),
        codomain,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    ChiralPoissonHomology,
    ChiralPoissonCohomology,
    ChiralDeRham,
    ClassicalPoissonHomology,
    ClassicalPoissonCohomology,
    ClassicalDeRham,
}

impl ComplexKind {
    pub const ALL: [ComplexKind; 6] = [
        ComplexKind::ChiralPoissonHomology,
        ComplexKind::ChiralPoissonCohomology,
        ComplexKind::ChiralDeRham,
        ComplexKind::ClassicalPoissonHomology,
        ComplexKind::ClassicalPoissonCohomology,
        ComplexKind::ClassicalDeRham,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::ChiralPoissonHomology => "chiral-poisson-homology",
            ComplexKind::ChiralPoissonCohomology => "chiral-poisson-cohomology",
            ComplexKind::ChiralDeRham => "chiral-de-rham",
            ComplexKind::ClassicalPoissonHomology => "classical-poisson-homology",
            ComplexKind::ClassicalPoissonCohomology => "classical-poisson-cohomology",
            ComplexKind::ClassicalDeRham => "classical-de-rham",
        }
    }

    pub fn parse(s: &str) -> Option<ComplexKind> {
        ComplexKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn sheaf(self) -> Sheaf {
        match self {
            ComplexKind::ChiralPoissonCohomology | ComplexKind::ClassicalPoissonCohomology => {
                Sheaf::Theta
            }
            _ => Sheaf::Omega,
        }
    }

    pub fn is_classical(self) -> bool {
        matches!(
            self,
            ComplexKind::ClassicalPoissonHomology
                | ComplexKind::ClassicalPoissonCohomology
                | ComplexKind::ClassicalDeRham
        )
    }

    pub fn degree_shift(self) -> i64 {
        match self {
            ComplexKind::ChiralPoissonHomology | ComplexKind::ClassicalPoissonHomology => -1,
            _ => 1,
        }
    }
}

/// A complex together with the Poisson structure defining it.
#[derive(Clone)]
pub struct ComplexSpec {
    pub kind: ComplexKind,
    pub poisson: PoissonStructure,
    differential: Operator,
    charge_shift: Option<Vec<i64>>,
}

impl fmt::Debug for ComplexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexSpec({}, {:?})",
            self.kind.name(),
            self.poisson.pi
        )
    }
}

impl ComplexSpec {
    pub fn new(kind: ComplexKind, poisson: &PoissonStructure) -> Self {
        let dim = poisson.dim;
        let (differential, charge_shift) = match kind {
            ComplexKind::ChiralDeRham => (dch(dim), Some(vec![0; dim])),
            ComplexKind::ClassicalDeRham => {
                (classical_complexes(poisson).de_rham, Some(vec![0; dim]))
            }
            ComplexKind::ChiralPoissonHomology => {
                (homology_differential(poisson), pi_charge(poisson))
            }
            ComplexKind::ChiralPoissonCohomology => {
                (cohomology_differential(poisson), pi_charge(poisson))
            }
            ComplexKind::ClassicalPoissonHomology => (
                classical_complexes(poisson).koszul_brylinski,
                pi_charge(poisson),
            ),
            ComplexKind::ClassicalPoissonCohomology => (
                classical_complexes(poisson).lichnerowicz,
                pi_charge(poisson),
            ),
        };
        ComplexSpec {
            kind,
            poisson: poisson.clone(),
            differential,
            charge_shift,
        }
    }

    pub fn differential(&self) -> &Operator {
        &self.differential
    }

    pub fn sheaf(&self) -> Sheaf {
        self.kind.sheaf()
    }

    /// Charge shift of the differential; `None` when pi is not charge homogeneous.
    pub fn charge_shift(&self) -> Option<&[i64]> {
        self.charge_shift.as_deref()
    }

    fn check_slice(&self, s: &SliceSpec) -> Result<()> {
        if s.sheaf != self.sheaf() || s.dim != self.poisson.dim {
            return Err(Error::SheafMismatch(format!(
                "{} does not act on slice {s}",
                self.kind.name()
            )));
        }
        if self.kind.is_classical() && s.weight != 0 {
            return Err(Error::Unsupported(format!(
                "{} lives in conformal weight 0",
                self.kind.name()
            )));
        }
        if s.charge().is_some() && self.charge_shift.is_none() {
            return Err(Error::Unsupported(
                "pi is not charge homogeneous; use a truncated torus slice".into(),
            ));
        }
        Ok(())
    }

    fn neighbour(&self, s: &SliceSpec, sign: i64) -> SliceSpec {
        let dc: Vec<i64> = match &self.charge_shift {
            Some(c) => c.iter().map(|x| sign * x).collect(),
            None => vec![0; s.dim],
        };
        let mut out = s.shifted(0, sign * self.kind.degree_shift(), &dc);
        if self.charge_shift.is_none() {
            if let (SliceGrading::Truncated { torus_weight, .. }, Some(Some(t))) =
                (&mut out.grading, self.poisson.torus_weight().ok())
            {
                *torus_weight += sign * t;
            }
        }
        out
    }

    /// The slice mapping into `s`.
    pub fn previous(&self, s: &SliceSpec) -> SliceSpec {
        self.neighbour(s, -1)
    }

    pub fn next(&self, s: &SliceSpec) -> SliceSpec {
        self.neighbour(s, 1)
    }

    fn matrix(&self, from: &Basis, to: &Basis, exec: Execution) -> Result<SparseMatrix> {
        let idx: Vec<usize> = (0..from.len()).collect();
        let images: Vec<State> = exec.map(&idx, |i| self.differential.apply(&from.state(*i)));
        let mut columns = Vec::with_capacity(images.len());
        for img in &images {
            columns.push(to.coordinates(img)?);
        }
        Ok(SparseMatrix {
            rows: to.len(),
            cols: from.len(),
            columns,
        })
    }
}

fn pi_charge(p: &PoissonStructure) -> Option<Vec<i64>> {
    if p.is_zero() {
        Some(vec![0; p.dim])
    } else {
        p.charge_shift()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub complex: ComplexKind,
    pub slice: SliceSpec,
    pub basis_size: usize,
    pub rank_incoming: usize,
    pub rank_outgoing: usize,
    pub kernel_dim: usize,
    pub homology_dim: usize,
    pub representatives: Vec<String>,
    /// Ranks recomputed by dense elimination (slices up to 300 basis elements).
    pub dense_cross_checked: bool,
    pub truncated: bool,
}

fn checked_rank(m: &SparseMatrix) -> Result<(usize, bool)> {
    let r = rank_fraction_free(m);
    if m.rows.max(m.cols) <= DENSE_CROSS_CHECK_MAX && m.rows > 0 && m.cols > 0 {
        let d = dense_rank(&m.to_dense());
        if d != r {
            return Err(Error::GradingMismatch(format!(
                "sparse rank {r} and dense rank {d} disagree"
            )));
        }
        return Ok((r, true));
    }
    Ok((r, m.rows == 0 || m.cols == 0))
}

/// Homology of `c` at slice `s` on the three-term window.
pub fn homology(c: &ComplexSpec, s: &SliceSpec) -> Result<HomologyReport> {
    homology_with(c, s, Execution::Sequential)
}

pub fn homology_with(c: &ComplexSpec, s: &SliceSpec, exec: Execution) -> Result<HomologyReport> {
    c.check_slice(s)?;
    let here = Basis::new(s)?;
    let prev = Basis::new(&c.previous(s))?;
    let next = Basis::new(&c.next(s))?;
    let d_in = c.matrix(&prev, &here, exec)?;
    let d_out = c.matrix(&here, &next, exec)?;
    let (rank_in, dense_in) = checked_rank(&d_in)?;
    let (rank_out, dense_out) = checked_rank(&d_out)?;
    if !s.is_truncated() && !d_out.mul(&d_in).is_zero() {
        return Err(Error::GradingMismatch(format!(
            "{} does not square to zero at {s}",
            c.kind.name()
        )));
    }
    let ker = kernel(&d_out);
    let kernel_dim = ker.len();
    if kernel_dim + rank_out != here.len() {
        return Err(Error::GradingMismatch("rank-nullity failed".into()));
    }
    // canonical representatives: kernel vectors reduced against the image
    let mut image = Echelon::new();
    for col in &d_in.columns {
        image.insert_untracked(col);
    }
    let mut reps = Vec::new();
    for v in &ker {
        let (r, _) = image.reduce(v);
        if let Some(residual) = image.insert_untracked(&r) {
            let _ = residual;
            reps.push(r);
        }
    }
    let homology_dim = kernel_dim.saturating_sub(rank_in);
    if reps.len() != homology_dim {
        return Err(Error::GradingMismatch(format!(
            "found {} representatives for homology of dimension {homology_dim}",
            reps.len()
        )));
    }
    for r in &reps {
        if !d_out.mul_vec(r).is_empty() {
            return Err(Error::GradingMismatch(
                "representative is not closed".into(),
            ));
        }
    }
    Ok(HomologyReport {
        complex: c.kind,
        slice: s.clone(),
        basis_size: here.len(),
        rank_incoming: rank_in,
        rank_outgoing: rank_out,
        kernel_dim,
        homology_dim,
        representatives: reps
            .iter()
            .map(|r| here.vector_state(r).to_string())
            .collect(),
        dense_cross_checked: dense_in && dense_out,
        truncated: s.is_truncated(),
    })
}

/// Homology on many slices, returned in input order.
pub fn homology_batch(
    c: &ComplexSpec,
    slices: &[SliceSpec],
    exec: Execution,
) -> Result<Vec<HomologyReport>> {
    exec.map(slices, |s| homology_with(c, s, Execution::Sequential))
        .into_iter()
        .collect()
}

/// Every (charge, degree) slice of weight `n` with `|c_i| <= bound`.
pub fn charge_window(sheaf: Sheaf, dim: usize, n: i64, bound: i64) -> Vec<SliceSpec> {
    let mut charges: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        charges = charges
            .into_iter()
            .flat_map(|c| {
                (-bound..=bound).map(move |x| {
                    let mut d = c.clone();
                    d.push(x);
                    d
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for c in charges {
        for d in degrees_present(sheaf, dim, n, &c) {
            out.push(SliceSpec::new(sheaf, dim, n, c.clone(), d));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassStatus {
    NotClosed(State),
    Exact(State),
    Nontrivial,
}

/// Decide whether a homogeneous state is closed, exact (with witness) or a nontrivial class.
pub fn class_check(c: &ComplexSpec, a: &State) -> Result<ClassStatus> {
    let s = SliceSpec::of_state(a)?;
    c.check_slice(&s)?;
    let da = c.differential.apply(a);
    if !da.is_zero() {
        return Ok(ClassStatus::NotClosed(da));
    }
    let here = Basis::new(&s)?;
    let prev = Basis::new(&c.previous(&s))?;
    let d_in = c.matrix(&prev, &here, Execution::Sequential)?;
    let target = here.coordinates(a)?;
    match solve(&d_in, &target) {
        Some(x) => {
            let w = prev.vector_state(&x);
            debug_assert_eq!(c.differential.apply(&w), *a);
            Ok(ClassStatus::Exact(w))
        }
        None => Ok(ClassStatus::Nontrivial),
    }
}

/// Outcome of the `u`-adic conjugation check on one slice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct S1Check {
    pub slice: SliceSpec,
    pub basis_size: usize,
    /// `exp(-iota/u) d exp(iota/u) = d + u^-1 L`, equivalently
    /// `exp(iota/u) (d + u^-1 L) exp(-iota/u) = d`
    pub conjugation: bool,
    /// `exp(iota/u) d exp(-iota/u) = d + u^-1 L` read literally
    pub reversed_exponents: bool,
    /// largest `k` with `iota^k` nonzero on the slice
    pub nilpotency: usize,
}

const NILPOTENCY_LIMIT: usize = 64;

/// `exp(sign * iota / u) v` for `v = coefficient * state`; `u^-1` is power `-1`.
fn exp_iota(
    iota: &Operator,
    v: &LaurentVector,
    sheaf: Sheaf,
    dim: usize,
    sign: i64,
) -> Result<(LaurentVector, usize)> {
    let mut out = v.clone();
    let mut depth = 0;
    // work power by power: v = sum_p u^p s_p
    let mut by_power: BTreeMap<i64, State> = BTreeMap::new();
    for (m, a) in v.entries() {
        for (p, c) in a.terms() {
            let e = by_power
                .entry(*p)
                .or_insert_with(|| State::zero(sheaf, dim));
            *e = e.add(&State::from_monomial(sheaf, dim, m.clone(), c.clone()))?;
        }
    }
    for (p, s) in by_power {
        let mut term = s;
        let mut fact = Coefficient::one();
        for k in 1..=NILPOTENCY_LIMIT {
            term = iota.apply(&term);
            if term.is_zero() {
                depth = depth.max(k - 1);
                break;
            }
            if k == NILPOTENCY_LIMIT {
                return Err(Error::Unsupported(
                    "contraction is not nilpotent on the slice".into(),
                ));
            }
            fact *= Coefficient::from_integer(k.into());
            let c = Coefficient::from_integer((sign.pow(k as u32)).into()) / &fact;
            out.add_state(&term, &ULaurent::monomial(p - k as i64, c));
        }
    }
    Ok((out, depth))
}

fn apply_laurent(op: &Operator, v: &LaurentVector, sheaf: Sheaf, dim: usize) -> LaurentVector {
    let mut out = LaurentVector::zero();
    for (m, a) in v.entries() {
        let img = op.apply(&State::from_monomial(
            sheaf,
            dim,
            m.clone(),
            Coefficient::one(),
        ));
        out.add_state(&img, a);
    }
    out
}

/// Verify the conjugation of the chiral de Rham differential by `exp(iota(pi, 0)/u)` as exact
/// Laurent matrices on the slice.
pub fn s1_conjugation_check(p: &PoissonStructure, s: &SliceSpec) -> Result<S1Check> {
    if s.sheaf != Sheaf::Omega || s.dim != p.dim {
        return Err(Error::SheafMismatch(format!("s1 check on slice {s}")));
    }
    let basis = Basis::new(s)?;
    let d = dch(p.dim);
    let iota = pi_contraction(p);
    let l = homology_differential(p);
    let mut conjugation = true;
    let mut reversed = true;
    let mut nilpotency = 0;
    for i in 0..basis.len() {
        let b = LaurentVector::from_state(&basis.state(i), 0);
        let rhs = {
            let mut r = apply_laurent(&d, &b, s.sheaf, s.dim);
            r.add_state(
                &l.apply(&basis.state(i)),
                &ULaurent::monomial(-1, Coefficient::one()),
            );
            r
        };
        for (sign, flag) in [(1, &mut conjugation), (-1, &mut reversed)] {
            let (e1, k1) = exp_iota(&iota, &b, s.sheaf, s.dim, sign)?;
            let de = apply_laurent(&d, &e1, s.sheaf, s.dim);
            let (lhs, k2) = exp_iota(&iota, &de, s.sheaf, s.dim, -sign)?;
            nilpotency = nilpotency.max(k1).max(k2);
            if !lhs.sub(&rhs).is_zero() {
                *flag = false;
            }
        }
    }
    Ok(S1Check {
        slice: s.clone(),
        basis_size: basis.len(),
        conjugation,
        reversed_exponents: reversed,
        nilpotency,
    })
}

/// Slices of weight `n` touched by the conjugation check starting at weight `n`, every charge
/// and degree with `|c_i| <= bound`.
pub fn s1_slices(dim: usize, n: i64, bound: i64) -> Vec<SliceSpec> {
    charge_window(Sheaf::Omega, dim, n, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chiral::virasoro;
    use crate::classical::{de_rham, monomials, SuperPoly};
    use crate::fock::rat;
    use crate::vops::mode_operator;

    /// Independent count: number of monomials by brute-force generation of all products of
    /// symbols of weight <= n, x_0 exponents <= bound, filtered by grading.
    fn brute_count(sheaf: Sheaf, dim: usize, n: i64, charge: &[i64], degree: i64) -> usize {
        let mut syms = Vec::new();
        for coord in 1..=dim {
            for kind in Kind::ALL {
                for w in sheaf.min_weight(kind)..=n {
                    syms.push(Symbol::new(kind, coord, w as u32));
                }
            }
        }
        let bound = 6u32;
        let mut count = 0;
        fn rec(
            syms: &[Symbol],
            i: usize,
            acc: &mut Vec<Symbol>,
            wt: i64,
            n: i64,
            bound: u32,
            f: &mut dyn FnMut(&[Symbol]),
        ) {
            if wt > n {
                return;
            }
            if i == syms.len() {
                f(acc);
                return;
            }
            let s = syms[i];
            let max = if s.is_odd() {
                1
            } else if s.weight == 0 {
                bound
            } else {
                (n / s.weight as i64) as u32
            };
            for e in 0..=max {
                for _ in 0..e {
                    acc.push(s);
                }
                rec(
                    syms,
                    i + 1,
                    acc,
                    wt + e as i64 * s.weight as i64,
                    n,
                    bound,
                    f,
                );
                for _ in 0..e {
                    acc.pop();
                }
            }
        }
        rec(
            &syms,
            0,
            &mut Vec::new(),
            0,
            n,
            bound,
            &mut |a: &[Symbol]| {
                let (_, m) = Monomial::from_product(a).unwrap();
                if m.weight() == n && m.charge(dim) == charge && m.degree(sheaf) == degree {
                    count += 1;
                }
            },
        );
        count
    }

    #[test]
    fn basis_counts_match_brute_force() {
        for sheaf in [Sheaf::Omega, Sheaf::Theta] {
            for n in 0..=2 {
                for c in [vec![0, 0], vec![1, 0], vec![-1, 1], vec![2, -1]] {
                    for d in -3..=3 {
                        let s = SliceSpec::new(sheaf, 2, n, c.clone(), d);
                        let b = enumerate_basis(&s).unwrap();
                        assert_eq!(b.len(), brute_count(sheaf, 2, n, &c, d), "{s}");
                        let set: BTreeSet<_> = b.iter().collect();
                        assert_eq!(set.len(), b.len());
                    }
                }
            }
        }
    }

    #[test]
    fn small_bases() {
        let s = SliceSpec::new(Sheaf::Omega, 2, 0, vec![0, 0], 0);
        assert_eq!(enumerate_basis(&s).unwrap(), vec![Monomial::one()]);
        let s = SliceSpec::new(Sheaf::Omega, 2, 1, vec![0, 0], 0);
        let names: Vec<String> = enumerate_basis(&s)
            .unwrap()
            .iter()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(
            names,
            vec!["x1_0*y1_1", "phi1_0*psi1_1", "x2_0*y2_1", "phi2_0*psi2_1"]
        );
        let capped = s.clone().with_cap(1);
        assert!(matches!(
            enumerate_basis(&capped),
            Err(Error::SliceOverflow { cap: 1 })
        ));
    }

    #[test]
    fn grading_operator_is_weight() {
        let l1 = mode_operator(&virasoro(2), 1);
        for n in 0..=2 {
            for s in charge_window(Sheaf::Omega, 2, n, 1) {
                let m = operator_matrix(&l1, &s).unwrap();
                for (j, col) in m.matrix.columns.iter().enumerate() {
                    let mut expect = SparseVec::new();
                    if n != 0 {
                        expect.insert(j, rat(n));
                    }
                    assert_eq!(*col, expect, "{s}");
                }
            }
        }
    }

    #[test]
    fn dch_weight_zero_is_de_rham() {
        let d = dch(2);
        for m in monomials(2, 3) {
            let s = m.to_state(Sheaf::Omega);
            assert_eq!(SuperPoly::from_state(&d.apply(&s)).unwrap(), de_rham(&m));
        }
        let zero = Operator::zero(Sheaf::Omega, 2);
        let s = SliceSpec::new(Sheaf::Omega, 2, 1, vec![1, 0], 0);
        assert!(operator_matrix(&zero, &s).unwrap().is_zero());
    }

    #[test]
    fn de_rham_of_line() {
        let p = PoissonStructure::zero(1);
        let c = ComplexSpec::new(ComplexKind::ChiralDeRham, &p);
        for n in 0..=2 {
            for s in charge_window(Sheaf::Omega, 1, n, 3) {
                let r = homology(&c, &s).unwrap();
                let expect = usize::from(n == 0 && s.degree == 0 && s.charge() == Some(&[0][..]));
                assert_eq!(r.homology_dim, expect, "{s}");
            }
        }
    }

    #[test]
    fn de_rham_classes() {
        let p = PoissonStructure::zero(1);
        let c = ComplexSpec::new(ComplexKind::ChiralDeRham, &p);
        let phi = State::generator(Sheaf::Omega, 1, Kind::Phi, 1, 0).unwrap();
        let x = State::generator(Sheaf::Omega, 1, Kind::X, 1, 0).unwrap();
        assert_eq!(
            class_check(&c, &phi).unwrap(),
            ClassStatus::Exact(x.clone())
        );
        assert!(matches!(
            class_check(&c, &x).unwrap(),
            ClassStatus::NotClosed(_)
        ));
        let d = c.differential().apply(&x.poly_mul(&x).unwrap());
        assert!(matches!(
            class_check(&c, &d).unwrap(),
            ClassStatus::Exact(_)
        ));
    }

    #[test]
    fn s1_trivial_for_zero_pi() {
        let p = PoissonStructure::zero(2);
        let s = SliceSpec::new(Sheaf::Omega, 2, 1, vec![0, 0], 0);
        let r = s1_conjugation_check(&p, &s).unwrap();
        assert!(r.conjugation && r.reversed_exponents);
    }
}
