//! Subcommand implementations. Each returns the rows it prints.

use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use dirichlet_core::constants::{constant_a, euler_product, inverse_d_phi_series, ozluk_constant, ProductSpec, MEAN_N_OVER_PHI};
use dirichlet_core::lfun::{find_zeros, lfunction_data};
use dirichlet_core::simplezeros::{simple_zero_bound, KernelSpec};
use dirichlet_core::stats::{
    bdh_variance, explicit_formula, f_phi_weighted, n_phi_weighted, s_decomposition, s_diag_main_term,
    pair_correlation_prediction, PairCorrConfig, StatKind, StatResult, WeightedFamily,
};
use dirichlet_core::{character_group, SmoothWeight, TestFunction};

use crate::cache::{CacheError, ZeroCache};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZerosRow {
    pub q: u64,
    pub characters: usize,
    pub zeros: usize,
    pub t_max: f64,
    pub complete: bool,
    pub wall_time: f64,
}

/// Scan (or load) every modulus of the family and report per-modulus counts.
pub fn zeros(cache: &ZeroCache, scale: f64, t_max: f64) -> Result<Vec<ZerosRow>> {
    let start = Instant::now();
    let fam = cache.family(scale, t_max, true)?;
    let wall = start.elapsed().as_secs_f64();
    Ok(fam
        .moduli
        .iter()
        .map(|m| ZerosRow {
            q: m.modulus,
            characters: m.characters.len(),
            zeros: m.characters.iter().map(|c| c.scan.count()).sum(),
            t_max,
            complete: m.is_complete(),
            wall_time: wall,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitFormulaRow {
    pub q: u64,
    pub character: String,
    pub x: f64,
    pub t_max: f64,
    pub zero_sum_re: f64,
    pub zero_sum_im: f64,
    pub polar: f64,
    pub prime_sum_re: f64,
    pub prime_sum_im: f64,
    pub conductor_term: f64,
    pub dual_prime_sum_re: f64,
    pub dual_prime_sum_im: f64,
    pub gamma_term: f64,
    /// with the three displayed right-side terms
    pub residual: f64,
    /// with the dual prime sum and the Γ-factor term as well
    pub complete_residual: f64,
    pub zero_tail: f64,
}

/// Explicit formula for every primitive character mod q. Zeros come from the cache when it
/// holds them and are computed in memory otherwise.
pub fn explicit_formula_rows(cache: &ZeroCache, q: u64, x: f64, t_max: f64) -> Result<Vec<ExplicitFormulaRow>> {
    let phi = TestFunction::sinc_squared();
    let group = character_group(q)?;
    let cached = match cache.read(q, t_max) {
        Ok(m) => Some(m),
        Err(CacheError::Missing { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut rows = Vec::new();
    for chi in group.primitive() {
        let data = lfunction_data(chi)?;
        let scan = match &cached {
            Some(m) => m
                .characters
                .iter()
                .find(|c| c.id == chi.id())
                .map(|c| c.scan.clone())
                .context("cache file lacks a primitive character")?,
            None => find_zeros(&data, t_max, cache.envelope().grid_step)?,
        };
        let ef = explicit_formula(&data, &scan, x, &phi, t_max)?;
        rows.push(ExplicitFormulaRow {
            q,
            character: chi.id().to_string(),
            x,
            t_max,
            zero_sum_re: ef.zero_sum.re,
            zero_sum_im: ef.zero_sum.im,
            polar: ef.polar.re,
            prime_sum_re: ef.prime_sum.re,
            prime_sum_im: ef.prime_sum.im,
            conductor_term: ef.conductor_term,
            dual_prime_sum_re: ef.dual_prime_sum.re,
            dual_prime_sum_im: ef.dual_prime_sum.im,
            gamma_term: ef.archimedean,
            residual: ef.residual(),
            complete_residual: ef.complete_residual(),
            zero_tail: ef.zero_tail,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub kind: String,
    #[serde(rename = "Q")]
    pub scale: f64,
    pub alpha: Option<f64>,
    pub value: f64,
    pub truncation_budget: f64,
    pub wall_time: f64,
    pub prediction: Option<f64>,
    /// Band half-width with implied constant 1 (a guess, not a bound).
    pub band: Option<f64>,
}

impl StatRow {
    fn from_result(r: &StatResult, alpha: Option<f64>, wall: f64) -> Self {
        Self {
            kind: r.kind.to_string(),
            scale: r.config.scale,
            alpha,
            value: r.value,
            truncation_budget: r.truncation_budget,
            wall_time: wall,
            prediction: None,
            band: None,
        }
    }
}

/// N_Φ followed by one F_Φ row per α with its predicted value.
pub fn pair_correlation(cache: &ZeroCache, scale: f64, alphas: &[f64], t_max: f64, build: bool) -> Result<Vec<StatRow>> {
    let start = Instant::now();
    let fam = cache.family(scale, t_max, build)?;
    let base = PairCorrConfig::new(scale, alphas.first().copied().unwrap_or(0.0), t_max)?;
    let wf = WeightedFamily::new(&fam, &base)?;
    let n = n_phi_weighted(&base, &wf)?;
    let mut rows = vec![StatRow::from_result(&n, None, start.elapsed().as_secs_f64())];
    for &a in alphas {
        let t0 = Instant::now();
        let cfg = base.with_alpha(a);
        let f = f_phi_weighted(&cfg, &wf, &n)?;
        let p = pair_correlation_prediction(&cfg)?;
        let mut row = StatRow::from_result(&f, Some(a), t0.elapsed().as_secs_f64());
        row.prediction = Some(p.value);
        row.band = p.band;
        rows.push(row);
    }
    Ok(rows)
}

/// S, S_D and S_N at (Q, X); the S_D row carries its main term as the prediction.
pub fn s_decomposition_rows(scale: f64, x: f64) -> Result<Vec<StatRow>> {
    let start = Instant::now();
    let w = SmoothWeight::bump();
    let phi = TestFunction::sinc_squared();
    let s = s_decomposition(scale, x, &w, &phi)?;
    let main = s_diag_main_term(scale, x, &w, &phi)?;
    let wall = start.elapsed().as_secs_f64();
    let alpha = Some(x.ln() / scale.ln());
    let mut diag = StatRow::from_result(&s.diag, alpha, wall);
    diag.prediction = Some(main);
    Ok(vec![
        StatRow::from_result(&s.total, alpha, wall),
        diag,
        StatRow::from_result(&s.offdiag, alpha, wall),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub name: String,
    pub value: f64,
    pub error_bound: f64,
}

pub fn constants() -> Result<Vec<ConstantRow>> {
    let o = ozluk_constant()?;
    let a0 = euler_product(ProductSpec::A0, 1_000_000)?;
    let (a, _) = constant_a(&SmoothWeight::bump(), 1_000_000)?;
    let series = inverse_d_phi_series(10_000_000)?;
    Ok(vec![
        ConstantRow {
            name: "ozluk".into(),
            value: o.value,
            error_bound: o.error_bound,
        },
        ConstantRow {
            name: "A0".into(),
            value: a0.real(),
            error_bound: a0.tail_bound,
        },
        ConstantRow {
            name: "A_bump".into(),
            value: a,
            error_bound: a0.tail_bound * SmoothWeight::bump().hat_one(),
        },
        ConstantRow {
            name: "sum_inv_d_phi_d".into(),
            value: series.value,
            error_bound: series.tail_bound,
        },
        ConstantRow {
            name: "mean_n_over_phi".into(),
            value: MEAN_N_OVER_PHI,
            error_bound: 0.0,
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleZerosRow {
    #[serde(rename = "Q")]
    pub scale: f64,
    pub alpha: f64,
    pub empirical: f64,
    pub asymptotic: f64,
    pub simple_proportion: f64,
    #[serde(rename = "N_phi")]
    pub n_phi: f64,
    pub budget: f64,
    pub wall_time: f64,
}

pub fn simple_zeros(cache: &ZeroCache, scale: f64, alpha: f64, t_max: f64, build: bool) -> Result<SimpleZerosRow> {
    let start = Instant::now();
    let fam = cache.family(scale, t_max, build)?;
    let cfg = PairCorrConfig::new(scale, alpha, t_max)?;
    let b = simple_zero_bound(&cfg, &fam, &KernelSpec::new(alpha)?)?;
    Ok(SimpleZerosRow {
        scale,
        alpha,
        empirical: b.empirical,
        asymptotic: b.asymptotic,
        simple_proportion: b.simple_proportion,
        n_phi: b.n_phi,
        budget: b.truncation_budget,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdhRow {
    pub kind: String,
    pub x: f64,
    #[serde(rename = "Q")]
    pub q_max: u64,
    pub value: f64,
    /// M / (x Q log x)
    pub normalized: f64,
    pub wall_time: f64,
}

pub fn bdh(x: f64, q_max: u64) -> Result<BdhRow> {
    let start = Instant::now();
    let m = bdh_variance(x, q_max)?;
    Ok(BdhRow {
        kind: StatKind::MBdh.to_string(),
        x,
        q_max,
        value: m.value,
        normalized: m.value / (x * q_max as f64 * x.ln()),
        wall_time: start.elapsed().as_secs_f64(),
    })
}
