//! The (k, n) sweep behind `cyclic sweep`.

use std::path::PathBuf;
use std::time::Instant;

use cyclic_core::coefficients::CoefficientSequence;
use cyclic_core::cyclicity::{self, build_k, relabel_support, Relabeling};
use cyclic_core::error::Error;
use cyclic_core::gram;
use cyclic_core::nodal::NodalContext;
use cyclic_core::precision::{to_decimal, BigReal, PrecisionConfig};
use cyclic_core::problem::Problem;
use cyclic_core::spectrum::{Spectrum, Window};
use rayon::prelude::*;
use serde::Serialize;

pub const DIGITS: usize = 25;
pub const SPEC_REV: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Gram,
    Kmatrix,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Gram => "gram",
            Route::Kmatrix => "kmatrix",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub spec: PathBuf,
    pub k_list: Vec<i64>,
    pub n_list: Vec<usize>,
    pub routes: Vec<Route>,
    pub precision: PrecisionConfig,
    pub workers: usize,
    #[serde(skip)]
    pub timings: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.routes.is_empty() {
            return bad("at least one route is required".into());
        }
        if self.k_list.is_empty() || self.n_list.is_empty() {
            return bad("k and n lists must be nonempty".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let n_min = *self.n_list.iter().min().expect("nonempty");
        if let Some(k) = self.k_list.iter().find(|k| k.unsigned_abs() as usize >= n_min) {
            return bad(format!("every k must satisfy |k| < min(n) = {n_min}, got {k}"));
        }
        self.precision.validate()
    }
}

/// One row of a sweep report. Numbers are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub k: i64,
    pub n: usize,
    pub route: &'static str,
    pub rho2: Option<String>,
    pub q: Option<String>,
    pub bound_t2: Option<String>,
    pub bound_refined: Option<String>,
    pub k_kk: Option<String>,
    pub tail_cert: Option<String>,
    pub solve_residual: Option<String>,
    /// `|ρ²_gram - ρ²_K|` when both routes succeeded.
    pub route_gap: Option<String>,
    pub condition1_failed: bool,
    /// The window has at least as many vectors as the finite support has
    /// nonzero coefficients, so the span is the whole support and `ρ²` is
    /// exact.
    pub support_spanned: bool,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<String>,
    #[serde(skip)]
    pub raw_rho2: Option<BigReal>,
}

impl Record {
    fn blank(k: i64, n: usize, route: Route) -> Self {
        Record {
            k,
            n,
            route: route.name(),
            rho2: None,
            q: None,
            bound_t2: None,
            bound_refined: None,
            k_kk: None,
            tail_cert: None,
            solve_residual: None,
            route_gap: None,
            condition1_failed: false,
            support_spanned: false,
            error: None,
            wall_time: None,
            raw_rho2: None,
        }
    }

    fn failed(k: i64, n: usize, route: Route, err: &Error) -> Self {
        Record {
            error: Some(format!("{}: {err}", err.name())),
            ..Record::blank(k, n, route)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub spec_rev: &'static str,
    pub crate_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: ReportConfig,
    pub records: Vec<Record>,
    pub versions: Versions,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    #[serde(flatten)]
    pub run: RunConfig,
    pub problem: Problem,
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn dec(x: &BigReal) -> String {
    to_decimal(x, DIGITS)
}

fn sci(x: f64) -> String {
    format!("{x:e}")
}

/// Runs the sweep. Only problem-construction failures are returned as
/// errors; numerical failures land in the per-record `error` field.
pub fn run(cfg: &RunConfig, problem: &Problem) -> Result<Report, Error> {
    cfg.validate()?;
    let spectrum = problem.build_spectrum()?;
    let coeffs = problem.build_coefficients_with(&cfg.precision)?;
    let support = finite_support(&spectrum, &coeffs, cfg.precision.prec());

    let mut n_list = cfg.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let mut k_list = cfg.k_list.clone();
    k_list.sort_unstable();
    k_list.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let groups: Vec<Vec<Record>> = pool.install(|| {
        n_list
            .par_iter()
            .map(|&n| window_records(&spectrum, &coeffs, support, n, &k_list, cfg))
            .collect()
    });

    let mut records: Vec<Record> = groups.into_iter().flatten().collect();
    fill_route_gap(&mut records);
    records.sort_by(|a, b| (a.k, a.n, a.route).cmp(&(b.k, b.n, b.route)));
    Ok(Report {
        config: ReportConfig {
            run: cfg.clone(),
            problem: problem.clone(),
        },
        records,
        versions: Versions {
            spec_rev: SPEC_REV,
            crate_version: env!("CARGO_PKG_VERSION"),
        },
    })
}

fn window_records(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    support: Option<usize>,
    n: usize,
    k_list: &[i64],
    cfg: &RunConfig,
) -> Vec<Record> {
    let prec = cfg.precision.prec();
    let mut out = Vec::new();
    for &route in &cfg.routes {
        let start = Instant::now();
        let spanned = support.is_some_and(|m| m < 2 * n + 1);
        let mut recs = match route {
            _ if spanned => spanned_records(coeffs, n, k_list, route, &cfg.precision),
            Route::Kmatrix => kmatrix_records(spectrum, coeffs, n, k_list, &cfg.precision),
            Route::Gram => gram_records(spectrum, coeffs, n, k_list, &cfg.precision),
        };
        for r in &mut recs {
            r.condition1_failed = coeffs.eval(r.k, prec).is_zero();
            if cfg.timings {
                r.wall_time = Some(format!("{:.6}", start.elapsed().as_secs_f64()));
            }
        }
        out.extend(recs);
    }
    out
}

/// Radius of the effective support: the coefficient support, cut to the
/// table when the spectrum is finite.
fn support_radius(spectrum: &Spectrum, coeffs: &CoefficientSequence) -> Option<i64> {
    match (coeffs.support_radius(), spectrum.table_radius()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Number of nonzero coefficients when the effective support is finite.
fn finite_support(spectrum: &Spectrum, coeffs: &CoefficientSequence, prec: u32) -> Option<usize> {
    let r = support_radius(spectrum, coeffs)?;
    Some((-r..=r).filter(|&j| !coeffs.eval(j, prec).is_zero()).count())
}

fn spanned_records(
    coeffs: &CoefficientSequence,
    n: usize,
    k_list: &[i64],
    route: Route,
    cfg: &PrecisionConfig,
) -> Vec<Record> {
    k_list
        .iter()
        .map(|&k| {
            let (rho2, q) = if coeffs.eval(k, cfg.prec()).is_zero() {
                (cfg.real(1), cfg.zero())
            } else {
                (cfg.zero(), cfg.real(1))
            };
            Record {
                rho2: Some(dec(&rho2)),
                q: Some(dec(&q)),
                raw_rho2: Some(rho2),
                support_spanned: true,
                ..Record::blank(k, n, route)
            }
        })
        .collect()
}

/// Original labels when every window coefficient is nonzero; otherwise the
/// finite support relabelled onto consecutive indices.
fn relabel_for(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    prec: u32,
) -> Result<Option<Relabeling>, Error> {
    let window_zero = (-(n as i64)..=n as i64).find(|&j| coeffs.eval(j, prec).is_zero());
    let Some(zero) = window_zero else {
        return Ok(None);
    };
    let Some(radius) = support_radius(spectrum, coeffs) else {
        return Err(Error::ZeroCoefficientInWindow { index: zero });
    };
    let rl = relabel_support(spectrum, coeffs, radius, prec)?;
    let survivors = (-radius..=radius).filter(|&j| !coeffs.eval(j, prec).is_zero()).count();
    if rl.map.len() != survivors {
        // The symmetric truncation would drop part of the support.
        return Err(Error::ZeroCoefficientInWindow { index: zero });
    }
    Ok(Some(rl))
}

fn kmatrix_records(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    k_list: &[i64],
    cfg: &PrecisionConfig,
) -> Vec<Record> {
    let prec = cfg.prec();
    let route = Route::Kmatrix;
    let built = relabel_for(spectrum, coeffs, n, prec).and_then(|relabeled| {
        let (spec, seq) = match &relabeled {
            Some(rl) => (&rl.spectrum, &rl.coeffs),
            None => (spectrum, coeffs),
        };
        // A relabelled support narrower than the window already spans its
        // whole space, so the K-matrix is taken over the full support.
        let n_eff = relabeled.as_ref().map_or(n, |rl| n.min(rl.map.len() / 2));
        let ctx = NodalContext::new(spec, Window::new(n_eff), cfg)?;
        Ok((build_k(&ctx, seq, cfg)?, relabeled))
    });
    k_list
        .iter()
        .map(|&k| {
            if coeffs.eval(k, prec).is_zero() {
                // e_k is orthogonal to every A^j f.
                return Record {
                    rho2: Some(dec(&cfg.real(1))),
                    raw_rho2: Some(cfg.real(1)),
                    q: Some(dec(&cfg.zero())),
                    ..Record::blank(k, n, route)
                };
            }
            let (kmat, relabeled) = match &built {
                Ok(b) => b,
                Err(e) => return Record::failed(k, n, route, e),
            };
            let k_new = match relabeled {
                Some(rl) => rl.new_index(k).expect("nonzero coefficient survives"),
                None => k,
            };
            match cyclicity::criterion_value(kmat, k_new, cfg) {
                Ok(rep) => Record {
                    rho2: Some(dec(&rep.rho2)),
                    raw_rho2: Some(rep.rho2),
                    q: Some(dec(&rep.q)),
                    bound_t2: Some(dec(&rep.bound_t2)),
                    bound_refined: Some(dec(&rep.bound_refined)),
                    k_kk: Some(dec(&rep.k_kk)),
                    tail_cert: Some(sci(rep.tail_rel_bound)),
                    solve_residual: Some(dec(&rep.solve_residual)),
                    ..Record::blank(k, n, route)
                },
                Err(e) => Record::failed(k, n, route, &e),
            }
        })
        .collect()
}

fn gram_records(
    spectrum: &Spectrum,
    coeffs: &CoefficientSequence,
    n: usize,
    k_list: &[i64],
    cfg: &PrecisionConfig,
) -> Vec<Record> {
    let route = Route::Gram;
    let gs = match gram::build_gram(spectrum, coeffs, n, cfg) {
        Ok(gs) => gs,
        Err(e) => return k_list.iter().map(|&k| Record::failed(k, n, route, &e)).collect(),
    };
    let tail_cert = gs
        .moments
        .iter()
        .map(|m| {
            let scale = m.value.to_f64().abs();
            if scale > 0.0 {
                m.truncation_bound.to_f64() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    k_list
        .iter()
        .map(|&k| match gram::rho2_via_gram(&gs, k, cfg) {
            Ok(d) => Record {
                q: Some(dec(&(cfg.real(1) - &d.rho2))),
                rho2: Some(dec(&d.rho2)),
                raw_rho2: Some(d.rho2),
                tail_cert: Some(sci(tail_cert)),
                solve_residual: Some(dec(&d.solve_residual)),
                ..Record::blank(k, n, route)
            },
            Err(e) => Record::failed(k, n, route, &e),
        })
        .collect()
}

/// Fills `route_gap` on both records of each (k, n) cell that has a
/// successful gram and kmatrix value.
fn fill_route_gap(records: &mut [Record]) {
    use std::collections::BTreeMap;
    let mut cells: BTreeMap<(i64, usize), [Option<BigReal>; 2]> = BTreeMap::new();
    for r in records.iter() {
        if let Some(v) = &r.raw_rho2 {
            let slot = if r.route == "gram" { 0 } else { 1 };
            cells.entry((r.k, r.n)).or_default()[slot] = Some(v.clone());
        }
    }
    for r in records.iter_mut() {
        if let Some([Some(g), Some(kv)]) = cells.get(&(r.k, r.n)) {
            let gap = BigReal::with_val(g.prec(), g - kv).abs();
            r.route_gap = Some(dec(&gap));
        }
    }
}
