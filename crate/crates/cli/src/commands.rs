//! Output of the `constants`, `theorem3` and `bump-demo` subcommands, plus
//! list parsing for sweep arguments.

use std::fmt::Write as _;

use cyclic_core::derivative::{self, BumpReport, BumpShape, DemoRoute, Theorem3Report};
use cyclic_core::error::Error;
use cyclic_core::precision::{to_decimal, PrecisionConfig};
use cyclic_core::problem::Problem;
use serde::Serialize;

use crate::sweep::{DIGITS, SPEC_REV};

/// Parses `"-2..2,5,7..8"` into `[-2, -1, 0, 1, 2, 5, 7, 8]`. Ranges are
/// inclusive.
pub fn parse_list(text: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parse = |s: &str| s.trim().parse::<i64>().map_err(|e| format!("bad list item {s:?}: {e}"));
        // Skip a leading minus so "-3..-1" splits at the right place.
        match item.get(1..).and_then(|t| t.find("..")).map(|p| p + 1) {
            Some(p) => {
                let (lo, hi) = (parse(&item[..p])?, parse(&item[p + 2..])?);
                if lo > hi {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse(item)?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn constants_text(cfg: &PrecisionConfig) -> String {
    let t = derivative::solve_c0(cfg);
    let mut s = String::new();
    writeln!(s, "c0       {}", to_decimal(&t.c0, 30)).unwrap();
    writeln!(s, "sigma    {}", to_decimal(&t.sigma, 30)).unwrap();
    writeln!(s, "residual {}", to_decimal(&t.residual, 3)).unwrap();
    s
}

pub fn theorem3_report(problem: &Problem, kmax: usize, cfg: &PrecisionConfig) -> Result<Theorem3Report, Error> {
    let coeffs = problem.build_coefficients_with(cfg)?;
    derivative::theorem3_check(&coeffs, kmax, cfg)
}

pub fn theorem3_text(r: &Theorem3Report) -> String {
    format!(
        "kmax     {}\nC        {:e}\ndelta    {:.6}\nsigma    {:.6}\nnonzero  {}\nverdict  {}\n",
        r.kmax, r.c_fit, r.delta, r.sigma, r.all_nonzero, r.verdict
    )
}

#[derive(Debug, Clone, Serialize)]
struct BumpConfig {
    radius: f64,
    kmax: usize,
    nmax: usize,
    route: DemoRoute,
    mantissa_bits: u32,
}

#[derive(Debug, Clone, Serialize)]
struct BumpRow {
    n: usize,
    rho2: String,
}

#[derive(Debug, Clone, Serialize)]
struct BumpOutput {
    config: BumpConfig,
    zero: String,
    transform_at_zero: String,
    witness_floor: String,
    min_rho2: Option<String>,
    records: Vec<BumpRow>,
    versions: serde_json::Value,
}

pub fn bump_demo(
    radius: Option<f64>,
    kmax: usize,
    nmax: usize,
    route: DemoRoute,
    cfg: &PrecisionConfig,
) -> Result<BumpReport, Error> {
    let shape = match radius {
        Some(r) => BumpShape::new(r)?,
        None => BumpShape::default(),
    };
    if nmax < 2 {
        return Err(Error::InvalidConfig(format!("nmax must be at least 2, got {nmax}")));
    }
    derivative::bump_noncyclicity_demo(shape, kmax, nmax, route, cfg)
}

fn bump_output(r: &BumpReport, route: DemoRoute, cfg: &PrecisionConfig) -> BumpOutput {
    BumpOutput {
        config: BumpConfig {
            radius: r.shape.radius,
            kmax: r.kmax,
            nmax: r.rho2.last().map_or(0, |(n, _)| *n),
            route,
            mantissa_bits: cfg.mantissa_bits,
        },
        zero: to_decimal(&r.zero, DIGITS),
        transform_at_zero: to_decimal(&r.transform_at_zero, DIGITS),
        witness_floor: to_decimal(&r.witness_floor, DIGITS),
        min_rho2: r.min_rho2().map(|v| to_decimal(v, DIGITS)),
        records: r
            .rho2
            .iter()
            .map(|(n, v)| BumpRow {
                n: *n,
                rho2: to_decimal(v, DIGITS),
            })
            .collect(),
        versions: serde_json::json!({ "spec_rev": SPEC_REV }),
    }
}

pub fn bump_json(r: &BumpReport, route: DemoRoute, cfg: &PrecisionConfig) -> String {
    let mut s = serde_json::to_string_pretty(&bump_output(r, route, cfg)).expect("report serializes");
    s.push('\n');
    s
}

pub fn bump_csv(r: &BumpReport, route: DemoRoute, cfg: &PrecisionConfig) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in bump_output(r, route, cfg).records {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
