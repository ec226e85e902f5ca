use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    check_n, from_value, parse_complex, parse_point, parse_value, read_input, to_csv, to_value,
    Failure, Options, Outcome, Status,
};
use crate::algebra::{CycleElement, RealizedJson, NORM_GRID};
use crate::derivations::{
    boundary_approx_identity, canonical_boundary_kernel, decide_inner, decompose_at_zero,
    idempotent_split, GenDerivation,
};
use crate::error::Error;
use crate::reconstruction::{
    default_grid, reconstruct_witness_with, BoundaryField, GlobalDerivation, GLOBAL_TOL,
};
use crate::representations::{
    diag_zero_spanning_set, eval_rep, kernel_square_witness,
    semisimplicity_certificate, KernelSquare, RepPoint,
};
use crate::sample;

/// Upper bound on `|F_k|` for the approximate identity.
const APPROX_BOUND: f64 = 2.0 + 1e-9;

/// Defect bound at `k = 4096`.
const APPROX_FINAL: f64 = 0.02;

fn read_element(o: &Options) -> Result<CycleElement, Failure> {
    let v = parse_value(&read_input(o)?)?;
    let a = if v.get("realized").is_some() {
        from_value::<RealizedJson>(v)?.to_element()?
    } else {
        from_value::<CycleElement>(v)?
    };
    check_n(o, a.n())?;
    Ok(a)
}

fn read_gen_derivation(o: &Options) -> Result<GenDerivation, Failure> {
    let d: GenDerivation = from_value(parse_value(&read_input(o)?)?)?;
    check_n(o, d.n())?;
    Ok(d)
}

pub fn eval(o: &Options, point: Option<&str>, lambda: Option<&str>) -> Result<Outcome, Failure> {
    let point = parse_point(point, lambda)?
        .ok_or_else(|| Failure::input("config", "eval needs --point or --lambda"))?;
    let a = read_element(o)?;
    let value = eval_rep(&point, &a)?;
    Ok(Outcome::new(
        Status::Success,
        json!({ "point": point, "value": value }),
    ))
}

pub fn inner_check(o: &Options, trials: usize, samples: usize) -> Result<Outcome, Failure> {
    let d = read_gen_derivation(o)?;
    let verdict = decide_inner(&d, o.tol_inner, trials, samples, o.seed)?;
    let status = if verdict.is_inner() {
        Status::Success
    } else {
        Status::Negative
    };
    Ok(Outcome::new(status, to_value(&verdict)))
}

pub fn reconstruct(o: &Options, trials: usize) -> Result<Outcome, Failure> {
    let v = parse_value(&read_input(o)?)?;
    if v.get("X_at").is_some() {
        let field: BoundaryField = from_value(v)?;
        check_n(o, field.n)?;
        return match reconstruct_witness_with(&field, o.deg_max) {
            Ok(x) => {
                let max_residual = field
                    .x_at
                    .iter()
                    .zip(field.grid())
                    .map(|(m, l)| (&x.evaluate(l) - m).spectral_norm())
                    .fold(0.0, f64::max);
                Ok(Outcome::new(
                    Status::Success,
                    json!({ "X": x, "max_residual": max_residual, "grid": field.m }),
                ))
            }
            Err(e) => pipeline_failure(e),
        };
    }

    let d: GlobalDerivation = from_value(v)?;
    check_n(o, d.n())?;
    let m = o.grid.unwrap_or_else(|| default_grid(d.n(), o.deg_max));
    match crate::reconstruction::reconstruct(&d, m, o.deg_max, o.tol_inner, trials, &mut sample::rng(o.seed)) {
        Ok(report) => {
            let ok = report.max_residual <= GLOBAL_TOL;
            Ok(Outcome::new(
                if ok { Status::Success } else { Status::Negative },
                to_value(&report),
            ))
        }
        Err(e) => pipeline_failure(e),
    }
}

/// Negative pipeline verdicts are reports; anything else is an input error.
fn pipeline_failure(e: Error) -> Result<Outcome, Failure> {
    let mut result = json!({ "verdict": e.kind(), "message": e.to_string() });
    match e {
        Error::NotLocallyInner { lambda, residual } => {
            result["lambda"] = to_value(&lambda);
            result["residual"] = json!(residual);
        }
        Error::NotInAlgebra { row, col, .. } => {
            result["entry"] = json!([row, col]);
        }
        Error::DegreeOverflow { row, col, .. } => {
            result["entry"] = json!([row, col]);
        }
        other => return Err(other.into()),
    }
    eprintln!("{}", json!({ "error": { "kind": result["verdict"], "message": result["message"] } }));
    Ok(Outcome::new(Status::Negative, result))
}

#[derive(Serialize)]
struct ApproxRow {
    n: usize,
    k: usize,
    element: usize,
    defect: f64,
    fk_norm: f64,
    grid: usize,
}

pub fn approx_identity(o: &Options, lambda: Option<&str>, ks: &[usize]) -> Result<Outcome, Failure> {
    let lambda = lambda.map(parse_complex).transpose()?.unwrap_or(Complex64::new(1.0, 0.0));
    let ns: Vec<usize> = o.n.map_or(vec![1, 2, 3], |n| vec![n]);
    let mut rows = Vec::new();
    let mut monotone = true;
    let mut bounded = true;
    let mut final_ok = true;
    for &n in &ns {
        let kernel = canonical_boundary_kernel(lambda, n);
        let mut previous = vec![f64::INFINITY; kernel.len()];
        for &k in ks {
            let term = boundary_approx_identity(lambda, n, k)?;
            let grid = o.grid.unwrap_or(NORM_GRID.max(8 * k));
            let fk_norm = term.element.norm(grid);
            bounded &= fk_norm <= APPROX_BOUND;
            for (t, a) in kernel.iter().enumerate() {
                let defect = term.defect(a, grid)?;
                monotone &= defect < previous[t];
                previous[t] = defect;
                if k >= 4096 {
                    final_ok &= defect <= APPROX_FINAL;
                }
                rows.push(ApproxRow {
                    n,
                    k,
                    element: t + 1,
                    defect,
                    fk_norm,
                    grid,
                });
            }
        }
    }
    let ok = monotone && bounded && final_ok;
    let result = json!({
        "lambda": lambda,
        "monotone": monotone,
        "bounded": bounded,
        "final_defect_ok": final_ok,
        "rows": rows,
    });
    Ok(Outcome {
        status: if ok { Status::Success } else { Status::Negative },
        result,
        csv: Some(to_csv(&rows)?),
    })
}

pub fn semisimple(o: &Options) -> Result<Outcome, Failure> {
    let a = read_element(o)?;
    let deg = o.deg_max.max(a.max_degree().max(0) as usize);
    Ok(Outcome::new(
        Status::Success,
        to_value(&semisimplicity_certificate(&a, deg)),
    ))
}

pub fn kernel_witness(o: &Options, point: Option<&str>, budget: usize) -> Result<Outcome, Failure> {
    let point = parse_point(point, None)?.unwrap_or(RepPoint::DiagZero(1));
    let RepPoint::DiagZero(i) = point else {
        return Err(Failure::input("config", "kernel-witness needs a diag0 point"));
    };
    let targets = match &o.input {
        Some(_) => vec![read_element(o)?],
        None => {
            let n = o.n.unwrap_or(2);
            point.validate(n)?;
            diag_zero_spanning_set(n, i, budget)
        }
    };
    let mut all = true;
    let mut out = Vec::new();
    for k in &targets {
        let entry = match kernel_square_witness(&point, k, budget)? {
            KernelSquare::Decomposition { pairs, residual } => json!({
                "verdict": "decomposition",
                "element": k,
                "residual": residual,
                "terms": pairs.len(),
                "pairs": pairs.iter().map(|(b, c)| json!([b, c])).collect::<Vec<Value>>(),
            }),
            KernelSquare::Failure { budget, residual } => {
                all = false;
                json!({
                    "verdict": "failure",
                    "element": k,
                    "budget": budget,
                    "residual": residual,
                })
            }
        };
        out.push(entry);
    }
    Ok(Outcome::new(
        if all { Status::Success } else { Status::Negative },
        json!({ "point": point, "budget": budget, "all_decomposed": all, "elements": out }),
    ))
}

pub fn decompose(o: &Options) -> Result<Outcome, Failure> {
    let d = read_gen_derivation(o)?;
    let at_zero = d.point.as_lambda() == Some(Complex64::new(0.0, 0.0));
    let split = idempotent_split(&d)?;
    let mut result = json!({
        "experimental": !at_zero,
        "split": split,
    });
    if at_zero {
        result["decomposition"] = to_value(&decompose_at_zero(&d)?);
    }
    Ok(Outcome::new(Status::Success, result))
}
