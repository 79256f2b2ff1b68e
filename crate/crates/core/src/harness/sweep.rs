//! Single runs, batch sweeps and plateau detection.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::classify;
use super::sample::{random_init, run_seed};
use super::{RunRecord, SweepConfig, RECORD_SCHEMA_VERSION};
use crate::bfgs::minimize;
use crate::error::{CrouzeixError, Result};
use crate::fov::build_boundary;
use crate::point::{pack, unpack, ParameterLayout, ParameterVector};
use crate::ratio::{denominator, numerator, RatioOracle};
use crate::stationarity::stationarity_report_with;

/// One deterministic run: init, minimize, evaluate, verify, classify.
/// Errors never abort the sweep; they land inside the record.
pub fn run_single(cfg: &SweepConfig, index: usize) -> RunRecord {
    let seed = run_seed(cfg.base_seed, index as u64);
    let outcome = catch_unwind(AssertUnwindSafe(|| run_single_inner(cfg, index, seed)));
    match outcome {
        Ok(record) => record,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            RunRecord::failed(cfg, index, seed, vec![], 0, None, format!("panic: {msg}"))
        }
    }
}

fn run_single_inner(cfg: &SweepConfig, index: usize, seed: u64) -> RunRecord {
    let layout = ParameterLayout::new(cfg.n, cfg.m, cfg.field_mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt0 = match random_init(&mut rng, cfg.n, cfg.m, cfg.field_mode, cfg.alpha) {
        Ok(pt) => pt,
        Err(e) => return RunRecord::failed(cfg, index, seed, vec![], 0, None, e.to_string()),
    };
    let x0 = match pack(&pt0) {
        Ok(v) => v.values,
        Err(e) => return RunRecord::failed(cfg, index, seed, vec![], 0, None, e.to_string()),
    };

    let oracle = RatioOracle::new(layout, cfg.oracle.clone()).with_renormalization(cfg.renormalize_poly);
    let trace = match crate::bfgs::minimize_with_post_step(
        |x| oracle.eval(x),
        &x0,
        &cfg.optimizer,
        |x: &mut Vec<f64>| oracle.maybe_renormalize(x),
    ) {
        Ok(t) => t,
        Err(e) => {
            return RunRecord::failed(cfg, index, seed, x0, 0, None, e.to_string());
        }
    };
    if trace.termination == crate::bfgs::Termination::OverflowGuard {
        // no final evaluation, no stationarity fields
        return RunRecord::failed(
            cfg,
            index,
            seed,
            trace.final_x,
            trace.iterations,
            Some(trace.termination),
            "magnitude guard tripped during the run".to_string(),
        );
    }

    let pv = match ParameterVector::new(layout, trace.final_x.clone()) {
        Ok(v) => v,
        Err(e) => {
            return RunRecord::failed(
                cfg,
                index,
                seed,
                trace.final_x,
                trace.iterations,
                Some(trace.termination),
                e.to_string(),
            )
        }
    };
    let ptf = match unpack(&pv) {
        Ok(p) => p,
        Err(e) => {
            return RunRecord::failed(
                cfg,
                index,
                seed,
                trace.final_x,
                trace.iterations,
                Some(trace.termination),
                e.to_string(),
            )
        }
    };

    // final evaluation with reporting-quality boundary options
    let evaluated: Result<RunRecord> = (|| {
        let b = build_boundary(&ptf.a, ptf.field_mode, &cfg.report.boundary)?;
        let (num, ats0) = numerator(&ptf.p, &b)?;
        let (den, _u, _w, _gap) = denominator(&ptf.p, &ptf.a)?;
        let f = num / den;
        let st = stationarity_report_with(&ptf, &b, cfg.epsilon)?;
        let class = classify(f, &b, &ats0);
        Ok(RunRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            run_index: index,
            seed,
            n: cfg.n,
            m: cfg.m,
            field_mode: cfg.field_mode,
            numerator: Some(num),
            denominator: Some(den),
            f: Some(f),
            termination: Some(trace.termination),
            iterations: trace.iterations,
            z_count: if st.forgo { None } else { Some(st.z_count) },
            d_norm: st.d_norm(),
            forgo: st.forgo,
            classification: Some(class),
            final_params: trace.final_x.clone(),
            error: None,
        })
    })();
    match evaluated {
        Ok(rec) => rec,
        Err(e) => RunRecord::failed(
            cfg,
            index,
            seed,
            trace.final_x,
            trace.iterations,
            Some(trace.termination),
            e.to_string(),
        ),
    }
}

/// Detected run of (near-)identical sorted final values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Plateau {
    /// Median of the cluster.
    pub value: f64,
    pub count: usize,
    pub f_first: f64,
    pub f_last: f64,
    /// 1-based ranks in the sorted order.
    pub rank_first: usize,
    pub rank_last: usize,
    pub run_first: usize,
    pub run_last: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    /// (rank, f, run_index), rank 1-based, f ascending.
    pub sorted: Vec<(usize, f64, usize)>,
    pub plateaus: Vec<Plateau>,
}

/// Runs the sweep on a worker pool; records come back ordered by run index
/// regardless of completion order, and the sorted-values artifact is
/// computed from the successful runs.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let records: Vec<RunRecord> = if cfg.workers == 1 {
        (0..cfg.run_count).map(|i| run_single(cfg, i)).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if cfg.workers > 0 {
            builder = builder.num_threads(cfg.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| CrouzeixError::Io(e.to_string()))?;
        pool.install(|| {
            (0..cfg.run_count)
                .into_par_iter()
                .map(|i| run_single(cfg, i))
                .collect()
        })
    };

    let mut sorted: Vec<(usize, f64, usize)> = records
        .iter()
        .filter_map(|r| r.f.map(|f| (0usize, f, r.run_index)))
        .collect();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.2.cmp(&b.2)));
    for (rank, entry) in sorted.iter_mut().enumerate() {
        entry.0 = rank + 1;
    }
    let plateaus = detect_plateaus(&sorted, cfg.plateau_tol, 3);

    let result = SweepResult {
        records,
        sorted,
        plateaus,
    };
    if let Some(dir) = &cfg.outdir {
        write_sweep_outputs(&result, dir)?;
    }
    Ok(result)
}

/// Greedy clustering of the sorted values: a plateau is a maximal run of
/// consecutive values whose spread stays within `tol`, holding at least
/// `min_count` members. Clusters never span more than `tol`.
pub fn detect_plateaus(sorted: &[(usize, f64, usize)], tol: f64, min_count: usize) -> Vec<Plateau> {
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].1 - sorted[i].1 <= tol {
            j += 1;
        }
        let count = j - i + 1;
        if count >= min_count {
            let mid = i + count / 2;
            out.push(Plateau {
                value: sorted[mid].1,
                count,
                f_first: sorted[i].1,
                f_last: sorted[j].1,
                rank_first: sorted[i].0,
                rank_last: sorted[j].0,
                run_first: sorted[i].2,
                run_last: sorted[j].2,
            });
        }
        i = j + 1;
    }
    out
}

fn write_sweep_outputs(result: &SweepResult, dir: &std::path::Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for rec in &result.records {
        let path = dir.join(format!("run_{:04}.json", rec.run_index));
        let json = serde_json::to_string_pretty(rec).map_err(|e| CrouzeixError::Io(e.to_string()))?;
        fs::write(path, json)?;
    }
    let mut csv = String::from("rank,f,run_index\n");
    for (rank, f, idx) in &result.sorted {
        csv.push_str(&format!("{rank},{f:.16e},{idx}\n"));
    }
    fs::write(dir.join("sorted_f.csv"), csv)?;
    let plateaus_json =
        serde_json::to_string_pretty(&result.plateaus).map_err(|e| CrouzeixError::Io(e.to_string()))?;
    fs::write(dir.join("plateaus.json"), plateaus_json)?;
    let mut summary = fs::File::create(dir.join("plateaus.txt"))?;
    for p in &result.plateaus {
        writeln!(
            summary,
            "value={:.10} count={} f=[{:.10}, {:.10}] ranks={}..{}",
            p.value, p.count, p.f_first, p.f_last, p.rank_first, p.rank_last
        )?;
    }
    Ok(())
}
