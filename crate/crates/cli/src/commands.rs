use gps_core::intersection::intersection_tables;
use gps_core::oracle;
use gps_core::polymer::*;
use gps_core::relevance::*;
use gps_core::renewal::{fit_diagonal_exponent, renewal_mass};
use gps_core::{rng, TailSumTable};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{jnum, num, Outputs};

type CmdResult = Result<(), CliError>;

pub fn kernel_info(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let rem = k.mass_remainder();
    let head: Vec<Value> = (2..=10).map(|t| jnum(k.k(t))).collect();
    let mu = (k.alpha() > 1.0).then(|| k.mu());
    println!("alpha {} norm {} t_max {} mu {:?}", k.alpha(), k.norm(), k.t_max(), mu);
    out.json(
        "kernel_info.json",
        json!({
            "alpha": k.alpha(),
            "family": cfg.kernel.family,
            "c0": cfg.kernel.c0,
            "kappa": cfg.kernel.kappa,
            "t_max": k.t_max(),
            "norm": k.norm(),
            "mass_remainder": [rem.lo, rem.hi],
            "mu": mu,
            "k_2_to_10": head,
        }),
    );
    Ok(())
}

fn fit_cells(fit: Option<&gps_core::ExponentFit>) -> (String, String) {
    fit.map_or(("NaN".into(), "NaN".into()), |f| (num(f.slope), num(f.ci_half_width)))
}

pub fn renewal_validate(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let ns = cfg.n_sorted();
    let top = cfg.n_max();
    let grid = renewal_mass(&k, top, top, &cfg.budget())?;
    let fit = fit_diagonal_exponent(&grid, (ns[0], top)).ok();
    let (slope, ci) = fit_cells(fit.as_ref());
    let rows: Vec<Vec<String>> = ns
        .iter()
        .map(|&n| {
            let r = n / 2;
            vec![n.to_string(), num(grid.u(n, n)), r.to_string(), num(grid.u(n, n - r)), slope.clone(), ci.clone()]
        })
        .collect();
    println!("diagonal slope {slope} ± {ci}");
    out.csv("renewal.csv", "n,u_diag,r,u_offdiag,fitted_slope,ci", &rows);
    Ok(())
}

pub fn intersection_stats(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let ns = cfg.n_sorted();
    let top = cfg.n_max();
    let tables = intersection_tables(&renewal_mass(&k, top, top, &cfg.budget())?, 8)?;
    let fit = tables.fit_u_exponent((ns[0], top)).ok();
    let (rho, _) = fit_cells(fit.as_ref());
    let rows: Vec<Vec<String>> = tables
        .tail_constant_check(&ns)?
        .into_iter()
        .map(|p| vec![p.n.to_string(), num(p.u_nn), num(p.tail), num(p.product), rho.clone()])
        .collect();
    println!("fitted rho {rho}");
    out.csv("intersection.csv", "N,U_NN,tail_N,product,fitted_rho", &rows);
    Ok(())
}

pub fn homog_scan(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let gamma = cfg.gamma();
    let ns = cfg.n_sorted();
    let top = cfg.n_max();
    let hs = cfg.h_list()?;
    cfg.budget().check(gps_core::Budget::grid_work(top, gamma.m_for(top)).saturating_mul(hs.len() as u128))?;
    let per_h: Vec<gps_core::Result<Vec<Vec<String>>>> = hs
        .par_iter()
        .map(|&h| {
            let grid = constrained_partition(&k, Pinning::homogeneous(h), None, top, gamma.m_for(top), &gps_core::Budget::unlimited())?;
            Ok(ns
                .iter()
                .map(|&n| {
                    let f = grid.log_z(n, gamma.m_for(n)) / n as f64;
                    let flag = u8::from(n as f64 * f < 10.0);
                    vec![num(k.alpha()), gamma.to_string(), num(h), n.to_string(), num(f), flag.to_string()]
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_h {
        rows.extend(r?);
    }
    println!("{} rows", rows.len());
    out.csv("homog.csv", "alpha,gamma,h,N,F_N,exit_flag", &rows);
    Ok(())
}

pub fn quenched_scan(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let m = &cfg.model;
    let h = cfg.h()?;
    let params = ModelParams { beta: m.beta, h, gamma: cfg.gamma() };
    let spec = DisorderSpec::new(m.disorder, m.master_seed);
    let ns = cfg.n_sorted();
    let scan = quenched_free_energy(&k, params, spec, &ns, cfg.run.replicas, &cfg.budget())?;
    let top = cfg.n_max();
    let gamma = cfg.gamma();
    let log_q = m.disorder.log_q(m.beta);
    // E Z at every N is the homogeneous partition function at h + log Q(β)
    let ann = constrained_partition(&k, Pinning::homogeneous(h + log_q), None, top, gamma.m_for(top), &cfg.budget())?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let lead = |n: usize| vec![num(k.alpha()), num(m.beta), num(h), n.to_string()];
    for e in &scan.estimates {
        for (r, v) in e.values.iter().enumerate() {
            let mut row = lead(e.n);
            row.extend([r.to_string(), num(*v)]);
            rows.push(row);
        }
        let mut row = lead(e.n);
        row.extend(["summary".to_string(), num(e.mean)]);
        rows.push(row);
        let annealed = ann.log_z(e.n, e.m) / e.n as f64;
        let mut s = lead(e.n);
        s.extend([num(e.mean), num(e.ci_half_width), num(annealed), e.is_lower_bound.to_string()]);
        summary.push(s);
    }
    println!("h_c^a = {}, monotone lower bounds: {}", -log_q, scan.monotone_lower_bounds);
    out.csv("quenched.csv", "alpha,beta,h,N,replica,logZ_over_N", &rows);
    out.csv("quenched_summary.csv", "alpha,beta,h,N,mean,ci,annealed_value,is_lower_bound", &summary);
    Ok(())
}

pub fn second_moment_scan(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let law = cfg.model.disorder;
    let gamma = cfg.gamma();
    let ns = cfg.n_sorted();
    let top = cfg.n_max();
    let m_top = gamma.m_for(top);
    let side = top.max(m_top);
    let tables = intersection_tables(&renewal_mass(&k, side, side, &cfg.budget())?, side)?;
    let beta1 = if k.alpha() < 1.0 {
        let report = tables.sigma_termination_report(&k, 1e-3)?;
        let b = compute_beta1(law, &report)?;
        Some(json!({ "lo": jnum(b.lo), "hi": jnum(b.hi), "e_abs_sigma": [report.e_abs_sigma.lo, report.e_abs_sigma.hi] }))
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let n_grid: Vec<usize> = (1..=top).collect();
    for beta in cfg.beta_list() {
        let c = second_moment_curve(&tables, law, beta, &ns, gamma)?;
        for &(n, v) in &c.points {
            rows.push(vec![num(beta), n.to_string(), num(v)]);
        }
        let n_beta = if k.alpha() > 1.0 {
            let nb = compute_n_beta(&k, &tables, law, beta, gamma, &n_grid)?;
            json!({ "n_beta": nb.n_beta, "lower_bound_only": nb.lower_bound_only })
        } else {
            Value::Null
        };
        curves.push(json!({
            "beta": beta,
            "sup": jnum(c.sup()),
            "increments_decreasing": c.increments_decreasing(),
            "first_exceeding_10": c.first_exceeding(10.0),
            "n_beta": n_beta,
        }));
    }
    println!("{} curve(s)", curves.len());
    out.csv("second_moment.csv", "beta,N,second_moment", &rows);
    out.json(
        "second_moment.json",
        json!({ "alpha": k.alpha(), "disorder": law, "gamma": gamma.to_string(), "beta1": beta1, "curves": curves }),
    );
    Ok(())
}

pub fn certificate(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let m = &cfg.model;
    let h = cfg.h()?;
    let k_scale = cfg.k_scale()?;
    let c = &cfg.certificate;
    let params = CertParams { delta: c.delta, k_scale, epsilon: c.epsilon, schedule: cfg.tilt_schedule(k_scale) };
    let r = deloc_certificate(&k, m.disorder, m.beta, h, &params, &cfg.budget())?;
    println!("rho sum {} certified {}", r.rho_sum, r.certified);
    out.json(
        "certificate.json",
        json!({
            "alpha": r.alpha,
            "beta": r.beta,
            "h": r.h,
            "delta": r.delta,
            "k": r.k,
            "rho1": r.rho.rho1,
            "rho2": r.rho.rho2,
            "rho3": r.rho.rho3,
            "rho_sum": r.rho_sum,
            "h_gap": r.h_gap,
            "certified": r.certified,
            "shift_lower_bound": r.shift_lower_bound,
            "per_cell_bound_source": r.per_cell_bound_source,
            "strong_delta_condition": r.strong_delta_condition,
        }),
    );
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Every brute-force cross-check at small sizes.
pub fn oracle_suite(cfg: &ExperimentConfig, out: &mut Outputs) -> CmdResult {
    let k = cfg.kernel()?;
    let budget = cfg.budget();
    let beta = cfg.model.beta;
    let h = cfg.h().unwrap_or(0.0);
    let pinning = Pinning::new(beta, h);
    let seed = cfg.model.master_seed;
    let mut checks = Vec::new();

    let n = 24;
    let g = renewal_mass(&k, n, n, &budget)?;
    let naive = oracle::naive_renewal(&k, n, n);
    let err = max_grid_err(n, n, |i, j| (g.u(i, j), naive[i][j]));
    checks.push(Check { name: "renewal_dp_vs_naive", value: err, tolerance: 1e-12, pass: err < 1e-12 });

    let field = oracle::random_table_field(&mut rng::stream(&[seed, 1]), n, n);
    let dyn_field: Option<&dyn Field> = Some(&field);
    let grid = constrained_partition(&k, pinning, dyn_field, n, n, &budget)?;
    let naive = oracle::naive_partition(&k, pinning, dyn_field, n, n);
    let err = max_grid_err(n, n, |i, j| (grid.z(i, j).to_f64(), naive[i][j]));
    checks.push(Check { name: "partition_dp_vs_naive", value: err, tolerance: 1e-12, pass: err < 1e-12 });

    let s = sandwich_check(&grid, &k, dyn_field);
    checks.push(Check { name: "free_constrained_sandwich", value: s.log_ratio, tolerance: s.log_envelope, pass: s.ok });

    let tables = intersection_tables(&renewal_mass(&k, 12, 12, &budget)?, 12)?;
    let fast = tables.overlap_mgf(0.3, 12, 12)?;
    let err = rel(fast, oracle::chain_overlap_mgf(&k, 0.3, 12, 12));
    checks.push(Check { name: "overlap_mgf_vs_chain", value: err, tolerance: 1e-11, pass: err < 1e-11 });

    let delta = cfg.certificate.delta;
    let law = DisorderLaw::RademacherUnit;
    let exact = oracle::exhaustive_binary_frac_moment(&k, pinning, 3, 3, delta);
    let jensen = frac_moment_jensen_bounds(&k, pinning, law, 3, 3, delta, &budget)?.bound;
    let tilt = frac_moment_tilt_bounds(&k, pinning, law, 3, 3, delta, 0.5 * max_tilt(delta), 1.0, &budget)?;
    // largest exact / bound - 1 over cells; must not be positive
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=3 {
        for j in 1..=3 {
            worst = worst.max(exact[i][j] / jensen[i][j] - 1.0).max(exact[i][j] / tilt[i][j] - 1.0);
        }
    }
    checks.push(Check { name: "frac_moment_bounds_vs_exhaustive", value: worst, tolerance: 0.0, pass: worst <= 0.0 });

    let kk = 4;
    let tails = TailSumTable::truncated(&k, delta, 2 * kk, 400)?;
    let a: Vec<Vec<f64>> = (0..kk).map(|i| (0..kk).map(|j| jensen[i.clamp(1, 3)][j.clamp(1, 3)]).collect()).collect();
    let r = rho_terms(&a, kk, &tails, 1.0)?;
    let (b1, b2, b3) = oracle::brute_force_rho(&k, &a, kk, delta, 400, 1.0);
    let err = rel(r.rho1, b1).max(rel(r.rho2, b2)).max(rel(r.rho3, b3));
    checks.push(Check { name: "rho_grouped_vs_brute", value: err, tolerance: 1e-10, pass: err < 1e-10 });

    let dfield = DisorderSpec::new(cfg.model.disorder, seed).field(0);
    let d = decomposition_identity_check(&k, pinning, Some(&dfield as &dyn Field), 16, 16, 4, &budget)?;
    checks.push(Check { name: "decomposition_identity", value: d.rel_err, tolerance: 1e-10, pass: d.ok });

    let gamma = cfg.gamma();
    let block = (gamma.q() as usize, gamma.p() as usize);
    let scale = (8 / block.0.max(block.1)).max(1);
    let mut gap = f64::INFINITY;
    let mut holds = true;
    for (j1, j2) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let r = superadditivity_check(&k, pinning, &dfield, (block.0 * scale, block.1 * scale), j1, j2, &budget)?;
        gap = gap.min(r.log_lhs - r.log_rhs);
        holds &= r.holds;
    }
    checks.push(Check { name: "superadditivity", value: gap, tolerance: 0.0, pass: holds });

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.to_string(), num(c.value), num(c.tolerance), c.pass.to_string()])
        .collect();
    for c in &checks {
        println!("{:<36} {:>12.3e} {}", c.name, c.value, if c.pass { "ok" } else { "FAILED" });
    }
    out.csv("oracle.csv", "check,value,tolerance,pass", &rows);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}

fn max_grid_err(n: usize, m: usize, f: impl Fn(usize, usize) -> (f64, f64)) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            let (a, b) = f(i, j);
            worst = worst.max(rel(a, b));
        }
    }
    worst
}
