use crate::output::{Report, Table};
use crate::parse::{parse_complex, parse_grid, parse_list_f64, parse_list_usize, parse_nu, parse_xi, xi_echo, NuArg};
use crate::{selftest, CliError, Command, DataArgs, LawArgs};
use heavyqf_core::concentration::{hw_tail_experiment, light_tail_degeneration, resolvent_concentration_experiment, HwConfig, LipschitzStat};
use heavyqf_core::limit_law::LimitLaw;
use heavyqf_core::quadform::{offdiag_vanishing_check, simulate_qf_law, truncation_experiment, DiagSource, OffDiag, Summary, TestMatrixSpec};
use heavyqf_core::rmt::{
    alpha0_construction, build_correlation_matrix, embedding_check, spectrum, zero_inflated_poisson_mass, DataMatrixSpec,
};
use heavyqf_core::rng::SeedStream;
use heavyqf_core::sampler::HeavyTailSpec;
use num_complex::Complex64;
use serde_json::{json, Value};

pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    let report = match cmd {
        Command::LawDensity(a) => law_density(a)?,
        Command::LawCdf(a) => law_cdf(a)?,
        Command::LawMoments { law, max_order } => law_moments(law, *max_order)?,
        Command::LawStieltjes { law, z, eta } => law_stieltjes(law, z, *eta)?,
        Command::LawAtoms { law, v_seq } => law_atoms(law, v_seq.as_deref())?,
        Command::LawTail(a) => law_tail(a)?,
        Command::SimulateQf { xi, nu, n, reps, diag, offdiag, seed, out } => {
            simulate_qf(xi, nu, *n, *reps, diag, offdiag, *seed, out.as_ref())?
        }
        Command::SimulateOffdiag { xi, offdiag, n_grid, reps, seed, out } => {
            simulate_offdiag(xi, offdiag, n_grid, *reps, *seed, out.as_ref())?
        }
        Command::SimulateTrunc { xi, nu, n, reps, t_grid, seed, out } => {
            simulate_trunc(xi, nu, *n, *reps, t_grid, *seed, out.as_ref())?
        }
        Command::SimulateEsd { data, bins, eigenvalues_out } => simulate_esd(data, *bins, eigenvalues_out.as_ref())?,
        Command::SimulateEmbed { data, z, seeds } => simulate_embed(data, z, *seeds)?,
        Command::SimulateAlpha0 { data, max_k } => simulate_alpha0(data, *max_k)?,
        Command::CheckHw { xi, nu, n, reps, offdiag, t_grid, seed, out } => {
            check_hw(xi, nu, *n, *reps, offdiag, t_grid.as_deref(), *seed, out.as_ref())?
        }
        Command::CheckResolventConc { data, z, f, seeds, t_grid } => check_resolvent_conc(data, *z, f, *seeds, t_grid)?,
        Command::CheckLighttail { xi, nu, n_grid, reps, seed, out } => {
            check_lighttail(xi, nu, n_grid, *reps, *seed, out.as_ref())?
        }
        Command::Selftest { seed } => selftest::run(*seed)?,
    };
    report.write_tables()?;
    Ok(report)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn out_json(out: Option<&String>) -> Value {
    out.map_or(Value::Null, |p| json!(p))
}

fn law_setup(a: &LawArgs, default_grid: &str) -> Result<(Report, LimitLaw, Vec<f64>), CliError> {
    let NuArg { measure, echo } = parse_nu(&a.nu)?;
    let grid_spec = a.grid.clone().unwrap_or_else(|| default_grid.to_string());
    let grid = parse_grid(&grid_spec)?;
    let law = LimitLaw::new(measure, a.alpha)?;
    let mut r = Report::default();
    r.config("nu", echo).config("alpha", a.alpha).config("grid", grid_spec).config("seed", a.seed).config("out", out_json(a.out.as_ref()));
    Ok((r, law, grid))
}

fn law_density(a: &LawArgs) -> Result<Report, CliError> {
    let (mut r, law, grid) = law_setup(a, "0:1:101")?;
    let f = grid.iter().map(|x| law.density(*x)).collect::<Result<Vec<_>, _>>()?;
    r.invariant("density is nonnegative", f.iter().all(|v| *v >= 0.0));
    r.result("x", grid.clone()).result("density", f.clone());
    r.table(a.out.as_ref(), Table::from_columns(&["x", "density"], &[&grid, &f]));
    Ok(r)
}

fn law_cdf(a: &LawArgs) -> Result<Report, CliError> {
    let (mut r, law, grid) = law_setup(a, "0:1:101")?;
    let f = if grid.windows(2).all(|w| w[0] <= w[1]) {
        law.cdf_sorted(&grid)?
    } else {
        grid.iter().map(|x| law.cdf(*x)).collect::<Result<Vec<_>, _>>()?
    };
    r.invariant("cdf lies in [0, 1]", f.iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
    r.result("x", grid.clone()).result("cdf", f.clone());
    r.table(a.out.as_ref(), Table::from_columns(&["x", "cdf"], &[&grid, &f]));
    Ok(r)
}

fn law_moments(a: &LawArgs, max_order: usize) -> Result<Report, CliError> {
    let (mut r, law, _) = law_setup(a, "0:1:2")?;
    r.config.remove("grid");
    r.config("max_order", max_order);
    let orders: Vec<f64> = (1..=max_order).map(|l| l as f64).collect();
    let m = (1..=max_order).map(|l| law.moment(l)).collect::<Result<Vec<_>, _>>()?;
    r.result("order", (1..=max_order).collect::<Vec<_>>()).result("moment", m.clone());
    r.table(a.out.as_ref(), Table::from_columns(&["order", "moment"], &[&orders, &m]));
    Ok(r)
}

fn law_stieltjes(a: &LawArgs, zs: &[String], eta: f64) -> Result<Report, CliError> {
    let (mut r, law, grid) = law_setup(a, "-1:2:31")?;
    let points: Vec<Complex64> = if zs.is_empty() {
        if !(eta > 0.0) {
            return Err(CliError::Config("--eta must be positive".into()));
        }
        r.config("eta", eta);
        grid.iter().map(|x| Complex64::new(*x, eta)).collect()
    } else {
        r.config.remove("grid");
        zs.iter().map(|s| parse_complex(s)).collect::<Result<_, _>>()?
    };
    r.config("z", points.iter().map(|z| complex_json(*z)).collect::<Vec<_>>());
    let s = points.iter().map(|z| law.stieltjes(*z)).collect::<Result<Vec<_>, _>>()?;
    r.invariant("Im s has the sign of Im z", points.iter().zip(&s).all(|(z, v)| z.im * v.im >= 0.0));
    r.result("s", s.iter().map(|v| complex_json(*v)).collect::<Vec<_>>());
    let mut t = Table::new(&["z_re", "z_im", "s_re", "s_im"]);
    t.rows = points.iter().zip(&s).map(|(z, v)| vec![z.re, z.im, v.re, v.im]).collect();
    r.table(a.out.as_ref(), t);
    Ok(r)
}

fn law_atoms(a: &LawArgs, v_seq: Option<&str>) -> Result<Report, CliError> {
    let (mut r, law, grid) = law_setup(a, "0:1:20")?;
    let vs = v_seq.map(parse_list_f64).transpose()?;
    r.config("v_seq", vs.clone().map_or(Value::Null, |v| json!(v)));
    let m = grid.iter().map(|x| law.atom_mass(*x, vs.as_deref())).collect::<Result<Vec<_>, _>>()?;
    r.result("x", grid.clone()).result("atom_mass", m.clone()).result("max_atom_mass", m.iter().cloned().fold(0.0, f64::max));
    r.table(a.out.as_ref(), Table::from_columns(&["x", "atom_mass"], &[&grid, &m]));
    Ok(r)
}

fn law_tail(a: &LawArgs) -> Result<Report, CliError> {
    let mut a = a.clone();
    if a.nu == "twopoint" {
        // the bounded default has no tail
        a.nu = "exponential(1)".into();
    }
    let (mut r, law, grid) = law_setup(&a, "10:50:5")?;
    let f = grid.iter().map(|x| law.density(*x)).collect::<Result<Vec<_>, _>>()?;
    let g = grid.iter().map(|x| law.tail_asymptote(*x)).collect::<Result<Vec<_>, _>>()?;
    let ratio: Vec<f64> = f.iter().zip(&g).map(|(f, g)| f / g).collect();
    r.result("x", grid.clone()).result("density", f.clone()).result("asymptote", g.clone()).result("ratio", ratio.clone());
    r.table(a.out.as_ref(), Table::from_columns(&["x", "density", "asymptote", "ratio"], &[&grid, &f, &g, &ratio]));
    Ok(r)
}

fn offdiag_arg(s: &str) -> Result<OffDiag, CliError> {
    match s {
        "zero" => Ok(OffDiag::Zero),
        "gaussian" => Ok(OffDiag::DEFAULT_GAUSSIAN),
        other => Err(CliError::Config(format!("--offdiag must be zero or gaussian, got {other:?}"))),
    }
}

fn offdiag_echo(o: OffDiag) -> Value {
    match o {
        OffDiag::Zero => json!({"kind": "zero"}),
        OffDiag::GaussianScaled { exponent } => json!({"kind": "gaussian", "exponent": exponent}),
    }
}

fn summary_json(s: &Summary) -> Value {
    json!({
        "mean": s.mean,
        "mean_se": s.mean_se,
        "second_moment": s.second_moment,
        "second_moment_se": s.second_moment_se,
        "variance": s.variance,
    })
}

/// First two moments of the limit law when it exists and they are finite.
fn law_moments_json(xi: &HeavyTailSpec, nu: &heavyqf_core::measure::Measure) -> Value {
    let Some(alpha) = xi.alpha().filter(|a| *a > 0.0 && *a < 2.0) else { return Value::Null };
    let Ok(law) = LimitLaw::new(nu.clone(), alpha) else { return Value::Null };
    match (law.moment(1), law.moment(2)) {
        (Ok(m1), Ok(m2)) => json!([m1, m2]),
        _ => Value::Null,
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_qf(
    xi: &str,
    nu: &str,
    n: usize,
    reps: usize,
    diag: &str,
    offdiag: &str,
    seed: u64,
    out: Option<&String>,
) -> Result<Report, CliError> {
    let spec = parse_xi(xi)?;
    let NuArg { measure, echo } = parse_nu(nu)?;
    let diag_src = match diag {
        "grid" => DiagSource::QuantileGrid(measure.clone()),
        "iid" => DiagSource::IidDraw(measure.clone()),
        other => return Err(CliError::Config(format!("--diag must be grid or iid, got {other:?}"))),
    };
    let off = offdiag_arg(offdiag)?;
    let mut r = Report::default();
    r.config("xi", xi_echo(&spec))
        .config("nu", echo)
        .config("n", n)
        .config("reps", reps)
        .config("diag", diag)
        .config("offdiag", offdiag_echo(off))
        .config("seed", seed)
        .config("out", out_json(out));
    let res = simulate_qf_law(&spec, &TestMatrixSpec { n, diag: diag_src, offdiag: off }, reps, SeedStream::new(seed))?;
    r.result("q1", summary_json(&res.q1))
        .result("q", summary_json(&res.q))
        .result("diag_mean", res.diag_mean)
        .result("ks_q1", res.ks_q1)
        .result("ks_q", res.ks_q)
        .result("law_moments", law_moments_json(&spec, &measure));
    r.invariant("q = q1 + q2", res.samples.iter().all(|s| s.q == s.q1 + s.q2));
    let mut t = Table::new(&["rep", "q", "q1", "q2"]);
    t.rows = res.samples.iter().enumerate().map(|(i, s)| vec![i as f64, s.q, s.q1, s.q2]).collect();
    r.table(out, t);
    Ok(r)
}

fn simulate_offdiag(xi: &str, offdiag: &str, n_grid: &str, reps: usize, seed: u64, out: Option<&String>) -> Result<Report, CliError> {
    let spec = parse_xi(xi)?;
    let off = offdiag_arg(offdiag)?;
    let ns = parse_list_usize(n_grid)?;
    let mut r = Report::default();
    r.config("xi", xi_echo(&spec))
        .config("offdiag", offdiag_echo(off))
        .config("n_grid", ns.clone())
        .config("reps", reps)
        .config("seed", seed)
        .config("out", out_json(out));
    let rep = offdiag_vanishing_check(&spec, off, &ns, reps, SeedStream::new(seed))?;
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|w| {
            json!({"n": w.n, "q2_sq_mean": w.q2_sq_mean, "q2_sq_se": w.q2_sq_se, "frob_sq": w.frob_sq,
                   "beta22_hat": w.beta22_hat, "bound": w.bound, "proof_bound": w.proof_bound, "within_bound": w.within_bound})
        })
        .collect();
    let ratio = match (rep.rows.first(), rep.rows.last()) {
        (Some(a), Some(b)) if b.q2_sq_mean > 0.0 => a.q2_sq_mean / b.q2_sq_mean,
        _ => f64::NAN,
    };
    r.result("rows", rows).result("decreasing", rep.decreasing).result("first_over_last", ratio);
    if off != OffDiag::Zero {
        r.invariant("E[q2^2] within the proof bound", rep.rows.iter().all(|w| w.q2_sq_mean <= w.proof_bound));
    }
    let mut t = Table::new(&["n", "q2_sq_mean", "q2_sq_se", "frob_sq", "beta22_hat", "bound", "proof_bound"]);
    t.rows = rep.rows.iter().map(|w| vec![w.n as f64, w.q2_sq_mean, w.q2_sq_se, w.frob_sq, w.beta22_hat, w.bound, w.proof_bound]).collect();
    r.table(out, t);
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn simulate_trunc(xi: &str, nu: &str, n: usize, reps: usize, t_grid: &str, seed: u64, out: Option<&String>) -> Result<Report, CliError> {
    let spec = parse_xi(xi)?;
    let NuArg { measure, echo } = parse_nu(nu)?;
    let ts = parse_list_f64(t_grid)?;
    let mut r = Report::default();
    r.config("xi", xi_echo(&spec))
        .config("nu", echo)
        .config("n", n)
        .config("reps", reps)
        .config("t_grid", ts.clone())
        .config("seed", seed)
        .config("out", out_json(out));
    let rep = truncation_experiment(&spec, &measure, n, &ts, reps, SeedStream::new(seed))?;
    let f: Vec<f64> = rep.rows.iter().map(|w| w.functional).collect();
    let se: Vec<f64> = rep.rows.iter().map(|w| w.std_error).collect();
    r.result("functional", f.clone())
        .result("std_error", se.clone())
        .result("q1", summary_json(&rep.law.q1))
        .result("ks_q1", rep.law.ks_q1)
        .result("law_moments", law_moments_json(&spec, &measure));
    let mut sorted = ts.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted == ts {
        r.invariant("truncation functional nonincreasing in T", f.windows(2).all(|w| w[1] <= w[0]));
    }
    r.table(out, Table::from_columns(&["level", "functional", "std_error"], &[&ts, &f, &se]));
    Ok(r)
}

fn data_spec(d: &DataArgs, default_xi: &str, default_n: usize, r: &mut Report) -> Result<DataMatrixSpec, CliError> {
    let xi = parse_xi(d.xi.as_deref().unwrap_or(default_xi))?;
    let n = d.n.unwrap_or(default_n);
    let spec = match (d.p, d.gamma) {
        (Some(p), _) => DataMatrixSpec::new(p, n, xi)?,
        (None, Some(g)) => DataMatrixSpec::with_gamma(g, n, xi)?,
        (None, None) => DataMatrixSpec::new(n, n, xi)?,
    };
    if let (Some(p), Some(g)) = (d.p, d.gamma) {
        if ((p as f64 / n as f64) - g).abs() > 1.0 / n as f64 {
            return Err(CliError::Config(format!("--p {p} and --gamma {g} disagree at n = {n}")));
        }
    }
    r.config("xi", xi_echo(&spec.xi))
        .config("p", spec.p)
        .config("n", spec.n)
        .config("gamma", spec.gamma())
        .config("seed", d.seed)
        .config("out", out_json(d.out.as_ref()));
    Ok(spec)
}

fn simulate_esd(d: &DataArgs, bins: usize, eig_out: Option<&String>) -> Result<Report, CliError> {
    let mut r = Report::default();
    let spec = data_spec(d, "pareto(1)", 500, &mut r)?;
    r.config("bins", bins).config("eigenvalues_out", out_json(eig_out));
    let y = build_correlation_matrix(&spec, SeedStream::new(d.seed))?;
    let s = spectrum(&y, bins)?;
    let mean = s.eigenvalues.iter().sum::<f64>() / s.eigenvalues.len() as f64;
    r.result("trace", s.trace)
        .result("eigenvalue_mean", mean)
        .result("eigenvalue_max", s.eigenvalues.first().copied().unwrap_or(0.0))
        .result("edges", s.esd_histogram.edges.clone())
        .result("masses", s.esd_histogram.masses.clone());
    r.invariant("eigenvalue mean equals trace / p", (mean - 1.0).abs() < 1e-10);
    r.invariant("eigenvalues are nonnegative", s.eigenvalues.iter().all(|l| *l >= -1e-10));
    let h = &s.esd_histogram;
    let mut t = Table::new(&["left", "right", "mass"]);
    t.rows = h.masses.iter().enumerate().map(|(i, m)| vec![h.edges[i], h.edges[i + 1], *m]).collect();
    r.table(d.out.as_ref(), t);
    let idx: Vec<f64> = (0..s.eigenvalues.len()).map(|i| i as f64).collect();
    r.table(eig_out, Table::from_columns(&["index", "eigenvalue"], &[&idx, &s.eigenvalues]));
    Ok(r)
}

fn simulate_embed(d: &DataArgs, z: &str, seeds: usize) -> Result<Report, CliError> {
    let mut r = Report::default();
    let spec = data_spec(d, "pareto(1)", 500, &mut r)?;
    let z = parse_complex(z)?;
    if seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    r.config("z", complex_json(z)).config("seeds", seeds);
    let base = SeedStream::new(d.seed);
    let res = (0..seeds).map(|s| embedding_check(&spec, z, base.substream(s as u64))).collect::<Result<Vec<_>, _>>()?;
    let gaps: Vec<f64> = res.iter().map(|e| e.gap).collect();
    let mean_gap = gaps.iter().sum::<f64>() / seeds as f64;
    r.result("lhs", res.iter().map(|e| complex_json(e.lhs)).collect::<Vec<_>>())
        .result("rhs", res.iter().map(|e| complex_json(e.rhs)).collect::<Vec<_>>())
        .result("gap", gaps.clone())
        .result("mean_gap", mean_gap);
    if z.im == 0.0 {
        r.invariant("both sides real at real z", res.iter().all(|e| e.lhs.im.abs() < 1e-10 && e.rhs.im.abs() < 1e-10));
    }
    let mut t = Table::new(&["seed", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap"]);
    t.rows = res.iter().enumerate().map(|(i, e)| vec![i as f64, e.lhs.re, e.lhs.im, e.rhs.re, e.rhs.im, e.gap]).collect();
    r.table(d.out.as_ref(), t);
    Ok(r)
}

fn simulate_alpha0(d: &DataArgs, max_k: usize) -> Result<Report, CliError> {
    let mut r = Report::default();
    let spec = data_spec(d, "slowly_varying", 2000, &mut r)?;
    r.config("max_k", max_k);
    let res = alpha0_construction(&spec, max_k, SeedStream::new(d.seed))?;
    let g = spec.gamma();
    let zip: Vec<f64> = (0..=max_k).map(|k| zero_inflated_poisson_mass(g, k)).collect();
    let mr = res.esd_r.masses.clone();
    let mt = res.esd_rtilde.masses.clone();
    r.result("mass_r", mr.clone())
        .result("mass_rtilde", mt.clone())
        .result("zero_inflated_poisson", zip.clone())
        .result("zero_mass_r", mr[0])
        .result("zero_mass_rtilde", mt[0])
        .result("occupancy_total", res.multinomial_diag.iter().sum::<u64>());
    r.invariant("occupancy counts sum to p", res.multinomial_diag.iter().sum::<u64>() == spec.p as u64);
    let ks: Vec<f64> = (0..=max_k).map(|k| k as f64).collect();
    r.table(d.out.as_ref(), Table::from_columns(&["k", "mass_r", "mass_rtilde", "zero_inflated_poisson"], &[&ks, &mr, &mt, &zip]));
    Ok(r)
}

fn fit_json(f: &heavyqf_core::concentration::FitSummary) -> Value {
    json!({"big_c": f.big_c, "small_c": f.small_c, "exponent": f.exponent, "bound_value": f.bound_value,
           "points_fitted": f.points_fitted, "fit_ok": f.fit_ok})
}

#[allow(clippy::too_many_arguments)]
fn check_hw(
    xi: &str,
    nu: &str,
    n: usize,
    reps: usize,
    offdiag: &str,
    t_grid: Option<&str>,
    seed: u64,
    out: Option<&String>,
) -> Result<Report, CliError> {
    let spec = parse_xi(xi)?;
    let NuArg { measure, echo } = parse_nu(nu)?;
    let off = offdiag_arg(offdiag)?;
    let ts = t_grid.map(parse_list_f64).transpose()?;
    let mut r = Report::default();
    r.config("xi", xi_echo(&spec))
        .config("nu", echo)
        .config("n", n)
        .config("reps", reps)
        .config("offdiag", offdiag_echo(off))
        .config("t_grid", ts.clone().map_or(Value::Null, |v| json!(v)))
        .config("seed", seed)
        .config("out", out_json(out));
    let cfg = HwConfig { xi: spec, a_spec: TestMatrixSpec { n, diag: DiagSource::QuantileGrid(measure), offdiag: off }, reps, t_grid: ts };
    let rep = hw_tail_experiment(&cfg, SeedStream::new(seed))?;
    r.result("t_grid", rep.t_grid.clone())
        .result("empirical_prob", rep.empirical_prob.clone())
        .result("mean", rep.mean)
        .result("sd", rep.sd)
        .result("k_proxy", rep.k_proxy)
        .result("op_norm", rep.op_norm)
        .result("frob_norm", rep.frob_norm)
        .result("spherical", fit_json(&rep.spherical))
        .result("classical", fit_json(&rep.classical));
    r.invariant("tail fit has the Hanson-Wright shape", rep.spherical.fit_ok);
    r.table(
        out,
        Table::from_columns(
            &["t", "empirical_prob", "spherical_bound", "classical_bound"],
            &[&rep.t_grid, &rep.empirical_prob, &rep.spherical.bound_value, &rep.classical.bound_value],
        ),
    );
    Ok(r)
}

fn check_resolvent_conc(d: &DataArgs, z: f64, f: &str, seeds: usize, t_grid: &str) -> Result<Report, CliError> {
    let mut r = Report::default();
    let spec = data_spec(d, "pareto(1)", 150, &mut r)?;
    let stat = match f {
        "re" => LipschitzStat::Re,
        "im" => LipschitzStat::Im,
        "abs" => LipschitzStat::Abs,
        other => return Err(CliError::Config(format!("--f must be re, im or abs, got {other:?}"))),
    };
    let ts = parse_list_f64(t_grid)?;
    r.config("z", z).config("f", f).config("seeds", seeds).config("t_grid", ts.clone());
    let rep = resolvent_concentration_experiment(&spec, z, stat, seeds, &ts, SeedStream::new(d.seed))?;
    let relevant: Vec<usize> = rep.violations.iter().copied().filter(|&i| rep.bound[i] < 0.5).collect();
    r.result("empirical_prob", rep.empirical_prob.clone())
        .result("bound", rep.bound.clone())
        .result("violations", rep.violations.clone())
        .result("statistics", rep.statistics.clone());
    r.invariant("Azuma bound holds where it is below 1/2", relevant.is_empty());
    r.table(d.out.as_ref(), Table::from_columns(&["t", "empirical_prob", "bound"], &[&ts, &rep.empirical_prob, &rep.bound]));
    Ok(r)
}

fn check_lighttail(xi: &str, nu: &str, n_grid: &str, reps: usize, seed: u64, out: Option<&String>) -> Result<Report, CliError> {
    let spec = parse_xi(xi)?;
    let NuArg { measure, echo } = parse_nu(nu)?;
    let ns = parse_list_usize(n_grid)?;
    let mut r = Report::default();
    r.config("xi", xi_echo(&spec))
        .config("nu", echo)
        .config("n_grid", ns.clone())
        .config("reps", reps)
        .config("seed", seed)
        .config("out", out_json(out));
    let rep = light_tail_degeneration(&spec, &measure, &ns, reps, SeedStream::new(seed))?;
    let var: Vec<f64> = rep.rows.iter().map(|w| w.variance).collect();
    let nb4: Vec<f64> = rep.rows.iter().map(|w| w.n_beta4).collect();
    r.result("variance", var.clone()).result("n_beta4", nb4.clone()).result("decreasing", rep.decreasing).result("ratio", rep.ratio);
    if spec.is_sub_gaussian() {
        r.invariant("variance decreases along n", rep.decreasing);
    }
    let nsf: Vec<f64> = ns.iter().map(|v| *v as f64).collect();
    r.table(out, Table::from_columns(&["n", "variance", "n_beta4"], &[&nsf, &var, &nb4]));
    Ok(r)
}
