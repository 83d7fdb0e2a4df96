mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use subspectra::algebraic::{classify, conjugates, AlgebraicInteger, ZThetaElement};
use subspectra::bernoulli::{bc_fourier, bc_log_decay_scan, erdos_nondecay, nondecay_values, terms_for, BernoulliParams};
use subspectra::config::Config;
use subspectra::diophantine::{ek_constants, ek_frequency, pisot_sequence, prop_alg_product, window_escape_check};
use subspectra::flows::{
    default_anchor_times, ergodic_decomposition_check, flow_class, log_holder_certificate, second_eigen, zero_scaling_experiment, Anchor,
    Cocycle, Cylindrical, GaussianProfile, SuspensionFlow,
};
use subspectra::riesz::RieszEngine;
use subspectra::spectral::{
    dioph_constants, dioph_factor, dioph_sum_bound, fejer_ball_bound, g_estimate, local_dimension_bound, return_word_dists, TwistedSums,
};
use subspectra::substitution::{find_return_word, is_aperiodic_heuristic, is_primitive, perron_data, substitution_matrix, Letter};
use subspectra::{Error, Result};

use output::{num, opt, Run};

#[derive(Parser, Debug)]
#[command(name = "subspectra", version, about = "Spectral measures of substitution systems and their suspension flows")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
struct Global {
    /// Substitution config (JSON or TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and manifest files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for grid tasks (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Seed for window jitter; jitter is off when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run on inputs that violate a hypothesis and report the violation.
    #[arg(long, global = true)]
    diagnostic: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Matrix, PF data, classification, return word and aperiodicity.
    Inspect,
    /// Product bounds, Fejér bounds and local dimensions on an ω grid.
    Spectral(SpectralArgs),
    #[command(subcommand)]
    Flow(FlowCmd),
    #[command(subcommand)]
    Dioph(DiophCmd),
    #[command(subcommand)]
    Bernoulli(BernoulliCmd),
}

#[derive(Args, Debug, serde::Serialize)]
struct SpectralArgs {
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_max: f64,
    /// Number of grid points on [omega_min, omega_max).
    #[arg(long, default_value_t = 1000)]
    omega_count: usize,
    /// Levels of the matrix product.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Letter a of f = 1_[a].
    #[arg(long, default_value_t = 1)]
    letter: usize,
    /// Birkhoff window length N; the Fejér radius is 1/(2N).
    #[arg(long, default_value_t = 1000)]
    window_len: u64,
    #[arg(long, default_value_t = 64)]
    windows: usize,
}

#[derive(Subcommand, Debug)]
enum FlowCmd {
    LogHolder(LogHolderArgs),
    Cocycle(CocycleArgs),
    ZeroScaling(ZeroScalingArgs),
    Decomposition(DecompositionArgs),
}

#[derive(Args, Debug, serde::Serialize)]
struct LogHolderArgs {
    #[arg(long, default_value_t = 1)]
    letter: usize,
    #[arg(long, default_value_t = 4.0)]
    b_range: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1.5,2.5")]
    omegas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    windows: usize,
}

#[derive(Args, Debug, serde::Serialize)]
struct CocycleArgs {
    /// Anchors at tiles 0, stride, 2·stride, …
    #[arg(long, default_value_t = 8)]
    anchors: u64,
    #[arg(long, default_value_t = 37)]
    stride: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,1,10,100,1000")]
    times: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    levels: usize,
}

#[derive(Args, Debug, serde::Serialize)]
struct ZeroScalingArgs {
    /// Value of f on each tile type.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,-1")]
    values: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    n_min: u32,
    #[arg(long, default_value_t = 9)]
    n_max: u32,
    #[arg(long, default_value_t = 16)]
    anchors: usize,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
}

#[derive(Args, Debug, serde::Serialize)]
struct DecompositionArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,-1")]
    values: Vec<f64>,
    /// The t grid runs geometrically from θ^e_min to θ^e_max.
    #[arg(long, default_value_t = 5.0)]
    e_min: f64,
    #[arg(long, default_value_t = 12.0)]
    e_max: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    anchor_tile: u64,
    #[arg(long, default_value_t = 0.0)]
    anchor_offset: f64,
    #[arg(long, default_value_t = 40)]
    levels: usize,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
struct PolyArgs {
    /// Monic integer polynomial, highest degree first (overrides the config).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    poly: Option<Vec<i64>>,
}

#[derive(Args, Debug, serde::Serialize)]
struct DiophArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// Coordinates of t in the basis 1, θ, …
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    t: Vec<i64>,
    #[arg(long, default_value_t = 100)]
    n: usize,
}

#[derive(Args, Debug, serde::Serialize)]
struct EkArgs {
    #[command(flatten)]
    base: DiophArgs,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Threshold; defaults to the computed ρ.
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum DiophCmd {
    /// K_k and ‖tθᵏ‖ for k ≤ N.
    Sequence(DiophArgs),
    /// exp(−Σ‖tθᵏ‖²) against its power bound.
    Product(DiophArgs),
    /// Escape windows [k, βk−1] for k ≤ N.
    Windows(DiophArgs),
    /// Erdős–Kahane constants and the large-distance count.
    Ek(EkArgs),
}

#[derive(Args, Debug, serde::Serialize)]
struct ScanArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    n_min: u32,
    #[arg(long, default_value_t = 40)]
    n_max: u32,
    /// Base points u ∈ [1, θ]; ξ = θᴺu.
    #[arg(long, value_delimiter = ',', default_value = "1,1.25,1.5,1.75,2")]
    us: Vec<f64>,
}

#[derive(Args, Debug, serde::Serialize)]
struct NonDecayArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long, default_value_t = 25)]
    n: u32,
}

#[derive(Args, Debug, serde::Serialize)]
struct FourierArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// λ directly; otherwise λ = 1/θ from the polynomial.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.5,1,2,5,10")]
    xi: Vec<f64>,
}

#[derive(Subcommand, Debug)]
enum BernoulliCmd {
    /// |ν̂^p(θᴺu)|·(log(2+ξ))^α next to the chain product.
    Scan(ScanArgs),
    /// |ν̂(θᴺ)| and its running infimum for PV θ.
    Nondecay(NonDecayArgs),
    /// ν̂^p_λ(ξ) on a list of ξ.
    Fourier(FourierArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WrongClass(_) | Error::NotMeanZero(_) => 2,
        Error::PrecisionExhausted { .. } | Error::HalfIntegerAmbiguity { .. } => 3,
        Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidSubstitution(_) | Error::RadiusTooLarge(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.global.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Loaded {
    cfg: Config,
    text: String,
}

fn load_config(g: &Global) -> Result<Loaded> {
    let path = g.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = Config::parse_str(&text)?;
    Ok(Loaded { cfg, text })
}

fn load_poly(g: &Global, p: &PolyArgs) -> Result<(AlgebraicInteger, Vec<i64>, Option<String>)> {
    if let Some(c) = &p.poly {
        return Ok((AlgebraicInteger::from_high_first(c)?, c.clone(), None));
    }
    let l = load_config(g)?;
    let c = l.cfg.poly.clone().ok_or_else(|| Error::Config("no --poly given and the config has no poly".into()))?;
    Ok((AlgebraicInteger::from_high_first(&c)?, c, Some(l.text)))
}

fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Inspect => cmd_inspect(g),
        Cmd::Spectral(a) => cmd_spectral(g, a),
        Cmd::Flow(f) => cmd_flow(g, f),
        Cmd::Dioph(d) => cmd_dioph(g, d),
        Cmd::Bernoulli(b) => cmd_bernoulli(g, b),
    }
}

fn params(g: &Global, a: impl serde::Serialize) -> serde_json::Value {
    json!({ "global": g, "args": a })
}

fn cmd_inspect(g: &Global) -> Result<u8> {
    let l = load_config(g)?;
    let z = l.cfg.substitution()?;
    let s = substitution_matrix(&z);
    let mut run = Run::new("inspect", &g.out, params(g, json!({})), Some(&l.text), g.precision_bits)?;
    let prim = is_primitive(&s);
    let mut report = json!({
        "alphabet": z.m(),
        "images": l.cfg.images,
        "matrix": s,
        "primitive_power": prim,
        "aperiodicity": is_aperiodic_heuristic(&z, 4096),
    });
    if prim.is_some() {
        let pd = perron_data(&s, g.precision_bits)?;
        let theta = AlgebraicInteger::perron_of(&s)?;
        let cl = classify(&theta)?;
        let rw = find_return_word(&z, 64)?;
        report["theta"] = json!(pd.theta_f64());
        report["theta_radius"] = json!(pd.theta.rad_f64());
        report["r"] = json!(pd.r_f64());
        report["l"] = json!(pd.l_f64());
        report["minimal_polynomial"] = json!(theta.poly().to_high_first().iter().map(|c| c.to_string()).collect::<Vec<_>>());
        report["conjugates"] = json!(conjugates(&theta));
        report["classification"] = json!(cl);
        report["return_word"] = json!({ "v": z.display_word(&rw.v), "c": rw.c as usize + 1, "power": rw.power });
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    run.write_json("inspect.json", &report)?;
    run.derive("report", &report);
    run.finish("ok")?;
    Ok(0)
}

fn letter_arg(a: usize, m: usize) -> Result<Letter> {
    if a == 0 || a > m {
        return Err(Error::InvalidArgument(format!("letter {a} not in 1..={m}")));
    }
    Ok((a - 1) as Letter)
}

/// Window starts, shifted by seeded jitter in `[0, N)` when a seed is set.
fn windows(n: u64, count: usize, seed: Option<u64>) -> Vec<(u64, u64)> {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    (0..count as u64)
        .map(|i| {
            let j = rng.as_mut().map_or(0, |r| r.gen_range(0..n));
            (2 * i * n + j, n)
        })
        .collect()
}

fn cmd_spectral(g: &Global, a: &SpectralArgs) -> Result<u8> {
    let l = load_config(g)?;
    let z = l.cfg.substitution()?;
    let letter = letter_arg(a.letter, z.m())?;
    if a.n < 10 {
        return Err(Error::InvalidArgument("--n must be at least 10".into()));
    }
    if a.window_len == 0 || a.windows == 0 || !(a.omega_max >= a.omega_min) {
        return Err(Error::InvalidArgument("empty window or reversed ω range".into()));
    }
    let mut run = Run::new("spectral", &g.out, params(g, a), Some(&l.text), g.precision_bits)?;
    let s = substitution_matrix(&z);
    let pd = perron_data(&s, g.precision_bits)?;
    let theta = pd.theta_f64();
    let rw = find_return_word(&z, 64)?;
    let zl = z.power(rw.power)?;
    let consts = dioph_constants(&zl, &rw.v, 40)?;
    let top = (a.window_len as f64).ln() / consts.theta.ln() - consts.c2;
    let sum_levels = if top < 0.0 { 0 } else { top.floor() as usize + 1 };
    let engine_l = RieszEngine::discrete(&zl, a.n.max(sum_levels) + 1);
    let engine = RieszEngine::discrete(&z, a.n);
    let wins = windows(a.window_len, a.windows, g.seed);
    let max_end = wins.iter().map(|w| w.0 + w.1).max().unwrap_or(0);
    let mut d = vec![Complex64::new(0.0, 0.0); z.m()];
    d[letter as usize] = Complex64::new(1.0, 0.0);
    let fejer_n = a.window_len;
    let omegas: Vec<f64> =
        (0..a.omega_count).map(|i| a.omega_min + (a.omega_max - a.omega_min) * i as f64 / a.omega_count as f64).collect();

    let rows: Vec<(Vec<String>, Option<Error>)> = omegas
        .par_iter()
        .map_init(
            || TwistedSums::new(&z, max_end),
            |ts, &omega| {
                let res = (|| -> Result<Vec<String>> {
                    let ts = ts.as_mut().map_err(|e| e.clone())?;
                    let dists = return_word_dists(&engine_l, &consts.return_word, omega, a.n)?;
                    let product = dioph_factor(&dists, consts.c1);
                    let sb = dioph_sum_bound(&engine_l, &consts, omega, a.window_len)?;
                    let ge = g_estimate(ts, &d, omega, &wins)?;
                    let fejer = fejer_ball_bound(ge.mean, fejer_n)?;
                    let certified = fejer_ball_bound(sb * sb / a.window_len as f64, fejer_n)?;
                    let ld = local_dimension_bound(&engine, theta, omega, a.n)?;
                    Ok(vec![
                        num(omega),
                        "ok".into(),
                        num(product),
                        num(sb),
                        num(ge.mean),
                        num(ge.spread),
                        num(fejer),
                        num(certified.min(1.0)),
                        num(ld.alpha),
                        num(ld.lower_bound),
                    ])
                })();
                match res {
                    Ok(r) => (r, None),
                    Err(e) => {
                        let mut r = vec![num(omega), status(&e)];
                        r.resize(10, String::new());
                        (r, Some(e))
                    }
                }
            },
        )
        .collect();
    let header = [
        "omega",
        "status",
        "product",
        "sum_bound",
        "g_mean",
        "g_spread",
        "fejer_bound",
        "fejer_bound_certified",
        "alpha_omega",
        "local_dim_lower",
    ];
    let csv_rows: Vec<Vec<String>> = rows.iter().map(|r| r.0.clone()).collect();
    run.write_csv(&header, &csv_rows)?;
    run.derive("theta", theta);
    run.derive("radius", 0.5 / fejer_n as f64);
    run.derive("dioph_constants", &consts);
    let worst = rows.iter().filter_map(|r| r.1.as_ref()).map(exit_code).max().unwrap_or(0);
    run.finish(if worst == 0 { "ok" } else { "rows flagged" })?;
    Ok(worst)
}

fn status(e: &Error) -> String {
    match e {
        Error::PrecisionExhausted { .. } => "PrecisionExhausted".into(),
        Error::WrongClass(_) => "WrongClass".into(),
        other => format!("{other}"),
    }
}

fn load_flow(g: &Global) -> Result<(Loaded, SuspensionFlow)> {
    let l = load_config(g)?;
    let z = l.cfg.substitution()?;
    let flow = match &l.cfg.roof {
        Some(r) => SuspensionFlow::new(&z, r, false)?,
        None => SuspensionFlow::self_similar(&z, g.precision_bits)?,
    };
    Ok((l, flow))
}

fn cmd_flow(g: &Global, f: &FlowCmd) -> Result<u8> {
    let (l, mut flow) = load_flow(g)?;
    match f {
        FlowCmd::LogHolder(a) => {
            let class = flow_class(&flow)?;
            if class != subspectra::algebraic::ClassKind::HasConjugateOutside && !g.diagnostic {
                return Err(Error::WrongClass(format!("θ must have a conjugate outside the unit circle, got {class:?}")));
            }
            let letter = letter_arg(a.letter, flow.zeta.m())?;
            let mut run = Run::new("flow log-holder", &g.out, params(g, a), Some(&l.text), g.precision_bits)?;
            let cert = log_holder_certificate(&mut flow, letter, a.b_range, &a.omegas, &a.radii, a.windows)?;
            let theta = AlgebraicInteger::perron_of(&substitution_matrix(&flow.zeta))?;
            let ths: Vec<Complex64> = ek_theta_list(&theta);
            let ek = ek_constants(&ths)?;
            let rows: Vec<Vec<String>> = cert
                .rows
                .iter()
                .map(|r| vec![num(r.omega), num(r.r), num(r.bound), num(r.fejer_bound), r.out_of_regime.to_string()])
                .collect();
            run.write_csv(&["omega", "r", "bound", "fejer_bound", "out_of_regime"], &rows)?;
            run.derive("gamma", cert.gamma);
            run.derive("c1", cert.c1);
            run.derive("alpha", cert.alpha);
            run.derive("alpha_theta", cert.alpha_theta);
            run.derive("beta", cert.beta);
            run.derive("return_word_power", cert.power);
            run.derive("r0", cert.r0);
            run.derive("c_values", &cert.c_values);
            run.derive("rho", ek.rho);
            run.derive("L", ek.l);
            run.finish("ok")?;
        }
        FlowCmd::Cocycle(a) => {
            let mut run = Run::new("flow cocycle", &g.out, params(g, a), Some(&l.text), g.precision_bits)?;
            let coc = Cocycle::new(&flow)?;
            let mut rows = Vec::new();
            for i in 0..a.anchors {
                let x = Anchor { n: i * a.stride, u: 0.0 };
                for &t in &a.times {
                    let e = coc.evaluate(&mut flow, x, t, a.levels)?;
                    rows.push(vec![x.n.to_string(), num(x.u), num(t), num(e.value), num(e.error_bound), e.k_used.to_string()]);
                }
            }
            run.write_csv(&["anchor_tile", "anchor_offset", "t", "value", "error_bound", "levels"], &rows)?;
            run.derive("second_eigen", &coc.eigen);
            run.derive("piece_bound", coc.piece_bound);
            run.finish("ok")?;
        }
        FlowCmd::ZeroScaling(a) => {
            let mut run = Run::new("flow zero-scaling", &g.out, params(g, a), Some(&l.text), g.precision_bits)?;
            let f = cylindrical(&a.values, flow.zeta.m())?;
            let psi = GaussianProfile { amplitude: 1.0, width: a.width };
            let times = default_anchor_times(&psi, a.anchors);
            let zs = zero_scaling_experiment(&mut flow, &f, psi, a.n_min..=a.n_max, &times)?;
            let rows: Vec<Vec<String>> = zs
                .rows
                .iter()
                .map(|r| vec![r.n.to_string(), num(r.t_scale), num(r.value), num(r.ratio), num(r.truncation_error)])
                .collect();
            run.write_csv(&["n", "t_scale", "value", "ratio", "truncation_error"], &rows)?;
            run.derive("alpha", zs.alpha);
            run.derive("m_phi2_minus", zs.m_phi2_minus);
            run.derive("relative_spread", zs.relative_spread);
            run.derive("second_eigen", second_eigen(&flow.zeta)?);
            run.finish("ok")?;
        }
        FlowCmd::Decomposition(a) => {
            let mut run = Run::new("flow decomposition", &g.out, params(g, a), Some(&l.text), g.precision_bits)?;
            let f = cylindrical(&a.values, flow.zeta.m())?;
            let th = flow.theta();
            let pts = a.points.max(2);
            let grid: Vec<f64> =
                (0..pts).map(|i| th.powf(a.e_min + (a.e_max - a.e_min) * i as f64 / (pts - 1) as f64)).collect();
            let x = Anchor { n: a.anchor_tile, u: a.anchor_offset };
            let rows = ergodic_decomposition_check(&mut flow, &f, x, &grid, a.levels)?;
            let max_exp = rows.iter().filter_map(|r| r.exponent).fold(f64::NEG_INFINITY, f64::max);
            let csv: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![num(r.t), num(r.s), num(r.main), num(r.remainder), opt(r.exponent), num(r.cocycle_error)])
                .collect();
            run.write_csv(&["t", "integral", "main", "remainder", "exponent", "cocycle_error"], &csv)?;
            run.derive("max_exponent", max_exp);
            run.derive("second_eigen", second_eigen(&flow.zeta)?);
            run.finish("ok")?;
        }
    }
    Ok(0)
}

fn cylindrical(values: &[f64], m: usize) -> Result<Cylindrical> {
    if values.len() != m {
        return Err(Error::InvalidArgument(format!("{} values for {m} tile types", values.len())));
    }
    Ok(Cylindrical::constant(values))
}

fn ek_theta_list(theta: &AlgebraicInteger) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = conjugates(theta).into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
    c.swap(0, theta.root_index());
    c
}

fn t_element(t: &[i64], s: usize) -> Result<ZThetaElement> {
    if t.len() > s {
        return Err(Error::InvalidArgument(format!("t has {} coordinates, degree is {s}", t.len())));
    }
    let mut c = t.to_vec();
    c.resize(s, 0);
    Ok(ZThetaElement::from_i64(&c))
}

fn cmd_dioph(g: &Global, d: &DiophCmd) -> Result<u8> {
    let (name, base) = match d {
        DiophCmd::Sequence(a) => ("dioph sequence", a),
        DiophCmd::Product(a) => ("dioph product", a),
        DiophCmd::Windows(a) => ("dioph windows", a),
        DiophCmd::Ek(a) => ("dioph ek", &a.base),
    };
    let (theta, coeffs, text) = load_poly(g, &base.poly)?;
    let t = t_element(&base.t, theta.degree())?;
    let ps = match d {
        DiophCmd::Ek(a) => params(g, a),
        _ => params(g, base),
    };
    let mut run = Run::new(name, &g.out, ps, text.as_deref(), g.precision_bits)?;
    run.derive("poly", &coeffs);
    run.derive("classification", classify(&theta)?);
    let mut code = 0;
    match d {
        DiophCmd::Sequence(a) => {
            let seq = pisot_sequence(&theta, &t, a.n, 1e-12)?;
            let rows: Vec<Vec<String>> = (0..seq.len())
                .map(|k| {
                    vec![k.to_string(), seq.k[k].to_string(), num(seq.eps[k].mid_f64()), num(seq.eps[k].rad_f64()), num(seq.dist_lower(k)), num(seq.dist_upper(k))]
                })
                .collect();
            run.write_csv(&["k", "K", "eps", "eps_radius", "dist_lower", "dist_upper"], &rows)?;
            run.derive("bits_used", seq.bits_used);
        }
        DiophCmd::Product(a) => {
            let pr = prop_alg_product(&theta, &t, a.n, g.diagnostic)?;
            let rows: Vec<Vec<String>> =
                (0..pr.log_values.len()).map(|n| vec![n.to_string(), num(pr.value(n)), opt(pr.bound(n).filter(|_| n >= pr.first_n))]).collect();
            run.write_csv(&["n", "value", "bound"], &rows)?;
            run.derive("constants", &pr.constants);
            run.derive("fitted_c", pr.fitted_c);
            run.derive("decay_slope", pr.decay_slope);
            run.derive("monotone", pr.monotone);
            run.derive("first_violation", pr.first_violation);
            run.derive("hypothesis_violated", pr.hypothesis_violated);
            if pr.hypothesis_violated {
                code = 2;
            }
        }
        DiophCmd::Windows(a) => {
            let rep = window_escape_check(&theta, &t, None, a.n, g.diagnostic)?;
            let rows: Vec<Vec<String>> = rep
                .windows
                .iter()
                .map(|w| vec![w.k.to_string(), w.witness.map(|i| i.to_string()).unwrap_or_default(), num(w.max_dist), w.witness.is_some().to_string()])
                .collect();
            run.write_csv(&["k", "witness", "max_dist", "pass"], &rows)?;
            run.derive("delta1", rep.delta1);
            run.derive("beta", rep.beta);
            run.derive("k0", rep.k0);
            run.derive("all_pass", rep.first_violation.is_none());
            run.derive("first_violation", rep.first_violation);
            run.derive("hypothesis_violated", rep.hypothesis_violated);
            if rep.hypothesis_violated {
                code = 2;
            }
        }
        DiophCmd::Ek(a) => {
            let ths = ek_theta_list(&theta);
            let ek = ek_constants(&ths)?;
            let rho = a.rho.unwrap_or(ek.rho);
            let mut coef = vec![Complex64::new(0.0, 0.0); ths.len()];
            coef[0] = Complex64::new(1.0, 0.0);
            let fr = ek_frequency(&ths, &coef, a.omega, a.base.n, rho)?;
            let rows: Vec<Vec<String>> =
                fr.dists.iter().enumerate().map(|(i, &x)| vec![(i + 1).to_string(), num(x), (x >= rho).to_string()]).collect();
            run.write_csv(&["n", "dist", "at_least_rho"], &rows)?;
            run.derive("rho", ek.rho);
            run.derive("L", ek.l);
            run.derive("kappa", ek.kappa);
            run.derive("count", fr.count);
        }
    }
    run.finish(if code == 0 { "ok" } else { "hypothesis violated" })?;
    Ok(code)
}

fn cmd_bernoulli(g: &Global, b: &BernoulliCmd) -> Result<u8> {
    match b {
        BernoulliCmd::Scan(a) => {
            let (theta, coeffs, text) = load_poly(g, &a.poly)?;
            let mut run = Run::new("bernoulli scan", &g.out, params(g, a), text.as_deref(), g.precision_bits)?;
            if !g.diagnostic {
                subspectra::diophantine::require_conjugate_outside(&theta)?;
            }
            let scan = bc_log_decay_scan(&theta, a.p, a.n_min..=a.n_max, &a.us)?;
            let rows: Vec<Vec<String>> = scan
                .rows
                .iter()
                .map(|r| vec![r.n.to_string(), num(r.u), num(r.xi), num(r.re), num(r.im), num(r.modulus), num(r.tail_bound), num(r.bound_chain), num(r.scan_value)])
                .collect();
            run.write_csv(&["n", "u", "xi", "re", "im", "modulus", "tail_bound", "chain_bound", "scan_value"], &rows)?;
            run.derive("poly", coeffs);
            run.derive("alpha", scan.alpha);
            run.derive("chain_constant", scan.chain_constant);
            run.derive("sup", scan.sup);
            run.derive("chain_violations", scan.chain_violations);
            run.finish("ok")?;
        }
        BernoulliCmd::Nondecay(a) => {
            let (theta, coeffs, text) = load_poly(g, &a.poly)?;
            let mut run = Run::new("bernoulli nondecay", &g.out, params(g, a), text.as_deref(), g.precision_bits)?;
            let nd = if g.diagnostic { nondecay_values(&theta, a.n)? } else { erdos_nondecay(&theta, a.n)? };
            let rows: Vec<Vec<String>> =
                nd.values.iter().zip(&nd.running_inf).enumerate().map(|(n, (v, i))| vec![n.to_string(), num(*v), num(*i)]).collect();
            run.write_csv(&["n", "modulus", "running_inf"], &rows)?;
            run.derive("poly", coeffs);
            run.derive("floor", nd.floor);
            run.finish("ok")?;
        }
        BernoulliCmd::Fourier(a) => {
            let (params_b, text) = match a.lambda {
                Some(l) => (BernoulliParams::new(l, a.p)?, None),
                None => {
                    let (theta, _, text) = load_poly(g, &a.poly)?;
                    (BernoulliParams::from_theta(theta, a.p)?, text)
                }
            };
            let mut run = Run::new("bernoulli fourier", &g.out, params(g, a), text.as_deref(), g.precision_bits)?;
            let mut rows = Vec::new();
            for &xi in &a.xi {
                let n = terms_for(params_b.lambda, params_b.p, xi, 1e-14);
                let v = bc_fourier(&params_b, xi, n)?;
                rows.push(vec![num(xi), num(v.value.re), num(v.value.im), num(v.value.norm()), num(v.tail_bound), v.n_terms.to_string()]);
            }
            run.write_csv(&["xi", "re", "im", "modulus", "tail_bound", "terms"], &rows)?;
            run.derive("lambda", params_b.lambda);
            run.derive("p", params_b.p);
            run.finish("ok")?;
        }
    }
    Ok(0)
}
