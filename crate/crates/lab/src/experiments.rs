//! The experiment families. Every run draws from one ChaCha8 stream seeded
//! by the config seed.

use latlab_core::extrapolation::{
    cone_distance, extrapolation_cone_contains, lambda_equivalence, multiplication_example_check,
    neumann_laplacian_1d, periodic_laplacian_1d, resolvent, resolvent_scheme, theorem41_sup, ExtrapolationSpace,
    GeneratorMatrix,
};
use latlab_core::linalg::{abs, dist_inf, negative_part, positive_part, LinearOperator, Matrix};
use latlab_core::ordered_space::{
    decomposition_constant_estimate, normality_constant_lower_bound, NormSpec, OrderedSpace, OrderedSpaceSpec,
};
use latlab_core::sobolev_grid::chart::{CHART_SAMPLES, DEFAULT_CHART_INDICES};
use latlab_core::sobolev_grid::{
    mollifier_scheme, mollify, positive_dominant_w0, pushin_operator, ChartCover, DomainKind, GridDomain, GridFunction,
};
use latlab_core::span_lattice::{
    constructive_sup, constructive_sup_dual, renorm_bounds_check, renorm_value, span_norm, ApproximationScheme,
    SupConstruction, RENORM_EXACT_DIM,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DomainKindConfig, Experiment, ExperimentConfig, GeneratorKind, SchemeFamily};
use crate::error::{LabError, LabResult};
use crate::io::read_grid_function;
use crate::report::{witness, ReportRow};

/// Largest accepted `||s - |z|||_inf` for the supremum constructions.
pub const ORACLE_GAP: f64 = 1e-5;
pub const MOLLIFIER_ORDER: f64 = 1.8;
/// Accepted band for `r(eps/s) / r(eps)` relative to `s`.
pub const NORMALITY_BAND: (f64, f64) = (0.85, 1.15);
pub const PROP35_TOL: f64 = 1e-10;
pub const RESOLVENT_IDENTITY_TOL: f64 = 1e-9;
/// Inflation of the estimated constants `M` and `C` in the renorm audit.
pub const CONSTANT_INFLATION: f64 = 1.05;

struct Rows {
    experiment: Experiment,
    seed: u64,
    params: String,
    rows: Vec<ReportRow>,
}

impl Rows {
    fn push(&mut self, case: String, value: f64, gap: f64, threshold: f64, pass: bool, w: &[f64]) {
        self.rows.push(ReportRow {
            experiment: self.experiment.name().to_string(),
            case,
            seed: self.seed,
            params: self.params.clone(),
            value,
            gap,
            threshold,
            pass,
            witness: if pass { String::new() } else { witness(w) },
        });
    }

    /// A row that passes when `gap <= threshold`.
    fn check(&mut self, case: String, value: f64, gap: f64, threshold: f64, w: &[f64]) {
        self.push(case, value, gap, threshold, gap <= threshold, w);
    }

    fn info(&mut self, case: String, value: f64) {
        self.push(case, value, 0.0, 0.0, true, &[]);
    }
}

fn module<T>(context: &str, r: latlab_core::Result<T>) -> LabResult<T> {
    r.map_err(|e| LabError::module(context, e))
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn params_snapshot(cfg: &ExperimentConfig, exp: Experiment) -> String {
    let mut s = format!("domain={:?};n={}", cfg.domain.kind, cfg.domain.n).to_lowercase();
    match exp {
        Experiment::SupConstruct | Experiment::SupConstructDual => {
            s += &format!(";family={:?};tol={:e}", cfg.scheme.family, cfg.scheme.tol).to_lowercase();
        }
        Experiment::ExtrapolationDemo => s += &format!(";p={};tol={:e}", cfg.p, cfg.scheme.tol),
        Experiment::NormalityScan | Experiment::RenormAudit | Experiment::Prop35Demo => {
            s += &format!(";k={};p={}", cfg.k, cfg.p)
        }
        _ => {}
    }
    s
}

/// Runs one validated configuration.
pub fn run(cfg: &ExperimentConfig) -> LabResult<Vec<ReportRow>> {
    let exp = cfg.validate()?;
    let mut rows = Rows { experiment: exp, seed: cfg.seed, params: params_snapshot(cfg, exp), rows: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domain = cfg.domain.build()?;
    match exp {
        Experiment::SupConstruct => sup_construct(cfg, &domain, false, &mut rng, &mut rows)?,
        Experiment::SupConstructDual => sup_construct(cfg, &domain, true, &mut rng, &mut rows)?,
        Experiment::NormalityScan => normality_scan(cfg, &domain, &mut rows)?,
        Experiment::MollifierRate => mollifier_rate(cfg, &domain, &mut rows)?,
        Experiment::BoundaryChartAudit => boundary_chart_audit(cfg, &domain, &mut rows)?,
        Experiment::PushinAudit => pushin_audit(cfg, &domain, &mut rng, &mut rows)?,
        Experiment::Prop35Demo => prop35_demo(cfg, &domain, &mut rng, &mut rows)?,
        Experiment::ExtrapolationDemo => extrapolation_demo(cfg, &domain, &mut rng, &mut rows)?,
        Experiment::RenormAudit => renorm_audit(cfg, &domain, &mut rng, &mut rows)?,
    }
    Ok(rows.rows)
}

/// The configured generator, or the Laplacian matching the domain.
fn generator_for(cfg: &ExperimentConfig, domain: &GridDomain) -> LabResult<GeneratorMatrix> {
    let gen = match (&cfg.generator, domain.kind()) {
        (Some(g), _) => g.build()?,
        (None, DomainKind::Interval { .. }) => module("generator", neumann_laplacian_1d(domain.n(), domain.h()))?,
        (None, DomainKind::Torus { .. }) => module("generator", periodic_laplacian_1d(domain.n(), domain.h()))?,
        (None, DomainKind::Rectangle { .. }) => {
            return Err(LabError::usage("generator", "no default generator on the square; give one explicitly"))
        }
    };
    if cfg.generator.is_some() && cfg.experiment != Experiment::ExtrapolationDemo.name() && gen.dim() != domain.node_count() {
        return Err(LabError::usage(
            "generator",
            format!("generator has dimension {} but the grid has {} nodes", gen.dim(), domain.node_count()),
        ));
    }
    Ok(gen)
}

fn sup_construct(
    cfg: &ExperimentConfig,
    domain: &GridDomain,
    dual: bool,
    rng: &mut ChaCha8Rng,
    rows: &mut Rows,
) -> LabResult<()> {
    let tol = cfg.scheme.tol;
    let scheme: ApproximationScheme = match cfg.scheme.family {
        SchemeFamily::Mollifier => module("mollifier scheme", mollifier_scheme(domain, cfg.scheme.n_max))?,
        SchemeFamily::Resolvent => module("resolvent scheme", resolvent_scheme(&generator_for(cfg, domain)?))?,
    };
    let d = domain.node_count();
    let space = module("space", OrderedSpaceSpec::standard_lp(d, cfg.p).build())?;
    for i in 0..cfg.samples.unwrap_or(50) {
        let z = uniform(rng, d);
        let out: latlab_core::Result<SupConstruction> =
            if dual { constructive_sup_dual(&scheme, &z, tol) } else { constructive_sup(&scheme, &space, &z, tol) };
        match out {
            Ok(out) => rows.check(format!("z{i}"), out.index as f64, dist_inf(&out.s, &abs(&z)), ORACLE_GAP, &z),
            Err(latlab_core::Error::SchemeNotConverged { increments }) => {
                let last = increments.last().copied().unwrap_or(0.0);
                rows.push(format!("z{i}"), f64::from(u32::MAX), last, ORACLE_GAP, false, &z);
            }
            Err(e) => return Err(LabError::module(format!("sample z{i}"), e)),
        }
    }
    Ok(())
}

fn require_interval(domain: &GridDomain) -> LabResult<()> {
    match domain.kind() {
        DomainKind::Interval { .. } => Ok(()),
        _ => Err(LabError::usage("domain.kind", format!("this experiment needs an interval, got {}", domain.kind_name()))),
    }
}

fn sobolev_space(domain: &GridDomain, k: usize, p: f64) -> LabResult<OrderedSpace> {
    module("Sobolev space", OrderedSpaceSpec::standard(NormSpec::Sobolev { domain: *domain, k, p }).build())
}

fn normality_scan(cfg: &ExperimentConfig, domain: &GridDomain, rows: &mut Rows) -> LabResult<()> {
    require_interval(domain)?;
    let eps = if cfg.params.is_empty() { vec![0.25, 0.125, 0.0625] } else { cfg.params.clone() };
    for &e in &eps {
        if !(e > 0.0 && domain.h() <= e / 20.0) {
            return Err(LabError::usage("params", format!("scale {e} needs h <= {e}/20, grid has h = {}", domain.h())));
        }
    }
    let space = sobolev_space(domain, cfg.k, cfg.p)?;
    let mut ratios = Vec::new();
    for &e in &eps {
        let x: Vec<f64> = (0..domain.node_count())
            .map(|i| e * (std::f64::consts::PI * domain.node(i)[0] / e).sin().powi(2))
            .collect();
        let y = vec![e; domain.node_count()];
        let r = module("normality witness", normality_constant_lower_bound(&space, &[(x, y)]))?;
        rows.info(format!("r(eps={e})"), r);
        ratios.push(r);
    }
    for (i, w) in eps.windows(2).enumerate() {
        let s = w[0] / w[1];
        let q = ratios[i + 1] / ratios[i];
        let (lo, hi) = (NORMALITY_BAND.0 * s, NORMALITY_BAND.1 * s);
        let gap = (lo - q).max(q - hi).max(0.0);
        rows.check(format!("ratio(eps={}->{})", w[0], w[1]), q, gap, 0.0, &[w[0], w[1], ratios[i], ratios[i + 1]]);
    }
    Ok(())
}

fn test_function(cfg: &ExperimentConfig, domain: &GridDomain, f: impl Fn(f64) -> f64) -> LabResult<GridFunction> {
    match &cfg.input {
        Some(path) => {
            let g = read_grid_function(std::path::Path::new(path))?;
            if g.domain() != domain {
                return Err(LabError::usage("input", "grid function lives on another domain"));
            }
            Ok(g)
        }
        None => Ok(GridFunction::from_fn(*domain, |x| f(x[0]))),
    }
}

fn mollifier_rate(cfg: &ExperimentConfig, domain: &GridDomain, rows: &mut Rows) -> LabResult<()> {
    if !domain.is_periodic() {
        return Err(LabError::usage("domain.kind", "the convergence rate is measured on the torus"));
    }
    let deltas = if cfg.params.is_empty() { vec![0.1, 0.05, 0.025] } else { cfg.params.clone() };
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::usage("params", "scales must be strictly decreasing"));
    }
    let pi = std::f64::consts::PI;
    let f = test_function(cfg, domain, |t| (2.0 * pi * t).sin() + 0.3 * (6.0 * pi * t).cos())?;
    let mut errs = Vec::new();
    for &delta in &deltas {
        let g = module(&format!("mollify at {delta}"), mollify(&f, delta))?;
        let e = dist_inf(g.values(), f.values());
        rows.info(format!("err(delta={delta})"), e);
        errs.push(e);
    }
    for (i, w) in deltas.windows(2).enumerate() {
        let order = (errs[i] / errs[i + 1]).ln() / (w[0] / w[1]).ln();
        let gap = if order.is_nan() { f64::from(u32::MAX) } else { (MOLLIFIER_ORDER - order).max(0.0) };
        rows.check(format!("order(delta={}->{})", w[0], w[1]), order, gap, 0.0, &[w[0], w[1], errs[i], errs[i + 1]]);
    }
    Ok(())
}

fn boundary_chart_audit(cfg: &ExperimentConfig, domain: &GridDomain, rows: &mut Rows) -> LabResult<()> {
    let cover = module("chart cover", ChartCover::standard(domain))?;
    let samples = cfg.samples.unwrap_or(CHART_SAMPLES);
    match cover.verify(domain, cfg.seed) {
        Ok(()) => rows.info("cover".into(), cover.charts().len() as f64),
        Err(latlab_core::Error::CoverFailure { point }) => rows.push("cover".into(), 0.0, 1.0, 0.0, false, &point),
        Err(e) => return Err(LabError::module("chart cover", e)),
    }
    for (i, chart) in cover.charts().iter().enumerate() {
        let c = chart.center();
        let case = format!("chart{i}({},{})", c[0], c[1]);
        match chart.verify_containment(domain, &DEFAULT_CHART_INDICES, samples, cfg.seed.wrapping_add(i as u64)) {
            Ok(margin) => rows.info(case, margin),
            Err(latlab_core::Error::ChartContainment { point }) => rows.push(case, 0.0, 1.0, 0.0, false, &point),
            Err(e) => return Err(LabError::module(case, e)),
        }
    }
    Ok(())
}

fn pushin_audit(cfg: &ExperimentConfig, domain: &GridDomain, rng: &mut ChaCha8Rng, rows: &mut Rows) -> LabResult<()> {
    let indices: Vec<usize> = if cfg.params.is_empty() {
        vec![2, 4, 8]
    } else {
        cfg.params
            .iter()
            .map(|&v| {
                if v >= 2.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(LabError::usage("params", format!("index {v} must be an integer >= 2")))
                }
            })
            .collect::<LabResult<_>>()?
    };
    let d = domain.node_count();
    let samples = cfg.samples.unwrap_or(20);
    for n in indices {
        let s = module(&format!("push-in n = {n}"), pushin_operator(domain, n))?;
        rows.check(format!("k-distance(n={n})"), s.k_distance, if s.k_distance > 0.0 { 0.0 } else { 1.0 }, 0.0, &[]);
        for j in 0..samples {
            let f = uniform(rng, d);
            let out = s.matrix.apply(&f);
            let outside = (0..d).filter(|&i| !s.k_mask[i]).map(|i| out[i].abs()).fold(0.0, f64::max);
            rows.check(format!("support(n={n},f{j})"), outside, outside, 0.0, &f);
            let fa = abs(&f);
            let low = s.matrix.apply(&fa).into_iter().fold(f64::INFINITY, f64::min);
            rows.check(format!("positivity(n={n},f{j})"), low, (-low).max(0.0), 0.0, &fa);
        }
    }
    Ok(())
}

/// Random smooth function with its first and last `k` nodes set to zero.
fn random_w0(domain: &GridDomain, k: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let c = uniform(rng, 4);
    let n = domain.node_count();
    let v = (0..n)
        .map(|i| {
            if i < k || i + k >= n {
                return 0.0;
            }
            let t = domain.node(i)[0];
            let s: f64 =
                c.iter().enumerate().map(|(j, a)| a * ((j + 1) as f64 * std::f64::consts::PI * t).sin()).sum();
            s * (t * (1.0 - t)).powi(k as i32 - 1)
        })
        .collect();
    GridFunction::new(*domain, v).expect("length matches")
}

fn prop35_demo(cfg: &ExperimentConfig, domain: &GridDomain, rng: &mut ChaCha8Rng, rows: &mut Rows) -> LabResult<()> {
    require_interval(domain)?;
    let k = cfg.k;
    let inputs: Vec<GridFunction> = match &cfg.input {
        Some(_) => vec![test_function(cfg, domain, |_| 0.0)?],
        None => (0..cfg.samples.unwrap_or(20)).map(|_| random_w0(domain, k, rng)).collect(),
    };
    let n = domain.node_count();
    for (i, f) in inputs.iter().enumerate() {
        let g = module(&format!("dominant of f{i}"), positive_dominant_w0(f, k, cfg.p))?;
        let (fv, gv) = (f.values(), g.values());
        let mut gap = 0.0f64;
        for j in 0..n {
            gap = gap.max(fv[j] - gv[j]).max(-gv[j]);
        }
        for j in 0..k.min(n) {
            gap = gap.max(gv[j].abs()).max(gv[n - 1 - j].abs());
        }
        let norm = module("norm", latlab_core::sobolev_grid::sobolev_norm(&g, k, cfg.p))?;
        rows.check(format!("f{i}"), norm, gap, PROP35_TOL, fv);
    }
    Ok(())
}

fn extrapolation_demo(
    cfg: &ExperimentConfig,
    domain: &GridDomain,
    rng: &mut ChaCha8Rng,
    rows: &mut Rows,
) -> LabResult<()> {
    let gen = generator_for(cfg, domain)?;
    let lambda = cfg.generator.as_ref().and_then(|g| g.lambda);
    let d = gen.dim();
    let base = OrderedSpaceSpec::standard(NormSpec::lp(d, cfg.p));
    let space = module("extrapolation space", ExtrapolationSpace::new(base, gen.clone(), lambda))?;
    let lam = space.lambda();
    let samples = cfg.samples.unwrap_or(1000);

    for mu in [1.0, 2.0, lam] {
        if mu <= gen.lambda0() {
            continue;
        }
        let r = module(&format!("resolvent at {mu}"), resolvent(&gen, mu))?;
        let low = r.min_entry();
        rows.check(format!("positivity(mu={mu})"), low, (-low - latlab_core::extrapolation::POSITIVITY_TOL).max(0.0), 0.0, &[mu]);
    }
    let (mu, nu) = (lam, lam + 1.0);
    let rm = module("resolvent", resolvent(&gen, mu))?;
    let rn = module("resolvent", resolvent(&gen, nu))?;
    let residual = rm.sub(&rn).sub(&rm.matmul(&rn).scaled(nu - mu)).max_abs();
    rows.check("resolvent-identity".into(), residual, residual, RESOLVENT_IDENTITY_TOL, &[mu, nu]);

    let mut mismatches = 0usize;
    let mut first: Option<Vec<f64>> = None;
    for i in 0..samples {
        let mut x = uniform(rng, d);
        if i % 2 == 0 {
            x = abs(&x);
        }
        let member = module("cone membership", extrapolation_cone_contains(&space, &x))?;
        if member != x.iter().all(|v| *v >= 0.0) {
            mismatches += 1;
            first.get_or_insert(x);
        }
    }
    rows.check("cone-compatibility".into(), mismatches as f64, mismatches as f64, 0.0, first.as_deref().unwrap_or(&[]));

    let tol = cfg.scheme.tol;
    for i in 0..samples.min(5) {
        let z = uniform(rng, d);
        let dist = module("cone distance", cone_distance(&space, &z))?;
        rows.info(format!("cone-distance(z{i})"), dist.upper);
        match theorem41_sup(&space, &z, tol) {
            Ok(out) => rows.check(format!("sup(z{i})"), out.index as f64, dist_inf(&out.s, &abs(&z)), 10.0 * tol, &z),
            Err(latlab_core::Error::SchemeNotConverged { increments }) => {
                rows.push(format!("sup(z{i})"), f64::from(u32::MAX), increments.last().copied().unwrap_or(0.0), 10.0 * tol, false, &z)
            }
            Err(e) => return Err(LabError::module(format!("sup of z{i}"), e)),
        }
    }

    let xs: Vec<Vec<f64>> = (0..samples.min(100)).map(|_| uniform(rng, d)).collect();
    let eq = module("lambda equivalence", lambda_equivalence(&space, lam + 1.0, &xs))?;
    let gap = (eq.max_ratio - eq.bound).max(1.0 / eq.bound - eq.min_ratio).max(0.0);
    rows.push(format!("lambda-equivalence({lam}->{})", lam + 1.0), eq.max_ratio, gap, 0.0, eq.pass, &[eq.min_ratio, eq.max_ratio, eq.bound]);

    if let Some(g) = cfg.generator.as_ref().filter(|g| g.kind == GeneratorKind::Multiplication) {
        let m = g.m.clone().unwrap_or_default();
        let rep = module("multiplication example", multiplication_example_check(&m, cfg.p, &vec![1.0; m.len()], 100, cfg.seed))?;
        rows.push(
            "multiplication-identity".into(),
            rep.max_identity_error,
            rep.max_identity_error,
            latlab_core::extrapolation::MULTIPLICATION_TOL,
            rep.pass,
            &rep.worst_sample,
        );
    }
    Ok(())
}

fn renorm_audit(cfg: &ExperimentConfig, domain: &GridDomain, rng: &mut ChaCha8Rng, rows: &mut Rows) -> LabResult<()> {
    let d = domain.node_count();
    if d > RENORM_EXACT_DIM {
        return Err(LabError::usage("domain.n", format!("exact renorm values need at most {RENORM_EXACT_DIM} nodes, got {d}")));
    }
    if cfg.domain.kind == DomainKindConfig::Square {
        return Err(LabError::usage("domain.kind", "the renorm audit runs on interval or torus grids"));
    }
    let space = sobolev_space(domain, cfg.k, cfg.p)?;
    let xs: Vec<Vec<f64>> = (0..cfg.samples.unwrap_or(200)).map(|_| uniform(rng, d)).collect();
    // Witnesses 0 <= x <= y for M come from the tested vectors themselves.
    let mut witnesses = Vec::new();
    for x in &xs {
        let a = abs(x);
        let rv = module("renorm", renorm_value(&space, x))?;
        witnesses.push((rv.maximizer, a.clone()));
        witnesses.push((positive_part(x), a.clone()));
        witnesses.push((negative_part(x), a));
        let sp = module("span norm", span_norm(&space, x))?;
        witnesses.push((positive_part(x), sp.y));
        witnesses.push((negative_part(x), sp.z));
    }
    // A zero `y` forces `x = 0` and says nothing about `M`.
    witnesses.retain(|(_, y)| y.iter().any(|v| *v != 0.0));
    let m = CONSTANT_INFLATION * module("normality constant", normality_constant_lower_bound(&space, &witnesses))?;
    let c = CONSTANT_INFLATION * module("decomposition constant", decomposition_constant_estimate(&space, &xs))?;
    rows.info("M".into(), m);
    rows.info("C".into(), c);
    for (i, x) in xs.iter().enumerate() {
        let r = module("renorm bounds", renorm_bounds_check(&space, x, m, c))?;
        let gap = (-r.lower_slack).max(-r.upper_slack).max(0.0);
        rows.push(format!("x{i}"), r.renorm, gap, 0.0, r.pass && r.renorm_exact, x);
    }
    Ok(())
}

/// `(mu - A)^{-1}` as a dense matrix, for callers that only hold a config.
pub fn generator_resolvent(cfg: &ExperimentConfig, mu: f64) -> LabResult<Matrix> {
    let domain = cfg.domain.build()?;
    let gen = generator_for(cfg, &domain)?;
    module("resolvent", resolvent(&gen, mu))
}
