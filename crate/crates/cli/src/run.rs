use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use wpvol_core::arith::{format_float, Graded, Scalar};
use wpvol_core::asymptotics::{
    compare, expansion_checks, first_order_for, fit_expansion, parse_range, second_order_for, series,
    write_series_csv, BracketSource, FitMethod, FitReport, SeriesKind, SeriesPoint, SeriesSpec,
};
use wpvol_core::aseq::{moment_exact, moment_partial};
use wpvol_core::bracket::{
    cache, calibrate, default_workers, identity_suite, volume_polynomial, BracketKey, EngineConfig, ExactEngine,
    FloatEngine, IdentityScope, SplitReading,
};
use wpvol_core::{Error, PiPolynomial, Rational, Result};

use crate::args::{CacheAction, Cli, Command, Format, Global, Mode, SeriesArgs, Suite};

/// File name of the bracket cache inside the cache directory.
pub const CACHE_FILE: &str = "brackets.wpc";

pub enum Status {
    Ok,
    /// A verification did not pass.
    Failed,
}

enum Backend {
    Exact(ExactEngine),
    Float(FloatEngine),
}

impl Backend {
    fn source(&self) -> &dyn BracketSource {
        match self {
            Backend::Exact(e) => e,
            Backend::Float(e) => e,
        }
    }

    fn exact(&self, what: &str) -> Result<&ExactEngine> {
        match self {
            Backend::Exact(e) => Ok(e),
            Backend::Float(_) => Err(Error::invalid(format!("{what} needs --mode exact"))),
        }
    }
}

struct Ctx {
    global: Global,
    backend: Backend,
    out: Box<dyn Write>,
    /// Number of entries loaded from the cache directory.
    cached: usize,
}

impl Ctx {
    fn new(global: Global) -> Result<Self> {
        let config = EngineConfig {
            max_level: global.max_level,
            workers: global.workers.unwrap_or_else(default_workers),
            ..Default::default()
        };
        if config.workers == 0 {
            return Err(Error::invalid("--workers must be at least 1"));
        }
        let backend = match global.mode {
            Mode::Exact => Backend::Exact(ExactEngine::exact(config)?),
            Mode::Float => Backend::Float(FloatEngine::float(global.precision, config)?),
        };
        wpvol_core::Precision::new(global.precision)?;
        let out: Box<dyn Write> = match &global.output {
            Some(p) => Box::new(fs::File::create(p)?),
            None => Box::new(std::io::stdout().lock()),
        };
        let mut ctx = Ctx { global, backend, out, cached: 0 };
        if let (Some(path), Backend::Exact(e)) = (ctx.cache_path(), &ctx.backend) {
            if path.exists() {
                ctx.cached = cache::load(e, &path)?;
            }
        }
        Ok(ctx)
    }

    fn cache_path(&self) -> Option<PathBuf> {
        self.global.cache_dir.as_ref().map(|d| d.join(CACHE_FILE))
    }

    /// Writes the engine table back to the cache directory if it grew.
    fn persist(&self) -> Result<()> {
        if let (Some(path), Backend::Exact(e)) = (self.cache_path(), &self.backend) {
            if e.stats().entries > self.cached {
                fs::create_dir_all(path.parent().expect("joined path"))?;
                cache::store(e, &path)?;
            }
        }
        Ok(())
    }

    fn prec(&self) -> u32 {
        self.global.precision
    }

    fn digits(&self) -> usize {
        (f64::from(self.prec()) * std::f64::consts::LOG10_2).floor() as usize
    }

    fn timestamp(&self) -> Option<String> {
        if self.global.no_timestamp {
            return None;
        }
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Some(t.to_string())
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")?;
        Ok(())
    }

    fn json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(v)?;
        self.line(&s)
    }

    fn float_text(&self, x: &rug::Float) -> String {
        format!("{} [{} bits]", format_float(x, self.digits()), self.prec())
    }

    /// Text and JSON renderings of a bracket value.
    fn render<S: Scalar>(&self, v: &Graded<S>) -> String {
        match v.coeff().as_rational() {
            Some(q) => Graded::new(q.clone(), v.grade()).to_string(),
            None => self.float_text(&v.to_float(self.prec())),
        }
    }

    fn mode_json(&self) -> Value {
        match self.global.mode {
            Mode::Exact => json!("exact"),
            Mode::Float => json!("float"),
        }
    }

    fn with_meta(&self, mut v: Value) -> Value {
        v["mode"] = self.mode_json();
        v["precision"] = json!(self.prec());
        if let Some(t) = self.timestamp() {
            v["timestamp"] = json!(t);
        }
        v
    }
}

/// The line printed to stderr before every run.
pub fn effective_config(cli: &Cli, argv: &[String]) -> String {
    let g = &cli.global;
    let mut s = format!(
        "wpvol {} mode={} precision={} workers={} max-level={} cache-dir={} format={:?}",
        env!("CARGO_PKG_VERSION"),
        match g.mode {
            Mode::Exact => "exact",
            Mode::Float => "float",
        },
        g.precision,
        g.workers.unwrap_or_else(default_workers),
        g.max_level.map_or("none".to_string(), |l| l.to_string()),
        g.cache_dir.as_ref().map_or("none".to_string(), |d| d.display().to_string()),
        g.format,
    )
    .to_lowercase();
    s.push_str(&format!(" args={:?}", argv.join(" ")));
    if !g.no_timestamp {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        s.push_str(&format!(" timestamp={t}"));
    }
    s
}

pub fn run(cli: Cli) -> Result<Status> {
    let mut ctx = Ctx::new(cli.global.clone())?;
    let status = match cli.command {
        Command::Bracket { g, d } => {
            let key = BracketKey::new(g, &d)?;
            bracket(&mut ctx, key)?
        }
        Command::Volume { g, n } => {
            if g < 0 || n < 0 || 2 * g - 2 + n <= 0 {
                return Err(Error::invalid(format!("(g, n) = ({g}, {n}) is not stable")));
            }
            bracket(&mut ctx, BracketKey::new(g, &vec![0; n as usize])?)?
        }
        Command::Poly { g, n } => poly(&mut ctx, g, n)?,
        Command::Table { g_max, n_max } => table(&mut ctx, g_max, n_max)?,
        Command::Series(args) => series_cmd(&mut ctx, &args)?,
        Command::Fit { series, order, method } => fit_cmd(&mut ctx, &series, order, &method)?,
        Command::Verify { suite, full, grange } => verify(&mut ctx, suite, full, &grange)?,
        Command::Cache { action } => cache_cmd(&mut ctx, action)?,
    };
    ctx.persist()?;
    ctx.out.flush()?;
    Ok(status)
}

fn bracket(ctx: &mut Ctx, key: BracketKey) -> Result<Status> {
    let text = match &ctx.backend {
        Backend::Exact(e) => ctx.render(&e.bracket_key(&key)?),
        Backend::Float(e) => ctx.render(&e.bracket_key(&key)?),
    };
    match ctx.global.format {
        Format::Text => ctx.line(&text)?,
        Format::Json => {
            let v = ctx.with_meta(json!({ "g": key.g(), "n": key.n(), "d": key.d(), "value": text }));
            ctx.json(&v)?
        }
        Format::Csv => {
            let d: Vec<String> = key.d().iter().map(|x| x.to_string()).collect();
            ctx.line("g,d,value")?;
            ctx.line(&format!("{},{},{}", key.g(), d.join(" "), text))?
        }
        Format::Cache => return Err(Error::invalid("--format cache is only for `table`")),
    }
    Ok(Status::Ok)
}

fn poly(ctx: &mut Ctx, g: i64, n: i64) -> Result<Status> {
    let p = volume_polynomial(ctx.backend.exact("poly")?, g, n)?;
    let terms: Vec<(Vec<u8>, String)> = p.terms().map(|(d, c)| (d.to_vec(), c.to_string())).collect();
    match ctx.global.format {
        Format::Text => {
            for (d, c) in &terms {
                ctx.line(&format!("{d:?} {c}"))?;
            }
        }
        Format::Csv => {
            ctx.line("d,coefficient")?;
            for (d, c) in &terms {
                let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                ctx.line(&format!("{},{c}", d.join(" ")))?;
            }
        }
        Format::Json => {
            let t: Vec<Value> = terms.iter().map(|(d, c)| json!({ "d": d, "coefficient": c })).collect();
            let v = ctx.with_meta(json!({ "g": g, "n": n, "terms": t }));
            ctx.json(&v)?
        }
        Format::Cache => return Err(Error::invalid("--format cache is only for `table`")),
    }
    Ok(Status::Ok)
}

fn table(ctx: &mut Ctx, g_max: u32, n_max: u32) -> Result<Status> {
    let keys: Vec<BracketKey> = (0..=g_max)
        .flat_map(|g| (0..=n_max).map(move |n| (g, n)))
        .filter(|&(g, n)| 2 * g + n > 2)
        .map(|(g, n)| BracketKey::volume(g, n as usize))
        .collect();
    ctx.backend.source().precompute(&keys)?;
    if ctx.global.format == Format::Cache {
        let e = ctx.backend.exact("--format cache")?;
        let mut buf = Vec::new();
        cache::write_records(&e.snapshot(), &mut buf)?;
        ctx.out.write_all(&buf)?;
        return Ok(Status::Ok);
    }
    let mut rows = Vec::new();
    for k in &keys {
        let text = match &ctx.backend {
            Backend::Exact(e) => ctx.render(&e.bracket_key(k)?),
            Backend::Float(e) => ctx.render(&e.bracket_key(k)?),
        };
        rows.push((k.g(), k.n(), text));
    }
    match ctx.global.format {
        Format::Text => {
            for (g, n, v) in &rows {
                ctx.line(&format!("V_{{{g},{n}}} = {v}"))?;
            }
        }
        Format::Csv => {
            ctx.line("g,n,value")?;
            for (g, n, v) in &rows {
                ctx.line(&format!("{g},{n},{v}"))?;
            }
        }
        Format::Json => {
            let t: Vec<Value> = rows.iter().map(|(g, n, v)| json!({ "g": g, "n": n, "value": v })).collect();
            let v = ctx.with_meta(json!({ "volumes": t }));
            ctx.json(&v)?
        }
        Format::Cache => unreachable!(),
    }
    Ok(Status::Ok)
}

fn load_series(ctx: &Ctx, args: &SeriesArgs) -> Result<(SeriesKind, Vec<SeriesPoint>)> {
    let kind = SeriesKind::from_name(&args.series, args.n, args.k)?;
    let (lo, hi) = parse_range(&args.grange)?;
    let spec = SeriesSpec::new(kind, lo, hi)?;
    let pts = series(ctx.backend.source(), &spec, ctx.prec())?;
    Ok((kind, pts))
}

fn series_cmd(ctx: &mut Ctx, args: &SeriesArgs) -> Result<Status> {
    let (kind, pts) = load_series(ctx, args)?;
    let digits = ctx.digits();
    match ctx.global.format {
        Format::Text => {
            for p in &pts {
                let s = format!("{} {}", p.g, ctx.float_text(&p.value));
                ctx.line(&s)?;
            }
        }
        Format::Csv => write_series_csv(&mut ctx.out, &pts, digits)?,
        Format::Json => {
            let t: Vec<Value> =
                pts.iter().map(|p| json!({ "g": p.g, "value": format_float(&p.value, digits) })).collect();
            let v = ctx.with_meta(json!({ "series": kind, "points": t }));
            ctx.json(&v)?
        }
        Format::Cache => return Err(Error::invalid("--format cache is only for `table`")),
    }
    Ok(Status::Ok)
}

fn fit_cmd(ctx: &mut Ctx, args: &SeriesArgs, order: usize, method: &str) -> Result<Status> {
    let method: FitMethod = method.parse()?;
    let (kind, pts) = load_series(ctx, args)?;
    let fit = fit_expansion(&pts, order, method)?;
    let mut comparisons = Vec::new();
    if let Some(p) = first_order_for(&kind) {
        if order >= 1 {
            comparisons.push(compare(&fit, 1, &p, 0.02));
        }
    }
    if let Some(p) = second_order_for(&kind) {
        if order >= 2 {
            comparisons.push(compare(&fit, 2, &p, 0.10));
        }
    }
    let report = FitReport {
        series: kind,
        mode: ctx.backend.source().mode().to_string(),
        fit,
        comparisons,
        timestamp: ctx.timestamp(),
    };
    // Fit reports are always JSON.
    ctx.json(&report)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CheckLine {
    suite: &'static str,
    name: String,
    pass: bool,
    detail: String,
}

fn verify(ctx: &mut Ctx, suite: Suite, full: bool, grange: &str) -> Result<Status> {
    let mut lines = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Recursions {
        let e = ExactEngine::exact(EngineConfig {
            workers: ctx.global.workers.unwrap_or_else(default_workers),
            ..Default::default()
        })?;
        let scope = if full { IdentityScope::FULL } else { IdentityScope::SMALL };
        let cases = identity_suite(&e, scope)?;
        let bad: Vec<String> = cases.iter().filter(|c| !c.residual.is_zero()).map(|c| c.to_string()).collect();
        lines.push(CheckLine {
            suite: "recursions",
            name: "identity residuals".into(),
            pass: bad.is_empty(),
            detail: if bad.is_empty() {
                format!("{} exact residuals are zero", cases.len())
            } else {
                format!("{} of {} nonzero, first: {}", bad.len(), cases.len(), bad[0])
            },
        });
    }
    if all || suite == Suite::Moments {
        moments_suite(&mut lines, ctx.prec().max(512));
    }
    if all || suite == Suite::Conventions {
        let scope = if full { IdentityScope::FULL } else { IdentityScope::SMALL };
        let r = calibrate(scope)?;
        let pass = r.closing_reading == Some(SplitReading::Ordered) && r.matches_convention && r.negative_control_nonzero > 0;
        lines.push(CheckLine {
            suite: "conventions",
            name: "base-case calibration".into(),
            pass,
            detail: format!(
                "closing reading {}, matches convention {}, negative control leaves {} residuals nonzero",
                match r.closing_reading {
                    Some(SplitReading::Ordered) => "ordered",
                    Some(SplitReading::Unordered) => "unordered",
                    None => "none",
                },
                r.matches_convention,
                r.negative_control_nonzero
            ),
        });
    }
    if all || suite == Suite::Expansions {
        let (lo, hi) = parse_range(grange)?;
        for c in expansion_checks(ctx.backend.source(), lo, hi, ctx.prec())? {
            lines.push(CheckLine {
                suite: "expansions",
                name: c.label(),
                pass: c.pass || c.soft,
                detail: c.detail(),
            });
        }
    }
    let pass = lines.iter().all(|l| l.pass);
    match ctx.global.format {
        Format::Json => {
            let v = ctx.with_meta(json!({ "pass": pass, "checks": lines }));
            ctx.json(&v)?
        }
        _ => {
            for l in &lines {
                let s = format!("{} {}: {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.suite, l.name, l.detail);
                ctx.line(&s)?;
            }
        }
    }
    Ok(if pass { Status::Ok } else { Status::Failed })
}

fn moments_suite(lines: &mut Vec<CheckLine>, prec: u32) {
    for (j, want) in [(0u32, (1, 2)), (1, (1, 4))] {
        let got = moment_exact(j);
        let target = PiPolynomial::constant(Rational::from(want));
        lines.push(CheckLine {
            suite: "moments",
            name: format!("moment {j}"),
            pass: got == target,
            detail: format!("{got} (expected {}/{})", want.0, want.1),
        });
    }
    for j in 2..=8u32 {
        let exact = moment_exact(j);
        let grade_ok = exact.max_grade() == Some((j / 2) as i32);
        let diff = rug::Float::with_val(prec, exact.to_float(prec) - moment_partial(j, 200, prec)).abs();
        let close = diff < 1e-30;
        lines.push(CheckLine {
            suite: "moments",
            name: format!("moment {j}"),
            pass: grade_ok && close,
            detail: format!("max grade {:?}, |exact - partial(200)| = {}", exact.max_grade(), format_float(&diff, 3)),
        });
    }
}

fn cache_cmd(ctx: &mut Ctx, action: CacheAction) -> Result<Status> {
    let e = ctx.backend.exact("cache")?;
    match action {
        CacheAction::Load { file } => {
            let n = cache::load(e, &file)?;
            let total = e.stats().entries;
            let dir = ctx.cache_path();
            if let Some(path) = &dir {
                fs::create_dir_all(path.parent().expect("joined path"))?;
                cache::store(e, path)?;
                ctx.cached = total;
            }
            let s = format!(
                "loaded {n} records from {}; {total} in table{}",
                file.display(),
                dir.map_or(String::new(), |p| format!("; written to {}", p.display()))
            );
            ctx.line(&s)?;
        }
        CacheAction::Store { file, g_max, n_max } => {
            if let Some(g_max) = g_max {
                let keys: Vec<BracketKey> = (0..=g_max)
                    .flat_map(|g| (0..=n_max).map(move |n| (g, n)))
                    .filter(|&(g, n)| 2 * g + n > 2)
                    .map(|(g, n)| BracketKey::volume(g, n as usize))
                    .collect();
                e.precompute(&keys)?;
            }
            let n = cache::store(e, &file)?;
            let s = format!("stored {n} records to {}", file.display());
            ctx.line(&s)?;
        }
    }
    Ok(Status::Ok)
}
