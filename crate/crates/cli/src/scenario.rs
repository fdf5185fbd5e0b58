//! Scenario files: JSON documents with a `mode` and per-mode fields.
//!
//! Parsing never stops at the first problem. Every field is checked and all
//! issues are returned together, each prefixed by its field path.

use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use crossdim::transient::{PostPhase, PrePhase, DEFAULT_TOL};
use crossdim::{
    clutch_models, lcm, CrossVec, LinSys, Mat, MuSchedule, Target, TimeKind, TransientScenario,
};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

const DEFAULT_SAMPLES_DIM: usize = 12;

/// Command-line replacements for scenario parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub schema_version: u64,
    pub output: Option<PathBuf>,
    pub job: Job,
}

#[derive(Debug, Clone)]
pub enum Job {
    Project { n: usize, x: Option<CrossVec>, system: Option<LinSys> },
    Simulate(Simulation),
    Transient(TransientScenario),
    Phased { scenario: TransientScenario, pre: PrePhase, post: PostPhase },
    Reduce { x: Option<CrossVec>, a: Option<Mat>, b: Option<Mat>, eps: Option<f64> },
    Norm { a: Mat, sampling: Option<Sampling> },
}

impl Job {
    pub fn mode(&self) -> &'static str {
        match self {
            Job::Project { .. } => "project",
            Job::Simulate(_) => "simulate",
            Job::Transient(_) => "transient",
            Job::Phased { .. } => "phased",
            Job::Reduce { .. } => "reduce",
            Job::Norm { .. } => "norm",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Simulation {
    Discrete { a: Mat, x0: CrossVec, steps: usize },
    Continuous { a: Mat, x0: CrossVec, t0: f64, te: f64, dt: f64 },
}

#[derive(Debug, Clone)]
pub struct Sampling {
    pub samples: usize,
    pub dims: RangeInclusive<usize>,
    pub seed: u64,
}

/// Every problem found in a scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct Issues(pub Vec<String>);

impl fmt::Display for Issues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

struct Checker {
    issues: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Checker {
    fn report(&mut self, path: &str, msg: impl fmt::Display) {
        let at = if path.is_empty() { "<root>" } else { path };
        self.issues.push(format!("{at}: {msg}"));
    }

    fn required<'v>(&mut self, obj: &'v Map<String, Value>, path: &str, key: &str) -> Option<&'v Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.report(&join(path, key), "missing field");
        }
        v
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.report(path, "expected an object");
        }
        o
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.report(path, format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    fn positive(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = self.number(v, path)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.report(path, format!("must be positive, got {x}"));
            None
        }
    }

    fn count(&mut self, v: &Value, path: &str, min: u64) -> Option<usize> {
        match v.as_u64() {
            Some(k) if k >= min => usize::try_from(k).ok(),
            _ => {
                self.report(path, format!("expected an integer >= {min}, got {v}"));
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<CrossVec> {
        let Some(items) = v.as_array() else {
            self.report(path, "expected an array of numbers");
            return None;
        };
        if items.is_empty() {
            self.report(path, "vector is empty");
            return None;
        }
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match self.number(item, &format!("{path}[{i}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then(|| CrossVec::new(out).expect("checked nonempty and finite"))
    }

    fn matrix(&mut self, v: &Value, path: &str) -> Option<Mat> {
        let Some(rows) = v.as_array() else {
            self.report(path, "expected a matrix as an array of rows");
            return None;
        };
        if rows.is_empty() {
            self.report(path, "matrix has no rows");
            return None;
        }
        let mut data = Vec::new();
        let mut width = None;
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            let rpath = format!("{path}[{i}]");
            let Some(entries) = row.as_array() else {
                self.report(&rpath, "expected a row array");
                ok = false;
                continue;
            };
            match width {
                None => width = Some(entries.len()),
                Some(w) if w != entries.len() => {
                    self.report(
                        &rpath,
                        format!("ragged matrix: row has {} entries, first row has {w}", entries.len()),
                    );
                    ok = false;
                    continue;
                }
                Some(_) => {}
            }
            for (j, e) in entries.iter().enumerate() {
                match self.number(e, &format!("{rpath}[{j}]")) {
                    Some(x) => data.push(x),
                    None => ok = false,
                }
            }
        }
        let cols = width.unwrap_or(0);
        if cols == 0 {
            self.report(path, "matrix has no columns");
            return None;
        }
        if !ok {
            return None;
        }
        match Mat::new(rows.len(), cols, data) {
            Ok(m) => Some(m),
            Err(e) => {
                self.report(path, e);
                None
            }
        }
    }

    fn time_kind(&mut self, obj: &Map<String, Value>, path: &str) -> Option<TimeKind> {
        match obj.get("time").map(|v| (v, v.as_str())) {
            None => Some(TimeKind::Continuous),
            Some((_, Some("continuous"))) => Some(TimeKind::Continuous),
            Some((_, Some("discrete"))) => Some(TimeKind::Discrete),
            Some((v, _)) => {
                self.report(&join(path, "time"), format!("expected \"continuous\" or \"discrete\", got {v}"));
                None
            }
        }
    }

    /// `{ "a": [[..]], "b": [[..]]?, "c": [[..]]?, "time": .. }`
    fn system(&mut self, v: &Value, path: &str) -> Option<LinSys> {
        let obj = self.object(v, path)?;
        let a = self.required(obj, path, "a").and_then(|v| self.matrix(v, &join(path, "a")));
        let b = obj.get("b").map(|v| self.matrix(v, &join(path, "b")));
        let c = obj.get("c").map(|v| self.matrix(v, &join(path, "c")));
        let kind = self.time_kind(obj, path);
        let a = a?;
        let mut ok = true;
        if !a.is_square() {
            self.report(&join(path, "a"), format!("must be square, got {}x{}", a.rows(), a.cols()));
            ok = false;
        }
        if let Some(Some(b)) = &b {
            if b.rows() != a.rows() {
                self.report(&join(path, "b"), format!("has {} rows, a has {}", b.rows(), a.rows()));
                ok = false;
            }
        }
        if let Some(Some(c)) = &c {
            if c.cols() != a.cols() {
                self.report(&join(path, "c"), format!("has {} columns, a has {}", c.cols(), a.cols()));
                ok = false;
            }
        }
        let b = b.map_or(Some(None), |b| b.map(Some))?;
        let c = c.map_or(Some(None), |c| c.map(Some))?;
        if !ok {
            return None;
        }
        LinSys::new(a, b, c, kind?).map_err(|e| self.report(path, e)).ok()
    }

    fn mu(&mut self, v: &Value, path: &str) -> Option<MuSchedule> {
        let obj = self.object(v, path)?;
        if obj.len() != 1 {
            self.report(path, "expected exactly one of \"constant\", \"masses\", \"linear\"");
            return None;
        }
        let (kind, val) = obj.iter().next().expect("one entry");
        let at = join(path, kind);
        let sched = match kind.as_str() {
            "constant" => MuSchedule::constant(self.number(val, &at)?),
            "masses" | "linear" => {
                let pair = self.vector(val, &at)?;
                if pair.dim() != 2 {
                    self.report(&at, format!("expected 2 numbers, got {}", pair.dim()));
                    return None;
                }
                if kind == "masses" {
                    MuSchedule::from_masses(pair[0], pair[1])
                } else {
                    MuSchedule::linear(pair[0], pair[1])
                }
            }
            other => {
                self.report(path, format!("unknown schedule kind \"{other}\""));
                return None;
            }
        };
        sched.map_err(|e| self.report(&at, e)).ok()
    }

    fn target(&mut self, v: &Value, path: &str) -> Option<Target> {
        if v.as_str() == Some("subspace") {
            return Some(Target::Subspace);
        }
        if v.is_array() {
            return self.vector(v, path).map(Target::Explicit);
        }
        self.report(path, "expected \"subspace\" or an array of numbers");
        None
    }

    fn gain(&mut self, obj: &Map<String, Value>, path: &str, sys: Option<&LinSys>) -> Option<Mat> {
        let at = join(path, "gain");
        let raw = self.required(obj, path, "gain")?;
        let k = self.matrix(raw, &at)?;
        if let Some(sys) = sys {
            let expected = (sys.inputs(), sys.order());
            if sys.inputs() == 0 {
                self.report(&at, "feedback needs a model with an input matrix b");
                return None;
            }
            if k.shape() != expected {
                self.report(
                    &at,
                    format!("is {}x{}, expected {}x{}", k.rows(), k.cols(), expected.0, expected.1),
                );
                return None;
            }
        }
        Some(k)
    }

    /// Σ₁/Σ₂ from explicit blocks or from clutch parameters.
    fn model_pair(&mut self, obj: &Map<String, Value>) -> (Option<LinSys>, Option<LinSys>) {
        if let Some(c) = obj.get("clutch") {
            if obj.contains_key("sigma1") || obj.contains_key("sigma2") {
                self.report("clutch", "give either clutch parameters or sigma1/sigma2, not both");
                return (None, None);
            }
            let Some(co) = self.object(c, "clutch") else { return (None, None) };
            let mut p = [None; 4];
            for (slot, key) in p.iter_mut().zip(["j_i", "j_o", "d_i", "d_o"]) {
                *slot = self.required(co, "clutch", key).and_then(|v| self.number(v, &join("clutch", key)));
            }
            let [Some(ji), Some(jo), Some(di), Some(d_o)] = p else { return (None, None) };
            return match clutch_models(ji, jo, di, d_o) {
                Ok(m) => (Some(m.sigma1), Some(m.sigma2)),
                Err(e) => {
                    self.report("clutch", e);
                    (None, None)
                }
            };
        }
        let s1 = self.required(obj, "", "sigma1").and_then(|v| self.system(v, "sigma1"));
        let s2 = self.required(obj, "", "sigma2").and_then(|v| self.system(v, "sigma2"));
        (s1, s2)
    }

    fn transient(&mut self, obj: &Map<String, Value>, ov: Overrides) -> Option<TransientScenario> {
        let (s1, s2) = self.model_pair(obj);
        let t0 = self.required(obj, "", "t0").and_then(|v| self.number(v, "t0"));
        let te = self.required(obj, "", "te").and_then(|v| self.number(v, "te"));
        let mu = self.required(obj, "", "mu").and_then(|v| self.mu(v, "mu"));
        let x_t0 = self.required(obj, "", "x_t0").and_then(|v| self.vector(v, "x_t0"));
        let target = self.required(obj, "", "target").and_then(|v| self.target(v, "target"));
        let dt = match ov.dt {
            Some(dt) => Some(dt),
            None => obj.get("dt").map_or(Some(crossdim::dynamics::DEFAULT_DT), |v| self.positive(v, "dt")),
        };
        let tol = match ov.tol {
            Some(tol) => Some(tol),
            None => obj.get("tol").map_or(Some(DEFAULT_TOL), |v| self.positive(v, "tol")),
        };

        let mut ok = true;
        if let (Some(t0), Some(te)) = (t0, te) {
            if te < t0 {
                self.report("te", format!("must not precede t0 ({te} < {t0})"));
                ok = false;
            }
        }
        if let (Some(s1), Some(x)) = (&s1, &x_t0) {
            if x.dim() != s1.order() {
                self.report("x_t0", format!("has dim {}, sigma1 has order {}", x.dim(), s1.order()));
                ok = false;
            }
        }
        if let (Some(s1), Some(s2), Some(Target::Explicit(z))) = (&s1, &s2, &target) {
            if let Ok(n) = lcm(s1.order(), s2.order()) {
                if z.dim() != n {
                    self.report("target", format!("has dim {}, expected lcm(p, q) = {n}", z.dim()));
                    ok = false;
                }
            }
        }
        let (s1, s2, t0, te, mu, x_t0, target, dt, tol) =
            (s1?, s2?, t0?, te?, mu?, x_t0?, target?, dt?, tol?);
        if !ok {
            return None;
        }
        TransientScenario::new(s1, s2, t0, te, mu, x_t0, target)
            .and_then(|s| s.with_dt(dt))
            .and_then(|s| s.with_tol(tol))
            .map_err(|e| self.report("", e))
            .ok()
    }

    fn phases(&mut self, obj: &Map<String, Value>, sc: Option<&TransientScenario>) -> Option<(PrePhase, PostPhase)> {
        let pre = self.required(obj, "", "pre").and_then(|v| self.object(v, "pre"));
        let post = self.required(obj, "", "post").and_then(|v| self.object(v, "post"));
        let pre = pre.and_then(|p| {
            let t_start = self.required(p, "pre", "t_start").and_then(|v| self.number(v, "pre.t_start"));
            let x_start = self.required(p, "pre", "x_start").and_then(|v| self.vector(v, "pre.x_start"));
            let gain = self.gain(p, "pre", sc.map(|s| &s.sigma1));
            let (t_start, x_start, gain) = (t_start?, x_start?, gain?);
            if let Some(sc) = sc {
                if t_start > sc.t0 {
                    self.report("pre.t_start", format!("must not follow t0 ({t_start} > {})", sc.t0));
                    return None;
                }
                if x_start.dim() != sc.p() {
                    self.report("pre.x_start", format!("has dim {}, sigma1 has order {}", x_start.dim(), sc.p()));
                    return None;
                }
            }
            Some(PrePhase { t_start, x_start, gain })
        });
        let post = post.and_then(|p| {
            let t_end = self.required(p, "post", "t_end").and_then(|v| self.number(v, "post.t_end"));
            let gain = self.gain(p, "post", sc.map(|s| &s.sigma2));
            let (t_end, gain) = (t_end?, gain?);
            if let Some(sc) = sc {
                if t_end < sc.te {
                    self.report("post.t_end", format!("must not precede te ({t_end} < {})", sc.te));
                    return None;
                }
            }
            Some(PostPhase { t_end, gain })
        });
        Some((pre?, post?))
    }

    fn simulation(&mut self, obj: &Map<String, Value>, ov: Overrides) -> Option<Simulation> {
        let sys = self.required(obj, "", "system").and_then(|v| self.object(v, "system"));
        let a = sys
            .and_then(|s| self.required(s, "system", "a"))
            .and_then(|v| self.matrix(v, "system.a"));
        let kind = sys.and_then(|s| self.time_kind(s, "system"));
        let x0 = self.required(obj, "", "x0").and_then(|v| self.vector(v, "x0"));
        match kind? {
            TimeKind::Discrete => {
                let steps = self.required(obj, "", "steps").and_then(|v| self.count(v, "steps", 0));
                Some(Simulation::Discrete { a: a?, x0: x0?, steps: steps? })
            }
            TimeKind::Continuous => {
                let t0 = self.required(obj, "", "t0").and_then(|v| self.number(v, "t0"));
                let te = self.required(obj, "", "te").and_then(|v| self.number(v, "te"));
                let dt = match ov.dt {
                    Some(dt) => Some(dt),
                    None => obj.get("dt").map_or(Some(crossdim::dynamics::DEFAULT_DT), |v| self.positive(v, "dt")),
                };
                let (a, x0, t0, te, dt) = (a?, x0?, t0?, te?, dt?);
                let mut ok = true;
                if !a.is_square() {
                    self.report("system.a", format!("continuous flow needs a square matrix, got {}x{}", a.rows(), a.cols()));
                    ok = false;
                } else if a.rows() != x0.dim() {
                    self.report("x0", format!("has dim {}, system.a has order {}", x0.dim(), a.rows()));
                    ok = false;
                }
                if te < t0 {
                    self.report("te", format!("must not precede t0 ({te} < {t0})"));
                    ok = false;
                }
                ok.then_some(Simulation::Continuous { a, x0, t0, te, dt })
            }
        }
    }

    fn job(&mut self, mode: &str, obj: &Map<String, Value>, ov: Overrides) -> Option<Job> {
        match mode {
            "project" => {
                let n = self.required(obj, "", "n").and_then(|v| self.count(v, "n", 1));
                let x = obj.get("x").map(|v| self.vector(v, "x"));
                let system = obj.get("system").map(|v| self.system(v, "system"));
                if x.is_none() && system.is_none() {
                    self.report("", "project needs \"x\", \"system\" or both");
                    return None;
                }
                let x = x.map_or(Some(None), |x| x.map(Some))?;
                let system = system.map_or(Some(None), |s| s.map(Some))?;
                Some(Job::Project { n: n?, x, system })
            }
            "simulate" => self.simulation(obj, ov).map(Job::Simulate),
            "transient" => self.transient(obj, ov).map(Job::Transient),
            "phased" => {
                let scenario = self.transient(obj, ov);
                let phases = self.phases(obj, scenario.as_ref());
                let (pre, post) = phases?;
                Some(Job::Phased { scenario: scenario?, pre, post })
            }
            "reduce" => {
                let x = obj.get("x").map(|v| self.vector(v, "x"));
                let a = obj.get("a").map(|v| self.matrix(v, "a"));
                let b = obj.get("b").map(|v| self.matrix(v, "b"));
                let eps = obj.get("eps").map(|v| self.positive(v, "eps"));
                if x.is_none() && a.is_none() && b.is_none() {
                    self.report("", "reduce needs at least one of \"x\", \"a\", \"b\"");
                    return None;
                }
                let x = x.map_or(Some(None), |v| v.map(Some))?;
                let a = a.map_or(Some(None), |v| v.map(Some))?;
                let b = b.map_or(Some(None), |v| v.map(Some))?;
                let eps = eps.map_or(Some(None), |v| v.map(Some))?;
                Some(Job::Reduce { x, a, b, eps })
            }
            "norm" => {
                let a = self.required(obj, "", "a").and_then(|v| self.matrix(v, "a"));
                let sampling = match obj.get("samples") {
                    None => Some(None),
                    Some(v) => {
                        let samples = self.count(v, "samples", 1);
                        let seed = obj.get("seed").map_or(Some(0), |v| match v.as_u64() {
                            Some(s) => Some(s),
                            None => {
                                self.report("seed", format!("expected a non-negative integer, got {v}"));
                                None
                            }
                        });
                        let max_dim = obj
                            .get("max_dim")
                            .map_or(Some(DEFAULT_SAMPLES_DIM), |v| self.count(v, "max_dim", 1));
                        match (samples, seed, max_dim) {
                            (Some(samples), Some(seed), Some(max_dim)) => {
                                Some(Some(Sampling { samples, dims: 1..=max_dim, seed }))
                            }
                            _ => None,
                        }
                    }
                };
                Some(Job::Norm { a: a?, sampling: sampling? })
            }
            other => {
                self.report(
                    "mode",
                    format!("unknown mode \"{other}\" (expected project, simulate, transient, phased, reduce or norm)"),
                );
                None
            }
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str, ov: Overrides) -> Result<ScenarioFile, Issues> {
    let mut ck = Checker { issues: Vec::new() };
    if let Some(dt) = ov.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            ck.report("--dt", format!("must be positive, got {dt}"));
        }
    }
    if let Some(tol) = ov.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            ck.report("--tol", format!("must be positive, got {tol}"));
        }
    }
    if text.trim().is_empty() {
        ck.report("", "scenario file is empty");
        return Err(Issues(ck.issues));
    }
    let doc: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            ck.report(&format!("line {}, column {}", e.line(), e.column()), format!("invalid JSON: {e}"));
            return Err(Issues(ck.issues));
        }
    };
    let Some(obj) = ck.object(&doc, "") else { return Err(Issues(ck.issues)) };

    let version = ck.required(obj, "", "schema_version").and_then(|v| match v.as_u64() {
        Some(SCHEMA_VERSION) => Some(SCHEMA_VERSION),
        _ => {
            ck.report("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}"));
            None
        }
    });
    let output = obj.get("output").and_then(|v| match v.as_str() {
        Some(s) if !s.is_empty() => Some(PathBuf::from(s)),
        _ => {
            ck.report("output", "expected a non-empty path string");
            None
        }
    });
    let mode = ck.required(obj, "", "mode").and_then(|v| {
        let s = v.as_str();
        if s.is_none() {
            ck.report("mode", "expected a string");
        }
        s
    });
    let job = mode.and_then(|m| ck.job(m, obj, ov));
    match (version, job) {
        (Some(schema_version), Some(job)) if ck.issues.is_empty() => {
            Ok(ScenarioFile { schema_version, output, job })
        }
        _ => {
            if ck.issues.is_empty() {
                ck.report("", "invalid scenario");
            }
            Err(Issues(ck.issues))
        }
    }
}
